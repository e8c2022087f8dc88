import pathlib

import pytest

DATA_DIR = pathlib.Path(__file__).parent / "data"
SCENARIO_DIR = pathlib.Path(__file__).parent.parent / "scenarios"


@pytest.fixture(scope="session")
def data_dir() -> pathlib.Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def scenario_dir() -> pathlib.Path:
    return SCENARIO_DIR
