"""Training-sample lower bounds: extended-precision oracle for the four-term
bound, threshold arithmetic, solver certificates, and a frozen golden table."""

import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bmdlimits.errors import DomainError, Infeasible
from bmdlimits.minimax import (
    DEFAULT_SUPPORT_SIZE,
    BoundReport,
    FixedZeta,
    GridZeta,
    MinimaxQuery,
    cantelli_lambda,
    detection_threshold,
    hjw_lower_bound,
    min_training_sample,
    table_lower_bounds,
)

mpmath.mp.dps = 50


def hjw_oracle(n: int, S: int, zeta: float) -> float:
    z = mpmath.mpf(zeta)
    nn = mpmath.mpf(n)
    ss = mpmath.mpf(S)
    x = (1 + z) * nn / ss
    if x > mpmath.e / 16:
        first = mpmath.sqrt(mpmath.e * ss / ((1 + z) * nn)) / 8
    else:
        first = mpmath.e ** (-2 * x)
    log_s = mpmath.log(ss)
    penalty = 0 if log_s == 0 else 12 * mpmath.e ** (-z * z * ss / (32 * log_s**2))
    return float(first - mpmath.e ** (-z * z * nn / 24) - penalty)


# golden outputs of the default 16-row grid (FixedZeta(1), threshold-maximizing
# failure-budget split); regenerate only with a deliberate convention change
GOLDEN_TABLE = {
    (2000, 0.99, 0.005): 12_786_143,
    (2000, 0.99, 0.01): 10_585_825,
    (2000, 0.99, 0.03): 5_719_862,
    (2000, 0.99, 0.05): 3_574_824,
    (2000, 0.95, 0.005): 2_451_233,
    (2000, 0.95, 0.01): 2_251_740,
    (2000, 0.95, 0.03): 1_655_597,
    (2000, 0.95, 0.05): 1_268_289,
    (None, 0.99, 0.005): 10_678_214,
    (None, 0.99, 0.01): 8_979_488,
    (None, 0.99, 0.03): 5_061_537,
    (None, 0.99, 0.05): 3_243_455,
    (None, 0.95, 0.005): 2_274_823,
    (None, 0.95, 0.01): 2_096_068,
    (None, 0.95, 0.03): 1_556_714,
    (None, 0.95, 0.05): 1_201_612,
}


class TestHjwBound:
    @pytest.mark.parametrize(
        "n,S,zeta",
        [
            (100, 1000, 1.0),
            (10_000, 6_140_000, 1.0),
            (2_000_000, 6_140_000, 1.0),
            (2_000_000, 6_140_000, 0.3),
            (50_000_000, 6_140_000, 1.0),
            (3, 7, 0.5),
        ],
    )
    def test_against_oracle(self, n, S, zeta):
        assert hjw_lower_bound(n, S, zeta) == pytest.approx(
            hjw_oracle(n, S, zeta), abs=1e-12
        )

    def test_indicator_boundary(self):
        # straddle (1+zeta) n / S = e/16 and check both branches via the oracle
        S = 1_000_000
        n_star = S * math.e / 32.0  # zeta = 1
        for n in (int(n_star) - 1, int(n_star), int(n_star) + 2):
            assert hjw_lower_bound(n, S, 1.0) == pytest.approx(
                hjw_oracle(n, S, 1.0), abs=1e-12
            )

    def test_domain(self):
        with pytest.raises(DomainError):
            hjw_lower_bound(100, 1000, 0.0)
        with pytest.raises(DomainError):
            hjw_lower_bound(100, 1000, 1.5)
        with pytest.raises(DomainError):
            hjw_lower_bound(0, 1000, 1.0)

    @given(
        n=st.integers(min_value=10**5, max_value=10**9),
        zeta=st.floats(min_value=0.05, max_value=1.0),
    )
    @settings(max_examples=100)
    def test_oracle_agreement_randomized(self, n, zeta):
        S = DEFAULT_SUPPORT_SIZE
        assert hjw_lower_bound(n, S, zeta) == pytest.approx(
            hjw_oracle(n, S, zeta), abs=1e-12
        )

    def test_decays_in_n_past_peak(self):
        S = DEFAULT_SUPPORT_SIZE
        vals = [hjw_lower_bound(n, S, 1.0) for n in (10**6, 4 * 10**6, 16 * 10**6)]
        assert vals[0] > vals[1] > vals[2] > 0


class TestThreshold:
    def test_cantelli_values(self):
        assert cantelli_lambda(0.0) == 0.0
        assert cantelli_lambda(0.05) == pytest.approx(math.sqrt(0.05 / 0.95), abs=1e-15)
        with pytest.raises(DomainError):
            cantelli_lambda(1.0)

    def test_unbounded_formula(self):
        q = MinimaxQuery(r=0.005, alpha=0.05)
        value, formula, beta = detection_threshold(q)
        assert value == pytest.approx(0.01 + math.sqrt(0.05 / 0.95), abs=1e-12)
        assert beta is None
        assert "sqrt(alpha/(1-alpha))" in formula

    def test_finite_with_explicit_beta(self):
        q = MinimaxQuery(r=0.01, alpha=0.05, T=2000, beta=0.025)
        value, _, beta = detection_threshold(q)
        expect = 2 * ((0.025) ** (1 / 2000) + 0.01 - 1) + math.sqrt(0.025 / 0.975)
        assert value == pytest.approx(expect, abs=1e-12)
        assert beta == 0.025

    def test_default_beta_is_at_least_as_good(self):
        auto, _, _ = detection_threshold(MinimaxQuery(r=0.01, alpha=0.05, T=2000))
        for b in (0.01, 0.025, 0.04, 0.049):
            manual, _, _ = detection_threshold(
                MinimaxQuery(r=0.01, alpha=0.05, T=2000, beta=b)
            )
            assert auto >= manual - 1e-9

    def test_query_domain(self):
        with pytest.raises(DomainError):
            MinimaxQuery(r=0.0, alpha=0.05)
        with pytest.raises(DomainError):
            MinimaxQuery(r=0.01, alpha=0.05, beta=0.01)  # beta without T
        with pytest.raises(DomainError):
            MinimaxQuery(r=0.01, alpha=0.05, T=2000, beta=0.06)
        with pytest.raises(DomainError):
            MinimaxQuery(r=0.01, alpha=0.05, S=1)


class TestSolver:
    def test_certificates(self):
        report = min_training_sample(MinimaxQuery(r=0.01, alpha=0.05))
        n = report.min_training_n
        assert hjw_lower_bound(n, DEFAULT_SUPPORT_SIZE, 1.0) <= report.threshold
        assert report.bound_below is not None
        assert hjw_lower_bound(n - 1, DEFAULT_SUPPORT_SIZE, 1.0) > report.threshold

    def test_grid_zeta_never_weaker(self):
        fixed = min_training_sample(MinimaxQuery(r=0.03, alpha=0.05))
        grid = min_training_sample(
            MinimaxQuery(r=0.03, alpha=0.05, zeta=GridZeta(points=60))
        )
        assert grid.min_training_n >= fixed.min_training_n

    def test_nonpositive_threshold_infeasible(self):
        with pytest.raises(Infeasible):
            min_training_sample(MinimaxQuery(r=0.01, alpha=0.05, T=1, beta=0.025))

    def test_golden_table(self):
        rows = table_lower_bounds()
        assert len(rows) == 16
        for row in rows:
            key = (row["test_limit"], row["confidence"], row["altered_fraction"])
            assert row["min_training_n"] == GOLDEN_TABLE[key], key


class TestOrderings:
    """All pairwise orderings the published grid exhibits must hold exactly."""

    @pytest.fixture(scope="module")
    def table(self):
        rows = table_lower_bounds()
        return {
            (r["test_limit"], r["confidence"], r["altered_fraction"]): r["min_training_n"]
            for r in rows
        }

    def test_decreasing_in_altered_fraction(self, table):
        for T in (2000, None):
            for conf in (0.99, 0.95):
                seq = [table[(T, conf, r)] for r in (0.005, 0.01, 0.03, 0.05)]
                assert seq == sorted(seq, reverse=True)

    def test_higher_confidence_needs_more(self, table):
        for T in (2000, None):
            for r in (0.005, 0.01, 0.03, 0.05):
                assert table[(T, 0.99, r)] > table[(T, 0.95, r)]

    def test_finite_budget_needs_more(self, table):
        for conf in (0.99, 0.95):
            for r in (0.005, 0.01, 0.03, 0.05):
                assert table[(2000, conf, r)] > table[(None, conf, r)]
