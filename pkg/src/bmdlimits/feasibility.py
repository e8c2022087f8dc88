"""Jurisdiction turnout ingestion and feasibility joins.

Passive monitoring needs a minimum contest size; most jurisdictions are small.
This module loads turnout records (CSV, schema ``state,jurisdiction,turnout``),
summarizes the size distribution, and joins it against a monitoring design to
flag where the required contest size exceeds the available electorate.

Real turnout data is not bundled; synthetic fixtures with a documented
construction live under scripts/.  Jurisdiction counts are a property of the
input data, never a constant.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DomainError, ParseError
from .passive import PassiveDesign, min_contest_size

_COLUMNS = ("state", "jurisdiction", "turnout")


@dataclass(frozen=True)
class JurisdictionRecord:
    state: str
    jurisdiction: str
    turnout: int

    def __post_init__(self) -> None:
        if self.turnout < 0:
            raise DomainError("turnout must be >= 0")


@dataclass(frozen=True)
class FeasibilitySummary:
    """Size-distribution summary of a turnout dataset.

    ``median_turnout`` is the lower median for even counts (integer-voter
    semantics, deterministic).  ``states_where_majority_below`` counts states in
    which strictly more than half the jurisdictions fall below the first
    threshold.
    """

    count: int
    median_turnout: int
    fraction_below: Mapping[int, float]
    per_state_fraction_below: Mapping[str, float]
    states_where_majority_below: int


def load_turnout(path: str) -> list[JurisdictionRecord]:
    """Records from a CSV file; malformed rows are reported with line numbers."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return parse_turnout(fh)


def parse_turnout(fh) -> list[JurisdictionRecord]:
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty file: expected header 'state,jurisdiction,turnout'")
    if tuple(h.strip() for h in header) != _COLUMNS:
        raise ParseError(
            f"bad header {header!r}: expected {','.join(_COLUMNS)!r}"
        )
    records: list[JurisdictionRecord] = []
    seen: set[tuple[str, str]] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(f"line {lineno}: expected 3 fields, got {len(row)}")
        state, jurisdiction, raw = (f.strip() for f in row)
        try:
            turnout = int(raw)
        except ValueError:
            raise ParseError(f"line {lineno}: turnout {raw!r} is not an integer")
        if turnout < 0:
            raise ParseError(f"line {lineno}: turnout must be >= 0")
        key = (state, jurisdiction)
        if key in seen:
            raise ParseError(f"line {lineno}: duplicate jurisdiction {key!r}")
        seen.add(key)
        records.append(JurisdictionRecord(state, jurisdiction, turnout))
    return records


def emit_turnout(records: Sequence[JurisdictionRecord]) -> str:
    """Canonical CSV text; round-trips byte-identically through the parser."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_COLUMNS)
    for r in records:
        writer.writerow([r.state, r.jurisdiction, r.turnout])
    return out.getvalue()


def lower_median(values: Sequence[int]) -> int:
    if not values:
        raise DomainError("median of empty data")
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def summarize(
    records: Sequence[JurisdictionRecord], thresholds: Sequence[int]
) -> FeasibilitySummary:
    """Median, below-threshold fractions, and per-state majority indicators.

    The per-state fractions and the majority count use the first threshold.
    """
    if not records:
        raise DomainError("cannot summarize an empty dataset")
    if not thresholds:
        raise DomainError("at least one threshold is required")
    turnouts = [r.turnout for r in records]
    fraction_below = {
        t: sum(v < t for v in turnouts) / len(turnouts) for t in thresholds
    }
    lead = thresholds[0]
    by_state: dict[str, list[int]] = {}
    for r in records:
        by_state.setdefault(r.state, []).append(r.turnout)
    per_state = {
        s: sum(v < lead for v in vs) / len(vs) for s, vs in sorted(by_state.items())
    }
    majority = sum(frac > 0.5 for frac in per_state.values())
    return FeasibilitySummary(
        count=len(records),
        median_turnout=lower_median(turnouts),
        fraction_below=fraction_below,
        per_state_fraction_below=per_state,
        states_where_majority_below=majority,
    )


@dataclass(frozen=True)
class JoinRow:
    state: str
    jurisdiction: str
    turnout: int
    required: int
    feasible: bool  # turnout >= required counts as feasible


@dataclass(frozen=True)
class JoinResult:
    required_contest_size: int
    rows: tuple[JoinRow, ...]
    fraction_infeasible: float
    per_state_fraction_infeasible: Mapping[str, float]
    states_where_majority_infeasible: int


def passive_feasibility_join(
    records: Sequence[JurisdictionRecord], design: PassiveDesign
) -> JoinResult:
    """Flag each jurisdiction by whether its turnout covers the minimum contest
    size of the design; a turnout exactly equal to the requirement is feasible."""
    if not records:
        raise DomainError("cannot join an empty dataset")
    required = min_contest_size(design).contest_size
    rows = tuple(
        JoinRow(r.state, r.jurisdiction, r.turnout, required, r.turnout >= required)
        for r in records
    )
    infeasible = sum(not row.feasible for row in rows)
    by_state: dict[str, list[bool]] = {}
    for row in rows:
        by_state.setdefault(row.state, []).append(row.feasible)
    per_state = {
        s: sum(not f for f in fs) / len(fs) for s, fs in sorted(by_state.items())
    }
    majority = sum(frac > 0.5 for frac in per_state.values())
    return JoinResult(
        required_contest_size=required,
        rows=rows,
        fraction_infeasible=infeasible / len(rows),
        per_state_fraction_infeasible=per_state,
        states_where_majority_infeasible=majority,
    )
