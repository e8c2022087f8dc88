"""Closed-form detection probabilities and test/electorate solvers for
logic-and-accuracy and parallel (live) testing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

from .errors import DomainError, Infeasible
from .kernels import log_no_replacement_miss_prob, smallest_int_where

Sampling = Literal["with_replacement", "without_replacement"]
Rounding = Literal["half_up", "floor", "ceil"]


@dataclass(frozen=True)
class OracleBoundQuery:
    """How many printouts must an error oracle inspect to find a flaw?"""

    population: int  # cast BMD printouts (V)
    flawed: int  # printouts with errors (F)
    confidence: float  # required detection probability

    def __post_init__(self) -> None:
        if self.population < 1:
            raise DomainError("population must be >= 1")
        if not 0 <= self.flawed <= self.population:
            raise DomainError("flawed must be in [0, population]")
        if not 0.0 < self.confidence < 1.0:
            raise DomainError("confidence must be in (0, 1)")


@dataclass(frozen=True)
class BudgetedTestQuery:
    """How large must an electorate be for a fixed per-machine test budget?"""

    tests_per_bmd_per_day: int
    bmd_daily_capacity: int  # transactions a machine can handle in a day
    altered_fraction: float  # fraction r of transactions the attacker alters
    confidence: float

    def __post_init__(self) -> None:
        if self.tests_per_bmd_per_day < 1 or self.bmd_daily_capacity < 1:
            raise DomainError("test budget and capacity must be >= 1")
        if self.tests_per_bmd_per_day > self.bmd_daily_capacity:
            raise DomainError("tests per BMD cannot exceed daily capacity")
        if not 0.0 < self.altered_fraction <= 1.0:
            raise DomainError("altered_fraction must be in (0, 1]")
        if not 0.0 < self.confidence < 1.0:
            raise DomainError("confidence must be in (0, 1)")


@dataclass(frozen=True)
class ElectorateResult:
    """Solved electorate size plus the convention that produced it."""

    bmds: int
    voters: int
    tests: int
    altered: int
    achieved_detection: float
    sampling: Sampling
    rounding: Rounding


def detection_prob_iid(p: float, n: int) -> float:
    """1 - (1 - p)^n, evaluated via log1p so small p stays accurate."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p}")
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if p == 0.0 or n == 0:
        return 0.0
    if p == 1.0:
        return 1.0
    return -math.expm1(n * math.log1p(-p))


def min_tests_iid(p: float, confidence: float) -> int:
    """Smallest t with 1 - (1 - p)^t >= confidence (strict minimum).

    The narrative companion to this result rounds 299 up to 300; the solver
    returns the certificate-backed minimum.
    """
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must be in (0, 1), got {confidence}")
    if p <= 0.0:
        raise Infeasible("an attack that touches no transactions cannot be detected")
    if not p < 1.0:
        raise DomainError(f"p must be in (0, 1), got {p}")
    t = max(1, math.ceil(math.log1p(-confidence) / math.log1p(-p)))
    while detection_prob_iid(p, t) < confidence:  # float guard
        t += 1
    while t > 1 and detection_prob_iid(p, t - 1) >= confidence:
        t -= 1
    return t


def oracle_min_samples(q: OracleBoundQuery) -> int:
    """Smallest sample of printouts an error oracle needs for the target
    detection probability, sampling without replacement."""
    if q.flawed == 0:
        raise Infeasible("no flawed printouts: nothing is detectable")
    log_alpha = math.log1p(-q.confidence)

    def ok(n: int) -> bool:
        return log_no_replacement_miss_prob(q.population, q.flawed, n) <= log_alpha

    return smallest_int_where(ok, lo=0, guess=1, hi_limit=q.population + 1)


def _round_altered(r: float, voters: int, rounding: Rounding) -> int:
    if rounding == "half_up":
        return math.floor(r * voters + 0.5)
    if rounding == "floor":
        return math.floor(r * voters)
    if rounding == "ceil":
        return math.ceil(r * voters)
    raise DomainError(f"unknown rounding {rounding!r}")


def _log_miss(voters: int, altered: int, tests: int, sampling: Sampling) -> float:
    if altered == 0:
        return 0.0
    if sampling == "with_replacement":
        return tests * math.log1p(-altered / voters)
    if sampling == "without_replacement":
        return log_no_replacement_miss_prob(voters, altered, tests)
    raise DomainError(f"unknown sampling convention {sampling!r}")


def min_electorate_for_budget(
    q: BudgetedTestQuery,
    sampling: Sampling = "with_replacement",
    rounding: Rounding = "half_up",
) -> ElectorateResult:
    """Smallest machine count whose aggregate test budget reaches the target
    detection probability against an ``altered_fraction`` attack.

    Voters scale as machines times daily capacity and tests as machines times
    the per-machine budget.  The altered count and the sampling model are
    conventions, reported in the result so downstream numbers can be audited;
    the defaults reproduce the published 47-machine / 6,580-voter figure.
    Detection feasibility is not monotone in the machine count (the altered
    count is re-rounded at each size), so the scan is linear.
    """
    log_alpha = math.log1p(-q.confidence)
    for bmds in range(1, 1_000_000):
        voters = bmds * q.bmd_daily_capacity
        tests = bmds * q.tests_per_bmd_per_day
        altered = _round_altered(q.altered_fraction, voters, rounding)
        if altered == 0:
            continue
        if sampling == "without_replacement" and tests > voters:
            continue
        log_miss = _log_miss(voters, altered, tests, sampling)
        if log_miss <= log_alpha:
            return ElectorateResult(
                bmds=bmds,
                voters=voters,
                tests=tests,
                altered=altered,
                achieved_detection=-math.expm1(log_miss),
                sampling=sampling,
                rounding=rounding,
            )
    raise Infeasible("no machine count below 1e6 reaches the target confidence")


def margin_leverage(
    altered_ballot_fraction: float, contest_ballot_share: float, undervote_rate: float
) -> float:
    """Maximum ordinary-margin shift from altering a fraction of all ballots.

    Each altered ballot moves the margin by two votes; the shift concentrates
    in the contest's share of ballots and is further amplified by undervotes:
    2x / (share * (1 - undervote_rate)).
    """
    if altered_ballot_fraction < 0:
        raise DomainError("altered_ballot_fraction must be >= 0")
    denom = contest_ballot_share * (1.0 - undervote_rate)
    if contest_ballot_share <= 0 or undervote_rate >= 1 or denom <= 0:
        raise DomainError("contest share times (1 - undervote rate) must be positive")
    return 2.0 * altered_ballot_fraction / denom


def epsilon_budget(alpha: float, beta: float, r: float, T: int) -> float:
    """Largest estimation error (L1) compatible with a T-test budget:
    2 * ((alpha - beta)^(1/T) + r - 1).

    May be negative: no estimation accuracy suffices at this budget.
    """
    if not beta < alpha:
        raise Infeasible("no test count works unless beta < alpha")
    if not 0.0 < r < 1.0:
        raise DomainError(f"r must be in (0, 1), got {r}")
    if T < 1:
        raise DomainError(f"T must be >= 1, got {T}")
    if beta < 0 or alpha >= 1:
        raise DomainError("need 0 <= beta < alpha < 1")
    return 2.0 * ((alpha - beta) ** (1.0 / T) + r - 1.0)


def min_tests_with_estimation_error(
    r: float, epsilon: float, alpha: float, beta: float
) -> int:
    """Smallest t with (1 + epsilon/2 - r)^t <= alpha - beta."""
    if not beta < alpha:
        raise Infeasible("no test count works unless beta < alpha")
    if not 0.0 < r < 1.0:
        raise DomainError(f"r must be in (0, 1), got {r}")
    if epsilon < 0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon}")
    if epsilon >= 2.0 * r:
        raise Infeasible(
            "estimation error at least 2r: the attack can hide in unestimated "
            "support with zero chance of detection"
        )
    base = 1.0 + epsilon / 2.0 - r
    target = math.log(alpha - beta)
    t = max(1, math.ceil(target / math.log(base)))
    while t * math.log(base) > target:
        t += 1
    while t > 1 and (t - 1) * math.log(base) <= target:
        t -= 1
    return t


def session_minutes(test_counts: Sequence[int], minutes_per_test: float) -> float:
    """Total tester minutes for a set of test sessions.

    Clock-time narratives depend on per-test durations, which are inputs here,
    not built-in constants.
    """
    if minutes_per_test < 0:
        raise DomainError("minutes_per_test must be >= 0")
    return float(sum(test_counts)) * minutes_per_test
