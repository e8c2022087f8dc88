"""Minimum contest sizes for spoiled-ballot-rate monitoring.

Spoiled-ballot counts are modeled as Poisson with exactly known rate: mean
``N * base_rate`` when machines behave, increased by half the margin times the
detection rate when an outcome-changing attack is underway.

Two accounting conventions for the miss probability are provided:

* ``"published"`` (default) counts a miss only when the spoil count falls at
  least two below the alarm threshold, i.e. ``P{X <= k - 2}``, with the
  threshold floored at two spoils.  This carries an off-by-one relative to the
  threshold's false-positive calibration, but it reproduces the published
  contest-size tables entry for entry, so it is kept as the reference
  behavior.
* ``"strict"`` counts a miss whenever the alarm does not fire: ``P{X < k}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

from .errors import DomainError, Infeasible
from .kernels import PoissonModel, poisson_sf, poisson_upper_quantile, smallest_int_where

Convention = Literal["published", "strict"]

_DOWNWARD_SCAN = 64  # guard width against discreteness-induced feasibility pockets


@dataclass(frozen=True)
class PassiveDesign:
    """Inputs of one passive-testing design problem.

    margin        winner-minus-runner-up fraction of valid votes
    detect_rate   fraction of affected voters who notice and spoil (d)
    base_rate     benign per-voter spoil probability (b)
    fp_budget     max false-positive probability
    fn_budget     max false-negative probability
    """

    margin: float
    detect_rate: float
    base_rate: float
    fp_budget: float
    fn_budget: float

    def __post_init__(self) -> None:
        for name in ("margin", "detect_rate", "base_rate", "fp_budget", "fn_budget"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise DomainError(f"{name} must be in (0, 1), got {v}")

    @property
    def attack_rate(self) -> float:
        """Extra per-voter spoil rate induced by an outcome-changing attack.

        The attacker alters votes on a margin/2 fraction of ballots (enough to
        reverse a ``margin`` lead) and a ``detect_rate`` fraction of those
        voters notice and spoil.
        """
        return self.margin / 2.0 * self.detect_rate


@dataclass(frozen=True)
class PassiveSolution:
    """Solved minimum contest size with its alarm threshold and certificates."""

    contest_size: int
    alarm_threshold: int
    achieved_fp: float
    achieved_fn: float
    convention: Convention


def passive_power(N: int, design: PassiveDesign, k: int) -> tuple[float, float]:
    """(false-positive, false-negative) probabilities at contest size N, threshold k.

    fp = P{Pois(N*b) >= k}; fn = P{Pois(N*(b + margin/2 * d)) < k}.
    """
    if k < 1:
        raise DomainError(f"alarm threshold must be >= 1, got {k}")
    if N < 1:
        raise DomainError(f"contest size must be >= 1, got {N}")
    benign = PoissonModel(N * design.base_rate)
    attacked = PoissonModel(N * (design.base_rate + design.attack_rate))
    return poisson_sf(benign, k), 1.0 - poisson_sf(attacked, k)


def alarm_threshold(N: int, design: PassiveDesign) -> int:
    """Smallest k whose benign false-positive rate meets the fp budget."""
    return poisson_upper_quantile(PoissonModel(N * design.base_rate), design.fp_budget)


def _achieved(N: int, design: PassiveDesign, convention: Convention) -> tuple[int, float, float]:
    k = alarm_threshold(N, design)
    if convention == "published" and k < 2:
        # a one-spoil alarm would make the k-2 miss event vacuous; require
        # at least two spoils before alarming
        k = 2
    fp = poisson_sf(PoissonModel(N * design.base_rate), k)
    attacked = PoissonModel(N * (design.base_rate + design.attack_rate))
    if convention == "published":
        fn = 1.0 - poisson_sf(attacked, k - 1)  # P{X <= k - 2}
    elif convention == "strict":
        fn = 1.0 - poisson_sf(attacked, k)  # P{X < k}
    else:
        raise DomainError(f"unknown convention {convention!r}")
    return k, fp, fn


def _feasible(N: int, design: PassiveDesign, convention: Convention) -> bool:
    _, fp, fn = _achieved(N, design, convention)
    return fp <= design.fp_budget and fn <= design.fn_budget


def _fn_at(N: int, design: PassiveDesign, k: int, convention: Convention) -> float:
    attacked = PoissonModel(N * (design.base_rate + design.attack_rate))
    if convention == "published":
        return 1.0 - poisson_sf(attacked, k - 1)  # P{X <= k - 2}
    return 1.0 - poisson_sf(attacked, k)  # P{X < k}


def _largest_fp_ok(design: PassiveDesign, k: int) -> int:
    """Largest N whose benign tail at threshold k stays within the fp budget
    (0 when even N=1 exceeds it); the tail is increasing in N."""

    def too_big(N: int) -> bool:
        return poisson_sf(PoissonModel(N * design.base_rate), k) > design.fp_budget

    guess = max(1, int(k / design.base_rate))
    return smallest_int_where(too_big, lo=0, guess=guess) - 1


def _smallest_fn_ok(design: PassiveDesign, k: int, convention: Convention) -> int:
    """Smallest N whose miss probability at threshold k meets the fn budget;
    the miss probability is decreasing in N."""

    def ok(N: int) -> bool:
        return _fn_at(N, design, k, convention) <= design.fn_budget

    guess = max(1, int(k / (design.base_rate + design.attack_rate)))
    return smallest_int_where(ok, lo=0, guess=guess)


def _interval_start(
    design: PassiveDesign, k: int, convention: Convention, k_floor: int
) -> tuple[int, int]:
    """(start, end) of the contest sizes at which threshold k is both the
    alarm threshold and meets the budgets; start > end means empty.

    At sizes up to ``_largest_fp_ok(k - 1)`` the quantile would pick a smaller
    threshold, so those are excluded (except at the floor threshold).
    """
    end = _largest_fp_ok(design, k)
    start = _smallest_fn_ok(design, k, convention)
    if k > k_floor:
        start = max(start, _largest_fp_ok(design, k - 1) + 1)
    return start, end


def min_contest_size(
    design: PassiveDesign, convention: Convention = "published"
) -> PassiveSolution:
    """Smallest contest size N admitting a threshold that meets both budgets.

    Feasibility in N is not monotone: every unit increase of the alarm
    threshold opens a pocket of infeasible sizes just above it.  The search
    therefore runs over thresholds k, for which the feasible sizes form an
    interval whose endpoints are increasing in k, so the answer is the start
    of the first nonempty interval.  A downward scan over ``_DOWNWARD_SCAN``
    thresholds certifies that no smaller threshold admits a smaller size.
    """
    if design.attack_rate <= 0.0:
        raise Infeasible("attack is statistically invisible (margin * detect_rate = 0)")
    k_floor = 2 if convention == "published" else 1

    def nonempty(k: int) -> bool:
        start, end = _interval_start(design, k, convention, k_floor)
        return start <= end

    # bracket the first workable threshold, then bisect to it
    k_hi = k_floor
    while not nonempty(k_hi):
        k_hi *= 2
        if k_hi > 10**7:
            raise Infeasible("no alarm threshold below 1e7 meets both budgets")
    k_lo = max(k_floor - 1, k_hi // 2)  # empty (or below the floor)
    while k_hi - k_lo > 1:
        mid = (k_lo + k_hi) // 2
        if nonempty(mid):
            k_hi = mid
        else:
            k_lo = mid
    # guard: integer jitter can make emptiness non-monotone right below
    for k in range(max(k_floor, k_hi - _DOWNWARD_SCAN), k_hi):
        if nonempty(k):
            k_hi = k
            break
    best, _ = _interval_start(design, k_hi, convention, k_floor)
    # certificates: best is feasible, best - 1 is not
    k, fp, fn = _achieved(best, design, convention)
    if not (fp <= design.fp_budget and fn <= design.fn_budget):  # pragma: no cover
        raise AssertionError("feasibility certificate failed")
    if best > 1 and _feasible(best - 1, design, convention):  # pragma: no cover
        raise AssertionError("minimality certificate failed")
    return PassiveSolution(best, k, fp, fn, convention)


def table_passive(
    fp_fn: float,
    margins: Sequence[float],
    detect_rates: Sequence[float],
    base_rates: Sequence[float],
    convention: Convention = "published",
) -> list[dict]:
    """Grid of minimum contest sizes, one row per (margin, detect rate).

    Row and column ordering matches the published tables: margins outermost,
    detection rates within each margin, base rates across the columns.
    """
    if not (margins and detect_rates and base_rates):
        raise DomainError("grids must be nonempty")
    rows = []
    for margin in margins:
        for d in detect_rates:
            row: dict = {"margin": margin, "detect_rate": d}
            for b in base_rates:
                design = PassiveDesign(margin, d, b, fp_fn, fp_fn)
                row[f"base_rate={b:g}"] = min_contest_size(design, convention).contest_size
            rows.append(row)
    return rows
