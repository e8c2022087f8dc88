"""Monte Carlo engine for the attacker-vs-tester game on synthetic transactions.

Replications are grouped into fixed-size chunks; chunk c of logical stream s
draws from ``SeedSequence(seed, spawn_key=(s, c))``.  Chunk boundaries and the
in-chunk draw order are fixed, so results are bit-identical for a given seed
regardless of how many workers the chunks are spread over.

Within a chunk the draw order is:

1. test transactions (attribute by attribute for uniform/factored testers,
   one support draw for sparse testers; triggered attributes only),
2. flip uniforms for the triggered tests,
3. the altered-voter count (binomial per replication),
4. passive runs only: benign spoils, then extra spoils among altered voters.

Detection is per-replication Boolean: any test transaction that matches the
attacker's trigger and whose independent flip event fires is a catch.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np

from .errors import DomainError
from .kernels import PoissonModel, poisson_sf
from .parallel import detection_prob_iid
from .transactions import (
    Transaction,
    TransactionDistribution,
    TransactionSpace,
    distribution_from_config,
    space_from_config,
)

CHUNK_TRIALS = 4096  # fixed; never dependent on the worker count

_STREAM_TESTS = 0
_STREAM_PASSIVE_NULL = 1
_STREAM_PASSIVE_ATTACKED = 2
_STREAM_ESTIMATION = 3


@dataclass(frozen=True)
class MalloryStrategy:
    """Attacker behavior: a conjunctive trigger plus a per-transaction flip
    probability.

    ``trigger`` maps attribute names to allowed value indices; attributes not
    named are unconstrained.  A transaction matching every named attribute is
    altered with probability ``flip_prob``, independently per transaction.
    """

    trigger: tuple[tuple[str, tuple[int, ...]], ...]
    flip_prob: float
    label: str = ""

    def __post_init__(self) -> None:
        if not 0.0 <= self.flip_prob <= 1.0:
            raise DomainError("flip_prob must be in [0, 1]")

    @classmethod
    def from_mapping(
        cls, trigger: Mapping[str, Sequence[int]], flip_prob: float, label: str = ""
    ) -> "MalloryStrategy":
        items = tuple((name, tuple(sorted(set(vals)))) for name, vals in trigger.items())
        return cls(items, flip_prob, label)

    def validate_against(self, space: TransactionSpace) -> None:
        for name, vals in self.trigger:
            i = space.index_of(name)
            card = space.attributes[i].cardinality
            if not vals:
                raise DomainError(f"trigger for {name!r} allows no values")
            for v in vals:
                if not 0 <= v < card:
                    raise DomainError(f"trigger value {v} out of range for {name!r}")

    def matches(self, tx: Transaction, space: TransactionSpace) -> bool:
        for name, vals in self.trigger:
            if tx.coordinates[space.index_of(name)] not in vals:
                return False
        return True


@dataclass(frozen=True)
class PatStrategy:
    """Tester behavior: where test transactions come from and how many."""

    mode: Literal["uniform", "distribution", "script"]
    test_count: int
    distribution: TransactionDistribution | None = None
    scripts: tuple[Transaction, ...] | None = None

    def __post_init__(self) -> None:
        if self.test_count < 0:
            raise DomainError("test_count must be >= 0")
        if self.mode == "distribution" and self.distribution is None:
            raise DomainError("distribution mode requires a distribution")
        if self.mode == "script":
            if self.scripts is None:
                raise DomainError("script mode requires scripts")
            if len(self.scripts) != self.test_count:
                raise DomainError("script mode: test_count must equal len(scripts)")


@dataclass(frozen=True)
class PassiveParams:
    detect_rate: float
    base_rate: float
    alarm_threshold: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.detect_rate <= 1.0 or not 0.0 <= self.base_rate <= 1.0:
            raise DomainError("rates must be in [0, 1]")
        if self.alarm_threshold < 1:
            raise DomainError("alarm_threshold must be >= 1")


@dataclass(frozen=True)
class SimScenario:
    """Full specification of one attacker-vs-tester Monte Carlo experiment."""

    space: TransactionSpace
    voter_dist: TransactionDistribution
    n_voters: int
    mallory: MalloryStrategy
    pat: PatStrategy
    trials: int
    seed: int
    passive: PassiveParams | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.n_voters < 1:
            raise DomainError("n_voters must be >= 1")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        self.mallory.validate_against(self.space)
        if self.voter_dist.space.attributes != self.space.attributes:
            raise DomainError("voter distribution is over a different space")


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo estimate with its standard error and trial count."""

    value: float
    std_error: float
    trials: int


@dataclass(frozen=True)
class SimReport:
    label: str
    trials: int
    seed: int
    empirical_detection: Estimate | None = None
    empirical_altered_fraction: Estimate | None = None
    empirical_fp: Estimate | None = None
    empirical_fn: Estimate | None = None
    analytic: Mapping[str, float] | None = None

    def to_json(self) -> str:
        def enc(v):
            if isinstance(v, Estimate):
                return {"value": v.value, "std_error": v.std_error, "trials": v.trials}
            return v

        payload = {
            "label": self.label,
            "trials": self.trials,
            "seed": self.seed,
            "empirical_detection": enc(self.empirical_detection),
            "empirical_altered_fraction": enc(self.empirical_altered_fraction),
            "empirical_fp": enc(self.empirical_fp),
            "empirical_fn": enc(self.empirical_fn),
            "analytic": dict(self.analytic) if self.analytic is not None else None,
        }
        return json.dumps(payload, sort_keys=False)


# -- trigger probabilities --------------------------------------------------


def trigger_mass(
    mallory: MalloryStrategy, dist: TransactionDistribution
) -> float:
    """Probability that one draw from ``dist`` matches the trigger."""
    space = dist.space
    if dist.form == "factored":
        mass = 1.0
        for name, vals in mallory.trigger:
            i = space.index_of(name)
            mass *= float(dist.marginal(i)[list(vals)].sum())
        return mass
    assert dist.support is not None and dist.weights is not None
    total = 0.0
    for pt, w in zip(dist.support, dist.weights):
        if mallory.matches(Transaction(pt), space):
            total += float(w)
    return total


def _pat_sampling_dist(s: SimScenario) -> TransactionDistribution | None:
    if s.pat.mode == "uniform":
        return TransactionDistribution.uniform(s.space)
    if s.pat.mode == "distribution":
        return s.pat.distribution
    return None


def _triggered_tests(
    s: SimScenario, rng: np.random.Generator, n_rep: int
) -> np.ndarray:
    """Boolean (n_rep, test_count) matrix: test matches the trigger."""
    n = s.pat.test_count
    if s.pat.mode == "script":
        assert s.pat.scripts is not None
        row = np.array(
            [s.mallory.matches(tx, s.space) for tx in s.pat.scripts], dtype=bool
        )
        return np.broadcast_to(row, (n_rep, n)).copy()
    dist = _pat_sampling_dist(s)
    assert dist is not None
    if dist.form == "sparse":
        assert dist.support is not None
        trig_table = np.array(
            [s.mallory.matches(Transaction(pt), s.space) for pt in dist.support],
            dtype=bool,
        )
        idx = dist.sample_support_indices(rng, (n_rep, n))
        return trig_table[idx]
    # uniform / factored: draw only the attributes the trigger constrains
    out = np.ones((n_rep, n), dtype=bool)
    for name, vals in s.mallory.trigger:
        i = dist.space.index_of(name)
        w = dist.marginal(i)
        cdf = np.cumsum(w)
        cdf[-1] = 1.0
        draws = np.searchsorted(cdf, rng.random((n_rep, n)), side="right")
        allowed = np.zeros(len(w), dtype=bool)
        allowed[list(vals)] = True
        out &= allowed[draws]
    return out


def _chunk_bounds(trials: int) -> list[tuple[int, int]]:
    return [(lo, min(lo + CHUNK_TRIALS, trials)) for lo in range(0, trials, CHUNK_TRIALS)]


def _chunk_rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(stream, chunk)))


# -- parallel-testing simulation --------------------------------------------


def _parallel_chunk(s: SimScenario, chunk: int, lo: int, hi: int) -> tuple[int, int]:
    """(detections, altered-voter total) for one chunk of replications."""
    n_rep = hi - lo
    rng = _chunk_rng(s.seed, _STREAM_TESTS, chunk)
    q = s.mallory.flip_prob
    n = s.pat.test_count
    if n > 0:
        triggered = _triggered_tests(s, rng, n_rep)
        flips = rng.random((n_rep, n)) < q
        detected = int((triggered & flips).any(axis=1).sum())
    else:
        detected = 0
    p_voter = trigger_mass(s.mallory, s.voter_dist)
    altered = int(rng.binomial(s.n_voters, p_voter * q, size=n_rep).sum())
    return detected, altered


def run_parallel_sim(s: SimScenario, workers: int = 1) -> SimReport:
    """Empirical detection rate of the tester against the configured attack."""
    chunks = _chunk_bounds(s.trials)
    jobs = [(s, c, lo, hi) for c, (lo, hi) in enumerate(chunks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_parallel_chunk_star, jobs))
    else:
        results = [_parallel_chunk(*job) for job in jobs]
    detected = sum(r[0] for r in results)
    altered = sum(r[1] for r in results)

    det = detected / s.trials
    alt = altered / (s.trials * s.n_voters)
    analytic: dict[str, float] = {}
    pat_dist = _pat_sampling_dist(s)
    q = s.mallory.flip_prob
    if pat_dist is not None:
        p_test = trigger_mass(s.mallory, pat_dist)
        analytic["trigger_mass_under_tests"] = p_test
        analytic["detection"] = detection_prob_iid(p_test * q, s.pat.test_count)
    elif s.pat.scripts is not None:
        matches = sum(s.mallory.matches(tx, s.space) for tx in s.pat.scripts)
        analytic["triggered_scripts"] = float(matches)
        analytic["detection"] = detection_prob_iid(q, matches) if matches else 0.0
    p_voter = trigger_mass(s.mallory, s.voter_dist)
    analytic["altered_fraction"] = p_voter * q
    return SimReport(
        label=s.label,
        trials=s.trials,
        seed=s.seed,
        empirical_detection=_estimate(det, s.trials),
        empirical_altered_fraction=Estimate(
            alt, math.sqrt(max(alt * (1 - alt), 0.0) / (s.trials * s.n_voters)), s.trials
        ),
        analytic=analytic,
    )


def _parallel_chunk_star(job):
    return _parallel_chunk(*job)


# -- passive-testing simulation ---------------------------------------------


def _passive_chunk(s: SimScenario, chunk: int, lo: int, hi: int) -> tuple[int, int, int]:
    """(null alarms, attacked alarms, altered total) for one chunk."""
    assert s.passive is not None
    n_rep = hi - lo
    b = s.passive.base_rate
    d = s.passive.detect_rate
    k = s.passive.alarm_threshold
    q = s.mallory.flip_prob
    p_voter = trigger_mass(s.mallory, s.voter_dist)

    rng0 = _chunk_rng(s.seed, _STREAM_PASSIVE_NULL, chunk)
    spoils0 = rng0.binomial(s.n_voters, b, size=n_rep)
    alarms0 = int((spoils0 >= k).sum())

    rng1 = _chunk_rng(s.seed, _STREAM_PASSIVE_ATTACKED, chunk)
    altered = rng1.binomial(s.n_voters, p_voter * q, size=n_rep)
    benign = rng1.binomial(s.n_voters - altered, b)
    # an altered voter spoils if either the benign or the noticing event fires
    extra = rng1.binomial(altered, b + d - b * d)
    alarms1 = int(((benign + extra) >= k).sum())
    return alarms0, alarms1, int(altered.sum())


def run_passive_sim(s: SimScenario, workers: int = 1) -> SimReport:
    """Empirical alarm rates with the attack disabled (fp) and enabled (fn),
    next to the Poisson-model predictions."""
    if s.passive is None:
        raise DomainError("scenario has no passive parameters")
    chunks = _chunk_bounds(s.trials)
    jobs = [(s, c, lo, hi) for c, (lo, hi) in enumerate(chunks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_passive_chunk_star, jobs))
    else:
        results = [_passive_chunk(*job) for job in jobs]
    alarms0 = sum(r[0] for r in results)
    alarms1 = sum(r[1] for r in results)
    altered = sum(r[2] for r in results)

    fp = alarms0 / s.trials
    fn = 1.0 - alarms1 / s.trials
    alt = altered / (s.trials * s.n_voters)
    b = s.passive.base_rate
    d = s.passive.detect_rate
    k = s.passive.alarm_threshold
    p_voter = trigger_mass(s.mallory, s.voter_dist)
    attack_rate = p_voter * s.mallory.flip_prob * d
    analytic = {
        "fp": poisson_sf(PoissonModel(s.n_voters * b), k),
        "fn": 1.0 - poisson_sf(PoissonModel(s.n_voters * (b + attack_rate)), k),
        "altered_fraction": p_voter * s.mallory.flip_prob,
    }
    return SimReport(
        label=s.label,
        trials=s.trials,
        seed=s.seed,
        empirical_fp=_estimate(fp, s.trials),
        empirical_fn=_estimate(fn, s.trials),
        empirical_altered_fraction=Estimate(
            alt, math.sqrt(max(alt * (1 - alt), 0.0) / (s.trials * s.n_voters)), s.trials
        ),
        analytic=analytic,
    )


def _passive_chunk_star(job):
    return _passive_chunk(*job)


def _estimate(p: float, trials: int) -> Estimate:
    return Estimate(p, math.sqrt(max(p * (1.0 - p), 0.0) / trials), trials)


# -- plug-in estimation study ------------------------------------------------


@dataclass(frozen=True)
class EstimationReport:
    n_train: int
    trials: int
    seed: int
    mean_l1: float
    std_l1: float
    min_l1: float
    max_l1: float
    support_size: int
    lower_bound_at_n: float

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=False)


def _estimation_chunk(
    weights: np.ndarray, n_train: int, seed: int, chunk: int, n_rep: int
) -> np.ndarray:
    rng = _chunk_rng(seed, _STREAM_ESTIMATION, chunk)
    counts = rng.multinomial(n_train, weights, size=n_rep)
    return np.abs(counts / n_train - weights).sum(axis=1)


def run_estimation_study(
    space: TransactionSpace,
    true_dist: TransactionDistribution,
    n_train: int,
    trials: int,
    seed: int,
    workers: int = 1,
) -> EstimationReport:
    """L1 error of the plug-in estimator from ``n_train`` IID draws.

    Sampling is by multinomial counts over the support, which is equivalent to
    drawing individual transactions and tallying.  The reported lower bound is
    the worst case over all distributions on this support size, so it is a
    comparison column, not an assertion about this particular distribution.
    """
    from .minimax import hjw_lower_bound

    if true_dist.form != "sparse":
        if true_dist.space.cardinality > 10**6:
            raise DomainError("estimation study needs a sparse (or small) distribution")
        dense = true_dist.to_dense()
        support_size = int((dense > 0).sum())
        weights = dense[dense > 0]
    else:
        assert true_dist.weights is not None
        weights = np.asarray(true_dist.weights, dtype=float)
        support_size = len(weights)
    if n_train < 1 or trials < 1:
        raise DomainError("n_train and trials must be >= 1")

    chunks = _chunk_bounds(trials)
    jobs = [(weights, n_train, seed, c, hi - lo) for c, (lo, hi) in enumerate(chunks)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_estimation_chunk_star, jobs))
    else:
        parts = [_estimation_chunk(*job) for job in jobs]
    l1 = np.concatenate(parts)
    bound = (
        hjw_lower_bound(n_train, support_size, 1.0) if support_size >= 2 else float("-inf")
    )
    return EstimationReport(
        n_train=n_train,
        trials=trials,
        seed=seed,
        mean_l1=float(l1.mean()),
        std_l1=float(l1.std(ddof=1)) if trials > 1 else 0.0,
        min_l1=float(l1.min()),
        max_l1=float(l1.max()),
        support_size=support_size,
        lower_bound_at_n=bound,
    )


def _estimation_chunk_star(job):
    return _estimation_chunk(*job)


# -- declarative scenario files ---------------------------------------------


def scenario_from_config(cfg: Mapping) -> SimScenario:
    """Scenario from a JSON-style mapping; see the repository scenarios/ for
    worked examples."""
    space = space_from_config(cfg["space"])
    voter_dist = distribution_from_config(space, cfg.get("voter_distribution", {}))
    mallory_cfg = cfg["mallory"]
    mallory = MalloryStrategy.from_mapping(
        mallory_cfg.get("trigger", {}),
        mallory_cfg["flip_prob"],
        mallory_cfg.get("label", ""),
    )
    pat_cfg = cfg["pat"]
    mode = pat_cfg["mode"]
    dist = None
    scripts = None
    if mode == "distribution":
        dist = distribution_from_config(space, pat_cfg["distribution"])
    if mode == "script":
        scripts = tuple(Transaction(tuple(c)) for c in pat_cfg["scripts"])
        for tx in scripts:
            space.validate_coordinates(tx.coordinates)
    pat = PatStrategy(
        mode=mode,
        test_count=int(pat_cfg.get("test_count", len(scripts) if scripts else 0)),
        distribution=dist,
        scripts=scripts,
    )
    passive = None
    if "passive" in cfg and cfg["passive"] is not None:
        p = cfg["passive"]
        passive = PassiveParams(
            detect_rate=p["detect_rate"],
            base_rate=p["base_rate"],
            alarm_threshold=int(p["alarm_threshold"]),
        )
    return SimScenario(
        space=space,
        voter_dist=voter_dist,
        n_voters=int(cfg["n_voters"]),
        mallory=mallory,
        pat=pat,
        trials=int(cfg["trials"]),
        seed=int(cfg["seed"]),
        passive=passive,
        label=cfg.get("label", ""),
    )


def load_scenario(path: str) -> tuple[str, SimScenario]:
    """(kind, scenario) from a JSON file; kind is 'parallel' or 'passive'."""
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    kind = cfg.get("kind", "parallel")
    if kind not in ("parallel", "passive"):
        raise DomainError(f"unknown scenario kind {kind!r}")
    return kind, scenario_from_config(cfg)
