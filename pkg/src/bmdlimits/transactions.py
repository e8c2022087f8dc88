"""The factored space of voting transactions and distributions over it.

A transaction is one voter's full interaction with a ballot-marking device,
modeled as one value per attribute (language, timing bin, settings, ...).
Two built-in presets, ``optimistic`` and ``realistic``, mirror the published
attribute table column by column; rows absent from the optimistic column are
omitted from the optimistic preset.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, ParseError

#: Dense enumeration (e.g. for L1 distances between factored distributions)
#: is only permitted below this cardinality; everything larger must be sparse.
DENSE_LIMIT = 10**7

_MASS_TOL = 1e-9


@dataclass(frozen=True)
class AttributeSpec:
    """One attribute of a voting transaction and how many values it can take."""

    name: str
    cardinality: int

    def __post_init__(self) -> None:
        if self.cardinality < 1:
            raise DomainError(f"cardinality of {self.name!r} must be >= 1")


@dataclass(frozen=True)
class TransactionSpace:
    """Ordered product of attributes; a transaction is one point in it."""

    attributes: tuple[AttributeSpec, ...]

    def __post_init__(self) -> None:
        if not self.attributes:
            raise DomainError("a transaction space needs at least one attribute")
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise DomainError("attribute names must be unique")

    @property
    def cardinality(self) -> int:
        return math.prod(a.cardinality for a in self.attributes)

    def index_of(self, name: str) -> int:
        for i, a in enumerate(self.attributes):
            if a.name == name:
                return i
        raise DomainError(f"no attribute named {name!r}")

    def validate_coordinates(self, coords: Sequence[int]) -> None:
        if len(coords) != len(self.attributes):
            raise DomainError(
                f"expected {len(self.attributes)} coordinates, got {len(coords)}"
            )
        for c, a in zip(coords, self.attributes):
            if not 0 <= c < a.cardinality:
                raise DomainError(f"coordinate {c} out of range for {a.name!r}")


@dataclass(frozen=True)
class Transaction:
    """A single voting transaction: one value index per attribute."""

    coordinates: tuple[int, ...]


def optimistic_preset() -> TransactionSpace:
    return TransactionSpace(
        (
            AttributeSpec("contests", 3),
            AttributeSpec("candidates_per_contest", 2),
            AttributeSpec("languages", 2),
            AttributeSpec("time_of_day", 10),
            AttributeSpec("previous_voters", 5),
            AttributeSpec("undervotes", 2**3),
            AttributeSpec("changed_selections", 2**3),
            AttributeSpec("review", 2),
            AttributeSpec("time_per_selection", 2),
            AttributeSpec("font_size", 2),
            AttributeSpec("audio_use", 2),
            AttributeSpec("volume", 5),
            AttributeSpec("inactivity_warning", 2),
        )
    )


def realistic_preset() -> TransactionSpace:
    return TransactionSpace(
        (
            AttributeSpec("contests", 20),
            AttributeSpec("candidates_per_contest", 4),
            AttributeSpec("languages", 13),
            AttributeSpec("time_of_day", 20),
            AttributeSpec("previous_voters", 10),
            AttributeSpec("undervotes", 2**20),
            AttributeSpec("changed_selections", 2**20),
            AttributeSpec("review", 2),
            AttributeSpec("time_per_selection", 5**20),
            AttributeSpec("contrast_saturation", 4),
            AttributeSpec("font_size", 4),
            AttributeSpec("audio_use", 2),
            AttributeSpec("audio_tempo", 4),
            AttributeSpec("volume", 10),
            AttributeSpec("audio_pause", 2**20),
            AttributeSpec("audio_video", 2),
            AttributeSpec("inactivity_warning", 2**20),
        )
    )


PRESETS = {"optimistic": optimistic_preset, "realistic": realistic_preset}


def cardinality(space: TransactionSpace) -> int:
    """Exact product of attribute cardinalities (arbitrary-precision integer)."""
    return space.cardinality


class TransactionDistribution:
    """A distribution over a transaction space.

    Two forms are supported:

    * ``factored`` -- independent categorical weights per attribute, stored as
      one weight vector per attribute (``None`` meaning uniform);
    * ``sparse`` -- explicit support (coordinate tuples) with weights, the only
      form usable at realistic scale.
    """

    def __init__(
        self,
        space: TransactionSpace,
        *,
        factored: Sequence[np.ndarray | None] | None = None,
        support: tuple[tuple[int, ...], ...] | None = None,
        weights: np.ndarray | None = None,
    ):
        self.space = space
        if (factored is None) == (support is None):
            raise DomainError("exactly one of factored/support must be given")
        if factored is not None:
            self.form = "factored"
            self._marginals: list[np.ndarray | None] = []
            for w, attr in zip(factored, space.attributes, strict=True):
                if w is None:
                    self._marginals.append(None)
                    continue
                w = np.asarray(w, dtype=float)
                if w.shape != (attr.cardinality,):
                    raise DomainError(f"weight vector shape mismatch for {attr.name!r}")
                if (w < 0).any():
                    raise DomainError(f"negative weight for {attr.name!r}")
                total = w.sum()
                if abs(total - 1.0) > _MASS_TOL:
                    raise DomainError(f"weights for {attr.name!r} sum to {total}, not 1")
                self._marginals.append(w / total)
            self.support = None
            self.weights = None
        else:
            self.form = "sparse"
            assert support is not None and weights is not None
            weights = np.asarray(weights, dtype=float)
            if len(support) != len(weights):
                raise DomainError("support and weights lengths differ")
            if len(support) == 0:
                raise DomainError("sparse support must be nonempty")
            if (weights < 0).any():
                raise DomainError("negative weight in sparse support")
            total = weights.sum()
            if abs(total - 1.0) > _MASS_TOL:
                raise DomainError(f"sparse weights sum to {total}, not 1")
            seen = set()
            for coords in support:
                space.validate_coordinates(coords)
                if coords in seen:
                    raise DomainError(f"duplicate support point {coords}")
                seen.add(coords)
            self.support = tuple(tuple(c) for c in support)
            self.weights = weights / total
            self._marginals = []

    # -- constructors ------------------------------------------------------

    @classmethod
    def uniform(cls, space: TransactionSpace) -> "TransactionDistribution":
        return cls(space, factored=[None] * len(space.attributes))

    @classmethod
    def factored(
        cls, space: TransactionSpace, marginals: Mapping[str, Sequence[float]]
    ) -> "TransactionDistribution":
        """Per-attribute categorical weights; attributes not named are uniform."""
        unknown = set(marginals) - {a.name for a in space.attributes}
        if unknown:
            raise DomainError(f"unknown attributes in marginals: {sorted(unknown)}")
        per_attr: list[np.ndarray | None] = []
        for attr in space.attributes:
            w = marginals.get(attr.name)
            per_attr.append(None if w is None else np.asarray(w, dtype=float))
        return cls(space, factored=per_attr)

    @classmethod
    def sparse(
        cls,
        space: TransactionSpace,
        support: Iterable[Sequence[int]],
        weights: Sequence[float],
    ) -> "TransactionDistribution":
        return cls(
            space,
            support=tuple(tuple(c) for c in support),
            weights=np.asarray(weights, dtype=float),
        )

    @classmethod
    def point_mass(cls, space: TransactionSpace, tx: Transaction) -> "TransactionDistribution":
        return cls.sparse(space, [tx.coordinates], [1.0])

    # -- queries -----------------------------------------------------------

    def marginal(self, i: int) -> np.ndarray:
        """Marginal weight vector of attribute i (factored form only)."""
        if self.form != "factored":
            raise DomainError("marginal() requires the factored form")
        w = self._marginals[i]
        if w is None:
            card = self.space.attributes[i].cardinality
            return np.full(card, 1.0 / card)
        return w

    def mass_of(self, coords: Sequence[int]) -> float:
        """Probability of a single transaction."""
        self.space.validate_coordinates(coords)
        if self.form == "sparse":
            key = tuple(coords)
            assert self.support is not None and self.weights is not None
            for pt, w in zip(self.support, self.weights):
                if pt == key:
                    return float(w)
            return 0.0
        mass = 1.0
        for i, c in enumerate(coords):
            mass *= float(self.marginal(i)[c])
        return mass

    def to_dense(self) -> np.ndarray:
        """Flattened dense probability vector (cardinality <= DENSE_LIMIT only)."""
        card = self.space.cardinality
        if card > DENSE_LIMIT:
            raise DomainError(
                f"dense representation refused above {DENSE_LIMIT} points (have {card})"
            )
        if self.form == "factored":
            parts = [self.marginal(i) for i in range(len(self.space.attributes))]
            return reduce(np.multiply.outer, parts).reshape(-1)
        dense = np.zeros(card)
        dims = [a.cardinality for a in self.space.attributes]
        assert self.support is not None and self.weights is not None
        for coords, w in zip(self.support, self.weights):
            dense[int(np.ravel_multi_index(coords, dims))] = w
        return dense

    # -- sampling ----------------------------------------------------------

    def sample_matrix(self, rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
        """Coordinate array of samples, last axis indexing attributes.

        Draw order is fixed (attribute by attribute for the factored form, one
        support draw for the sparse form) so that results are a pure function
        of the generator state.
        """
        if self.form == "factored":
            out = np.empty(shape + (len(self.space.attributes),), dtype=np.int64)
            for i, attr in enumerate(self.space.attributes):
                w = self._marginals[i]
                if w is None:
                    out[..., i] = rng.integers(0, attr.cardinality, size=shape)
                else:
                    cdf = np.cumsum(w)
                    cdf[-1] = 1.0
                    out[..., i] = np.searchsorted(cdf, rng.random(shape), side="right")
            return out
        assert self.support is not None and self.weights is not None
        cdf = np.cumsum(self.weights)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.random(shape), side="right")
        pts = np.asarray(self.support, dtype=np.int64)
        return pts[idx]

    def sample_support_indices(
        self, rng: np.random.Generator, shape: tuple[int, ...]
    ) -> np.ndarray:
        """Indices into the sparse support (sparse form only); same draw order
        as ``sample_matrix``."""
        if self.form != "sparse":
            raise DomainError("support indices require the sparse form")
        assert self.weights is not None
        cdf = np.cumsum(self.weights)
        cdf[-1] = 1.0
        return np.searchsorted(cdf, rng.random(shape), side="right")


def sample(dist: TransactionDistribution, rng: np.random.Generator) -> Transaction:
    """One transaction distributed per ``dist``; deterministic given rng state."""
    coords = dist.sample_matrix(rng, ())
    return Transaction(tuple(int(c) for c in coords))


def estimate(
    space: TransactionSpace, training: Sequence[Transaction]
) -> TransactionDistribution:
    """Empirical (plug-in) distribution over the observed support."""
    if len(training) == 0:
        raise DomainError("cannot estimate from an empty training set")
    counts: Counter[tuple[int, ...]] = Counter()
    for tx in training:
        space.validate_coordinates(tx.coordinates)
        counts[tx.coordinates] += 1
    support = sorted(counts)
    n = len(training)
    weights = [counts[pt] / n for pt in support]
    return TransactionDistribution.sparse(space, support, weights)


def _same_space(p: TransactionDistribution, q: TransactionDistribution) -> None:
    if p.space.attributes != q.space.attributes:
        raise DomainError("distributions are over different spaces")


def l1_distance(p: TransactionDistribution, q: TransactionDistribution) -> float:
    """Sum over the union of supports of |p(x) - q(x)|; lies in [0, 2]."""
    _same_space(p, q)
    if p.form == "sparse" and q.form == "sparse":
        assert p.support is not None and q.support is not None
        masses: dict[tuple[int, ...], list[float]] = {}
        for pt, w in zip(p.support, p.weights):
            masses.setdefault(pt, [0.0, 0.0])[0] = float(w)
        for pt, w in zip(q.support, q.weights):
            masses.setdefault(pt, [0.0, 0.0])[1] = float(w)
        return float(sum(abs(a - b) for a, b in masses.values()))
    if p.form == "sparse" or q.form == "sparse":
        sp, other = (p, q) if p.form == "sparse" else (q, p)
        assert sp.support is not None and sp.weights is not None
        # off-support, |0 - other(x)| sums to the mass other puts outside supp(sp)
        on_support = 0.0
        other_on_support = 0.0
        for pt, w in zip(sp.support, sp.weights):
            m = other.mass_of(pt)
            on_support += abs(float(w) - m)
            other_on_support += m
        return float(on_support + (1.0 - other_on_support))
    return float(np.abs(p.to_dense() - q.to_dense()).sum())


# -- declarative config ----------------------------------------------------


def space_from_config(cfg: Mapping) -> TransactionSpace:
    """Space from ``{"preset": name}`` or ``{"attributes": [{name, cardinality}]}``."""
    if "preset" in cfg:
        name = cfg["preset"]
        if name not in PRESETS:
            raise ParseError(f"unknown preset {name!r}")
        return PRESETS[name]()
    if "attributes" in cfg:
        return TransactionSpace(
            tuple(
                AttributeSpec(a["name"], int(a["cardinality"])) for a in cfg["attributes"]
            )
        )
    raise ParseError("space config needs 'preset' or 'attributes'")


def distribution_from_config(
    space: TransactionSpace, cfg: Mapping
) -> TransactionDistribution:
    """Distribution from a config mapping with a ``form`` discriminator."""
    form = cfg.get("form", "uniform")
    if form == "uniform":
        return TransactionDistribution.uniform(space)
    if form == "factored":
        return TransactionDistribution.factored(space, cfg["weights"])
    if form == "sparse":
        return TransactionDistribution.sparse(space, cfg["support"], cfg["weights"])
    raise ParseError(f"unknown distribution form {form!r}")


def load_space(path: str) -> TransactionSpace:
    with open(path, "r", encoding="utf-8") as fh:
        return space_from_config(json.load(fh))
