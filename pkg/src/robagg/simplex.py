"""Probability vectors on a finite ordered state space.

The state order in which a :class:`StateSpace` is declared doubles as the
"good states later" order used by first-order stochastic dominance and by
the monotone-act machinery downstream, so declare states from worst to best.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    AllZero,
    DimensionMismatch,
    EmptyList,
    InputError,
    NegativeMass,
    WeightSumError,
)
from .tolerances import SIMPLEX_TOL


def _as_readonly(values: Iterable[float]) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class StateSpace:
    """An ordered, duplicate-free tuple of state labels."""

    labels: tuple[str, ...]

    def __init__(self, labels: Sequence[str]):
        labels = tuple(str(s) for s in labels)
        if not labels:
            raise InputError("a state space needs at least one state")
        if len(set(labels)) != len(labels):
            raise InputError(f"duplicate state labels in {labels!r}")
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InputError(f"unknown state {label!r}") from None


@dataclass(frozen=True)
class Dist:
    """A probability vector indexed by a :class:`StateSpace`.

    Entries must be nonnegative and sum to one within 1e-10. Tiny negative
    dust (>= -1e-10), as produced by iterative solvers, is clipped to zero;
    anything worse is rejected.
    """

    space: StateSpace
    values: np.ndarray = field(compare=False)

    def __init__(self, space: StateSpace, values: Iterable[float]):
        arr = np.array(values, dtype=float)
        if arr.shape != (len(space),):
            raise DimensionMismatch(
                f"expected {len(space)} masses, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InputError("probability masses must be finite")
        if arr.min(initial=0.0) < -SIMPLEX_TOL:
            raise NegativeMass(f"negative probability mass {arr.min()!r}")
        arr = np.clip(arr, 0.0, None)
        total = arr.sum()
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise InputError(f"masses sum to {total!r}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "values", arr)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Dist)
            and self.space == other.space
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((self.space, self.values.tobytes()))

    def mass(self, label: str) -> float:
        return float(self.values[self.space.index(label)])

    @property
    def probs(self) -> np.ndarray:
        """The mass vector, read-only. Alias of ``values``: call sites that
        treat the object as a belief rather than a bare array read better
        with this name."""
        return self.values

    @property
    def support(self) -> np.ndarray:
        """Boolean mask of states carrying positive mass."""
        return self.values > 0.0


@dataclass(frozen=True)
class StateVector:
    """A real payoff/utility per state (not a probability)."""

    space: StateSpace
    values: np.ndarray = field(compare=False)

    def __init__(self, space: StateSpace, values: Iterable[float]):
        arr = _as_readonly(values)
        if arr.shape != (len(space),):
            raise DimensionMismatch(
                f"expected {len(space)} entries, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InputError("state vectors must have finite entries")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "values", arr)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, StateVector)
            and self.space == other.space
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((self.space, self.values.tobytes()))


class FosdOrder(enum.Enum):
    """Outcome of a first-order stochastic dominance comparison."""

    PDominates = "PDominates"
    QDominates = "QDominates"
    Equal = "Equal"
    Incomparable = "Incomparable"


def _check_shared_space(first, *rest) -> None:
    for other in rest:
        if first.space != other.space:
            raise DimensionMismatch(
                f"state spaces differ: {first.space.labels} vs "
                f"{other.space.labels}"
            )


def normalize(space: StateSpace, raw: Iterable[float]) -> Dist:
    """Scale a nonnegative mass vector to a probability vector.

    Raises
    ------
    NegativeMass
        if any entry is negative.
    AllZero
        if the entries sum to zero.
    """
    arr = np.array(raw, dtype=float)
    if arr.shape != (len(space),):
        raise DimensionMismatch(
            f"expected {len(space)} masses, got shape {arr.shape}"
        )
    if np.any(arr < 0.0):
        raise NegativeMass(f"negative mass in {arr!r}")
    total = arr.sum()
    if total <= 0.0:
        raise AllZero("cannot normalize an all-zero mass vector")
    return Dist(space, arr / total)


def expectation(p: Dist, x: StateVector) -> float:
    """E_p[x] = sum_s p(s) x(s)."""
    _check_shared_space(p, x)
    return float(p.values @ x.values)


def shannon_entropy(q: Dist) -> float:
    """-sum q log q in nats, with the 0 log 0 = 0 convention."""
    v = q.values
    pos = v > 0.0
    return float(-np.sum(v[pos] * np.log(v[pos])))


def fosd_compare(p: Dist, q: Dist) -> FosdOrder:
    """Compare two beliefs by first-order stochastic dominance.

    The declaration order of the shared state space is the ranking: later
    states are better. ``PDominates`` means every upper-tail mass of ``p``
    is at least that of ``q``, strictly somewhere.
    """
    _check_shared_space(p, q)
    if np.max(np.abs(p.values - q.values)) <= SIMPLEX_TOL:
        return FosdOrder.Equal
    # upper-tail sums at every threshold (tail from state k to the end)
    tail_p = np.cumsum(p.values[::-1])[::-1]
    tail_q = np.cumsum(q.values[::-1])[::-1]
    diff = tail_p - tail_q
    p_ge = bool(np.all(diff >= -SIMPLEX_TOL))
    q_ge = bool(np.all(diff <= SIMPLEX_TOL))
    if p_ge and not q_ge:
        return FosdOrder.PDominates
    if q_ge and not p_ge:
        return FosdOrder.QDominates
    if p_ge and q_ge:
        # tails agree within tolerance though the masses differ slightly
        return FosdOrder.Equal
    return FosdOrder.Incomparable


def convex_combine(weights: Iterable[float], dists: Sequence[Dist]) -> Dist:
    """Pointwise mixture sum_i w_i p_i of beliefs on one state space."""
    dists = list(dists)
    if not dists:
        raise EmptyList("convex_combine needs at least one distribution")
    w = np.array(list(weights), dtype=float)
    if w.shape != (len(dists),):
        raise DimensionMismatch(
            f"{w.size} weights for {len(dists)} distributions"
        )
    if np.any(w < -SIMPLEX_TOL):
        raise NegativeMass("mixture weights must be nonnegative")
    if abs(w.sum() - 1.0) > SIMPLEX_TOL:
        raise WeightSumError(f"weights sum to {w.sum()!r}, not 1")
    space = dists[0].space
    for d in dists[1:]:
        _check_shared_space(dists[0], d)
    mat = np.stack([d.values for d in dists])
    mixed = np.clip(w, 0.0, None) @ mat
    return Dist(space, mixed / mixed.sum())
