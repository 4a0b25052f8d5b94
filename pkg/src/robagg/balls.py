"""Divergence balls and their joint geometry.

A ball collects every candidate belief q whose divergence *from the
center* stays within a radius: D(center || q) <= eta. Three divergence
families are supported — Kullback–Leibler, Bregman divergences of a
user-supplied generator, and the rho-divergence family — tagged on the
ball itself.

The two workhorses here are ``hull_witness``, which decides whether a
finite family of Bregman balls has a common point by minimizing the worst
slack max_i [D(p_i || q) - eta_i] over the convex hull of the centers
(a hull point certifies nonemptiness exactly when the intersection is
nonempty), and ``chernoff_point``, the smallest common radius at which the
balls around a family of centers still meet, found by bisecting the radius
against the witness and polishing the equalized optimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from ._solvers import MinimaxResult, minimize_max_over_hull
from .divergences import NEG_ENTROPY, BregmanGenerator, bregman, kl, rho_divergence
from .errors import (
    DimensionMismatch,
    EmptyList,
    InputError,
    NoConvergence,
    RhoOutOfRange,
)
from .simplex import Dist, _check_shared_space
from .tolerances import SOLVER_TOL

#: slack used by containment predicates so that boundary points test True
CONTAINMENT_SLACK = 1e-10


@dataclass(frozen=True)
class Rho:
    """Tag selecting the rho-divergence with exponent ``rho`` in (0, 1)."""

    rho: float

    def __post_init__(self) -> None:
        r = self.rho
        if not (isinstance(r, (int, float)) and math.isfinite(r) and 0.0 < r < 1.0):
            raise RhoOutOfRange(f"rho must lie strictly in (0, 1), got {r!r}")


DivergenceTag = Union[str, BregmanGenerator, Rho]


@dataclass(frozen=True)
class Ball:
    """A divergence ball {q : D(center || q) <= radius}.

    The divergence tag is ``"kl"`` (default), a ``BregmanGenerator``, or a
    ``Rho`` marker. Note the primal order: the *center* sits in the first
    slot of the divergence, so the ball is a set of second arguments.
    """

    center: Dist
    radius: float
    divergence: DivergenceTag = "kl"

    def __post_init__(self) -> None:
        if not (isinstance(self.radius, (int, float)) and math.isfinite(self.radius)):
            raise InputError(f"ball radius must be finite, got {self.radius!r}")
        if self.radius < 0.0:
            raise InputError(f"ball radius must be nonnegative, got {self.radius!r}")
        d = self.divergence
        if isinstance(d, str):
            if d != "kl":
                raise InputError(f"unknown divergence tag {d!r}")
        elif not isinstance(d, (BregmanGenerator, Rho)):
            raise InputError(
                "divergence must be 'kl', a BregmanGenerator, or a Rho tag"
            )

    def divergence_from_center(self, q: Dist) -> float:
        """D(center || q) under this ball's divergence."""
        _check_shared_space(self.center, q)
        d = self.divergence
        if isinstance(d, Rho):
            return rho_divergence(d.rho, self.center, q)
        if isinstance(d, BregmanGenerator):
            return bregman(d, self.center, q)
        return kl(self.center, q)


def ball_contains(ball: Ball, q: Dist) -> bool:
    """Whether q lies in the ball, with a 1e-10 boundary slack."""
    return ball.divergence_from_center(q) <= ball.radius + CONTAINMENT_SLACK


def intersection_contains(balls: Sequence[Ball], q: Dist) -> bool:
    """Whether q lies in every ball of the family."""
    balls = list(balls)
    if not balls:
        raise EmptyList("intersection_contains needs at least one ball")
    return all(ball_contains(b, q) for b in balls)


# ---------------------------------------------------------------------------
# joint feasibility witness over the hull of the centers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessResult:
    """Outcome of the hull feasibility search.

    ``min_gap`` is the achieved minimum of max_i [D(p_i || q) - eta_i]; the
    intersection is certified nonempty when it is <= 1e-8, in which case
    ``point`` is a common point written as the ``weights`` mixture of the
    centers.
    """

    found: bool
    point: Optional[Dist]
    weights: np.ndarray
    min_gap: float


def _dedupe_centers(
    P: np.ndarray, radii: np.ndarray
) -> tuple[np.ndarray, np.ndarray, list[int], list[list[int]]]:
    """Group numerically identical centers, keeping the tightest radius.

    Duplicate rows would make the equalization Jacobian singular, so the
    solver runs on representatives; weights map back to the first index of
    each group.
    """
    keys: dict[bytes, int] = {}
    reps: list[int] = []
    groups: list[list[int]] = []
    for i in range(P.shape[0]):
        key = np.round(P[i], 12).tobytes()
        if key in keys:
            g = keys[key]
            groups[g].append(i)
            if radii[i] < radii[reps[g]]:
                radii = radii.copy()
                rr = radii[reps[g]]
                radii[reps[g]] = radii[i]
                radii[i] = rr
        else:
            keys[key] = len(reps)
            reps.append(i)
            groups.append([i])
    return P[reps], radii[reps], reps, groups


def _bregman_raw(generator: BregmanGenerator, p: np.ndarray, q: np.ndarray) -> float:
    """D_G(p || q) on raw arrays — the solver hot path.

    No Dist construction, no validation; a boundary gradient maps to +inf
    rather than an exception so line searches can simply backtrack.
    """
    grad = np.asarray(generator.gradient(q), dtype=float)
    diff = p - q
    relevant = diff != 0.0
    if np.any(~np.isfinite(grad[relevant])):
        return math.inf
    inner = float(np.sum(grad[relevant] * diff[relevant]))
    return float(generator.value(p) - generator.value(q) - inner)


def _bregman_div_fns(generator: BregmanGenerator, P: np.ndarray):
    """(value, grad-in-q) callables for D_G(p_i || .) on raw arrays."""

    def value(i: int, q: np.ndarray) -> float:
        return _bregman_raw(generator, P[i], q)

    if generator.grad_div_in_second is not None:
        def grad(i: int, q: np.ndarray) -> np.ndarray:
            return generator.grad_div_in_second(P[i], q)
    else:
        def grad(i: int, q: np.ndarray) -> np.ndarray:
            # Hessian-vector product by central differences:
            # grad_q D_G(p||q) = H_G(q)(q - p)
            v = q - P[i]
            if float(np.max(np.abs(v))) < 1e-14:
                return np.zeros_like(q)
            eps = 1e-6
            gp = np.asarray(generator.gradient(q + eps * v), dtype=float)
            gm = np.asarray(generator.gradient(q - eps * v), dtype=float)
            return (gp - gm) / (2.0 * eps)

    return value, grad


def _bregman_batch_fns(generator: BregmanGenerator, P: np.ndarray):
    """(all-rows value, sigma-mixed grad) callables — the solver hot path.

    One G(q)/grad G(q) evaluation serves every row of P at once, and since
    grad_q D_G(p || q) = H_G(q)(q - p) is affine in p, a convex combination
    of the row gradients is exactly the gradient at the mixed row:
    sum_i sigma_i grad_q D_G(p_i || q) = grad_q D_G(sigma P || q).
    """
    m = P.shape[0]
    Gp = np.array([float(generator.value(P[i])) for i in range(m)])

    def batch_values(q: np.ndarray) -> np.ndarray:
        g = np.asarray(generator.gradient(q), dtype=float)
        diff = P - q
        base = Gp - float(generator.value(q))
        bad = ~np.isfinite(g)
        if not np.any(bad):
            return base - diff @ g
        vals = base - diff[:, ~bad] @ g[~bad]
        hit = np.any(diff[:, bad] != 0.0, axis=1)
        return np.where(hit, math.inf, vals)

    if generator.grad_div_in_second is not None:
        def sigma_grad(sig: np.ndarray, q: np.ndarray) -> np.ndarray:
            return np.asarray(
                generator.grad_div_in_second(sig @ P, q), dtype=float
            )
    else:
        def sigma_grad(sig: np.ndarray, q: np.ndarray) -> np.ndarray:
            v = q - sig @ P
            if float(np.max(np.abs(v))) < 1e-14:
                return np.zeros_like(q)
            eps = 1e-6
            gp = np.asarray(generator.gradient(q + eps * v), dtype=float)
            gm = np.asarray(generator.gradient(q - eps * v), dtype=float)
            return (gp - gm) / (2.0 * eps)

    return batch_values, sigma_grad


def hull_witness(
    centers: Sequence[Dist],
    radii: Sequence[float],
    generator: BregmanGenerator = NEG_ENTROPY,
) -> WitnessResult:
    """Search the hull of the centers for a point inside every Bregman ball.

    Minimizes Phi(w) = max_i [D_G(p_i || q(w)) - eta_i] over mixture weights
    w; a witness exists iff the balls intersect, and Phi <= 1e-8 is counted
    as found. When nothing qualifies the result carries the achieved
    minimum gap so callers can report how far from feasible the family is.
    """
    centers = list(centers)
    if not centers:
        raise EmptyList("hull_witness needs at least one center")
    _check_shared_space(*centers)
    radii_arr = np.asarray([float(r) for r in radii], dtype=float)
    if radii_arr.size != len(centers):
        raise DimensionMismatch(
            f"{len(centers)} centers but {radii_arr.size} radii"
        )
    if np.any(~np.isfinite(radii_arr)) or np.any(radii_arr < 0.0):
        raise InputError("radii must be finite and nonnegative")

    space = centers[0].space
    P = np.vstack([c.probs for c in centers])
    P_reps, radii_reps, reps, groups = _dedupe_centers(P, radii_arr)

    div_value, div_grad = _bregman_div_fns(generator, P_reps)
    batch_values, sigma_grad = _bregman_batch_fns(generator, P_reps)
    res = minimize_max_over_hull(
        P_reps, radii_reps, div_value, div_grad,
        batch_values=batch_values, sigma_grad=sigma_grad,
    )

    weights = np.zeros(len(centers))
    for g, members in enumerate(groups):
        weights[members[0]] = res.weights[g]
    weights.setflags(write=False)
    found = res.value <= SOLVER_TOL
    point = Dist(space, res.point) if found else None
    return WitnessResult(
        found=found, point=point, weights=weights, min_gap=float(res.value)
    )


# ---------------------------------------------------------------------------
# Chernoff point
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChernoffResult:
    """Deepest common point of equal-radius balls around the centers.

    ``radius`` is the smallest common radius with nonempty intersection,
    ``point`` the (essentially unique) common point there, ``weights`` its
    hull coordinates, and ``residual`` the mixture reconstruction error
    ||point - sum_i w_i p_i||_inf. ``degenerate`` marks the all-centers-
    identical case, returned as radius zero rather than an error.
    """

    point: Dist
    radius: float
    weights: np.ndarray
    residual: float
    degenerate: bool = False


def chernoff_point(
    centers: Sequence[Dist],
    generator: BregmanGenerator = NEG_ENTROPY,
) -> ChernoffResult:
    """Bisect the common radius against the hull witness, then equalize.

    The bracket starts at [0, max_i D_G(p_i || barycenter)] and halves until
    its width drops below 1e-8 (at most 200 steps, else NoConvergence). A
    final equalization polish on the detected active set pins the radius,
    point, and weights to the stationarity conditions.
    """
    centers = list(centers)
    if not centers:
        raise EmptyList("chernoff_point needs at least one center")
    _check_shared_space(*centers)
    space = centers[0].space
    P = np.vstack([c.probs for c in centers])
    m = len(centers)

    P_reps, _, reps, groups = _dedupe_centers(P, np.zeros(m))
    k = P_reps.shape[0]
    if k == 1:
        w = np.full(m, 1.0 / m)
        w.setflags(write=False)
        return ChernoffResult(
            point=centers[0],
            radius=0.0,
            weights=w,
            residual=0.0,
            degenerate=True,
        )

    div_value, div_grad = _bregman_div_fns(generator, P_reps)
    batch_values, sigma_grad = _bregman_batch_fns(generator, P_reps)
    bary = P_reps.mean(axis=0)
    hi = max(div_value(i, bary) for i in range(k))
    if not math.isfinite(hi):
        raise NoConvergence(
            "no finite initial radius bound at the barycenter of the centers"
        )
    hi *= 1.0 + 1e-12
    lo = 0.0

    warm: list[np.ndarray] = []
    # Raw max-divergence of the deepest point seen so far: any mid at or
    # above it is feasible by that same point, no fresh solve needed.
    depth = math.inf
    steps = 0
    while hi - lo > 1e-8:
        steps += 1
        if steps > 200:
            raise NoConvergence("radius bisection did not collapse in 200 steps")
        mid = 0.5 * (lo + hi)
        if depth - mid <= SOLVER_TOL:
            hi = mid
            continue
        res = minimize_max_over_hull(
            P_reps,
            np.full(k, mid),
            div_value,
            div_grad,
            extra_starts=warm,
            thorough=not warm,
            batch_values=batch_values,
            sigma_grad=sigma_grad,
        )
        warm = [res.weights]
        depth = min(depth, res.value + mid)
        if res.value <= SOLVER_TOL:
            hi = mid
        else:
            lo = mid

    final = minimize_max_over_hull(
        P_reps, np.zeros(k), div_value, div_grad, extra_starts=warm,
        thorough=not warm, batch_values=batch_values, sigma_grad=sigma_grad,
    )
    radius = float(final.value)
    if not (lo - 1e-6 <= radius <= hi + 1e-6):
        # the equalized optimum must agree with the bisection bracket
        raise NoConvergence(
            f"equalized radius {radius:.3e} escaped the bisection bracket "
            f"[{lo:.3e}, {hi:.3e}]"
        )

    weights = np.zeros(m)
    for g, members in enumerate(groups):
        weights[members[0]] = final.weights[g]
    weights.setflags(write=False)
    point = Dist(space, final.point)
    residual = float(np.max(np.abs(point.probs - weights @ P)))
    return ChernoffResult(
        point=point,
        radius=radius,
        weights=weights,
        residual=residual,
        degenerate=False,
    )
