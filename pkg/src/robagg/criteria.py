"""Robust planner criteria over structured belief sets.

The central object is the multiplier criterion

    V(u0; q, lambda) = -lambda log E_q[exp(-u0 / lambda)],

the certainty equivalent of the utility profile u0 under the exponential
disutility transform phi_lambda(v) = -exp(-v/lambda). lambda = infinity is
a first-class citizen everywhere and recovers plain expectation (and, over
a set of beliefs, max-min expected utility).

Sets of beliefs enter through ``StructuredSet``: a single belief, a finite
family, the convex hull of a finite family, or an intersection of
divergence balls. Because E_q[exp(-u0/lambda)] is linear in q, the worst
case over a hull sits at a vertex, so hulls reduce to enumeration; ball
intersections go through the constrained solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ._solvers import golden_section_max, solve_ball_constrained
from .balls import Ball, Rho, _bregman_raw, hull_witness
from .divergences import NEG_ENTROPY, BregmanGenerator, PhiSpec
from .errors import (
    BracketFailure,
    DimensionMismatch,
    DomainError,
    EmptyIntersection,
    EmptyList,
    InputError,
)
from .simplex import Dist, StateVector, _check_shared_space, expectation

__all__ = [
    "Singleton",
    "FiniteSet",
    "HullOfFinite",
    "BallIntersection",
    "StructuredSet",
    "Planner",
    "phi_lambda",
    "phi_lambda_inv",
    "multiplier_value",
    "worst_case_tilt",
    "certainty_equivalent_exponential",
    "meu_value",
    "entropic_value",
    "variational_phi_value",
    "mba_value",
]


# ---------------------------------------------------------------------------
# the exponential disutility transform
# ---------------------------------------------------------------------------

def _check_lambda(lam: float) -> float:
    if isinstance(lam, bool) or not isinstance(lam, (int, float)):
        raise InputError(f"lambda must be a positive real or math.inf, got {lam!r}")
    lam = float(lam)
    if math.isnan(lam) or lam <= 0.0:
        raise InputError(f"lambda must be positive, got {lam!r}")
    return lam


def phi_lambda(v, lam: float):
    """phi_lambda(v) = -exp(-v/lambda); the identity when lambda is infinite."""
    lam = _check_lambda(lam)
    if math.isinf(lam):
        return v
    return -np.exp(-np.asarray(v, dtype=float) / lam)


def phi_lambda_inv(y, lam: float):
    """Inverse transform -lambda log(-y), defined on y < 0 (DomainError else)."""
    lam = _check_lambda(lam)
    if math.isinf(lam):
        return y
    arr = np.asarray(y, dtype=float)
    if np.any(arr >= 0.0):
        raise DomainError("phi_lambda_inv needs strictly negative arguments")
    out = -lam * np.log(-arr)
    return float(out) if out.ndim == 0 else out


def _utility_values(u0, q: Dist) -> np.ndarray:
    if isinstance(u0, StateVector):
        vals = u0.values
    else:
        vals = np.asarray(u0, dtype=float)
    if vals.shape != (len(q.space),):
        raise DimensionMismatch(
            f"utility profile has shape {vals.shape}, state space has "
            f"{len(q.space)} states"
        )
    if not np.all(np.isfinite(vals)):
        raise InputError("utility profile must be finite")
    return vals


def multiplier_value(u0, q: Dist, lam: float) -> float:
    """-lambda log E_q[exp(-u0/lambda)], computed with a support shift.

    Subtracting the minimum of u0 on the support of q before exponentiating
    keeps the expectation in (0, 1] regardless of the utility scale, so the
    value never overflows. At lambda = inf this is E_q[u0].
    """
    lam = _check_lambda(lam)
    vals = _utility_values(u0, q)
    if math.isinf(lam):
        return float(q.probs @ vals)
    sup = q.probs > 0.0
    m = float(vals[sup].min())
    ex = float(q.probs[sup] @ np.exp(-(vals[sup] - m) / lam))
    return m - lam * math.log(ex)


def worst_case_tilt(u0, q: Dist, lam: float) -> Dist:
    """The minimizing belief of the penalized problem behind the multiplier
    criterion: p(s) proportional to q(s) exp(-u0(s)/lambda).

    As lambda -> inf the tilt flattens back to q itself, which is what this
    returns for an infinite lambda.
    """
    lam = _check_lambda(lam)
    vals = _utility_values(u0, q)
    if math.isinf(lam):
        return q
    sup = q.probs > 0.0
    m = float(vals[sup].min())
    w = np.zeros_like(q.probs)
    w[sup] = q.probs[sup] * np.exp(-(vals[sup] - m) / lam)
    return Dist(q.space, w / w.sum())


def certainty_equivalent_exponential(u0, q: Dist, lam: float) -> float:
    """phi_lambda_inv(E_q[phi_lambda(u0)]): the plain transform-pair route.

    Numerically identical to ``multiplier_value`` but composed literally
    from phi_lambda and its inverse, without the overflow shift — prefer
    ``multiplier_value`` for extreme utility ranges.
    """
    lam = _check_lambda(lam)
    vals = _utility_values(u0, q)
    if math.isinf(lam):
        return float(q.probs @ vals)
    transformed = phi_lambda(vals, lam)
    mean = float(q.probs @ transformed)
    return float(phi_lambda_inv(mean, lam))


# ---------------------------------------------------------------------------
# structured belief sets
# ---------------------------------------------------------------------------

class StructuredSet:
    """Marker base class for the belief-set variants the planner accepts."""

    __slots__ = ()


def _check_members(members: Sequence[Dist], what: str) -> tuple[Dist, ...]:
    members = tuple(members)
    if not members:
        raise EmptyList(f"{what} needs at least one member")
    _check_shared_space(*members)
    return members


@dataclass(frozen=True)
class Singleton(StructuredSet):
    """A single belief."""

    belief: Dist


@dataclass(frozen=True)
class FiniteSet(StructuredSet):
    """A finite family of candidate beliefs."""

    members: tuple[Dist, ...]

    def __init__(self, members: Sequence[Dist]):
        object.__setattr__(self, "members", _check_members(members, "FiniteSet"))


@dataclass(frozen=True)
class HullOfFinite(StructuredSet):
    """The convex hull of finitely many beliefs, given by its vertices."""

    vertices: tuple[Dist, ...]

    def __init__(self, vertices: Sequence[Dist]):
        object.__setattr__(self, "vertices", _check_members(vertices, "HullOfFinite"))


@dataclass(frozen=True)
class BallIntersection(StructuredSet):
    """An intersection of divergence balls sharing one divergence tag.

    Mixed tags are rejected: the feasibility certificate used by the
    solver is tied to a single Bregman geometry, and rho-balls have their
    own aggregation routine.
    """

    balls: tuple[Ball, ...]

    def __init__(self, balls: Sequence[Ball]):
        balls = tuple(balls)
        if not balls:
            raise EmptyList("BallIntersection needs at least one ball")
        _check_shared_space(*(b.center for b in balls))
        tags = {id(b.divergence) if isinstance(b.divergence, BregmanGenerator)
                else b.divergence for b in balls}
        if len(tags) > 1:
            raise InputError("all balls in an intersection must share one divergence")
        if isinstance(balls[0].divergence, Rho):
            raise InputError(
                "rho-balls are not supported in planner sets; "
                "see the aggregation module"
            )
        object.__setattr__(self, "balls", balls)


def _ball_generator(balls: Sequence[Ball]) -> BregmanGenerator:
    d = balls[0].divergence
    return d if isinstance(d, BregmanGenerator) else NEG_ENTROPY


def _linear_over_balls(
    c: np.ndarray, balls: Sequence[Ball], sense: str
) -> tuple[float, np.ndarray, float]:
    """Optimize the linear functional c . q over a ball intersection.

    Returns (optimal value of c . q, optimizer q, kkt residual). ``sense``
    is "min" or "max". Raises EmptyIntersection when the witness search
    certifies the feasible set empty.
    """
    centers = [b.center for b in balls]
    radii = [b.radius for b in balls]
    generator = _ball_generator(balls)
    wit = hull_witness(centers, radii, generator)
    if not wit.found:
        raise EmptyIntersection(
            f"ball intersection is empty (best feasibility gap {wit.min_gap:.3e})"
        )
    q_wit = wit.point.probs
    if wit.min_gap >= -1e-9:
        # every ball is tight at the witness: the feasible set is (numerically)
        # a single point, so any objective is settled there
        return float(c @ q_wit), q_wit, abs(wit.min_gap)

    sign = 1.0 if sense == "min" else -1.0

    def obj_vg(q: np.ndarray) -> tuple[float, np.ndarray]:
        return float(sign * (c @ q)), sign * c

    P = np.vstack([ctr.probs for ctr in centers])

    def make_cons(i0: int, eta: float) -> Callable:
        def vg(q: np.ndarray) -> tuple[float, np.ndarray]:
            val = _bregman_raw(generator, P[i0], q)
            if not math.isfinite(val):
                return math.inf, np.zeros_like(q)
            if generator.grad_div_in_second is not None:
                with np.errstate(divide="ignore", invalid="ignore"):
                    g = np.asarray(
                        generator.grad_div_in_second(P[i0], q), dtype=float
                    )
                # q(s) = 0 is only reachable here with p_i(s) = 0 (else the
                # value is inf); that state contributes nothing to the slope
                g = np.where(q > 0.0, g, 0.0)
            else:
                # Hessian-vector product: grad_q D_G(p||q) = H_G(q)(q - p)
                v = q - P[i0]
                eps = 1e-6
                gp = np.asarray(generator.gradient(q + eps * v), dtype=float)
                gm = np.asarray(generator.gradient(q - eps * v), dtype=float)
                g = (gp - gm) / (2.0 * eps)
            return val - eta, g
        return vg

    cons_vg = [make_cons(i, b.radius) for i, b in enumerate(balls)]

    if generator is NEG_ENTROPY:
        def make_hess(i0: int) -> Callable:
            def hd(q: np.ndarray) -> np.ndarray:
                return np.where(
                    q > 0.0, P[i0] / np.maximum(q, 1e-300) ** 2, 0.0
                )
            return hd
        cons_hess: Optional[list] = [make_hess(i) for i in range(len(balls))]
        obj_hess = lambda q: np.zeros_like(q)  # noqa: E731 - linear objective
    else:
        cons_hess = None
        obj_hess = None

    start = 0.999 * q_wit + 0.001 * np.full_like(q_wit, 1.0 / q_wit.size)
    res = solve_ball_constrained(
        obj_vg,
        cons_vg,
        start,
        obj_hess_diag=obj_hess,
        cons_hess_diag=cons_hess,
    )
    value = float(c @ res.q)
    best_q = res.q
    kkt = res.kkt_residual
    # the witness itself is feasible; never return anything worse than it
    wit_val = float(c @ q_wit)
    if (sense == "min" and wit_val < value) or (sense == "max" and wit_val > value):
        value, best_q, kkt = wit_val, q_wit, abs(wit.min_gap)
    return value, best_q, kkt


def meu_value(u0, structured: StructuredSet) -> float:
    """Max-min expected utility: the worst expectation of u0 over the set."""
    if isinstance(structured, Singleton):
        return multiplier_value(u0, structured.belief, math.inf)
    if isinstance(structured, FiniteSet):
        return min(multiplier_value(u0, q, math.inf) for q in structured.members)
    if isinstance(structured, HullOfFinite):
        # expectation is linear in q: the hull minimum sits at a vertex
        return min(multiplier_value(u0, q, math.inf) for q in structured.vertices)
    if isinstance(structured, BallIntersection):
        q0 = structured.balls[0].center
        vals = _utility_values(u0, q0)
        value, _, _ = _linear_over_balls(vals, structured.balls, "min")
        return value
    raise InputError(f"unsupported structured set {type(structured).__name__}")


def entropic_value(u0, structured: StructuredSet, lam: float) -> float:
    """Worst-case multiplier value over the structured set.

    min_q -lambda log E_q[exp(-u0/lambda)]; the inner expectation is linear
    in q and the outer transform monotone, so hulls again reduce to their
    vertices. lambda = inf dispatches to ``meu_value``.
    """
    lam = _check_lambda(lam)
    if math.isinf(lam):
        return meu_value(u0, structured)
    if isinstance(structured, Singleton):
        return multiplier_value(u0, structured.belief, lam)
    if isinstance(structured, FiniteSet):
        return min(multiplier_value(u0, q, lam) for q in structured.members)
    if isinstance(structured, HullOfFinite):
        return min(multiplier_value(u0, q, lam) for q in structured.vertices)
    if isinstance(structured, BallIntersection):
        q0 = structured.balls[0].center
        vals = _utility_values(u0, q0)
        m = float(vals.min())
        a = np.exp(-(vals - m) / lam)
        # V decreasing in E_q[exp(-(u0-m)/lambda)], so the worst q maximizes it
        ex, _, _ = _linear_over_balls(a, structured.balls, "max")
        return m - lam * math.log(ex)
    raise InputError(f"unsupported structured set {type(structured).__name__}")


def variational_phi_value(
    u0, structured: StructuredSet, lam: float, phi: PhiSpec
) -> float:
    """Penalized value through the convex-conjugate variational formula.

    For a single belief q,

        V = lambda * sup_psi [ psi - E_q[ phi*(psi - u0/lambda) ] ],

    maximized by golden-section search over psi (the objective is concave:
    a linear term minus an expectation of convex functions). The bracket
    starts at [min u0/lambda - 10, max u0/lambda + 10] and doubles outward
    when the maximizer pins an endpoint, up to 60 times (BracketFailure
    beyond that). Finite sets take the minimum over members. With the KL
    conjugate exp(t) - 1 this reproduces ``multiplier_value`` exactly.
    """
    lam = _check_lambda(lam)
    if math.isinf(lam):
        raise InputError("variational_phi_value needs a finite lambda")
    if isinstance(structured, Singleton):
        members: Sequence[Dist] = (structured.belief,)
    elif isinstance(structured, FiniteSet):
        members = structured.members
    else:
        raise InputError(
            "variational_phi_value supports Singleton and FiniteSet only"
        )

    best = math.inf
    for q in members:
        vals = _utility_values(u0, q)
        sup = q.probs > 0.0
        probs = q.probs[sup]
        shifted = vals[sup] / lam

        def h(psi: float) -> float:
            total = 0.0
            for p_s, t_s in zip(probs, shifted):
                try:
                    c = phi.conjugate(psi - t_s)
                except OverflowError:
                    return -math.inf
                if not math.isfinite(c):
                    return -math.inf
                total += p_s * c
            return psi - total

        lo = float(shifted.min()) - 10.0
        hi = float(shifted.max()) + 10.0
        for _ in range(60):
            psi_star, h_star = golden_section_max(h, lo, hi, tol=1e-13)
            span = hi - lo
            if psi_star - lo > 1e-6 * span and hi - psi_star > 1e-6 * span:
                break
            if psi_star - lo <= 1e-6 * span:
                lo -= span
            else:
                hi += span
        else:
            raise BracketFailure(
                "variational maximizer kept escaping the psi bracket"
            )
        best = min(best, lam * h_star)
    return best


def mba_value(u0, structured: StructuredSet, alpha: float) -> float:
    """Min-based alpha-mix: alpha * worst expectation + (1-alpha) * best.

    alpha = 1 recovers max-min expected utility, alpha = 0 max-max.
    """
    if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
        raise InputError(f"alpha must be a real in [0, 1], got {alpha!r}")
    alpha = float(alpha)
    if not (0.0 <= alpha <= 1.0) or math.isnan(alpha):
        raise InputError(f"alpha must lie in [0, 1], got {alpha!r}")

    if isinstance(structured, Singleton):
        e = multiplier_value(u0, structured.belief, math.inf)
        return e
    if isinstance(structured, (FiniteSet, HullOfFinite)):
        members = (
            structured.members
            if isinstance(structured, FiniteSet)
            else structured.vertices
        )
        evals = [multiplier_value(u0, q, math.inf) for q in members]
        return alpha * min(evals) + (1.0 - alpha) * max(evals)
    if isinstance(structured, BallIntersection):
        q0 = structured.balls[0].center
        vals = _utility_values(u0, q0)
        worst, _, _ = _linear_over_balls(vals, structured.balls, "min")
        best, _, _ = _linear_over_balls(vals, structured.balls, "max")
        return alpha * worst + (1.0 - alpha) * best
    raise InputError(f"unsupported structured set {type(structured).__name__}")


# ---------------------------------------------------------------------------
# planner façade
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Planner:
    """A robust planner: an ambiguity-attitude parameter, a penalty family,
    and a structured set of candidate beliefs.

    ``penalty`` is either the string ``"kl"`` (the multiplier/entropic
    route) or a ``PhiSpec`` (the variational conjugate route, available for
    singleton and finite sets).
    """

    lam: float
    penalty: Union[str, PhiSpec] = "kl"
    structured: StructuredSet = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        _check_lambda(self.lam)
        if not isinstance(self.structured, StructuredSet):
            raise InputError("planner needs a StructuredSet of beliefs")
        if isinstance(self.penalty, str):
            if self.penalty != "kl":
                raise InputError(f"unknown penalty tag {self.penalty!r}")
        elif not isinstance(self.penalty, PhiSpec):
            raise InputError("penalty must be 'kl' or a PhiSpec")

    def value(self, u0) -> float:
        """Worst-case penalized value of the utility profile u0."""
        if isinstance(self.penalty, PhiSpec):
            return variational_phi_value(u0, self.structured, self.lam, self.penalty)
        return entropic_value(u0, self.structured, self.lam)
