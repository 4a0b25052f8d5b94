"""Social aggregation of tastes and beliefs.

Tastes aggregate linearly: the planner's utility is u0 = sum_i beta_i u_i
+ gamma over outcomes, pushed to states through an act. Beliefs aggregate
through geometry: each agent contributes a divergence ball around her
reference model, and the planner's belief is the worst case over the
intersection — which turns out to be an act-dependent mixture of the
references with one weight per outcome level of the act. This module
houses that solver plus the surrounding toolkit: the KL projection of a
truth onto the intersection, the mixture barycenter and its goodness of
fit, comparative statics of the mixture weights, the welfare-dominant
(probability-dictator) selection, the rho-divergence variant of the
aggregation, and the optimal 1-d policy search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from ._solvers import (
    golden_section_max,
    project_to_simplex,
    projected_gradient,
    simplex_lstsq,
    solve_ball_constrained,
)
from .balls import Ball, hull_witness
from .criteria import _linear_over_balls, _utility_values, multiplier_value, worst_case_tilt
from .divergences import kl
from .errors import (
    AbsoluteContinuityFailure,
    DimensionMismatch,
    EmptyIntersection,
    EmptyList,
    InputError,
    NoConvergence,
    NoFosdOrder,
    NonConcaveDetected,
    RhoOutOfRange,
    SolverDiverged,
    UnknownAct,
    UnknownOutcome,
)
from .simplex import (
    Dist,
    FosdOrder,
    StateVector,
    _check_shared_space,
    convex_combine,
    fosd_compare,
    shannon_entropy,
)

__all__ = [
    "Agent",
    "Profile",
    "SocialBeliefResult",
    "TruthProjection",
    "ActFamily",
    "PolicyResult",
    "social_utility",
    "social_belief_for_act",
    "kl_project_to_intersection",
    "pythagorean_gap",
    "barycenter",
    "fit_gap",
    "weight_sensitivity",
    "welfare_dominant_belief",
    "rho_aggregate",
    "optimal_policy",
]


# ---------------------------------------------------------------------------
# agents and profiles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Agent:
    """One individual: a taste over outcomes and a belief ball over states.

    ``utility`` maps outcome ids to reals and must be nonconstant (a
    constant taste carries no ranking information). ``reference`` is the
    agent's most plausible model, ``radius`` how far from it she is willing
    to extend credence.
    """

    name: str
    utility: Mapping[str, float]
    reference: Dist
    radius: float

    def __post_init__(self) -> None:
        if not self.utility:
            raise InputError(f"agent {self.name!r} has an empty utility map")
        vals = [float(v) for v in self.utility.values()]
        if any(not math.isfinite(v) for v in vals):
            raise InputError(f"agent {self.name!r} has non-finite utilities")
        if max(vals) - min(vals) == 0.0:
            raise InputError(
                f"agent {self.name!r} has a constant utility over outcomes"
            )
        if not (isinstance(self.radius, (int, float)) and self.radius >= 0.0
                and math.isfinite(self.radius)):
            raise InputError(
                f"agent {self.name!r} needs a finite nonnegative radius"
            )

    def ball(self) -> Ball:
        """The agent's KL credence ball."""
        return Ball(center=self.reference, radius=float(self.radius))


@dataclass(frozen=True)
class Profile:
    """A population of agents plus the planner's taste weights.

    ``acts`` maps an act id to the outcome id realized in each state (a
    vector as long as the state space). ``beta`` weights agents' utilities
    (componentwise nonnegative, not all zero) and ``gamma`` is the affine
    constant of the social utility.
    """

    agents: tuple[Agent, ...]
    acts: Mapping[str, tuple[str, ...]]
    beta: np.ndarray
    gamma: float = 0.0

    def __init__(
        self,
        agents: Sequence[Agent],
        acts: Mapping[str, Sequence[str]],
        beta: Sequence[float],
        gamma: float = 0.0,
    ):
        agents = tuple(agents)
        if not agents:
            raise EmptyList("a profile needs at least one agent")
        _check_shared_space(*(a.reference for a in agents))
        space = agents[0].reference.space
        beta_arr = np.asarray([float(b) for b in beta], dtype=float)
        if beta_arr.shape != (len(agents),):
            raise DimensionMismatch(
                f"{len(agents)} agents but beta has shape {beta_arr.shape}"
            )
        if np.any(beta_arr < 0.0) or np.any(~np.isfinite(beta_arr)):
            raise InputError("beta must be finite and componentwise nonnegative")
        if beta_arr.sum() == 0.0:
            raise InputError("beta must not be identically zero")
        acts_frozen: dict[str, tuple[str, ...]] = {}
        for act_id, outcomes in acts.items():
            outs = tuple(outcomes)
            if len(outs) != len(space):
                raise DimensionMismatch(
                    f"act {act_id!r} names {len(outs)} outcomes for "
                    f"{len(space)} states"
                )
            acts_frozen[str(act_id)] = outs
        beta_arr.setflags(write=False)
        object.__setattr__(self, "agents", agents)
        object.__setattr__(self, "acts", acts_frozen)
        object.__setattr__(self, "beta", beta_arr)
        object.__setattr__(self, "gamma", float(gamma))

    @property
    def space(self):
        return self.agents[0].reference.space

    def balls(self) -> list[Ball]:
        return [a.ball() for a in self.agents]


def social_utility(profile: Profile, act: str) -> StateVector:
    """u0(s) = sum_i beta_i * utility_i(act(s)) + gamma."""
    if act not in profile.acts:
        raise UnknownAct(f"act {act!r} is not declared in the profile")
    outcomes = profile.acts[act]
    vals = np.zeros(len(profile.space))
    for s, outcome in enumerate(outcomes):
        total = profile.gamma
        for agent, b in zip(profile.agents, profile.beta):
            if outcome not in agent.utility:
                raise UnknownOutcome(
                    f"agent {agent.name!r} has no utility for outcome {outcome!r}"
                )
            total += b * float(agent.utility[outcome])
        vals[s] = total
    return StateVector(profile.space, vals)


# ---------------------------------------------------------------------------
# the act-dependent social belief
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SocialBeliefResult:
    """Worst-case belief over the agents' ball intersection, with the
    per-outcome-level mixture weights recovered from it.

    ``weights_by_level`` maps each outcome level of the act to a vector of
    agent weights mu_i(level); agents with beta_i = 0 get exactly 0. The
    ``kkt_residual`` comes from the constrained solver, and
    ``reconstruction_residual`` is the per-state error of the recovered
    mixture form q*(s) = sum_i mu_i(level(s)) p_i(s). ``ill_conditioned``
    flags a rank-deficient level system: the belief is still valid, but the
    reported weights for that level are one solution among many.
    """

    belief: Dist
    weights_by_level: dict
    kkt_residual: float
    reconstruction_residual: float
    ill_conditioned: bool


def _active_indices(beta: np.ndarray) -> list[int]:
    return [i for i in range(beta.size) if beta[i] > 0.0]


def _check_kl_balls(balls: Sequence[Ball]) -> None:
    for b in balls:
        if not (isinstance(b.divergence, str) and b.divergence == "kl"):
            raise InputError("this solver is defined for KL balls only")


def social_belief_for_act(
    u0,
    act_levels: Sequence,
    balls: Sequence[Ball],
    beta: Sequence[float],
    lam: float,
) -> SocialBeliefResult:
    """Solve min_{q in the active balls} -lambda log E_q[exp(-u0/lambda)].

    ``act_levels`` assigns each state the outcome level of the act being
    evaluated (states sharing a label share a mixture weight). Agents with
    beta_i = 0 are dropped from the constraint set entirely and receive
    weight zero. The minimizing belief is found by the constrained solver;
    the level weights are then recovered by least squares of q* against the
    active references within each level group, clipped to be nonnegative
    and rescaled to preserve each group's mass.
    """
    balls = list(balls)
    if not balls:
        raise EmptyList("social_belief_for_act needs at least one ball")
    _check_kl_balls(balls)
    beta_arr = np.asarray([float(b) for b in beta], dtype=float)
    if beta_arr.shape != (len(balls),):
        raise DimensionMismatch(
            f"{len(balls)} balls but beta has shape {beta_arr.shape}"
        )
    if np.any(beta_arr < 0.0):
        raise InputError("beta must be componentwise nonnegative")
    if beta_arr.sum() == 0.0:
        raise InputError("beta must not be identically zero")
    lam = float(lam)
    if not (math.isfinite(lam) and lam > 0.0):
        raise InputError("social_belief_for_act needs a finite positive lambda")

    space = balls[0].center.space
    levels = list(act_levels)
    if len(levels) != len(space):
        raise DimensionMismatch(
            f"{len(levels)} level labels for {len(space)} states"
        )

    active = _active_indices(beta_arr)
    active_balls = [balls[i] for i in active]
    vals = _utility_values(u0, active_balls[0].center)
    m = float(vals.min())
    a = np.exp(-(vals - m) / lam)
    # the worst case maximizes E_q[exp(-(u0 - m)/lambda)] = a . q
    _, q_star, kkt = _linear_over_balls(a, active_balls, "max")
    belief = Dist(space, q_star)

    # --- per-level weight recovery -------------------------------------
    P_active = np.vstack([b.center.probs for b in active_balls])
    n_act = len(active)
    weights_by_level: dict = {}
    ill = False
    recon = np.zeros(len(space))
    for label in dict.fromkeys(levels):  # insertion order, deduped
        idx = [s for s, lab in enumerate(levels) if lab == label]
        A = P_active[:, idx].T  # (#states in level, n_act)
        target = q_star[idx]
        sol, _, rank, _ = np.linalg.lstsq(A, target, rcond=None)
        if rank < n_act:
            ill = True
        w = np.clip(sol, 0.0, None)
        model = A @ w
        model_mass = float(model.sum())
        target_mass = float(target.sum())
        if model_mass > 1e-300:
            w = w * (target_mass / model_mass)
        full = np.zeros(beta_arr.size)
        for j, i in enumerate(active):
            full[i] = w[j]
        full.setflags(write=False)
        weights_by_level[label] = full
        recon[idx] = np.abs(A @ w - target)

    return SocialBeliefResult(
        belief=belief,
        weights_by_level=weights_by_level,
        kkt_residual=float(kkt),
        reconstruction_residual=float(recon.max()),
        ill_conditioned=ill,
    )


# ---------------------------------------------------------------------------
# KL projection of a truth onto the intersection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruthProjection:
    """Forward-KL projection of p* onto the ball intersection, decomposed as
    sigma * p* + (1 - sigma) * sum_i mu_i p_i."""

    sigma: float
    projected: Dist
    mixture_weights: np.ndarray


def _kl_objective_fns(p_star: np.ndarray):
    sup = p_star > 0.0

    def vg(q: np.ndarray) -> tuple[float, np.ndarray]:
        if np.any(q[sup] <= 0.0):
            return math.inf, np.zeros_like(q)
        val = float(np.sum(p_star[sup] * np.log(p_star[sup] / q[sup])))
        grad = np.zeros_like(q)
        grad[sup] = -p_star[sup] / q[sup]
        return val, grad

    def hess(q: np.ndarray) -> np.ndarray:
        out = np.zeros_like(q)
        out[sup] = p_star[sup] / np.maximum(q[sup], 1e-300) ** 2
        return out

    return vg, hess


def _kl_constraint_fns(P: np.ndarray, radii: np.ndarray):
    cons_vg = []
    cons_hess = []
    for i in range(P.shape[0]):
        def vg(q: np.ndarray, i0=i) -> tuple[float, np.ndarray]:
            p = P[i0]
            sup = p > 0.0
            if np.any(q[sup] <= 0.0):
                return math.inf, np.zeros_like(q)
            val = float(np.sum(p[sup] * np.log(p[sup] / q[sup]))) - radii[i0]
            grad = np.zeros_like(q)
            grad[sup] = -p[sup] / q[sup]
            return val, grad

        def hd(q: np.ndarray, i0=i) -> np.ndarray:
            p = P[i0]
            out = np.zeros_like(q)
            sup = p > 0.0
            out[sup] = p[sup] / np.maximum(q[sup], 1e-300) ** 2
            return out

        cons_vg.append(vg)
        cons_hess.append(hd)
    return cons_vg, cons_hess


def kl_project_to_intersection(
    p_star: Dist,
    balls: Sequence[Ball],
    beta: Optional[Sequence[float]] = None,
) -> TruthProjection:
    """argmin over the active-ball intersection of kl(p_star || q).

    The minimizer is an exact mixture of p* and the active centers (the
    stationarity condition gives q = (p* + sum_i l_i p_i)/(1 + sum_i l_i)),
    so after solving in full belief space the result is decomposed against
    that basis: sigma is the coefficient on p*, and the remaining mass is
    split into mixture weights over the centers. sigma = 1 exactly when p*
    is itself feasible.
    """
    balls = list(balls)
    if not balls:
        raise EmptyList("kl_project_to_intersection needs at least one ball")
    _check_kl_balls(balls)
    _check_shared_space(p_star, *(b.center for b in balls))
    if beta is None:
        active = list(range(len(balls)))
    else:
        beta_arr = np.asarray([float(b) for b in beta], dtype=float)
        if beta_arr.shape != (len(balls),):
            raise DimensionMismatch(
                f"{len(balls)} balls but beta has shape {beta_arr.shape}"
            )
        if np.any(beta_arr < 0.0) or beta_arr.sum() == 0.0:
            raise InputError("beta must be nonnegative and not all zero")
        active = _active_indices(beta_arr)
    act_balls = [balls[i] for i in active]
    centers = [b.center for b in act_balls]
    radii = np.array([b.radius for b in act_balls])
    P = np.vstack([c.probs for c in centers])
    n_act = len(act_balls)
    space = p_star.space

    # p* already feasible: projection is the identity
    if all(b.divergence_from_center(p_star) <= b.radius + 1e-10 for b in act_balls):
        mw = np.full(n_act, 1.0 / n_act)
        mw.setflags(write=False)
        return TruthProjection(sigma=1.0, projected=p_star, mixture_weights=mw)

    wit = hull_witness(centers, [float(r) for r in radii])
    if not wit.found:
        raise EmptyIntersection(
            f"ball intersection is empty (best feasibility gap {wit.min_gap:.3e})"
        )
    if wit.min_gap >= -1e-9:
        q_star = wit.point.probs  # the feasible set is numerically a point
        value = kl(p_star, wit.point)
        if math.isinf(value):
            raise AbsoluteContinuityFailure(
                "p* puts mass outside the only feasible belief"
            )
    else:
        obj_vg, obj_hess = _kl_objective_fns(p_star.probs)
        cons_vg, cons_hess = _kl_constraint_fns(P, radii)
        start = 0.999 * wit.point.probs + 0.001 * np.full(len(space), 1.0 / len(space))
        res = solve_ball_constrained(
            obj_vg, cons_vg, start,
            obj_hess_diag=obj_hess, cons_hess_diag=cons_hess,
        )
        if not math.isfinite(res.value):
            raise AbsoluteContinuityFailure(
                "projection objective is infinite on the feasible set"
            )
        q_star = res.q

    basis = np.vstack([p_star.probs, P])
    coeffs = simplex_lstsq(basis, q_star)
    sigma = float(coeffs[0])
    rest = coeffs[1:]
    if rest.sum() > 1e-12:
        mw = rest / rest.sum()
    else:
        mw = np.full(n_act, 1.0 / n_act)
    mw = np.clip(mw, 0.0, None)
    mw = mw / mw.sum()
    mw.setflags(write=False)
    return TruthProjection(
        sigma=sigma, projected=Dist(space, q_star), mixture_weights=mw
    )


def pythagorean_gap(p_star: Dist, q: Dist, q0: Dist) -> float:
    """kl(p* || q) - kl(p* || q0): how much worse q explains the truth than
    the projection q0 does. Nonnegative for every feasible q when q0 is the
    actual projection."""
    _check_shared_space(p_star, q, q0)
    a = kl(p_star, q)
    b = kl(p_star, q0)
    if math.isinf(a) or math.isinf(b):
        raise AbsoluteContinuityFailure(
            "p* is not absolutely continuous w.r.t. one of the beliefs"
        )
    return a - b


# ---------------------------------------------------------------------------
# barycenter and goodness of fit
# ---------------------------------------------------------------------------

def barycenter(weights: Sequence[float], points: Sequence[Dist]) -> Dist:
    """The mixture sum_i mu_i p_i — the unique minimizer of the weighted
    forward-KL objective sum_i mu_i kl(p_i || q)."""
    return convex_combine(weights, points)


def fit_gap(
    weights: Sequence[float], points: Sequence[Dist]
) -> tuple[float, float]:
    """Goodness of fit of the barycenter, two equivalent ways.

    Returns (objective, entropy_gap) where objective is
    sum_i mu_i kl(p_i || q0) at the barycenter q0 and entropy_gap is
    H(q0) - sum_i mu_i H(p_i). The two coincide identically (expand the
    logs) and vanish exactly when all weighted points agree.
    """
    q0 = barycenter(weights, points)
    w = np.asarray([float(x) for x in weights], dtype=float)
    objective = 0.0
    ent = 0.0
    for wi, p in zip(w, points):
        if wi == 0.0:
            continue
        objective += wi * kl(p, q0)
        ent += wi * shannon_entropy(p)
    entropy_gap = shannon_entropy(q0) - ent
    return float(objective), float(entropy_gap)


# ---------------------------------------------------------------------------
# comparative statics of the mixture weights
# ---------------------------------------------------------------------------

def weight_sensitivity(
    balls: Sequence[Ball],
    beta: Sequence[float],
    lam: float,
    agent_index: int,
    step: float = 1e-5,
) -> tuple[float, float]:
    """Central finite differences of the deepest-point hull weights in the
    agent's own radius: (d mu_i / d eta_i, d sum_{j != i} mu_j / d eta_i).

    The weights are the hull coordinates of the deepest point of the
    intersection (the minimizer of the worst constraint slack), which is
    what the constant-weight regime pins down; they do not depend on
    lambda, which is accepted for signature uniformity. Enlarging one's own
    ball can only lower one's own weight, so the first return is <= 0 up
    to solver noise and the second is its negative.
    """
    balls = list(balls)
    if not balls:
        raise EmptyList("weight_sensitivity needs at least one ball")
    _check_kl_balls(balls)
    beta_arr = np.asarray([float(b) for b in beta], dtype=float)
    if beta_arr.shape != (len(balls),):
        raise DimensionMismatch(
            f"{len(balls)} balls but beta has shape {beta_arr.shape}"
        )
    if not (0 <= agent_index < len(balls)):
        raise InputError(f"agent index {agent_index} out of range")
    if beta_arr[agent_index] <= 0.0:
        raise InputError("sensitivity is defined for agents with beta > 0")
    if not (isinstance(step, (int, float)) and step > 0.0 and math.isfinite(step)):
        raise InputError(f"step must be a positive real, got {step!r}")
    float(lam)  # accepted but unused: the weights are a geometric object

    active = _active_indices(beta_arr)
    pos = active.index(agent_index)
    centers = [balls[i].center for i in active]
    radii = np.array([balls[i].radius for i in active])

    def weights_at(r: np.ndarray) -> Optional[np.ndarray]:
        wit = hull_witness(centers, [float(x) for x in r])
        return wit.weights if wit.found else None

    h = float(step)
    if radii[pos] - h < 0.0:
        h = radii[pos] / 2.0
        if h <= 0.0:
            raise EmptyIntersection(
                "cannot perturb a zero radius downward; no room for central "
                "differences"
            )
    for attempt in range(2):
        rp = radii.copy()
        rp[pos] += h
        rm = radii.copy()
        rm[pos] -= h
        wp = weights_at(rp)
        wm = weights_at(rm)
        if wp is not None and wm is not None:
            d_own = float((wp[pos] - wm[pos]) / (2.0 * h))
            others = [j for j in range(len(active)) if j != pos]
            d_others = float(
                (wp[others].sum() - wm[others].sum()) / (2.0 * h)
            )
            return d_own, d_others
        h /= 10.0
    raise EmptyIntersection(
        "perturbed intersection is empty even after reducing the step"
    )


# ---------------------------------------------------------------------------
# welfare-dominant belief (the probability dictator)
# ---------------------------------------------------------------------------

def welfare_dominant_belief(candidates: Sequence[Dist]) -> Dist:
    """The first-order stochastically greatest candidate.

    Requires the candidates to be totally ordered by FOSD under the state
    order; any incomparable pair raises NoFosdOrder rather than guessing.
    The winner is always one of the candidates — never a mixture.
    """
    candidates = list(candidates)
    if not candidates:
        raise EmptyList("welfare_dominant_belief needs at least one candidate")
    _check_shared_space(*candidates)
    n = len(candidates)
    table = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            cmp = fosd_compare(candidates[i], candidates[j])
            if cmp is FosdOrder.Incomparable:
                raise NoFosdOrder(
                    f"candidates {i} and {j} are not FOSD-comparable"
                )
            table[i][j] = cmp
    best = 0
    for j in range(1, n):
        if table[best][j] is FosdOrder.QDominates:
            best = j
    # sanity: the winner must weakly dominate everyone
    for j in range(n):
        if j == best:
            continue
        cmp = fosd_compare(candidates[best], candidates[j])
        if cmp not in (FosdOrder.PDominates, FosdOrder.Equal):
            raise NoFosdOrder(
                "no candidate dominates all others; the FOSD order is not total"
            )
    return candidates[best]


# ---------------------------------------------------------------------------
# rho-divergence aggregation
# ---------------------------------------------------------------------------

def _rho_batch(rho: float, Pow: np.ndarray, sig: np.ndarray) -> np.ndarray:
    """Power-mean beliefs for a batch of sigma rows: rows of sig mix the
    precomputed p^(1-rho) rows in Pow, then the 1/(1-rho) power renormalizes."""
    g = np.clip(sig, 0.0, None) @ Pow
    r = np.power(np.maximum(g, 1e-300), 1.0 / (1.0 - rho))
    return r / r.sum(axis=1, keepdims=True)


def _rho_div_to(rho: float, p_pow: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """D_rho(p || q) for one p (given as p^(1-rho)) against rows of Q."""
    inner = Q ** rho @ p_pow
    return (1.0 - inner) / (rho * (1.0 - rho))


def rho_aggregate(
    p_star: Dist,
    points: Sequence[Dist],
    radii: Sequence[float],
    rho: float,
) -> tuple[Dist, np.ndarray]:
    """Project p* onto the intersection of rho-divergence balls.

    The minimizer has the power-mean form
    q proportional to (sum_i sigma_i p_i^(1-rho) + sigma_* p*^(1-rho))^(1/(1-rho)),
    so the search runs over the (n+1)-simplex of sigma coefficients with an
    augmented Lagrangian (finite-difference gradients; the map is cheap and
    scale-invariant in sigma). Feasibility is certified first by a direct
    minimax search in belief space. Returns (aggregate, sigma).
    """
    if not (isinstance(rho, (int, float)) and 0.0 < rho < 1.0):
        raise RhoOutOfRange(f"rho must lie strictly in (0, 1), got {rho!r}")
    points = list(points)
    if not points:
        raise EmptyList("rho_aggregate needs at least one point")
    _check_shared_space(p_star, *points)
    if np.any(p_star.probs <= 0.0) or any(np.any(p.probs <= 0.0) for p in points):
        raise InputError("rho_aggregate needs full-support points")
    radii_arr = np.asarray([float(r) for r in radii], dtype=float)
    if radii_arr.shape != (len(points),):
        raise DimensionMismatch(
            f"{len(points)} points but {radii_arr.size} radii"
        )
    if np.any(radii_arr < 0.0) or np.any(~np.isfinite(radii_arr)):
        raise InputError("radii must be finite and nonnegative")

    rho = float(rho)
    space = p_star.space
    S = len(space)
    n = len(points)
    P = np.vstack([p.probs for p in points])
    Pow = np.vstack([P ** (1.0 - rho), p_star.probs[None, :] ** (1.0 - rho)])

    # --- feasibility: minimax over beliefs directly --------------------
    def div_value(i: int, q: np.ndarray) -> float:
        # raw-array D_rho: (1/(rho(1-rho)))(1 - sum p^(1-rho) q^rho);
        # the reference points are full-support so no 0^negative appears
        if np.any(q < 0.0):
            return math.inf
        qq = np.maximum(q, 0.0)
        return float(
            (1.0 - np.sum(Pow[i] * qq ** rho)) / (rho * (1.0 - rho))
        )

    def div_grad(i: int, q: np.ndarray) -> np.ndarray:
        qq = np.maximum(q, 1e-300)
        return -(P[i] ** (1.0 - rho)) * qq ** (rho - 1.0) / (1.0 - rho)

    # annealed log-sum-exp smoothing of max_i [D_rho(p_i || q) - tau_i],
    # searched over beliefs q directly (no hull theorem for this family)
    def minimax_vg(tau_s: float):
        def vg(q: np.ndarray) -> tuple[float, np.ndarray]:
            vals = np.array([div_value(i, q) - radii_arr[i] for i in range(n)])
            if not np.all(np.isfinite(vals)):
                return math.inf, np.zeros(S)
            vmax = float(vals.max())
            z = np.exp((vals - vmax) / tau_s)
            sig = z / z.sum()
            grad = np.zeros(S)
            for i in range(n):
                if sig[i] > 1e-300:
                    grad += sig[i] * div_grad(i, q)
            return vmax + tau_s * math.log(float(z.sum())), grad
        return vg

    starts = [np.full(S, 1.0 / S), p_star.probs] + [P[i] for i in range(n)]
    # the candidate starts are often already inside (every center is, when
    # its own radius is positive), which settles feasibility with no solve
    best_gap = min(
        max(div_value(i, q0) - radii_arr[i] for i in range(n))
        for q0 in starts
    )
    if best_gap > 1e-10:
        for q0 in starts:
            q = project_to_simplex(0.99 * q0 + 0.01 * np.full(S, 1.0 / S))
            try:
                for tau_s in (1e-1, 1e-3, 1e-5, 1e-6):
                    q = projected_gradient(
                        minimax_vg(tau_s), q, max_iter=300,
                        tol=max(tau_s * 1e-3, 1e-12),
                    ).x
                    gap = max(div_value(i, q) - radii_arr[i] for i in range(n))
                    best_gap = min(best_gap, gap)
                    if best_gap <= 1e-10:
                        break
            except SolverDiverged:
                continue
            if best_gap <= 1e-10:
                break  # a comfortably feasible point is all this stage needs
    if best_gap > 1e-8:
        raise EmptyIntersection(
            f"rho-ball intersection is empty (best feasibility gap "
            f"{best_gap:.3e})"
        )

    # --- p* feasible: nothing to project -------------------------------
    if max(div_value(i, p_star.probs) - radii_arr[i] for i in range(n)) <= 1e-10:
        sig = np.zeros(n + 1)
        sig[n] = 1.0
        sig.setflags(write=False)
        return p_star, sig

    # --- sigma-space augmented Lagrangian -------------------------------
    p_star_pow = p_star.probs ** (1.0 - rho)

    def batch_eval(sig_batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        Q = _rho_batch(rho, Pow, sig_batch)
        F = _rho_div_to(rho, p_star_pow, Q)
        G = np.empty((sig_batch.shape[0], n))
        for i in range(n):
            G[:, i] = _rho_div_to(rho, Pow[i], Q) - radii_arr[i]
        return F, G

    eye = np.eye(n + 1)

    def al_value_grad_factory(lam_mult: np.ndarray, c_pen: float):
        def al_of(sig_batch: np.ndarray) -> np.ndarray:
            F, G = batch_eval(sig_batch)
            # vectorized over constraints: psi_c(g, l) with the kink at
            # l + c g = 0 handled by the max
            t = np.maximum(lam_mult[None, :] + c_pen * G, 0.0)
            return F + np.sum(t * t - lam_mult[None, :] ** 2, axis=1) / (
                2.0 * c_pen
            )

        h = 1e-6

        def vg(sig: np.ndarray) -> tuple[float, np.ndarray]:
            batch = np.empty((2 * (n + 1) + 1, n + 1))
            batch[0] = sig
            batch[1 : n + 2] = sig[None, :] + h * eye
            batch[n + 2 :] = sig[None, :] - h * eye
            vals = al_of(batch)
            base = float(vals[0])
            if not math.isfinite(base):
                return math.inf, np.zeros(n + 1)
            grad = (vals[1 : n + 2] - vals[n + 2 :]) / (2.0 * h)
            return base, grad
        return vg

    best_sig = None
    best_val = math.inf
    sig_starts = [np.full(n + 1, 1.0 / (n + 1))]
    s0 = np.zeros(n + 1)
    s0[:n] = 1.0 / n
    sig_starts.append(s0)
    for i in range(n + 1):
        e = np.full(n + 1, 0.1 / n if n > 0 else 0.0)
        e[i] = 0.9
        e = e / e.sum()
        sig_starts.append(e)

    def al_run(sig0: np.ndarray, outers: int, tight: float) -> np.ndarray:
        # early rounds only steer the multipliers, so the inner solves start
        # loose and tighten by a decade per round down to the target
        lam_mult = np.zeros(n)
        c_pen = 10.0
        sig = project_to_simplex(sig0)
        inner_tol = 1e-4
        prev_viol = math.inf
        for _ in range(outers):
            res = projected_gradient(
                al_value_grad_factory(lam_mult, c_pen), sig,
                max_iter=200, tol=max(inner_tol, tight),
            )
            sig = res.x
            _, G = batch_eval(sig[None, :])
            gvals = G[0]
            viol = float(np.max(gvals, initial=0.0))
            lam_mult = np.maximum(0.0, lam_mult + c_pen * gvals)
            if viol <= 1e-9 and res.residual <= 10.0 * tight:
                break
            # multiplier-only updates contract the violation at a fixed
            # linear rate; demand a decade per round or raise the penalty
            if viol > 0.1 * prev_viol:
                c_pen = min(c_pen * 10.0, 1e10)
            prev_viol = max(viol, 1e-300)
            inner_tol *= 0.1
        return sig

    # cheap pass over all starts, then one tight refinement of the winner
    candidates: list[np.ndarray] = []
    for sig0 in sig_starts:
        sig = al_run(sig0, outers=6, tight=1e-8)
        candidates.append(sig)
        F, G = batch_eval(sig[None, :])
        if float(np.max(G[0], initial=0.0)) <= 1e-5 and F[0] < best_val:
            best_val = float(F[0])
            best_sig = sig
    if best_sig is not None:
        candidates.append(al_run(best_sig, outers=10, tight=1e-11))

    best_sig, best_val = None, math.inf
    for bar in (1e-7, 1e-6):
        for sig in candidates:
            F, G = batch_eval(sig[None, :])
            if float(np.max(G[0], initial=0.0)) <= bar and F[0] < best_val:
                best_val = float(F[0])
                best_sig = sig
        if best_sig is not None:
            break
    if best_sig is None:
        raise NoConvergence(
            "sigma-form search found no feasible power-mean aggregate"
        )
    q_out = _rho_batch(rho, Pow, best_sig[None, :])[0]
    sig_out = np.clip(best_sig, 0.0, None)
    sig_out = sig_out / sig_out.sum()
    sig_out.setflags(write=False)
    return Dist(space, q_out), sig_out


# ---------------------------------------------------------------------------
# optimal 1-d policy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActFamily:
    """A 1-d family of acts: t in [lo, hi] maps to a per-state social
    utility vector. Optional per-agent derivative callbacks (t -> per-state
    u_i'(t)) enable the first-order-condition check at the optimum."""

    lo: float
    hi: float
    utility: Callable[[float], Sequence[float]]
    agent_derivatives: Optional[tuple[Callable[[float], Sequence[float]], ...]] = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)
                and self.hi > self.lo):
            raise InputError(
                f"act family needs finite bounds with hi > lo, got "
                f"[{self.lo!r}, {self.hi!r}]"
            )


@dataclass(frozen=True)
class PolicyResult:
    """Outcome of the 1-d policy search."""

    t_opt: float
    value: float
    foc_residual: Optional[float] = None
    per_state_derivative: Optional[np.ndarray] = None


def optimal_policy(
    family: ActFamily,
    q0: Dist,
    lam: float,
    beta: Optional[Sequence[float]] = None,
) -> PolicyResult:
    """Maximize the multiplier value of the family over t in [lo, hi].

    A 101-point pre-scan guards concavity: two strict interior local maxima
    raise NonConcaveDetected. Golden-section then refines around the best
    scan point. With finite lambda the optimum may be interior; at
    lambda = inf the objective is linear-induced and lands on a boundary
    for the families of interest. When derivative callbacks and beta are
    supplied, the tilted first-order condition
    E_tilt[sum_i beta_i u_i'(t_opt)] is evaluated and reported.
    """
    lam_f = float(lam)
    if math.isnan(lam_f) or lam_f <= 0.0:
        raise InputError(f"lambda must be positive, got {lam!r}")

    def value_at(t: float) -> float:
        return multiplier_value(
            np.asarray(family.utility(t), dtype=float), q0, lam_f
        )

    ts = np.linspace(family.lo, family.hi, 101)
    vs = np.array([value_at(t) for t in ts])
    eps = 1e-12 * (1.0 + float(np.max(np.abs(vs))))
    interior_maxima = [
        k for k in range(1, 100)
        if vs[k] > vs[k - 1] + eps and vs[k] > vs[k + 1] + eps
    ]
    if len(interior_maxima) >= 2:
        raise NonConcaveDetected(
            f"{len(interior_maxima)} interior local maxima on the pre-scan; "
            "the family is not concave in t"
        )
    k = int(np.argmax(vs))
    lo_b = ts[max(k - 1, 0)]
    hi_b = ts[min(k + 1, 100)]
    t_opt, v_opt = golden_section_max(value_at, lo_b, hi_b, tol=1e-13)
    # boundary scan points can beat the refined bracket on linear objectives
    if vs[k] > v_opt:
        t_opt, v_opt = float(ts[k]), float(vs[k])

    foc = None
    per_state = None
    if (
        beta is not None
        and family.agent_derivatives is not None
        and not math.isinf(lam_f)
        and family.lo + 1e-9 < t_opt < family.hi - 1e-9
    ):
        beta_arr = np.asarray([float(b) for b in beta], dtype=float)
        derivs = [
            np.asarray(d(t_opt), dtype=float) for d in family.agent_derivatives
        ]
        if len(derivs) != beta_arr.size:
            raise DimensionMismatch(
                f"{beta_arr.size} beta weights but {len(derivs)} derivative "
                "callbacks"
            )
        total = np.zeros(len(q0.space))
        for b, d in zip(beta_arr, derivs):
            total += b * d
        tilt = worst_case_tilt(
            np.asarray(family.utility(t_opt), dtype=float), q0, lam_f
        )
        foc = abs(float(tilt.probs @ total))
        per_state = total
        per_state.setflags(write=False)
    return PolicyResult(
        t_opt=float(t_opt), value=float(v_opt),
        foc_residual=foc, per_state_derivative=per_state,
    )
