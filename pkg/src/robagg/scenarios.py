"""Worked end-to-end applications.

Each routine here is a small, fully specified decision problem wired
through the library: the two-state treatment-allocation problem, the
two-urn thought experiment, elicitation of preference parameters from
certainty equivalents, exponential-tilt asset pricing (both the
announcement-adjusted discount factor and pricing a payoff to a target),
the shrinkage estimator as a weighted-likelihood aggregate, and the two
demonstration reports (mixture invariance and the probability dictator).

The CLI in ``robagg.cli`` drives these from scenario files; everything in
this module is importable and deterministic on its own.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from ._solvers import bisect_root, grow_bracket
from .aggregation import (
    ActFamily,
    Agent,
    Profile,
    optimal_policy,
    welfare_dominant_belief,
)
from .criteria import (
    BallIntersection,
    FiniteSet,
    HullOfFinite,
    Singleton,
    StructuredSet,
    multiplier_value,
)
from .errors import (
    DimensionMismatch,
    InconsistentInputs,
    InputError,
    NoRoot,
    SchemaError,
    TargetOutOfRange,
    TooFewSignals,
    WeightSumError,
)
from .simplex import Dist, StateSpace, StateVector

__all__ = [
    "ScenarioFile",
    "EstimationInput",
    "EstimateResult",
    "EllsbergReport",
    "AsdfResult",
    "InvarianceReport",
    "DictatorReport",
    "load_scenario",
    "treatment_solve",
    "ellsberg_run",
    "estimate_parameters",
    "estimation_forward_model",
    "asdf",
    "sdf_project",
    "james_stein_wle",
    "demo_invariance",
    "demo_dictator",
]

SCENARIO_VERSION = "robagg-scenario/1"

COMMANDS = (
    "evaluate",
    "aggregate",
    "project",
    "chernoff",
    "treatment",
    "ellsberg",
    "estimate",
    "asdf",
    "sdf",
    "jamesstein",
    "demo-invariance",
    "demo-dictator",
)


# ---------------------------------------------------------------------------
# treatment allocation (two states, one dial)
# ---------------------------------------------------------------------------

def treatment_solve(
    welfare: Sequence[Sequence[float]], lam: float, mu: float
) -> tuple[float, float]:
    """Optimal split beta in [0, 1] between two pure policies.

    ``welfare`` is a 2x2 table: row 0 is the per-state social welfare of
    the pure beta = 0 policy, row 1 of the pure beta = 1 policy, so the
    blended policy yields u0(beta) = (1-beta) row0 + beta row1 per state.
    The planner holds belief (mu, 1-mu) over the two states and maximizes
    the multiplier value; lambda = inf turns the objective linear in beta
    and pushes the optimum to a corner. Returns (beta_hat, value).
    """
    table = np.asarray(welfare, dtype=float)
    if table.shape != (2, 2) or not np.all(np.isfinite(table)):
        raise InputError("welfare must be a finite 2x2 table")
    mu = float(mu)
    if not (0.0 < mu < 1.0):
        raise InputError(f"mu must lie strictly in (0, 1), got {mu!r}")

    space = StateSpace(("s1", "s2"))
    q0 = Dist(space, (mu, 1.0 - mu))
    row0, row1 = table[0], table[1]
    family = ActFamily(
        lo=0.0, hi=1.0,
        utility=lambda t: (1.0 - t) * row0 + t * row1,
    )
    res = optimal_policy(family, q0, lam)
    beta_hat = res.t_opt
    if beta_hat < 1e-9:
        beta_hat = 0.0
    elif beta_hat > 1.0 - 1e-9:
        beta_hat = 1.0
    return float(beta_hat), float(res.value)


# ---------------------------------------------------------------------------
# the two-urn comparison
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EllsbergReport:
    """Values and ranking of the four two-urn positions.

    fR/fB bet 100 on red/black drawn from the ambiguous urn; piR/piB are
    the 50/50 lottery tickets on the known urn. Utility is x/100, so the
    lottery tickets are constant acts worth exactly 0.5 in utility — their
    value never bends with lambda, while the ambiguous bets do.
    """

    values: dict
    ranking: str
    bets_indifferent: bool
    lotteries_indifferent: bool
    lottery_strictly_preferred: bool


def _ranking_string(values: Mapping[str, float], order: Sequence[str]) -> str:
    names = sorted(order, key=lambda n: (-values[n], order.index(n)))
    groups: list[list[str]] = []
    for n in names:
        if groups and abs(values[groups[-1][0]] - values[n]) <= 1e-12 * (
            1.0 + abs(values[groups[-1][0]])
        ):
            groups[-1].append(n)
        else:
            groups.append([n])
    return " > ".join(" ~ ".join(g) for g in groups)


def ellsberg_run(lam: float, p1: float, p2: float, mu: float) -> EllsbergReport:
    """Evaluate the four positions under the mixture reference belief.

    p1 and p2 are the two reference probabilities of red in the ambiguous
    urn, mixed with weight mu into the planner's belief q0. The bets are
    genuinely state-contingent and get the full multiplier treatment; the
    lottery tickets resolve by an independent fair coin, so their utility
    is the same in every state and the criterion returns the constant.
    """
    for name, v in (("p1", p1), ("p2", p2), ("mu", mu)):
        v = float(v)
        if not (0.0 <= v <= 1.0):
            raise InputError(f"{name} must lie in [0, 1], got {v!r}")
    space = StateSpace(("red", "black"))
    q_red = float(mu) * float(p1) + (1.0 - float(mu)) * float(p2)
    q0 = Dist(space, (q_red, 1.0 - q_red))

    v_fr = multiplier_value((1.0, 0.0), q0, lam)
    v_fb = multiplier_value((0.0, 1.0), q0, lam)
    v_pi = 0.5  # constant act: half the utility of the 100 payoff
    values = {"fR": v_fr, "fB": v_fb, "piR": v_pi, "piB": v_pi}
    order = ("piR", "piB", "fR", "fB")
    tol = 1e-12
    return EllsbergReport(
        values=values,
        ranking=_ranking_string(values, order),
        bets_indifferent=abs(v_fr - v_fb) <= tol,
        lotteries_indifferent=True,
        lottery_strictly_preferred=v_pi > max(v_fr, v_fb) + tol,
    )


# ---------------------------------------------------------------------------
# parameter elicitation from certainty equivalents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimationInput:
    """Elicited certainty equivalents for the two-agent design.

    ``ce_lottery[i]`` is agent i's cash equivalent of the 50/50 lottery
    over {stake, 0}; ``ce_social_lottery`` the planner's for the same
    lottery; ``ce_ambiguous`` the planner's for the ambiguous version of
    the bet. Wealth enters through the curvature family
    u_i(x) = (wealth_i + x)^(1 - phi_i).
    """

    wealth: tuple[float, float]
    ce_lottery: tuple[float, float]
    ce_social_lottery: float
    ce_ambiguous: float
    stake: float = 100.0

    def __post_init__(self) -> None:
        if len(self.wealth) != 2 or len(self.ce_lottery) != 2:
            raise InputError(
                "the estimator is specified for exactly two agents"
            )
        if not (self.stake > 0.0 and math.isfinite(self.stake)):
            raise InputError(f"stake must be positive, got {self.stake!r}")
        for w in self.wealth:
            if not (w > 0.0 and math.isfinite(w)):
                raise InputError(f"wealth must be positive, got {w!r}")
        for c in self.ce_lottery:
            if not (0.0 < c < self.stake):
                raise InputError(
                    f"lottery certainty equivalents must lie strictly inside "
                    f"(0, {self.stake}), got {c!r}"
                )
        for name, c in (
            ("ce_social_lottery", self.ce_social_lottery),
            ("ce_ambiguous", self.ce_ambiguous),
        ):
            if not (0.0 < c < self.stake):
                raise InputError(
                    f"{name} must lie strictly inside (0, {self.stake}), "
                    f"got {c!r}"
                )


@dataclass(frozen=True)
class EstimateResult:
    phi_hats: tuple[float, float]
    beta_hats: tuple[float, float]
    lambda_hat: float  # math.inf means "effectively infinite"


def _crra(x: float, wealth: float, phi: float) -> float:
    return (wealth + x) ** (1.0 - phi)


def _phi_root(wealth: float, ce: float, stake: float) -> float:
    """Curvature phi in [0, 1) matching one lottery certainty equivalent.

    F(phi) = (w+c)^(1-phi) - 0.5 (w+stake)^(1-phi) - 0.5 w^(1-phi) has
    F(0) = c - stake/2 and a spurious zero at phi = 1, so the search runs
    on [0, 1): risk-neutral answers (c = stake/2) return 0 exactly, values
    of c above stake/2 or at/below the log-utility equivalent
    sqrt(w (w + stake)) - w admit no root in the family.
    """
    half = stake / 2.0
    if abs(ce - half) <= 1e-12 * stake:
        return 0.0
    if ce > half:
        raise NoRoot(
            f"certainty equivalent {ce!r} exceeds the risk-neutral value "
            f"{half!r}; no concave curvature matches"
        )
    log_ce = math.sqrt(wealth * (wealth + stake)) - wealth
    if ce <= log_ce + 1e-12 * stake:
        raise NoRoot(
            f"certainty equivalent {ce!r} is at or below the log-utility "
            f"value {log_ce:.6g}; no curvature in [0, 1) matches"
        )

    def F(phi: float) -> float:
        return (
            _crra(ce, wealth, phi)
            - 0.5 * _crra(stake, wealth, phi)
            - 0.5 * _crra(0.0, wealth, phi)
        )

    return bisect_root(F, 0.0, 1.0 - 1e-9, xtol=1e-14)


def estimate_parameters(inp: EstimationInput) -> EstimateResult:
    """Back out (phi_1, phi_2, beta_1, lambda) from four certainty
    equivalents, each from its own monotone scalar equation.

    The curvatures come from the individual lottery CEs; beta_1 solves the
    linear indifference condition of the social lottery CE; lambda is
    bisected on a log bracket (1e-4, 1e4) against the ambiguous CE, with
    the top of the bracket reported as math.inf ("effectively infinite")
    when the ambiguous CE already equals the lambda = inf value.
    """
    stake = float(inp.stake)
    phi1 = _phi_root(inp.wealth[0], inp.ce_lottery[0], stake)
    phi2 = _phi_root(inp.wealth[1], inp.ce_lottery[1], stake)

    # beta_1 from the social-lottery indifference: it is linear in beta
    def gap(i: int, x: float) -> float:
        w = inp.wealth[i]
        phi = (phi1, phi2)[i]
        return (
            _crra(x, w, phi)
            - 0.5 * _crra(stake, w, phi)
            - 0.5 * _crra(0.0, w, phi)
        )

    a1 = gap(0, inp.ce_social_lottery)
    a2 = gap(1, inp.ce_social_lottery)
    if abs(a2 - a1) < 1e-300:
        raise InconsistentInputs(
            "the social lottery equivalent does not identify beta: both "
            "agents explain it equally"
        )
    beta1 = a2 / (a2 - a1)
    if beta1 < -1e-9 or beta1 > 1.0 + 1e-9:
        raise InconsistentInputs(
            f"the social lottery equivalent implies beta_1 = {beta1:.6g} "
            "outside [0, 1]"
        )
    beta1 = min(max(beta1, 0.0), 1.0)

    def u0(x: float) -> float:
        return beta1 * _crra(x, inp.wealth[0], phi1) + (1.0 - beta1) * _crra(
            x, inp.wealth[1], phi2
        )

    target = u0(inp.ce_ambiguous)
    hi_u, lo_u = u0(stake), u0(0.0)
    coin = Dist(StateSpace(("tails", "heads")), (0.5, 0.5))

    def ce_utils(lam: float) -> float:
        # the multiplier criterion IS the phi-transform pair, computed with
        # the support-min shift so tiny lambda cannot underflow exp
        return multiplier_value((lo_u, hi_u), coin, lam)

    def G(lam: float) -> float:
        return ce_utils(lam) - target

    g_lo, g_hi = G(1e-4), G(1e4)
    if g_hi < 0.0:
        # even the top of the bracket undershoots: either the input sits at
        # the ambiguity-neutral value (report infinite lambda) or above it
        if 0.5 * (hi_u + lo_u) - target >= -1e-9 * (1.0 + abs(target)):
            lambda_hat = math.inf
        else:
            raise NoRoot(
                "ambiguous certainty equivalent exceeds the ambiguity-"
                "neutral value; no positive lambda matches"
            )
    elif g_lo > 0.0:
        raise NoRoot(
            "ambiguous certainty equivalent falls below the most cautious "
            "value in the bracket; no lambda in (1e-4, 1e4) matches"
        )
    else:
        log_root = bisect_root(
            lambda t: G(math.exp(t)), math.log(1e-4), math.log(1e4),
            xtol=1e-13,
        )
        lambda_hat = math.exp(log_root)

    return EstimateResult(
        phi_hats=(float(phi1), float(phi2)),
        beta_hats=(float(beta1), float(1.0 - beta1)),
        lambda_hat=lambda_hat,
    )


def estimation_forward_model(
    phi1: float,
    phi2: float,
    beta1: float,
    lam: float,
    wealth: tuple[float, float] = (100.0, 100.0),
    stake: float = 100.0,
) -> EstimationInput:
    """Generate the four certainty equivalents implied by the parameters.

    The inverse of ``estimate_parameters``: individual CEs in closed form,
    the social and ambiguous CEs by bisection of the increasing utility
    u0 on [0, stake].
    """
    for name, phi in (("phi1", phi1), ("phi2", phi2)):
        if not (0.0 <= phi < 1.0):
            raise InputError(f"{name} must lie in [0, 1), got {phi!r}")
    if not (0.0 <= beta1 <= 1.0):
        raise InputError(f"beta1 must lie in [0, 1], got {beta1!r}")

    def ce_individual(w: float, phi: float) -> float:
        mean_u = 0.5 * _crra(stake, w, phi) + 0.5 * _crra(0.0, w, phi)
        return mean_u ** (1.0 / (1.0 - phi)) - w

    c1 = ce_individual(wealth[0], phi1)
    c2 = ce_individual(wealth[1], phi2)

    def u0(x: float) -> float:
        return beta1 * _crra(x, wealth[0], phi1) + (1.0 - beta1) * _crra(
            x, wealth[1], phi2
        )

    def invert_u0(target: float) -> float:
        return bisect_root(lambda x: u0(x) - target, 0.0, stake, xtol=1e-14)

    c0 = invert_u0(0.5 * u0(stake) + 0.5 * u0(0.0))
    coin = Dist(StateSpace(("tails", "heads")), (0.5, 0.5))
    ce_u = multiplier_value((u0(0.0), u0(stake)), coin, lam)
    tau = invert_u0(ce_u)
    return EstimationInput(
        wealth=(float(wealth[0]), float(wealth[1])),
        ce_lottery=(float(c1), float(c2)),
        ce_social_lottery=float(c0),
        ce_ambiguous=float(tau),
        stake=float(stake),
    )


# ---------------------------------------------------------------------------
# exponential-tilt asset pricing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AsdfResult:
    """Announcement-adjusted pricing of a payoff.

    ``tilt`` is the adjusted pricing belief, ``post_prices`` the per-state
    post-announcement prices, ``pre_price`` the pre-announcement price of
    the claim, and ``premium`` the expected-return wedge
    E_q0[post_prices] - pre_price.
    """

    tilt: Dist
    pre_price: float
    post_prices: StateVector
    premium: float


def _state_values(x, space: StateSpace, name: str) -> np.ndarray:
    vals = x.values if isinstance(x, StateVector) else np.asarray(x, dtype=float)
    if vals.shape != (len(space),):
        raise DimensionMismatch(
            f"{name} has shape {vals.shape}, expected ({len(space)},)"
        )
    if not np.all(np.isfinite(vals)):
        raise InputError(f"{name} must be finite")
    return vals


def asdf(
    q0: Dist,
    u0_C1,
    lam: float,
    psi: float,
    payoff,
    u0prime_ratio,
) -> AsdfResult:
    """Price a payoff before an announcement whose content shifts beliefs.

    The adjusted belief tilts q0 by exp(-psi u0(C1)/lambda): states with
    better continuation news are discounted. Post-announcement prices are
    marginal-utility-ratio times payoff (the ratio is supplied, not
    modeled); the pre-announcement price is the tilted expectation of
    those, and the premium is the untilted minus the tilted price. With a
    constant continuation utility (or infinite lambda) the tilt vanishes
    and the premium is exactly zero.
    """
    lam_f = float(lam)
    if math.isnan(lam_f) or lam_f <= 0.0:
        raise InputError(f"lambda must be positive, got {lam!r}")
    psi_f = float(psi)
    if not (psi_f > 0.0 and math.isfinite(psi_f)):
        raise InputError(f"psi must be a positive real, got {psi!r}")
    space = q0.space
    cont = _state_values(u0_C1, space, "u0_C1")
    pay = _state_values(payoff, space, "payoff")
    ratio = _state_values(u0prime_ratio, space, "u0prime_ratio")

    if math.isinf(lam_f):
        tilt_arr = q0.probs.copy()
    else:
        sup = q0.probs > 0.0
        expo = psi_f * cont / lam_f
        m = float(expo[sup].min())
        w = np.zeros_like(q0.probs)
        w[sup] = q0.probs[sup] * np.exp(-(expo[sup] - m))
        tilt_arr = w / w.sum()
    tilt = Dist(space, tilt_arr)
    post = ratio * pay
    pre_price = float(tilt.probs @ post)
    premium = float(q0.probs @ post) - pre_price
    return AsdfResult(
        tilt=tilt,
        pre_price=pre_price,
        post_prices=StateVector(space, post),
        premium=premium,
    )


def sdf_project(q0: Dist, payoff_v, target: float) -> tuple[Dist, float]:
    """Find the exponential tilt of q0 that prices payoff_v at target.

    Solves E_tilt[v] = target for tilt(s) proportional to
    q0(s) exp(-v(s)/ell) by bisection in s = 1/ell (the tilted mean is
    strictly decreasing in s, hitting E_q0[v] at s = 0). Targets above the
    reference mean need a negative ell; a target equal to the reference
    mean returns (q0, inf). Targets outside the open support range of v
    cannot be priced by any tilt.
    """
    v = _state_values(payoff_v, q0.space, "payoff_v")
    target = float(target)
    if not math.isfinite(target):
        raise InputError(f"target must be finite, got {target!r}")
    sup = q0.probs > 0.0
    probs = q0.probs[sup]
    vs = v[sup]
    e0 = float(probs @ vs)
    scale = 1.0 + abs(e0) + float(np.max(np.abs(vs)))
    if abs(target - e0) <= 1e-12 * scale:
        return q0, math.inf
    vmin, vmax = float(vs.min()), float(vs.max())
    if not (vmin < target < vmax):
        raise TargetOutOfRange(
            f"target {target!r} is outside the support range "
            f"({vmin!r}, {vmax!r}) of the payoff"
        )

    def tilted_mean(s: float) -> float:
        a = -s * vs
        a = a - a.max()
        w = probs * np.exp(a)
        return float(w @ vs / w.sum())

    def h(s: float) -> float:
        return tilted_mean(s) - target

    direction = 1.0 if target < e0 else -1.0
    a, b = grow_bracket(h, 0.0, 1.0, direction)
    s_root = bisect_root(h, a, b, xtol=1e-14)
    a_fin = -s_root * vs
    a_fin = a_fin - a_fin.max()
    w = np.zeros_like(q0.probs)
    w[sup] = probs * np.exp(a_fin)
    tilt = Dist(q0.space, w / w.sum())
    return tilt, float(1.0 / s_root)


# ---------------------------------------------------------------------------
# the shrinkage estimator as a weighted aggregate
# ---------------------------------------------------------------------------

def james_stein_wle(
    signals: Sequence[float], weights: Optional[Sequence[float]] = None
) -> float:
    """Weighted aggregate of one own signal s0 and n advisor signals.

    With explicit weights (must sum to 1) this is the plain weighted sum.
    With the preset, the shrinkage factor B = (n-3)/sum_{i>=1}(s_i - sbar)^2
    uses the quirky grand mean sbar = (1/n) sum_{i=0}^n s_i (note the 1/n
    against n+1 signals — the aggregate identity requires exactly this),
    and the estimate is sbar + (1 - B)(s0 - sbar). The preset needs at
    least three advisors; at exactly three, B = 0 and the estimate is s0.
    """
    s = np.asarray([float(x) for x in signals], dtype=float)
    if s.size < 1:
        raise InputError("at least one signal (the own signal s0) is required")
    if not np.all(np.isfinite(s)):
        raise InputError("signals must be finite")

    if weights is not None:
        w = np.asarray([float(x) for x in weights], dtype=float)
        if w.shape != s.shape:
            raise DimensionMismatch(
                f"{s.size} signals but {w.size} weights"
            )
        if not np.all(np.isfinite(w)):
            raise InputError("weights must be finite")
        if abs(w.sum() - 1.0) > 1e-8:
            raise WeightSumError(
                f"explicit weights must sum to 1, got {w.sum()!r}"
            )
        return float(w @ s)

    n = s.size - 1
    if n < 3:
        raise TooFewSignals(
            f"the shrinkage preset needs at least 3 advisors, got {n}"
        )
    sbar = float(s.sum()) / n
    ss = float(np.sum((s[1:] - sbar) ** 2))
    if n == 3:
        b = 0.0
    elif ss == 0.0:
        raise InputError(
            "advisor signals are identical: the shrinkage factor is undefined"
        )
    else:
        b = (n - 3) / ss
    return float(sbar + (1.0 - b) * (s[0] - sbar))


# ---------------------------------------------------------------------------
# demonstration reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InvarianceReport:
    """Mixture invariance of the worst case over a finite belief family:
    sampling the hull never beats the worst generator."""

    max_gap: float
    passes: bool
    minimizer_is_generator: bool
    generator_value: float
    samples: int


def demo_invariance(
    u0,
    beliefs: Sequence[Dist],
    lam: float,
    samples: int = 1000,
    seed: int = 0,
    tol: float = 1e-8,
) -> InvarianceReport:
    """Check that hull mixtures of the beliefs never lower the worst-case
    value below the worst generator.

    Draws ``samples`` Dirichlet mixtures of the beliefs, evaluates the
    criterion at each, and reports the largest positive shortfall against
    the generator minimum (zero when no mixture undercuts it).
    """
    beliefs = list(beliefs)
    if not beliefs:
        raise InputError("demo_invariance needs at least one belief")
    from .simplex import _check_shared_space

    _check_shared_space(*beliefs)
    if samples < 0:
        raise InputError(f"samples must be nonnegative, got {samples!r}")
    gen_values = [multiplier_value(u0, p, lam) for p in beliefs]
    v_gen = min(gen_values)

    P = np.vstack([p.probs for p in beliefs])
    vals0 = _state_values(u0, beliefs[0].space, "u0")
    rng = np.random.default_rng(seed)
    if samples > 0:
        W = rng.dirichlet(np.ones(len(beliefs)), size=samples)
        hull = W @ P
        lam_f = float(lam)
        if math.isinf(lam_f):
            sampled = hull @ vals0
        else:
            m = float(vals0.min())
            e = np.exp(-(vals0 - m) / lam_f)
            ex = hull @ e
            sampled = m - lam_f * np.log(ex)
        v_sampled = float(sampled.min())
    else:
        v_sampled = math.inf
    max_gap = max(0.0, v_gen - v_sampled)
    return InvarianceReport(
        max_gap=float(max_gap),
        passes=max_gap <= tol,
        minimizer_is_generator=v_sampled >= v_gen - 1e-12,
        generator_value=float(v_gen),
        samples=int(samples),
    )


@dataclass(frozen=True)
class DictatorReport:
    """Selection of the welfare-dominant belief with a counterfactual panel
    of monotone acts: the selected row weakly dominates every other."""

    selected_index: int
    selected_name: str
    values: np.ndarray  # (candidates, acts)
    act_utilities: np.ndarray  # (acts, states), nondecreasing rows
    dominance_ok: bool


def demo_dictator(
    candidates: Sequence[Dist],
    lam: float = 1.0,
    n_acts: int = 20,
    seed: int = 0,
    names: Optional[Sequence[str]] = None,
) -> DictatorReport:
    """Run the dominant-belief selection and audit it on random monotone acts.

    The audit draws ``n_acts`` utility vectors, sorts each to be
    nondecreasing in the state order (a monotone common-taste act), and
    tabulates the criterion at every candidate: the selected candidate's
    row must weakly dominate all others, which is exactly what tail
    dominance promises for monotone payoffs.
    """
    candidates = list(candidates)
    selected = welfare_dominant_belief(candidates)
    idx = next(i for i, c in enumerate(candidates) if c is selected)
    if names is not None:
        names = list(names)
        if len(names) != len(candidates):
            raise DimensionMismatch(
                f"{len(candidates)} candidates but {len(names)} names"
            )
        sel_name = str(names[idx])
    else:
        sel_name = f"candidate-{idx}"
    if n_acts < 1:
        raise InputError(f"n_acts must be positive, got {n_acts!r}")

    S = len(candidates[0].space)
    rng = np.random.default_rng(seed)
    acts = np.sort(rng.uniform(0.0, 1.0, size=(int(n_acts), S)), axis=1)
    values = np.empty((len(candidates), int(n_acts)))
    for i, cand in enumerate(candidates):
        for k in range(int(n_acts)):
            values[i, k] = multiplier_value(acts[k], cand, lam)
    dominance_ok = bool(np.all(values[idx] >= values - 1e-10))
    values.setflags(write=False)
    acts.setflags(write=False)
    return DictatorReport(
        selected_index=idx,
        selected_name=sel_name,
        values=values,
        act_utilities=acts,
        dominance_ok=dominance_ok,
    )


# ---------------------------------------------------------------------------
# scenario files
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioFile:
    """A parsed and validated scenario document.

    Sections beyond ``version`` and ``command`` are optional; commands
    validate that the sections they need are present. ``profile`` is built
    whenever agents are declared, and ``structured`` whenever the planner
    block requests a belief set.
    """

    version: str
    command: str
    states: Optional[StateSpace]
    outcomes: tuple[str, ...]
    profile: Optional[Profile]
    lam: float
    gamma: float
    penalty: str
    structured: Optional[StructuredSet]
    command_params: dict


def _schema_require(cond: bool, msg: str) -> None:
    if not cond:
        raise SchemaError(msg)


def _parse_lambda(raw) -> float:
    if isinstance(raw, str):
        _schema_require(
            raw in ("inf", "Infinity"), f"lambda string must be 'inf', got {raw!r}"
        )
        return math.inf
    _schema_require(
        isinstance(raw, (int, float)) and not isinstance(raw, bool),
        f"lambda must be a number or 'inf', got {raw!r}",
    )
    lam = float(raw)
    _schema_require(lam > 0.0, f"lambda must be positive, got {lam!r}")
    return lam


def load_scenario(path: str) -> ScenarioFile:
    """Read, schema-check, and cross-validate a scenario JSON document."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"scenario file is not valid JSON: {exc}") from exc

    _schema_require(isinstance(doc, dict), "scenario document must be an object")
    _schema_require(
        doc.get("version") == SCENARIO_VERSION,
        f"scenario version must be {SCENARIO_VERSION!r}, got "
        f"{doc.get('version')!r}",
    )
    command = doc.get("command")
    _schema_require(
        command in COMMANDS,
        f"command must be one of {', '.join(COMMANDS)}; got {command!r}",
    )

    states = None
    if "states" in doc:
        raw_states = doc["states"]
        _schema_require(
            isinstance(raw_states, list) and raw_states
            and all(isinstance(s, str) for s in raw_states),
            "states must be a nonempty array of strings",
        )
        states = StateSpace(tuple(raw_states))

    outcomes: tuple[str, ...] = ()
    if "outcomes" in doc:
        raw_out = doc["outcomes"]
        _schema_require(
            isinstance(raw_out, list) and raw_out
            and all(isinstance(o, str) for o in raw_out),
            "outcomes must be a nonempty array of strings",
        )
        _schema_require(
            len(set(raw_out)) == len(raw_out), "outcomes must be unique"
        )
        outcomes = tuple(raw_out)

    agents: list[Agent] = []
    if "agents" in doc:
        _schema_require(states is not None, "agents need a states array")
        _schema_require(outcomes != (), "agents need an outcomes array")
        raw_agents = doc["agents"]
        _schema_require(
            isinstance(raw_agents, list) and raw_agents,
            "agents must be a nonempty array",
        )
        for a in raw_agents:
            _schema_require(isinstance(a, dict), "each agent must be an object")
            for key in ("name", "utility", "reference", "radius"):
                _schema_require(key in a, f"agent is missing {key!r}")
            _schema_require(
                isinstance(a["utility"], dict), "agent utility must be a map"
            )
            _schema_require(
                set(a["utility"].keys()) == set(outcomes),
                f"agent {a['name']!r} utility keys must match the declared "
                "outcomes",
            )
            agents.append(
                Agent(
                    name=str(a["name"]),
                    utility={str(k): float(v) for k, v in a["utility"].items()},
                    reference=Dist(states, a["reference"]),
                    radius=float(a["radius"]),
                )
            )

    acts: dict[str, tuple[str, ...]] = {}
    if "acts" in doc:
        _schema_require(states is not None, "acts need a states array")
        raw_acts = doc["acts"]
        _schema_require(isinstance(raw_acts, dict), "acts must be a map")
        for act_id, vec in raw_acts.items():
            _schema_require(
                isinstance(vec, list) and len(vec) == len(states),
                f"act {act_id!r} must list one outcome per state",
            )
            for o in vec:
                _schema_require(
                    o in outcomes,
                    f"act {act_id!r} references undeclared outcome {o!r}",
                )
            acts[str(act_id)] = tuple(str(o) for o in vec)

    lam = 1.0
    gamma = 0.0
    penalty = "kl"
    structured: Optional[StructuredSet] = None
    beta: Optional[list[float]] = None
    if "planner" in doc:
        planner = doc["planner"]
        _schema_require(isinstance(planner, dict), "planner must be an object")
        if "lambda" in planner:
            lam = _parse_lambda(planner["lambda"])
        if "gamma" in planner:
            _schema_require(
                isinstance(planner["gamma"], (int, float)),
                "gamma must be a number",
            )
            gamma = float(planner["gamma"])
        if "penalty" in planner:
            _schema_require(
                planner["penalty"] in ("kl", "chi2"),
                f"penalty must be 'kl' or 'chi2', got {planner['penalty']!r}",
            )
            penalty = str(planner["penalty"])
        if "beta" in planner:
            _schema_require(
                isinstance(planner["beta"], list),
                "planner beta must be an array",
            )
            beta = [float(b) for b in planner["beta"]]

    profile: Optional[Profile] = None
    if agents:
        if beta is None:
            beta = [1.0 / len(agents)] * len(agents)
        profile = Profile(agents=agents, acts=acts, beta=beta, gamma=gamma)

    if "planner" in doc and "structured" in doc["planner"]:
        spec = doc["planner"]["structured"]
        _schema_require(isinstance(spec, dict), "structured must be an object")
        kind = spec.get("kind")
        _schema_require(
            kind in ("singleton", "finite", "hull", "balls"),
            f"structured kind must be singleton/finite/hull/balls, got {kind!r}",
        )
        if kind == "singleton":
            _schema_require(states is not None, "singleton needs states")
            _schema_require("belief" in spec, "singleton needs a belief array")
            structured = Singleton(Dist(states, spec["belief"]))
        elif kind in ("finite", "hull"):
            if "members" in spec:
                _schema_require(states is not None, "members need states")
                members = [Dist(states, mem) for mem in spec["members"]]
            else:
                _schema_require(
                    bool(agents), f"{kind} without members needs agents"
                )
                members = [a.reference for a in agents]
            structured = (
                FiniteSet(members) if kind == "finite" else HullOfFinite(members)
            )
        else:  # balls
            _schema_require(bool(agents), "balls structured set needs agents")
            structured = BallIntersection([a.ball() for a in agents])

    params = doc.get("command_params", {})
    _schema_require(isinstance(params, dict), "command_params must be a map")

    return ScenarioFile(
        version=SCENARIO_VERSION,
        command=str(command),
        states=states,
        outcomes=outcomes,
        profile=profile,
        lam=lam,
        gamma=gamma,
        penalty=penalty,
        structured=structured,
        command_params=dict(params),
    )
