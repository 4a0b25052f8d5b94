"""Shared numerical machinery.

Everything here is hand-rolled on purpose: the package's results live or die
on these routines, so they are small, deterministic, and derivative-cheap —
sorted-cumsum simplex projection, projected gradient with Armijo
backtracking, golden-section search, sign-change bisection with geometric
bracket growth (capped at 60 doublings), a log-sum-exp smoothed minimax
engine over convex hulls with an equalization Newton polish, and an
augmented Lagrangian loop for divergence-ball constrained programs with a
KKT Newton polish.

No randomness anywhere: restarts are fixed (vertices + barycenter) and all
tie-breaks are by value then lexicographic weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import NoConvergence, NoRoot, SolverDiverged
from .tolerances import SOLVER_TOL

Array = np.ndarray
ValueGrad = Callable[[Array], tuple[float, Array]]


# ---------------------------------------------------------------------------
# simplex projection
# ---------------------------------------------------------------------------

def project_to_simplex(v: Array) -> Array:
    """Euclidean projection onto {x >= 0, sum x = 1}.

    Sorted cumulative-sum method: find the largest k with
    u_k - (sum_{j<=k} u_j - 1)/k > 0 for the decreasing rearrangement u,
    then clip at that threshold. Shifting v along the all-ones direction
    leaves the projection unchanged, so the maximum is subtracted first:
    that pins u_1 at 0 and keeps the pivot arithmetic at unit scale even
    when a gradient step has blown some coordinates up to ~1e150 (where
    u_k - css/k would otherwise cancel to 0 and leave no valid pivot).
    """
    v = np.asarray(v, dtype=float)
    v = v - v.max()
    n = v.size
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, n + 1)
    cond = u - css / ks > 0.0
    k = int(ks[cond][-1])
    tau = css[cond][-1] / k
    out = np.clip(v - tau, 0.0, None)
    s = out.sum()
    if s <= 0.0:  # cannot happen for finite input, but stay safe
        return np.full(n, 1.0 / n)
    return out / s


# ---------------------------------------------------------------------------
# projected gradient with Armijo backtracking
# ---------------------------------------------------------------------------

@dataclass
class PGResult:
    x: Array
    value: float
    residual: float
    iterations: int


def projected_gradient(
    value_grad: ValueGrad,
    x0: Array,
    *,
    max_iter: int = 2000,
    tol: float = 1e-12,
    step0: float = 1.0,
) -> PGResult:
    """Minimize a smooth function over the probability simplex.

    ``value_grad`` may return +inf near the boundary (log barriers do);
    backtracking simply rejects such steps. The convergence measure is the
    unit-step projected-gradient residual ||P(x - g) - x||_inf.
    """
    x = project_to_simplex(np.asarray(x0, dtype=float))
    f, g = value_grad(x)
    if not math.isfinite(f):
        center = np.full_like(x, 1.0 / x.size)
        for blend in (1e-3, 1e-2, 0.1, 0.5, 1.0):
            cand = (1.0 - blend) * x + blend * center
            f, g = value_grad(cand)
            if math.isfinite(f):
                x = cand
                break
        else:
            raise SolverDiverged("objective is not finite near the start point")

    step = step0
    res = math.inf
    it = 0
    for it in range(1, max_iter + 1):
        res = float(np.max(np.abs(project_to_simplex(x - g) - x)))
        if res <= tol:
            break
        y = project_to_simplex(x - step * g)
        d = y - x
        gd = float(g @ d)
        accepted = False
        for _ in range(60):
            fy, gy = value_grad(y)
            if math.isfinite(fy) and fy <= f + 1e-4 * gd + 1e-15 * (1.0 + abs(f)):
                x, f, g = y, fy, gy
                accepted = True
                step = min(step * 2.0, 1e10)
                break
            step *= 0.5
            y = project_to_simplex(x - step * g)
            d = y - x
            gd = float(g @ d)
        if not accepted:
            break  # stalled at floating-point resolution
    if np.any(~np.isfinite(x)):
        raise SolverDiverged("iterates left the simplex (non-finite weights)")
    return PGResult(x=x, value=f, residual=res, iterations=it)


# ---------------------------------------------------------------------------
# 1-d searches
# ---------------------------------------------------------------------------

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_max(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    tol: float = 1e-12,
    max_iter: int = 400,
) -> tuple[float, float]:
    """Maximize a unimodal function on [lo, hi]; returns (argmax, max).

    -inf values are allowed (they just push the search away), which lets
    callers use hard domain walls instead of penalty terms.
    """
    a, b = float(lo), float(hi)
    if not b > a:
        return a, f(a)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if (b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    if fc >= fd:
        return c, fc
    return d, fd


def grow_bracket(
    f: Callable[[float], float],
    x0: float,
    first_step: float,
    direction: float,
    *,
    max_doublings: int = 60,
) -> tuple[float, float]:
    """Walk geometrically from x0 until f changes sign; return the bracket.

    Raises NoRoot if no sign change shows up within the doubling cap.
    """
    f0 = f(x0)
    if f0 == 0.0:
        return x0, x0
    step = abs(first_step) * (1.0 if direction >= 0 else -1.0)
    prev = x0
    for _ in range(max_doublings):
        nxt = x0 + step
        fn = f(nxt)
        if fn == 0.0:
            return nxt, nxt
        if (fn > 0.0) != (f0 > 0.0):
            return (prev, nxt) if prev < nxt else (nxt, prev)
        prev = nxt
        step *= 2.0
    raise NoRoot("no sign change within the expanded bracket")


def bisect_root(
    f: Callable[[float], float],
    a: float,
    b: float,
    *,
    xtol: float = 1e-14,
    max_iter: int = 200,
) -> float:
    """Plain bisection for a sign-changing f on [a, b]."""
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        raise NoRoot(f"no sign change on [{a!r}, {b!r}]")
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0 or (b - a) <= xtol * (1.0 + abs(m)):
            return m
        if (fm > 0.0) == (fa > 0.0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return 0.5 * (a + b)


# ---------------------------------------------------------------------------
# minimax over the convex hull of reference points
# ---------------------------------------------------------------------------

@dataclass
class MinimaxResult:
    """Outcome of min over hull weights w of max_i [D_i(q(w)) - offset_i]."""

    weights: Array
    point: Array
    value: float
    sigma: Array = field(default_factory=lambda: np.zeros(0))
    polished: bool = False


def _lex_better(a: Array, b: Array) -> bool:
    """True if a precedes b lexicographically (deterministic tie-break)."""
    for x, y in zip(a, b):
        if x < y - 1e-15:
            return True
        if x > y + 1e-15:
            return False
    return False


def minimize_max_over_hull(
    P: Array,
    offsets: Array,
    div_value: Callable[[int, Array], float],
    div_grad_q: Callable[[int, Array], Array],
    *,
    extra_starts: Sequence[Array] = (),
    polish: bool = True,
    thorough: bool = True,
    batch_values: Optional[Callable[[Array], Array]] = None,
    sigma_grad: Optional[Callable[[Array, Array], Array]] = None,
) -> MinimaxResult:
    """Minimize Phi(w) = max_i [D(p_i || q(w)) - offset_i] over hull weights.

    P is the (m, S) matrix of reference points (hull generators); q(w) = w P.
    Phi is convex in w (each D(p_i || .) is convex and q(w) is linear), so
    restarts guard against projected-gradient stalls, not local minima: the
    sweep from every vertex plus the barycenter runs only at the coarsest
    log-sum-exp smoothing, the few distinct survivors are annealed down the
    tau ladder, and an equalization Newton polish on the detected active set
    takes the winner to machine precision when the divergence is smooth at
    the optimum. ``thorough=False`` skips the coarse sweep and anneals
    straight from ``extra_starts`` (or the barycenter) -- for warm repeat
    solves over the same hull, where the previous optimum is already in
    hand; it falls back to the thorough route if that goes nowhere.
    ``batch_values(q)`` / ``sigma_grad(sig, q)`` optionally replace the
    per-index callables in the hot loop with vectorized equivalents.
    """
    P = np.asarray(P, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    m = P.shape[0]

    if batch_values is not None:
        def raw_values(q: Array) -> Array:
            return batch_values(q) - offsets
    else:
        def raw_values(q: Array) -> Array:
            return np.array([div_value(i, q) for i in range(m)]) - offsets

    def smoothed(tau: float) -> ValueGrad:
        def vg(w: Array) -> tuple[float, Array]:
            q = w @ P
            vals = raw_values(q)
            if not np.all(np.isfinite(vals)):
                return math.inf, np.zeros(m)
            vmax = float(vals.max())
            z = np.exp((vals - vmax) / tau)
            ssum = float(z.sum())
            sig = z / ssum
            if sigma_grad is not None:
                gq = sigma_grad(sig, q)
            else:
                gq = np.zeros(P.shape[1])
                for i in np.nonzero(sig > 1e-12)[0]:
                    gq += sig[i] * div_grad_q(i, q)
            # q = w P, so the chain rule back to weight space is P (not P^T)
            return vmax + tau * math.log(ssum), P @ gq
        return vg

    # Warm repeat solve: when the caller hands over the optimum of a sibling
    # problem (same hull, offsets shifted by a constant, hence the same
    # argmin), the equalization polish alone finishes the job; fall through
    # to the smoothed stages only if it declines or fails to improve.
    if not thorough and polish and len(extra_starts):
        w = project_to_simplex(np.asarray(extra_starts[0], dtype=float))
        q = w @ P
        vals = raw_values(q)
        if np.all(np.isfinite(vals)):
            t = float(vals.max())
            z = np.exp(np.clip((vals - t) / 1e-6, -700.0, 0.0))
            warm = MinimaxResult(
                weights=w, point=q, value=t, sigma=z / z.sum()
            )
            polished = _equalization_polish(
                P, offsets, div_value, div_grad_q, warm
            )
            if polished is not None and polished.value <= t + 1e-12:
                return polished

    if thorough:
        starts: list[Array] = []
        for s in extra_starts:
            starts.append(np.asarray(s, dtype=float))
        starts.append(np.full(m, 1.0 / m))  # barycenter
        for i in range(m):
            v = np.full(m, 1e-6 / max(m - 1, 1))
            v[i] = 1.0 - 1e-6  # near-vertex (exact ones can strand KL at +inf)
            starts.append(v)

        # --- stage 1: coarse sweep ---------------------------------------
        tau0 = 1e-1
        coarse: list[tuple[float, Array]] = []
        for w0 in starts:
            w = project_to_simplex(w0)
            try:
                res = projected_gradient(
                    smoothed(tau0), w, max_iter=60, tol=1e-5
                )
            except SolverDiverged:
                continue
            if math.isfinite(res.value):
                coarse.append((float(res.value), res.x))
        if not coarse:
            raise SolverDiverged("minimax stage found no finite-valued point")

        # Distinct survivors only: iterates that met at the same smoothed
        # point would anneal identically, so keep one representative per
        # cluster (best value first, capped at the coarse smoothing gap
        # tau0 * log m above the leader, which is as much as the bias can
        # hide).
        coarse.sort(key=lambda sv: sv[0])
        window = tau0 * (math.log(max(m, 2)) + 1.0)
        survivors: list[Array] = []
        for v, w in coarse:
            if v > coarse[0][0] + window or len(survivors) >= 3:
                break
            if all(float(np.max(np.abs(w - u))) > 1e-4 for u in survivors):
                survivors.append(w)
        taus = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    else:
        survivors = [
            project_to_simplex(np.asarray(s, dtype=float))
            for s in extra_starts
        ] or [np.full(m, 1.0 / m)]
        taus = (1e-3, 1e-4, 1e-5, 1e-6)

    # --- stage 2: anneal each survivor, keep the best --------------------
    best: Optional[MinimaxResult] = None
    for w0 in survivors:
        w = w0
        try:
            for tau in taus:
                res = projected_gradient(
                    smoothed(tau), w, max_iter=120, tol=max(tau * 1e-3, 1e-12)
                )
                w = res.x
        except SolverDiverged:
            continue
        q = w @ P
        vals = raw_values(q)
        if not np.all(np.isfinite(vals)):
            continue
        t = float(vals.max())
        spread = (vals - t) / max(taus[-1], 1e-12)
        z = np.exp(np.clip(spread, -700.0, 0.0))
        sigma = z / z.sum()
        cand = MinimaxResult(weights=w, point=q, value=t, sigma=sigma)
        if (
            best is None
            or cand.value < best.value - 1e-12
            or (abs(cand.value - best.value) <= 1e-12
                and _lex_better(cand.weights, best.weights))
        ):
            best = cand

    if best is None:
        if not thorough:
            return minimize_max_over_hull(
                P, offsets, div_value, div_grad_q,
                polish=polish, thorough=True,
                batch_values=batch_values, sigma_grad=sigma_grad,
            )
        raise SolverDiverged("minimax stage found no finite-valued point")

    if polish:
        polished = _equalization_polish(
            P, offsets, div_value, div_grad_q, best
        )
        if polished is not None:
            best = polished
    return best


def _equalization_polish(
    P: Array,
    offsets: Array,
    div_value: Callable[[int, Array], float],
    div_grad_q: Callable[[int, Array], Array],
    start: MinimaxResult,
) -> Optional[MinimaxResult]:
    """Newton-solve the active-set equalization conditions of the minimax.

    At the optimum the active gaps D_i(q) - offset_i share a common value t
    and q is the sigma-mixture of the active generators. Solve
        D_i(q(sigma)) - offset_i - t = 0  (i active),  sum sigma = 1
    for (sigma, t), adjusting the active set when a sign condition fails.
    Returns None when no consistent active set is found; the caller then
    keeps the smoothed-stage answer.
    """
    m = P.shape[0]
    vals0 = np.array([div_value(i, start.point) for i in range(m)]) - offsets
    t0 = float(vals0.max())
    active = [
        i for i in range(m)
        if start.sigma[i] > 1e-3 or vals0[i] >= t0 - 1e-5 * (1.0 + abs(t0))
    ]
    if not active:
        return None

    for _ in range(2 * m + 4):
        k = len(active)
        Psub = P[active]
        sigma = np.full(k, 1.0 / k)
        warm = start.weights[active]
        if warm.sum() > 1e-9:
            sigma = warm / warm.sum()
        t = t0
        ok = True
        for _ in range(60):
            q = sigma @ Psub
            if np.any(q <= 0.0) and any(
                not math.isfinite(div_value(i, q)) for i in active
            ):
                ok = False
                break
            gaps = np.array([div_value(i, q) for i in active]) - offsets[active]
            resid = np.concatenate([gaps - t, [sigma.sum() - 1.0]])
            if float(np.max(np.abs(resid))) <= 1e-13 * (1.0 + abs(t)):
                break
            J = np.zeros((k + 1, k + 1))
            for row, i in enumerate(active):
                gq = div_grad_q(i, q)
                J[row, :k] = Psub @ gq
                J[row, k] = -1.0
            J[k, :k] = 1.0
            try:
                delta = np.linalg.solve(J, -resid)
            except np.linalg.LinAlgError:
                ok = False
                break
            alpha = 1.0
            base = float(np.max(np.abs(resid)))
            for _ in range(40):
                s_new = sigma + alpha * delta[:k]
                t_new = t + alpha * delta[k]
                q_new = s_new @ Psub
                if np.all(np.isfinite(q_new)):
                    gaps_new = np.array(
                        [div_value(i, q_new) for i in active]
                    ) - offsets[active]
                    if np.all(np.isfinite(gaps_new)):
                        r_new = float(
                            np.max(np.abs(np.concatenate(
                                [gaps_new - t_new, [s_new.sum() - 1.0]]
                            )))
                        )
                        if r_new <= (1.0 - 0.3 * alpha) * base + 1e-15:
                            sigma, t = s_new, t_new
                            break
                alpha *= 0.5
            else:
                ok = False
                break
        if not ok:
            return None

        # sign conditions: mixture weights nonnegative, inactive gaps below t
        if np.any(sigma < -1e-9):
            drop = active[int(np.argmin(sigma))]
            if len(active) == 1:
                return None
            active = [i for i in active if i != drop]
            continue
        q = np.clip(sigma, 0.0, None) @ Psub
        q = q / q.sum()
        others = [i for i in range(m) if i not in active]
        viol = None
        for i in others:
            gap = div_value(i, q) - offsets[i]
            if gap > t + 1e-9 * (1.0 + abs(t)):
                viol = i
                break
        if viol is not None:
            active = sorted(active + [viol])
            continue
        w = np.zeros(m)
        for idx, i in enumerate(active):
            w[i] = max(sigma[idx], 0.0)
        w = w / w.sum()
        sig_full = np.zeros(m)
        for idx, i in enumerate(active):
            sig_full[i] = max(sigma[idx], 0.0)
        if start.value < t - 1e-9 * (1.0 + abs(t)):
            # the smoothed stage already beat this stationary point; the
            # active-set guess must be wrong, keep the smoothed answer
            return None
        return MinimaxResult(
            weights=w, point=q, value=float(t), sigma=sig_full, polished=True
        )
    return None


# ---------------------------------------------------------------------------
# augmented Lagrangian for ball-constrained programs on the simplex
# ---------------------------------------------------------------------------

@dataclass
class ALResult:
    q: Array
    value: float
    multipliers: Array
    kkt_residual: float


def _kkt_residual(
    q: Array,
    lam: Array,
    obj_vg: ValueGrad,
    cons_vg: Sequence[ValueGrad],
) -> float:
    f, g = obj_vg(q)
    if not math.isfinite(f):
        return math.inf
    grad_L = g.astype(float).copy()
    viol = 0.0
    comp = 0.0
    for i, cvg in enumerate(cons_vg):
        gi, gradi = cvg(q)
        if not math.isfinite(gi):
            return math.inf
        grad_L += lam[i] * gradi
        viol = max(viol, gi)
        comp = max(comp, abs(lam[i] * gi))
    stat = float(np.max(np.abs(project_to_simplex(q - grad_L) - q)))
    return max(stat, max(viol, 0.0), comp)


def solve_ball_constrained(
    obj_vg: ValueGrad,
    cons_vg: Sequence[ValueGrad],
    q0: Array,
    *,
    obj_hess_diag: Optional[Callable[[Array], Array]] = None,
    cons_hess_diag: Optional[Sequence[Callable[[Array], Array]]] = None,
    max_outer: int = 40,
    target_kkt: float = 1e-10,
) -> ALResult:
    """Minimize f(q) subject to g_i(q) <= 0 and q in the simplex.

    Classic augmented Lagrangian with multiplier updates and a tenfold
    penalty escalation whenever infeasibility stalls, followed (when the
    diagonal Hessians are available, as they are for every divergence used
    here) by a primal-dual Newton polish on the detected active set.
    """
    q = project_to_simplex(np.asarray(q0, dtype=float))
    mcon = len(cons_vg)
    lam = np.zeros(mcon)
    c = 10.0
    prev_viol = math.inf
    inner_tol = 1e-4
    can_polish = obj_hess_diag is not None and cons_hess_diag is not None

    for _ in range(max_outer):
        def al_vg(qq: Array, _lam=lam.copy(), _c=c) -> tuple[float, Array]:
            f, g = obj_vg(qq)
            if not math.isfinite(f):
                return math.inf, np.zeros(qq.size)
            total = f
            grad = g.astype(float).copy()
            for i, cvg in enumerate(cons_vg):
                gi, gradi = cvg(qq)
                if not math.isfinite(gi):
                    return math.inf, np.zeros(qq.size)
                t = _lam[i] + _c * gi
                if t > 0.0:
                    total += (t * t - _lam[i] * _lam[i]) / (2.0 * _c)
                    grad += t * gradi
                else:
                    total -= _lam[i] * _lam[i] / (2.0 * _c)
            return total, grad

        res = projected_gradient(al_vg, q, max_iter=250, tol=inner_tol)
        q = res.x
        gvals = np.array([cons_vg[i](q)[0] for i in range(mcon)])
        viol = float(np.max(gvals, initial=0.0))
        lam = np.maximum(0.0, lam + c * gvals)
        # the Newton polish costs one small linear solve; once the outer
        # loop has the active set right it jumps straight to the KKT point,
        # so try it every round and accept on a full-residual pass
        if can_polish:
            polished = _kkt_newton_polish(
                q, lam, obj_vg, cons_vg, obj_hess_diag, cons_hess_diag
            )
            if polished is not None:
                q_p, lam_p = polished
                if _kkt_residual(q_p, lam_p, obj_vg, cons_vg) <= target_kkt:
                    q, lam = q_p, lam_p
                    break
        kkt = _kkt_residual(q, lam, obj_vg, cons_vg)
        if kkt <= target_kkt:
            break
        if viol > 0.25 * prev_viol:
            c = min(c * 10.0, 1e10)
        prev_viol = max(viol, 1e-300)
        # the early inner solves only steer the multipliers; precision is
        # only worth paying for once the duals have settled
        inner_tol = max(inner_tol * 0.1, 1e-12)

    if can_polish:
        polished = _kkt_newton_polish(
            q, lam, obj_vg, cons_vg, obj_hess_diag, cons_hess_diag
        )
        if polished is not None:
            q_p, lam_p = polished
            if _kkt_residual(q_p, lam_p, obj_vg, cons_vg) <= max(
                _kkt_residual(q, lam, obj_vg, cons_vg), target_kkt
            ):
                q, lam = q_p, lam_p

    kkt = _kkt_residual(q, lam, obj_vg, cons_vg)
    if not kkt <= 1e-5:
        raise NoConvergence(
            f"constrained solve stalled with KKT residual {kkt:.3e}"
        )
    return ALResult(q=q, value=obj_vg(q)[0], multipliers=lam, kkt_residual=kkt)


def _kkt_newton_polish(
    q: Array,
    lam: Array,
    obj_vg: ValueGrad,
    cons_vg: Sequence[ValueGrad],
    obj_hess_diag: Callable[[Array], Array],
    cons_hess_diag: Sequence[Callable[[Array], Array]],
) -> Optional[tuple[Array, Array]]:
    """Newton on the active-set KKT system, restricted to the support of q."""
    mcon = len(cons_vg)
    gvals = np.array([cons_vg[i](q)[0] for i in range(mcon)])
    if not np.all(np.isfinite(gvals)):
        return None
    active = [
        i for i in range(mcon) if lam[i] > 1e-8 or gvals[i] > -1e-6
    ]
    if not active:
        return None
    sup = q > 1e-12
    ns = int(np.sum(sup))
    if ns < 1:
        return None

    qw = q.copy()
    lw = lam[active].copy()
    f, g = obj_vg(qw)
    nu = -float(np.mean(g[sup]))

    for _ in range(25):
        f, g = obj_vg(qw)
        cons_g = []
        cons_grad = []
        for i in active:
            gi, gradi = cons_vg[i](qw)
            cons_g.append(gi)
            cons_grad.append(gradi)
        if not (math.isfinite(f) and all(math.isfinite(x) for x in cons_g)):
            return None
        grad_L = g.copy()
        for j, i in enumerate(active):
            grad_L += lw[j] * cons_grad[j]
        r_stat = grad_L[sup] + nu
        r_feas = np.array(cons_g)
        r_norm = qw.sum() - 1.0
        resid = np.concatenate([r_stat, r_feas, [r_norm]])
        if float(np.max(np.abs(resid))) <= 1e-13:
            break
        H = obj_hess_diag(qw)[sup].copy()
        for j, i in enumerate(active):
            H = H + lw[j] * cons_hess_diag[i](qw)[sup]
        k = len(active)
        n = ns + k + 1
        J = np.zeros((n, n))
        J[:ns, :ns] = np.diag(H)
        for j in range(k):
            J[:ns, ns + j] = cons_grad[j][sup]
            J[ns + j, :ns] = cons_grad[j][sup]
        J[:ns, ns + k] = 1.0
        J[ns + k, :ns] = 1.0
        try:
            delta = np.linalg.solve(J, -resid)
        except np.linalg.LinAlgError:
            return None
        base = float(np.max(np.abs(resid)))
        alpha = 1.0
        stepped = False
        for _ in range(40):
            q_new = qw.copy()
            q_new[sup] = qw[sup] + alpha * delta[:ns]
            if np.all(q_new[sup] > 0.0):
                l_new = lw + alpha * delta[ns : ns + k]
                nu_new = nu + alpha * delta[ns + k]
                fn, gn = obj_vg(q_new)
                if math.isfinite(fn):
                    gL = gn.copy()
                    feas = []
                    fin = True
                    for j, i in enumerate(active):
                        gi, gradi = cons_vg[i](q_new)
                        if not math.isfinite(gi):
                            fin = False
                            break
                        gL += l_new[j] * gradi
                        feas.append(gi)
                    if fin:
                        r_new = float(np.max(np.abs(np.concatenate([
                            gL[sup] + nu_new, feas, [q_new.sum() - 1.0]
                        ]))))
                        if r_new <= (1.0 - 0.3 * alpha) * base + 1e-15:
                            qw, lw, nu = q_new, l_new, nu_new
                            stepped = True
                            break
            alpha *= 0.5
        if not stepped:
            return None

    if np.any(lw < -1e-8):
        return None
    lam_out = np.zeros(mcon)
    for j, i in enumerate(active):
        lam_out[i] = max(lw[j], 0.0)
    for i in range(mcon):
        if i not in active:
            gi, _ = cons_vg[i](qw)
            if gi > 1e-9:
                return None
    qw = np.clip(qw, 0.0, None)
    return qw / qw.sum(), lam_out


# ---------------------------------------------------------------------------
# exact tiny QP: nonnegative simplex least squares by support enumeration
# ---------------------------------------------------------------------------

def simplex_lstsq(B: Array, target: Array) -> Array:
    """argmin_{c in simplex} || c B - target ||_2 for a small basis B (k, S).

    Exhaustive over supports: the optimum is interior to some face, where it
    solves the equality-constrained normal equations; every face is tried
    (k <= ~12 in this package, so 2^k stays tiny) and the best nonnegative
    candidate wins.
    """
    B = np.asarray(B, dtype=float)
    k = B.shape[0]
    G = B @ B.T
    h = B @ np.asarray(target, dtype=float)
    best_c: Optional[Array] = None
    best_val = math.inf
    for mask in range(1, 1 << k):
        idx = [i for i in range(k) if mask >> i & 1]
        kk = len(idx)
        KKT = np.zeros((kk + 1, kk + 1))
        KKT[:kk, :kk] = G[np.ix_(idx, idx)]
        KKT[:kk, kk] = 1.0
        KKT[kk, :kk] = 1.0
        rhs = np.concatenate([h[idx], [1.0]])
        try:
            sol = np.linalg.solve(KKT, rhs)
        except np.linalg.LinAlgError:
            continue
        c_sub = sol[:kk]
        if np.any(c_sub < -1e-12):
            continue
        c = np.zeros(k)
        c[idx] = np.clip(c_sub, 0.0, None)
        c = c / c.sum()
        val = float(np.sum((c @ B - target) ** 2))
        if val < best_val - 1e-15 or (
            abs(val - best_val) <= 1e-15
            and (best_c is None or _lex_better(c, best_c))
        ):
            best_val = val
            best_c = c
    if best_c is None:
        raise NoConvergence("no feasible face in simplex least squares")
    return best_c
