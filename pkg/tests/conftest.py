"""Shared builders and brute-force oracles for the test suite.

Everything in this file is intentionally primitive: dense simplex
lattices with local refinement, literal formula transcriptions, and
constructive instance generators. The point is that none of it shares
code with the solvers under test, so agreement between the two is
evidence rather than tautology.
"""
from __future__ import annotations

import numpy as np

from robagg import Dist, StateSpace

# A single master seed namespace so test modules can derive their own
# deterministic streams without colliding.
SEED0 = 20240811


def make_space(n: int) -> StateSpace:
    return StateSpace(tuple(f"s{i}" for i in range(n)))


def rand_dist(rng: np.random.Generator, space: StateSpace, floor: float = 0.0) -> Dist:
    """A Dirichlet draw, optionally floored away from the boundary."""
    raw = rng.dirichlet(np.ones(len(space)))
    if floor > 0.0:
        raw = np.maximum(raw, floor)
    return Dist(space, raw / raw.sum())


def fosd_chain(rng: np.random.Generator, space: StateSpace, m: int) -> list[Dist]:
    """m beliefs totally ordered by first-order dominance (ascending).

    Built by repeatedly moving probability mass from a lower-indexed state
    to a higher-indexed one, which can only push upper-tail sums up.
    """
    n = len(space)
    base = rng.dirichlet(np.ones(n))
    base = np.maximum(base, 0.02)
    base = base / base.sum()
    chain = [base.copy()]
    for _ in range(m - 1):
        nxt = chain[-1].copy()
        lo = int(rng.integers(0, n - 1))
        hi = int(rng.integers(lo + 1, n))
        shift = 0.5 * nxt[lo] * float(rng.uniform(0.3, 0.9))
        nxt[lo] -= shift
        nxt[hi] += shift
        chain.append(nxt)
    return [Dist(space, c) for c in chain]


# ---------------------------------------------------------------------------
# dense simplex grids with local refinement
# ---------------------------------------------------------------------------

def simplex_grid(S: int, step: float) -> np.ndarray:
    """Every lattice point with spacing ``step`` on the (S-1)-simplex."""
    k = int(round(1.0 / step))
    if S == 2:
        a = np.arange(k + 1, dtype=float) / k
        return np.column_stack([a, 1.0 - a])
    if S == 3:
        i, j = np.meshgrid(np.arange(k + 1), np.arange(k + 1), indexing="ij")
        i = i.ravel()
        j = j.ravel()
        keep = i + j <= k
        i, j = i[keep], j[keep]
        return np.column_stack([i, j, k - i - j]).astype(float) / k
    raise ValueError("dense lattices are enumerated for 2 or 3 states only")


def _window_grid(center: np.ndarray, step: float, halfwidth: float) -> np.ndarray:
    """Lattice points of spacing ``step`` within a box around ``center``."""
    S = center.size
    axes = [
        np.arange(c - halfwidth, c + halfwidth + 0.5 * step, step)
        for c in center[: S - 1]
    ]
    if S == 2:
        first = axes[0][:, None]
    else:
        mesh = np.meshgrid(*axes, indexing="ij")
        first = np.column_stack([m.ravel() for m in mesh])
    last = 1.0 - first.sum(axis=1)
    pts = np.column_stack([first, last])
    keep = np.all(pts >= 0.0, axis=1) & np.all(pts <= 1.0, axis=1)
    return pts[keep]


def _grid_best(pts, objective, feasible):
    vals = np.asarray(objective(pts), dtype=float)
    if feasible is not None:
        mask = np.asarray(feasible(pts), dtype=bool)
        vals = np.where(mask, vals, np.inf)
    idx = int(np.argmin(vals))
    if not np.isfinite(vals[idx]):
        raise AssertionError("no feasible grid point: bad oracle instance")
    return pts[idx].copy()


def zoom_argmin(
    objective,
    S: int,
    feasible=None,
    step0: float = 1e-3,
    shrink: int = 5,
    levels: int = 4,
) -> np.ndarray:
    """Grid argmin with local refinement.

    ``objective`` maps an (m, S) array of simplex rows to (m,) values and
    ``feasible`` (optional) to an (m,) boolean mask. The search starts on
    the full step0 lattice and zooms into a window around the incumbent,
    finishing at resolution step0 / shrink**levels. The incumbent is kept
    in every candidate set, so the refinement can only improve.
    """
    best = _grid_best(simplex_grid(S, step0), objective, feasible)
    step = step0
    for _ in range(levels):
        window = 3.0 * step
        step /= shrink
        pts = np.vstack([_window_grid(best, step, window), best[None, :]])
        best = _grid_best(pts, objective, feasible)
    return best


def kl_matrix(P: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """D(P_i || q) for every full-support row of P against every grid row.

    Rows of ``pts`` touching the boundary get +inf (absolute continuity
    fails there for full-support centers).
    """
    P = np.atleast_2d(P)
    if np.any(P <= 0.0):
        raise AssertionError("kl_matrix expects full-support centers")
    pos = np.all(pts > 0.0, axis=1)
    out = np.full((P.shape[0], pts.shape[0]), np.inf)
    if np.any(pos):
        ent = np.sum(P * np.log(P), axis=1)
        out[:, pos] = ent[:, None] - P @ np.log(pts[pos]).T
    return out


# ---------------------------------------------------------------------------
# constructive feasible instances
# ---------------------------------------------------------------------------

def feasible_ball_instance(
    rng: np.random.Generator,
    space: StateSpace,
    n_balls: int,
    slack: float = 0.3,
    pad: float = 0.01,
):
    """Centers plus radii that provably intersect: a random anchor is
    placed inside every ball by construction. Returns (centers, radii,
    anchor) with full-support centers."""
    anchor = rand_dist(rng, space, floor=0.05)
    centers = [rand_dist(rng, space, floor=0.05) for _ in range(n_balls)]
    radii = []
    A = anchor.probs
    for c in centers:
        p = c.probs
        d = float(np.sum(p * np.log(p / A)))
        radii.append(d * (1.0 + slack) + pad)
    return centers, radii, anchor
