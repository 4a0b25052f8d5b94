"""Divergence families: relative entropy, chi-square, generic phi, the
rho family, and Bregman divergences from a pluggable Legendre generator.

All divergences are in nats. Absolute-continuity failures are reported as
``math.inf`` — infinity is a meaningful value here (a projection target may
simply be unreachable), never an error and never a large sentinel float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, RhoOutOfRange
from .simplex import Dist, _check_shared_space


@dataclass(frozen=True)
class PhiSpec:
    """A convex generator phi with phi(1) = 0 plus its Fenchel conjugate.

    ``conjugate`` must be the exact pointwise conjugate
    phi*(t) = sup_{x >= 0} (t x - phi(x)); the dual criterion evaluates it
    directly, so a numerically conjugated stand-in would leak error into
    every dual value.
    """

    name: str
    phi: Callable[[float], float]
    conjugate: Callable[[float], float]


def _phi_kl(t: float) -> float:
    if t < 0.0:
        raise DomainError("phi is defined on [0, inf)")
    if t == 0.0:
        return 1.0
    return t * math.log(t) - t + 1.0


def _phi_kl_conj(t: float) -> float:
    return math.exp(t) - 1.0


def _phi_chi2(t: float) -> float:
    if t < 0.0:
        raise DomainError("phi is defined on [0, inf)")
    return 0.5 * (t - 1.0) ** 2


def _phi_chi2_conj(t: float) -> float:
    # sup_{x>=0} (t x - (x-1)^2/2): interior max at x = 1 + t when t >= -1,
    # else the boundary x = 0.
    if t >= -1.0:
        return t + 0.5 * t * t
    return -0.5


KL_PHI = PhiSpec("kl", _phi_kl, _phi_kl_conj)
CHI2_PHI = PhiSpec("chi2", _phi_chi2, _phi_chi2_conj)

BUILTIN_PHI_SPECS = {"kl": KL_PHI, "chi2": CHI2_PHI}


@dataclass(frozen=True)
class BregmanGenerator:
    """A Legendre-type generator G with its gradient.

    ``grad_div_in_second`` optionally supplies the gradient of
    q |-> D_G(p || q) in closed form; when absent it is recovered from
    ``gradient`` via a Hessian-vector finite difference, since
    grad_q D_G(p || q) = H_G(q) (q - p).
    """

    name: str
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    grad_div_in_second: Optional[
        Callable[[np.ndarray, np.ndarray], np.ndarray]
    ] = None


def _neg_entropy_value(z: np.ndarray) -> float:
    pos = z > 0.0
    return float(np.sum(z[pos] * np.log(z[pos]) - z[pos]))


def _neg_entropy_grad(z: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(z)


def _neg_entropy_grad_div(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # d/dq [ G(p) - G(q) - <grad G(q), p - q> ] = 1 - p/q for this G;
    # on the q = 0 edge take the directional limit: 1 when p = 0 there
    # too, -inf when mass is stranded (the divergence itself is +inf)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = p / q
    ratio = np.where(q > 0.0, ratio, np.where(p > 0.0, math.inf, 0.0))
    return 1.0 - ratio


def _half_sqnorm_grad_div(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    return q - p


NEG_ENTROPY = BregmanGenerator(
    "negative-entropy",
    _neg_entropy_value,
    _neg_entropy_grad,
    _neg_entropy_grad_div,
)

HALF_SQNORM = BregmanGenerator(
    "half-squared-norm",
    lambda z: float(0.5 * np.dot(z, z)),
    lambda z: np.array(z, dtype=float),
    _half_sqnorm_grad_div,
)

BUILTIN_GENERATORS = {g.name: g for g in (NEG_ENTROPY, HALF_SQNORM)}


def kl(p: Dist, q: Dist) -> float:
    """Relative entropy sum_s p log(p/q); +inf if p is not << q."""
    _check_shared_space(p, q)
    pv, qv = p.values, q.values
    pos = pv > 0.0
    if np.any(qv[pos] <= 0.0):
        return math.inf
    return float(np.sum(pv[pos] * np.log(pv[pos] / qv[pos])))


def phi_divergence(spec: PhiSpec, p: Dist, q: Dist) -> float:
    """D_phi(p || q) = sum_s q(s) phi(p(s)/q(s)).

    States with q(s) = 0 contribute +inf when p(s) > 0 (the mass is
    unexplainable under q) and 0 when p(s) = 0, matching the limit of
    q phi(p/q) as q -> 0 with p = 0.
    """
    _check_shared_space(p, q)
    total = 0.0
    for ps, qs in zip(p.values, q.values):
        if qs <= 0.0:
            if ps > 0.0:
                return math.inf
            continue
        total += qs * spec.phi(ps / qs)
    return total


def rho_divergence(rho: float, p: Dist, q: Dist) -> float:
    """The order-rho divergence (1/(rho(1-rho))) E_p[1 - (q/p)^rho].

    Defined for rho strictly inside (0, 1); states with p(s) = 0
    contribute nothing. Interpolates toward relative entropy as rho -> 0
    and equals four times the squared Hellinger distance at rho = 1/2.
    """
    if not (0.0 < rho < 1.0):
        raise RhoOutOfRange(f"rho must lie in (0, 1), got {rho!r}")
    _check_shared_space(p, q)
    pv, qv = p.values, q.values
    pos = pv > 0.0
    ratio_pow = (qv[pos] / pv[pos]) ** rho
    return float(np.sum(pv[pos] * (1.0 - ratio_pow)) / (rho * (1.0 - rho)))


def bregman(G: BregmanGenerator, x: Dist, y: Dist) -> float:
    """D_G(x || y) = G(x) - G(y) - <grad G(y), x - y>.

    Raises DomainError when y sits on the generator's boundary (its
    gradient fails to be finite where x - y is nonzero).
    """
    _check_shared_space(x, y)
    xv, yv = x.values, y.values
    grad = np.asarray(G.gradient(yv), dtype=float)
    diff = xv - yv
    relevant = diff != 0.0
    if np.any(~np.isfinite(grad[relevant])):
        raise DomainError(
            f"{G.name}: gradient undefined at the second argument"
        )
    inner = float(np.sum(grad[relevant] * diff[relevant]))
    return float(G.value(xv) - G.value(yv) - inner)
