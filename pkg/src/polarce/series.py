"""Series expansions around the density-evolution engine.

Two Taylor identities link the check and variable domains::

    1/2 (1-z)^s (1+z)^(1-s) = sum_t (-1)^t / t! * A(s, t) * z^t
    (1-w)^nu (1+w)^(-nu)    = sum_t (-1)^t / t! * G(nu, t) * w^t

The coefficients are finite binomial convolutions and grow like ``t!``, so
they are computed and returned as :mod:`mpmath` numbers.

The second half of the module evaluates the Bhattacharyya parameter of a BSC
bit-channel with a leading run of variable transforms followed by a run of
check transforms as ``1 - sum_k beta_k m(k)^L``, where ``m`` are even moments
of the check-domain atoms, and cross-checks it by Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from ._numeric import Backend
from .engine import CheckState

__all__ = [
    "MAX_KAPPA",
    "MAX_TERMS",
    "MomentProvider",
    "ba_series",
    "beta_kappa",
    "beta_tail",
    "check_identity_closed_form",
    "coeff_A",
    "coeff_G",
    "expand_check_identity",
    "expand_var_identity",
    "mc_product_estimate",
    "var_identity_closed_form",
]

MAX_TERMS = 200
MAX_KAPPA = 10**4
_DPS = 40


def _binomials(x, n: int) -> list:
    """Generalised binomials ``binom(x, k)`` for ``k = 0..n``."""
    out = [mpmath.mpc(1)]
    for k in range(n):
        out.append(out[-1] * (x - k) / (k + 1))
    return out


def _check_t(t: int) -> None:
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t > MAX_TERMS:
        raise ValueError(f"t is capped at {MAX_TERMS}")


def _taylor_var(s, t: int) -> mpmath.mpc:
    """``a_t(s)``, the coefficient of ``z^t`` in ``(1-z)^s (1+z)^(1-s)``."""
    bs = _binomials(mpmath.mpc(s), t)
    bc = _binomials(1 - mpmath.mpc(s), t)
    return mpmath.fsum((-1) ** k * bs[k] * bc[t - k] for k in range(t + 1))


def _taylor_check(nu, t: int) -> mpmath.mpc:
    """``b_t(nu)``, the coefficient of ``w^t`` in ``(1-w)^nu (1+w)^(-nu)``."""
    bp = _binomials(mpmath.mpc(nu), t)
    bm = _binomials(-mpmath.mpc(nu), t)
    return mpmath.fsum((-1) ** (t - k) * bp[t - k] * bm[k] for k in range(t + 1))


def coeff_A(s, t: int) -> mpmath.mpc:
    """Coefficient ``A(s, t) = (-1)^t t! a_t(s) / 2`` of the variable-domain identity."""
    _check_t(t)
    with mpmath.workdps(_DPS):
        return (-1) ** t * mpmath.factorial(t) * _taylor_var(s, t) / 2


def coeff_G(nu, t: int) -> mpmath.mpc:
    """Coefficient ``G(nu, t) = (-1)^t t! b_t(nu)`` of the check-domain identity."""
    _check_t(t)
    with mpmath.workdps(_DPS):
        return (-1) ** t * mpmath.factorial(t) * _taylor_check(nu, t)


def expand_var_identity(z: float, s, T: int) -> complex:
    """Partial sum over ``t = 0..T`` of ``(-1)^t / t! A(s, t) z^t``."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    _check_t(T)
    with mpmath.workdps(_DPS):
        zz = mpmath.mpf(z)
        total = mpmath.fsum((-1) ** t / mpmath.factorial(t) * coeff_A(s, t) * zz**t for t in range(T + 1))
    return complex(total)


def expand_check_identity(w: float, nu, T: int) -> complex:
    """Partial sum over ``t = 0..T`` of ``(-1)^t / t! G(nu, t) w^t``."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    _check_t(T)
    with mpmath.workdps(_DPS):
        ww = mpmath.mpf(w)
        total = mpmath.fsum((-1) ** t / mpmath.factorial(t) * coeff_G(nu, t) * ww**t for t in range(T + 1))
    return complex(total)


def var_identity_closed_form(z: float, s) -> complex:
    with mpmath.workdps(_DPS):
        s = mpmath.mpc(s)
        return complex((1 - mpmath.mpf(z)) ** s * (1 + mpmath.mpf(z)) ** (1 - s) / 2)


def check_identity_closed_form(w: float, nu) -> complex:
    with mpmath.workdps(_DPS):
        nu = mpmath.mpc(nu)
        return complex((1 - mpmath.mpf(w)) ** nu * (1 + mpmath.mpf(w)) ** (-nu))


def beta_kappa(kappa: int, max_kappa: int = MAX_KAPPA) -> Fraction:
    """Weight ``(2k-3)!! / (2^k k!)`` of the k-th even moment, with ``(-1)!! = 1``.

    These are the Taylor coefficients of ``1 - sqrt(1 - x)``, so they are
    positive and sum to 1.
    """
    if kappa < 1:
        raise ValueError("kappa must be a positive integer")
    if kappa > max_kappa:
        raise ValueError(f"kappa {kappa} exceeds the configured bound {max_kappa}")
    return Fraction(math.comb(2 * kappa, kappa), 4**kappa * (2 * kappa - 1))


def beta_tail(K: int) -> Fraction:
    """``1 - sum_{k<=K} beta_k``, which telescopes to ``binom(2K, K) / 4^K``."""
    if K < 0:
        raise ValueError("K must be nonnegative")
    return Fraction(math.comb(2 * K, K), 4**K)


@dataclass
class MomentProvider:
    """Even moments ``sum_i alpha_i z_i^(2k)`` of a state's interior atoms."""

    source: CheckState
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.source.backend is Backend.RATIONAL:
            self._alpha = np.array([float(a) for a in self.source.masses], dtype=float)
            self._z2 = np.array([float(z * z) for z in self.source.positions], dtype=float)
        else:
            self._alpha = np.asarray(self.source.masses, dtype=float)
            self._z2 = np.asarray(self.source.positions, dtype=float) ** 2

    def __call__(self, kappa: int) -> float:
        if kappa not in self._cache:
            self._cache[kappa] = math.fsum((self._alpha * self._z2**kappa).tolist())
        return self._cache[kappa]


def ba_series(m: MomentProvider, L: int, K: int) -> tuple[float, float]:
    """Truncated moment series for Z of an ``L``-fold check product.

    Returns ``(value, truncation_bound)`` with ``value`` an upper bound on
    the exact Z that decreases in ``K`` and ``value - bound <= Z``.
    """
    if L < 1 or K < 1:
        raise ValueError("L and K must be positive")
    terms = []
    beta = Fraction(1, 2)
    for kappa in range(1, K + 1):
        terms.append(float(beta) * m(kappa) ** L)
        beta = beta * (2 * kappa - 1) / (2 * (kappa + 1))
    value = 1.0 - math.fsum(terms)
    bound = float(beta_tail(K)) * m(1) ** L
    return value, bound


def _welford_merge(n_a, mean_a, m2_a, n_b, mean_b, m2_b):
    n = n_a + n_b
    delta = mean_b - mean_a
    mean = mean_a + delta * n_b / n
    m2 = m2_a + m2_b + delta * delta * n_a * n_b / n
    return n, mean, m2


def mc_product_estimate(
    Q: int, L: int, p: float, samples: int, seed: int, chunk: int = 1 << 18
) -> tuple[float, float]:
    """Monte Carlo estimate of ``E sqrt(1 - X^2)`` with ``X`` a product of ``L`` iid factors.

    Each factor is ``tanh(|Q - K| |log(p / (1-p))|)`` with ``K ~ Bin(2Q, p)``.
    Returns the sample mean and its standard error; identical seeds give
    identical results.
    """
    if Q < 1 or L < 1 or samples < 2:
        raise ValueError("Q, L must be positive and samples at least 2")
    if not 0 < p < 0.5:
        raise ValueError("p must lie in (0, 1/2)")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    delta = abs(math.log(p / (1 - p)))
    table = np.tanh(np.abs(Q - np.arange(2 * Q + 1)) * delta)
    n, mean, m2 = 0, 0.0, 0.0
    remaining = samples
    while remaining:
        size = min(chunk, remaining)
        k = rng.binomial(2 * Q, p, size=(size, L))
        x = table[k].prod(axis=1)
        y = np.sqrt((1.0 - x) * (1.0 + x))
        cm = float(y.mean())
        cm2 = float(((y - cm) ** 2).sum())
        n, mean, m2 = _welford_merge(n, mean, m2, size, cm, cm2)
        remaining -= size
    stderr = math.sqrt(m2 / (n - 1) / n)
    return mean, stderr
