"""Closed forms and recursions specific to the binary symmetric channel.

Results are written with the symbols ``C = p(1-p)``, ``M_i = (1-2p)^i``,
``S_i = (1-p)^i + p^i`` and ``D_i = (1-p)^i - p^i``.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Callable

import mpmath

from ._numeric import Backend, as_array, coerce, merge_sorted
from .density import bsc_density
from .engine import DEFAULT_ATOM_CAP, AtomOverflowError, CheckState, polarize
from .patterns import CHECK, VAR, BitPattern

__all__ = [
    "BscConstants",
    "MAX_BASE_DEPTH",
    "closed_form_k3",
    "closed_form_k4",
    "q_base_bhatt",
    "q_base_check_state",
    "ql_composition_count",
    "ql_enumerate_check_state",
    "recursive_bhatt",
]

MAX_BASE_DEPTH = 6


class BscConstants:
    """Memoised BSC symbols for one crossover probability.

    ``p`` may be a float, a :class:`~fractions.Fraction` (exact symbols) or an
    ``mpmath.mpf`` (high-precision closed forms).
    """

    def __init__(self, p):
        if isinstance(p, (int, str)):
            p = Fraction(p)
        if not 0 < 2 * p < 1:
            raise ValueError(f"crossover probability must lie in (0, 1/2), got {p}")
        self.p = p
        self.pbar = 1 - p
        self.C = p * self.pbar
        self.Cbar = 1 - self.C
        self._m: dict[int, object] = {}
        self._s: dict[int, object] = {}
        self._d: dict[int, object] = {}

    @property
    def Delta(self):
        if isinstance(self.p, mpmath.mpf):
            return mpmath.log(self.p / self.pbar)
        return math.log(self.p / self.pbar)

    def M(self, i: int):
        if i not in self._m:
            self._m[i] = (1 - 2 * self.p) ** i
        return self._m[i]

    def S(self, i: int):
        if i not in self._s:
            self._s[i] = self.pbar**i + self.p**i
        return self._s[i]

    def D(self, i: int):
        if i not in self._d:
            self._d[i] = self.pbar**i - self.p**i
        return self._d[i]

    def sqrt(self, x):
        if isinstance(x, mpmath.mpf) or isinstance(self.p, mpmath.mpf):
            return mpmath.sqrt(x)
        return math.sqrt(x)


def _check_q(q: int) -> int:
    if not 2 <= q <= MAX_BASE_DEPTH:
        raise ValueError(f"q must lie in 2..{MAX_BASE_DEPTH}, got {q}")
    return 2 ** (q - 1)


def _constants(p, backend: Backend) -> BscConstants:
    return BscConstants(coerce(p, backend))


def q_base_check_state(p, q: int, backend: Backend | str = Backend.FLOAT) -> CheckState:
    """Check-domain state of the BSC after ``q`` variable transforms."""
    backend = Backend.parse(backend)
    Q = _check_q(q)
    k = _constants(p, backend)
    masses, positions = [], []
    for i in range(Q):
        r = 2 * Q - 2 * i
        masses.append(math.comb(2 * Q, i) * k.C**i * k.S(r))
        positions.append(k.D(r) / k.S(r))
    m, x = merge_sorted(as_array(masses, backend), as_array(positions, backend), backend.default_tol)
    a0 = math.comb(2 * Q, Q) * k.C**Q
    return CheckState(m, x, a0, coerce(0, backend), backend)


def q_base_bhatt(p, q: int):
    """Bhattacharyya parameter ``2^{2Q} C^Q`` after ``q`` variable transforms, ``Q = 2^{q-1}``."""
    Q = _check_q(q)
    k = BscConstants(p)
    return 2 ** (2 * Q) * k.C**Q


def ql_composition_count(q: int, ell: int) -> int:
    Q = _check_q(q)
    L = 2**ell
    return math.comb(L + Q - 1, Q - 1)


def _compositions(total: int, parts: int):
    # stars and bars: choose the bar positions among total + parts - 1 slots
    for bars in itertools.combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 1 - prev - 1)
        yield out


def ql_enumerate_check_state(
    p, q: int, ell: int, backend: Backend | str = Backend.FLOAT, atom_cap: int = DEFAULT_ATOM_CAP
) -> CheckState:
    """State after ``q`` variable then ``ell`` check transforms, by direct enumeration.

    Each composition ``j`` of ``L = 2**ell`` into ``Q`` parts gives one atom
    with multinomial weight; the result equals ``ell`` check updates applied
    to :func:`q_base_check_state`.
    """
    backend = Backend.parse(backend)
    Q = _check_q(q)
    if ell < 0:
        raise ValueError("ell must be nonnegative")
    count = ql_composition_count(q, ell)
    if count > atom_cap:
        raise AtomOverflowError(count, atom_cap)
    L = 2**ell
    k = _constants(p, backend)
    rs = [2 * Q - 2 * i for i in range(Q)]
    binoms = [math.comb(2 * Q, i) for i in range(Q)]
    masses, positions = [], []
    for j in _compositions(L, Q):
        weight = math.factorial(L)
        for ji in j:
            weight //= math.factorial(ji)
        c_power = 0
        s_prod = coerce(1, backend)
        d_prod = coerce(1, backend)
        for i, ji in enumerate(j):
            if ji:
                weight *= binoms[i] ** ji
                c_power += i * ji
                s_prod = s_prod * k.S(rs[i]) ** ji
                d_prod = d_prod * k.D(rs[i]) ** ji
        masses.append(weight * k.C**c_power * s_prod)
        positions.append(d_prod / s_prod)
    m, x = merge_sorted(as_array(masses, backend), as_array(positions, backend), backend.default_tol)
    base_zero = math.comb(2 * Q, Q) * k.C**Q
    a0 = 1 - (1 - base_zero) ** L
    return CheckState(m, x, a0, coerce(0, backend), backend)


def _default_base(pattern: BitPattern, p) -> float:
    return polarize(bsc_density(p), pattern)


def recursive_bhatt(
    pattern: BitPattern | str,
    p,
    base: Callable[[BitPattern, object], float] | None = None,
    *,
    suffix_first: bool = False,
) -> float:
    """Z of a BSC bit-channel by peeling prefix checks and suffix variables.

    A leading check transform maps the BSC to another BSC with crossover
    ``2p(1-p)``; a trailing variable transform squares Z.  What is left has a
    leading variable and a trailing check transform and is handed to ``base``
    (by default the density-evolution engine).  A fully peeled pattern is the
    raw channel with ``Z = 2 sqrt(p(1-p))``.
    """
    if isinstance(pattern, str):
        pattern = BitPattern.parse(pattern)
    base = base or _default_base
    bits = list(pattern.bits)
    squarings = 0
    if suffix_first:
        while bits and bits[-1] == VAR:
            bits.pop()
            squarings += 1
    while bits and bits[0] == CHECK:
        bits.pop(0)
        p = 2 * p * (1 - p)
    while bits and bits[-1] == VAR:
        bits.pop()
        squarings += 1
    if bits:
        z = base(BitPattern(tuple(bits)), p)
    else:
        z = 2 * math.sqrt(p * (1 - p))
    for _ in range(squarings):
        z = z * z
    return z


def _k3(k: BscConstants, i: int):
    C, M, S, sq = k.C, k.M, k.S, k.sqrt
    r2 = sq(2)
    if i == 1:
        return sq(1 - M(16))
    if i == 2:
        return 1 - M(8)
    if i == 3:
        return (1 - M(4)) * (sq(M(8) + 6 * M(4) + 1) + M(4) + 3) / 4
    if i == 4:
        return (1 - M(4)) ** 2
    if i == 5:
        return sq(S(2) ** 8 - M(8)) + 1 - S(2) ** 4
    if i == 6:
        return (sq(S(2) ** 4 - M(4)) + 4 * C * k.Cbar) ** 2
    if i == 7:
        return (
            32 * r2 * C**3 * sq(S(4))
            + 16 * C**2 * sq(S(2)) * sq(S(6))
            + 2 * r2 * C**2 * sq(S(8))
            + 12 * C**2
            - 36 * C**4
        )
    if i == 8:
        return 256 * C**4
    raise ValueError(f"level-3 index must lie in 1..8, got {i}")


def _k4(k: BscConstants, i: int):
    C, Cb, M, S, D, sq = k.C, k.Cbar, k.M, k.S, k.D, k.sqrt
    r2 = sq(2)
    if i == 1:
        return sq(1 - M(32))
    if i == 2:
        return 1 - M(16)
    if i == 3:
        return (1 - M(8)) * (sq(M(16) + 6 * M(8) + 1) + M(8) + 3) / 4
    if i == 4:
        return (1 - M(8)) ** 2
    if i == 5:
        return 1 - (1 + M(4)) ** 4 / 16 + sq((1 + M(4)) ** 8 - 256 * M(16)) / 16
    if i == 6:
        return (1 - M(4)) ** 2 * (sq(M(8) + 6 * M(4) + 1) + M(4) + 3) ** 2 / 16
    if i == 7:
        m = M(4)
        return (1 - m) ** 2 / 64 * (
            16 * (1 - m) * sq(1 + 6 * m + m**2)
            + sq(1 + 28 * m + 70 * m**2 + 28 * m**3 + m**4)
            + 8 * (1 + m) * sq(1 + 14 * m + m**2)
            + 39
            + 18 * m
            - 9 * m**2
        )
    if i == 8:
        return (1 - M(4)) ** 4
    if i == 9:
        return sq(S(2) ** 16 - M(16)) + 1 - S(2) ** 8
    if i == 10:
        return (sq(S(2) ** 8 - M(8)) + 1 - S(2) ** 4) ** 2
    if i == 11:
        x = 32 * C**2 * Cb**2 - M(4) + S(2) ** 4
        return (
            64 * C**2 * Cb**2 * sq(S(2) ** 8 - M(8))
            + 8 * C * Cb * S(2) ** 2 * sq(S(2) ** 4 - M(4)) * sq(S(2) ** 4 + 3 * M(4))
            + (S(2) ** 4 - M(4)) * sq(S(2) ** 8 + 6 * S(2) ** 4 * M(4) + M(8)) / 4
            + x
            - x**2 / 4
        )
    if i == 12:
        return (sq(S(2) ** 4 - M(4)) + 4 * C * Cb) ** 4
    if i == 13:
        return (
            256 * C**4 * sq(S(2) ** 8 - D(2) ** 8)
            + 256 * C**3 * sq(S(2) ** 6 * S(4) ** 2 - D(2) ** 6 * D(4) ** 2)
            + 96 * C**2 * sq(S(2) ** 4 * S(4) ** 4 - D(2) ** 4 * D(4) ** 4)
            + 16 * C * sq(S(2) ** 2 * S(4) ** 6 - D(2) ** 2 * D(4) ** 6)
            + sq(S(4) ** 8 - D(4) ** 8)
            + 24 * C**2 * (1 - 9 * C**2 + 36 * C**4 - 54 * C**6)
        )
    if i == 14:
        return _k3(k, 7) ** 2
    if i == 15:
        return (
            6272 * r2 * C**7 * sq(S(4))
            + C**6 * (1568 * r2 * sq(S(8)) + 6272 * sq(S(2)) * sq(S(6)))
            + C**5 * (128 * r2 * sq(S(12)) + 1792 * sq(S(4)) * sq(S(8)) + 896 * sq(S(2)) * sq(S(10)))
            + C**4
            * (2 * r2 * sq(S(16)) + 224 * sq(S(6)) * sq(S(10)) + 112 * sq(S(4)) * sq(S(12)) + 32 * sq(S(2)) * sq(S(14)))
            + 140 * C**4
            - 4900 * C**8
        )
    if i == 16:
        return 65536 * C**8
    raise ValueError(f"level-4 index must lie in 1..16, got {i}")


def closed_form_k3(index: int, p):
    """Exact Z of bit-channel ``index`` (1..8) of a BSC at three polarization levels."""
    return _k3(BscConstants(p), index)


def closed_form_k4(index: int, p):
    """Exact Z of bit-channel ``index`` (1..16) of a BSC at four polarization levels."""
    return _k4(BscConstants(p), index)
