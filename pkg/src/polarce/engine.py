"""Exact evolution of discrete densities through the polar transforms.

Two representations of one channel are used.  In the check domain a state is
the list of |D| atoms ``(alpha_i, z_i)``; the check transform squares this
atom set.  In the variable domain a state is the list of ``(beta_i, w_i)``
with ``beta_i = (1 + z_i) alpha_i / 2`` and ``w_i = (1 - z_i) / (1 + z_i)``
(the likelihood ratio ``e^{-|L|}``); the variable transform multiplies these
positions, plus a cross term produced by pairs of an atom and the mirror
image ``(beta_i w_i, 1 / w_i)`` of another.  Boundary masses at ``z = 0`` and
``z = 1`` are tracked separately in both domains.

The engine keeps one active state and converts only when the next transform
belongs to the other domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._numeric import Backend, PRUNE_THRESHOLD, merge_sorted
from .density import AbsDDensity, Atom, AtomicState
from .patterns import CHECK, VAR, BitPattern

__all__ = [
    "AtomOverflowError",
    "CheckState",
    "CrossState",
    "EngineConfig",
    "VarState",
    "all_bhattacharyya",
    "bhattacharyya_var",
    "check_to_var",
    "check_update",
    "cross_update",
    "evolve",
    "init_states",
    "polarize",
    "select_info_set",
    "var_to_check",
    "var_update",
]

DEFAULT_ATOM_CAP = 10**6
# Raw candidate lists may exceed the cap before merging, up to this factor.
RAW_CANDIDATE_FACTOR = 64


class AtomOverflowError(RuntimeError):
    """An evolved state would hold more interior atoms than allowed."""

    def __init__(self, count: int, cap: int, level: int | None = None, index: int | None = None):
        self.count = count
        self.cap = cap
        self.level = level
        self.index = index
        where = []
        if index is not None:
            where.append(f"bit-channel index {index}")
        if level is not None:
            where.append(f"level {level}")
        suffix = f" at {', '.join(where)}" if where else ""
        super().__init__(f"atom count {count} exceeds cap {cap}{suffix}")

    def located(self, level: int | None = None, index: int | None = None) -> "AtomOverflowError":
        return AtomOverflowError(
            self.count,
            self.cap,
            self.level if level is None else level,
            self.index if index is None else index,
        )


@dataclass(frozen=True)
class EngineConfig:
    """Numerical knobs.

    ``merge_tol=None`` selects the backend default (relative 1e-12 for float,
    exact equality for rational).  ``prune`` drops float atoms lighter than
    1e-15, which gives up exact mass conservation.
    """

    atom_cap: int = DEFAULT_ATOM_CAP
    merge_tol: float | None = None
    prune: bool = False

    def tol(self, backend: Backend) -> float:
        if backend is Backend.RATIONAL:
            return 0.0
        return backend.default_tol if self.merge_tol is None else self.merge_tol


DEFAULT_CONFIG = EngineConfig()


class CheckState(AtomicState):
    """Check-domain state: atoms ``(alpha_i, z_i)`` with boundary masses."""


class VarState(AtomicState):
    """Variable-domain state: atoms ``(beta_i, w_i)`` with boundary masses.

    Each stored atom stands for a pair, the second being ``(beta_i w_i, 1/w_i)``,
    so the probability mass it carries is ``beta_i (1 + w_i)``.
    """

    def total_mass(self):
        carried = self.masses * (1 + self.positions)
        if self.backend is Backend.FLOAT:
            return math.fsum(carried.tolist()) + self.mass_at_zero + self.mass_at_one
        return sum(carried.tolist(), self.mass_at_zero + self.mass_at_one)


@dataclass(frozen=True)
class CrossState:
    """Constant term ``dc`` and the cross atoms produced by one variable step."""

    dc: object
    psi_masses: np.ndarray = field(repr=False)
    psi_positions: np.ndarray = field(repr=False)

    @property
    def psi1(self) -> tuple[Atom, ...]:
        return tuple(Atom(m, x) for m, x in zip(self.psi_masses.tolist(), self.psi_positions.tolist()))


def _finish(cls, masses, positions, a0, an, backend, config, *, var_domain):
    """Route boundary-rounded float atoms, prune, merge and enforce the cap."""
    nonzero = masses != 0  # boundary terms vanish when a boundary mass is zero
    if not bool(np.all(nonzero)):
        masses, positions = masses[nonzero], positions[nonzero]
    if backend is Backend.FLOAT and positions.size:
        low = positions <= 0.0
        high = positions >= 1.0
        if low.any() or high.any():
            if var_domain:
                # w = 0 is z = 1; w = 1 is z = 0 and carries twice its mass
                an = an + float(masses[low].sum())
                a0 = a0 + float((masses[high] * (1.0 + positions[high])).sum())
            else:
                a0 = a0 + float(masses[low].sum())
                an = an + float(masses[high].sum())
            keep = ~(low | high)
            masses, positions = masses[keep], positions[keep]
        if config.prune:
            keep = masses >= PRUNE_THRESHOLD
            masses, positions = masses[keep], positions[keep]
    masses, positions = merge_sorted(masses, positions, config.tol(backend))
    if positions.size > config.atom_cap:
        raise AtomOverflowError(int(positions.size), config.atom_cap)
    return cls(masses, positions, a0, an, backend)


def _guard_raw(count: int, config: EngineConfig) -> None:
    if count > RAW_CANDIDATE_FACTOR * config.atom_cap:
        raise AtomOverflowError(count, config.atom_cap)


def init_states(d: AbsDDensity, config: EngineConfig = DEFAULT_CONFIG) -> tuple[CheckState, VarState]:
    check = CheckState(d.masses, d.positions, d.mass_at_zero, d.mass_at_one, d.backend)
    return check, check_to_var(check, config)


def check_update(s: CheckState, config: EngineConfig = DEFAULT_CONFIG) -> CheckState:
    """One check transform: products of ordered pairs plus the noiseless-boundary term."""
    n = s.positions.size
    _guard_raw(n * n + n, config)
    a0, an = s.mass_at_zero, s.mass_at_one
    masses = np.concatenate((np.multiply.outer(s.masses, s.masses).ravel(), 2 * an * s.masses))
    positions = np.concatenate((np.multiply.outer(s.positions, s.positions).ravel(), s.positions))
    return _finish(CheckState, masses, positions, 2 * a0 - a0 * a0, an * an, s.backend, config, var_domain=False)


def cross_update(v: VarState, config: EngineConfig = DEFAULT_CONFIG) -> CrossState:
    """Constant term and cross atoms from pairing each atom with another's mirror image."""
    beta, w = v.masses, v.positions
    _guard_raw(w.size * (w.size - 1) // 2, config)
    terms = (beta * beta * w).tolist()
    dc = math.fsum(terms) if v.backend is Backend.FLOAT else sum(terms, Fraction(0))
    n = w.size
    if n < 2:
        return CrossState(dc, beta[:0], w[:0])
    i, j = np.triu_indices(n, k=1)  # w sorted ascending, so w[i] < w[j]
    masses = beta[i] * beta[j] * w[j]
    positions = w[i] / w[j]
    return CrossState(dc, masses, positions)


def var_update(v: VarState, c: CrossState | None = None, config: EngineConfig = DEFAULT_CONFIG) -> VarState:
    """One variable transform, given the cross state of ``v``."""
    if c is None:
        c = cross_update(v, config)
    n = v.positions.size
    _guard_raw(n * n + n + c.psi_positions.size, config)
    a0, an = v.mass_at_zero, v.mass_at_one
    masses = np.concatenate(
        (np.multiply.outer(v.masses, v.masses).ravel(), 2 * a0 * v.masses, 2 * c.psi_masses)
    )
    positions = np.concatenate(
        (np.multiply.outer(v.positions, v.positions).ravel(), v.positions, c.psi_positions)
    )
    return _finish(VarState, masses, positions, a0 * a0 + 2 * c.dc, 2 * an - an * an, v.backend, config, var_domain=True)


def check_to_var(s: CheckState, config: EngineConfig = DEFAULT_CONFIG) -> VarState:
    z, alpha = s.positions, s.masses
    beta = (1 + z) * alpha / 2
    w = (1 - z) / (1 + z)
    return _finish(VarState, beta, w, s.mass_at_zero, s.mass_at_one, s.backend, config, var_domain=True)


def var_to_check(v: VarState, config: EngineConfig = DEFAULT_CONFIG) -> CheckState:
    w, beta = v.positions, v.masses
    z = (1 - w) / (1 + w)
    alpha = 2 * beta / (1 + z)
    return _finish(CheckState, alpha, z, v.mass_at_zero, v.mass_at_one, v.backend, config, var_domain=False)


def bhattacharyya_var(v: VarState) -> float:
    """Bhattacharyya parameter ``alpha_0 + 2 sum beta_i sqrt(w_i)`` as a float."""
    if v.backend is Backend.FLOAT:
        terms = (2.0 * v.masses * np.sqrt(v.positions)).tolist()
    else:
        terms = [2.0 * float(b) * math.sqrt(float(w)) for b, w in zip(v.masses.tolist(), v.positions.tolist())]
    return math.fsum(terms) + float(v.mass_at_zero)


def _step(state: AtomicState, bit: int, config: EngineConfig) -> AtomicState:
    if bit == CHECK:
        if isinstance(state, VarState):
            state = var_to_check(state, config)
        return check_update(state, config)
    if isinstance(state, CheckState):
        state = check_to_var(state, config)
    return var_update(state, cross_update(state, config), config)


def _final_z(state: AtomicState, config: EngineConfig) -> float:
    if isinstance(state, CheckState):
        state = check_to_var(state, config)
    return bhattacharyya_var(state)


def _root(d: AbsDDensity) -> CheckState:
    return CheckState(d.masses, d.positions, d.mass_at_zero, d.mass_at_one, d.backend)


def evolve(d: AbsDDensity, pattern: BitPattern | str, config: EngineConfig = DEFAULT_CONFIG) -> AtomicState:
    """Active state after applying ``pattern``: a CheckState or a VarState."""
    if isinstance(pattern, str):
        pattern = BitPattern.parse(pattern)
    state: AtomicState = _root(d)
    for m, bit in enumerate(pattern, start=1):
        try:
            state = _step(state, bit, config)
        except AtomOverflowError as exc:
            raise exc.located(level=m) from None
    return state


def polarize(d: AbsDDensity, pattern: BitPattern | str, config: EngineConfig = DEFAULT_CONFIG) -> float:
    """Bhattacharyya parameter of the bit-channel reached by ``pattern``."""
    if isinstance(pattern, str):
        pattern = BitPattern.parse(pattern)
    try:
        return _final_z(evolve(d, pattern, config), config)
    except AtomOverflowError as exc:
        raise exc.located(index=pattern.index) from None


def all_bhattacharyya(d: AbsDDensity, level: int, config: EngineConfig = DEFAULT_CONFIG) -> list[float]:
    """Bhattacharyya parameters of all ``2**level`` bit-channels in index order.

    A depth-first walk shares every prefix, so each internal state is built
    once.
    """
    if level < 1:
        raise ValueError("level must be at least 1")
    out: list[float] = []

    def walk(state: AtomicState, depth: int, prefix: int) -> None:
        if depth == level:
            out.append(_final_z(state, config))
            return
        for bit in (CHECK, VAR):
            try:
                child = _step(state, bit, config)
            except AtomOverflowError as exc:
                first = ((prefix << 1 | bit) << (level - depth - 1)) + 1
                raise exc.located(level=depth + 1, index=first) from None
            walk(child, depth + 1, prefix << 1 | bit)

    walk(_root(d), 0, 0)
    return out


def select_info_set(
    z: Sequence[float], *, threshold: float | None = None, rate: float | None = None
) -> list[int]:
    """Indices (1-based, ascending) of the selected bit-channels.

    Exactly one of ``threshold`` (keep ``Z < threshold``) or ``rate`` (keep the
    ``floor(rate * N)`` smallest Z, ties to the smaller index) must be given.
    """
    if (threshold is None) == (rate is None):
        raise ValueError("give exactly one of threshold or rate")
    if len(z) == 0:
        raise ValueError("empty reliability list")
    if threshold is not None:
        if not 0 <= threshold <= 1:
            raise ValueError("threshold must lie in [0, 1]")
        return [i + 1 for i, v in enumerate(z) if v < threshold]
    if not 0 < rate < 1:
        raise ValueError("rate must lie in (0, 1)")
    exact_rate = Fraction(rate) if isinstance(rate, Fraction) else Fraction(repr(float(rate)))
    count = math.floor(exact_rate * len(z))
    order = sorted(range(len(z)), key=lambda i: (z[i], i))
    return sorted(i + 1 for i in order[:count])
