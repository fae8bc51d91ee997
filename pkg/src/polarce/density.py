"""|D|-densities of discrete BMS channels.

A discrete binary-input memoryless symmetric channel is fully described by the
distribution of ``|tanh(L/2)|`` given ``X = +1``: finitely many point masses on
``[0, 1]``.  The masses at 0 and 1 are kept apart from the interior atoms
because the evolution rules treat them differently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ._numeric import Backend, PRUNE_THRESHOLD, as_array, coerce, empty, merge_sorted

__all__ = [
    "Atom",
    "AtomicState",
    "AbsDDensity",
    "ChannelSpec",
    "DensityError",
    "bec_density",
    "bsc_density",
    "density_from_channel",
    "density_from_atoms",
    "bhattacharyya",
    "merge_atoms",
    "load_channel_spec",
]

MASS_TOL = 1e-12


class DensityError(ValueError):
    """Invalid channel parameters or a malformed atom list."""


class Atom(NamedTuple):
    mass: object
    position: object


@dataclass(frozen=True, eq=False)
class AtomicState:
    """Interior atoms plus the two boundary masses.

    ``masses`` and ``positions`` are read-only arrays sorted by strictly
    increasing position in the open unit interval.
    """

    masses: np.ndarray
    positions: np.ndarray
    mass_at_zero: object
    mass_at_one: object
    backend: Backend = Backend.FLOAT

    def __post_init__(self):
        for arr in (self.masses, self.positions):
            arr.flags.writeable = False

    @classmethod
    def _build(cls, masses, positions, mass_at_zero, mass_at_one, backend):
        return cls(masses, positions, mass_at_zero, mass_at_one, backend)

    @property
    def interior(self) -> tuple[Atom, ...]:
        return tuple(Atom(m, x) for m, x in zip(self.masses.tolist(), self.positions.tolist()))

    @property
    def n_interior(self) -> int:
        return int(self.positions.size)

    def total_mass(self):
        if self.backend is Backend.FLOAT:
            return math.fsum(self.masses.tolist()) + self.mass_at_zero + self.mass_at_one
        return sum(self.masses.tolist(), self.mass_at_zero + self.mass_at_one)

    def check_structure(self) -> None:
        x = self.positions
        if x.size:
            if not (x[0] > 0 and x[-1] < 1):
                raise DensityError("interior positions must lie in the open interval (0, 1)")
            if x.size > 1 and not bool(np.all(x[1:] > x[:-1])):
                raise DensityError("interior positions must be strictly increasing")
            if not bool(np.all(self.masses > 0)):
                raise DensityError("interior masses must be positive")
        if self.mass_at_zero < 0 or self.mass_at_one < 0:
            raise DensityError("boundary masses must be nonnegative")

    def validate(self) -> None:
        self.check_structure()
        total = self.total_mass()
        if self.backend is Backend.RATIONAL:
            if total != 1:
                raise DensityError(f"total mass is {total}, expected exactly 1")
        elif abs(total - 1.0) > MASS_TOL:
            raise DensityError(f"total mass is {total!r}, expected 1 within {MASS_TOL}")

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return (
            self.backend is other.backend
            and self.mass_at_zero == other.mass_at_zero
            and self.mass_at_one == other.mass_at_one
            and self.interior == other.interior
        )

    def __hash__(self):
        return hash((type(self).__name__, self.mass_at_zero, self.mass_at_one, self.interior))

    def __repr__(self):
        atoms = ", ".join(f"({m}, {x})" for m, x in self.interior[:6])
        more = ", ..." if self.n_interior > 6 else ""
        return (
            f"{type(self).__name__}(mass_at_zero={self.mass_at_zero}, "
            f"mass_at_one={self.mass_at_one}, interior=[{atoms}{more}], "
            f"backend={self.backend.value})"
        )


class AbsDDensity(AtomicState):
    """|D|-density: mass ``mass_at_zero`` at z=0, ``mass_at_one`` at z=1."""


def _check_open_unit(name, value, upper=1):
    if not 0 < value < upper:
        raise DensityError(f"{name} must lie in (0, {upper}), got {value}")


def bec_density(eps, backend: Backend | str = Backend.FLOAT) -> AbsDDensity:
    backend = Backend.parse(backend)
    eps = coerce(eps, backend)
    _check_open_unit("erasure probability", eps)
    return AbsDDensity(empty(backend), empty(backend), eps, 1 - eps, backend)


def bsc_density(p, backend: Backend | str = Backend.FLOAT) -> AbsDDensity:
    backend = Backend.parse(backend)
    p = coerce(p, backend)
    _check_open_unit("crossover probability", p, coerce("0.5", backend))
    one = coerce(1, backend)
    zero = coerce(0, backend)
    return AbsDDensity(as_array([one], backend), as_array([1 - 2 * p], backend), zero, zero, backend)


def density_from_atoms(
    atoms: Iterable[tuple],
    mass_at_zero=0,
    mass_at_one=0,
    backend: Backend | str = Backend.FLOAT,
    tolerance: float | None = None,
) -> AbsDDensity:
    """Build a validated density from (mass, position) pairs in any order."""
    backend = Backend.parse(backend)
    atoms = list(atoms)
    masses = as_array([a[0] for a in atoms], backend)
    positions = as_array([a[1] for a in atoms], backend)
    tol = backend.default_tol if tolerance is None else tolerance
    masses, positions = merge_sorted(masses, positions, tol)
    d = AbsDDensity(masses, positions, coerce(mass_at_zero, backend), coerce(mass_at_one, backend), backend)
    d.validate()
    return d


def merge_atoms(atoms: Sequence[Atom], tolerance: float = 0.0) -> list[Atom]:
    """Combine atoms whose positions agree within a relative ``tolerance``.

    The result is sorted by strictly increasing position; merged atoms sit at
    their mass-weighted mean position.  ``tolerance=0`` merges only exact
    duplicates and is the only sensible choice for rational inputs.
    """
    if not atoms:
        return []
    exact = all(not isinstance(v, float) for a in atoms for v in a)
    backend = Backend.RATIONAL if exact else Backend.FLOAT
    masses = as_array([a[0] for a in atoms], backend)
    positions = as_array([a[1] for a in atoms], backend)
    m, x = merge_sorted(masses, positions, tolerance)
    return [Atom(mi, xi) for mi, xi in zip(m.tolist(), x.tolist())]


def prune_masses(masses: np.ndarray, positions: np.ndarray):
    """Drop float atoms lighter than the prune threshold (breaks exact mass conservation)."""
    keep = masses >= PRUNE_THRESHOLD
    return masses[keep], positions[keep]


def bhattacharyya(d: AtomicState) -> float:
    """Bhattacharyya parameter of a |D|-density, always as a float."""
    if d.backend is Backend.FLOAT:
        terms = (d.masses * np.sqrt(1.0 - d.positions * d.positions)).tolist()
        return math.fsum(terms) + float(d.mass_at_zero)
    terms = [float(m) * math.sqrt(float(1 - x * x)) for m, x in zip(d.masses.tolist(), d.positions.tolist())]
    return math.fsum(terms) + float(d.mass_at_zero)


@dataclass(frozen=True)
class ChannelSpec:
    """A BEC, BSC or general discrete symmetric channel.

    For ``general`` channels ``rows[0][y]`` is P(y | X=+1) (input bit 0) and
    ``rows[1][y]`` is P(y | X=-1); ``perm`` is the output involution with
    ``rows[0][y] == rows[1][perm[y]]``.
    """

    kind: str
    param: object = None
    rows: tuple = field(default=())
    perm: tuple = field(default=())

    @classmethod
    def bec(cls, eps) -> "ChannelSpec":
        spec = cls("bec", eps)
        spec.validate()
        return spec

    @classmethod
    def bsc(cls, p) -> "ChannelSpec":
        spec = cls("bsc", p)
        spec.validate()
        return spec

    @classmethod
    def general(cls, rows, perm) -> "ChannelSpec":
        spec = cls("general", None, tuple(tuple(r) for r in rows), tuple(int(i) for i in perm))
        spec.validate()
        return spec

    def validate(self, backend: Backend = Backend.FLOAT) -> None:
        if self.kind == "bec":
            _check_open_unit("erasure probability", coerce(self.param, backend))
        elif self.kind == "bsc":
            _check_open_unit("crossover probability", coerce(self.param, backend), coerce("0.5", backend))
        elif self.kind == "general":
            _validate_general(self.rows, self.perm, backend)
        else:
            raise DensityError(f"unknown channel kind {self.kind!r}")

    def transition_rows(self, backend: Backend = Backend.FLOAT) -> tuple[list, list]:
        """Explicit (P(y|+1), P(y|-1)) rows for every channel kind."""
        if self.kind == "bsc":
            p = coerce(self.param, backend)
            return [1 - p, p], [p, 1 - p]
        if self.kind == "bec":
            e = coerce(self.param, backend)
            zero = coerce(0, backend)
            return [1 - e, e, zero], [zero, e, 1 - e]
        return [coerce(v, backend) for v in self.rows[0]], [coerce(v, backend) for v in self.rows[1]]

    def density(self, backend: Backend | str = Backend.FLOAT) -> AbsDDensity:
        backend = Backend.parse(backend)
        if self.kind == "bec":
            return bec_density(self.param, backend)
        if self.kind == "bsc":
            return bsc_density(self.param, backend)
        return density_from_channel(self, backend)

    def to_dict(self) -> dict:
        if self.kind == "bsc":
            return {"kind": "bsc", "p": self.param}
        if self.kind == "bec":
            return {"kind": "bec", "eps": self.param}
        return {"kind": "general", "rows": [list(r) for r in self.rows], "perm": list(self.perm)}

    @classmethod
    def from_dict(cls, obj: dict) -> "ChannelSpec":
        kind = obj.get("kind")
        if kind == "bsc":
            return cls.bsc(obj["p"])
        if kind == "bec":
            return cls.bec(obj["eps"])
        if kind == "general":
            return cls.general(obj["rows"], obj["perm"])
        raise DensityError(f"unknown channel kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "ChannelSpec":
        """Parse ``bsc:0.1``, ``bec:0.3`` or an inline JSON object."""
        text = text.strip()
        if text.startswith("{"):
            return cls.from_dict(json.loads(text))
        kind, sep, value = text.partition(":")
        if not sep:
            raise DensityError(f"cannot parse channel {text!r}; use 'bsc:P', 'bec:EPS' or JSON")
        kind = kind.lower()
        try:
            number = float(value)
        except ValueError:
            raise DensityError(f"bad channel parameter {value!r}") from None
        if kind == "bsc":
            return cls.bsc(number)
        if kind == "bec":
            return cls.bec(number)
        raise DensityError(f"unknown channel kind {kind!r}")

    def label(self) -> str:
        if self.kind in ("bsc", "bec"):
            return f"{self.kind}:{self.param!r}"
        return json.dumps(self.to_dict(), separators=(",", ":"))


def load_channel_spec(path: str | PathLike) -> ChannelSpec:
    with open(path, encoding="utf-8") as fh:
        return ChannelSpec.from_dict(json.load(fh))


def _validate_general(rows, perm, backend: Backend) -> None:
    if len(rows) != 2 or len(rows[0]) != len(rows[1]) or not rows[0]:
        raise DensityError("general channel needs two rows of equal, nonzero length")
    n = len(rows[0])
    if sorted(perm) != list(range(n)):
        raise DensityError("perm must be a permutation of the output indices")
    if any(perm[perm[y]] != y for y in range(n)):
        raise DensityError("perm must be an involution")
    tol = backend.default_tol
    up = [coerce(v, backend) for v in rows[0]]
    down = [coerce(v, backend) for v in rows[1]]
    if any(v < 0 for v in up + down):
        raise DensityError("transition probabilities must be nonnegative")
    for row in (up, down):
        if abs(sum(row) - 1) > tol:
            raise DensityError("each row must sum to 1")
    for y in range(n):
        if abs(up[y] - down[perm[y]]) > tol:
            raise DensityError(f"symmetry violated at output {y}: P(y|+1) != P(perm(y)|-1)")


def density_from_channel(spec: ChannelSpec, backend: Backend | str = Backend.FLOAT) -> AbsDDensity:
    """|D|-density of an explicit symmetric channel.

    Output y contributes mass P(y|+1) at ``|z_y|`` where
    ``z_y = (P(y|+1) - P(y|-1)) / (P(y|+1) + P(y|-1))``.  Values within the
    backend tolerance of 0 or 1 go to the boundary masses.
    """
    backend = Backend.parse(backend)
    spec.validate(backend)
    up, down = spec.transition_rows(backend)
    tol = backend.default_tol
    zero = coerce(0, backend)
    at_zero, at_one = zero, zero
    masses, positions = [], []
    for a, b in zip(up, down):
        if a == 0:
            continue
        z = abs((a - b) / (a + b))
        if z <= tol:
            at_zero += a
        elif z >= 1 - tol:
            at_one += a
        else:
            masses.append(a)
            positions.append(z)
    m, x = merge_sorted(as_array(masses, backend), as_array(positions, backend), tol)
    d = AbsDDensity(m, x, at_zero, at_one, backend)
    d.validate()
    return d
