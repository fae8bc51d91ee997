"""Backend-generic array helpers shared by the density and engine modules.

Atom lists are held as a pair of 1-d numpy arrays (masses, positions).  The
float backend uses ``float64``; the rational backend uses ``object`` arrays
of :class:`fractions.Fraction`, so the same vectorised code path serves both.
"""

from __future__ import annotations

import enum
from fractions import Fraction
from numbers import Rational

import numpy as np

__all__ = [
    "Backend",
    "DEFAULT_FLOAT_TOL",
    "PRUNE_THRESHOLD",
    "coerce",
    "empty",
    "as_array",
    "merge_sorted",
]

DEFAULT_FLOAT_TOL = 1e-12
PRUNE_THRESHOLD = 1e-15


class Backend(enum.Enum):
    FLOAT = "float"
    RATIONAL = "rational"

    @property
    def dtype(self):
        return np.float64 if self is Backend.FLOAT else object

    @property
    def default_tol(self) -> float:
        return DEFAULT_FLOAT_TOL if self is Backend.FLOAT else 0.0

    @classmethod
    def parse(cls, value: "Backend | str") -> "Backend":
        if isinstance(value, Backend):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown backend {value!r}; expected 'float' or 'rational'") from None


def coerce(x, backend: Backend):
    """Convert a scalar to the backend's number type.

    Floats entering the rational backend are read through their shortest
    decimal representation, so ``0.1`` becomes ``Fraction(1, 10)``.
    """
    if backend is Backend.FLOAT:
        return float(Fraction(x)) if isinstance(x, str) else float(x)
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x))


def empty(backend: Backend) -> np.ndarray:
    return np.empty(0, dtype=backend.dtype)


def as_array(values, backend: Backend) -> np.ndarray:
    if backend is Backend.FLOAT:
        return np.asarray(values, dtype=np.float64).reshape(-1)
    out = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        out[i] = coerce(v, backend)
    return out


def merge_sorted(masses: np.ndarray, positions: np.ndarray, tol: float):
    """Sort atoms by position and combine coincident ones.

    Two neighbours belong to the same group when their gap is at most
    ``tol * position`` (``tol == 0`` means exact equality).  Each group
    collapses to its total mass at the mass-weighted mean position.
    """
    if positions.size == 0:
        return masses[:0], positions[:0]
    order = np.argsort(positions, kind="stable")
    x = positions[order]
    m = masses[order]
    if tol == 0:
        breaks = x[1:] != x[:-1]
    else:
        breaks = (x[1:] - x[:-1]) > tol * np.abs(x[1:])
    starts = np.concatenate(([0], np.flatnonzero(np.asarray(breaks, dtype=bool)) + 1))
    if starts.size == x.size:
        return m, x
    group_mass = np.add.reduceat(m, starts)
    if tol == 0:
        return group_mass, x[starts]
    group_pos = np.add.reduceat(m * x, starts) / group_mass
    return group_mass, group_pos
