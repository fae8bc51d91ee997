"""Independent reference computations of bit-channel Bhattacharyya parameters.

``brute_force_z`` builds the synthesised channel explicitly by repeated
channel combining, merging outputs with equal likelihood ratio after each
step.  ``mc_llr_z`` samples log-likelihood ratios through the polarization
tree instead.  Neither uses densities, so both are useful oracles for the
evolution engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._numeric import Backend, as_array, coerce
from .density import ChannelSpec
from .patterns import CHECK, BitPattern

__all__ = [
    "DEFAULT_OUTPUT_CAP",
    "ExplicitChannel",
    "OutputOverflowError",
    "brute_force_z",
    "lr_merge",
    "mc_llr_z",
    "minus_transform",
    "plus_transform",
]

DEFAULT_OUTPUT_CAP = 10**7
LR_TOL = 1e-12
MIN_MC_SAMPLES = 1000


class OutputOverflowError(RuntimeError):
    """An explicit channel would exceed the output budget."""


@dataclass(frozen=True)
class ExplicitChannel:
    """Binary-input channel as two aligned arrays of P(y|0) and P(y|1)."""

    prob_given_0: np.ndarray
    prob_given_1: np.ndarray
    backend: Backend = Backend.FLOAT

    @classmethod
    def from_spec(cls, spec: ChannelSpec, backend: Backend | str = Backend.FLOAT) -> "ExplicitChannel":
        backend = Backend.parse(backend)
        spec.validate(backend)
        up, down = spec.transition_rows(backend)
        return cls(as_array(up, backend), as_array(down, backend), backend)

    @property
    def outputs(self) -> list[tuple]:
        return list(zip(self.prob_given_0.tolist(), self.prob_given_1.tolist()))

    def __len__(self) -> int:
        return int(self.prob_given_0.size)

    def bhattacharyya(self) -> float:
        if self.backend is Backend.FLOAT:
            return math.fsum(np.sqrt(self.prob_given_0 * self.prob_given_1).tolist())
        return math.fsum(math.sqrt(float(a * b)) for a, b in self.outputs)


def _check_cap(count: int, cap: int) -> None:
    if count > cap:
        raise OutputOverflowError(f"explicit channel would have {count} outputs, cap is {cap}")


def minus_transform(W: ExplicitChannel, output_cap: int = DEFAULT_OUTPUT_CAP) -> ExplicitChannel:
    """Check-side combining; outputs are pairs ``(y1, y2)``."""
    _check_cap(len(W) ** 2, output_cap)
    w0, w1 = W.prob_given_0, W.prob_given_1
    half = coerce("0.5", W.backend)
    p0 = half * (np.multiply.outer(w0, w0) + np.multiply.outer(w1, w1)).ravel()
    p1 = half * (np.multiply.outer(w1, w0) + np.multiply.outer(w0, w1)).ravel()
    return ExplicitChannel(p0, p1, W.backend)


def plus_transform(W: ExplicitChannel, output_cap: int = DEFAULT_OUTPUT_CAP) -> ExplicitChannel:
    """Variable-side combining; outputs are triples ``(y1, y2, u1)``."""
    _check_cap(2 * len(W) ** 2, output_cap)
    w0, w1 = W.prob_given_0, W.prob_given_1
    half = coerce("0.5", W.backend)
    # u1 = 0 block, then u1 = 1 block
    p0 = half * np.concatenate((np.multiply.outer(w0, w0).ravel(), np.multiply.outer(w1, w0).ravel()))
    p1 = half * np.concatenate((np.multiply.outer(w1, w1).ravel(), np.multiply.outer(w0, w1).ravel()))
    return ExplicitChannel(p0, p1, W.backend)


def lr_merge(W: ExplicitChannel, tolerance: float | None = None) -> ExplicitChannel:
    """Combine outputs whose likelihood ratios agree.

    Rational channels are keyed exactly by ``P(y|0) / (P(y|0) + P(y|1))``.
    Float channels are keyed by the log-likelihood ratio, and neighbours
    within ``tolerance * max(1, |LLR|)`` (default 1e-12) form one output;
    a probability-scale key would blur very reliable outputs together.
    Outputs of probability zero under both inputs are dropped.
    """
    if tolerance is None:
        tolerance = LR_TOL if W.backend is Backend.FLOAT else 0
    p0, p1 = W.prob_given_0, W.prob_given_1
    total = p0 + p1
    live = total != 0
    p0, p1, total = p0[live], p1[live], total[live]
    if p0.size == 0:
        return ExplicitChannel(p0, p1, W.backend)
    if W.backend is Backend.RATIONAL:
        key = p0 / total
    else:
        with np.errstate(divide="ignore"):
            key = np.log(p0) - np.log(p1)
    order = np.argsort(key, kind="stable")
    key, p0, p1 = key[order], p0[order], p1[order]
    if tolerance == 0:
        breaks = key[1:] != key[:-1]
    else:
        with np.errstate(invalid="ignore"):
            gap = key[1:] - key[:-1]
        scale = np.maximum(1.0, np.minimum(np.abs(key[1:]), np.abs(key[:-1])))
        breaks = gap > tolerance * scale
    starts = np.concatenate(([0], np.flatnonzero(np.asarray(breaks, dtype=bool)) + 1))
    return ExplicitChannel(np.add.reduceat(p0, starts), np.add.reduceat(p1, starts), W.backend)


def brute_force_z(
    spec: ChannelSpec,
    pattern: BitPattern | str,
    backend: Backend | str = Backend.FLOAT,
    output_cap: int = DEFAULT_OUTPUT_CAP,
) -> float:
    """Z of a bit-channel by explicit construction of the synthesised channel."""
    if isinstance(pattern, str):
        pattern = BitPattern.parse(pattern)
    W = lr_merge(ExplicitChannel.from_spec(spec, backend))
    for bit in pattern:
        W = minus_transform(W, output_cap) if bit == CHECK else plus_transform(W, output_cap)
        W = lr_merge(W)
    return W.bhattacharyya()


def _check_llr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Check-node LLR rule in a form that avoids tanh saturation."""
    with np.errstate(invalid="ignore"):
        s = np.abs(a + b)
        d = np.abs(a - b)
    s = np.where(np.isnan(s), np.inf, s)
    d = np.where(np.isnan(d), np.inf, d)
    core = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    return core + np.log1p(np.exp(-s)) - np.log1p(np.exp(-d))


def _channel_llrs(spec: ChannelSpec) -> tuple[np.ndarray, np.ndarray]:
    up, down = spec.transition_rows(Backend.FLOAT)
    up = np.asarray(up, dtype=float)
    down = np.asarray(down, dtype=float)
    with np.errstate(divide="ignore"):
        llr = np.log(up) - np.log(down)
    keep = up > 0
    return up[keep] / up[keep].sum(), llr[keep]


def mc_llr_z(
    spec: ChannelSpec,
    pattern: BitPattern | str,
    samples: int,
    seed: int,
    chunk_leaves: int = 1 << 22,
) -> tuple[float, float]:
    """Monte Carlo estimate of Z as the mean of ``exp(-L / 2)``.

    Each sample draws ``2**k`` channel LLRs given input 0 and folds them
    pairwise, one tree level per pattern bit.  Returns the mean and its
    standard error; identical seeds give identical results.
    """
    if isinstance(pattern, str):
        pattern = BitPattern.parse(pattern)
    if samples < MIN_MC_SAMPLES:
        raise ValueError(f"samples must be at least {MIN_MC_SAMPLES}")
    spec.validate()
    probs, llrs = _channel_llrs(spec)
    leaves = 2 ** len(pattern)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    per_chunk = max(1, chunk_leaves // leaves)
    n, mean, m2 = 0, 0.0, 0.0
    remaining = samples
    while remaining:
        size = min(per_chunk, remaining)
        L = llrs[rng.choice(llrs.size, size=(size, leaves), p=probs)]
        for bit in pattern:
            a, b = L[:, 0::2], L[:, 1::2]
            L = _check_llr(a, b) if bit == CHECK else a + b
        y = np.exp(-L[:, 0] / 2)
        cm = float(y.mean())
        cm2 = float(((y - cm) ** 2).sum())
        total = n + size
        delta = cm - mean
        mean += delta * size / total
        m2 += cm2 + delta * delta * n * size / total
        n = total
        remaining -= size
    return mean, math.sqrt(m2 / (n - 1) / n)
