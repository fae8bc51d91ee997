"""Bit-channel indexing.

Bit 0 is the check (minus) transform and bit 1 the variable (plus)
transform.  The bits of ``i - 1`` written in ``k`` binary digits, most
significant first, give the transforms applied to reach bit-channel ``i`` of
``N = 2**k``; the first bit is applied first.  For example bit-channel 6 of 8
is ``"101"``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = ["CHECK", "VAR", "BitPattern", "all_patterns"]

CHECK = 0
VAR = 1

_SYMBOLS = {"0": CHECK, "1": VAR, "⊠": CHECK, "⊛": VAR, "-": CHECK, "+": VAR, "c": CHECK, "v": VAR}


@dataclass(frozen=True)
class BitPattern:
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if not bits:
            raise ValueError("a bit pattern needs at least one bit")
        if any(b not in (CHECK, VAR) for b in bits):
            raise ValueError(f"bits must be 0 (check) or 1 (variable), got {self.bits!r}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def parse(cls, text: str) -> "BitPattern":
        """Accept ``"0110"``, ``"⊠⊛⊛⊠"`` or ``"-++-"``."""
        try:
            return cls(tuple(_SYMBOLS[ch] for ch in text.strip()))
        except KeyError as exc:
            raise ValueError(f"unknown pattern symbol {exc.args[0]!r} in {text!r}") from None

    @classmethod
    def from_index(cls, index: int, level: int) -> "BitPattern":
        """Pattern of bit-channel ``index`` (1-based) at ``level`` polarization steps."""
        if level < 1:
            raise ValueError("level must be at least 1")
        if not 1 <= index <= 2**level:
            raise ValueError(f"index {index} outside 1..{2**level}")
        v = index - 1
        return cls(tuple((v >> (level - 1 - m)) & 1 for m in range(level)))

    @property
    def level(self) -> int:
        return len(self.bits)

    @property
    def index(self) -> int:
        v = 0
        for b in self.bits:
            v = 2 * v + b
        return v + 1

    def __len__(self) -> int:
        return len(self.bits)

    def __iter__(self) -> Iterator[int]:
        return iter(self.bits)

    def __getitem__(self, item):
        return self.bits[item]

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def symbols(self) -> str:
        return "".join("⊛" if b == VAR else "⊠" for b in self.bits)


def all_patterns(level: int) -> Iterable[BitPattern]:
    """Patterns of every bit-channel at ``level``, in index order."""
    return [BitPattern.from_index(i, level) for i in range(1, 2**level + 1)]
