"""Exact comparison against the doubly exponential bounds ``n^(2^d)``.

The bounds are astronomically large for realistic depths, so they are kept
symbolic as ``(base, exponent_log2)`` and only materialised when the result
stays within a few thousand bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_MAX_BITS = 1 << 16


@dataclass(frozen=True)
class TowerBound:
    """The number ``base ** (2 ** level)``."""

    base: int
    level: int

    def log2(self) -> float:
        if self.base <= 1:
            return 0.0
        return (2.0**self.level) * math.log2(self.base)

    def exact(self):
        """The integer value, or None when it would exceed the materialisation limit."""
        if self.base <= 1:
            return self.base
        if self.log2() > _MAX_BITS:
            return None
        return self.base ** (2**self.level)

    def admits(self, value: int) -> bool:
        """``value <= base ** (2 ** level)``."""
        if value <= 0:
            return True
        exact = self.exact()
        if exact is not None:
            return value <= exact
        # value itself is a Python int of modest size; the bound is beyond
        # 2^65536, so only a gigantic value could exceed it
        return math.log2(value) <= self.log2()

    def __str__(self):
        exact = self.exact()
        if exact is not None and exact < 10**15:
            return str(exact)
        return f"{self.base}^(2^{self.level})"

    def to_json(self):
        exact = self.exact()
        if exact is not None and exact < 10**15:
            return exact
        return {"base": self.base, "exponent": f"2^{self.level}", "log10": round(self.log2() * math.log10(2), 2)}
