"""Float formatting shared by the CSV/JSON writers.

Everything numeric is written with 17 significant digits, which is enough
for float64 -> text -> float64 round trips to be bit exact.
"""

from __future__ import annotations


def fmt(x: float) -> str:
    return format(float(x), ".17g")
