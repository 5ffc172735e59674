"""Pacing functions: map training progress to the usable dataset fraction.

All four families start at exactly b, reach exactly 1 at a * T_total
iterations, and are non-decreasing in between. With progress
x = t / (a * T_total), the closed forms are

    log:    b + (1-b) * (1 + 0.1 * ln(x + e^-10)), clamped to [b, 1]
    root:   b + (1-b) * sqrt(x)
    linear: b + (1-b) * x
    exp:    b + (1-b) * (e^(10x) - 1) / (e^10 - 1)

which orders them fastest (log) to slowest (exp) at the start of
training. The boundary values are returned via explicit special cases;
the closed forms cannot hit b and 1 exactly in floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError

FAMILIES = ("log", "root", "linear", "exp")


@dataclass(frozen=True)
class PacingSpec:
    family: str
    b: float = 0.2  # initial dataset fraction
    a: float = 0.8  # fraction of total iterations at which the full set is in use

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not 0 < self.b <= 1:
            raise ConfigurationError(f"b must be in (0, 1], got {self.b}")
        if not 0 < self.a <= 1:
            raise ConfigurationError(f"a must be in (0, 1], got {self.a}")


def pacing_fraction(spec: PacingSpec, t: float, total_iterations: float) -> float:
    """Usable fraction of the ordered dataset after t of T_total iterations."""
    if t < 0:
        raise ConfigurationError(f"t must be >= 0, got {t}")
    if total_iterations < 1:
        raise ConfigurationError(f"total_iterations must be >= 1, got {total_iterations}")
    saturation = spec.a * total_iterations
    if t <= 0:
        return spec.b
    if t >= saturation:
        return 1.0
    x = t / saturation
    if x >= 1.0:
        return 1.0
    b = spec.b
    if spec.family == "linear":
        return b + (1.0 - b) * x
    if spec.family == "root":
        return b + (1.0 - b) * math.sqrt(x)
    if spec.family == "exp":
        return b + (1.0 - b) * math.expm1(10.0 * x) / math.expm1(10.0)
    value = b + (1.0 - b) * (1.0 + 0.1 * math.log(x + math.exp(-10.0)))
    return min(max(value, b), 1.0)
