"""Single- and two-qubit pure states in the {|+>, |->} basis.

Everything here is an immutable value; operations are pure functions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi
NORM_TOL = 1e-12


def wrap_phase(x: float) -> float:
    """Reduce an angle into [0, 2*pi)."""
    y = math.fmod(x, TWO_PI)
    if y < 0.0:
        y += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    if y >= TWO_PI:
        y = 0.0
    return y


@dataclass(frozen=True)
class QubitPolar:
    """Polar preparation parameters of one qubit.

    ``r`` is the modulus of the |+> coefficient, ``theta`` and ``phi`` the
    phases of the |+> and |-> coefficients. The |-> modulus is always
    derived as ``sqrt(1 - r**2)``.
    """

    r: float
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.r) and 0.0 <= self.r <= 1.0):
            raise ValueError(f"modulus r must lie in [0, 1], got {self.r!r}")
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValueError("phases must be finite")
        object.__setattr__(self, "r", float(self.r))
        object.__setattr__(self, "theta", wrap_phase(float(self.theta)))
        object.__setattr__(self, "phi", wrap_phase(float(self.phi)))

    @property
    def q(self) -> float:
        return math.sqrt(1.0 - self.r * self.r)


@dataclass(frozen=True)
class ComplexAmplitudePair:
    alpha: complex
    beta: complex

    def __post_init__(self):
        n = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(n - 1.0) > NORM_TOL:
            raise ValueError(f"qubit state not normalized (norm^2 = {n!r})")

    @property
    def norm_sq(self) -> float:
        return abs(self.alpha) ** 2 + abs(self.beta) ** 2

    def to_polar(self) -> QubitPolar:
        # phases of a zero coefficient are meaningless; cmath.phase returns 0
        return QubitPolar(abs(self.alpha), cmath.phase(self.alpha), cmath.phase(self.beta))


@dataclass(frozen=True)
class TwoQubitAmplitudes:
    """Amplitudes on |++>, |+->, |-+>, |--> (in that order)."""

    c_pp: complex
    c_pm: complex
    c_mp: complex
    c_mm: complex

    def __post_init__(self):
        n = self.norm_sq
        if abs(n - 1.0) > NORM_TOL:
            raise ValueError(f"two-qubit state not normalized (norm^2 = {n!r})")

    @property
    def norm_sq(self) -> float:
        return sum(abs(c) ** 2 for c in self.as_tuple())

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.c_pp, self.c_pm, self.c_mp, self.c_mm)

    def probabilities(self) -> tuple[float, float, float, float]:
        """Squared moduli of the four amplitudes."""
        return tuple(abs(c) ** 2 for c in self.as_tuple())


@dataclass(frozen=True)
class FreeEvolutionParams:
    omega_p: float = 0.0
    omega_m: float = 0.0
    dt: float = 0.0

    def __post_init__(self):
        if not self.dt >= 0.0:
            raise ValueError(f"dt must be non-negative, got {self.dt!r}")


def polar_to_amplitudes(p: QubitPolar) -> ComplexAmplitudePair:
    return ComplexAmplitudePair(
        alpha=p.r * cmath.exp(1j * p.theta),
        beta=p.q * cmath.exp(1j * p.phi),
    )


def tensor_product(q1: ComplexAmplitudePair, q2: ComplexAmplitudePair) -> TwoQubitAmplitudes:
    return TwoQubitAmplitudes(
        c_pp=q1.alpha * q2.alpha,
        c_pm=q1.alpha * q2.beta,
        c_mp=q1.beta * q2.alpha,
        c_mm=q1.beta * q2.beta,
    )


def free_evolve(q: ComplexAmplitudePair, f: FreeEvolutionParams) -> ComplexAmplitudePair:
    """Uncoupled evolution: each basis coefficient only picks up a phase."""
    return ComplexAmplitudePair(
        alpha=q.alpha * cmath.exp(-1j * f.omega_p * f.dt),
        beta=q.beta * cmath.exp(-1j * f.omega_m * f.dt),
    )
