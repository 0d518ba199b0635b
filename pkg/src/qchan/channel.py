"""Exchange-coupled two-qubit channel.

Closed-form joint and qubit-1 marginal probabilities after the coupling
interval, the brute-force 4x4 unitary used to cross-check them, and the
blind-spot residual of the non-blind detector.

The array functions (``*_array``) accept broadcastable numpy inputs and are
what the Monte Carlo campaigns call; the scalar functions wrap them for the
dataclass API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .qubit import QubitPolar, TwoQubitAmplitudes, wrap_phase

PROB_TOL = 1e-12


def _sgn(x):
    # sgn(0) := +1; immaterial for every probability since the cross term
    # carries sqrt(1 - v**2) = |cos(delta)| = 0 there
    return np.where(np.asarray(x) >= 0.0, 1.0, -1.0)


@dataclass(frozen=True)
class CouplingStrength:
    """Coupling over one interval.

    ``jxy_dt_over_hbar`` is J_xy * (t - t0) / hbar, ``delta`` its negation
    and ``v = sgn(cos delta) * sin delta`` the single mixing parameter seen
    by the measurement probabilities.
    """

    jxy_dt_over_hbar: float
    delta: float
    v: float

    def __post_init__(self):
        if not math.isfinite(self.jxy_dt_over_hbar):
            raise ValueError("coupling must be finite")
        if self.delta != -self.jxy_dt_over_hbar:
            raise ValueError("delta must equal -jxy_dt_over_hbar")
        if not -1.0 <= self.v <= 1.0:
            raise ValueError(f"v must lie in [-1, 1], got {self.v!r}")

    @property
    def v_sq(self) -> float:
        return self.v * self.v


def coupling_from_physical(jxy_dt_over_hbar: float) -> CouplingStrength:
    x = float(jxy_dt_over_hbar)
    if not math.isfinite(x):
        raise ValueError(f"coupling must be finite, got {jxy_dt_over_hbar!r}")
    delta = -x
    v = float(_sgn(math.cos(delta))) * math.sin(delta)
    # the x == 0 branch keeps v an exact zero (not -0.0) for the no-coupling case
    return CouplingStrength(x, delta, 0.0 if x == 0.0 else v)


def coupling_from_v(v: float) -> CouplingStrength:
    """Coupling with a given mixing parameter, choosing delta in [-pi/2, pi/2]."""
    v = float(v)
    if not (math.isfinite(v) and -1.0 <= v <= 1.0):
        raise ValueError(f"v must lie in [-1, 1], got {v!r}")
    delta = math.asin(v)
    # keep the caller's v bit-exact; sin(asin(v)) can be off by an ulp
    return CouplingStrength(-delta, delta, v)


NO_COUPLING = coupling_from_physical(0.0)


@dataclass(frozen=True)
class PreparationPair:
    qubit1: QubitPolar
    qubit2: QubitPolar

    @property
    def delta_i(self) -> float:
        """Initial phase combination (phi2 - theta2) - (phi1 - theta1)."""
        q1, q2 = self.qubit1, self.qubit2
        return wrap_phase((q2.phi - q2.theta) - (q1.phi - q1.theta))


@dataclass(frozen=True)
class JointProbs:
    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float

    def __post_init__(self):
        vals = self.as_tuple()
        if any(not 0.0 <= p <= 1.0 for p in vals):
            raise ValueError(f"probabilities must lie in [0, 1], got {vals}")
        if abs(sum(vals) - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities must sum to 1, got {sum(vals)!r}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_pp, self.p_pm, self.p_mp, self.p_mm)

    @property
    def plus_q1(self) -> float:
        return self.p_pp + self.p_pm


def _clamp_probs(p: np.ndarray) -> np.ndarray:
    bad = ~np.isfinite(p) | (p < -PROB_TOL) | (p > 1.0 + PROB_TOL)
    if np.any(bad):
        raise RuntimeError(
            f"closed-form probability outside [0, 1] beyond tolerance: {p[bad][:4]}"
        )
    return np.clip(p, 0.0, 1.0)


def joint_probabilities_array(r1, r2, delta_i, v) -> np.ndarray:
    """Joint probabilities, stacked on a new leading axis of length 4.

    Order is (++, +-, -+, --). The -+ entry is obtained from the sum-to-one
    constraint.
    """
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    v = np.asarray(v, dtype=float)
    r1s, r2s, vs = r1 * r1, r2 * r2, v * v
    q1s, q2s = 1.0 - r1s, 1.0 - r2s
    cross = (
        2.0 * r1 * r2 * np.sqrt(q1s) * np.sqrt(q2s)
        * np.sqrt(np.maximum(1.0 - vs, 0.0)) * v * np.sin(delta_i)
    )
    p_pp = r1s * r2s
    p_pm = r1s * q2s * (1.0 - vs) + q1s * r2s * vs - cross
    p_mm = q1s * q2s
    p_mp = 1.0 - p_pp - p_pm - p_mm
    p_pp, p_pm, p_mp, p_mm = np.broadcast_arrays(p_pp, p_pm, p_mp, p_mm)
    return _clamp_probs(np.stack([p_pp, p_pm, p_mp, p_mm]))


def marginal_plus_array(r1, r2, delta_i, v) -> np.ndarray:
    """P(qubit 1 measured +) in its expanded form, without going through the joints."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    v = np.asarray(v, dtype=float)
    r1s, r2s, vs = r1 * r1, r2 * r2, v * v
    p = (
        r1s + vs * (r2s - r1s)
        - 2.0 * r1 * r2 * np.sqrt(1.0 - r1s) * np.sqrt(1.0 - r2s)
        * np.sqrt(np.maximum(1.0 - vs, 0.0)) * v * np.sin(delta_i)
    )
    return _clamp_probs(p)


def joint_probabilities(prep: PreparationPair, c: CouplingStrength) -> JointProbs:
    p = joint_probabilities_array(prep.qubit1.r, prep.qubit2.r, prep.delta_i, c.v)
    return JointProbs(*(float(x) for x in p))


def marginal_plus_qubit1(prep: PreparationPair, c: CouplingStrength) -> float:
    return float(marginal_plus_array(prep.qubit1.r, prep.qubit2.r, prep.delta_i, c.v))


def blind_spot_residual(prep: PreparationPair, c: CouplingStrength) -> float:
    """Distance between the coupled qubit-1 marginal and its uncoupled value r1**2.

    Zero means the deterministic non-blind detector cannot tell the two
    channel hypotheses apart at these parameters.
    """
    return abs(marginal_plus_qubit1(prep, c) - prep.qubit1.r ** 2)


# Sign of the off-diagonal i*sin(delta) entries of the mixing block. -1 is
# the value for which the squared moduli reproduce the closed-form cross
# term -2 r1 r2 q1 q2 sqrt(1-v^2) v sin(dI); equivalently the block is
# exp(-i delta sigma_x), i.e. exp(-i delta (XX + YY) / 2) on the pair.
MIXING_SIGN = -1.0


def oracle_unitary(delta: float, diag_phases: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """4x4 unitary of the coupling interval in the (++, +-, -+, --) basis."""
    a, b = diag_phases
    c, s = math.cos(delta), math.sin(delta)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = np.exp(-1j * a)
    u[3, 3] = np.exp(-1j * b)
    u[1, 1] = u[2, 2] = c
    u[1, 2] = u[2, 1] = MIXING_SIGN * 1j * s
    return u


def oracle_evolve(
    initial: TwoQubitAmplitudes,
    c: CouplingStrength,
    diag_phases: tuple[float, float] | None = None,
) -> TwoQubitAmplitudes:
    """Evolve a two-qubit state by explicit matrix-vector multiplication."""
    u = oracle_unitary(c.delta, diag_phases or (0.0, 0.0))
    out = u @ np.array(initial.as_tuple(), dtype=complex)
    return TwoQubitAmplitudes(*(complex(x) for x in out))
