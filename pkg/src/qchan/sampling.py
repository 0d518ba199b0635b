"""Seeded preparation and measurement sampling.

Randomness comes from :class:`RngState`, a Philox (counter-based) generator
keyed by a seed and a substream path, so any (repetition, purpose) pair can be
reproduced independently of the order in which campaigns are executed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

from .channel import (
    JointProbs,
    PreparationPair,
    coupling_from_physical,
    joint_probabilities_array,
)
from .qubit import TWO_PI, QubitPolar

if TYPE_CHECKING:
    from .scenario import ScenarioConfig

U64_MAX = 2**64 - 1

# substream purposes inside one campaign
_PREP_STREAM = 0
_MEAS_STREAM = 1


def _check_u64(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, np.integer)) or not 0 <= x <= U64_MAX:
        raise ValueError(f"{what} must be an unsigned 64-bit integer, got {x!r}")
    return int(x)


class RngState:
    """A reproducible random stream identified by ``(seed, stream)``.

    ``stream`` is a tuple of unsigned 64-bit keys (a bare int is accepted and
    wrapped). Drawing from :attr:`generator` advances the state; use
    :meth:`substream` to derive independent child streams.
    """

    def __init__(self, seed: int, stream: int | Sequence[int] = ()):
        self.seed = _check_u64(seed, "seed")
        if isinstance(stream, (int, np.integer)):
            stream = (stream,)
        self.stream = tuple(_check_u64(k, "stream key") for k in stream)
        ss = np.random.SeedSequence(self.seed, spawn_key=self.stream)
        self.generator = np.random.Generator(np.random.Philox(ss))

    def substream(self, *keys: int) -> "RngState":
        return RngState(self.seed, self.stream + keys)

    def random(self, size=None):
        return self.generator.random(size)

    def __repr__(self):
        return f"RngState(seed={self.seed}, stream={self.stream})"


class ModulusKind(str, enum.Enum):
    FIXED = "Fixed"
    UNIFORM_MOD_SQ = "RandomUniformModSq"
    UNIFORM_MOD = "RandomUniformMod"


class PhaseKind(str, enum.Enum):
    FIXED = "FixedPhases"
    UNIFORM = "UniformPhases"


@dataclass(frozen=True)
class StateDistribution:
    """Law of one emitter's preparations.

    For ``Fixed`` the modulus is ``r``; ``RandomUniformModSq`` draws r**2
    uniformly on ``[lo, hi]`` and ``RandomUniformMod`` draws r uniformly on
    ``[lo, hi]``. Phases are either the fixed ``(theta, phi)`` or drawn
    independently and uniformly on [0, 2*pi).
    """

    kind: ModulusKind
    r: float | None = None
    lo: float | None = None
    hi: float | None = None
    phase_kind: PhaseKind = PhaseKind.FIXED
    theta: float = 0.0
    phi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModulusKind(self.kind))
        object.__setattr__(self, "phase_kind", PhaseKind(self.phase_kind))
        if self.kind is ModulusKind.FIXED:
            if self.r is None or not 0.0 <= self.r <= 1.0:
                raise ValueError(f"fixed modulus must lie in [0, 1], got {self.r!r}")
        else:
            if self.lo is None or self.hi is None or not 0.0 <= self.lo <= self.hi <= 1.0:
                raise ValueError(f"need 0 <= lo <= hi <= 1, got lo={self.lo!r}, hi={self.hi!r}")

    @classmethod
    def fixed(cls, p: QubitPolar) -> "StateDistribution":
        return cls(ModulusKind.FIXED, r=p.r, theta=p.theta, phi=p.phi)

    @classmethod
    def uniform_mod_sq(cls, lo=0.0, hi=1.0, phases=PhaseKind.UNIFORM, theta=0.0, phi=0.0):
        return cls(ModulusKind.UNIFORM_MOD_SQ, lo=lo, hi=hi, phase_kind=phases, theta=theta, phi=phi)

    @classmethod
    def uniform_mod(cls, lo=0.0, hi=1.0, phases=PhaseKind.UNIFORM, theta=0.0, phi=0.0):
        return cls(ModulusKind.UNIFORM_MOD, lo=lo, hi=hi, phase_kind=phases, theta=theta, phi=phi)

    @property
    def is_fixed(self) -> bool:
        return self.kind is ModulusKind.FIXED and self.phase_kind is PhaseKind.FIXED

    @property
    def mean_r_sq(self) -> float:
        """E{r**2} under this law."""
        if self.kind is ModulusKind.FIXED:
            return self.r * self.r
        lo, hi = self.lo, self.hi
        if self.kind is ModulusKind.UNIFORM_MOD_SQ:
            return 0.5 * (lo + hi)
        if hi == lo:
            return lo * lo
        return (hi**3 - lo**3) / (3.0 * (hi - lo))

    def draw(self, gen: np.random.Generator, size: int):
        """Draw ``size`` preparations as arrays ``(r, theta, phi)``."""
        if self.kind is ModulusKind.FIXED:
            r = np.full(size, self.r)
        elif self.kind is ModulusKind.UNIFORM_MOD_SQ:
            r = np.sqrt(gen.uniform(self.lo, self.hi, size))
        else:
            r = gen.uniform(self.lo, self.hi, size)
        if self.phase_kind is PhaseKind.UNIFORM:
            theta = gen.uniform(0.0, TWO_PI, size)
            phi = gen.uniform(0.0, TWO_PI, size)
        else:
            theta = np.full(size, self.theta)
            phi = np.full(size, self.phi)
        return r, theta, phi


class Marginal(str, enum.Enum):
    PLUS = "P"
    MINUS = "M"


class JointOutcome(str, enum.Enum):
    PP = "PP"
    PM = "PM"
    MP = "MP"
    MM = "MM"


JOINT_CODES = (JointOutcome.PP, JointOutcome.PM, JointOutcome.MP, JointOutcome.MM)


@dataclass(frozen=True)
class OutcomeRecord:
    """One measurement as seen by Receiver 1.

    ``joint`` is ``None`` when redacted; ``prep_q1`` is only kept for
    non-blind scenarios. Qubit-2 preparation data is never recorded.
    """

    trial_index: int
    marginal_q1: Marginal
    joint: JointOutcome | None = None
    prep_q1: QubitPolar | None = None

    def __post_init__(self):
        if self.joint is not None:
            plus = self.joint in (JointOutcome.PP, JointOutcome.PM)
            if plus != (self.marginal_q1 is Marginal.PLUS):
                raise ValueError("marginal outcome inconsistent with joint outcome")


def _joint_codes(probs: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Categorical draw from uniforms: code k is chosen when cum[k-1] <= u < cum[k]."""
    cum = np.cumsum(probs[:3], axis=0)
    return (u[None, ...] >= cum).sum(axis=0).astype(np.int8)


def sample_preparations(d1: StateDistribution, d2: StateDistribution, rng: RngState, size: int):
    """Vectorized draw; returns ``(r1, theta1, phi1, r2, theta2, phi2)`` arrays."""
    return d1.draw(rng.generator, size) + d2.draw(rng.generator, size)


def sample_preparation(d1: StateDistribution, d2: StateDistribution, rng: RngState) -> PreparationPair:
    r1, t1, f1, r2, t2, f2 = (float(a[0]) for a in sample_preparations(d1, d2, rng, 1))
    return PreparationPair(QubitPolar(r1, t1, f1), QubitPolar(r2, t2, f2))


def measure_joint(probs: JointProbs, rng: RngState, trial_index: int = 0) -> OutcomeRecord:
    u = np.array([rng.random()])
    code = int(_joint_codes(np.array(probs.as_tuple())[:, None], u)[0])
    joint = JOINT_CODES[code]
    m = Marginal.PLUS if code <= 1 else Marginal.MINUS
    return OutcomeRecord(trial_index, m, joint)


def measure_marginal_q1(p_plus: float, rng: RngState, trial_index: int = 0) -> OutcomeRecord:
    if not (math.isfinite(p_plus) and 0.0 <= p_plus <= 1.0):
        raise ValueError(f"p_plus must lie in [0, 1], got {p_plus!r}")
    m = Marginal.PLUS if rng.random() < p_plus else Marginal.MINUS
    return OutcomeRecord(trial_index, m)


@dataclass
class Campaign:
    """Columnar outcome sequence of one campaign.

    Behaves as a sequence of :class:`OutcomeRecord`; detectors read the
    arrays directly.
    """

    plus: np.ndarray
    joint: np.ndarray | None = None
    prep_q1: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def __len__(self):
        return len(self.plus)

    @property
    def plus_count(self) -> int:
        return int(np.count_nonzero(self.plus))

    def __getitem__(self, i: int) -> OutcomeRecord:
        if i < 0:
            i += len(self)
        if not 0 <= i < len(self):
            raise IndexError(i)
        joint = None if self.joint is None else JOINT_CODES[int(self.joint[i])]
        prep = None
        if self.prep_q1 is not None:
            prep = QubitPolar(*(float(a[i]) for a in self.prep_q1))
        m = Marginal.PLUS if self.plus[i] else Marginal.MINUS
        return OutcomeRecord(i, m, joint, prep)

    def __iter__(self) -> Iterator[OutcomeRecord]:
        return (self[i] for i in range(len(self)))

    @classmethod
    def from_records(cls, records: Sequence[OutcomeRecord]) -> "Campaign":
        if isinstance(records, Campaign):
            return records
        plus = np.array([r.marginal_q1 is Marginal.PLUS for r in records], dtype=bool)
        return cls(plus)


def run_campaign(scenario: "ScenarioConfig", rng: RngState) -> Campaign:
    """Simulate one campaign of ``scenario.n_preparations`` measurements.

    Multiple-preparation mode repeats one fixed preparation pair; single-
    preparation mode draws a fresh pair for every trial. If the scenario sets
    ``switch_fraction``, trials before that point run on the uncoupled channel.
    """
    n = scenario.n_preparations
    d1, d2 = scenario.emitter1, scenario.emitter2
    prep_rng = rng.substream(_PREP_STREAM)
    if scenario.mode == "MultiplePrep":
        one = sample_preparations(d1, d2, prep_rng, 1)
        r1, t1, f1, r2, t2, f2 = (np.repeat(a, n) for a in one)
    else:
        r1, t1, f1, r2, t2, f2 = sample_preparations(d1, d2, prep_rng, n)

    v = np.full(n, scenario.effective_coupling.v)
    if scenario.switch_fraction is not None:
        v[: int(math.floor(scenario.switch_fraction * n))] = coupling_from_physical(0.0).v

    delta_i = (f2 - t2) - (f1 - t1)
    probs = joint_probabilities_array(r1, r2, delta_i, v)
    u = rng.substream(_MEAS_STREAM).random(n)
    codes = _joint_codes(probs, u)
    return Campaign(
        plus=codes <= 1,
        joint=codes if scenario.record_joint else None,
        prep_q1=(r1, t1, f1) if scenario.observable_q1 else None,
    )
