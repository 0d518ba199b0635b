"""Intrusion-detection tests on Receiver 1's qubit-1 outcomes.

Three tests are provided:

* non-blind multiple-preparation: compare the Plus frequency over copies of
  one known state with its known r1**2;
* blind split test: compare the Plus frequencies of two successive parts of
  one campaign, flagging a channel change;
* single-preparation semi-blind: one measurement per random state, compare
  the Plus frequency with the known E{r1**2}.

Thresholds default to Hoeffding bounds at the configured false-alarm level;
a normal-approximation variant is available for power comparisons.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np

from .sampling import Campaign, OutcomeRecord


class Method(str, enum.Enum):
    NON_BLIND_MULTI_PREP = "NonBlindMultiPrep"
    BLIND_SPLIT = "BlindSplit"
    SINGLE_PREP_SEMI_BLIND = "SinglePrepSemiBlind"


class ThresholdKind(str, enum.Enum):
    HOEFFDING = "hoeffding"
    NORMAL = "normal"


class Decision(str, enum.Enum):
    NO_INTRUSION = "NoIntrusion"
    INTRUSION = "Intrusion"
    CHANNEL_CHANGED = "ChannelChanged"


class DetectorConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DetectorConfig:
    method: Method
    alpha: float = 0.05
    prior_r1_sq: float | None = None
    prior_mean_r1_sq: float | None = None
    split_fraction: float = 0.5
    threshold_kind: ThresholdKind = ThresholdKind.HOEFFDING

    def __post_init__(self):
        object.__setattr__(self, "method", Method(self.method))
        object.__setattr__(self, "threshold_kind", ThresholdKind(self.threshold_kind))
        if not 0.0 < self.alpha < 1.0:
            raise DetectorConfigError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not 0.0 < self.split_fraction < 1.0:
            raise DetectorConfigError(f"split_fraction must lie in (0, 1), got {self.split_fraction!r}")
        need = {
            Method.NON_BLIND_MULTI_PREP: "prior_r1_sq",
            Method.SINGLE_PREP_SEMI_BLIND: "prior_mean_r1_sq",
            Method.BLIND_SPLIT: None,
        }[self.method]
        for name in ("prior_r1_sq", "prior_mean_r1_sq"):
            val = getattr(self, name)
            if name == need:
                if val is None:
                    raise DetectorConfigError(f"{self.method.value} requires {name}")
                if not 0.0 <= val <= 1.0:
                    raise DetectorConfigError(f"{name} must lie in [0, 1], got {val!r}")
            elif val is not None:
                raise DetectorConfigError(f"{name} is not used by {self.method.value}")


@dataclass(frozen=True)
class Verdict:
    decision: Decision
    statistic: float
    threshold: float
    n_used: tuple[int, ...] = field(default=())

    @property
    def alarm(self) -> bool:
        return self.decision is not Decision.NO_INTRUSION


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    false_alarm_rate: float
    detection_rate: float


def hoeffding_threshold(n: int, alpha: float, two_sample: bool = False, n_b: int | None = None) -> float:
    """Deviation bound exceeded with probability at most ``alpha``.

    One-sample: ``sqrt(ln(2/alpha) / (2n))`` for a mean of ``n`` variables
    in [0, 1]. Two-sample: the sum of the two one-sample bounds, applied to
    the difference of two means (``n`` and ``n_b`` samples; ``n_b``
    defaults to ``n``).
    """
    _check_n_alpha(n, alpha)
    t = math.sqrt(math.log(2.0 / alpha) / (2.0 * n))
    if not two_sample:
        return t
    if n_b is None:
        return 2.0 * t
    _check_n_alpha(n_b, alpha)
    return t + math.sqrt(math.log(2.0 / alpha) / (2.0 * n_b))


def normal_threshold(n: int, alpha: float, p: float, n_b: int | None = None) -> float:
    """Two-sided normal-approximation counterpart of :func:`hoeffding_threshold`.

    ``p`` is the Bernoulli mean under the null (pooled estimate for the
    two-sample case).
    """
    _check_n_alpha(n, alpha)
    z = NormalDist().inv_cdf(1.0 - alpha / 2.0)
    inv_n = 1.0 / n if n_b is None else 1.0 / n + 1.0 / n_b
    return z * math.sqrt(max(p * (1.0 - p), 0.0) * inv_n)


def _check_n_alpha(n, alpha):
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ValueError(f"sample count must be a positive integer, got {n!r}")
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")


def _decide(statistic: float, threshold: float, alarm: Decision) -> Decision:
    # ties go to the benign decision
    return alarm if statistic > threshold else Decision.NO_INTRUSION


def _require(cfg: DetectorConfig, method: Method):
    if cfg.method is not method:
        raise DetectorConfigError(f"expected a {method.value} config, got {cfg.method.value}")


def detect_nonblind_multiprep(plus_count: int, n: int, cfg: DetectorConfig) -> Verdict:
    _require(cfg, Method.NON_BLIND_MULTI_PREP)
    if n < 1 or not 0 <= plus_count <= n:
        raise ValueError(f"need 0 <= plus_count <= n and n >= 1, got {plus_count}/{n}")
    stat = abs(plus_count / n - cfg.prior_r1_sq)
    if cfg.threshold_kind is ThresholdKind.NORMAL:
        thr = normal_threshold(n, cfg.alpha, cfg.prior_r1_sq)
    else:
        thr = hoeffding_threshold(n, cfg.alpha)
    return Verdict(_decide(stat, thr, Decision.INTRUSION), stat, thr, (n,))


def detect_blind_split(records: Sequence[OutcomeRecord], cfg: DetectorConfig) -> Verdict:
    """Split by arrival order at ``cfg.split_fraction`` and compare the two halves."""
    _require(cfg, Method.BLIND_SPLIT)
    plus = Campaign.from_records(records).plus
    n = len(plus)
    n_a = int(math.floor(cfg.split_fraction * n))
    n_b = n - n_a
    if n_a < 2 or n_b < 2:
        raise ValueError(f"each subset needs at least 2 records, got {n_a} and {n_b}")
    k_a = int(np.count_nonzero(plus[:n_a]))
    k_b = int(np.count_nonzero(plus[n_a:]))
    stat = abs(k_a / n_a - k_b / n_b)
    if cfg.threshold_kind is ThresholdKind.NORMAL:
        thr = normal_threshold(n_a, cfg.alpha, (k_a + k_b) / n, n_b=n_b)
    else:
        thr = hoeffding_threshold(n_a, cfg.alpha, two_sample=True, n_b=n_b)
    return Verdict(_decide(stat, thr, Decision.CHANNEL_CHANGED), stat, thr, (n_a, n_b))


def estimate_expectation_plus(records: Sequence[OutcomeRecord]) -> float:
    """Plus frequency; over single-preparation records this estimates E{P(R1=+)}."""
    c = Campaign.from_records(records)
    if len(c) == 0:
        raise ValueError("cannot estimate from an empty record set")
    return c.plus_count / len(c)


def detect_singleprep(records: Sequence[OutcomeRecord], cfg: DetectorConfig) -> Verdict:
    _require(cfg, Method.SINGLE_PREP_SEMI_BLIND)
    c = Campaign.from_records(records)
    k = len(c)
    if k == 0:
        raise ValueError("cannot run the single-preparation test on an empty record set")
    stat = abs(c.plus_count / k - cfg.prior_mean_r1_sq)
    if cfg.threshold_kind is ThresholdKind.NORMAL:
        thr = normal_threshold(k, cfg.alpha, cfg.prior_mean_r1_sq)
    else:
        thr = hoeffding_threshold(k, cfg.alpha)
    return Verdict(_decide(stat, thr, Decision.INTRUSION), stat, thr, (k,))


def detect(records: Sequence[OutcomeRecord], cfg: DetectorConfig) -> Verdict:
    """Dispatch on ``cfg.method``."""
    if cfg.method is Method.NON_BLIND_MULTI_PREP:
        c = Campaign.from_records(records)
        return detect_nonblind_multiprep(c.plus_count, len(c), cfg)
    if cfg.method is Method.BLIND_SPLIT:
        return detect_blind_split(records, cfg)
    return detect_singleprep(records, cfg)


def roc_curve(case0_stats, case1_stats, grid) -> list[RocPoint]:
    """Empirical false-alarm / detection rates for each threshold in ``grid``.

    A statistic counts as an alarm when it strictly exceeds the threshold.
    """
    s0 = np.asarray(case0_stats, dtype=float)
    s1 = np.asarray(case1_stats, dtype=float)
    g = np.asarray(grid, dtype=float)
    if s0.size == 0 or s1.size == 0 or g.size == 0:
        raise ValueError("statistics and grid must be nonempty")
    if np.any(np.diff(g) < 0):
        raise ValueError("grid must be sorted ascending")
    s0.sort()
    s1.sort()
    fa = 1.0 - np.searchsorted(s0, g, side="right") / s0.size
    det = 1.0 - np.searchsorted(s1, g, side="right") / s1.size
    return [RocPoint(float(t), float(a), float(d)) for t, a, d in zip(g, fa, det)]


def roc_auc(points: Sequence[RocPoint]) -> float:
    """Trapezoidal area under the ROC points, closed with (0, 0) and (1, 1)."""
    xy = sorted({(0.0, 0.0), (1.0, 1.0), *((p.false_alarm_rate, p.detection_rate) for p in points)})
    x = np.array([a for a, _ in xy])
    y = np.array([b for _, b in xy])
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))
