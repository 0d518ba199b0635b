"""Experiment orchestration behind the command-line tool.

Every repetition ``k`` of a scenario draws from ``RngState(seed).substream(k)``,
so results do not depend on the order in which repetitions run.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .channel import (
    PreparationPair,
    coupling_from_physical,
    joint_probabilities,
    oracle_evolve,
)
from .detectors import RocPoint, Verdict, detect, estimate_expectation_plus, roc_curve
from .qubit import TWO_PI, QubitPolar, polar_to_amplitudes, tensor_product
from .sampling import Campaign, RngState, run_campaign
from .scenario import ScenarioConfig

SIMULATE_HEADER = ("repetition", "trial", "marginal_q1", "joint", "r1", "theta1", "phi1")
DETECT_HEADER = ("repetition", "method", "case_truth", "statistic", "threshold", "decision", "correct")
ROC_HEADER = ("threshold", "false_alarm_rate", "detection_rate")


def fmt(x: float) -> str:
    """17 significant digits: lossless for doubles."""
    return format(float(x), ".17g")


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def repetition_rng(scenario: ScenarioConfig, rep: int) -> RngState:
    return RngState(scenario.seed).substream(rep)


def campaigns(scenario: ScenarioConfig) -> Iterable[tuple[int, Campaign]]:
    for rep in range(scenario.repetitions):
        yield rep, run_campaign(scenario, repetition_rng(scenario, rep))


def simulate_rows(rep: int, c: Campaign) -> Iterable[list[str]]:
    marg = np.where(c.plus, "P", "M")
    joint = [""] * len(c) if c.joint is None else np.array(["PP", "PM", "MP", "MM"])[c.joint]
    if c.prep_q1 is None:
        blank = [""] * len(c)
        r, th, ph = blank, blank, blank
    else:
        r1, t1, f1 = c.prep_q1
        r = [fmt(x) for x in r1]
        th = [fmt(x) for x in np.mod(t1, TWO_PI)]
        ph = [fmt(x) for x in np.mod(f1, TWO_PI)]
    for i in range(len(c)):
        yield [str(rep), str(i), marg[i], joint[i], r[i], th[i], ph[i]]


def write_simulation(scenario: ScenarioConfig, fh) -> int:
    w = _writer(fh)
    w.writerow(SIMULATE_HEADER)
    n = 0
    for rep, c in campaigns(scenario):
        w.writerows(simulate_rows(rep, c))
        n += len(c)
    return n


@dataclass
class CampaignSummary:
    scenario_hash: str
    method: str
    case_truth: str
    expects_alarm: bool
    verdicts: list[Verdict] = field(default_factory=list)
    estimates: list[float] = field(default_factory=list)
    duration_s: float = 0.0

    @property
    def alarm_rate(self) -> float:
        return float(np.mean([v.alarm for v in self.verdicts]))

    @property
    def correct_rate(self) -> float:
        return float(np.mean([v.alarm == self.expects_alarm for v in self.verdicts]))

    @property
    def detection_rate(self) -> float | None:
        return self.alarm_rate if self.expects_alarm else None

    @property
    def false_alarm_rate(self) -> float | None:
        return None if self.expects_alarm else self.alarm_rate

    def describe(self) -> str:
        label = "detection rate" if self.expects_alarm else "false-alarm rate"
        k = sum(v.alarm for v in self.verdicts)
        return (
            f"scenario {self.scenario_hash[:12]}  method={self.method}  case={self.case_truth}\n"
            f"  {label}: {self.alarm_rate:.4f} ({k}/{len(self.verdicts)})\n"
            f"  correct decisions: {self.correct_rate:.4f}\n"
            f"  mean Plus frequency: {np.mean(self.estimates):.6f}\n"
            f"  wall-clock: {self.duration_s:.2f} s"
        )


def run_detection(scenario: ScenarioConfig) -> CampaignSummary:
    if scenario.detector is None:
        raise ValueError("scenario has no detector block")
    t0 = time.perf_counter()
    summary = CampaignSummary(
        scenario.digest(), scenario.detector.method.value, scenario.case_truth, scenario.expects_alarm
    )
    for _, c in campaigns(scenario):
        summary.verdicts.append(detect(c, scenario.detector))
        summary.estimates.append(estimate_expectation_plus(c))
    summary.duration_s = time.perf_counter() - t0
    return summary


def write_detection(summary: CampaignSummary, fh):
    w = _writer(fh)
    w.writerow(DETECT_HEADER)
    for rep, v in enumerate(summary.verdicts):
        w.writerow([
            rep, summary.method, summary.case_truth, fmt(v.statistic), fmt(v.threshold),
            v.decision.value, int(v.alarm == summary.expects_alarm),
        ])


def parse_grid(spec: str | None) -> np.ndarray | None:
    """``None``/``"auto"``, ``"start:stop:num"`` (linspace) or a comma list."""
    if spec is None or spec == "auto":
        return None
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            return np.linspace(float(a), float(b), int(n))
        return np.array([float(x) for x in spec.split(",")])
    except ValueError:
        raise ValueError(f"bad grid spec {spec!r}; use auto, start:stop:num or t1,t2,...") from None


def run_roc(scenario: ScenarioConfig, grid: Sequence[float] | None = None):
    """ROC from the Case 0 and Case 1 variants of one scenario.

    Returns ``(points, case0_summary, case1_summary)``. With no grid, the
    thresholds are every observed statistic plus one value below and one
    above them all, which traces the full empirical curve.
    """
    s0 = run_detection(scenario.with_case("Case0"))
    s1 = run_detection(scenario.with_case("Case1"))
    st0 = [v.statistic for v in s0.verdicts]
    st1 = [v.statistic for v in s1.verdicts]
    if grid is None:
        grid = np.unique(np.concatenate([[-1.0, 2.0], st0, st1]))
    return roc_curve(st0, st1, grid), s0, s1


def write_roc(points: Sequence[RocPoint], fh):
    w = _writer(fh)
    w.writerow(ROC_HEADER)
    for p in points:
        w.writerow([fmt(p.threshold), fmt(p.false_alarm_rate), fmt(p.detection_rate)])


@dataclass
class OracleReport:
    trials: int
    max_discrepancy: float
    worst: dict[str, float]

    def passed(self, tolerance: float) -> bool:
        return self.max_discrepancy <= tolerance

    def describe(self) -> str:
        w = ", ".join(f"{k}={fmt(v)}" for k, v in self.worst.items())
        return f"trials={self.trials} max_discrepancy={self.max_discrepancy:.3e}\nworst: {w}"


def oracle_check(trials: int, seed: int = 0) -> OracleReport:
    """Compare the closed-form joint probabilities with the explicit unitary.

    Each trial draws qubit moduli and phases uniformly, a coupling angle
    uniformly in [-pi, pi) and random diagonal phases for the oracle.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    g = RngState(seed).generator
    worst_err, worst = -1.0, {}
    for _ in range(trials):
        r1, r2 = g.random(2)
        t1, f1, t2, f2, a, b = g.uniform(0.0, TWO_PI, 6)
        delta = g.uniform(-math.pi, math.pi)
        prep = PreparationPair(QubitPolar(r1, t1, f1), QubitPolar(r2, t2, f2))
        c = coupling_from_physical(-delta)
        state = tensor_product(polar_to_amplitudes(prep.qubit1), polar_to_amplitudes(prep.qubit2))
        brute = oracle_evolve(state, c, (a, b)).probabilities()
        closed = joint_probabilities(prep, c).as_tuple()
        err = max(abs(x - y) for x, y in zip(brute, closed))
        if err > worst_err:
            worst_err = err
            worst = dict(r1=r1, theta1=t1, phi1=f1, r2=r2, theta2=t2, phi2=f2, delta=delta)
    return OracleReport(trials, worst_err, worst)


def write_oracle_report(report: OracleReport, tolerance: float, fh):
    w = _writer(fh)
    keys = list(report.worst)
    w.writerow(["trials", "tolerance", "max_discrepancy", "passed", *keys])
    w.writerow([
        report.trials, fmt(tolerance), fmt(report.max_discrepancy), int(report.passed(tolerance)),
        *(fmt(report.worst[k]) for k in keys),
    ])


def to_csv_text(write, *args) -> str:
    buf = io.StringIO()
    write(*args, buf)
    return buf.getvalue()
