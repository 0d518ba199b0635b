import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import MULTI_DOC, SINGLE_DOC
from qchan.detectors import (
    Decision,
    DetectorConfig,
    DetectorConfigError,
    Method,
    RocPoint,
    ThresholdKind,
    _decide,
    detect,
    detect_blind_split,
    detect_nonblind_multiprep,
    detect_singleprep,
    estimate_expectation_plus,
    hoeffding_threshold,
    normal_threshold,
    roc_auc,
    roc_curve,
)
from qchan.sampling import Campaign, Marginal, OutcomeRecord, RngState, run_campaign
from qchan.scenario import parse_scenario

NB = DetectorConfig(Method.NON_BLIND_MULTI_PREP, alpha=0.05, prior_r1_sq=0.64)
SPLIT = DetectorConfig(Method.BLIND_SPLIT, alpha=0.05)
SINGLE = DetectorConfig(Method.SINGLE_PREP_SEMI_BLIND, alpha=0.05, prior_mean_r1_sq=0.5)


def recs(pattern):
    return [OutcomeRecord(i, Marginal.PLUS if x else Marginal.MINUS) for i, x in enumerate(pattern)]


def test_hoeffding_value():
    assert hoeffding_threshold(10_000, 0.01) == pytest.approx(0.016276236307187293, abs=1e-15)


def test_hoeffding_anchor_and_scaling():
    n = 123
    assert hoeffding_threshold(n, 2 * math.exp(-2)) == pytest.approx(math.sqrt(2 / (2 * n)))
    assert hoeffding_threshold(40_000, 0.05) == pytest.approx(hoeffding_threshold(10_000, 0.05) / 2)
    assert hoeffding_threshold(500, 0.05, two_sample=True) == pytest.approx(2 * hoeffding_threshold(500, 0.05))
    assert hoeffding_threshold(100, 0.05, True, n_b=100) == hoeffding_threshold(100, 0.05, True)


@pytest.mark.parametrize("n,alpha", [(0, 0.05), (10, 0.0), (10, 1.0), (2.5, 0.1)])
def test_hoeffding_rejects(n, alpha):
    with pytest.raises(ValueError):
        hoeffding_threshold(n, alpha)


def test_normal_threshold_value():
    # z_{0.975} * sqrt(0.25 / 1e4)
    assert normal_threshold(10_000, 0.05, 0.5) == pytest.approx(1.959963984540054 * 0.005, rel=1e-12)


def test_config_requires_matching_prior():
    with pytest.raises(DetectorConfigError):
        DetectorConfig(Method.NON_BLIND_MULTI_PREP)
    with pytest.raises(DetectorConfigError):
        DetectorConfig(Method.SINGLE_PREP_SEMI_BLIND, prior_r1_sq=0.5, prior_mean_r1_sq=0.5)
    with pytest.raises(DetectorConfigError):
        DetectorConfig(Method.BLIND_SPLIT, alpha=1.0)


def test_nonblind_exact_prior_is_benign():
    v = detect_nonblind_multiprep(6400, 10_000, NB)
    assert v.decision is Decision.NO_INTRUSION and v.statistic == pytest.approx(0.0, abs=1e-15)


def test_nonblind_worked_example_intrusion():
    v = detect_nonblind_multiprep(3705, 10_000, NB)
    assert v.statistic == pytest.approx(0.2695, abs=1e-12)
    assert v.threshold == pytest.approx(hoeffding_threshold(10_000, 0.05))
    assert v.decision is Decision.INTRUSION and v.n_used == (10_000,)


def test_nonblind_wrong_method_and_bad_counts():
    with pytest.raises(DetectorConfigError):
        detect_nonblind_multiprep(1, 2, SPLIT)
    with pytest.raises(ValueError):
        detect_nonblind_multiprep(11, 10, NB)


def test_ties_are_benign():
    assert _decide(0.1, 0.1, Decision.INTRUSION) is Decision.NO_INTRUSION
    assert _decide(0.1000001, 0.1, Decision.INTRUSION) is Decision.INTRUSION


@given(st.integers(1, 10_000), st.data())
def test_decision_consistency(n, data):
    k = data.draw(st.integers(0, n))
    v = detect_nonblind_multiprep(k, n, NB)
    assert v.alarm == (v.statistic > v.threshold)


def test_split_identical_outcomes():
    v = detect_blind_split(recs([1] * 40), SPLIT)
    assert v.statistic == 0.0 and v.decision is Decision.NO_INTRUSION and v.n_used == (20, 20)


def test_split_detects_switch():
    u = RngState(0).random(20_000)
    plus = np.concatenate([u[:10_000] < 0.64, u[10_000:] < 0.3705])
    v = detect_blind_split(Campaign(plus), SPLIT)
    assert abs(v.statistic - 0.2695) < 0.03
    assert v.decision is Decision.CHANNEL_CHANGED


def test_split_uneven_fraction():
    cfg = DetectorConfig(Method.BLIND_SPLIT, split_fraction=0.25)
    v = detect_blind_split(recs([1, 0] * 50), cfg)
    assert v.n_used == (25, 75)
    assert v.threshold == pytest.approx(hoeffding_threshold(25, 0.05) + hoeffding_threshold(75, 0.05))


def test_split_too_few_records():
    with pytest.raises(ValueError):
        detect_blind_split(recs([1, 0, 1]), SPLIT)


def test_estimate_expectation_plus():
    assert estimate_expectation_plus(recs([1, 1, 1])) == 1.0
    assert estimate_expectation_plus(recs([1, 0] * 10)) == 0.5
    with pytest.raises(ValueError):
        estimate_expectation_plus([])


def test_estimate_expectation_singleprep_large():
    sc = parse_scenario(dict(SINGLE_DOC, n_preparations=1_000_000))
    c = run_campaign(sc, RngState(21))
    assert abs(estimate_expectation_plus(c) - 0.5) < 0.0015


def test_singleprep_rejects_empty_and_uses_k():
    with pytest.raises(ValueError):
        detect_singleprep([], SINGLE)
    v = detect_singleprep(recs([1, 0] * 500), SINGLE)
    assert v.n_used == (1000,) and v.decision is Decision.NO_INTRUSION


def test_singleprep_detects_r2_fixed_one():
    doc = dict(SINGLE_DOC, case_truth="Case1", coupling={"v": 1.0}, n_preparations=500)
    doc["emitter2"] = {"kind": "Fixed", "r": 1.0}
    c = run_campaign(parse_scenario(doc), RngState(4))
    # E{P} = 1 here: every outcome is Plus
    assert c.plus_count == len(c)
    assert detect_singleprep(c, SINGLE).decision is Decision.INTRUSION


def test_normal_variant_switch():
    cfg = DetectorConfig(Method.NON_BLIND_MULTI_PREP, prior_r1_sq=0.5, threshold_kind=ThresholdKind.NORMAL)
    v = detect_nonblind_multiprep(5000, 10_000, cfg)
    assert v.threshold == pytest.approx(normal_threshold(10_000, 0.05, 0.5))
    assert v.threshold < hoeffding_threshold(10_000, 0.05)


def test_detect_dispatch():
    c = Campaign(np.array([True, False] * 50))
    assert detect(c, NB).n_used == (100,)
    assert detect(c, SPLIT).n_used == (50, 50)
    assert detect(c, SINGLE).statistic == 0.0


def test_roc_extremes():
    s0, s1 = [0.1, 0.2, 0.3], [0.4, 0.5]
    assert roc_curve(s0, s1, [-1.0]) == [RocPoint(-1.0, 1.0, 1.0)]
    assert roc_curve(s0, s1, [10.0]) == [RocPoint(10.0, 0.0, 0.0)]
    pts = roc_curve(s0, s1, [0.35])
    assert pts[0].false_alarm_rate == 0.0 and pts[0].detection_rate == 1.0
    assert roc_auc(pts) == 1.0


def test_roc_strict_exceedance_and_validation():
    assert roc_curve([0.5], [0.5], [0.5])[0] == RocPoint(0.5, 0.0, 0.0)
    with pytest.raises(ValueError):
        roc_curve([], [1.0], [0.0])
    with pytest.raises(ValueError):
        roc_curve([1.0], [1.0], [0.5, 0.1])


@given(
    st.lists(st.floats(0, 1), min_size=1, max_size=30),
    st.lists(st.floats(0, 1), min_size=1, max_size=30),
    st.lists(st.floats(-0.5, 1.5), min_size=1, max_size=20),
)
def test_roc_monotone(s0, s1, grid):
    pts = roc_curve(s0, s1, sorted(grid))
    # thresholds descending => rates nondecreasing
    pts = pts[::-1]
    for a, b in zip(pts, pts[1:]):
        assert b.false_alarm_rate >= a.false_alarm_rate
        assert b.detection_rate >= a.detection_rate
    assert 0.0 <= roc_auc(pts) <= 1.0


def test_roc_auc_chance_line():
    pts = [RocPoint(t, 1 - t, 1 - t) for t in np.linspace(0, 1, 11)]
    assert roc_auc(pts) == pytest.approx(0.5)


def test_split_calibration_stationary_multiprep():
    doc = dict(MULTI_DOC, case_truth="Case0", detector={"method": "BlindSplit", "alpha": 0.05})
    sc = parse_scenario(doc)
    alarms = sum(detect_blind_split(run_campaign(sc, RngState(1, k)), sc.detector).alarm for k in range(300))
    assert alarms / 300 <= 0.05
