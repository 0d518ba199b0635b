import json
import math

import pytest

from qchan.channel import coupling_from_physical
from qchan.detectors import Method, ThresholdKind
from qchan.sampling import ModulusKind, PhaseKind
from qchan.scenario import (
    ScenarioError,
    ScenarioInvariantError,
    ScenarioParseError,
    ScenarioSchemaError,
    load_scenario,
    parse_scenario,
)


def write(tmp_path, doc, name="s.json"):
    p = tmp_path / name
    p.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return p


def test_minimal_case0_singleprep_gets_defaults(tmp_path):
    doc = {
        "schema": 1, "mode": "SinglePrep", "case_truth": "Case0",
        "emitter1": {"kind": "RandomUniformModSq"}, "emitter2": {"kind": "RandomUniformModSq"},
        "detector": {"method": "SinglePrepSemiBlind"},
    }
    sc = load_scenario(write(tmp_path, doc))
    assert sc.n_preparations == 10_000 and sc.repetitions == 1 and sc.seed == 0
    assert sc.effective_coupling.v == 0.0
    assert sc.emitter1.kind is ModulusKind.UNIFORM_MOD_SQ and sc.emitter1.phase_kind is PhaseKind.UNIFORM
    assert (sc.emitter1.lo, sc.emitter1.hi) == (0.0, 1.0)
    assert sc.detector.alpha == 0.05 and sc.detector.prior_mean_r1_sq == 0.5
    assert sc.detector.threshold_kind is ThresholdKind.HOEFFDING
    assert not sc.record_joint and not sc.observable_q1


def test_nonblind_prior_defaults_to_r1_squared(multi_doc):
    sc = parse_scenario(multi_doc)
    assert sc.detector.prior_r1_sq == pytest.approx(0.64)
    assert sc.observable_q1


def test_ambiguous_coupling_rejected(multi_doc):
    multi_doc["coupling"] = {"v": 0.5, "jxy_dt_over_hbar": 1.0}
    with pytest.raises(ScenarioSchemaError, match="ambiguous") as e:
        parse_scenario(multi_doc)
    assert e.value.field == "coupling"


def test_multiprep_with_random_emitter_rejected(multi_doc):
    multi_doc["emitter1"] = {"kind": "RandomUniformModSq"}
    with pytest.raises(ScenarioInvariantError) as e:
        parse_scenario(multi_doc)
    assert e.value.field == "emitter1"


def test_multiprep_with_random_phases_rejected(multi_doc):
    multi_doc["emitter2"] = {"kind": "Fixed", "r": 0.6, "phases": {"kind": "UniformPhases"}}
    with pytest.raises(ScenarioInvariantError) as e:
        parse_scenario(multi_doc)
    assert e.value.field == "emitter2"


def test_singleprep_needs_random_emitter1(single_doc):
    single_doc["emitter1"] = {"kind": "Fixed", "r": 0.3}
    with pytest.raises(ScenarioInvariantError, match="random"):
        parse_scenario(single_doc)


@pytest.mark.parametrize(
    "path,value,field",
    [
        (("bogus",), 1, "bogus"),
        (("emitter1", "extra"), 1, "emitter1.extra"),
        (("detector", "foo"), 1, "detector.foo"),
        (("emitter1", "phases", "x"), 1, "emitter1.phases.x"),
    ],
)
def test_unknown_keys_rejected(multi_doc, path, value, field):
    d = multi_doc
    for k in path[:-1]:
        d = d[k]
    d[path[-1]] = value
    with pytest.raises(ScenarioSchemaError) as e:
        parse_scenario(multi_doc)
    assert e.value.field == field


@pytest.mark.parametrize(
    "key,value,field",
    [
        ("schema", 2, "schema"),
        ("mode", "Both", "mode"),
        ("case_truth", "Case2", "case_truth"),
        ("n_preparations", 0, "n_preparations"),
        ("n_preparations", 1.5, "n_preparations"),
        ("repetitions", True, "repetitions"),
        ("seed", -1, "seed"),
        ("seed", 2**64, "seed"),
        ("switch_fraction", 1.0, "switch_fraction"),
        ("coupling", {"v": 2.0}, "coupling.v"),
        ("coupling", {}, "coupling"),
    ],
)
def test_field_errors(multi_doc, key, value, field):
    multi_doc[key] = value
    with pytest.raises(ScenarioSchemaError) as e:
        parse_scenario(multi_doc)
    assert e.value.field == field
    assert field in str(e.value)


def test_missing_schema(multi_doc):
    del multi_doc["schema"]
    with pytest.raises(ScenarioSchemaError, match="schema"):
        parse_scenario(multi_doc)


def test_case1_needs_coupling(multi_doc):
    del multi_doc["coupling"]
    with pytest.raises(ScenarioSchemaError) as e:
        parse_scenario(multi_doc)
    assert e.value.field == "coupling"


def test_method_mode_mismatch(multi_doc, single_doc):
    multi_doc["detector"] = {"method": "SinglePrepSemiBlind", "prior_mean_r1_sq": 0.5}
    with pytest.raises(ScenarioInvariantError):
        parse_scenario(multi_doc)
    single_doc["detector"] = {"method": "NonBlindMultiPrep", "prior_r1_sq": 0.5}
    with pytest.raises(ScenarioInvariantError):
        parse_scenario(single_doc)


def test_detector_field_errors(multi_doc):
    multi_doc["detector"] = {"method": "NonBlindMultiPrep", "alpha": 1.5}
    with pytest.raises(ScenarioInvariantError) as e:
        parse_scenario(multi_doc)
    assert e.value.field == "detector.alpha"
    multi_doc["detector"] = {"method": "NonBlindMultiPrep", "split_fraction": 0.3}
    with pytest.raises(ScenarioInvariantError) as e:
        parse_scenario(multi_doc)
    assert e.value.field == "detector.split_fraction"
    multi_doc["detector"] = {"method": "Magic"}
    with pytest.raises(ScenarioSchemaError):
        parse_scenario(multi_doc)


def test_split_needs_enough_records(multi_doc):
    multi_doc["n_preparations"] = 3
    multi_doc["detector"] = {"method": "BlindSplit"}
    with pytest.raises(ScenarioInvariantError):
        parse_scenario(multi_doc)


def test_parse_error_distinct(tmp_path):
    with pytest.raises(ScenarioParseError, match="invalid JSON"):
        load_scenario(write(tmp_path, "{not json"))
    with pytest.raises(ScenarioParseError, match="cannot read"):
        load_scenario(tmp_path / "missing.json")
    assert issubclass(ScenarioParseError, ScenarioError)


def test_physical_coupling_entry(multi_doc):
    multi_doc["coupling"] = {"jxy_dt_over_hbar": math.pi / 3}
    sc = parse_scenario(multi_doc)
    assert sc.coupling == coupling_from_physical(math.pi / 3)


def test_case0_forces_zero_coupling(multi_doc):
    multi_doc["case_truth"] = "Case0"
    sc = parse_scenario(multi_doc)
    assert sc.coupling.v == 0.5 and sc.effective_coupling.v == 0.0


def test_round_trip_and_digest(multi_doc, single_doc):
    for doc in (multi_doc, single_doc):
        sc = parse_scenario(doc)
        again = parse_scenario(json.loads(json.dumps(sc.to_dict())))
        assert again == sc
        assert again.digest() == sc.digest()
    assert parse_scenario(multi_doc).digest() != parse_scenario(single_doc).digest()


def test_expects_alarm():
    import copy
    from conftest import MULTI_DOC

    doc = copy.deepcopy(MULTI_DOC)
    assert parse_scenario(doc).expects_alarm
    doc["detector"] = {"method": "BlindSplit"}
    assert not parse_scenario(doc).expects_alarm
    doc["switch_fraction"] = 0.5
    assert parse_scenario(doc).expects_alarm
    doc["case_truth"] = "Case0"
    assert not parse_scenario(doc).expects_alarm


def test_shipped_scenarios_load():
    from pathlib import Path

    files = sorted((Path(__file__).parent.parent / "scenarios").glob("*.json"))
    assert files
    for f in files:
        load_scenario(f)
