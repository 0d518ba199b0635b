"""Scenario documents: JSON loading, validation and defaults.

A scenario is a single JSON object with a mandatory ``"schema": 1`` field.
Unknown keys are rejected everywhere. See README.md for the full schema.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .channel import NO_COUPLING, CouplingStrength, coupling_from_physical, coupling_from_v
from .detectors import DetectorConfig, DetectorConfigError, Method, ThresholdKind
from .sampling import U64_MAX, ModulusKind, PhaseKind, StateDistribution

SCHEMA_VERSION = 1
MODES = ("MultiplePrep", "SinglePrep")
CASES = ("Case0", "Case1")


class ScenarioError(ValueError):
    """Invalid scenario; ``field`` names the offending entry (dotted path)."""

    kind = "invalid scenario"

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{self.kind}: {field}: {message}")


class ScenarioParseError(ScenarioError):
    kind = "parse error"


class ScenarioSchemaError(ScenarioError):
    kind = "schema violation"


class ScenarioInvariantError(ScenarioError):
    kind = "invariant violation"


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str
    case_truth: str
    coupling: CouplingStrength
    emitter1: StateDistribution
    emitter2: StateDistribution
    n_preparations: int = 10_000
    detector: DetectorConfig | None = None
    seed: int = 0
    repetitions: int = 1
    record_joint: bool = False
    switch_fraction: float | None = None
    # original coupling entry, kept so the config serializes back faithfully
    coupling_spec: tuple[str, float] = ("v", 0.0)

    @property
    def effective_coupling(self) -> CouplingStrength:
        return NO_COUPLING if self.case_truth == "Case0" else self.coupling

    @property
    def observable_q1(self) -> bool:
        """Whether Receiver 1 knows qubit 1's preparation (non-blind test)."""
        return self.detector is not None and self.detector.method is Method.NON_BLIND_MULTI_PREP

    @property
    def expects_alarm(self) -> bool:
        """Ground truth for the configured detector.

        The split test targets a change of channel during the campaign, so it
        is only expected to fire when a switch into Case 1 is configured.
        """
        if self.case_truth == "Case0":
            return False
        if self.detector is not None and self.detector.method is Method.BLIND_SPLIT:
            return self.switch_fraction is not None
        return True

    def with_case(self, case_truth: str) -> "ScenarioConfig":
        return dataclasses.replace(self, case_truth=case_truth)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return dataclasses.replace(self, seed=seed)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "schema": SCHEMA_VERSION,
            "mode": self.mode,
            "case_truth": self.case_truth,
            "coupling": {self.coupling_spec[0]: self.coupling_spec[1]},
            "emitter1": _dist_to_dict(self.emitter1),
            "emitter2": _dist_to_dict(self.emitter2),
            "n_preparations": self.n_preparations,
            "seed": self.seed,
            "repetitions": self.repetitions,
            "record_joint": self.record_joint,
        }
        if self.switch_fraction is not None:
            d["switch_fraction"] = self.switch_fraction
        if self.detector is not None:
            det = self.detector
            dd: dict[str, Any] = {"method": det.method.value, "alpha": det.alpha}
            if det.prior_r1_sq is not None:
                dd["prior_r1_sq"] = det.prior_r1_sq
            if det.prior_mean_r1_sq is not None:
                dd["prior_mean_r1_sq"] = det.prior_mean_r1_sq
            if det.method is Method.BLIND_SPLIT:
                dd["split_fraction"] = det.split_fraction
            dd["threshold"] = det.threshold_kind.value
            d["detector"] = dd
        return d

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form (defaults filled in)."""
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _dist_to_dict(d: StateDistribution) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": d.kind.value}
    if d.kind is ModulusKind.FIXED:
        out["r"] = d.r
    else:
        out["lo"], out["hi"] = d.lo, d.hi
    if d.phase_kind is PhaseKind.FIXED:
        out["phases"] = {"kind": "FixedPhases", "theta": d.theta, "phi": d.phi}
    else:
        out["phases"] = {"kind": "UniformPhases"}
    return out


_MISSING = object()


def _get(doc: dict, key: str, path: str, types, default=_MISSING):
    field = f"{path}.{key}" if path else key
    if key not in doc:
        if default is _MISSING:
            raise ScenarioSchemaError(field, "required field is missing")
        return default
    val = doc[key]
    # bool is an int subclass; never accept it for numeric fields
    if isinstance(val, bool) and bool not in types:
        raise ScenarioSchemaError(field, f"expected {_type_names(types)}, got a boolean")
    if not isinstance(val, types):
        raise ScenarioSchemaError(field, f"expected {_type_names(types)}, got {type(val).__name__}")
    if isinstance(val, float) and not math.isfinite(val):
        raise ScenarioSchemaError(field, "must be finite")
    return val


def _type_names(types) -> str:
    names = {bool: "boolean", int: "integer", float: "number", str: "string", dict: "object"}
    return " or ".join(names.get(t, t.__name__) for t in types)


def _reject_unknown(doc: dict, allowed: set[str], path: str):
    for key in doc:
        if key not in allowed:
            field = f"{path}.{key}" if path else key
            raise ScenarioSchemaError(field, "unknown key")


_NUM = (int, float)


def _parse_emitter(doc, path: str) -> StateDistribution:
    if not isinstance(doc, dict):
        raise ScenarioSchemaError(path, "expected an object")
    kind = _get(doc, "kind", path, (str,))
    try:
        kind = ModulusKind(kind)
    except ValueError:
        raise ScenarioSchemaError(
            f"{path}.kind", f"unknown kind {kind!r}; expected one of {[k.value for k in ModulusKind]}"
        ) from None
    if kind is ModulusKind.FIXED:
        _reject_unknown(doc, {"kind", "r", "phases"}, path)
        r = float(_get(doc, "r", path, _NUM))
        if not 0.0 <= r <= 1.0:
            raise ScenarioSchemaError(f"{path}.r", f"must lie in [0, 1], got {r}")
        lo = hi = None
        default_phases = {"kind": "FixedPhases"}
    else:
        _reject_unknown(doc, {"kind", "lo", "hi", "phases"}, path)
        r = None
        lo = float(_get(doc, "lo", path, _NUM, 0.0))
        hi = float(_get(doc, "hi", path, _NUM, 1.0))
        if not 0.0 <= lo <= hi <= 1.0:
            raise ScenarioSchemaError(f"{path}.lo", f"need 0 <= lo <= hi <= 1, got lo={lo}, hi={hi}")
        default_phases = {"kind": "UniformPhases"}

    ph = _get(doc, "phases", path, (dict,), default_phases)
    ppath = f"{path}.phases"
    pkind = _get(ph, "kind", ppath, (str,))
    if pkind == "FixedPhases":
        _reject_unknown(ph, {"kind", "theta", "phi"}, ppath)
        theta = float(_get(ph, "theta", ppath, _NUM, 0.0))
        phi = float(_get(ph, "phi", ppath, _NUM, 0.0))
        phase_kind = PhaseKind.FIXED
    elif pkind == "UniformPhases":
        _reject_unknown(ph, {"kind"}, ppath)
        theta = phi = 0.0
        phase_kind = PhaseKind.UNIFORM
    else:
        raise ScenarioSchemaError(f"{ppath}.kind", f"expected FixedPhases or UniformPhases, got {pkind!r}")
    return StateDistribution(kind, r=r, lo=lo, hi=hi, phase_kind=phase_kind, theta=theta, phi=phi)


def _parse_coupling(doc) -> tuple[CouplingStrength, tuple[str, float]]:
    if not isinstance(doc, dict):
        raise ScenarioSchemaError("coupling", "expected an object")
    _reject_unknown(doc, {"v", "jxy_dt_over_hbar"}, "coupling")
    if "v" in doc and "jxy_dt_over_hbar" in doc:
        raise ScenarioSchemaError("coupling", "ambiguous coupling: give either v or jxy_dt_over_hbar, not both")
    if "v" in doc:
        v = float(_get(doc, "v", "coupling", _NUM))
        if not -1.0 <= v <= 1.0:
            raise ScenarioSchemaError("coupling.v", f"must lie in [-1, 1], got {v}")
        return coupling_from_v(v), ("v", v)
    if "jxy_dt_over_hbar" in doc:
        x = float(_get(doc, "jxy_dt_over_hbar", "coupling", _NUM))
        return coupling_from_physical(x), ("jxy_dt_over_hbar", x)
    raise ScenarioSchemaError("coupling", "needs either v or jxy_dt_over_hbar")


def _parse_detector(doc, emitter1: StateDistribution) -> DetectorConfig:
    path = "detector"
    if not isinstance(doc, dict):
        raise ScenarioSchemaError(path, "expected an object")
    _reject_unknown(
        doc, {"method", "alpha", "prior_r1_sq", "prior_mean_r1_sq", "split_fraction", "threshold"}, path
    )
    method = _get(doc, "method", path, (str,))
    try:
        method = Method(method)
    except ValueError:
        raise ScenarioSchemaError(
            f"{path}.method", f"unknown method {method!r}; expected one of {[m.value for m in Method]}"
        ) from None
    alpha = float(_get(doc, "alpha", path, _NUM, 0.05))
    threshold = _get(doc, "threshold", path, (str,), ThresholdKind.HOEFFDING.value)
    try:
        threshold = ThresholdKind(threshold)
    except ValueError:
        raise ScenarioSchemaError(f"{path}.threshold", f"expected hoeffding or normal, got {threshold!r}") from None

    prior = prior_mean = None
    if "prior_r1_sq" in doc:
        prior = float(_get(doc, "prior_r1_sq", path, _NUM))
    if "prior_mean_r1_sq" in doc:
        prior_mean = float(_get(doc, "prior_mean_r1_sq", path, _NUM))
    # a missing prior defaults to the exact value implied by emitter 1
    if method is Method.NON_BLIND_MULTI_PREP and prior is None and emitter1.kind is ModulusKind.FIXED:
        prior = emitter1.r * emitter1.r
    if method is Method.SINGLE_PREP_SEMI_BLIND and prior_mean is None:
        prior_mean = emitter1.mean_r_sq

    split = 0.5
    if "split_fraction" in doc:
        if method is not Method.BLIND_SPLIT:
            raise ScenarioInvariantError(f"{path}.split_fraction", "only used by BlindSplit")
        split = float(_get(doc, "split_fraction", path, _NUM))
    try:
        return DetectorConfig(method, alpha, prior, prior_mean, split, threshold)
    except DetectorConfigError as e:
        msg = str(e)
        field = next((f for f in ("alpha", "split_fraction", "prior_r1_sq", "prior_mean_r1_sq") if f in msg), "method")
        raise ScenarioInvariantError(f"{path}.{field}", msg) from None


def parse_scenario(doc: Any) -> ScenarioConfig:
    """Validate a decoded JSON document and build a :class:`ScenarioConfig`."""
    if not isinstance(doc, dict):
        raise ScenarioSchemaError("<document>", "top level must be a JSON object")
    _reject_unknown(
        doc,
        {
            "schema", "mode", "case_truth", "coupling", "emitter1", "emitter2",
            "n_preparations", "detector", "seed", "repetitions", "record_joint",
            "switch_fraction",
        },
        "",
    )
    version = _get(doc, "schema", "", (int,))
    if version != SCHEMA_VERSION:
        raise ScenarioSchemaError("schema", f"unsupported schema version {version}; expected {SCHEMA_VERSION}")

    mode = _get(doc, "mode", "", (str,))
    if mode not in MODES:
        raise ScenarioSchemaError("mode", f"expected one of {list(MODES)}, got {mode!r}")
    case = _get(doc, "case_truth", "", (str,))
    if case not in CASES:
        raise ScenarioSchemaError("case_truth", f"expected one of {list(CASES)}, got {case!r}")

    if "coupling" in doc:
        coupling, cspec = _parse_coupling(doc["coupling"])
    elif case == "Case1":
        raise ScenarioSchemaError("coupling", "required for Case1")
    else:
        coupling, cspec = NO_COUPLING, ("v", 0.0)

    e1 = _parse_emitter(_get(doc, "emitter1", "", (dict,)), "emitter1")
    e2 = _parse_emitter(_get(doc, "emitter2", "", (dict,)), "emitter2")

    n = _get(doc, "n_preparations", "", (int,), 10_000)
    if n < 1:
        raise ScenarioSchemaError("n_preparations", f"must be >= 1, got {n}")
    reps = _get(doc, "repetitions", "", (int,), 1)
    if reps < 1:
        raise ScenarioSchemaError("repetitions", f"must be >= 1, got {reps}")
    seed = _get(doc, "seed", "", (int,), 0)
    if not 0 <= seed <= U64_MAX:
        raise ScenarioSchemaError("seed", "must be an unsigned 64-bit integer")
    record_joint = _get(doc, "record_joint", "", (bool,), False)
    switch = _get(doc, "switch_fraction", "", _NUM, None)
    if switch is not None:
        switch = float(switch)
        if not 0.0 < switch < 1.0:
            raise ScenarioSchemaError("switch_fraction", f"must lie in (0, 1), got {switch}")

    if mode == "MultiplePrep":
        for name, e in (("emitter1", e1), ("emitter2", e2)):
            if not e.is_fixed:
                raise ScenarioInvariantError(
                    name, "MultiplePrep requires a Fixed distribution with FixedPhases (copies of one state)"
                )
    elif e1.is_fixed:
        raise ScenarioInvariantError("emitter1", "SinglePrep requires a random emitter1 distribution")

    det = None
    if "detector" in doc:
        det = _parse_detector(doc["detector"], e1)
        if det.method is Method.NON_BLIND_MULTI_PREP and mode != "MultiplePrep":
            raise ScenarioInvariantError("detector.method", "NonBlindMultiPrep requires mode MultiplePrep")
        if det.method is Method.SINGLE_PREP_SEMI_BLIND and mode != "SinglePrep":
            raise ScenarioInvariantError("detector.method", "SinglePrepSemiBlind requires mode SinglePrep")
        if det.method is Method.BLIND_SPLIT:
            n_a = int(math.floor(det.split_fraction * n))
            if n_a < 2 or n - n_a < 2:
                raise ScenarioInvariantError(
                    "n_preparations", f"BlindSplit needs at least 2 records per subset, got {n_a} and {n - n_a}"
                )

    return ScenarioConfig(
        mode=mode, case_truth=case, coupling=coupling, emitter1=e1, emitter2=e2,
        n_preparations=n, detector=det, seed=seed, repetitions=reps,
        record_joint=record_joint, switch_fraction=switch, coupling_spec=cspec,
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ScenarioParseError(str(path), f"cannot read file: {e.strerror or e}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError("<document>", f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    return parse_scenario(doc)
