import copy
import math

import pytest

from qchan.channel import PreparationPair, coupling_from_v
from qchan.qubit import QubitPolar

# r1 = 0.8, r2 = 0.6, dI = pi/2, v = 0.5 (the running example)
WORKED_PREP = PreparationPair(QubitPolar(0.8, 0.0, 0.0), QubitPolar(0.6, 0.0, math.pi / 2))
WORKED_COUPLING = coupling_from_v(0.5)

# frozen from a 30-digit mpmath evaluation of the closed forms
WORKED_P_PM = 0.140067746968065341
WORKED_P_MP = 0.399132253031934659
WORKED_MARGINAL = 0.370467746968065341
WORKED_RESIDUAL = 0.269532253031934659

MULTI_DOC = {
    "schema": 1,
    "mode": "MultiplePrep",
    "case_truth": "Case1",
    "coupling": {"v": 0.5},
    "emitter1": {"kind": "Fixed", "r": 0.8, "phases": {"kind": "FixedPhases", "theta": 0.0, "phi": 0.0}},
    "emitter2": {"kind": "Fixed", "r": 0.6, "phases": {"kind": "FixedPhases", "theta": 0.0, "phi": math.pi / 2}},
    "n_preparations": 10_000,
    "repetitions": 10,
    "seed": 7,
    "detector": {"method": "NonBlindMultiPrep", "alpha": 0.05},
}

SINGLE_DOC = {
    "schema": 1,
    "mode": "SinglePrep",
    "case_truth": "Case0",
    "emitter1": {"kind": "RandomUniformModSq", "lo": 0.0, "hi": 1.0},
    "emitter2": {"kind": "RandomUniformModSq", "lo": 0.0, "hi": 1.0},
    "n_preparations": 10_000,
    "repetitions": 10,
    "seed": 11,
    "detector": {"method": "SinglePrepSemiBlind", "alpha": 0.05},
}


@pytest.fixture
def multi_doc():
    return copy.deepcopy(MULTI_DOC)


@pytest.fixture
def single_doc():
    return copy.deepcopy(SINGLE_DOC)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_report():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
