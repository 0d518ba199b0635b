"""Two-qubit exchange-coupled channel simulator and intrusion detectors."""

from .channel import (
    NO_COUPLING,
    CouplingStrength,
    JointProbs,
    PreparationPair,
    blind_spot_residual,
    coupling_from_physical,
    coupling_from_v,
    joint_probabilities,
    marginal_plus_qubit1,
    oracle_evolve,
)
from .detectors import (
    Decision,
    DetectorConfig,
    Method,
    RocPoint,
    Verdict,
    detect_blind_split,
    detect_nonblind_multiprep,
    detect_singleprep,
    estimate_expectation_plus,
    hoeffding_threshold,
    roc_curve,
)
from .qubit import (
    ComplexAmplitudePair,
    FreeEvolutionParams,
    QubitPolar,
    TwoQubitAmplitudes,
    free_evolve,
    polar_to_amplitudes,
    tensor_product,
)
from .sampling import (
    OutcomeRecord,
    RngState,
    StateDistribution,
    measure_joint,
    measure_marginal_q1,
    run_campaign,
    sample_preparation,
)
from .scenario import ScenarioConfig, load_scenario, parse_scenario

__version__ = "0.1.0"
