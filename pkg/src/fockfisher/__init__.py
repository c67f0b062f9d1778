"""Phase estimation with lossy path-entangled Fock states.

Quantum Fisher information of lossy PEFS and NOON probes, and the classical
Fisher information of double-parity, photon-counting and double-homodyne
detection behind a balanced beam splitter.
"""
__version__ = "0.1.0"

from .measurements import (
    OutcomeDistribution,
    ParityExpectations,
    QuadratureConvergenceError,
    QuadratureGrid,
    SingularPhaseError,
    cfi_dh,
    cfi_discrete,
    cfi_dp,
    cfi_noon_dpnr_closed,
    cfi_sp,
    dh_probability,
    dp_distribution,
    dpnr_distribution,
    marginalize,
    noon_g_factor,
    parity_expectations,
    parity_expectations_from_state,
)
from .qfi import (
    FisherResult,
    ZeroFisherInformation,
    qfi_bruteforce,
    qfi_noon,
    qfi_pefs_one_arm,
    qfi_pefs_two_arm_bound,
    sensitivity,
)
from .scenarios import (
    SweepSpec,
    figure_dataset,
    hierarchy_report,
    run_sweep,
    superposed_noon_cfi,
    superposed_noon_parity,
)
from .states import NOON, PEFS, LossSpec, LossyState, SuperposedNOON, evolve_lossy, noon_direct_sum

__all__ = [
    "__version__",
    "PEFS",
    "NOON",
    "SuperposedNOON",
    "LossSpec",
    "LossyState",
    "evolve_lossy",
    "noon_direct_sum",
    "FisherResult",
    "ZeroFisherInformation",
    "qfi_bruteforce",
    "qfi_noon",
    "qfi_pefs_one_arm",
    "qfi_pefs_two_arm_bound",
    "sensitivity",
    "OutcomeDistribution",
    "ParityExpectations",
    "QuadratureGrid",
    "QuadratureConvergenceError",
    "SingularPhaseError",
    "parity_expectations",
    "parity_expectations_from_state",
    "dp_distribution",
    "dpnr_distribution",
    "marginalize",
    "noon_g_factor",
    "cfi_dp",
    "cfi_sp",
    "cfi_discrete",
    "cfi_noon_dpnr_closed",
    "cfi_dh",
    "dh_probability",
    "SweepSpec",
    "run_sweep",
    "hierarchy_report",
    "figure_dataset",
    "superposed_noon_parity",
    "superposed_noon_cfi",
]
