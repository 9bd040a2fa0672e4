"""Four-copy quantum discord witness toolkit."""

from .circuit import (
    build_total_state,
    exact_ancilla_expectations,
    reconstruct_witness,
    sample_circuit,
    two_setting_measurement,
)
from .dqc1 import (
    Dqc1Config,
    dqc1_discord_bound,
    dqc1_output_state,
    dqc1_witness_closed_form,
    normalized_trace,
)
from .oracle import (
    MeasurementBasis,
    OptimizerConfig,
    apply_measurement,
    branch_purity_sum,
    classical_quantum_state,
    conditional_entropy,
    discord_vn,
    geometric_discord,
)
from .qnum import (
    BipartiteState,
    kron,
    partial_trace,
    purity,
    random_state,
    random_unitary,
    validate_state,
    von_neumann_entropy,
)
from .witness import (
    Route,
    WitnessReport,
    correlation_matrix,
    discord_lower_bound,
    geometric_discord_lower_bound,
    gell_mann_basis,
    permutation_operator,
    q_value,
    witness_report,
    witness_via_permutation,
    witness_via_R,
)

__version__ = "0.1.0"
