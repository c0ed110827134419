"""Boson sampling simulation, characterization and validation toolkit."""

from .combinat import (
    count_collision_free,
    count_full_space,
    enumerate_collision_free,
    enumerate_full_support,
    hypercube_node_count,
    index_occupation,
    occupation_index,
)
from .permanent import permanent_exact, permanent_naive, scattering_submatrix
from .unitaries import (
    EnsembleStats,
    GridDeviceSpec,
    TransferMatrix,
    device_ensemble,
    device_unitary,
    grid_hamiltonian,
    haar_convergence_stats,
    haar_ensemble,
    haar_unitary,
    unitarity_defect,
)
from .distributions import (
    OutputDistribution,
    boson_distribution,
    collision_free_mass,
    distinguishable_distribution,
    empirical_distribution,
    fidelity,
    total_variation_distance,
    uniform_distribution,
)
from .sampling import (
    EventStream,
    clifford_clifford_sample,
    filter_collision_free,
    sample_from_distribution,
)
from .validation import (
    CounterTrace,
    likelihood_ratio_counter,
    rne_counter,
    row_norm_estimator,
)
from .characterization import (
    CharacterizationDataset,
    ReconstructionReport,
    UndefinedVisibilityError,
    UnderdeterminedError,
    VisibilityRecord,
    gauge_distance,
    reconstruct_matrix,
    simulate_amplitudes,
    simulate_dataset,
    simulate_hom_visibility,
)

__version__ = "0.1.0"
