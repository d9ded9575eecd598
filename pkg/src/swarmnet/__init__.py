"""swarmnet: collective two-option decision dynamics on regular networks
of populations -- simulation, closed-form consensus equilibria, and
Gershgorin stability certificates, for both plain populations and
populations structured as scale-free complex networks.
"""

from .dynamics import (
    ConsensusEquilibrium,
    ModelParams,
    PopulationState,
    StabilityCertificate,
    Trajectory,
    all_equilibria,
    best_equilibrium_match,
    certificate_report,
    certify_stability,
    decay_oracle,
    equilibrium_case1,
    equilibrium_case2,
    integrate,
    jacobian,
    sample_simplex_state,
    vector_field,
)
from .errors import (
    CertificateInapplicableError,
    ConvergenceError,
    GraphValidationError,
    ScenarioError,
    SimplexViolationError,
    SingularSystemError,
    SwarmnetError,
)
from .graphs import (
    RegularGraph,
    build_buckminster,
    build_circulant,
    build_complete,
    circulant_offsets_for_degree,
    from_adjacency,
    load_edgelist,
    validate_regular,
)
from .numkit import DELTA_TOL, SolverConfig, rk4_step, rng_for, sample_simplex_pairs, solve_dense, spread
from .structured import (
    ClusteredState,
    ClusteredTrajectory,
    DegreeDistribution,
    MomentTrajectory,
    Moments,
    certify_structured,
    certify_symmetric_structured,
    cluster_vector_field,
    compute_moments,
    compute_psi,
    compute_theta,
    empirical_distribution,
    integrate_clusters,
    integrate_moments,
    load_distribution_csv,
    powerlaw_distribution,
    sample_cluster_state,
    solve_selfconsistent_theta,
    symmetric_cluster_eigenvalues,
    symmetric_cluster_equilibrium,
    symmetric_cluster_matrix,
    theta_equilibrium,
    theta_system_matrix,
    theta_vector_field,
)

__version__ = "0.1.0"
