"""Non-classicality diagnostics for single-mode light.

Sub-Poisson statistics through the variance-minus-mean measure K, a
moment-problem test for classical intensity variables, antibunching in
stationary intensity correlations, and the landscape of K over
photon-number distributions.
"""

from .errors import NonclassicalError
from .fock import (
    DensityOperator,
    FockSpace,
    OperatorMatrix,
    StateVector,
    annihilation,
    apply,
    coherent_mixture,
    coherent_state,
    creation,
    density_operator,
    expectation,
    fock_state,
    make_space,
    number_operator,
    superposition,
    thermal_state,
)
from .stats import (
    PhotonNumberDistribution,
    StatsReport,
    is_sub_poisson,
    k_from_distribution,
    k_measure,
    mandel_q,
    photon_distribution,
)
from .witness import (
    MomentSequence,
    cb_check,
    factorial_moments,
    fit_classical_measure,
    hankel_witness,
)
from .landscape import SupportSet, k_of, min_k_vertex, projected_gradient_min, scan_k
from .antibunching import (
    ClassicalProcessModel,
    EmitterModel,
    detect_antibunching,
    g2_correlation,
    lindblad_propagate,
    schwarz_violation_test,
    simulate_classical_intensity,
    steady_state,
)

__version__ = "0.1.0"
