"""Work fluctuations, Jarzynski estimation and shortcuts to adiabaticity
for a driven two-level quantum system.

Energies are in kHz, times in ms, and inverse temperatures in 1/kHz, so
``beta * W`` is dimensionless.
"""
from .linalg import (
    SX,
    SY,
    SZ,
    EigenSystem,
    NonHermitianError,
    default_n_steps,
    eigendecompose,
    evolve_step,
    propagate,
    unitarity_error,
)
from .protocols import (
    DEFAULT_X_MAX,
    DEFAULT_Z,
    AdiabaticityReport,
    CosineRamp,
    DriveProtocol,
    Kind,
    PiecewiseLinearRamp,
    adiabatic_parameter,
    cd_field,
    hamiltonian_at,
    mixing_angle,
    x_rate,
    x_schedule,
)
from .tpm import (
    JointProbabilityTable,
    ThermalState,
    WorkDistribution,
    exp_work_moments,
    free_energy_difference,
    haar_unitary,
    jarzynski_residual,
    joint_table,
    thermal_populations,
    transition_probabilities,
    work_distribution,
)
from .sampling import (
    EstimatorSeries,
    TrajectorySample,
    TrajectorySamples,
    convergence_study,
    exact_delta_f,
    jarzynski_estimator,
    sample_trajectories,
    substream,
)
from .readout import (
    DEFAULT_READOUT,
    InconsistentDataError,
    ReadoutModel,
    SingularReadoutError,
    apply_readout_noise,
    correct_joint,
    measure_joint,
    split_joint,
)
from .experiment import ContractViolation, ProtocolResult, evaluate, reference_transitions

__version__ = "0.1.0"
