"""darkport: dark-port postselection of a gravitationally kicked probe.

A source mass in a two-arm superposition nudges a trapped-then-released
probe packet; conditioning the source on its nearly-dark interferometer
port flips and amplifies the probe's momentum shift.  The package
provides the exact wavepacket algebra behind that statement, the SI
feasibility chain for a concrete nanocrystal implementation, Monte
Carlo simulation with a classical-mixture baseline, and a CLI.
"""

from .constants import CODATA2018, PhysicalConstants
from .gaussian import (
    GaussianComponent,
    GridError,
    GridSpec,
    HermiteComponent,
    WavepacketSuperposition,
    ZeroNormError,
    momentum_mean,
    momentum_variance,
    norm,
    norm_squared,
    orthogonal_decomposition,
    overlap,
    quadrature_moments,
)
from .montecarlo import (
    DetectionBudgetError,
    DetectionResult,
    InverseCdfSampler,
    RunConfig,
    RunSummary,
    TrialOutcome,
    empirical_runs_to_detection,
    run_classical,
    run_quantum,
    stream,
)
from .observables import (
    DetectionPlan,
    PositionDensity,
    ReadoutModel,
    detection_plan,
    detection_significance,
    discrimination_probability,
    far_field_position_density,
    leading_order_discrimination,
    runs_estimate,
)
from .params import (
    PRESETS,
    DerivedQuantities,
    ExperimentParams,
    Violation,
    delta_p,
    derive,
    displacement_and_spread,
    epsilon_required,
    get_preset,
    kick_ratio,
    load_params_file,
    momentum_width,
    params_from_dict,
    radius_from_mass,
    validate,
)
from .protocol import (
    IntegrationError,
    JointState,
    OrthogonalStatesError,
    SplitTrajectory,
    TwoPathState,
    ZeroSuccessError,
    both_arm_kicks,
    dark_port,
    gravitational_kick,
    impulse_time_dependent,
    postselect,
    postselected_mean_approx,
    postselected_mean_exact,
    postselected_state,
    preselect,
    regime_ok,
    regime_parameter,
    sg_trajectory,
    success_probability,
    weak_value_approx,
    weak_value_exact,
)

__version__ = "0.1.0"
