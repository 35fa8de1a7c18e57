"""spinlift: multi-level (spin-j) quantum control methods generated from
two-level primitives via the SU(2) correspondence, with simulation of the
resulting dynamics and the measurement-statistics inference pipeline."""

from .spin import (
    DimensionError,
    NormalizationError,
    UnknownStateError,
    StateVector,
    SpinOperators,
    Unitary,
    angular_momentum_ops,
    rotation_unitary,
    lift_unitary,
    named_state,
    basis_state,
    state_fidelity,
    unitary_phase_distance,
    states_equal_up_to_phase,
    phase_aligned_deviation,
)
from .waveforms import (
    ScheduleError,
    blackman_detuning,
    blackman_rabi,
    lab_frame_chirp,
    lab_frame_chirp_initial,
    RotationSegment,
    HoldSegment,
    ConstantSegment,
    BlackmanTransferSegment,
    ControlSchedule,
    AdiabaticParams,
    CompositeSequence,
    bb1_sequence,
    adiabatic_method,
    composite_method,
    square_pulse,
    with_gain_curve,
    MultiLevelDrive,
    lift_schedule,
    schedule_to_json,
    schedule_from_json,
    save_schedule,
    load_schedule,
)
from .dynamics import (
    IntegratorError,
    IntegratorConfig,
    Trajectory,
    hamiltonian,
    propagate,
    propagator,
    eigen_scan,
)
from .inference import (
    FitSingularError,
    MeasurementModel,
    FringeData,
    FitResult,
    detection_map,
    sample_counts,
    ml_estimate_single,
    ml_fit_fringe,
    dark_state_fidelity,
    fringe_prediction,
    infidelity_per_op,
)
from .experiments import (
    NOMINAL_ADIABATIC,
    RAMSEY_ADIABATIC,
    NoiseParams,
    ScenarioReport,
    DressedDrive,
    run_adiabatic_transfer,
    run_tbb1,
    sweep_pulse_area,
    measure_fidelity_vs_n,
    static_error_infidelity,
    run_ramsey_dressed_qubit,
    verify_reversal,
    rotation_cycle_check,
    SCENARIOS,
    run_scenario,
)

__version__ = "0.1.0"
