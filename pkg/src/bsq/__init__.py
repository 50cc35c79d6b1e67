"""Bohr-Sommerfeld quantization toolkit.

Quantum-number lattices over action-angle chart atlases, shifting
operators on the lattice state space, grid-based prequantization checks
(Dirac commutation relations, shift-flow single-valuedness), and the
spherical pendulum worked example with its joint spectrum and quantum
monodromy.
"""

from .atlas import (
    ActionAngleChart,
    ChartAtlas,
    ChartTransition,
    LatticeLabel,
    atlas_from_json,
    atlas_to_json,
    bs_label_of_actions,
    compose_transitions,
    holonomy_of_loop,
    identity_transition,
    is_globally_labelable,
    map_actions,
    map_angles,
    relabel,
    transport_direction,
)
from .errors import (
    BranchTrackingError,
    ConfigError,
    DomainError,
    IncompletenessError,
    MatchingError,
    OverlapError,
    QuadratureError,
    SupportError,
    UnsupportedObservableError,
)
from .grid import (
    ConnectionForm,
    GridSection,
    GridSpec,
    QuantomorphismSpec,
    VectorField,
    bs_basis_section,
    covariant_derivative,
    dirac_residual,
    gaussian_bump,
    prequant_apply,
    quantomorphism_flow,
    section_from_function,
    shift_flow_apply,
    shift_flow_single_valuedness,
)
from .observables import Observable, hamiltonian_vf, poisson
from .pendulum import (
    ActionData,
    EMValue,
    MonodromyReport,
    TurningInterval,
    action_I2,
    bs_spectrum,
    classify,
    label_transport,
    monodromy,
    period,
    rotation_angle,
    turning_points,
)
from .shifts import (
    LoopPhaseResult,
    ShiftDirection,
    ShiftStep,
    TransportResult,
    apply_word,
    chart_independence_check,
    loop_phase,
    lower,
    parse_word,
    raise_,
    transport_across_charts,
    word,
)
from .states import (
    ActionObservable,
    QuantumState,
    inner,
    norm,
    quantize,
    state_from_json,
    state_to_json,
)

__version__ = "0.1.0"
