"""Adaptive RACH subframe allocation for LTE random access.

Analytic slotted-ALOHA throughput/utility model, a Lambert-W based
subframe optimizer with an exhaustive integer oracle, a two-branch
contention-load estimator driven by idle-preamble counts, and a
deterministic Monte Carlo contention simulator with fixed, maximum,
adaptive, and access-class-barring controllers.
"""

from .estimator import (
    EstimatorState,
    InconsistentObservationError,
    LoadBranch,
    RachObservation,
    classify_load_branch,
    estimate_load,
    smooth_estimate,
)
from .lambertw import BRANCH_POINT, BelowBranchPointError, WBranch, lambert_w
from .model import (
    FRAME_SUBFRAMES,
    RachConfig,
    throughput,
    utility,
    utility_gradient,
    utility_of_load,
)
from .optimizer import (
    DEFAULT_TABLE_MAX_LOAD,
    LookupTable,
    SubframeDecision,
    closed_form_decision,
    decide_subframes,
    optimal_subframes_closed_form,
    optimal_subframes_integer,
    stationary_alpha_limit,
    subframe_lookup_table,
)
from .scenario import (
    ScenarioError,
    default_scenario,
    format_scenario,
    parse_scenario,
    parse_scenario_text,
)
from .simulator import (
    AcbController,
    AdaptiveController,
    Controller,
    ControllerKind,
    ControllerSpec,
    ContentionResult,
    DeviceState,
    DeviceStatus,
    FixedController,
    FrameOutcome,
    LoadProfile,
    ProfileSegment,
    ReplicationSet,
    Scenario,
    TimeSeries,
    acb_gate,
    aggregate_runs,
    contend,
    generate_arrivals,
    make_controller,
    resolve_backoff,
    run_replications,
    run_scenario,
)

__version__ = "0.1.0"
