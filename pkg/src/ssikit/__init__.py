"""Model games as state spaces: declare, validate, simulate and query."""
from ._accel import USING_NUMBA
from .core import (
    Draw,
    GameModel,
    OperationDef,
    OpKind,
    State,
    StateSpace,
    Transition,
    ValidationReport,
    build_model,
    ground_operations,
    make_rng,
    outcomes,
    reachable_states,
    step,
    validate,
)
from .errors import *  # noqa: F401,F403
from .formats import (
    TraceDocument,
    load_model,
    load_spec,
    model_hash,
    parse_model,
    parse_spec,
    parse_trace,
    serialize_model,
    serialize_spec,
    serialize_trace,
)
from .paths import (
    AchievementSpec,
    EvolutionPath,
    PathQueryResult,
    PathStep,
    StateQuery,
    check_achievement,
    enumerate_paths,
    path_is_valid,
    record_path,
    speedrun,
)
from .simulate import (
    InteractivePolicy,
    ScriptedPolicy,
    UniformRandomPolicy,
    replay_trace,
    simulate,
)

__version__ = "0.1.0"
