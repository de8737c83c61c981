"""Persona-driven finite-state behavior engine.

Compile a textual persona into a complete behavior database through a
chat-completion provider, run it as a real-time non-verbal interaction
engine, and measure how distinguishable the resulting personas are.
"""

from .behaviordb import (
    BehaviorDatabase,
    GenerationManifest,
    PersonaSpec,
    ValidationReport,
    absorbing_states,
    deserialize,
    persona_signature,
    reachable_states,
    serialize,
    validate,
)
from .catalog import (
    FACES,
    MOTIONS,
    ObservationVector,
    RobotState,
    enumerate_observations,
    observation_from_index,
    observation_index,
)
from .engine import BehaviorEngine, StateChange, trace_from_jsonl, trace_to_jsonl
from .errors import GenerationFailed, SchemaError
from .evalkit import (
    ConfusionMatrix,
    Scenario,
    SurveyRecord,
    audit_trace,
    classification_accuracy,
    confusion_matrix,
    distinguishability_report,
    load_scenario,
    run_scenario,
    state_visit_histogram,
)
from .infuser import (
    BUILTIN_PERSONAS,
    GenerationJob,
    MockCompletionProvider,
    PromptTemplate,
    build_behavior_database,
)
from .perception import (
    PerceptionConfig,
    PersonSnapshot,
    curiosity_score,
    discretize,
    heading_direction,
    select_person_of_interest,
)

__version__ = "0.1.0"
