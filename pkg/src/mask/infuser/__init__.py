"""Persona infuser: compiles persona text into a behavior database via a
chat-completion provider."""

from .mock import BUILTIN_PERSONAS, MockCompletionProvider, mock_completion
from .pipeline import (
    GenerationJob,
    build_behavior_database,
    estimate_transition,
    motion_count_bounds,
    pair_expression,
    pick_initial_state,
    select_motions,
)
from .prompts import PromptTemplate
from .providers import (
    CachingProvider,
    CompletionProvider,
    HTTPChatProvider,
    ProviderError,
    ReplayProvider,
    TranscriptCache,
)

__all__ = [
    "BUILTIN_PERSONAS",
    "MockCompletionProvider",
    "mock_completion",
    "GenerationJob",
    "build_behavior_database",
    "estimate_transition",
    "motion_count_bounds",
    "pair_expression",
    "pick_initial_state",
    "select_motions",
    "PromptTemplate",
    "CachingProvider",
    "CompletionProvider",
    "HTTPChatProvider",
    "ProviderError",
    "ReplayProvider",
    "TranscriptCache",
]
