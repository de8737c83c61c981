"""Deterministic local completion provider for tests and offline demos.

The mock recognizes the pipeline's prompts by their stable marker lines and
answers from hand-written rule tables for four built-in personas, keyed by
trait keywords in the persona text (shy/coward, angry/aggressive,
naughty/playful, blunt/cynical/pococurante). Each table maps observation
saliency to avoidant, confrontational, engaging, or indifferent successors,
so the four compiled databases are structurally distinct by construction.

Any prompt that matches no table falls back to echo behavior: transitions
answer the current-state token embedded in the prompt (pure self-transitions),
expression pairing answers by name affinity, and motion selection answers the
first four catalog motions.
"""

from __future__ import annotations

import re
from typing import Callable, Optional

from ..behaviordb import PersonaSpec
from ..catalog import FACES, MOTIONS, ObservationVector
from .providers import CompletionProvider

__all__ = ["MockCompletionProvider", "mock_completion", "BUILTIN_PERSONAS"]

BUILTIN_PERSONAS: dict[str, PersonaSpec] = {
    "TEST_SHY": PersonaSpec(
        name="TEST_SHY",
        description=(
            "A shy, cowardly character that hides from attention, cries under "
            "pressure, and only peeks out again when left alone."
        ),
    ),
    "TEST_AGGRESSIVE": PersonaSpec(
        name="TEST_AGGRESSIVE",
        description=(
            "An angry, aggressive character that dislikes others, shoves back "
            "at anyone who crowds it, and lures the curious closer just to "
            "turn them away."
        ),
    ),
    "TEST_PLAYFUL": PersonaSpec(
        name="TEST_PLAYFUL",
        description=(
            "A naughty, active, playful character that waves at everyone, "
            "teases visitors, and loves being the center of attention."
        ),
    ),
    "TEST_ALOOF": PersonaSpec(
        name="TEST_ALOOF",
        description=(
            "A blunt, cynical, pococurante character that would rather read "
            "its book than acknowledge visitors."
        ),
    ),
}


def _saliency(obs: ObservationVector) -> int:
    """Integer attention-pressure score of an observation, 0..7.

    Internal to the mock's rule tables; intentionally independent of the
    perception module's configurable curiosity weights.
    """
    score = obs.raised_hands
    if obs.hand_motion == "waving":
        score += 2
    if obs.distance == "close":
        score += 1
    if obs.gaze == "gaze":
        score += 1
    if obs.approach == "approach":
        score += 1
    return score


def _shy_next(current: str, obs: ObservationVector) -> str:
    s = _saliency(obs)
    if s >= 4:
        return "hide away"
    if s >= 2:
        return "cry"
    if obs.approach == "leave":
        return "look around"
    if current in ("hide away", "cry"):
        return "standstill"
    return current


def _aggressive_next(current: str, obs: ObservationVector) -> str:
    s = _saliency(obs)
    if s >= 4:
        return "push away"
    if s >= 2:
        return "cross arms"
    if s == 1:
        return "attract to come closer"
    if obs.approach == "leave":
        return "yawn"
    if current in ("push away", "attract to come closer"):
        return "cross arms"
    return current


def _playful_next(current: str, obs: ObservationVector) -> str:
    s = _saliency(obs)
    if s >= 4:
        return "teasing"
    if s >= 2:
        return "wave hand big"
    if s == 1:
        return "attract to come closer"
    if obs.approach == "leave":
        return "wave hand big"
    if current in ("teasing", "wave hand big"):
        return "wave hand small"
    return current


def _aloof_next(current: str, obs: ObservationVector) -> str:
    s = _saliency(obs)
    if s >= 4:
        return "look around"
    if s >= 2:
        return "yawn"
    if s == 1:
        return current
    if obs.approach == "leave":
        return "read book"
    if current in ("look around", "yawn"):
        return "standstill"
    if current == "standstill":
        return "read book"
    return current


class _RuleTable:
    def __init__(
        self,
        keywords: tuple[str, ...],
        motions: tuple[str, ...],
        faces: dict[str, str],
        initial: str,
        next_motion: Callable[[str, ObservationVector], str],
    ):
        self.keywords = keywords
        self.motions = motions
        self.faces = faces
        self.initial = initial
        self.next_motion = next_motion


# Checked in declaration order; the first table whose keyword appears in the
# prompt wins.
_RULE_TABLES: tuple[_RuleTable, ...] = (
    _RuleTable(
        keywords=("shy", "coward"),
        motions=("hide away", "cry", "look around", "standstill"),
        faces={
            "hide away": "scared",
            "cry": "cry",
            "look around": "neutral",
            "standstill": "neutral",
        },
        initial="look around",
        next_motion=_shy_next,
    ),
    _RuleTable(
        keywords=("angry", "aggressive"),
        motions=("push away", "cross arms", "attract to come closer", "yawn"),
        faces={
            "push away": "angry",
            "cross arms": "angry",
            "attract to come closer": "smile",
            "yawn": "yawn",
        },
        initial="cross arms",
        next_motion=_aggressive_next,
    ),
    _RuleTable(
        keywords=("naughty", "playful"),
        motions=("wave hand big", "wave hand small", "teasing", "attract to come closer"),
        faces={
            "wave hand big": "excited",
            "wave hand small": "smile",
            "teasing": "tongue out",
            "attract to come closer": "excited",
        },
        initial="wave hand big",
        next_motion=_playful_next,
    ),
    _RuleTable(
        keywords=("blunt", "cynical", "pococurante"),
        motions=("read book", "yawn", "look around", "standstill"),
        faces={
            "read book": "reading book",
            "yawn": "yawn",
            "look around": "neutral",
            "standstill": "neutral",
        },
        initial="read book",
        next_motion=_aloof_next,
    ),
)


_PERSONA_LINE_RE = re.compile(r'^Persona "[^"]*": (.+)$', re.MULTILINE)


def _match_table(prompt: str) -> Optional[_RuleTable]:
    """Match trait keywords against the persona line only; the cue catalogs
    elsewhere in the prompt contain words like "angry" and must not key a table."""
    m = _PERSONA_LINE_RE.search(prompt)
    if m is None:
        return None
    lowered = m.group(1).lower()
    for table in _RULE_TABLES:
        if any(kw in lowered for kw in table.keywords):
            return table
    return None


_CURRENT_STATE_RE = re.compile(r"^Current state: (.+)$", re.MULTILINE)
_MOTION_RE = re.compile(r"^Motion: (.+)$", re.MULTILINE)
_STATES_RE = re.compile(r"named by its motion\): (.+)$", re.MULTILINE)
_OBSERVATION_RE = re.compile(
    r"raised_hands=(\d), distance=(\w+), gaze=(\w+), hand_motion=(\w+), approach=(\w+)"
)


def _parse_observation(prompt: str) -> Optional[ObservationVector]:
    m = _OBSERVATION_RE.search(prompt)
    if m is None:
        return None
    return ObservationVector(
        raised_hands=int(m.group(1)),
        distance=m.group(2),
        gaze=m.group(3),
        hand_motion=m.group(4),
        approach=m.group(5),
    )


def _affinity_face(motion_name: str) -> str:
    """Echo fallback for expression pairing: first face sharing a word with
    the motion name (cry -> cry, yawn -> yawn, read book -> reading book),
    else neutral."""
    motion_words = set(motion_name.split())
    for face in FACES:
        if motion_words & set(face.name.split()):
            return face.name
    return "neutral"


def mock_completion(prompt: str, seed: int) -> str:
    """Deterministic completion function behind MockCompletionProvider.

    The reply depends only on (prompt, seed); the seed is accepted for
    interface parity but the mapping is already fully determined by the
    prompt text.
    """
    table = _match_table(prompt)

    current = _CURRENT_STATE_RE.search(prompt)
    if current is not None:
        # Transition estimation.
        obs = _parse_observation(prompt)
        if table is not None and obs is not None:
            return table.next_motion(current.group(1).strip(), obs)
        return current.group(1).strip()

    motion = _MOTION_RE.search(prompt)
    if motion is not None:
        # Expression integration.
        name = motion.group(1).strip()
        if table is not None and name in table.faces:
            return table.faces[name]
        return _affinity_face(name)

    states = _STATES_RE.search(prompt)
    if states is not None:
        # Initial-state pick (the only remaining prompt with a state list).
        listed = [s.strip() for s in states.group(1).split(",")]
        if table is not None and table.initial in listed:
            return table.initial
        return listed[0]

    if "motion" in prompt.lower():
        # Motion selection.
        if table is not None:
            return ", ".join(table.motions)
        return ", ".join(m.name for m in MOTIONS[:4])

    # Unrecognized prompt with no embedded state token: echo it back.
    return prompt.strip().splitlines()[-1] if prompt.strip() else ""


class MockCompletionProvider(CompletionProvider):
    """Local, reentrant, deterministic stand-in for the real provider."""

    model = "mock"

    def __init__(self, max_retries: int = 3):
        self.max_retries = max_retries

    def complete(self, prompt: str, *, seed: int) -> str:
        return mock_completion(prompt, seed)
