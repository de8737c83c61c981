"""Prompt templates and their rendering.

Templates are data files shipped with the package (templates/*.txt), not
code: they can be swapped without touching the pipeline, and their hashes go
into the generation manifest so a database records exactly which wording
produced it.

Placeholders (str.format style):
    {persona_name} {persona_description}   all templates
    {motion_catalog} {min_motions} {max_motions}   motion selection
    {face_catalog} {motion}                        expression integration
    {state_catalog}                                initial state, transition
    {state} {observation}                          transition
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources

from ..behaviordb import PersonaSpec
from ..catalog import FACES, MOTIONS, MotionCue, ObservationVector, RobotState

__all__ = ["PromptTemplate", "render"]

_REQUIRED_PLACEHOLDERS = {
    "motion_selection": ("{persona_description}", "{motion_catalog}", "{min_motions}", "{max_motions}"),
    "expression_integration": ("{persona_description}", "{face_catalog}", "{motion}"),
    "initial_state": ("{persona_description}", "{state_catalog}"),
    "transition": ("{persona_description}", "{state_catalog}", "{state}", "{observation}"),
}


@dataclass(frozen=True)
class PromptTemplate:
    """The four stage templates used to compile one persona."""

    motion_selection: str
    expression_integration: str
    initial_state: str
    transition: str

    def __post_init__(self):
        for stage, needed in _REQUIRED_PLACEHOLDERS.items():
            text = getattr(self, stage)
            for placeholder in needed:
                if placeholder not in text:
                    raise ValueError(f"{stage} template is missing placeholder {placeholder}")

    @classmethod
    def default(cls) -> "PromptTemplate":
        """Load the templates shipped with the package."""
        base = resources.files(__package__) / "templates"
        return cls(
            motion_selection=(base / "motion_selection.txt").read_text(encoding="utf-8"),
            expression_integration=(base / "expression_integration.txt").read_text(encoding="utf-8"),
            initial_state=(base / "initial_state.txt").read_text(encoding="utf-8"),
            transition=(base / "transition.txt").read_text(encoding="utf-8"),
        )

    def hashes(self) -> dict[str, str]:
        """sha256 per template, recorded in the generation manifest."""
        return {
            stage: hashlib.sha256(getattr(self, stage).encode("utf-8")).hexdigest()
            for stage in _REQUIRED_PLACEHOLDERS
        }


def _motion_catalog() -> str:
    return ", ".join(m.name for m in MOTIONS)


def _face_catalog() -> str:
    return ", ".join(f.name for f in FACES)


def _state_catalog(states: list[RobotState]) -> str:
    return ", ".join(s.motion.name for s in states)


def render_motion_selection(
    t: PromptTemplate, persona: PersonaSpec, min_motions: int, max_motions: int
) -> str:
    return t.motion_selection.format(
        persona_name=persona.name,
        persona_description=persona.description,
        motion_catalog=_motion_catalog(),
        min_motions=min_motions,
        max_motions=max_motions,
    )


def render_expression_integration(
    t: PromptTemplate, persona: PersonaSpec, motion: MotionCue
) -> str:
    return t.expression_integration.format(
        persona_name=persona.name,
        persona_description=persona.description,
        face_catalog=_face_catalog(),
        motion=motion.name,
    )


def render_initial_state(t: PromptTemplate, persona: PersonaSpec, states: list[RobotState]) -> str:
    return t.initial_state.format(
        persona_name=persona.name,
        persona_description=persona.description,
        state_catalog=_state_catalog(states),
    )


def render_transition(
    t: PromptTemplate,
    persona: PersonaSpec,
    states: list[RobotState],
    state: RobotState,
    obs: ObservationVector,
) -> str:
    return t.transition.format(
        persona_name=persona.name,
        persona_description=persona.description,
        state_catalog=_state_catalog(states),
        state=state.motion.name,
        observation=obs.describe(),
    )
