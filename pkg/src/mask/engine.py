"""Runtime behavior-selection engine.

One engine drives one interaction session over a loaded behavior database.
Stepping is event-driven: a transition fires only when the person of interest
changes or when that person's observation changes; identical consecutive
frames are quiescent. Events for a session must be fed strictly serially.

Traces export as JSON lines, one StateChange per line, with a fixed field
order, so replaying an identical frame sequence from reset produces
byte-identical output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from .behaviordb import BehaviorDatabase
from .catalog import ObservationVector, observation_from_index, observation_index
from .errors import SchemaError
from .perception import (
    PerceptionConfig,
    PersonId,
    PersonSnapshot,
    heading_direction,
    select_person_of_interest,
)

__all__ = ["StateChange", "BehaviorEngine", "trace_to_jsonl", "trace_from_jsonl"]

TRIGGER_OBSERVATION = "observation_changed"
TRIGGER_POI = "poi_changed"
TRIGGER_RESET = "reset"


@dataclass(frozen=True)
class StateChange:
    """One recorded engine decision.

    For non-reset events, to_state is always the database cell for
    (from_state, observation); the trace auditor re-checks this from the
    database alone.
    """

    time: float
    trigger: str
    from_state: int
    to_state: int
    observation: Optional[ObservationVector]
    poi: Optional[PersonId]
    heading: float

    def to_record(self) -> dict:
        return {
            "time": self.time,
            "trigger": self.trigger,
            "from_state": self.from_state,
            "to_state": self.to_state,
            "observation": None if self.observation is None else observation_index(self.observation),
            "poi": self.poi,
            "heading": self.heading,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "StateChange":
        obs = rec.get("observation")
        return cls(
            time=float(rec["time"]),
            trigger=rec["trigger"],
            from_state=int(rec["from_state"]),
            to_state=int(rec["to_state"]),
            observation=None if obs is None else observation_from_index(int(obs)),
            poi=rec.get("poi"),
            heading=float(rec["heading"]),
        )


# Field order is the wire contract for trace lines.
_TRACE_FIELDS = ("time", "trigger", "from_state", "to_state", "observation", "poi", "heading")


def trace_to_jsonl(trace: Sequence[StateChange]) -> str:
    """Canonical JSONL export, one event per line, fixed field order."""
    lines = []
    for event in trace:
        rec = event.to_record()
        lines.append(json.dumps({k: rec[k] for k in _TRACE_FIELDS}, ensure_ascii=True))
    return "\n".join(lines) + ("\n" if lines else "")


def trace_from_jsonl(text: str) -> list[StateChange]:
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            events.append(StateChange.from_record(json.loads(line)))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"line {lineno}", f"bad trace record: {e}") from None
    return events


class BehaviorEngine:
    """Event-driven FSM over one behavior database.

    The engine holds its state when the scene empties (the person of interest
    dropping to none is not a behavior trigger); it resumes transitioning when
    someone appears again.
    """

    def __init__(self, database: BehaviorDatabase, cfg: Optional[PerceptionConfig] = None):
        self.database = database
        self.cfg = cfg or PerceptionConfig()
        self.current_state: int = database.initial_state
        self.poi: Optional[PersonId] = None
        self.last_observation: Optional[ObservationVector] = None
        self.last_heading: float = 0.0
        self.trace: list[StateChange] = []
        self.reset(time=0.0)

    def reset(self, time: float = 0.0) -> None:
        """Return to the database's initial state and start a fresh trace."""
        self.current_state = self.database.initial_state
        self.poi = None
        self.last_observation = None
        self.last_heading = 0.0
        self.trace = [
            StateChange(
                time=time,
                trigger=TRIGGER_RESET,
                from_state=self.current_state,
                to_state=self.current_state,
                observation=None,
                poi=None,
                heading=0.0,
            )
        ]

    def step(
        self,
        frame: Sequence[tuple[PersonSnapshot, ObservationVector]],
        time: float,
    ) -> Optional[StateChange]:
        """Process one perception frame; returns the StateChange if one fired.

        A transition fires when the person of interest changes or when their
        observation differs from the previous frame; otherwise the engine is
        quiescent. An empty frame clears the person of interest and holds the
        current state without a table lookup.
        """
        poi = select_person_of_interest(frame, self.poi, self.cfg)
        if poi is None:
            self.poi = None
            self.last_observation = None
            return None

        snap, obs = next((s, o) for s, o in frame if s.person_id == poi)
        poi_changed = poi != self.poi
        if not poi_changed and obs == self.last_observation:
            return None

        successor = self.database.transitions[self.current_state][observation_index(obs)]
        event = StateChange(
            time=time,
            trigger=TRIGGER_POI if poi_changed else TRIGGER_OBSERVATION,
            from_state=self.current_state,
            to_state=successor,
            observation=obs,
            poi=poi,
            heading=heading_direction(snap),
        )
        self.current_state = successor
        self.poi = poi
        self.last_observation = obs
        self.last_heading = event.heading
        self.trace.append(event)
        return event

    def current_display(self) -> tuple[str, str, str, float]:
        """(motion name, face name, emoji, heading) for the action library stub."""
        state = self.database.states[self.current_state]
        return state.motion.name, state.face.name, state.face.emoji, self.last_heading
