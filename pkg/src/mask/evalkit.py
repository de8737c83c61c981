"""Scenario simulation and persona-evaluation metrics.

Scenarios stand in for live camera input: time-ordered frames of visitor
snapshots, stored as `.scene.json`. Survey records feed the two study
metrics, a fitting-score-weighted confusion matrix and a plain classification
accuracy; distinguishability of compiled personas is measured directly from
database signatures. Everything here is pure and batch-parallel safe.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .behaviordb import BehaviorDatabase, persona_signature
from .catalog import observation_index
from .engine import TRIGGER_RESET, BehaviorEngine, StateChange
from .errors import SchemaError
from .perception import PerceptionConfig, PersonSnapshot, discretize

__all__ = [
    "Scenario",
    "SurveyRecord",
    "ConfusionMatrix",
    "SUCCESS_THRESHOLD",
    "load_scenario",
    "run_scenario",
    "audit_trace",
    "state_visit_histogram",
    "confusion_matrix",
    "classification_accuracy",
    "weighted_classification_accuracy",
    "load_survey_records",
    "evaluation_report",
    "distinguishability_report",
]

# Success bar for persona classification: four times a random guess over six
# characters would be ~0.667; the bar is fixed at 0.67.
SUCCESS_THRESHOLD = 0.67


@dataclass(frozen=True)
class Scenario:
    """A named, time-ordered stream of visitor-snapshot frames."""

    name: str
    frames: tuple[tuple[float, tuple[PersonSnapshot, ...]], ...]

    def __post_init__(self):
        times = [t for t, _ in self.frames]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"scenario {self.name!r}: timestamps must be strictly increasing")


_SNAPSHOT_FIELDS = (
    "person_id",
    "left_hand_height",
    "right_hand_height",
    "gaze_angle",
    "distance",
    "hand_speed",
    "radial_velocity",
    "bearing",
)


def _snapshot_from_record(rec: dict, path: str) -> PersonSnapshot:
    if not isinstance(rec, dict):
        raise SchemaError(path, f"expected object, got {type(rec).__name__}")
    kwargs = {}
    for field_name in _SNAPSHOT_FIELDS:
        if field_name not in rec:
            if field_name == "bearing":
                continue
            raise SchemaError(f"{path}.{field_name}", "missing required key")
        value = rec[field_name]
        if field_name == "person_id":
            if not isinstance(value, (int, str)) or isinstance(value, bool):
                raise SchemaError(f"{path}.person_id", "expected integer or string")
        elif not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaError(f"{path}.{field_name}", "expected number")
        kwargs[field_name] = value
    try:
        return PersonSnapshot(**kwargs)
    except ValueError as e:
        raise SchemaError(path, str(e)) from None


def load_scenario(source: Union[str, Path, bytes]) -> Scenario:
    """Parse a `.scene.json` file or payload, with schema errors naming paths."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError("$", f"not a valid JSON document: {e}") from None
    if not isinstance(doc, dict):
        raise SchemaError("$", "expected object")
    name = doc.get("name")
    if not isinstance(name, str):
        raise SchemaError("$.name", "expected string")
    raw_frames = doc.get("frames")
    if not isinstance(raw_frames, list):
        raise SchemaError("$.frames", "expected array")
    frames = []
    for i, frame in enumerate(raw_frames):
        if not isinstance(frame, dict):
            raise SchemaError(f"$.frames[{i}]", "expected object")
        t = frame.get("time")
        if not isinstance(t, (int, float)) or isinstance(t, bool):
            raise SchemaError(f"$.frames[{i}].time", "expected number")
        persons = frame.get("persons")
        if not isinstance(persons, list):
            raise SchemaError(f"$.frames[{i}].persons", "expected array")
        snaps = tuple(
            _snapshot_from_record(p, f"$.frames[{i}].persons[{j}]") for j, p in enumerate(persons)
        )
        frames.append((float(t), snaps))
    try:
        return Scenario(name=name, frames=tuple(frames))
    except ValueError as e:
        raise SchemaError("$.frames", str(e)) from None


def run_scenario(
    scenario: Scenario,
    db: BehaviorDatabase,
    cfg: Optional[PerceptionConfig] = None,
) -> list[StateChange]:
    """Deterministic replay: discretize every frame, step the engine, return the trace."""
    cfg = cfg or PerceptionConfig()
    engine = BehaviorEngine(db, cfg)
    engine.reset(time=0.0)
    for t, snaps in scenario.frames:
        frame = [(snap, discretize(snap, cfg)) for snap in snaps]
        engine.step(frame, time=t)
    return list(engine.trace)


def audit_trace(trace: Sequence[StateChange], db: BehaviorDatabase) -> list[str]:
    """Independent trigger-soundness check of a trace against its database.

    Re-derives every claim from the database table alone (no engine code):
    returns a list of violation descriptions, empty when the trace is clean.
    """
    problems: list[str] = []
    if not trace:
        return ["trace is empty (expected a leading reset event)"]
    n = len(db.states)
    if trace[0].trigger != TRIGGER_RESET:
        problems.append(f"event 0: trace must start with a reset, got {trace[0].trigger!r}")
    legal = {TRIGGER_RESET, "observation_changed", "poi_changed"}
    previous_time = None
    previous_to: Optional[int] = None
    for k, event in enumerate(trace):
        if event.trigger not in legal:
            problems.append(f"event {k}: illegal trigger {event.trigger!r}")
            continue
        if not (0 <= event.from_state < n and 0 <= event.to_state < n):
            problems.append(f"event {k}: state index out of range")
            continue
        if previous_time is not None and event.time < previous_time:
            problems.append(f"event {k}: time {event.time} precedes {previous_time}")
        if event.trigger == TRIGGER_RESET:
            if event.to_state != db.initial_state:
                problems.append(
                    f"event {k}: reset lands on {event.to_state}, "
                    f"initial state is {db.initial_state}"
                )
        else:
            if event.observation is None:
                problems.append(f"event {k}: non-reset event without an observation")
                continue
            if previous_to is not None and event.from_state != previous_to:
                problems.append(
                    f"event {k}: from_state {event.from_state} does not chain "
                    f"from previous to_state {previous_to}"
                )
            expected = db.transitions[event.from_state][observation_index(event.observation)]
            if event.to_state != expected:
                problems.append(
                    f"event {k}: to_state {event.to_state} does not match "
                    f"database cell {expected}"
                )
        previous_time = event.time
        previous_to = event.to_state
    return problems


def state_visit_histogram(trace: Sequence[StateChange]) -> dict[int, int]:
    """Arrival counts per state over non-reset events (diagnoses repetitive behavior)."""
    hist: dict[int, int] = {}
    for event in trace:
        if event.trigger == TRIGGER_RESET:
            continue
        hist[event.to_state] = hist.get(event.to_state, 0) + 1
    return hist


@dataclass(frozen=True)
class SurveyRecord:
    """One participant's answers: persona shown, character chosen, fitting score 0..100."""

    participant: int
    shown: str
    chosen: str
    fitting_score: float

    def __post_init__(self):
        if not 0.0 <= self.fitting_score <= 100.0:
            raise ValueError(f"fitting_score must be in [0, 100], got {self.fitting_score}")


@dataclass(frozen=True)
class ConfusionMatrix:
    """Fitting-score-weighted confusion matrix.

    entries[i][j] is the score-weighted fraction of participants shown
    character j who chose character i; populated columns sum to 1. Columns
    with no records (or zero total score) are listed in absent_columns and
    hold zeros rather than NaN.
    """

    characters: tuple[str, ...]
    entries: np.ndarray
    absent_columns: tuple[str, ...] = ()

    def value(self, chosen: str, shown: str) -> float:
        i = self.characters.index(chosen)
        j = self.characters.index(shown)
        return float(self.entries[i, j])

    def to_markdown(self) -> str:
        """Rows = chosen character, columns = shown persona."""
        header = "| chosen \\ shown | " + " | ".join(self.characters) + " |"
        rule = "|" + " --- |" * (len(self.characters) + 1)
        rows = []
        for i, character in enumerate(self.characters):
            cells = " | ".join(f"{self.entries[i, j]:.3f}" for j in range(len(self.characters)))
            rows.append(f"| {character} | {cells} |")
        return "\n".join([header, rule, *rows])


def confusion_matrix(records: Sequence[SurveyRecord], characters: Sequence[str]) -> ConfusionMatrix:
    """Score-weighted confusion matrix over the given character list.

    Every shown persona and every chosen character must be in `characters`
    (the survey's character question was multiple-choice).
    """
    chars = tuple(characters)
    index = {c: i for i, c in enumerate(chars)}
    for rec in records:
        if rec.shown not in index:
            raise ValueError(f"shown persona {rec.shown!r} not in character list")
        if rec.chosen not in index:
            raise ValueError(f"chosen character {rec.chosen!r} not in character list")
    k = len(chars)
    numerator = np.zeros((k, k))
    denominator = np.zeros(k)
    for rec in records:
        i = index[rec.chosen]
        j = index[rec.shown]
        numerator[i, j] += rec.fitting_score
        denominator[j] += rec.fitting_score
    entries = np.zeros((k, k))
    absent = []
    for j in range(k):
        if denominator[j] > 0:
            entries[:, j] = numerator[:, j] / denominator[j]
        else:
            absent.append(chars[j])
    return ConfusionMatrix(characters=chars, entries=entries, absent_columns=tuple(absent))


def classification_accuracy(records: Sequence[SurveyRecord]) -> float:
    """Unweighted fraction of participants who chose the persona they were shown."""
    if not records:
        raise ValueError("cannot compute accuracy of zero records")
    correct = sum(1 for rec in records if rec.chosen == rec.shown)
    return correct / len(records)


def weighted_classification_accuracy(records: Sequence[SurveyRecord]) -> float:
    """Fitting-score-weighted variant of classification_accuracy."""
    if not records:
        raise ValueError("cannot compute accuracy of zero records")
    total = sum(rec.fitting_score for rec in records)
    if total == 0:
        raise ValueError("cannot weight accuracy: all fitting scores are zero")
    return sum(rec.fitting_score for rec in records if rec.chosen == rec.shown) / total


def load_survey_records(source: Union[str, Path, bytes]) -> list[SurveyRecord]:
    """Parse a survey-records JSON array."""
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    else:
        data = source
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError("$", f"not a valid JSON document: {e}") from None
    if not isinstance(doc, list):
        raise SchemaError("$", "expected array of records")
    records = []
    for i, rec in enumerate(doc):
        if not isinstance(rec, dict):
            raise SchemaError(f"$[{i}]", "expected object")
        try:
            records.append(
                SurveyRecord(
                    participant=int(rec.get("participant", i)),
                    shown=rec["shown"],
                    chosen=rec["chosen"],
                    fitting_score=float(rec["fitting_score"]),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise SchemaError(f"$[{i}]", f"bad survey record: {e}") from None
    return records


def evaluation_report(records: Sequence[SurveyRecord], characters: Sequence[str]) -> dict:
    """Both study metrics plus the success-threshold flag, JSON-ready."""
    matrix = confusion_matrix(records, characters)
    accuracy = classification_accuracy(records)
    return {
        "records": len(records),
        "characters": list(matrix.characters),
        "confusion_matrix": [[float(v) for v in row] for row in matrix.entries],
        "absent_columns": list(matrix.absent_columns),
        "accuracy": accuracy,
        "weighted_accuracy": weighted_classification_accuracy(records),
        "success_threshold": SUCCESS_THRESHOLD,
        "meets_success_threshold": accuracy >= SUCCESS_THRESHOLD,
    }


def distinguishability_report(dbs: Sequence[BehaviorDatabase]) -> tuple[list[str], np.ndarray]:
    """Pairwise L1 distances between persona signatures.

    A software stand-in for asking humans to tell personas apart: distance 0
    means two databases react with identical motion distributions everywhere.
    """
    if len(dbs) < 2:
        raise ValueError("need at least two databases to compare")
    names = [db.persona.name for db in dbs]
    signatures = [persona_signature(db) for db in dbs]
    k = len(dbs)
    distances = np.zeros((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            d = float(np.abs(signatures[a] - signatures[b]).sum())
            distances[a, b] = distances[b, a] = d
    return names, distances
