"""Behavior-database data model, bit-exact file format, and structural analysis.

A behavior database is the compiled form of one persona: the selected robot
states, an initial state, and a total deterministic transition table over
(state, observation) pairs. Databases are immutable after construction; the
analysis functions here are pure.

File format (`.maskdb.json`, format_version 1): a single JSON object with
keys {format_version, persona, motions, states, initial_state, transitions,
manifest}. Transitions are a flat |states| x 72 integer matrix indexed by
canonical observation order, which keeps the format bit-exact and
diff-friendly. Canonical serialization uses sorted keys, compact separators,
and ASCII escapes, so structurally equal databases always produce identical
bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .catalog import (
    MOTION_COUNT,
    OBSERVATION_COUNT,
    RobotState,
    face_by_name,
    motion_by_name,
)
from .errors import SchemaError

__all__ = [
    "FORMAT_VERSION",
    "PersonaSpec",
    "GenerationManifest",
    "BehaviorDatabase",
    "ValidationReport",
    "validate",
    "reachable_states",
    "absorbing_states",
    "persona_signature",
    "serialize",
    "deserialize",
]

FORMAT_VERSION = 1


@dataclass(frozen=True)
class PersonaSpec:
    """A persona to compile: short name, free-text description, RNG seed."""

    name: str
    description: str
    seed: int = 0

    def __post_init__(self):
        if not self.name:
            raise ValueError("persona name must be non-empty")
        if not self.description.strip():
            raise ValueError("persona description must be non-empty")


@dataclass(frozen=True)
class GenerationManifest:
    """How a database was generated: model id, seed, prompt hashes, warnings.

    Deliberately free of timestamps so identical (persona, seed) builds
    serialize to identical bytes.
    """

    model: str = ""
    seed: int = 0
    prompt_hashes: tuple[tuple[str, str], ...] = ()
    warnings: tuple[str, ...] = ()


@dataclass
class BehaviorDatabase:
    """One persona's complete finite-state behavior blueprint.

    transitions[i][o] is the successor state index when observation o arrives
    in state i; a None cell marks a structural defect reported by validate().
    """

    persona: PersonaSpec
    motions: list[str]
    states: list[RobotState]
    initial_state: int
    transitions: list[list[Optional[int]]]
    manifest: GenerationManifest = field(default_factory=GenerationManifest)

    @property
    def state_count(self) -> int:
        return len(self.states)

    def state_label(self, index: int) -> str:
        s = self.states[index]
        return f"{s.motion.name} / {s.face.name}"


@dataclass
class ValidationReport:
    """Every structural defect found in a database.

    Reachability is a warning, not an error: nothing promises that all
    generated states are reachable from the initial one.
    """

    ok: bool
    missing_pairs: list[tuple[int, int]]
    out_of_range_successors: list[tuple[int, int]]
    duplicate_states: list[tuple[int, int]]
    unreachable_states: list[int]
    initial_state_in_range: bool = True

    def summary(self) -> str:
        if self.ok:
            extra = ""
            if self.unreachable_states:
                extra = f" (warning: {len(self.unreachable_states)} unreachable states)"
            return "ok" + extra
        parts = []
        if not self.initial_state_in_range:
            parts.append("initial state out of range")
        if self.missing_pairs:
            parts.append(f"{len(self.missing_pairs)} missing transition cells")
        if self.out_of_range_successors:
            parts.append(f"{len(self.out_of_range_successors)} out-of-range successors")
        if self.duplicate_states:
            parts.append(f"{len(self.duplicate_states)} duplicate state pairs")
        return "invalid: " + ", ".join(parts)


def validate(db: BehaviorDatabase) -> ValidationReport:
    """Check totality, closure, state uniqueness, and initial-state range."""
    n = len(db.states)
    missing: list[tuple[int, int]] = []
    out_of_range: list[tuple[int, int]] = []
    duplicates: list[tuple[int, int]] = []

    seen: dict[tuple[str, str], int] = {}
    for i, s in enumerate(db.states):
        key = (s.motion.name, s.face.name)
        if key in seen:
            duplicates.append((seen[key], i))
        else:
            seen[key] = i

    for i in range(n):
        row = db.transitions[i] if i < len(db.transitions) else []
        for o in range(OBSERVATION_COUNT):
            cell = row[o] if o < len(row) else None
            if cell is None:
                missing.append((i, o))
            elif not isinstance(cell, int) or isinstance(cell, bool) or not 0 <= cell < n:
                out_of_range.append((i, o))

    initial_ok = 0 <= db.initial_state < n
    ok = initial_ok and not missing and not out_of_range and not duplicates

    unreachable: list[int] = []
    if initial_ok:
        reached = _reachable(db)
        unreachable = sorted(set(range(n)) - reached)

    return ValidationReport(
        ok=ok,
        missing_pairs=missing,
        out_of_range_successors=out_of_range,
        duplicate_states=duplicates,
        unreachable_states=unreachable,
        initial_state_in_range=initial_ok,
    )


def _reachable(db: BehaviorDatabase) -> set[int]:
    """Fixed point of successor expansion from the initial state.

    Tolerates defective cells (treated as absent edges) so it can run on
    databases that fail validation.
    """
    n = len(db.states)
    reached = {db.initial_state}
    frontier = [db.initial_state]
    while frontier:
        i = frontier.pop()
        row = db.transitions[i] if i < len(db.transitions) else []
        for cell in row[:OBSERVATION_COUNT]:
            if isinstance(cell, int) and not isinstance(cell, bool) and 0 <= cell < n:
                if cell not in reached:
                    reached.add(cell)
                    frontier.append(cell)
    return reached


def reachable_states(db: BehaviorDatabase) -> set[int]:
    """State indices reachable from the initial state under any observation sequence."""
    return _reachable(db)


def absorbing_states(db: BehaviorDatabase) -> set[int]:
    """States whose successor is themselves under all 72 observations."""
    return {
        i
        for i in range(len(db.states))
        if all(db.transitions[i][o] == i for o in range(OBSERVATION_COUNT))
    }


def persona_signature(db: BehaviorDatabase) -> np.ndarray:
    """Persona fingerprint comparable across databases with different state sets.

    For each (observation, motion) cell: the fraction of the database's states
    whose successor under that observation performs that motion. Flat vector of
    length 72 * 13, observation-major; each 13-wide observation block is a
    probability distribution over motions.
    """
    n = len(db.states)
    sig = np.zeros((OBSERVATION_COUNT, MOTION_COUNT), dtype=float)
    for o in range(OBSERVATION_COUNT):
        for i in range(n):
            succ = db.transitions[i][o]
            sig[o, db.states[succ].motion.id] += 1.0
    sig /= n
    return sig.reshape(-1)


def serialize(db: BehaviorDatabase) -> bytes:
    """Canonical byte serialization; structurally equal databases yield equal bytes."""
    n = len(db.states)
    if not 0 <= db.initial_state < n:
        raise ValueError("cannot serialize: initial_state out of range")
    for i, row in enumerate(db.transitions):
        for o, cell in enumerate(row):
            if not isinstance(cell, int) or isinstance(cell, bool) or not 0 <= cell < n:
                raise ValueError(f"cannot serialize: bad transition cell at [{i}][{o}]: {cell!r}")
    payload = {
        "format_version": FORMAT_VERSION,
        "persona": {
            "name": db.persona.name,
            "description": db.persona.description,
            "seed": db.persona.seed,
        },
        "motions": list(db.motions),
        "states": [[s.motion.name, s.face.name] for s in db.states],
        "initial_state": db.initial_state,
        "transitions": [list(row) for row in db.transitions],
        "manifest": {
            "model": db.manifest.model,
            "seed": db.manifest.seed,
            "prompt_hashes": {k: v for k, v in db.manifest.prompt_hashes},
            "warnings": list(db.manifest.warnings),
        },
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=True).encode(
        "utf-8"
    )


def _expect(obj: Any, path: str, kind: type, kind_name: str) -> Any:
    if not isinstance(obj, kind) or (kind is int and isinstance(obj, bool)):
        raise SchemaError(path, f"expected {kind_name}, got {type(obj).__name__}")
    return obj


def deserialize(data: bytes) -> BehaviorDatabase:
    """Parse and schema-check a `.maskdb.json` payload."""
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise SchemaError("$", f"not a valid JSON document: {e}") from None

    _expect(doc, "$", dict, "object")
    known = {
        "format_version",
        "persona",
        "motions",
        "states",
        "initial_state",
        "transitions",
        "manifest",
    }
    for key in doc:
        if key not in known:
            raise SchemaError(f"$.{key}", "unknown key")
    for key in known:
        if key not in doc:
            raise SchemaError(f"$.{key}", "missing required key")

    if doc["format_version"] != FORMAT_VERSION:
        raise SchemaError("$.format_version", f"unsupported version {doc['format_version']!r}")

    p = _expect(doc["persona"], "$.persona", dict, "object")
    persona = PersonaSpec(
        name=_expect(p.get("name"), "$.persona.name", str, "string"),
        description=_expect(p.get("description"), "$.persona.description", str, "string"),
        seed=_expect(p.get("seed"), "$.persona.seed", int, "integer"),
    )

    motions = _expect(doc["motions"], "$.motions", list, "array")
    motion_names = set()
    for i, name in enumerate(motions):
        _expect(name, f"$.motions[{i}]", str, "string")
        try:
            motion_by_name(name)
        except KeyError:
            raise SchemaError(f"$.motions[{i}]", f"not a catalog motion: {name!r}") from None
        if name in motion_names:
            raise SchemaError(f"$.motions[{i}]", f"duplicate motion: {name!r}")
        motion_names.add(name)

    raw_states = _expect(doc["states"], "$.states", list, "array")
    if not raw_states:
        raise SchemaError("$.states", "state list must be non-empty")
    states: list[RobotState] = []
    for i, pair in enumerate(raw_states):
        _expect(pair, f"$.states[{i}]", list, "array")
        if len(pair) != 2:
            raise SchemaError(f"$.states[{i}]", "expected [motion_name, face_name]")
        m_name = _expect(pair[0], f"$.states[{i}][0]", str, "string")
        f_name = _expect(pair[1], f"$.states[{i}][1]", str, "string")
        try:
            motion = motion_by_name(m_name)
        except KeyError:
            raise SchemaError(f"$.states[{i}][0]", f"not a catalog motion: {m_name!r}") from None
        try:
            face = face_by_name(f_name)
        except KeyError:
            raise SchemaError(f"$.states[{i}][1]", f"not a catalog face: {f_name!r}") from None
        if motion.name not in motion_names:
            raise SchemaError(f"$.states[{i}][0]", f"motion {m_name!r} not in $.motions")
        states.append(RobotState(motion, face))

    initial = _expect(doc["initial_state"], "$.initial_state", int, "integer")
    if not 0 <= initial < len(states):
        raise SchemaError("$.initial_state", f"index {initial} out of range 0..{len(states) - 1}")

    raw_tr = _expect(doc["transitions"], "$.transitions", list, "array")
    if len(raw_tr) != len(states):
        raise SchemaError("$.transitions", f"expected {len(states)} rows, got {len(raw_tr)}")
    transitions: list[list[Optional[int]]] = []
    for i, row in enumerate(raw_tr):
        _expect(row, f"$.transitions[{i}]", list, "array")
        if len(row) != OBSERVATION_COUNT:
            raise SchemaError(
                f"$.transitions[{i}]", f"expected {OBSERVATION_COUNT} cells, got {len(row)}"
            )
        cells: list[Optional[int]] = []
        for o, cell in enumerate(row):
            _expect(cell, f"$.transitions[{i}][{o}]", int, "integer")
            if not 0 <= cell < len(states):
                raise SchemaError(
                    f"$.transitions[{i}][{o}]",
                    f"successor {cell} out of range 0..{len(states) - 1}",
                )
            cells.append(cell)
        transitions.append(cells)

    m = _expect(doc["manifest"], "$.manifest", dict, "object")
    hashes = _expect(m.get("prompt_hashes", {}), "$.manifest.prompt_hashes", dict, "object")
    for k, v in hashes.items():
        _expect(v, f"$.manifest.prompt_hashes.{k}", str, "string")
    warnings = _expect(m.get("warnings", []), "$.manifest.warnings", list, "array")
    for i, w in enumerate(warnings):
        _expect(w, f"$.manifest.warnings[{i}]", str, "string")
    manifest = GenerationManifest(
        model=_expect(m.get("model", ""), "$.manifest.model", str, "string"),
        seed=_expect(m.get("seed", 0), "$.manifest.seed", int, "integer"),
        prompt_hashes=tuple(sorted(hashes.items())),
        warnings=tuple(warnings),
    )

    return BehaviorDatabase(
        persona=persona,
        motions=list(motions),
        states=states,
        initial_state=initial,
        transitions=transitions,
        manifest=manifest,
    )
