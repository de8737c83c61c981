"""Fixed non-verbal cue catalogs and the discrete observation/state spaces.

The catalogs are frozen: 13 robot motions, 12 facial expressions, and a
72-member visitor observation space (3 raised-hand counts x 2 distances x
2 gaze values x 2 hand-motion values x 3 approach values). Observation
vectors carry a canonical mixed-radix index so database files are portable
byte-for-byte across implementations.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

__all__ = [
    "MotionCue",
    "FaceCue",
    "RobotState",
    "ObservationVector",
    "MOTIONS",
    "FACES",
    "MOTION_COUNT",
    "FACE_COUNT",
    "STATE_CUE_COMBINATIONS",
    "OBSERVATION_COUNT",
    "motion_by_name",
    "face_by_name",
    "observation_index",
    "observation_from_index",
    "enumerate_observations",
    "catalog_manifest",
    "catalog_manifest_json",
]


@dataclass(frozen=True)
class MotionCue:
    """One robot motion from the fixed 13-entry catalog."""

    id: int
    name: str


@dataclass(frozen=True)
class FaceCue:
    """One facial expression from the fixed 12-entry catalog.

    The emoji glyph is cosmetic (used by the playground UI) and carries no
    semantics; the name is the stable token.
    """

    id: int
    name: str
    emoji: str


@dataclass(frozen=True)
class RobotState:
    """A (motion, facial expression) pair the robot can display."""

    motion: MotionCue
    face: FaceCue


MOTIONS: tuple[MotionCue, ...] = tuple(
    MotionCue(i, name)
    for i, name in enumerate(
        [
            "wave hand big",
            "wave hand small",
            "look around",
            "attract to come closer",
            "small bow",
            "cry",
            "push away",
            "hide away",
            "read book",
            "standstill",
            "yawn",
            "teasing",
            "cross arms",
        ]
    )
)

FACES: tuple[FaceCue, ...] = tuple(
    FaceCue(i, name, emoji)
    for i, (name, emoji) in enumerate(
        [
            ("neutral", "\U0001f610"),        # neutral face
            ("smile", "\U0001f642"),          # slightly smiling face
            ("cry", "\U0001f622"),            # crying face
            ("angry", "\U0001f620"),          # angry face
            ("scared", "\U0001f628"),         # fearful face
            ("excited", "\U0001f929"),        # star-struck
            ("reading book", "\U0001f913"),   # nerd face
            ("confused", "\U0001f615"),       # confused face
            ("yes", "\U0001f64c"),            # raised hands
            ("tongue out", "\U0001f61b"),     # face with tongue
            ("yawn", "\U0001f971"),           # yawning face
            ("nod head", "\U0001f642‍↕️"),  # head shaking vertically
        ]
    )
)

MOTION_COUNT = len(MOTIONS)
FACE_COUNT = len(FACES)
STATE_CUE_COMBINATIONS = MOTION_COUNT * FACE_COUNT

_MOTIONS_BY_NAME = {m.name: m for m in MOTIONS}
_FACES_BY_NAME = {f.name: f for f in FACES}

assert MOTION_COUNT == 13
assert FACE_COUNT == 12
assert STATE_CUE_COMBINATIONS == 156


def motion_by_name(name: str) -> MotionCue:
    """Look up a motion cue by name, case-insensitively."""
    cue = _MOTIONS_BY_NAME.get(name.strip().lower())
    if cue is None:
        raise KeyError(f"unknown motion cue: {name!r}")
    return cue


def face_by_name(name: str) -> FaceCue:
    """Look up a face cue by name, case-insensitively."""
    cue = _FACES_BY_NAME.get(name.strip().lower())
    if cue is None:
        raise KeyError(f"unknown face cue: {name!r}")
    return cue


# Enumerated field values, in canonical digit order. The digit order below
# (raised_hands most significant .. approach least significant) is the wire
# contract for observation indices and must never change.
RAISED_HANDS_VALUES: tuple[int, ...] = (0, 1, 2)
DISTANCE_VALUES: tuple[str, ...] = ("close", "far")
GAZE_VALUES: tuple[str, ...] = ("gaze", "no_gaze")
HAND_MOTION_VALUES: tuple[str, ...] = ("not_waving", "waving")
APPROACH_VALUES: tuple[str, ...] = ("approach", "static", "leave")

OBSERVATION_COUNT = (
    len(RAISED_HANDS_VALUES)
    * len(DISTANCE_VALUES)
    * len(GAZE_VALUES)
    * len(HAND_MOTION_VALUES)
    * len(APPROACH_VALUES)
)
assert OBSERVATION_COUNT == 72


@dataclass(frozen=True)
class ObservationVector:
    """One visitor's discretized non-verbal cue tuple.

    raised_hands: number of hands above nose level (0, 1, or 2)
    distance:     "close" | "far"
    gaze:         "gaze" | "no_gaze"
    hand_motion:  "waving" | "not_waving"
    approach:     "approach" | "static" | "leave"
    """

    raised_hands: int
    distance: str
    gaze: str
    hand_motion: str
    approach: str

    def __post_init__(self):
        if self.raised_hands not in RAISED_HANDS_VALUES:
            raise ValueError(f"raised_hands must be 0, 1 or 2, got {self.raised_hands!r}")
        if self.distance not in DISTANCE_VALUES:
            raise ValueError(f"distance must be one of {DISTANCE_VALUES}, got {self.distance!r}")
        if self.gaze not in GAZE_VALUES:
            raise ValueError(f"gaze must be one of {GAZE_VALUES}, got {self.gaze!r}")
        if self.hand_motion not in HAND_MOTION_VALUES:
            raise ValueError(
                f"hand_motion must be one of {HAND_MOTION_VALUES}, got {self.hand_motion!r}"
            )
        if self.approach not in APPROACH_VALUES:
            raise ValueError(f"approach must be one of {APPROACH_VALUES}, got {self.approach!r}")

    def describe(self) -> str:
        """Compact key=value rendering used in prompts and logs."""
        return (
            f"raised_hands={self.raised_hands}, distance={self.distance}, "
            f"gaze={self.gaze}, hand_motion={self.hand_motion}, approach={self.approach}"
        )


def observation_index(obs: ObservationVector) -> int:
    """Canonical mixed-radix index of an observation, in 0..71.

    Digit order: raised_hands, distance, gaze, hand_motion, approach, with
    approach as the least significant digit.
    """
    i = obs.raised_hands
    i = i * 2 + DISTANCE_VALUES.index(obs.distance)
    i = i * 2 + GAZE_VALUES.index(obs.gaze)
    i = i * 2 + HAND_MOTION_VALUES.index(obs.hand_motion)
    i = i * 3 + APPROACH_VALUES.index(obs.approach)
    return i


def observation_from_index(i: int) -> ObservationVector:
    """Inverse of observation_index. Raises ValueError outside 0..71."""
    if not 0 <= i < OBSERVATION_COUNT:
        raise ValueError(f"observation index out of range 0..{OBSERVATION_COUNT - 1}: {i}")
    i, approach = divmod(i, 3)
    i, hand_motion = divmod(i, 2)
    i, gaze = divmod(i, 2)
    raised_hands, distance = divmod(i, 2)
    return ObservationVector(
        raised_hands=raised_hands,
        distance=DISTANCE_VALUES[distance],
        gaze=GAZE_VALUES[gaze],
        hand_motion=HAND_MOTION_VALUES[hand_motion],
        approach=APPROACH_VALUES[approach],
    )


def enumerate_observations() -> list[ObservationVector]:
    """All 72 observations, ordered by canonical index."""
    return [observation_from_index(i) for i in range(OBSERVATION_COUNT)]


def catalog_manifest() -> dict:
    """Catalog manifest (names, ids, emoji glyphs) consumed by the UI."""
    return {
        "motions": [{"id": m.id, "name": m.name} for m in MOTIONS],
        "faces": [{"id": f.id, "name": f.name, "emoji": f.emoji} for f in FACES],
        "observation_fields": {
            "raised_hands": list(RAISED_HANDS_VALUES),
            "distance": list(DISTANCE_VALUES),
            "gaze": list(GAZE_VALUES),
            "hand_motion": list(HAND_MOTION_VALUES),
            "approach": list(APPROACH_VALUES),
        },
        "observation_count": OBSERVATION_COUNT,
    }


def catalog_manifest_json() -> str:
    return json.dumps(catalog_manifest(), indent=2, ensure_ascii=False)
