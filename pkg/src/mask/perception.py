"""Continuous visitor kinematics -> discrete observations.

Replaces the camera/skeleton pipeline with a pluggable boundary: callers
supply PersonSnapshot records (from a scenario file, a live tracker, or the
playground UI) and this module discretizes them, scores visitor saliency
("curiosity"), and picks the person of interest.

All thresholds are strict inequalities with the boundary assigned to the
inactive side, so e.g. distance exactly equal to close_distance_m is "far".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from .catalog import ObservationVector

__all__ = [
    "PersonSnapshot",
    "PerceptionConfig",
    "discretize",
    "curiosity_score",
    "select_person_of_interest",
    "heading_direction",
]

PersonId = Union[int, str]


@dataclass(frozen=True)
class PersonSnapshot:
    """One tracked visitor's continuous kinematic features for one frame.

    person_id:         stable tracking id across frames
    left_hand_height:  meters relative to nose level (positive = above)
    right_hand_height: meters relative to nose level (positive = above)
    gaze_angle:        degrees between the gaze ray and the robot direction
    distance:          meters from the robot, >= 0
    hand_speed:        meters/second, max of both hands, >= 0
    radial_velocity:   meters/second along the robot axis (negative = approaching)
    bearing:           radians, the person's direction in the robot frame
    """

    person_id: PersonId
    left_hand_height: float
    right_hand_height: float
    gaze_angle: float
    distance: float
    hand_speed: float
    radial_velocity: float
    bearing: float = 0.0

    def __post_init__(self):
        if self.distance < 0:
            raise ValueError(f"distance must be >= 0, got {self.distance}")
        if self.hand_speed < 0:
            raise ValueError(f"hand_speed must be >= 0, got {self.hand_speed}")


@dataclass(frozen=True)
class PerceptionConfig:
    """Discretization thresholds and curiosity weights.

    Values are engineering defaults at human scale; the source system's
    thresholds are not published, so everything here is configurable.
    """

    close_distance_m: float = 1.5
    gaze_angle_deg: float = 15.0
    waving_speed_mps: float = 0.5
    approach_velocity_mps: float = 0.2
    leave_velocity_mps: float = 0.2
    w_wave: float = 2.0
    w_close: float = 1.0
    w_gaze: float = 1.0
    w_approach: float = 1.0
    w_hands: float = 0.5

    def __post_init__(self):
        for name in (
            "close_distance_m",
            "gaze_angle_deg",
            "waving_speed_mps",
            "approach_velocity_mps",
            "leave_velocity_mps",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def discretize(snap: PersonSnapshot, cfg: PerceptionConfig) -> ObservationVector:
    """Map one snapshot onto the 72-member observation space.

    The radial-velocity thresholds partition the real line: approach below
    -approach_velocity_mps, leave above leave_velocity_mps, static between.
    """
    raised = int(snap.left_hand_height > 0) + int(snap.right_hand_height > 0)
    if snap.radial_velocity < -cfg.approach_velocity_mps:
        approach = "approach"
    elif snap.radial_velocity > cfg.leave_velocity_mps:
        approach = "leave"
    else:
        approach = "static"
    return ObservationVector(
        raised_hands=raised,
        distance="close" if snap.distance < cfg.close_distance_m else "far",
        gaze="gaze" if abs(snap.gaze_angle) < cfg.gaze_angle_deg else "no_gaze",
        hand_motion="waving" if snap.hand_speed > cfg.waving_speed_mps else "not_waving",
        approach=approach,
    )


def curiosity_score(obs: ObservationVector, cfg: PerceptionConfig) -> float:
    """Scalar saliency of an observation: how interesting this visitor looks.

    Computed from the discretized observation (not raw kinematics) so the
    score is reproducible from logged observations.
    """
    score = cfg.w_hands * obs.raised_hands
    if obs.hand_motion == "waving":
        score += cfg.w_wave
    if obs.distance == "close":
        score += cfg.w_close
    if obs.gaze == "gaze":
        score += cfg.w_gaze
    if obs.approach == "approach":
        score += cfg.w_approach
    return score


def select_person_of_interest(
    people: Sequence[tuple[PersonSnapshot, ObservationVector]],
    current_poi: Optional[PersonId],
    cfg: PerceptionConfig,
) -> Optional[PersonId]:
    """Pick the visitor with maximal curiosity.

    Ties go to the incumbent person of interest if it is among the tied ids
    (avoids flapping between equally curious visitors), else to the lowest
    person_id. An empty scene yields None.
    """
    if not people:
        return None
    scores = {snap.person_id: curiosity_score(obs, cfg) for snap, obs in people}
    best = max(scores.values())
    tied = [pid for pid, s in scores.items() if s == best]
    if current_poi is not None and current_poi in tied:
        return current_poi
    return min(tied, key=lambda pid: (str(type(pid).__name__), pid))


def heading_direction(snap: PersonSnapshot) -> float:
    """The person's bearing normalized to (-pi, pi]."""
    x = math.fmod(snap.bearing + math.pi, 2.0 * math.pi)
    if x <= 0.0:
        x += 2.0 * math.pi
    return x - math.pi
