/** Visitor controls and their mapping onto synthetic kinematics.
 *
 * The UI never discretizes: it sends continuous values and the server owns
 * every threshold, so this mapping only has to land comfortably on the right
 * side of the server defaults (close < 1.5 m, gaze < 15 deg, wave > 0.5 m/s,
 * |radial| > 0.2 m/s).
 */

import type { PersonWire } from "./protocol.js";

export type Movement = "approach" | "static" | "leave";

export interface VisitorControls {
  raisedHands: 0 | 1 | 2;
  distanceM: number;
  gaze: boolean;
  wave: boolean;
  movement: Movement;
  bearingRad: number;
}

export const DEFAULT_CONTROLS: VisitorControls = {
  raisedHands: 0,
  distanceM: 3.0,
  gaze: false,
  wave: false,
  movement: "static",
  bearingRad: 0.0,
};

const HAND_DOWN = -0.4;
const HAND_UP = 0.25;
const GAZE_ON_DEG = 0.0;
const GAZE_OFF_DEG = 90.0;
const WAVE_SPEED = 1.0;
const MOVE_SPEED = 0.6;

/** Pure: a given control configuration always yields the same payload. */
export function controlsToPerson(controls: VisitorControls, personId = 1): PersonWire {
  return {
    person_id: personId,
    left_hand_height: controls.raisedHands === 2 ? HAND_UP : HAND_DOWN,
    right_hand_height: controls.raisedHands >= 1 ? HAND_UP : HAND_DOWN,
    gaze_angle: controls.gaze ? GAZE_ON_DEG : GAZE_OFF_DEG,
    distance: controls.distanceM,
    hand_speed: controls.wave ? WAVE_SPEED : 0.0,
    radial_velocity:
      controls.movement === "approach" ? -MOVE_SPEED : controls.movement === "leave" ? MOVE_SPEED : 0.0,
    bearing: controls.bearingRad,
  };
}
