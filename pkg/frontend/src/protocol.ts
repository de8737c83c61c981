/** Wire types for the behavior service's REST and session-stream surfaces. */

/** One visitor's continuous kinematics, as the server expects them. */
export interface PersonWire {
  person_id: number;
  left_hand_height: number;
  right_hand_height: number;
  gaze_angle: number;
  distance: number;
  hand_speed: number;
  radial_velocity: number;
  bearing: number;
}

export interface FrameMessage {
  type: "frame";
  time: number;
  persons: PersonWire[];
}

export interface LoadPersonaMessage {
  type: "load_persona";
  name: string;
}

export interface ResetMessage {
  type: "reset";
}

export type ClientMessage = FrameMessage | LoadPersonaMessage | ResetMessage;

export interface StateMessage {
  type: "state";
  time: number;
  motion: string;
  face: string;
  emoji: string;
  heading: number;
  trigger: "reset" | "observation_changed" | "poi_changed";
}

export interface PersonaLoadedMessage {
  type: "persona_loaded";
  name: string;
  states: { motion: string; face: string; emoji: string }[];
  initial_state: number;
  motion_duration_s?: number;
}

export interface ErrorMessage {
  type: "error";
  message: string;
}

export type ServerMessage = StateMessage | PersonaLoadedMessage | ErrorMessage;

export function parseServerMessage(raw: string): ServerMessage {
  const msg = JSON.parse(raw);
  if (msg.type === "state" || msg.type === "persona_loaded" || msg.type === "error") {
    return msg as ServerMessage;
  }
  throw new Error(`unknown server message type: ${msg.type}`);
}

/** Database document served at GET /personas/{name}. */
export interface DatabaseDocument {
  format_version: number;
  persona: { name: string; description: string; seed: number };
  motions: string[];
  states: [string, string][];
  initial_state: number;
  transitions: number[][];
}

export interface PersonaListEntry {
  name: string;
  states: number;
  initial_state: number;
  file: string;
}
