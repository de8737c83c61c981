/** Robot-view render model: a pure reducer over server messages.
 *
 * The displayed state is always exactly the latest state message received;
 * there is no client-side prediction, and the transition log preserves server
 * order. The DOM layer only ever renders this model.
 */

import type { ServerMessage, StateMessage } from "./protocol.js";

export interface StateInfo {
  motion: string;
  face: string;
  emoji: string;
}

export interface LogEntry {
  time: number;
  trigger: string;
  motion: string;
  face: string;
  emoji: string;
}

export interface RobotViewState {
  persona: string | null;
  states: StateInfo[];
  initialState: number;
  /** Index into states of the displayed state; -1 before the first state message. */
  currentState: number;
  motion: string;
  face: string;
  emoji: string;
  heading: number;
  trigger: string;
  time: number;
  log: LogEntry[];
  error: string | null;
}

export function initialViewState(): RobotViewState {
  return {
    persona: null,
    states: [],
    initialState: 0,
    currentState: -1,
    motion: "",
    face: "",
    emoji: "",
    heading: 0,
    trigger: "",
    time: 0,
    log: [],
    error: null,
  };
}

function stateIndex(states: StateInfo[], msg: StateMessage): number {
  return states.findIndex((s) => s.motion === msg.motion && s.face === msg.face);
}

export function applyServerMessage(view: RobotViewState, msg: ServerMessage): RobotViewState {
  switch (msg.type) {
    case "persona_loaded":
      return {
        ...initialViewState(),
        persona: msg.name,
        states: msg.states.slice(),
        initialState: msg.initial_state,
      };
    case "state": {
      const entry: LogEntry = {
        time: msg.time,
        trigger: msg.trigger,
        motion: msg.motion,
        face: msg.face,
        emoji: msg.emoji,
      };
      return {
        ...view,
        currentState: stateIndex(view.states, msg),
        motion: msg.motion,
        face: msg.face,
        emoji: msg.emoji,
        heading: msg.heading,
        trigger: msg.trigger,
        time: msg.time,
        log: [...view.log, entry],
        error: null,
      };
    }
    case "error":
      return { ...view, error: msg.message };
  }
}

/** Fold a whole scripted message sequence (replay helper for tests). */
export function replayMessages(messages: ServerMessage[]): RobotViewState {
  return messages.reduce(applyServerMessage, initialViewState());
}
