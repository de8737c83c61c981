/** Transition-table inspector: a read-only grid of 72 observation columns by
 * |states| rows, built from the raw database document.
 *
 * Observation columns are decoded with the same mixed-radix order the engine
 * uses (raised_hands, distance, gaze, hand_motion, approach; approach least
 * significant) - that ordering is the database wire contract.
 */

import type { DatabaseDocument } from "./protocol.js";

const DISTANCE = ["close", "far"];
const GAZE = ["gaze", "no_gaze"];
const HAND_MOTION = ["not_waving", "waving"];
const APPROACH = ["approach", "static", "leave"];

export interface ObservationLabel {
  index: number;
  /** Compact column header, e.g. "1·C·G·W·A". */
  short: string;
  /** Full tooltip text. */
  full: string;
}

export function decodeObservation(index: number): ObservationLabel {
  if (index < 0 || index >= 72) {
    throw new Error(`observation index out of range: ${index}`);
  }
  let i = index;
  const approach = APPROACH[i % 3];
  i = Math.floor(i / 3);
  const handMotion = HAND_MOTION[i % 2];
  i = Math.floor(i / 2);
  const gaze = GAZE[i % 2];
  i = Math.floor(i / 2);
  const distance = DISTANCE[i % 2];
  const raised = Math.floor(i / 2);
  const short = [
    String(raised),
    distance === "close" ? "C" : "F",
    gaze === "gaze" ? "G" : "·",
    handMotion === "waving" ? "W" : "·",
    approach === "approach" ? "A" : approach === "leave" ? "L" : "S",
  ].join("");
  const full =
    `#${index}: ${raised} hand(s) raised, ${distance}, ${gaze.replace("_", " ")}, ` +
    `${handMotion.replace("_", " ")}, ${approach}`;
  return { index, short, full };
}

export interface InspectorModel {
  columns: ObservationLabel[];
  rows: { label: string; cells: number[] }[];
  stateLabels: string[];
}

export function buildInspectorModel(doc: DatabaseDocument): InspectorModel {
  const stateLabels = doc.states.map(([motion, face]) => `${motion} / ${face}`);
  return {
    columns: Array.from({ length: 72 }, (_, o) => decodeObservation(o)),
    rows: doc.transitions.map((cells, i) => ({ label: stateLabels[i], cells })),
    stateLabels,
  };
}
