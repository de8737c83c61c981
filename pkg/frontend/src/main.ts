/** DOM wiring for the playground. All behavior lives in the tested modules;
 * this file only reads controls, forwards messages, and renders view state. */

import { DEFAULT_CONTROLS, VisitorControls } from "./controls.js";
import { buildInspectorModel } from "./inspector.js";
import type { PersonaListEntry, ServerMessage } from "./protocol.js";
import { SessionClient } from "./session.js";
import { applyServerMessage, initialViewState, RobotViewState } from "./view.js";

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

let controls: VisitorControls = { ...DEFAULT_CONTROLS };
let view: RobotViewState = initialViewState();
let client: SessionClient | null = null;

function serviceUrl(): string {
  return ($("service-url") as HTMLInputElement).value.trim().replace(/\/$/, "");
}

function readControls(): VisitorControls {
  const hands = document.querySelector<HTMLInputElement>('input[name="hands"]:checked');
  const movement = document.querySelector<HTMLInputElement>('input[name="movement"]:checked');
  controls = {
    raisedHands: Number(hands?.value ?? 0) as 0 | 1 | 2,
    distanceM: Number(($("distance") as HTMLInputElement).value),
    gaze: ($("gaze") as HTMLInputElement).checked,
    wave: ($("wave") as HTMLInputElement).checked,
    movement: (movement?.value ?? "static") as VisitorControls["movement"],
    bearingRad: Number(($("bearing") as HTMLInputElement).value),
  };
  $("distance-label").textContent = `${controls.distanceM.toFixed(1)} m`;
  $("bearing-label").textContent = `${((controls.bearingRad * 180) / Math.PI).toFixed(0)}°`;
  return controls;
}

function render(): void {
  $("face").textContent = view.emoji || "🤖";
  $("motion").textContent = view.motion || "—";
  $("state-badge").textContent =
    view.currentState >= 0 ? `state ${view.currentState}: ${view.motion} / ${view.face}` : "no state yet";
  $("trigger").textContent = view.trigger || "—";
  $("heading-needle").style.transform = `rotate(${-view.heading}rad)`;
  $("persona-name").textContent = view.persona ?? "none";

  const banner = $("error-banner");
  banner.textContent = view.error ?? "";
  banner.style.display = view.error ? "block" : "none";

  const log = $("log");
  log.innerHTML = "";
  for (const entry of view.log.slice(-80)) {
    const line = document.createElement("div");
    line.className = "log-line";
    line.textContent = `[${entry.time.toFixed(1)}s] ${entry.trigger}: ${entry.motion} / ${entry.face} ${entry.emoji}`;
    log.appendChild(line);
  }
  log.scrollTop = log.scrollHeight;
}

function onServerMessage(msg: ServerMessage): void {
  view = applyServerMessage(view, msg);
  render();
}

async function refreshPersonas(): Promise<void> {
  const response = await fetch(`${serviceUrl()}/personas`);
  const personas: PersonaListEntry[] = await response.json();
  const select = $("persona-select") as HTMLSelectElement;
  select.innerHTML = "";
  for (const p of personas) {
    const option = document.createElement("option");
    option.value = p.name;
    option.textContent = `${p.name} (${p.states} states)`;
    select.appendChild(option);
  }
}

async function showInspector(name: string): Promise<void> {
  const response = await fetch(`${serviceUrl()}/personas/${encodeURIComponent(name)}`);
  if (!response.ok) return;
  const model = buildInspectorModel(await response.json());
  const table = $("inspector-table");
  const header = ["state \\ obs", ...model.columns.map((c) => c.short)];
  const headerRow = `<tr>${header.map((h, i) =>
    `<th title="${i > 0 ? model.columns[i - 1].full : ""}">${h}</th>`).join("")}</tr>`;
  const bodyRows = model.rows
    .map((row) => {
      const cells = row.cells
        .map((cell, o) =>
          `<td title="${model.columns[o].full} → ${model.stateLabels[cell]}">${cell}</td>`)
        .join("");
      return `<tr><th>${row.label}</th>${cells}</tr>`;
    })
    .join("");
  table.innerHTML = headerRow + bodyRows;
}

async function connect(): Promise<void> {
  client?.close();
  const banner = $("error-banner");
  banner.style.display = "none";
  client = new SessionClient(serviceUrl(), {
    onMessage: onServerMessage,
    onClose: () => {
      $("connection").textContent = "disconnected";
    },
    onSocketError: (detail) => {
      view = { ...view, error: `${detail} — is the service running? retry with Connect` };
      render();
    },
  });
  try {
    await client.connect();
  } catch {
    $("connection").textContent = "connection failed — retry";
    return;
  }
  $("connection").textContent = "connected";
  const select = $("persona-select") as HTMLSelectElement;
  if (select.value) {
    client.loadPersona(select.value);
    void showInspector(select.value);
  }
  client.startTicker(readControls);
}

function wire(): void {
  $("connect").addEventListener("click", () => {
    void refreshPersonas().then(connect, connect);
  });
  $("reset").addEventListener("click", () => client?.reset());
  ($("persona-select") as HTMLSelectElement).addEventListener("change", (ev) => {
    const name = (ev.target as HTMLSelectElement).value;
    client?.loadPersona(name);
    void showInspector(name);
  });
  for (const input of document.querySelectorAll<HTMLInputElement>("#controls input")) {
    input.addEventListener("input", readControls);
  }
  readControls();
  render();
  void refreshPersonas().catch(() => {
    $("connection").textContent = "service unreachable — start it and press Connect";
  });
}

wire();
