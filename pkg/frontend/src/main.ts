// DOM wiring: one screen, no scrolling, large type, color plus sound.

import { Beeper } from "./beep.js";
import { PedalController } from "./controls.js";
import type { AdvisoryEvent, StateMessage } from "./protocol.js";
import { ConsoleSocket, type ConnectionStatus } from "./socket.js";
import { toRenderModel } from "./viewmodel.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

const statusDot = byId<HTMLSpanElement>("status-dot");
const statusText = byId<HTMLSpanElement>("status-text");
const phasePatch = byId<HTMLDivElement>("phase-patch");
const countdown = byId<HTMLDivElement>("countdown");
const phaseLabel = byId<HTMLDivElement>("phase-label");
const recTitle = byId<HTMLDivElement>("rec-title");
const recDetail = byId<HTMLDivElement>("rec-detail");
const advisoryPanel = byId<HTMLDivElement>("advisory-panel");
const speedValue = byId<HTMLDivElement>("speed-value");
const distanceValue = byId<HTMLSpanElement>("distance-value");
const barFill = byId<HTMLDivElement>("bar-fill");
const toasts = byId<HTMLDivElement>("toasts");

const beeper = new Beeper();

const params = new URLSearchParams(window.location.search);
const wsUrl = params.get("ws") ?? `ws://${window.location.hostname || "localhost"}:8765`;

const socket = new ConsoleSocket(wsUrl, {
  onHello(msg) {
    statusText.textContent = `connected · ${msg.tick_ms} ms/tick`;
  },
  onState(msg) {
    render(msg);
    notify(msg.events);
  },
  onStatus(status: ConnectionStatus) {
    statusDot.dataset.status = status;
    document.body.classList.toggle("disconnected", status !== "open");
    if (status !== "open") statusText.textContent = status === "lost" ? "reconnecting…" : "connecting…";
  },
});
socket.connect();

function render(msg: StateMessage): void {
  const model = toRenderModel(msg);
  phasePatch.dataset.color = model.colorName;
  countdown.textContent = model.countdownText;
  phaseLabel.textContent = `phase ${msg.advisory.phase_id}`;
  recTitle.textContent = model.recommendationTitle;
  recDetail.textContent = model.recommendationDetail;
  advisoryPanel.classList.toggle("inactive", !model.active);
  advisoryPanel.classList.toggle("stop-banner", model.showStopBanner);
  speedValue.textContent = model.speedText;
  distanceValue.textContent = model.distanceText;
  barFill.style.width = `${(model.barFillFraction * 100).toFixed(1)}%`;
}

function notify(events: AdvisoryEvent[]): void {
  beeper.beepForEvents(events);
  for (const event of events) {
    if (event.kind === "PHASE_CHANGED") {
      phasePatch.classList.remove("flash");
      void phasePatch.offsetWidth; // restart the CSS animation
      phasePatch.classList.add("flash");
    } else if (event.kind === "ADVISORY_ACTIVATED") {
      toast("Advisory active");
    } else {
      toast(`Advisory ended · ${event.reason.replaceAll("_", " ").toLowerCase()}`);
    }
  }
}

function toast(text: string): void {
  const el = document.createElement("div");
  el.className = "toast";
  el.textContent = text;
  toasts.appendChild(el);
  setTimeout(() => el.remove(), 2500);
}

// Pedals: pointer buttons and keyboard (W/ArrowUp accelerate, S/ArrowDown brake).
const pedals = new PedalController((accel) => socket.send({ type: "control", accel_mps2: accel }));
const accelBtn = byId<HTMLButtonElement>("pedal-accel");
const brakeBtn = byId<HTMLButtonElement>("pedal-brake");

function bindPedal(button: HTMLButtonElement, press: () => void): void {
  button.addEventListener("pointerdown", (e) => {
    button.setPointerCapture(e.pointerId);
    press();
  });
  button.addEventListener("pointerup", () => pedals.release());
  button.addEventListener("pointercancel", () => pedals.release());
}
bindPedal(accelBtn, () => pedals.accelerate());
bindPedal(brakeBtn, () => pedals.brake());

window.addEventListener("keydown", (e) => {
  if (e.repeat) return;
  if (e.key === "ArrowUp" || e.key === "w") pedals.accelerate();
  if (e.key === "ArrowDown" || e.key === "s") pedals.brake();
});
window.addEventListener("keyup", (e) => {
  if (e.key === "ArrowUp" || e.key === "w" || e.key === "ArrowDown" || e.key === "s") {
    pedals.release();
  }
});

byId<HTMLButtonElement>("reset-btn").addEventListener("click", () => {
  socket.send({ type: "reset" });
});
