// Pure projection of the latest state message into everything the screen shows.
// Keeping this free of DOM and WebSocket concerns makes the display logic
// directly testable.

import type { PhaseColor, StateMessage } from "./protocol.js";

export const ADVISORY_RANGE_M = 500;

const MPH_PER_MPS = 2.2369362920544;

export type ColorName = "red" | "yellow" | "green" | "unknown";

export interface RenderModel {
  tick: number;
  active: boolean;
  colorName: ColorName;
  countdownText: string;
  recommendationTitle: string;
  recommendationDetail: string;
  showStopBanner: boolean;
  speedText: string;
  distanceText: string;
  barFillFraction: number;
}

const COLOR_NAMES: Record<PhaseColor, ColorName> = { R: "red", Y: "yellow", G: "green" };

export function formatCountdown(countdownDs: number): string {
  return `${(countdownDs / 10).toFixed(1)} s`;
}

export function formatSpeed(mps: number): string {
  return `${mps.toFixed(1)} m/s · ${(mps * MPH_PER_MPS).toFixed(1)} mph`;
}

export function toRenderModel(msg: StateMessage): RenderModel {
  const advisory = msg.advisory;
  const distance = msg.vehicle.distance_m;
  const color: ColorName =
    advisory.color !== null ? COLOR_NAMES[advisory.color] : "unknown";

  let title = "NO ADVISORY";
  let detail = "outside the advisory display zone";
  let showStopBanner = false;
  if (advisory.active) {
    const rec = advisory.recommendation;
    if (rec.kind === "proceed" && rec.target_mps !== undefined) {
      title = "PROCEED";
      detail = `target ${formatSpeed(rec.target_mps)}`;
      if (rec.window) {
        detail += ` · window ${rec.window[0].toFixed(1)}–${rec.window[1].toFixed(1)} m/s`;
      }
    } else if (rec.kind === "stop") {
      title = "PREPARE TO STOP";
      detail = "no speed reaches the green window";
      showStopBanner = true;
    } else {
      title = "HOLD";
      detail = "";
    }
  }

  return {
    tick: msg.tick,
    active: advisory.active,
    colorName: color,
    countdownText: formatCountdown(advisory.countdown_ds),
    recommendationTitle: title,
    recommendationDetail: detail,
    showStopBanner,
    speedText: formatSpeed(msg.vehicle.speed_mps),
    distanceText: distance === null ? "—" : `${distance.toFixed(0)} m`,
    barFillFraction:
      distance === null ? 0 : Math.min(1, Math.max(0, 1 - distance / ADVISORY_RANGE_M)),
  };
}
