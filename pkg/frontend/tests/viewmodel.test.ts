import { describe, expect, it } from "vitest";

import type { StateMessage } from "../src/protocol.js";
import { formatCountdown, toRenderModel } from "../src/viewmodel.js";

function stateMessage(overrides: Partial<StateMessage["advisory"]> = {}, distance = 300): StateMessage {
  return {
    type: "state",
    tick: 42,
    vehicle: { speed_mps: 14.2, distance_m: distance, lat: 36.0, lon: -84.0 },
    advisory: {
      active: true,
      phase_id: 2,
      color: "R",
      countdown_ds: 123,
      recommendation: { kind: "proceed", target_mps: 17.88, window: [9.1, 17.88] },
      ...overrides,
    },
    events: [],
  };
}

describe("countdown display", () => {
  it("shows countdown_ds/10 with one decimal", () => {
    expect(formatCountdown(123)).toBe("12.3 s");
    expect(formatCountdown(0)).toBe("0.0 s");
    expect(formatCountdown(1)).toBe("0.1 s");
    expect(toRenderModel(stateMessage()).countdownText).toBe("12.3 s");
  });
});

describe("recommendation panel", () => {
  it("renders proceed with target in m/s and mph", () => {
    const model = toRenderModel(stateMessage());
    expect(model.recommendationTitle).toBe("PROCEED");
    expect(model.recommendationDetail).toContain("17.9 m/s");
    expect(model.recommendationDetail).toContain("40.0 mph");
    expect(model.showStopBanner).toBe(false);
  });

  it("renders a stop banner without a target", () => {
    const model = toRenderModel(stateMessage({ recommendation: { kind: "stop" } }));
    expect(model.recommendationTitle).toBe("PREPARE TO STOP");
    expect(model.showStopBanner).toBe(true);
    expect(model.recommendationDetail).not.toContain("m/s ·");
  });

  it("hides advice when the advisory is inactive", () => {
    const model = toRenderModel(
      stateMessage({ active: false, recommendation: { kind: "none" } }, 700),
    );
    expect(model.active).toBe(false);
    expect(model.recommendationTitle).toBe("NO ADVISORY");
  });
});

describe("telemetry", () => {
  it("maps phase colors", () => {
    expect(toRenderModel(stateMessage({ color: "G" })).colorName).toBe("green");
    expect(toRenderModel(stateMessage({ color: "Y" })).colorName).toBe("yellow");
    expect(toRenderModel(stateMessage({ color: null })).colorName).toBe("unknown");
  });

  it("formats speed in both units", () => {
    const model = toRenderModel(stateMessage());
    expect(model.speedText).toBe("14.2 m/s · 31.8 mph");
  });

  it("fills the distance bar from 500 m to the stop bar", () => {
    expect(toRenderModel(stateMessage({}, 500)).barFillFraction).toBeCloseTo(0);
    expect(toRenderModel(stateMessage({}, 250)).barFillFraction).toBeCloseTo(0.5);
    expect(toRenderModel(stateMessage({}, 0)).barFillFraction).toBeCloseTo(1);
    expect(toRenderModel(stateMessage({}, 800)).barFillFraction).toBe(0);
    expect(toRenderModel(stateMessage({}, null as unknown as number)).distanceText).toBe("—");
  });
});
