import { describe, expect, it } from "vitest";

import { Beeper, type BeepContext } from "../src/beep.js";
import type { AdvisoryEvent } from "../src/protocol.js";

interface Scheduled {
  frequency: number;
  startAt: number;
}

function stubContext(log: Scheduled[]): BeepContext {
  const param = () => ({
    value: 0,
    setValueAtTime() {},
    exponentialRampToValueAtTime() {},
  });
  return {
    currentTime: 0,
    destination: {} as AudioDestinationNode,
    createOscillator() {
      const entry: Scheduled = { frequency: 0, startAt: NaN };
      log.push(entry);
      return {
        type: "sine",
        frequency: {
          get value() {
            return entry.frequency;
          },
          set value(v: number) {
            entry.frequency = v;
          },
        },
        connect() {},
        start(t: number) {
          entry.startAt = t;
        },
        stop() {},
      } as unknown as OscillatorNode;
    },
    createGain() {
      return { gain: param(), connect() {} } as unknown as GainNode;
    },
  };
}

const phaseChange = (to: "R" | "G" | "Y"): AdvisoryEvent => ({
  kind: "PHASE_CHANGED",
  phase_id: 2,
  from: "R",
  to,
  beep: true,
});

describe("beeper", () => {
  it("beeps once per phase change", () => {
    const log: Scheduled[] = [];
    const beeper = new Beeper(() => stubContext(log));
    const n = beeper.beepForEvents([phaseChange("G")]);
    expect(n).toBe(1);
    expect(log).toHaveLength(1);
    expect(log[0]!.frequency).toBe(880);
  });

  it("stays silent with no events", () => {
    const log: Scheduled[] = [];
    const beeper = new Beeper(() => stubContext(log));
    expect(beeper.beepForEvents([])).toBe(0);
    expect(log).toHaveLength(0);
  });

  it("schedules two distinct staggered beeps for two events in one tick", () => {
    const log: Scheduled[] = [];
    const beeper = new Beeper(() => stubContext(log));
    const n = beeper.beepForEvents([phaseChange("Y"), phaseChange("R")]);
    expect(n).toBe(2);
    expect(log).toHaveLength(2);
    expect(log[1]!.startAt).toBeGreaterThan(log[0]!.startAt);
  });

  it("ignores activation and deactivation events", () => {
    const log: Scheduled[] = [];
    const beeper = new Beeper(() => stubContext(log));
    const events: AdvisoryEvent[] = [
      { kind: "ADVISORY_ACTIVATED", phase_id: 2, distance_m: 480 },
      { kind: "ADVISORY_DEACTIVATED", reason: "PASSED_MIN_DIST", distance_m: 19 },
    ];
    expect(beeper.beepForEvents(events)).toBe(0);
    expect(log).toHaveLength(0);
  });
});
