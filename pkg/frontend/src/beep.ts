// Synthesized notification tones; no audio assets.  The oscillator-and-gain
// pattern keeps each beep short and clickless.

import type { AdvisoryEvent } from "./protocol.js";

export interface BeepContext {
  currentTime: number;
  destination: AudioDestinationNode;
  createOscillator(): OscillatorNode;
  createGain(): GainNode;
}

export type ContextFactory = () => BeepContext;

const TONE_BY_COLOR: Record<string, number> = { G: 880, Y: 660, R: 440 };
const BEEP_SECONDS = 0.18;
const BEEP_SPACING_S = 0.22;

export function defaultContextFactory(): BeepContext {
  const Ctor =
    (window as unknown as { AudioContext?: typeof AudioContext; webkitAudioContext?: typeof AudioContext })
      .AudioContext ??
    (window as unknown as { webkitAudioContext?: typeof AudioContext }).webkitAudioContext;
  if (!Ctor) throw new Error("Web Audio unsupported");
  return new Ctor() as unknown as BeepContext;
}

export class Beeper {
  private ctx: BeepContext | null = null;

  constructor(private factory: ContextFactory = defaultContextFactory) {}

  private context(): BeepContext {
    if (this.ctx === null) this.ctx = this.factory();
    return this.ctx;
  }

  beep(frequencyHz: number, delayS = 0): void {
    const ctx = this.context();
    const osc = ctx.createOscillator();
    const gain = ctx.createGain();
    osc.type = "sine";
    osc.frequency.value = frequencyHz;
    osc.connect(gain);
    gain.connect(ctx.destination);
    const t0 = ctx.currentTime + delayS;
    gain.gain.setValueAtTime(0.25, t0);
    gain.gain.exponentialRampToValueAtTime(0.001, t0 + BEEP_SECONDS);
    osc.start(t0);
    osc.stop(t0 + BEEP_SECONDS + 0.02);
  }

  /** One audible beep per phase change, staggered when several arrive at once. */
  beepForEvents(events: AdvisoryEvent[]): number {
    let scheduled = 0;
    for (const event of events) {
      if (event.kind === "PHASE_CHANGED" && event.beep) {
        this.beep(TONE_BY_COLOR[event.to] ?? 660, scheduled * BEEP_SPACING_S);
        scheduled += 1;
      }
    }
    return scheduled;
  }
}
