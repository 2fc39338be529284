// Wire types for the live simulation protocol, mirroring the server exactly.

export type PhaseColor = "R" | "G" | "Y";

export interface HelloMessage {
  type: "hello";
  config_digest: string;
  tick_ms: number;
}

export interface Recommendation {
  kind: "proceed" | "stop" | "none";
  target_mps?: number;
  window?: [number, number];
}

export interface AdvisorySnapshot {
  active: boolean;
  phase_id: number;
  color: PhaseColor | null;
  countdown_ds: number;
  recommendation: Recommendation;
}

export interface VehicleSnapshot {
  speed_mps: number;
  distance_m: number | null;
  lat: number;
  lon: number;
}

export interface PhaseChangedEvent {
  kind: "PHASE_CHANGED";
  phase_id: number;
  from: PhaseColor;
  to: PhaseColor;
  beep: boolean;
}

export interface AdvisoryActivatedEvent {
  kind: "ADVISORY_ACTIVATED";
  phase_id: number;
  distance_m: number;
}

export interface AdvisoryDeactivatedEvent {
  kind: "ADVISORY_DEACTIVATED";
  reason: string;
  distance_m: number;
}

export type AdvisoryEvent = PhaseChangedEvent | AdvisoryActivatedEvent | AdvisoryDeactivatedEvent;

export interface StateMessage {
  type: "state";
  tick: number;
  vehicle: VehicleSnapshot;
  advisory: AdvisorySnapshot;
  events: AdvisoryEvent[];
}

export type ServerMessage = HelloMessage | StateMessage;

export interface ControlMessage {
  type: "control";
  accel_mps2: number;
}

export interface ResetMessage {
  type: "reset";
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const msg = doc as Record<string, unknown>;
  if (msg.type === "hello" && typeof msg.config_digest === "string" && typeof msg.tick_ms === "number") {
    return msg as unknown as HelloMessage;
  }
  if (
    msg.type === "state" &&
    typeof msg.tick === "number" &&
    typeof msg.vehicle === "object" && msg.vehicle !== null &&
    typeof msg.advisory === "object" && msg.advisory !== null &&
    Array.isArray(msg.events)
  ) {
    return msg as unknown as StateMessage;
  }
  return null;
}
