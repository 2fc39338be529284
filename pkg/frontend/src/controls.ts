// Pedal input: accelerate/brake/coast mapped to control messages.  One
// message fires immediately on every change; while a pedal is held the value
// repeats at most ten times per second so the server's last-writer-wins
// slot stays fresh without flooding the socket.

export const ACCEL_MPS2 = 3.0;
export const BRAKE_MPS2 = -4.5;
export const REPEAT_INTERVAL_MS = 100;

export type SendControl = (accelMps2: number) => void;

export class PedalController {
  private current = 0;
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(private send: SendControl) {}

  get value(): number {
    return this.current;
  }

  accelerate(): void {
    this.apply(ACCEL_MPS2);
  }

  brake(): void {
    this.apply(BRAKE_MPS2);
  }

  release(): void {
    this.apply(0);
  }

  dispose(): void {
    this.stopRepeat();
  }

  private apply(value: number): void {
    if (value === this.current) return;
    this.current = value;
    this.send(value);
    this.stopRepeat();
    if (value !== 0) {
      this.timer = setInterval(() => this.send(this.current), REPEAT_INTERVAL_MS);
    }
  }

  private stopRepeat(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }
}
