// Polling, not push: the contract stays trivial and lab-scale load is tiny.
// The interval is capped at 5 seconds so queue positions feel live.

export const MAX_POLL_INTERVAL_MS = 5_000;

export class Poller {
  private timer: ReturnType<typeof setInterval> | null = null;
  private running = false;
  readonly intervalMs: number;

  constructor(
    private readonly tick: () => Promise<void>,
    intervalMs = 3_000,
  ) {
    this.intervalMs = Math.min(intervalMs, MAX_POLL_INTERVAL_MS);
  }

  get active(): boolean {
    return this.timer !== null;
  }

  start(): void {
    if (this.timer !== null) return;
    void this.fire();
    this.timer = setInterval(() => void this.fire(), this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  // overlapping ticks are skipped rather than queued
  private async fire(): Promise<void> {
    if (this.running) return;
    this.running = true;
    try {
      await this.tick();
    } catch {
      // a failed poll is retried on the next interval
    } finally {
      this.running = false;
    }
  }
}
