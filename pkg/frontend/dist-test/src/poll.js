// Polling, not push: the contract stays trivial and lab-scale load is tiny.
// The interval is capped at 5 seconds so queue positions feel live.
export const MAX_POLL_INTERVAL_MS = 5_000;
export class Poller {
    tick;
    timer = null;
    running = false;
    intervalMs;
    constructor(tick, intervalMs = 3_000) {
        this.tick = tick;
        this.intervalMs = Math.min(intervalMs, MAX_POLL_INTERVAL_MS);
    }
    get active() {
        return this.timer !== null;
    }
    start() {
        if (this.timer !== null)
            return;
        void this.fire();
        this.timer = setInterval(() => void this.fire(), this.intervalMs);
    }
    stop() {
        if (this.timer !== null) {
            clearInterval(this.timer);
            this.timer = null;
        }
    }
    // overlapping ticks are skipped rather than queued
    async fire() {
        if (this.running)
            return;
        this.running = true;
        try {
            await this.tick();
        }
        catch {
            // a failed poll is retried on the next interval
        }
        finally {
            this.running = false;
        }
    }
}
