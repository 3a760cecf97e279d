// Client-side state. Everything the renderer shows comes from the latest
// server snapshot; the only local state is pending input and UI chrome.

import { Condition, Snapshot } from "./protocol.js";

export type ConnectionStatus = "connecting" | "live" | "closed";

export class ViewModel {
  snapshot: Snapshot | null = null;
  condition: Condition = { concentration: false, strain: false, energy: false };
  status: ConnectionStatus = "connecting";
  events: string[] = [];
  snapshotsReceived = 0;
  displayRate = 0;
  autopilot = false;

  private rateWindow: number[] = [];

  onSnapshot(snapshot: Snapshot): void {
    this.snapshot = snapshot;
    this.snapshotsReceived += 1;
    const now = performance.now();
    this.rateWindow.push(now);
    while (this.rateWindow.length > 0 && now - this.rateWindow[0] > 1000) {
      this.rateWindow.shift();
    }
    this.displayRate = this.rateWindow.length;
  }

  pushEvent(text: string): void {
    this.events.push(text);
    if (this.events.length > 6) {
      this.events.shift();
    }
  }
}
