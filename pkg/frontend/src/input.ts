// Mouse/keyboard mapping to session inputs.
//
//   mouse move over the canvas  -> hand delta in x/y
//   mouse wheel                 -> hand depth (z)
//   hold F                      -> strain ramps 0 -> 1 over half a second
//   tap B                       -> blink pulse
//   tap O                       -> toggle hand open/closed
//   tap 1/2/3                   -> gaze at red/green/blue block, 0 looks away
//   tap A                       -> autopilot on/off (scripted steering)
//
// Deltas accumulate locally and flush on a fixed cadence no faster than the
// server tick rate.

import { Connection } from "./net.js";
import { InputMessage, Vec } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";

const SEND_HZ = 30;
const MOUSE_SCALE = 0.002;
const WHEEL_SCALE = 0.0004;
const STRAIN_RAMP_SECONDS = 0.5;
const HEARTBEAT_MS = 1000;

export class InputLoop {
  private pendingDelta: Vec = [0, 0, 0];
  private blinkQueued = false;
  private open = false;
  private strainHeld = false;
  private strainLevel = 0;
  private gazeTarget: string | null = null;
  private lastSent = 0;
  private lastActivity = 0;
  private timer: number | undefined;

  constructor(
    private connection: Connection,
    private vm: ViewModel,
    private canvas: HTMLCanvasElement,
  ) {}

  start(): void {
    this.canvas.addEventListener("mousemove", (ev) => {
      if (ev.buttons !== 0 || ev.shiftKey) {
        this.pendingDelta[0] += ev.movementX * MOUSE_SCALE;
        this.pendingDelta[1] -= ev.movementY * MOUSE_SCALE;
      }
    });
    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      this.pendingDelta[2] += -ev.deltaY * WHEEL_SCALE;
    });
    window.addEventListener("keydown", (ev) => {
      if (ev.repeat) {
        return;
      }
      switch (ev.key.toLowerCase()) {
        case "f":
          this.strainHeld = true;
          break;
        case "b":
          this.blinkQueued = true;
          break;
        case "o":
          this.open = !this.open;
          break;
        case "a":
          this.vm.autopilot = !this.vm.autopilot;
          break;
        case "0":
          this.gazeTarget = null;
          break;
        case "1":
          this.gazeTarget = "red";
          break;
        case "2":
          this.gazeTarget = "green";
          break;
        case "3":
          this.gazeTarget = "blue";
          break;
      }
    });
    window.addEventListener("keyup", (ev) => {
      if (ev.key.toLowerCase() === "f") {
        this.strainHeld = false;
      }
    });
    this.timer = window.setInterval(() => this.flush(), 1000 / SEND_HZ);
  }

  stop(): void {
    if (this.timer !== undefined) {
      window.clearInterval(this.timer);
    }
  }

  private flush(): void {
    const now = performance.now();
    const dt = this.lastSent ? (now - this.lastSent) / 1000 : 0;
    this.lastSent = now;
    const step = dt / STRAIN_RAMP_SECONDS;
    this.strainLevel = this.strainHeld
      ? Math.min(1, this.strainLevel + step)
      : Math.max(0, this.strainLevel - 2 * step);

    const message: InputMessage = { kind: "input" };
    let meaningful = false;
    if (this.pendingDelta.some((c) => c !== 0)) {
      message.hand_delta = this.pendingDelta;
      this.pendingDelta = [0, 0, 0];
      meaningful = true;
    }
    if (this.blinkQueued) {
      message.blink = true;
      this.blinkQueued = false;
      meaningful = true;
    }
    message.openness = this.open ? 0.95 : 0.2;
    message.strain_level = this.strainLevel;
    const snap = this.vm.snapshot;
    if (this.gazeTarget && snap) {
      const target = snap.objects.find((o) => o.id === this.gazeTarget);
      if (target) {
        message.gaze_point = target.pos;
      }
      meaningful = true;
    }
    if (this.strainLevel > 0 || this.strainHeld || this.open) {
      meaningful = true;
    }
    if (meaningful) {
      this.connection.send(message);
      this.lastActivity = now;
    } else if (now - this.lastActivity > HEARTBEAT_MS) {
      this.connection.send({ kind: "hello" });
      this.lastActivity = now;
    }
  }
}
