// Canvas renderer: orthographic top view (x/z) and side view (x/y), plus the
// gate lights, detector readouts, and heater bars. Pure function of the view
// model; nothing here advances any state.

import { Snapshot, Vec } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";

const BLOCK_COLORS: Record<string, string> = {
  red: "#e05555",
  green: "#4fae62",
  blue: "#5577e0",
};
const BLOCK_HALF = 0.05;
const WORLD_X: [number, number] = [-0.9, 0.9];
const WORLD_Z: [number, number] = [-0.1, 1.5];
const WORLD_Y: [number, number] = [-0.05, 0.75];

interface Panel {
  x0: number;
  y0: number;
  w: number;
  h: number;
  horiz: [number, number];
  vert: [number, number];
  vertFlip: boolean;
}

function mapX(panel: Panel, x: number): number {
  const [lo, hi] = panel.horiz;
  return panel.x0 + ((x - lo) / (hi - lo)) * panel.w;
}

function mapV(panel: Panel, v: number): number {
  const [lo, hi] = panel.vert;
  const frac = (v - lo) / (hi - lo);
  return panel.vertFlip ? panel.y0 + panel.h - frac * panel.h : panel.y0 + frac * panel.h;
}

export class SceneView {
  private ctx: CanvasRenderingContext2D;

  constructor(private canvas: HTMLCanvasElement) {
    const ctx = canvas.getContext("2d");
    if (!ctx) {
      throw new Error("2d canvas context unavailable");
    }
    this.ctx = ctx;
  }

  render(vm: ViewModel): void {
    const { ctx, canvas } = this;
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const split = Math.floor(canvas.width / 2);
    const top: Panel = {
      x0: 10, y0: 30, w: split - 20, h: canvas.height - 90,
      horiz: WORLD_X, vert: WORLD_Z, vertFlip: true,
    };
    const side: Panel = {
      x0: split + 10, y0: 30, w: split - 20, h: canvas.height - 90,
      horiz: WORLD_X, vert: WORLD_Y, vertFlip: true,
    };
    this.panelFrame(top, "top view (x/z)");
    this.panelFrame(side, "side view (x/y)");
    const snap = vm.snapshot;
    if (snap) {
      this.drawScene(top, snap, vm, (p) => [p[0], p[2]]);
      this.drawScene(side, snap, vm, (p) => [p[0], p[1]]);
      this.drawHud(snap, vm);
    }
    if (vm.status !== "live") {
      this.banner(vm.status === "connecting" ? "connecting..." : "disconnected - scene frozen");
    }
  }

  private panelFrame(panel: Panel, label: string): void {
    const { ctx } = this;
    ctx.strokeStyle = "#444";
    ctx.strokeRect(panel.x0, panel.y0, panel.w, panel.h);
    ctx.fillStyle = "#888";
    ctx.font = "12px monospace";
    ctx.fillText(label, panel.x0 + 4, panel.y0 - 6);
  }

  private drawScene(
    panel: Panel,
    snap: Snapshot,
    vm: ViewModel,
    project: (p: Vec) => [number, number],
  ): void {
    const { ctx } = this;
    // table plane (y = 0) shows as a baseline in the side view
    if (panel.vert === WORLD_Y) {
      const y = mapV(panel, 0);
      ctx.strokeStyle = "#333";
      ctx.beginPath();
      ctx.moveTo(panel.x0, y);
      ctx.lineTo(panel.x0 + panel.w, y);
      ctx.stroke();
    }
    // next goal slot
    if (snap.task.next_goal) {
      const [gx, gv] = project(snap.task.next_goal);
      const px = mapX(panel, gx);
      const pv = mapV(panel, gv);
      const r = (BLOCK_HALF / (panel.horiz[1] - panel.horiz[0])) * panel.w;
      ctx.strokeStyle = "#aa2";
      ctx.setLineDash([4, 3]);
      ctx.strokeRect(px - r, pv - r, 2 * r, 2 * r);
      ctx.setLineDash([]);
    }
    // blocks
    for (const obj of snap.objects) {
      const [ox, ov] = project(obj.pos);
      const px = mapX(panel, ox);
      const pv = mapV(panel, ov);
      const r = (BLOCK_HALF / (panel.horiz[1] - panel.horiz[0])) * panel.w;
      const glow = vm.condition.energy && snap.gate.active && snap.selected === obj.id;
      if (glow) {
        ctx.shadowColor = "#ffd24d";
        ctx.shadowBlur = 18;
      }
      ctx.fillStyle = BLOCK_COLORS[obj.id] ?? "#999";
      ctx.fillRect(px - r, pv - r, 2 * r, 2 * r);
      ctx.shadowBlur = 0;
      if (obj.id === snap.selected) {
        ctx.strokeStyle = "#fff";
        ctx.strokeRect(px - r - 2, pv - r - 2, 2 * r + 4, 2 * r + 4);
      }
      if (obj.snapped) {
        ctx.strokeStyle = "#aa2";
        ctx.strokeRect(px - r, pv - r, 2 * r, 2 * r);
      }
    }
    // hand cursor with palm-direction hint toward the selected block
    const [hx, hv] = project(snap.hand.pos);
    const px = mapX(panel, hx);
    const pv = mapV(panel, hv);
    ctx.strokeStyle = snap.hand.openness > 0.7 ? "#eee" : "#777";
    ctx.beginPath();
    ctx.arc(px, pv, snap.hand.openness > 0.7 ? 9 : 5, 0, 2 * Math.PI);
    ctx.stroke();
    const target = snap.objects.find((o) => o.id === snap.selected);
    if (target) {
      const [tx, tv] = project(target.pos);
      ctx.strokeStyle = "#666";
      ctx.beginPath();
      ctx.moveTo(px, pv);
      const dx = mapX(panel, tx) - px;
      const dv = mapV(panel, tv) - pv;
      const len = Math.hypot(dx, dv) || 1;
      ctx.lineTo(px + (dx / len) * 16, pv + (dv / len) * 16);
      ctx.stroke();
    }
  }

  private drawHud(snap: Snapshot, vm: ViewModel): void {
    const { ctx, canvas } = this;
    const y = canvas.height - 42;
    // gate lights
    const lights: Array<[string, boolean]> = [
      ["gaze", snap.gate.gaze],
      ["palm", snap.gate.palm],
      ["open", snap.gate.open],
      ["conc", snap.gate.concentration],
      ["strain", snap.gate.strain],
      ["ACTIVE", snap.gate.active],
    ];
    ctx.font = "12px monospace";
    let x = 14;
    for (const [label, on] of lights) {
      ctx.fillStyle = on ? (label === "ACTIVE" ? "#ffd24d" : "#4fae62") : "#444";
      ctx.beginPath();
      ctx.arc(x, y, 6, 0, 2 * Math.PI);
      ctx.fill();
      ctx.fillStyle = "#aaa";
      ctx.fillText(label, x + 10, y + 4);
      x += 28 + label.length * 7;
    }
    // heater bars: 30..42 degC with the 40 degC ceiling marked
    let bx = canvas.width - 260;
    for (const [site, reading] of Object.entries(snap.thermal)) {
      const frac = Math.max(0, Math.min(1, (reading.temp - 30) / 12));
      ctx.fillStyle = "#333";
      ctx.fillRect(bx, y - 8, 60, 10);
      ctx.fillStyle = reading.heater ? "#e08030" : "#5577e0";
      ctx.fillRect(bx, y - 8, 60 * frac, 10);
      const capX = bx + 60 * (10 / 12);
      ctx.strokeStyle = "#e05555";
      ctx.beginPath();
      ctx.moveTo(capX, y - 10);
      ctx.lineTo(capX, y + 4);
      ctx.stroke();
      ctx.fillStyle = "#888";
      ctx.fillText(`${site} ${reading.temp.toFixed(1)}`, bx, y + 16);
      bx += 84;
    }
    // detectors and task line
    ctx.fillStyle = "#aaa";
    const mean = snap.detectors.blink_mean;
    ctx.fillText(
      `t=${snap.t.toFixed(2)}s  F'=${snap.detectors.fprime.toFixed(2)}  ` +
      `blink-mean=${mean === null ? "-" : mean.toFixed(2)}  ` +
      `stacked=[${snap.task.stacked.join(",")}]  ` +
      `${snap.task.complete ? "COMPLETE" : "next: " + (snap.task.next ?? "-")}  ` +
      `${vm.displayRate} snap/s${vm.autopilot ? "  [autopilot]" : ""}`,
      14, canvas.height - 8,
    );
  }

  private banner(text: string): void {
    const { ctx, canvas } = this;
    ctx.fillStyle = "rgba(20, 20, 24, 0.8)";
    ctx.fillRect(0, canvas.height / 2 - 24, canvas.width, 48);
    ctx.fillStyle = "#ffd24d";
    ctx.font = "18px monospace";
    ctx.textAlign = "center";
    ctx.fillText(text, canvas.width / 2, canvas.height / 2 + 6);
    ctx.textAlign = "left";
  }
}
