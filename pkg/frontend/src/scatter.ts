/** Canvas scatter of the current (blue) and previous (orange) populations. */

import type { Outlier, ScatterPoint } from "./model.js";

export const CURRENT_COLOR = "#2f6fd6";
export const PREVIOUS_COLOR = "#e08a2e";
const OUTLIER_RING = "#c43030";
const PAD = 36;

export class ScatterView {
  onSelect: ((cid: number) => void) | null = null;
  private points: ScatterPoint[] = [];

  constructor(private canvas: HTMLCanvasElement) {
    canvas.addEventListener("click", (ev) => this.handleClick(ev));
  }

  render(points: ScatterPoint[], outliers: Outlier[], labels: { x: string; y: string }): void {
    this.points = points;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);

    ctx.strokeStyle = "#888";
    ctx.strokeRect(PAD, PAD, width - 2 * PAD, height - 2 * PAD);
    ctx.fillStyle = "#555";
    ctx.font = "12px sans-serif";
    ctx.fillText(labels.x, width / 2 - 30, height - 10);
    ctx.save();
    ctx.translate(12, height / 2 + 30);
    ctx.rotate(-Math.PI / 2);
    ctx.fillText(labels.y, 0, 0);
    ctx.restore();

    const flagged = new Set(outliers.map((o) => o.cid));
    for (const p of this.points) {
      const [px, py] = this.place(p);
      ctx.beginPath();
      ctx.arc(px, py, 4, 0, 2 * Math.PI);
      ctx.fillStyle = p.cohort === "current" ? CURRENT_COLOR : PREVIOUS_COLOR;
      ctx.globalAlpha = 0.8;
      ctx.fill();
      ctx.globalAlpha = 1.0;
      if (flagged.has(p.cid)) {
        ctx.beginPath();
        ctx.arc(px, py, 7, 0, 2 * Math.PI);
        ctx.strokeStyle = OUTLIER_RING;
        ctx.lineWidth = 1.5;
        ctx.stroke();
      }
    }
  }

  private place(p: ScatterPoint): [number, number] {
    const w = this.canvas.width - 2 * PAD;
    const h = this.canvas.height - 2 * PAD;
    return [PAD + p.x * w, PAD + (1 - p.y) * h];
  }

  private handleClick(ev: MouseEvent): void {
    const rect = this.canvas.getBoundingClientRect();
    const mx = ((ev.clientX - rect.left) / rect.width) * this.canvas.width;
    const my = ((ev.clientY - rect.top) / rect.height) * this.canvas.height;
    let bestCid: number | null = null;
    let bestDist = 12 * 12;
    for (const p of this.points) {
      const [px, py] = this.place(p);
      const d = (px - mx) ** 2 + (py - my) ** 2;
      if (d < bestDist) {
        bestDist = d;
        bestCid = p.cid;
      }
    }
    if (bestCid !== null) this.onSelect?.(bestCid);
  }
}
