/** Candidate detail: ramped input in red, output in blue, booleans as
 * step lines, all on a shared tick axis. */

import type { CandidateDetail } from "./types.js";

export const INPUT_COLOR = "#c43030";
export const OUTPUT_COLOR = "#2f6fd6";
const BOOL_COLOR = "#777";
const PAD = 28;
const S16 = { lo: -32768, hi: 32767 };

export class DetailView {
  constructor(private canvas: HTMLCanvasElement) {}

  clear(): void {
    const ctx = this.canvas.getContext("2d");
    ctx?.clearRect(0, 0, this.canvas.width, this.canvas.height);
  }

  render(detail: CandidateDetail): void {
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);

    const input = detail.inputs["Input_6"];
    const output = detail.outputs["Output_9"];
    const ticks = output.length;
    const analogH = height * 0.62;

    const x = (t: number) => PAD + (t / Math.max(ticks - 1, 1)) * (width - 2 * PAD);
    const yAnalog = (v: number) =>
      PAD + (1 - (v - S16.lo) / (S16.hi - S16.lo)) * (analogH - PAD);

    ctx.strokeStyle = "#888";
    ctx.strokeRect(PAD, PAD, width - 2 * PAD, analogH - PAD);

    const line = (series: number[], color: string) => {
      ctx.beginPath();
      series.forEach((v, t) => {
        if (t === 0) ctx.moveTo(x(t), yAnalog(v));
        else ctx.lineTo(x(t), yAnalog(v));
      });
      ctx.strokeStyle = color;
      ctx.lineWidth = 1.6;
      ctx.stroke();
    };
    line(input, INPUT_COLOR);
    line(output, OUTPUT_COLOR);

    // boolean lanes: Reset input, Dec and Pasv outputs as step lines
    const lanes: Array<[string, number[]]> = [
      ["Reset", detail.inputs["Input_1"]],
      ["Dec", detail.outputs["Output_7"]],
      ["Pasv", detail.outputs["Output_8"]],
    ];
    const laneH = (height - analogH - PAD) / lanes.length;
    lanes.forEach(([name, series], i) => {
      const base = analogH + 6 + i * laneH;
      ctx.fillStyle = "#555";
      ctx.font = "10px sans-serif";
      ctx.fillText(name, 2, base + laneH / 2);
      ctx.beginPath();
      series.forEach((v, t) => {
        const yy = base + (v ? 2 : laneH - 6);
        if (t === 0) ctx.moveTo(x(t), yy);
        else {
          const prev = series[t - 1];
          const prevY = base + (prev ? 2 : laneH - 6);
          ctx.lineTo(x(t), prevY); // hold, then step
          ctx.lineTo(x(t), yy);
        }
      });
      ctx.strokeStyle = BOOL_COLOR;
      ctx.lineWidth = 1.2;
      ctx.stroke();
    });

    ctx.fillStyle = INPUT_COLOR;
    ctx.fillText("Input_6", width - 100, 14);
    ctx.fillStyle = OUTPUT_COLOR;
    ctx.fillText("Output_9", width - 52, 14);
  }
}

/** Turn an export response into a browser download. */
export function downloadCsv(filename: string, csv: string): void {
  const blob = new Blob([csv], { type: "text/csv" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = filename;
  a.click();
  URL.revokeObjectURL(url);
}
