// Executes a draw-op list on a 2D canvas context. All geometry arrives in
// screen coordinates; this layer holds no game state at all.

import type { DrawOp } from "./scene.js";

export function render(ctx: CanvasRenderingContext2D, ops: DrawOp[]): void {
  for (const op of ops) {
    switch (op.op) {
      case "clear":
        ctx.fillStyle = op.color;
        ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
        break;
      case "fill": {
        ctx.beginPath();
        op.pts.forEach((p, i) => (i === 0 ? ctx.moveTo(p[0], p[1]) : ctx.lineTo(p[0], p[1])));
        ctx.closePath();
        ctx.fillStyle = op.color;
        ctx.fill();
        break;
      }
      case "polyline": {
        ctx.beginPath();
        op.pts.forEach((p, i) => (i === 0 ? ctx.moveTo(p[0], p[1]) : ctx.lineTo(p[0], p[1])));
        if (op.close) ctx.closePath();
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.stroke();
        break;
      }
      case "circle":
        ctx.beginPath();
        ctx.arc(op.c[0], op.c[1], op.r, 0, 2 * Math.PI);
        if (op.fill) {
          ctx.fillStyle = op.fill;
          ctx.fill();
        }
        if (op.stroke) {
          ctx.strokeStyle = op.stroke;
          ctx.lineWidth = 1;
          ctx.stroke();
        }
        break;
      case "segment":
        ctx.beginPath();
        ctx.moveTo(op.a[0], op.a[1]);
        ctx.lineTo(op.b[0], op.b[1]);
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.stroke();
        break;
      case "hud":
        ctx.fillStyle = op.color;
        ctx.font = `${op.size}px monospace`;
        ctx.fillText(op.text, op.at[0], op.at[1]);
        break;
    }
  }
}
