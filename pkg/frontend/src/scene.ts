// Pure scene construction: ViewState in, draw-op list out. The console never
// simulates; everything drawn comes from service data, which is what makes
// replaying a recorded frame stream reproduce the rendering exactly.

import type { Frame } from "./protocol.js";

export interface BoundaryArc {
  type: string;
  points: [number, number][];
}

export interface WorldDoc {
  kind: string;
  theta0_deg?: number;
  obstacles?: [number, number][][];
}

export interface TargetDoc {
  kind: string;
  normal?: [number, number];
  offset?: number;
  center?: [number, number];
  radius?: number;
  vertices?: [number, number][];
}

export interface BoundaryDoc {
  version: number;
  capture_bound: number;
  alpha: number;
  capture_threshold: number;
  world: WorldDoc;
  targets: TargetDoc[];
  arcs: BoundaryArc[];
}

export interface ViewState {
  boundary: BoundaryDoc | null;
  frame: Frame | null;
  end: { status: string; tFinal: number } | null;
  pointerHeading: [number, number] | null;
  cursor: [number, number] | null;
  connected: boolean;
}

export type DrawOp =
  | { op: "clear"; color: string }
  | { op: "polyline"; pts: [number, number][]; color: string; width: number; close?: boolean }
  | { op: "fill"; pts: [number, number][]; color: string }
  | { op: "circle"; c: [number, number]; r: number; fill?: string; stroke?: string }
  | { op: "segment"; a: [number, number]; b: [number, number]; color: string; width: number }
  | { op: "hud"; at: [number, number]; text: string; color: string; size: number };

export const ARC_COLORS: Record<string, string> = {
  apollonius: "#4da6ff",
  oval: "#ffb84d",
  vertex_circle: "#b84dff",
  untyped: "#9a9a9a",
};

export interface Camera {
  scale: number;
  cx: number;
  cy: number;
  w: number;
  h: number;
}

export function fitCamera(doc: BoundaryDoc, w: number, h: number): Camera {
  let lo = [Infinity, Infinity];
  let hi = [-Infinity, -Infinity];
  const grow = (p: [number, number]) => {
    lo = [Math.min(lo[0], p[0]), Math.min(lo[1], p[1])];
    hi = [Math.max(hi[0], p[0]), Math.max(hi[1], p[1])];
  };
  for (const arc of doc.arcs) for (const p of arc.points) grow(p);
  grow([0, 0]);
  if (!Number.isFinite(lo[0])) {
    lo = [-5, -5];
    hi = [5, 5];
  }
  const spanX = Math.max(hi[0] - lo[0], 1e-6);
  const spanY = Math.max(hi[1] - lo[1], 1e-6);
  const scale = 0.8 * Math.min(w / spanX, h / spanY);
  return { scale, cx: (lo[0] + hi[0]) / 2, cy: (lo[1] + hi[1]) / 2, w, h };
}

export function toScreen(cam: Camera, p: [number, number]): [number, number] {
  return [
    cam.w / 2 + (p[0] - cam.cx) * cam.scale,
    cam.h / 2 - (p[1] - cam.cy) * cam.scale,
  ];
}

export function toWorld(cam: Camera, p: [number, number]): [number, number] {
  return [
    cam.cx + (p[0] - cam.w / 2) / cam.scale,
    cam.cy + (cam.h / 2 - p[1]) / cam.scale,
  ];
}

function wedgeFill(theta0Deg: number, reach: number): [number, number][] {
  const t = (theta0Deg * Math.PI) / 180;
  return [
    [0, 0],
    [reach * Math.cos(-t), reach * Math.sin(-t)],
    [reach, 0],
    [reach * Math.cos(t), reach * Math.sin(t)],
  ];
}

export function buildScene(view: ViewState, cam: Camera): DrawOp[] {
  const ops: DrawOp[] = [{ op: "clear", color: "#101418" }];
  const S = (p: [number, number]) => toScreen(cam, p);
  const doc = view.boundary;
  if (!doc) {
    ops.push({ op: "hud", at: [16, 24], text: "no session", color: "#ccc", size: 14 });
    return ops;
  }
  const reach = 4 * Math.max(1, doc.capture_bound);
  // obstacles
  if (doc.world.kind === "corner" && doc.world.theta0_deg !== undefined) {
    ops.push({ op: "fill", pts: wedgeFill(doc.world.theta0_deg, reach).map(S), color: "#3a3f45" });
  } else if (doc.world.kind === "polygons" && doc.world.obstacles) {
    for (const poly of doc.world.obstacles) {
      ops.push({ op: "fill", pts: poly.map(S), color: "#3a3f45" });
    }
  }
  // targets (display only)
  for (const tgt of doc.targets) {
    if (tgt.kind === "disk" && tgt.center && tgt.radius !== undefined) {
      ops.push({ op: "circle", c: S(tgt.center), r: tgt.radius * cam.scale, stroke: "#44cc66" });
    } else if (tgt.kind === "half-plane" && tgt.normal && tgt.offset !== undefined) {
      // boundary line of the half-plane across the viewport
      const n = tgt.normal;
      const base: [number, number] = [n[0] * tgt.offset, n[1] * tgt.offset];
      const tang: [number, number] = [-n[1], n[0]];
      const a: [number, number] = [base[0] + tang[0] * reach, base[1] + tang[1] * reach];
      const b: [number, number] = [base[0] - tang[0] * reach, base[1] - tang[1] * reach];
      ops.push({ op: "segment", a: S(a), b: S(b), color: "#44cc66", width: 2 });
    } else if (tgt.kind === "polygon" && tgt.vertices) {
      ops.push({ op: "polyline", pts: tgt.vertices.map(S), color: "#44cc66", width: 2, close: true });
    }
  }
  // dominance boundary, styled per arc type
  for (const arc of doc.arcs) {
    ops.push({
      op: "polyline",
      pts: arc.points.map(S),
      color: ARC_COLORS[arc.type] ?? ARC_COLORS.untyped,
      width: 2,
    });
  }
  const frame = view.frame;
  if (frame) {
    // players
    ops.push({ op: "circle", c: S(frame.xp), r: 6, fill: "#ff5555" });
    ops.push({ op: "circle", c: S(frame.xe), r: 6, fill: "#55ff99" });
    ops.push({
      op: "circle",
      c: S(frame.xp),
      r: Math.max(2, doc.capture_threshold * cam.scale),
      stroke: "#ff5555",
    });
    // held heading indicator
    if (view.pointerHeading) {
      const h = view.pointerHeading;
      const tip: [number, number] = [frame.xe[0] + h[0] * 0.5, frame.xe[1] + h[1] * 0.5];
      ops.push({ op: "segment", a: S(frame.xe), b: S(tip), color: "#55ff99", width: 1 });
    }
    // HUD values
    const bound = doc.capture_bound;
    const left = Math.max(0, bound - frame.t);
    ops.push({ op: "hud", at: [16, 24], text: `t = ${frame.t.toFixed(3)}`, color: "#eee", size: 14 });
    ops.push({
      op: "hud",
      at: [16, 44],
      text: `separation = ${frame.separation.toFixed(4)}`,
      color: "#eee",
      size: 14,
    });
    ops.push({
      op: "hud",
      at: [16, 64],
      text: `capture bound in ${left.toFixed(3)} (of ${bound.toFixed(3)})`,
      color: "#eee",
      size: 14,
    });
    if (frame.phiCursor !== null) {
      ops.push({
        op: "hud",
        at: [16, 84],
        text: `phi at cursor = ${frame.phiCursor.toFixed(4)}`,
        color: "#eee",
        size: 14,
      });
    }
    if (frame.flags.includes("slide")) {
      ops.push({ op: "hud", at: [16, 104], text: "wall contact", color: "#ffb84d", size: 14 });
    }
  }
  if (!view.connected) {
    ops.push({ op: "hud", at: [16, 124], text: "reconnecting...", color: "#ff5555", size: 14 });
  }
  if (view.end) {
    const head = view.end.status === "captured" ? "CAPTURED" : view.end.status.toUpperCase();
    ops.push({ op: "hud", at: [cam.w / 2 - 130, cam.h / 2 - 20], text: head, color: "#fff", size: 28 });
    ops.push({
      op: "hud",
      at: [cam.w / 2 - 130, cam.h / 2 + 10],
      text: `t_f = ${view.end.tFinal.toFixed(4)}, bound = ${doc.capture_bound.toFixed(4)}`,
      color: "#fff",
      size: 16,
    });
  }
  return ops;
}
