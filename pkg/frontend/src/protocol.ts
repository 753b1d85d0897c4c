// Wire protocol: text frames from the session service, steer lines back.
// Field order is fixed; floats travel as 17-significant-digit decimals.

export interface Frame {
  t: number;
  xp: [number, number];
  xe: [number, number];
  up: [number, number];
  ue: [number, number];
  separation: number;
  phiCursor: number | null;
  boundaryVersion: string;
  status: string;
  flags: string[];
}

export interface EndMessage {
  status: string;
  tFinal: number;
}

export function parseFrame(line: string): Frame | null {
  const parts = line.trim().split(/\s+/);
  if (parts.length !== 15 || parts[0] !== "frame") return null;
  const nums = parts.slice(1, 11).map(Number);
  if (nums.some((v) => Number.isNaN(v))) return null;
  const phiRaw = parts[11];
  const phi = phiRaw === "nan" ? null : Number(phiRaw);
  if (phi !== null && Number.isNaN(phi)) return null;
  return {
    t: nums[0],
    xp: [nums[1], nums[2]],
    xe: [nums[3], nums[4]],
    up: [nums[5], nums[6]],
    ue: [nums[7], nums[8]],
    separation: nums[9],
    phiCursor: phi,
    boundaryVersion: parts[12],
    status: parts[13],
    flags: parts[14] === "-" ? [] : parts[14].split(","),
  };
}

export function parseEnd(line: string): EndMessage | null {
  const parts = line.trim().split(/\s+/);
  if (parts.length !== 3 || parts[0] !== "end") return null;
  const tFinal = Number(parts[2]);
  if (Number.isNaN(tFinal)) return null;
  return { status: parts[1], tFinal };
}

// Heading toward the pointer; returns null rather than ever emitting a
// zero or non-unit vector.
export function headingToward(
  from: [number, number],
  to: [number, number],
): [number, number] | null {
  const dx = to[0] - from[0];
  const dy = to[1] - from[1];
  const n = Math.hypot(dx, dy);
  if (n < 1e-12) return null;
  return [dx / n, dy / n];
}

export function steerLine(
  sessionId: string,
  heading: [number, number],
  clientTs: number,
  cursor?: [number, number],
): string {
  const n = Math.hypot(heading[0], heading[1]);
  if (!(n > 0)) throw new Error("refusing to send a zero heading");
  const ux = heading[0] / n;
  const uy = heading[1] / n;
  let line = `steer ${sessionId} ${ux} ${uy} ${clientTs}`;
  if (cursor) line += ` ${cursor[0]} ${cursor[1]}`;
  return line;
}
