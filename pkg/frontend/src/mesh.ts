// OBJ parsing and the small mesh math the 3D view needs.

export interface Mesh {
  vertices: Float64Array; // xyz triples
  faces: Uint32Array; // vertex-index triples, 0-based
}

export function parseObj(text: string): Mesh {
  const vs: number[] = [];
  const fs: number[] = [];
  for (const line of text.split('\n')) {
    if (line.startsWith('v ')) {
      const parts = line.slice(2).trim().split(/\s+/).map(Number);
      vs.push(parts[0], parts[1], parts[2]);
    } else if (line.startsWith('f ')) {
      const ids = line
        .slice(2)
        .trim()
        .split(/\s+/)
        .map((tok) => parseInt(tok.split('/')[0], 10) - 1);
      for (let i = 2; i < ids.length; i++) {
        fs.push(ids[0], ids[i - 1], ids[i]);
      }
    }
  }
  return { vertices: Float64Array.from(vs), faces: Uint32Array.from(fs) };
}

export function meshCenter(mesh: Mesh): [number, number, number] {
  const n = mesh.vertices.length / 3;
  let cx = 0, cy = 0, cz = 0;
  for (let i = 0; i < mesh.vertices.length; i += 3) {
    cx += mesh.vertices[i];
    cy += mesh.vertices[i + 1];
    cz += mesh.vertices[i + 2];
  }
  return [cx / n, cy / n, cz / n];
}

export function meshRadius(mesh: Mesh, center: [number, number, number]): number {
  let r2 = 0;
  for (let i = 0; i < mesh.vertices.length; i += 3) {
    const dx = mesh.vertices[i] - center[0];
    const dy = mesh.vertices[i + 1] - center[1];
    const dz = mesh.vertices[i + 2] - center[2];
    r2 = Math.max(r2, dx * dx + dy * dy + dz * dz);
  }
  return Math.sqrt(r2) || 1;
}

export interface Orbit {
  yaw: number; // radians around the vertical axis
  pitch: number; // radians above the horizon
  distance: number; // multiples of the mesh radius
}

export const FRONTAL_VIEW: Orbit = { yaw: 0, pitch: 0.12, distance: 2.6 };
export const ROTATED_VIEW: Orbit = { yaw: 1.1, pitch: 0.45, distance: 2.6 };

// Rotate a point into camera space for the given orbit (camera looks at
// the origin from (yaw, pitch) at the given distance).
export function toCamera(
  x: number,
  y: number,
  z: number,
  orbit: Orbit,
): [number, number, number] {
  const cy = Math.cos(orbit.yaw), sy = Math.sin(orbit.yaw);
  const cp = Math.cos(orbit.pitch), sp = Math.sin(orbit.pitch);
  // yaw about y, then pitch about x
  const x1 = cy * x + sy * z;
  const z1 = -sy * x + cy * z;
  const y2 = cp * y - sp * z1;
  const z2 = sp * y + cp * z1;
  return [x1, y2, z2 + orbit.distance];
}

export function project(
  p: [number, number, number],
  widthPx: number,
  heightPx: number,
  fov = 1.0,
): [number, number, number] {
  const scale = (0.5 * Math.min(widthPx, heightPx)) / Math.tan(fov / 2);
  const z = Math.max(p[2], 1e-6);
  return [widthPx / 2 + (scale * p[0]) / z, heightPx / 2 - (scale * p[1]) / z, z];
}
