// Software mesh viewer: flat-shaded triangles, painter's sort, orbit by
// dragging.  Cameras can be linked across viewers for side-by-side
// variant comparison.

import {
  FRONTAL_VIEW,
  Mesh,
  Orbit,
  ROTATED_VIEW,
  meshCenter,
  meshRadius,
  project,
  toCamera,
} from './mesh.js';

export class MeshViewer {
  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private mesh: Mesh | null = null;
  private center: [number, number, number] = [0, 0, 0];
  private radius = 1;
  orbit: Orbit = { ...FRONTAL_VIEW };
  onOrbitChange: ((o: Orbit) => void) | null = null;

  constructor(canvas: HTMLCanvasElement) {
    this.canvas = canvas;
    const ctx = canvas.getContext('2d');
    if (!ctx) throw new Error('2d canvas unavailable');
    this.ctx = ctx;
    this.bindInput();
  }

  setMesh(mesh: Mesh): void {
    this.mesh = mesh;
    this.center = meshCenter(mesh);
    this.radius = meshRadius(mesh, this.center);
    this.render();
  }

  setOrbit(orbit: Orbit, notify = false): void {
    this.orbit = { ...orbit };
    this.render();
    if (notify && this.onOrbitChange) this.onOrbitChange(this.orbit);
  }

  frontal(): void {
    this.setOrbit(FRONTAL_VIEW, true);
  }

  rotated(): void {
    this.setOrbit(ROTATED_VIEW, true);
  }

  private bindInput(): void {
    let dragging = false;
    let lastX = 0;
    let lastY = 0;
    this.canvas.addEventListener('pointerdown', (e) => {
      dragging = true;
      lastX = e.clientX;
      lastY = e.clientY;
      this.canvas.setPointerCapture(e.pointerId);
    });
    this.canvas.addEventListener('pointermove', (e) => {
      if (!dragging) return;
      this.orbit.yaw += (e.clientX - lastX) * 0.01;
      this.orbit.pitch = Math.max(
        -1.4,
        Math.min(1.4, this.orbit.pitch + (e.clientY - lastY) * 0.01),
      );
      lastX = e.clientX;
      lastY = e.clientY;
      this.setOrbit(this.orbit, true);
    });
    this.canvas.addEventListener('pointerup', () => (dragging = false));
    this.canvas.addEventListener('wheel', (e) => {
      e.preventDefault();
      this.orbit.distance = Math.max(
        1.2,
        Math.min(8, this.orbit.distance * (e.deltaY > 0 ? 1.1 : 0.9)),
      );
      this.setOrbit(this.orbit, true);
    });
  }

  render(): void {
    const { ctx, canvas } = this;
    ctx.fillStyle = '#14161a';
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    if (!this.mesh) return;
    const m = this.mesh;
    const inv = 1 / this.radius;
    const nTri = m.faces.length / 3;
    const order: { z: number; i: number }[] = [];
    const pts = new Float64Array((m.vertices.length / 3) * 3);
    for (let v = 0, j = 0; v < m.vertices.length; v += 3, j += 3) {
      const cam = toCamera(
        (m.vertices[v] - this.center[0]) * inv,
        (m.vertices[v + 1] - this.center[1]) * inv,
        (m.vertices[v + 2] - this.center[2]) * inv,
        this.orbit,
      );
      const pr = project(cam, canvas.width, canvas.height);
      pts[j] = pr[0];
      pts[j + 1] = pr[1];
      pts[j + 2] = pr[2];
    }
    for (let t = 0; t < nTri; t++) {
      const a = m.faces[3 * t] * 3;
      const b = m.faces[3 * t + 1] * 3;
      const c = m.faces[3 * t + 2] * 3;
      order.push({ z: (pts[a + 2] + pts[b + 2] + pts[c + 2]) / 3, i: t });
    }
    order.sort((p, q) => q.z - p.z);
    for (const { i } of order) {
      const a = m.faces[3 * i] * 3;
      const b = m.faces[3 * i + 1] * 3;
      const c = m.faces[3 * i + 2] * 3;
      const ux = pts[b] - pts[a];
      const uy = pts[b + 1] - pts[a + 1];
      const vx = pts[c] - pts[a];
      const vy = pts[c + 1] - pts[a + 1];
      const area = ux * vy - uy * vx;
      if (area <= 0) continue; // backface
      // light by world-space normal of the original triangle
      const shade = this.faceShade(i);
      ctx.fillStyle = `rgb(${shade}, ${shade + 8}, ${shade + 18})`;
      ctx.beginPath();
      ctx.moveTo(pts[a], pts[a + 1]);
      ctx.lineTo(pts[b], pts[b + 1]);
      ctx.lineTo(pts[c], pts[c + 1]);
      ctx.closePath();
      ctx.fill();
    }
  }

  private faceShade(t: number): number {
    const m = this.mesh!;
    const a = m.faces[3 * t] * 3;
    const b = m.faces[3 * t + 1] * 3;
    const c = m.faces[3 * t + 2] * 3;
    const v = m.vertices;
    const ux = v[b] - v[a], uy = v[b + 1] - v[a + 1], uz = v[b + 2] - v[a + 2];
    const wx = v[c] - v[a], wy = v[c + 1] - v[a + 1], wz = v[c + 2] - v[a + 2];
    let nx = uy * wz - uz * wy;
    let ny = uz * wx - ux * wz;
    let nz = ux * wy - uy * wx;
    const len = Math.hypot(nx, ny, nz) || 1;
    nx /= len; ny /= len; nz /= len;
    const lambert = Math.max(0, 0.35 * nx + 0.45 * ny + 0.82 * nz);
    return Math.round(70 + 160 * lambert);
  }
}

// Anything with an orbit can be linked; MeshViewer satisfies this.
export interface OrbitTarget {
  orbit: Orbit;
  setOrbit(orbit: Orbit, notify?: boolean): void;
  onOrbitChange: ((o: Orbit) => void) | null;
}

// Keep two viewers' orbits in lockstep.
export function linkCameras(a: OrbitTarget, b: OrbitTarget): void {
  a.onOrbitChange = (o) => b.setOrbit(o, false);
  b.onOrbitChange = (o) => a.setOrbit(o, false);
}
