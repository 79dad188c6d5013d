// Annotation document model, mirroring the service's JSON schema 1:1.
// Validation reports the same dotted field paths the server uses so the
// UI can highlight the offending control before a PUT is attempted.

export type ContourKind =
  | 'silhouette_smooth'
  | 'silhouette_sharp'
  | 'self_occlusion'
  | 'fold';

export type Convexity = 'convex' | 'concave';
export type FigureSide = 'left' | 'right';

export interface Contour {
  kind: ContourKind;
  points: [number, number][];
  convexity?: Convexity;
  figure_side?: FigureSide;
}

export interface AnnotationDoc {
  version: 1;
  image: { width: number; height: number };
  mask: number[];
  contours: Contour[];
}

export const KIND_COLORS: Record<ContourKind, string> = {
  silhouette_smooth: '#e33',
  silhouette_sharp: '#2cc3d6',
  self_occlusion: '#3c4',
  fold: '#f90',
};

export interface ValidationIssue {
  field: string;
  message: string;
}

const KINDS = new Set([
  'silhouette_smooth',
  'silhouette_sharp',
  'self_occlusion',
  'fold',
]);

export function validateDoc(doc: unknown): ValidationIssue[] {
  const issues: ValidationIssue[] = [];
  if (typeof doc !== 'object' || doc === null) {
    return [{ field: '$', message: 'document must be an object' }];
  }
  const d = doc as Record<string, unknown>;
  if (d.version !== 1) {
    issues.push({ field: 'version', message: 'version must be 1' });
  }
  const image = d.image as Record<string, unknown> | undefined;
  const width = image?.width;
  const height = image?.height;
  if (
    typeof width !== 'number' || typeof height !== 'number' ||
    width <= 0 || height <= 0 || !Number.isInteger(width) || !Number.isInteger(height)
  ) {
    issues.push({ field: 'image', message: 'width/height must be positive integers' });
    return issues;
  }
  const mask = d.mask;
  if (!Array.isArray(mask) || mask.some((r) => !Number.isInteger(r) || r < 0)) {
    issues.push({ field: 'mask', message: 'mask must be a list of run lengths' });
  } else {
    const total = (mask as number[]).reduce((a, b) => a + b, 0);
    if (total !== width * height) {
      issues.push({ field: 'mask', message: 'run lengths must cover the image' });
    }
  }
  const contours = d.contours;
  if (!Array.isArray(contours)) {
    issues.push({ field: 'contours', message: 'contours must be a list' });
    return issues;
  }
  contours.forEach((c, i) => {
    const where = `contours[${i}]`;
    if (typeof c !== 'object' || c === null) {
      issues.push({ field: where, message: 'must be an object' });
      return;
    }
    const cc = c as Record<string, unknown>;
    if (!KINDS.has(cc.kind as string)) {
      issues.push({ field: `${where}.kind`, message: `unknown kind ${cc.kind}` });
      return;
    }
    const pts = cc.points;
    if (!Array.isArray(pts) || pts.length < 2) {
      issues.push({ field: `${where}.points`, message: 'need at least two points' });
    } else {
      for (let k = 0; k < pts.length; k++) {
        const p = pts[k];
        if (!Array.isArray(p) || p.length !== 2 ||
            typeof p[0] !== 'number' || typeof p[1] !== 'number') {
          issues.push({ field: `${where}.points`, message: `point ${k} is not [x, y]` });
          break;
        }
        if (p[0] < 0 || p[0] > width - 1 || p[1] < 0 || p[1] > height - 1) {
          issues.push({ field: `${where}.points`, message: `point ${k} leaves the image` });
          break;
        }
        if (k > 0 && pts[k - 1][0] === p[0] && pts[k - 1][1] === p[1]) {
          issues.push({ field: `${where}.points`, message: 'consecutive points must differ' });
          break;
        }
      }
    }
    if (cc.kind === 'fold') {
      if (cc.convexity !== 'convex' && cc.convexity !== 'concave') {
        issues.push({ field: `${where}.convexity`, message: 'fold requires convexity' });
      }
    } else if (cc.convexity !== undefined) {
      issues.push({ field: `${where}.convexity`, message: 'only folds carry convexity' });
    }
    if (cc.kind === 'self_occlusion') {
      if (cc.figure_side !== 'left' && cc.figure_side !== 'right') {
        issues.push({ field: `${where}.figure_side`, message: 'self_occlusion requires figure_side' });
      }
    } else if (cc.figure_side !== undefined) {
      issues.push({ field: `${where}.figure_side`, message: 'only self-occlusions carry figure_side' });
    }
  });
  return issues;
}

// Row-major run-length encoding, alternating and starting with background.
export function rleEncode(mask: Uint8Array): number[] {
  const runs: number[] = [];
  let current = 0;
  let count = 0;
  for (const v of mask) {
    const bit = v ? 1 : 0;
    if (bit === current) {
      count++;
    } else {
      runs.push(count);
      current = bit;
      count = 1;
    }
  }
  runs.push(count);
  return runs;
}

export function rleDecode(runs: number[], width: number, height: number): Uint8Array {
  const out = new Uint8Array(width * height);
  let pos = 0;
  let val = 0;
  for (const r of runs) {
    if (r < 0 || pos + r > out.length) throw new Error('mask runs do not fit the image');
    out.fill(val, pos, pos + r);
    pos += r;
    val = 1 - val;
  }
  if (pos !== out.length) throw new Error('mask runs do not cover the image');
  return out;
}

// Scanline polygon fill in image pixel coordinates (pixel centres at
// integers); used by the mask polygon tool.
export function fillPolygon(
  points: [number, number][],
  width: number,
  height: number,
): Uint8Array {
  const out = new Uint8Array(width * height);
  if (points.length < 3) return out;
  for (let y = 0; y < height; y++) {
    const xs: number[] = [];
    for (let i = 0; i < points.length; i++) {
      const [x0, y0] = points[i];
      const [x1, y1] = points[(i + 1) % points.length];
      if (y0 === y1) continue;
      if ((y >= Math.min(y0, y1)) && (y < Math.max(y0, y1))) {
        xs.push(x0 + ((y - y0) / (y1 - y0)) * (x1 - x0));
      }
    }
    xs.sort((a, b) => a - b);
    for (let k = 0; k + 1 < xs.length; k += 2) {
      const xa = Math.max(0, Math.ceil(xs[k] - 0.5));
      const xb = Math.min(width - 1, Math.floor(xs[k + 1] - 0.5));
      for (let x = xa; x <= xb; x++) out[y * width + x] = 1;
    }
  }
  return out;
}
