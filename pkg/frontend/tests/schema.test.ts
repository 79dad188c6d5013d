import { describe, expect, it } from 'vitest';

import {
  AnnotationDoc,
  fillPolygon,
  rleDecode,
  rleEncode,
  validateDoc,
} from '../src/schema.js';

function validDoc(): AnnotationDoc {
  return {
    version: 1,
    image: { width: 8, height: 4 },
    mask: [0, 32],
    contours: [
      { kind: 'silhouette_smooth', points: [[1, 1], [6, 1]] },
      { kind: 'fold', points: [[2, 1], [2, 3]], convexity: 'concave' },
      { kind: 'self_occlusion', points: [[4, 0], [4, 3]], figure_side: 'left' },
    ],
  };
}

describe('validateDoc', () => {
  it('accepts a complete document', () => {
    expect(validateDoc(validDoc())).toEqual([]);
  });

  it('reports the field path for a fold without convexity', () => {
    const doc = validDoc();
    delete doc.contours[1].convexity;
    const issues = validateDoc(doc);
    expect(issues).toHaveLength(1);
    expect(issues[0].field).toBe('contours[1].convexity');
  });

  it('reports a self-occlusion without figure_side', () => {
    const doc = validDoc();
    delete doc.contours[2].figure_side;
    expect(validateDoc(doc)[0].field).toBe('contours[2].figure_side');
  });

  it('rejects flags on the wrong kind', () => {
    const doc = validDoc();
    doc.contours[0].convexity = 'convex';
    expect(validateDoc(doc)[0].field).toBe('contours[0].convexity');
  });

  it('rejects out-of-bounds and degenerate polylines', () => {
    const doc = validDoc();
    doc.contours[0].points = [[1, 1], [40, 1]];
    expect(validateDoc(doc)[0].field).toBe('contours[0].points');
    doc.contours[0].points = [[1, 1], [1, 1]];
    expect(validateDoc(doc)[0].field).toBe('contours[0].points');
    doc.contours[0].points = [[1, 1]];
    expect(validateDoc(doc)[0].field).toBe('contours[0].points');
  });

  it('rejects bad version, image and mask', () => {
    expect(validateDoc({})[0].field).toBe('version');
    const doc = validDoc() as unknown as Record<string, unknown>;
    doc.image = { width: -2, height: 4 };
    expect(validateDoc(doc).some((i) => i.field === 'image')).toBe(true);
    const doc2 = validDoc();
    doc2.mask = [0, 3];
    expect(validateDoc(doc2)[0].field).toBe('mask');
  });
});

describe('rle', () => {
  it('round-trips random masks', () => {
    for (let seed = 0; seed < 20; seed++) {
      const w = 3 + (seed % 7);
      const h = 2 + (seed % 5);
      const mask = new Uint8Array(w * h);
      let s = seed + 1;
      for (let i = 0; i < mask.length; i++) {
        s = (s * 1103515245 + 12345) & 0x7fffffff;
        mask[i] = s % 3 === 0 ? 1 : 0;
      }
      const back = rleDecode(rleEncode(mask), w, h);
      expect(Array.from(back)).toEqual(Array.from(mask));
    }
  });

  it('starts with a background run', () => {
    const mask = new Uint8Array([1, 1, 0, 0]);
    expect(rleEncode(mask)).toEqual([0, 2, 2]);
  });

  it('rejects runs that do not cover the image', () => {
    expect(() => rleDecode([3], 2, 2)).toThrow();
    expect(() => rleDecode([8], 2, 2)).toThrow();
  });
});

describe('fillPolygon', () => {
  it('fills an axis-aligned rectangle', () => {
    const mask = fillPolygon([[1, 1], [5, 1], [5, 3], [1, 3]], 8, 5);
    let count = 0;
    for (let y = 0; y < 5; y++) {
      for (let x = 0; x < 8; x++) {
        const inside = x >= 1 && x <= 5 && y >= 1 && y <= 3;
        if (mask[y * 8 + x]) count++;
        // interior pixels are always filled; edge pixels may go either way
        if (x > 1 && x < 5 && y > 1 && y < 3) {
          expect(mask[y * 8 + x]).toBe(1);
        }
        if (!inside) expect(mask[y * 8 + x]).toBe(0);
      }
    }
    expect(count).toBeGreaterThan(5);
  });

  it('returns empty for degenerate polygons', () => {
    expect(Array.from(fillPolygon([[1, 1], [2, 2]], 4, 4))).toEqual(new Array(16).fill(0));
  });
});
