// Editor state: the annotation being built plus UI-only fields (selected
// contour, pending points, undo history).  Export strips everything but
// the document and validates it first.

import {
  AnnotationDoc,
  Contour,
  ContourKind,
  Convexity,
  FigureSide,
  ValidationIssue,
  rleDecode,
  rleEncode,
  validateDoc,
} from './schema.js';

export interface EditorContour {
  kind: ContourKind;
  points: [number, number][];
  convexity: Convexity | null; // null while the user has not chosen yet
  figureSide: FigureSide | null;
}

export interface EditorState {
  width: number;
  height: number;
  mask: Uint8Array;
  contours: EditorContour[];
  selected: number | null; // UI-only
}

export function emptyState(width: number, height: number): EditorState {
  return {
    width,
    height,
    mask: new Uint8Array(width * height),
    contours: [],
    selected: null,
  };
}

function cloneState(s: EditorState): EditorState {
  return {
    width: s.width,
    height: s.height,
    mask: s.mask.slice(),
    contours: s.contours.map((c) => ({
      kind: c.kind,
      points: c.points.map((p) => [p[0], p[1]] as [number, number]),
      convexity: c.convexity,
      figureSide: c.figureSide,
    })),
    selected: s.selected,
  };
}

export class UndoStack {
  private past: EditorState[] = [];
  private limit: number;

  constructor(limit = 100) {
    this.limit = limit;
  }

  push(state: EditorState): void {
    this.past.push(cloneState(state));
    if (this.past.length > this.limit) this.past.shift();
  }

  undo(current: EditorState): EditorState | null {
    const prev = this.past.pop();
    return prev ?? null;
  }

  get depth(): number {
    return this.past.length;
  }
}

// Strip UI-only state; returns the schema document or the issues that
// block the export.
export function exportDoc(
  state: EditorState,
): { doc: AnnotationDoc | null; issues: ValidationIssue[] } {
  const contours: Contour[] = state.contours.map((c) => {
    const out: Contour = { kind: c.kind, points: c.points.map((p) => [p[0], p[1]]) };
    if (c.kind === 'fold' && c.convexity) out.convexity = c.convexity;
    if (c.kind === 'self_occlusion' && c.figureSide) out.figure_side = c.figureSide;
    return out;
  });
  const doc: AnnotationDoc = {
    version: 1,
    image: { width: state.width, height: state.height },
    mask: rleEncode(state.mask),
    contours,
  };
  const issues = validateDoc(doc);
  return { doc: issues.length ? null : doc, issues };
}

export function importDoc(doc: AnnotationDoc): EditorState {
  const state = emptyState(doc.image.width, doc.image.height);
  state.mask = rleDecode(doc.mask, doc.image.width, doc.image.height);
  state.contours = doc.contours.map((c) => ({
    kind: c.kind,
    points: c.points.map((p) => [p[0], p[1]] as [number, number]),
    convexity: c.convexity ?? null,
    figureSide: c.figure_side ?? null,
  }));
  return state;
}
