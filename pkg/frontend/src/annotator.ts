// Canvas polyline editor.  Points live in image pixel coordinates no
// matter the display zoom; the canvas merely scales for display.

import { ContourKind, Convexity, FigureSide, KIND_COLORS, fillPolygon } from './schema.js';
import { EditorState, UndoStack, emptyState } from './state.js';

export type Tool = ContourKind | 'mask';

export class Annotator {
  state: EditorState;
  readonly undoStack = new UndoStack();
  tool: Tool = 'silhouette_smooth';
  convexity: Convexity | null = null;
  figureSide: FigureSide | null = null;
  pending: [number, number][] = [];
  onChange: (() => void) | null = null;

  private canvas: HTMLCanvasElement;
  private ctx: CanvasRenderingContext2D;
  private image: HTMLImageElement | null = null;
  private zoom = 1;

  constructor(canvas: HTMLCanvasElement, width: number, height: number) {
    this.canvas = canvas;
    const ctx = canvas.getContext('2d');
    if (!ctx) throw new Error('2d canvas unavailable');
    this.ctx = ctx;
    this.state = emptyState(width, height);
    this.fitZoom();
    this.bindInput();
  }

  setImage(img: HTMLImageElement): void {
    this.image = img;
    this.render();
  }

  loadState(state: EditorState): void {
    this.state = state;
    this.pending = [];
    this.render();
  }

  private fitZoom(): void {
    this.zoom = Math.max(
      1,
      Math.floor(Math.min(this.canvas.width / this.state.width, this.canvas.height / this.state.height)),
    );
  }

  toImageCoords(clientX: number, clientY: number): [number, number] {
    const rect = this.canvas.getBoundingClientRect();
    const sx = this.canvas.width / rect.width;
    const sy = this.canvas.height / rect.height;
    const x = ((clientX - rect.left) * sx) / this.zoom;
    const y = ((clientY - rect.top) * sy) / this.zoom;
    return [
      Math.max(0, Math.min(this.state.width - 1, x)),
      Math.max(0, Math.min(this.state.height - 1, y)),
    ];
  }

  private bindInput(): void {
    this.canvas.addEventListener('pointerdown', (e) => {
      const [x, y] = this.toImageCoords(e.clientX, e.clientY);
      this.addPoint(Math.round(x * 2) / 2, Math.round(y * 2) / 2);
    });
    this.canvas.addEventListener('dblclick', (e) => {
      e.preventDefault();
      this.finishContour();
    });
  }

  addPoint(x: number, y: number): void {
    const last = this.pending[this.pending.length - 1];
    if (last && last[0] === x && last[1] === y) return;
    this.pending.push([x, y]);
    this.render();
  }

  // Close out the pending points as a contour (or the mask polygon).
  finishContour(): void {
    if (this.tool === 'mask') {
      if (this.pending.length >= 3) {
        this.undoStack.push(this.state);
        this.state.mask = fillPolygon(this.pending, this.state.width, this.state.height);
        this.changed();
      }
    } else if (this.pending.length >= 2) {
      this.undoStack.push(this.state);
      this.state.contours.push({
        kind: this.tool,
        points: this.pending.map((p) => [p[0], p[1]]),
        convexity: this.tool === 'fold' ? this.convexity : null,
        figureSide: this.tool === 'self_occlusion' ? this.figureSide : null,
      });
      this.state.selected = this.state.contours.length - 1;
      this.changed();
    }
    this.pending = [];
    this.render();
  }

  deleteSelected(): void {
    if (this.state.selected === null) return;
    this.undoStack.push(this.state);
    this.state.contours.splice(this.state.selected, 1);
    this.state.selected = null;
    this.changed();
    this.render();
  }

  setConvexity(c: Convexity): void {
    this.convexity = c;
    if (this.state.selected !== null) {
      const sel = this.state.contours[this.state.selected];
      if (sel.kind === 'fold') {
        this.undoStack.push(this.state);
        sel.convexity = c;
        this.changed();
      }
    }
  }

  setFigureSide(f: FigureSide): void {
    this.figureSide = f;
    if (this.state.selected !== null) {
      const sel = this.state.contours[this.state.selected];
      if (sel.kind === 'self_occlusion') {
        this.undoStack.push(this.state);
        sel.figureSide = f;
        this.changed();
      }
    }
  }

  undo(): void {
    const prev = this.undoStack.undo(this.state);
    if (prev) {
      this.state = prev;
      this.pending = [];
      this.changed();
      this.render();
    }
  }

  private changed(): void {
    if (this.onChange) this.onChange();
  }

  render(): void {
    const { ctx, canvas } = this;
    ctx.fillStyle = '#222';
    ctx.fillRect(0, 0, canvas.width, canvas.height);
    ctx.save();
    ctx.scale(this.zoom, this.zoom);
    if (this.image) {
      ctx.imageSmoothingEnabled = false;
      ctx.drawImage(this.image, 0, 0, this.state.width, this.state.height);
    }
    // mask tint
    if (this.state.mask.some((v) => v)) {
      ctx.fillStyle = 'rgba(120, 160, 255, 0.18)';
      for (let y = 0; y < this.state.height; y++) {
        let x = 0;
        while (x < this.state.width) {
          if (this.state.mask[y * this.state.width + x]) {
            let x1 = x;
            while (x1 < this.state.width && this.state.mask[y * this.state.width + x1]) x1++;
            ctx.fillRect(x, y, x1 - x, 1);
            x = x1;
          } else x++;
        }
      }
    }
    this.state.contours.forEach((c, i) => {
      ctx.strokeStyle = KIND_COLORS[c.kind];
      ctx.lineWidth = i === this.state.selected ? 0.8 : 0.4;
      ctx.beginPath();
      c.points.forEach(([x, y], k) => (k ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
      ctx.stroke();
    });
    if (this.pending.length) {
      ctx.strokeStyle = this.tool === 'mask' ? '#fff' : KIND_COLORS[this.tool as ContourKind];
      ctx.setLineDash([1, 1]);
      ctx.beginPath();
      this.pending.forEach(([x, y], k) => (k ? ctx.lineTo(x, y) : ctx.moveTo(x, y)));
      ctx.stroke();
      ctx.setLineDash([]);
    }
    ctx.restore();
  }
}
