import type { Heatmap } from "./types.js";
import { toSvg } from "./board.js";

/**
 * The heat-map payload is a dense row-major grid in board millimetres:
 * cell (row, col) spans x in [origin_x + col*s, origin_x + (col+1)*s] and
 * y likewise by row, with s = cell_size.  Off-board cells are null.
 */

export interface HeatCell {
  x: number; // cell centre, board mm
  y: number;
  value: number;
}

export function cellCenter(hm: Heatmap, row: number, col: number): { x: number; y: number } {
  return {
    x: hm.origin[0] + (col + 0.5) * hm.cell_size,
    y: hm.origin[1] + (row + 0.5) * hm.cell_size,
  };
}

/** The on-board cell with the largest win-probability change. */
export function argmaxCell(hm: Heatmap): HeatCell {
  let best: HeatCell | null = null;
  for (let row = 0; row < hm.ny; row++) {
    for (let col = 0; col < hm.nx; col++) {
      const v = hm.delta_p[row][col];
      if (v === null) continue;
      if (best === null || v > best.value) {
        best = { ...cellCenter(hm, row, col), value: v };
      }
    }
  }
  if (best === null) throw new Error("heat map has no on-board cells");
  return best;
}

function color(v: number, lo: number, hi: number): string {
  // diverging scale around zero: losses fade to blue, gains to green
  const span = Math.max(hi - lo, 1e-12);
  const t = (v - lo) / span;
  const g = Math.round(60 + 180 * t);
  const b = Math.round(240 - 180 * t);
  return `rgb(40,${g},${b})`;
}

/** SVG rects for every on-board cell, in board coordinates. */
export function heatmapRects(hm: Heatmap, opacity = 0.55): string[] {
  const values: number[] = [];
  for (const row of hm.delta_p) {
    for (const v of row) if (v !== null) values.push(v);
  }
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const rects: string[] = [];
  for (let row = 0; row < hm.ny; row++) {
    for (let col = 0; col < hm.nx; col++) {
      const v = hm.delta_p[row][col];
      if (v === null) continue;
      const c = cellCenter(hm, row, col);
      // the cell's top edge in SVG is its largest board y
      const p = toSvg({ x: c.x - hm.cell_size / 2, y: c.y + hm.cell_size / 2 });
      rects.push(
        `<rect x="${p.x.toFixed(3)}" y="${p.y.toFixed(3)}" ` +
          `width="${hm.cell_size}" height="${hm.cell_size}" ` +
          `fill="${color(v, lo, hi)}" fill-opacity="${opacity}"/>`,
      );
    }
  }
  return rects;
}
