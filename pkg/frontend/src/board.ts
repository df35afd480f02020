import type { Geometry } from "./types.js";

/**
 * SVG rendering of the dartboard from the service's geometry payload.
 * Board coordinates are millimetres with y pointing up; SVG y points down,
 * so every emitted point flips the sign of y.
 */

export const VIEW_RADIUS = 200; // mm of padding around the 170 mm board

export interface Point {
  x: number;
  y: number;
}

/** Board mm -> SVG user units (the viewBox is centred on the bull). */
export function toSvg(p: Point): Point {
  return { x: p.x, y: -p.y };
}

function polar(r: number, angleDeg: number): Point {
  const a = (angleDeg * Math.PI) / 180;
  return { x: r * Math.cos(a), y: r * Math.sin(a) };
}

function fmt(v: number): string {
  return v.toFixed(3);
}

/** Annular-sector path between radii r0<r1 spanning [a0,a1] degrees. */
export function sectorPath(r0: number, r1: number, a0: number, a1: number): string {
  const p0 = toSvg(polar(r1, a0));
  const p1 = toSvg(polar(r1, a1));
  const p2 = toSvg(polar(r0, a1));
  const p3 = toSvg(polar(r0, a0));
  // sweep=1 in SVG screen coordinates is clockwise on screen, which is the
  // decreasing-angle direction in board coordinates
  return (
    `M ${fmt(p0.x)} ${fmt(p0.y)} ` +
    `A ${fmt(r1)} ${fmt(r1)} 0 0 1 ${fmt(p1.x)} ${fmt(p1.y)} ` +
    `L ${fmt(p2.x)} ${fmt(p2.y)} ` +
    `A ${fmt(r0)} ${fmt(r0)} 0 0 0 ${fmt(p3.x)} ${fmt(p3.y)} Z`
  );
}

export interface WedgeBand {
  value: number; // base wedge number
  ring: "single_inner" | "single_outer" | "treble" | "double";
  path: string;
}

/** Centre angle (degrees, y-up) of the k-th wedge in segment order. */
export function wedgeCenterAngle(k: number): number {
  return 90 - 18 * k;
}

export function wedgeBands(geom: Geometry): WedgeBand[] {
  const r = geom.radii_mm;
  const bands: WedgeBand[] = [];
  geom.segment_order.forEach((value, k) => {
    const c = wedgeCenterAngle(k);
    const a0 = c - 9;
    const a1 = c + 9;
    const rings: [WedgeBand["ring"], number, number][] = [
      ["single_inner", r.sb, r.treble_in],
      ["treble", r.treble_in, r.treble_out],
      ["single_outer", r.treble_out, r.double_in],
      ["double", r.double_in, r.double_out],
    ];
    for (const [ring, r0, r1] of rings) {
      bands.push({ value, ring, path: sectorPath(r0, r1, a1, a0) });
    }
  });
  return bands;
}

function bandFill(value: number, ring: WedgeBand["ring"], dark: boolean): string {
  if (ring === "treble" || ring === "double") {
    return dark ? "#c62828" : "#2e7d32";
  }
  void value;
  return dark ? "#1a1a1a" : "#f2e3c6";
}

/** Cross marker (the aim-point convention: one colour per strategy). */
export function crossMarker(p: Point, color: string, size = 8): string {
  const s = toSvg(p);
  const h = size / 2;
  return (
    `<g class="marker" stroke="${color}" stroke-width="2.5">` +
    `<line x1="${fmt(s.x - h)}" y1="${fmt(s.y)}" x2="${fmt(s.x + h)}" y2="${fmt(s.y)}"/>` +
    `<line x1="${fmt(s.x)}" y1="${fmt(s.y - h)}" x2="${fmt(s.x)}" y2="${fmt(s.y + h)}"/>` +
    `</g>`
  );
}

export function boardSvg(geom: Geometry, overlays: string[] = []): string {
  const r = geom.radii_mm;
  const parts: string[] = [];
  const V = VIEW_RADIUS;
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" ` +
      `viewBox="${-V} ${-V} ${2 * V} ${2 * V}">`,
  );
  parts.push(`<circle r="${fmt(V)}" fill="#111"/>`);
  wedgeBands(geom).forEach((b, idx) => {
    const dark = Math.floor(idx / 4) % 2 === 0;
    parts.push(
      `<path d="${b.path}" fill="${bandFill(b.value, b.ring, dark)}" ` +
        `data-value="${b.value}" data-ring="${b.ring}"/>`,
    );
  });
  parts.push(`<circle r="${fmt(r.sb)}" fill="#2e7d32"/>`);
  parts.push(`<circle r="${fmt(r.db)}" fill="#c62828"/>`);
  geom.segment_order.forEach((value, k) => {
    const p = toSvg(polar(r.double_out + 14, wedgeCenterAngle(k)));
    parts.push(
      `<text x="${fmt(p.x)}" y="${fmt(p.y)}" fill="#eee" font-size="14" ` +
        `text-anchor="middle" dominant-baseline="middle">${value}</text>`,
    );
  });
  parts.push(...overlays);
  parts.push("</svg>");
  return parts.join("\n");
}
