/** Payload shapes of the advisor service's JSON API. */

export interface Geometry {
  radii_mm: {
    db: number;
    sb: number;
    treble_in: number;
    treble_out: number;
    double_in: number;
    double_out: number;
  };
  segment_order: number[];
}

export interface SolutionInfo {
  name: string;
  start_score: number;
  cell_size: number;
  targets: number;
}

export interface SessionState {
  sA: number;
  sB: number;
  thrower: "A" | "B";
  i: number;
  u: number;
  legsA: number;
  legsB: number;
  leg: number;
  n_legs: number;
  complete: boolean;
}

export interface AimPoint {
  x: number;
  y: number;
  label: string;
}

export interface Recommendation {
  thrower: "A" | "B";
  state: { s: number; opp: number; i: number; u: number };
  equilibrium: AimPoint;
  ns: AimPoint;
  win_probability: number;
}

export interface Heatmap {
  cell_size: number;
  origin: [number, number];
  nx: number;
  ny: number;
  delta_p: (number | null)[][];
  baseline: number;
}

export interface DartEvent {
  event: "leg_won" | "match_won";
  by: "A" | "B";
}

export interface DartResult {
  state: SessionState;
  events: DartEvent[];
}

export interface WhatIfQuery {
  thrower: "A" | "B";
  s: number;
  opp: number;
  i?: number;
  u?: number;
}
