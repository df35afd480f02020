import { ApiClient } from "./api.js";
import type {
  DartEvent,
  Heatmap,
  Recommendation,
  SessionState,
  WhatIfQuery,
} from "./types.js";

/**
 * Session flow for one match.  The controller never scores a dart itself:
 * every state shown to the user is the state the service returned, so the
 * solver tables and the scoreboard can never disagree.
 */
export class MatchController {
  private sessionId: string | null = null;
  private state: SessionState | null = null;
  readonly events: DartEvent[] = [];

  constructor(readonly api: ApiClient) {}

  get currentState(): SessionState {
    if (this.state === null) throw new Error("no active session");
    return this.state;
  }

  get id(): string {
    if (this.sessionId === null) throw new Error("no active session");
    return this.sessionId;
  }

  async start(solutionA: string, solutionB: string, nLegs: number): Promise<SessionState> {
    const res = await this.api.createSession(solutionA, solutionB, nLegs);
    this.sessionId = res.id;
    this.state = res.state;
    this.events.length = 0;
    return res.state;
  }

  async dart(outcome: string): Promise<SessionState> {
    const res = await this.api.postDart(this.id, outcome);
    this.state = res.state;
    this.events.push(...res.events);
    return res.state;
  }

  async dartAt(x: number, y: number): Promise<SessionState> {
    const res = await this.api.postDartAt(this.id, x, y);
    this.state = res.state;
    this.events.push(...res.events);
    return res.state;
  }

  async replay(outcomes: string[]): Promise<SessionState> {
    for (const o of outcomes) await this.dart(o);
    return this.currentState;
  }

  async advice(): Promise<{ recommendation: Recommendation; heatmap: Heatmap }> {
    const recommendation = await this.api.recommendation(this.id);
    const heatmap = await this.api.heatmap(this.id);
    return { recommendation, heatmap };
  }

  /** Read-only preview of a hypothetical state; session state is untouched. */
  async whatIf(query: WhatIfQuery): Promise<Recommendation> {
    return this.api.whatIf(this.id, query);
  }
}

export interface ScoreboardView {
  scoreA: number;
  scoreB: number;
  thrower: "A" | "B";
  dartsLeft: number;
  scoredThisTurn: number;
  legs: string;
  leg: string;
  banner: string;
}

/** Plain-data projection of a server state, ready for the DOM (or a test). */
export function renderScoreboard(s: SessionState): ScoreboardView {
  let banner = "";
  if (s.complete) {
    banner = s.legsA > s.legsB ? "player A wins the match" : "player B wins the match";
  }
  return {
    scoreA: s.sA,
    scoreB: s.sB,
    thrower: s.thrower,
    dartsLeft: s.i,
    scoredThisTurn: s.u,
    legs: `${s.legsA}–${s.legsB}`,
    leg: `leg ${s.leg} of ${s.n_legs}`,
    banner,
  };
}
