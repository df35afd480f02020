"""HTTP advisor: serves solved policies, Q-value heat maps, live match
sessions and what-if queries over JSON.

Solutions are loaded once as named bundles (hit table + single-player and
game solutions sharing a file stem); sessions are in-memory and reference
bundles by name.  The dart-scoring rules used to advance a session are the
same ones the solvers were built on, so a recommendation always matches the
offline policy tables.
"""

from __future__ import annotations

import itertools
import math
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware

from . import default_geometry
from .board import (MISS_INDEX, BoardGeometry, IS_DOUBLE, classify,
                    outcome_name, parse_outcome, score)
from .evaluation import head_to_head
from .ns_solver import NsSolution, SolveConfig
from .skill import HitTable
from .store import load_hit_table, load_ns_solution, load_zsg_solution
from .turnstates import iu_index
from .zsg_solver import ZsgSolution, ZsgState, q_values


@dataclass
class SolutionBundle:
    name: str
    hit: HitTable
    ns: NsSolution
    zsg: ZsgSolution
    geometry: BoardGeometry


@dataclass
class MatchSession:
    id: str
    bundleA: str
    bundleB: str
    n_legs: int
    start_score: int
    sA: int = 0
    sB: int = 0
    thrower: str = "A"
    i: int = 3
    u: int = 0
    legsA: int = 0
    legsB: int = 0
    leg_no: int = 1
    complete: bool = False
    history: list = field(default_factory=list)

    def reset_leg(self) -> None:
        self.sA = self.sB = self.start_score
        self.i, self.u = 3, 0
        # starters alternate, A opens the match
        self.thrower = "A" if self.leg_no % 2 == 1 else "B"

    def state_dict(self) -> dict:
        return {"sA": self.sA, "sB": self.sB, "thrower": self.thrower,
                "i": self.i, "u": self.u, "legsA": self.legsA,
                "legsB": self.legsB, "leg": self.leg_no, "n_legs": self.n_legs,
                "complete": self.complete}


def load_bundles(directory) -> dict[str, SolutionBundle]:
    """Scan a directory for <name>.hits.bin / .nssol.bin / .zsgsol.bin triples."""
    directory = Path(directory)
    geom = default_geometry()
    bundles = {}
    for zpath in sorted(directory.glob("*.zsgsol.bin")):
        name = zpath.name[: -len(".zsgsol.bin")]
        hpath = directory / f"{name}.hits.bin"
        npath = directory / f"{name}.nssol.bin"
        if not (hpath.exists() and npath.exists()):
            continue
        bundles[name] = SolutionBundle(
            name=name, hit=load_hit_table(hpath, mmap=True),
            ns=load_ns_solution(npath, mmap=True),
            zsg=load_zsg_solution(zpath, mmap=True), geometry=geom)
    return bundles


def _session_throw_view(sess: MatchSession) -> tuple[str, int, int]:
    """(bundle key attr, thrower score, opponent score) for the live thrower."""
    if sess.thrower == "A":
        return "A", sess.sA, sess.sB
    return "B", sess.sB, sess.sA


def _apply_dart(sess: MatchSession, z: int) -> list[dict]:
    """Advance a session by one dart; returns completion events."""
    events = []
    own = sess.sA if sess.thrower == "A" else sess.sB
    h = score(z)
    remain = own - sess.u - h
    if remain == 0 and IS_DOUBLE[z]:
        if sess.thrower == "A":
            sess.legsA += 1
        else:
            sess.legsB += 1
        events.append({"event": "leg_won", "by": sess.thrower})
        need = sess.n_legs // 2 + 1
        if sess.legsA >= need or sess.legsB >= need:
            sess.complete = True
            events.append({"event": "match_won",
                           "by": "A" if sess.legsA >= need else "B"})
        else:
            sess.leg_no += 1
            sess.reset_leg()
        return events
    if remain <= 1:  # bust: score reverts, turn passes
        sess.i, sess.u = 3, 0
        sess.thrower = "B" if sess.thrower == "A" else "A"
        return events
    if sess.i > 1:
        sess.i -= 1
        sess.u += h
        return events
    # last dart of the turn: bank the points, turn passes
    if sess.thrower == "A":
        sess.sA = remain
    else:
        sess.sB = remain
    sess.i, sess.u = 3, 0
    sess.thrower = "B" if sess.thrower == "A" else "A"
    return events


def create_app(bundles: dict[str, SolutionBundle]) -> FastAPI:
    app = FastAPI(title="darts matchplay advisor")
    app.add_middleware(CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
                       allow_headers=["*"])
    sessions: dict[str, MatchSession] = {}
    baselines: dict[tuple[str, str], np.ndarray] = {}
    app.state.bundles = bundles
    app.state.sessions = sessions

    def get_session(sid: str) -> MatchSession:
        if sid not in sessions:
            raise HTTPException(404, f"unknown session {sid}")
        return sessions[sid]

    def bundle(name: str) -> SolutionBundle:
        if name not in bundles:
            raise HTTPException(404, f"unknown solution {name}")
        return bundles[name]

    def recommendation_payload(sess: MatchSession, who: str, s_own: int,
                               s_opp: int, i: int, u: int) -> dict:
        b = bundle(sess.bundleA if who == "A" else sess.bundleB)
        if not (2 <= s_own <= b.zsg.start_score and 2 <= s_opp <= b.zsg.start_score
                and u <= s_own - 2):
            raise HTTPException(422, "state outside the solved table")
        k = iu_index(i, u)
        t_eq = int(b.zsg.policyA[s_own, s_opp, k])
        t_ns = int(b.ns.policy[s_own, k])
        geom = b.geometry
        return {
            "thrower": who,
            "state": {"s": s_own, "opp": s_opp, "i": i, "u": u},
            "equilibrium": {
                "x": float(b.hit.grid.xy[t_eq, 0]), "y": float(b.hit.grid.xy[t_eq, 1]),
                "label": outcome_name(int(classify(geom, *b.hit.grid.xy[t_eq]))),
            },
            "ns": {
                "x": float(b.hit.grid.xy[t_ns, 0]), "y": float(b.hit.grid.xy[t_ns, 1]),
                "label": outcome_name(int(classify(geom, *b.hit.grid.xy[t_ns]))),
            },
            "win_probability": float(b.zsg.valuesA[s_own, s_opp, k]),
        }

    @app.get("/geometry")
    def geometry():
        g = default_geometry()
        return {"radii_mm": {"db": g.r_db, "sb": g.r_sb,
                             "treble_in": g.r_treble_in, "treble_out": g.r_treble_out,
                             "double_in": g.r_double_in, "double_out": g.r_double_out},
                "segment_order": list(g.segment_order)}

    @app.get("/solutions")
    def solutions():
        return [{"name": b.name, "start_score": b.zsg.start_score,
                 "cell_size": b.hit.grid.cell_size, "targets": len(b.hit.grid)}
                for b in bundles.values()]

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        for key in ("solutionA", "solutionB", "n_legs"):
            if key not in body:
                raise HTTPException(422, f"missing field {key}")
        n = body["n_legs"]
        if not isinstance(n, int) or n < 1 or n % 2 == 0:
            raise HTTPException(422, "n_legs must be odd and >= 1")
        bA, bB = bundle(body["solutionA"]), bundle(body["solutionB"])
        if bA.zsg.start_score != bB.zsg.start_score:
            raise HTTPException(422, "solutions solve different start scores")
        sess = MatchSession(id=uuid.uuid4().hex, bundleA=bA.name, bundleB=bB.name,
                            n_legs=n, start_score=bA.zsg.start_score)
        sess.reset_leg()
        sessions[sess.id] = sess
        return {"id": sess.id, "state": sess.state_dict()}

    @app.get("/sessions/{sid}")
    def get_state(sid: str):
        return get_session(sid).state_dict()

    @app.get("/sessions/{sid}/recommendation")
    def recommendation(sid: str):
        sess = get_session(sid)
        if sess.complete:
            raise HTTPException(409, "match is complete")
        who, s_own, s_opp = _session_throw_view(sess)
        return recommendation_payload(sess, who, s_own, s_opp, sess.i, sess.u)

    @app.get("/sessions/{sid}/heatmap")
    def get_heatmap(sid: str, downsample: int = 0, full: bool = False):
        sess = get_session(sid)
        if sess.complete:
            raise HTTPException(409, "match is complete")
        who, s_own, s_opp = _session_throw_view(sess)
        b = bundle(sess.bundleA if who == "A" else sess.bundleB)
        opp = bundle(sess.bundleB if who == "A" else sess.bundleA)
        if not (2 <= s_own <= b.zsg.start_score and sess.u <= s_own - 2):
            raise HTTPException(422, "state outside the solved table")
        key = (b.name, opp.name)
        if key not in baselines:  # single-player policy vs this opponent's play
            h2h = head_to_head(np.asarray(b.ns.policy), np.asarray(opp.zsg.policyA),
                               b.hit, opp.hit,
                               SolveConfig(start_score=b.zsg.start_score))
            baselines[key] = h2h.valuesA
        base = float(baselines[key][s_own, s_opp, iu_index(sess.i, sess.u)])
        st = ZsgState(s_own, s_opp, sess.i, sess.u)
        delta = q_values(b.zsg, b.hit, st) - base
        grid = b.hit.grid
        R = b.geometry.r_double_out
        n = int(math.ceil(R / grid.cell_size))
        size = 2 * n
        dense = np.full((size, size), np.nan)
        cols = np.floor(grid.xy[:, 0] / grid.cell_size).astype(int) + n
        rows = np.floor(grid.xy[:, 1] / grid.cell_size).astype(int) + n
        dense[rows, cols] = delta
        stride = 1
        if not full:
            stride = max(1, downsample, int(math.ceil(size / 64)))
        dense = dense[::stride, ::stride]
        vals = [[None if np.isnan(v) else float(v) for v in row] for row in dense]
        return {"cell_size": grid.cell_size * stride,
                "origin": [-n * grid.cell_size, -n * grid.cell_size],
                "nx": dense.shape[1], "ny": dense.shape[0], "delta_p": vals,
                "baseline": base}

    @app.post("/sessions/{sid}/dart")
    def post_dart(sid: str, body: dict):
        sess = get_session(sid)
        if sess.complete:
            raise HTTPException(409, "match is complete; no more darts")
        if "outcome" in body:
            try:
                z = parse_outcome(body["outcome"])
            except (ValueError, KeyError, IndexError):
                raise HTTPException(422, f"bad outcome {body.get('outcome')!r}")
        elif "x" in body and "y" in body:
            z = int(classify(default_geometry(), float(body["x"]), float(body["y"])))
        else:
            raise HTTPException(422, "provide either outcome or x,y")
        sess.history.append({"thrower": sess.thrower, "outcome": outcome_name(z)})
        events = _apply_dart(sess, z)
        return {"state": sess.state_dict(), "events": events}

    @app.post("/sessions/{sid}/whatif")
    def whatif(sid: str, body: dict):
        sess = get_session(sid)
        who = body.get("thrower", "A")
        if who not in ("A", "B"):
            raise HTTPException(422, "thrower must be 'A' or 'B'")
        try:
            s_own, s_opp = int(body["s"]), int(body["opp"])
            i, u = int(body.get("i", 3)), int(body.get("u", 0))
            iu_index(i, u)
        except (KeyError, ValueError, TypeError):
            raise HTTPException(422, "bad hypothetical state")
        return recommendation_payload(sess, who, s_own, s_opp, i, u)

    return app


def serve(bundles_dir, host: str = "127.0.0.1", port: int = 8000) -> None:
    import uvicorn

    app = create_app(load_bundles(bundles_dir))
    uvicorn.run(app, host=host, port=port)
