"""Command-line front end: fit skill models, build hit tables, run the
solvers, evaluate matchups, export tables, and launch the advisor service.

All randomness is seeded (default seed printed); identical flags and seeds
produce byte-identical outputs.  Set DARTS_CACHE_DIR to reuse expensive
artifacts across runs.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click
import numpy as np

from . import default_geometry
from .board import make_grid
from .evaluation import head_to_head, match_win_prob, MatchSpec
from .ns_solver import SolveConfig, solve_ns
from .skill import EmConfig, fit_skill_model, load_aim_csv, make_hit_table
from .store import (content_hash, export_matrix, export_zsg_surface,
                    load_hit_table, save_hit_table, save_ns_solution,
                    save_skill_model, save_zsg_solution, load_skill_model)
from .turnstates import ANCHOR, iu_index
from .zsg_solver import (ZsgState, best_response, heatmap as zsg_heatmap,
                         solve_equilibrium, turn_kernel)


def _fail(msg: str) -> None:
    click.echo(f"error: {msg}", err=True)
    sys.exit(1)


def _set_threads(threads: int | None) -> None:
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)


@click.group()
@click.option("--threads", type=int, default=None, help="cap BLAS worker threads")
def main(threads):
    """Darts strategy engine."""
    _set_threads(threads)


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True),
              help="aim dataset CSV (target_region,outcome,count)")
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--m-samples", default=5000, show_default=True)
@click.option("--seed", default=0, show_default=True)
def fit(data_path, out_path, m_samples, seed):
    """Fit a throwing-skill model from censored outcome counts."""
    click.echo(f"seed={seed}")
    try:
        rows = load_aim_csv(Path(data_path).read_text())
        model = fit_skill_model(rows, default_geometry(),
                                EmConfig(m_samples=m_samples, rng_seed=seed))
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    save_skill_model(out_path, model)
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--skill", "skill_path", required=True, type=click.Path(exists=True))
@click.option("--cell", default=1.0, show_default=True, help="grid cell size, mm")
@click.option("--out", "out_path", required=True, type=click.Path())
def hits(skill_path, cell, out_path):
    """Tabulate outcome probabilities for every target on an action grid."""
    geom = default_geometry()
    try:
        model = load_skill_model(Path(skill_path))
        table = make_hit_table(model, make_grid(geom, cell), geom)
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    save_hit_table(out_path, table,
                   {"key_hash": content_hash(model.to_json(), geom.to_json(), cell)})
    click.echo(f"wrote {out_path} ({len(table.grid)} targets)")


def _load_tables(hits_path, opp_hits_path):
    hitA = load_hit_table(hits_path)
    hitB = load_hit_table(opp_hits_path) if opp_hits_path else hitA
    return hitA, hitB


@main.command()
@click.argument("kind", type=click.Choice(["ns", "zsg"]))
@click.option("--hits", "hits_path", required=True, type=click.Path(exists=True))
@click.option("--opp-hits", "opp_hits_path", type=click.Path(exists=True))
@click.option("--start", default=501, show_default=True)
@click.option("--tol", default=1e-9, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--surface-csv", type=click.Path(), default=None,
              help="also export the start-of-turn surface (zsg only)")
def solve(kind, hits_path, opp_hits_path, start, tol, out_path, surface_csv):
    """Solve the single-player (ns) or two-player (zsg) problem."""
    cfg = SolveConfig(start_score=start, rel_tol=tol)
    try:
        hitA, hitB = _load_tables(hits_path, opp_hits_path)
        if kind == "ns":
            sol = solve_ns(hitA, cfg)
            save_ns_solution(out_path, sol)
            click.echo(f"V({start}) = {sol.value(start)} expected turns")
        else:
            sol = solve_equilibrium(hitA, hitB, cfg)
            save_zsg_solution(out_path, sol)
            if surface_csv:
                export_zsg_surface(surface_csv, sol, hitA, default_geometry())
            click.echo(f"J({start},{start}) = {sol.value(start, start)}")
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    click.echo(f"wrote {out_path}")


@main.group("eval")
def eval_group():
    """Head-to-head and match-level evaluation."""


def _strategy_policies(hitA, hitB, cfg):
    """Policy tables for the N (single-player), E (equilibrium) and B
    (best response to the opponent's N) strategies, for both players."""
    nsA = solve_ns(hitA, cfg)
    nsB = solve_ns(hitB, cfg)
    eq = solve_equilibrium(hitA, hitB, cfg)
    S = cfg.start_score
    kernB = turn_kernel(np.asarray(nsB.policy), hitB, S, S)
    kernA = turn_kernel(np.asarray(nsA.policy), hitA, S, S)
    brA = best_response(hitA, kernB, cfg)
    brB = best_response(hitB, kernA, cfg)
    polsA = {"N": np.asarray(nsA.policy), "E": eq.policyA, "B": brA.policy}
    polsB = {"N": np.asarray(nsB.policy), "E": eq.policyB, "B": brB.policy}
    return polsA, polsB, eq


def _combo_values(hitA, hitB, cfg, combos):
    polsA, polsB, _ = _strategy_policies(hitA, hitB, cfg)
    S = cfg.start_score
    out = {}
    for combo in combos:
        a, b = combo[0], combo[1]
        # the B-player policy table must be opponent-score-major: E and B
        # tables from the A-oriented solves already are when swapped
        polB = polsB[b]
        h = head_to_head(polsA[a], polB, hitA, hitB, cfg)
        out[combo] = (h.valuesA[S, S, ANCHOR], 1.0 - h.valuesB[S, S, ANCHOR])
    return out


@eval_group.command("legs")
@click.option("--hits", "hits_path", required=True, type=click.Path(exists=True))
@click.option("--opp-hits", "opp_hits_path", type=click.Path(exists=True))
@click.option("--start", default=501, show_default=True)
@click.option("--combos", default="EE,NN,NE,EN,NB,BN", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def eval_legs(hits_path, opp_hits_path, start, combos, out_path):
    """Leg win probabilities for strategy combinations (A's strategy first)."""
    cfg = SolveConfig(start_score=start)
    try:
        hitA, hitB = _load_tables(hits_path, opp_hits_path)
        combos = [c.strip().upper() for c in combos.split(",")]
        for c in combos:
            if len(c) != 2 or any(x not in "NEB" for x in c):
                raise ValueError(f"bad combo {c!r}; use pairs over N, E, B")
        vals = _combo_values(hitA, hitB, cfg, combos)
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    export_matrix(out_path, combos, ["p_a_starts", "p_b_starts"],
                  [list(vals[c]) for c in combos], corner="combo")
    for c in combos:
        click.echo(f"{c}: P(A wins | A starts) = {vals[c][0]:.6f}, "
                   f"P(A wins | B starts) = {vals[c][1]:.6f}")
    click.echo(f"wrote {out_path}")


@eval_group.command("gain")
@click.option("--hits", "hits_path", required=True, type=click.Path(exists=True))
@click.option("--opp-hits", "opp_hits_path", type=click.Path(exists=True))
@click.option("--start", default=501, show_default=True)
@click.option("--legs", default="1,21,31,35", show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def eval_gain(hits_path, opp_hits_path, start, legs, out_path):
    """Match-level gain of equilibrium play over single-player play."""
    cfg = SolveConfig(start_score=start)
    try:
        ns = [int(x) for x in legs.split(",")]
        hitA, hitB = _load_tables(hits_path, opp_hits_path)
        vals = _combo_values(hitA, hitB, cfg, ["EE", "NE"])
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    pA_star, pB_star = vals["EE"]
    pA_ns, pB_ns = vals["NE"]
    gains = [match_win_prob(MatchSpec(n, pA_star, pB_star))
             - match_win_prob(MatchSpec(n, pA_ns, pB_ns)) for n in ns]
    export_matrix(out_path, ["gain"], [str(n) for n in ns], [gains], corner="N")
    for n, g in zip(ns, gains):
        click.echo(f"N={n}: gain = {g:.6f}")
    click.echo(f"wrote {out_path}")


@main.command("heatmap")
@click.option("--hits", "hits_path", required=True, type=click.Path(exists=True))
@click.option("--opp-hits", "opp_hits_path", type=click.Path(exists=True))
@click.option("--start", default=501, show_default=True)
@click.option("--state", required=True, help="sA,sB,i,u")
@click.option("--out", "out_path", required=True, type=click.Path())
def heatmap_cmd(hits_path, opp_hits_path, start, state, out_path):
    """Per-target win-probability change versus single-player play."""
    cfg = SolveConfig(start_score=start)
    try:
        sA, sB, i, u = (int(x) for x in state.split(","))
        st = ZsgState(sA, sB, i, u)
        hitA, hitB = _load_tables(hits_path, opp_hits_path)
        eq = solve_equilibrium(hitA, hitB, cfg)
        nsA = solve_ns(hitA, cfg)
        h2h = head_to_head(np.asarray(nsA.policy), eq.policyB, hitA, hitB, cfg)
        base = float(h2h.valuesA[sA, sB, iu_index(i, u)])
        delta = zsg_heatmap(eq, hitA, st, base)
    except (ValueError, RuntimeError) as exc:
        _fail(str(exc))
    import csv as _csv
    with open(out_path, "w", newline="") as f:
        w = _csv.writer(f)
        w.writerow(["x", "y", "delta_p"])
        for (x, y), d in zip(hitA.grid.xy, delta):
            w.writerow([repr(float(x)), repr(float(y)), repr(float(d))])
    click.echo(f"max delta_p = {delta.max():.6g}")
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--solutions", "solutions_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(solutions_dir, host, port):
    """Launch the matchplay advisor HTTP service."""
    from .service import serve as run

    run(solutions_dir, host=host, port=port)


if __name__ == "__main__":
    main()
