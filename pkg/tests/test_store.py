import json

import numpy as np
import pytest

from dartsolve import ns_solver, skill, store, zsg_solver
from conftest import toy_hit_table


def test_hit_table_round_trip(tmp_path, coarse_hit_table):
    p = tmp_path / "t.hits.bin"
    store.save_hit_table(p, coarse_hit_table, {"note": "x"})
    back = store.load_hit_table(p)
    assert np.array_equal(back.probs, coarse_hit_table.probs)
    assert np.array_equal(back.grid.xy, coarse_hit_table.grid.xy)
    assert back.grid.cell_size == coarse_hit_table.grid.cell_size


def test_mmap_load_matches(tmp_path, coarse_hit_table):
    p = tmp_path / "t.hits.bin"
    store.save_hit_table(p, coarse_hit_table)
    eager = store.load_hit_table(p)
    lazy = store.load_hit_table(p, mmap=True)
    assert isinstance(lazy.probs, np.memmap)
    assert np.array_equal(np.asarray(lazy.probs), eager.probs)


def test_ns_solution_round_trip(tmp_path):
    ht = toy_hit_table(0.4)
    sol = ns_solver.solve_ns(ht, ns_solver.SolveConfig(start_score=2))
    p = tmp_path / "s.nssol.bin"
    store.save_ns_solution(p, sol)
    back = store.load_ns_solution(p)
    assert back.start_score == sol.start_score
    assert np.array_equal(np.asarray(back.values), np.asarray(sol.values))
    assert np.array_equal(np.asarray(back.policy), np.asarray(sol.policy))


def test_zsg_solution_round_trip(tmp_path):
    ht = toy_hit_table(0.4)
    sol = zsg_solver.solve_equilibrium(ht, ht, ns_solver.SolveConfig(start_score=2))
    p = tmp_path / "s.zsgsol.bin"
    store.save_zsg_solution(p, sol, {"label": "toy"})
    back = store.load_zsg_solution(p)
    for name in ("valuesA", "valuesB", "policyA", "policyB",
                 "bounds_lower", "bounds_upper", "alternations"):
        assert np.array_equal(getattr(back, name), getattr(sol, name)), name
    assert store.artifact_meta(p)["label"] == "toy"


def test_skill_model_round_trip(tmp_path):
    model = skill.isotropic_skill(7.5)
    p = tmp_path / "m.skill.json"
    store.save_skill_model(p, model)
    back = store.load_skill_model(p)
    assert len(back.parts) == len(model.parts)
    for (ra, sa), (rb, sb) in zip(back.parts, model.parts):
        assert ra == rb and np.allclose(sa, sb)


class TestCorruptFiles:
    def test_wrong_magic(self, tmp_path):
        p = tmp_path / "bad.bin"
        p.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
        with pytest.raises(ValueError, match="not a recognized"):
            store.load_hit_table(p)

    def test_wrong_kind(self, tmp_path, coarse_hit_table):
        p = tmp_path / "t.hits.bin"
        store.save_hit_table(p, coarse_hit_table)
        with pytest.raises(ValueError, match="kind"):
            store.load_ns_solution(p)

    def test_wrong_version(self, tmp_path, coarse_hit_table):
        p = tmp_path / "t.hits.bin"
        store.save_hit_table(p, coarse_hit_table)
        raw = p.read_bytes()
        hlen = int(np.frombuffer(raw[8:16], dtype="<u8")[0])
        header = json.loads(raw[16:16 + hlen])
        header["format_version"] = 99
        hb = json.dumps(header).encode()
        p.write_bytes(b"DARTSBIN" + np.uint64(len(hb)).tobytes() + hb
                      + raw[16 + hlen:])
        with pytest.raises(ValueError, match="format_version"):
            store.load_hit_table(p)

    def test_truncated(self, tmp_path, coarse_hit_table):
        p = tmp_path / "t.hits.bin"
        store.save_hit_table(p, coarse_hit_table)
        p.write_bytes(p.read_bytes()[:-100])
        with pytest.raises(ValueError, match="truncated"):
            store.load_hit_table(p)


def test_content_hash_sensitivity():
    a = np.arange(6, dtype=np.float64)
    h0 = store.content_hash("k", 1.5, a)
    assert h0 == store.content_hash("k", 1.5, a.copy())
    assert h0 != store.content_hash("k", 1.5, a + 1)
    assert h0 != store.content_hash("k2", 1.5, a)


def test_cache_computes_once(tmp_path, monkeypatch):
    monkeypatch.setenv("DARTS_CACHE_DIR", str(tmp_path))
    ht = toy_hit_table(0.3)
    key = store.content_hash("hits", 0.3)
    calls = []

    def compute():
        calls.append(1)
        return ht

    for _ in range(2):
        got = store.get_or_compute("hits", key, compute,
                                   store.save_hit_table, store.load_hit_table)
        assert np.array_equal(got.probs, ht.probs)
    assert len(calls) == 1


def test_cache_key_mismatch_recomputes(tmp_path, monkeypatch):
    monkeypatch.setenv("DARTS_CACHE_DIR", str(tmp_path))
    ht = toy_hit_table(0.3)
    key = store.content_hash("hits", 0.3)
    store.get_or_compute("hits", key, lambda: ht,
                         store.save_hit_table, store.load_hit_table)
    # masquerade a different artifact under the same cache file name
    path = next(tmp_path.glob("*.hits.bin"))
    store.save_hit_table(path, ht, {"key_hash": "bogus"})
    calls = []

    def compute():
        calls.append(1)
        return ht

    with pytest.warns(UserWarning, match="mismatched key hash"):
        store.get_or_compute("hits", key, compute,
                             store.save_hit_table, store.load_hit_table)
    assert len(calls) == 1


def test_export_zsg_surface(tmp_path, geom):
    ht = toy_hit_table(0.4)
    sol = zsg_solver.solve_equilibrium(ht, ht, ns_solver.SolveConfig(start_score=2))
    p = tmp_path / "surface.csv"
    store.export_zsg_surface(p, sol, ht, geom)
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "sA,sB,J,aimA_x,aimA_y,labelA"
    cells = lines[1].split(",")
    assert cells[:2] == ["2", "2"]
    assert float(cells[2]) == sol.value(2, 2)


def test_export_matrix(tmp_path):
    p = tmp_path / "m.csv"
    store.export_matrix(p, ["r1", "r2"], ["c1", "c2"],
                        [[0.25, 0.5], [0.75, 1.0]], corner="combo")
    lines = p.read_text().strip().splitlines()
    assert lines[0] == "combo,c1,c2"
    assert [float(v) for v in lines[2].split(",")[1:]] == [0.75, 1.0]
