"""Versioned on-disk artifacts: hit tables, solver solutions, CSV exports,
and a content-addressed cache.

Binary layout: 8-byte magic, little-endian uint64 header length, a JSON
header (format version, artifact kind, array descriptors with byte offsets,
arbitrary metadata, content hash of the inputs), then the raw arrays —
little-endian, C-order, at the offsets the header declares.  Arrays can be
memory-mapped on load, so full-scale tables never need to fit in RAM twice.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import warnings
from pathlib import Path

import numpy as np

from .board import ActionGrid, BoardGeometry, classify, outcome_name
from .ns_solver import NsSolution
from .skill import HitTable, SkillModel
from .zsg_solver import ZsgSolution

MAGIC = b"DARTSBIN"
STORE_FORMAT_VERSION = 1


def content_hash(*parts) -> str:
    """sha256 over a canonical encoding of strings, numbers and arrays."""
    h = hashlib.sha256()
    for p in parts:
        if isinstance(p, np.ndarray):
            h.update(np.ascontiguousarray(p).tobytes())
        else:
            h.update(json.dumps(p, sort_keys=True).encode())
        h.update(b"\x00")
    return h.hexdigest()


def _write(path, kind: str, arrays: dict[str, np.ndarray], meta: dict) -> None:
    descs = []
    offset = 0
    blobs = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        if arr.dtype.byteorder == ">":
            arr = arr.astype(arr.dtype.newbyteorder("<"))
        blobs.append(arr)
        descs.append({"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape),
                      "offset": offset, "nbytes": arr.nbytes})
        offset += arr.nbytes
    header = {"format_version": STORE_FORMAT_VERSION, "kind": kind,
              "arrays": descs, "meta": meta}
    hbytes = json.dumps(header).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(np.uint64(len(hbytes)).tobytes())
        f.write(hbytes)
        for arr in blobs:
            f.write(arr.tobytes())


def _read(path, kind: str, mmap: bool = False):
    """Returns (arrays dict, meta dict); verifies magic, version and sizes."""
    path = Path(path)
    with open(path, "rb") as f:
        if f.read(8) != MAGIC:
            raise ValueError(f"{path}: not a recognized artifact file")
        hlen = int(np.frombuffer(f.read(8), dtype="<u8")[0])
        header = json.loads(f.read(hlen))
        data_start = f.tell()
    if header.get("format_version") != STORE_FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format_version "
                         f"{header.get('format_version')}")
    if header.get("kind") != kind:
        raise ValueError(f"{path}: artifact kind {header.get('kind')!r}, "
                         f"expected {kind!r}")
    expect = data_start + sum(d["nbytes"] for d in header["arrays"])
    if path.stat().st_size < expect:
        raise ValueError(f"{path}: truncated ({path.stat().st_size} bytes, "
                         f"need {expect})")
    arrays = {}
    for d in header["arrays"]:
        dtype, shape = np.dtype(d["dtype"]), tuple(d["shape"])
        if mmap:
            arr = np.memmap(path, dtype=dtype, mode="r", shape=shape,
                            offset=data_start + d["offset"])
        else:
            with open(path, "rb") as f:
                f.seek(data_start + d["offset"])
                arr = np.frombuffer(f.read(d["nbytes"]), dtype=dtype).reshape(shape)
        arrays[d["name"]] = arr
    return arrays, header["meta"]


# ---------------------------------------------------------------------------
# per-kind save/load

def save_hit_table(path, hit: HitTable, meta: dict | None = None) -> None:
    _write(path, "hits", {"xy": hit.grid.xy, "probs": hit.probs},
           {"cell_size": hit.grid.cell_size, **(meta or {})})


def load_hit_table(path, mmap: bool = False) -> HitTable:
    arrays, meta = _read(path, "hits", mmap)
    grid = ActionGrid(cell_size=float(meta["cell_size"]), xy=arrays["xy"])
    return HitTable(grid=grid, probs=arrays["probs"])


def save_ns_solution(path, sol: NsSolution, meta: dict | None = None) -> None:
    _write(path, "ns_solution", {"values": sol.values, "policy": sol.policy},
           {"start_score": sol.start_score, **(meta or {})})


def load_ns_solution(path, mmap: bool = False) -> NsSolution:
    arrays, meta = _read(path, "ns_solution", mmap)
    return NsSolution(start_score=int(meta["start_score"]),
                      values=arrays["values"], policy=arrays["policy"])


def save_zsg_solution(path, sol: ZsgSolution, meta: dict | None = None) -> None:
    _write(path, "zsg_solution",
           {"valuesA": sol.valuesA, "valuesB": sol.valuesB,
            "policyA": sol.policyA, "policyB": sol.policyB,
            "bounds_lower": sol.bounds_lower, "bounds_upper": sol.bounds_upper,
            "alternations": sol.alternations},
           {"start_score": sol.start_score, **(meta or {})})


def load_zsg_solution(path, mmap: bool = False) -> ZsgSolution:
    a, meta = _read(path, "zsg_solution", mmap)
    return ZsgSolution(start_score=int(meta["start_score"]), valuesA=a["valuesA"],
                       valuesB=a["valuesB"], policyA=a["policyA"],
                       policyB=a["policyB"], bounds_lower=a["bounds_lower"],
                       bounds_upper=a["bounds_upper"],
                       alternations=a["alternations"])


def artifact_meta(path) -> dict:
    """Metadata of any artifact without loading its arrays."""
    with open(path, "rb") as f:
        if f.read(8) != MAGIC:
            raise ValueError(f"{path}: not a recognized artifact file")
        hlen = int(np.frombuffer(f.read(8), dtype="<u8")[0])
        header = json.loads(f.read(hlen))
    return {"kind": header["kind"], **header["meta"]}


def save_skill_model(path, model: SkillModel) -> None:
    Path(path).write_text(model.to_json())


def load_skill_model(path) -> SkillModel:
    return SkillModel.from_json(Path(path).read_text())


# ---------------------------------------------------------------------------
# CSV exports

def export_zsg_surface(path, sol: ZsgSolution, hit: HitTable,
                       geom: BoardGeometry) -> None:
    """Start-of-turn equilibrium surface: one row per (sA, sB) with the
    thrower's win probability and aim point."""
    S = sol.start_score
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["sA", "sB", "J", "aimA_x", "aimA_y", "labelA"])
        for sA in range(2, S + 1):
            for sB in range(2, S + 1):
                t = sol.target_a(sA, sB)
                x, y = hit.grid.xy[t]
                label = outcome_name(int(classify(geom, x, y)))
                w.writerow([sA, sB, repr(sol.value(sA, sB)),
                            repr(float(x)), repr(float(y)), label])


def export_matrix(path, row_labels, col_labels, values, corner="") -> None:
    """Generic labeled matrix CSV (win-probability and gain tables)."""
    values = np.asarray(values)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([corner, *col_labels])
        for lab, row in zip(row_labels, values):
            w.writerow([lab, *[repr(float(v)) for v in row]])


# ---------------------------------------------------------------------------
# content-addressed cache

def cache_dir() -> Path:
    d = Path(os.environ.get("DARTS_CACHE_DIR", Path.home() / ".cache" / "dartsolve"))
    d.mkdir(parents=True, exist_ok=True)
    return d


def get_or_compute(kind: str, key_hash: str, compute, save, load):
    """Load the cached artifact for (kind, key_hash) or compute and cache it.

    The key hash is embedded in the file's metadata; a mismatch (e.g. a file
    renamed by hand) triggers a warning and a recompute."""
    path = cache_dir() / f"{key_hash[:16]}.{kind}.bin"
    if path.exists():
        try:
            if artifact_meta(path).get("key_hash") == key_hash:
                return load(path)
            warnings.warn(f"cache entry {path} has a mismatched key hash; recomputing")
        except ValueError as exc:
            warnings.warn(f"unreadable cache entry {path} ({exc}); recomputing")
    obj = compute()
    save(path, obj, {"key_hash": key_hash})
    return obj
