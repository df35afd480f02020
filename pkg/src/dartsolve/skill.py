"""Region-conditional Gaussian throwing-skill models.

A skill model partitions the aim regions into parts, each with its own 2x2
covariance (mm^2).  From a model we compute hit distributions p(z; a) by
midpoint-rule integration on a square grid, fit covariances to censored
(target-region, outcome, count) data by EM with importance sampling, and
simulate throws.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import board
from .board import (ActionGrid, BoardGeometry, DB_INDEX, MISS_INDEX, N_OUTCOMES,
                    SB_INDEX, classify, outcome_name, parse_outcome, region_center)

SKILL_FORMAT_VERSION = 1

# Default partition: one part per practiced treble, one for DB,
# one shared part for all doubles (also the fallback for unlisted targets).
DEFAULT_PARTITION = (
    frozenset({board.outcome_index("T", 20)}),
    frozenset({board.outcome_index("T", 19)}),
    frozenset({board.outcome_index("T", 18)}),
    frozenset({board.outcome_index("T", 17)}),
    frozenset({DB_INDEX}),
    frozenset(board.outcome_index("D", b) for b in range(1, 21)),
)
DEFAULT_FALLBACK_PART = 5


def check_spd(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (2, 2) or abs(sigma[0, 1] - sigma[1, 0]) > 1e-9:
        raise ValueError(f"covariance must be symmetric 2x2, got {sigma!r}")
    if np.linalg.eigvalsh(sigma).min() <= 0:
        raise ValueError(f"covariance must be positive definite, got {sigma!r}")
    return sigma


@dataclass(frozen=True)
class SkillModel:
    """Partition of target regions with one covariance per part."""

    parts: tuple[tuple[frozenset[int], np.ndarray], ...]
    fallback_part: int = DEFAULT_FALLBACK_PART

    def __post_init__(self):
        seen: set[int] = set()
        for regions, sigma in self.parts:
            if seen & regions:
                raise ValueError("skill model parts must cover disjoint region sets")
            seen |= regions
            check_spd(sigma)
        if not 0 <= self.fallback_part < len(self.parts):
            raise ValueError("fallback_part out of range")

    def part_of_region(self, outcome: int) -> int:
        for k, (regions, _) in enumerate(self.parts):
            if outcome in regions:
                return k
        return self.fallback_part

    def part_of_target(self, geom: BoardGeometry, x: float, y: float) -> int:
        """Part governing a throw aimed at (x, y): the part owning the region
        the target lies in, else the fallback part."""
        z = classify(geom, x, y)
        if z == MISS_INDEX:
            return self.fallback_part
        return self.part_of_region(z)

    def sigma_for_target(self, geom: BoardGeometry, x: float, y: float) -> np.ndarray:
        return self.parts[self.part_of_target(geom, x, y)][1]

    def to_json(self) -> str:
        doc = {
            "format_version": SKILL_FORMAT_VERSION,
            "parts": [
                {"regions": sorted(outcome_name(z) for z in regions),
                 "sigma": np.asarray(sigma).tolist()}
                for regions, sigma in self.parts
            ],
            "fallback_part": self.fallback_part,
        }
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SkillModel":
        doc = json.loads(text)
        if doc.get("format_version") != SKILL_FORMAT_VERSION:
            raise ValueError(f"unsupported skill format_version: {doc.get('format_version')}")
        parts = tuple(
            (frozenset(parse_outcome(name) for name in p["regions"]),
             np.asarray(p["sigma"], dtype=np.float64))
            for p in doc["parts"]
        )
        return cls(parts=parts, fallback_part=int(doc["fallback_part"]))


def isotropic_skill(sigma_mm: float) -> SkillModel:
    """Convenience model: one isotropic covariance for every part."""
    cov = np.eye(2) * sigma_mm**2
    return SkillModel(parts=tuple((regions, cov.copy()) for regions in DEFAULT_PARTITION))


@dataclass(frozen=True)
class AimRow:
    target_region: int  # outcome index of the aimed-at region
    outcome: int        # observed outcome index (MISS allowed)
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise ValueError("count must be nonnegative")
        if self.target_region == MISS_INDEX:
            raise ValueError("target_region cannot be MISS")


def load_aim_csv(text: str) -> list[AimRow]:
    reader = csv.DictReader(io.StringIO(text))
    expected = {"target_region", "outcome", "count"}
    if reader.fieldnames is None or set(reader.fieldnames) != expected:
        raise ValueError(f"aim dataset must have header {sorted(expected)}")
    return [AimRow(parse_outcome(r["target_region"]), parse_outcome(r["outcome"]), int(r["count"]))
            for r in reader]


def save_aim_csv(rows: list[AimRow]) -> str:
    out = io.StringIO()
    w = csv.writer(out)
    w.writerow(["target_region", "outcome", "count"])
    for r in rows:
        w.writerow([outcome_name(r.target_region), outcome_name(r.outcome), r.count])
    return out.getvalue()


# ---------------------------------------------------------------------------
# hit distributions

INTEGRATION_SUBDIV = 4  # integration runs on cell_size / SUBDIV; pure midpoint
# rule at 1 mm misplaces ~2% of the bull's mass, the refined grid is < 1e-3 off


class _IntegrationGrid:
    """Cells inside the board disc with precomputed labels, grouped by row."""

    def __init__(self, geom: BoardGeometry, cell_size: float, subdiv: int = INTEGRATION_SUBDIV):
        if cell_size <= 0:
            raise ValueError("cell_size must be positive")
        cell_size = float(cell_size) / subdiv
        self.geom = geom
        self.cell_size = cell_size
        self.area = cell_size * cell_size
        grid = board.make_grid(geom, cell_size)
        self.xy = grid.xy
        self.labels = classify(geom, self.xy[:, 0], self.xy[:, 1])
        # row-major by (y, x): find row boundaries for windowed lookups
        self.row_y, self.row_start = np.unique(self.xy[:, 1], return_index=True)
        self.row_end = np.append(self.row_start[1:], len(self.xy))


_IGRID_CACHE: dict[tuple, _IntegrationGrid] = {}


def integration_grid(geom: BoardGeometry, cell_size: float) -> _IntegrationGrid:
    key = (geom, float(cell_size))
    if key not in _IGRID_CACHE:
        _IGRID_CACHE[key] = _IntegrationGrid(geom, cell_size)
    return _IGRID_CACHE[key]


def _window_indices(ig: _IntegrationGrid, ax: float, ay: float, radius: float) -> np.ndarray:
    lo = np.searchsorted(ig.row_y, ay - radius)
    hi = np.searchsorted(ig.row_y, ay + radius, side="right")
    if hi - lo == len(ig.row_y):
        return np.arange(len(ig.xy))
    chunks = [np.arange(s, e) for s, e in zip(ig.row_start[lo:hi], ig.row_end[lo:hi])]
    if not chunks:
        return np.arange(0)
    idx = np.concatenate(chunks)
    x = ig.xy[idx, 0]
    return idx[(x >= ax - radius) & (x <= ax + radius)]


def gaussian_pdf2(dx: np.ndarray, dy: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    det = sigma[0, 0] * sigma[1, 1] - sigma[0, 1] * sigma[1, 0]
    inv = np.array([[sigma[1, 1], -sigma[0, 1]], [-sigma[1, 0], sigma[0, 0]]]) / det
    q = inv[0, 0] * dx * dx + 2 * inv[0, 1] * dx * dy + inv[1, 1] * dy * dy
    return np.exp(-0.5 * q) / (2 * np.pi * np.sqrt(det))


def _hit_row(ig: _IntegrationGrid, ax: float, ay: float, sigma: np.ndarray,
             out: np.ndarray) -> None:
    """Fill one categorical row p(z; a) in place (length 63, sums to 1)."""
    eigs = np.linalg.eigvalsh(sigma)
    out[:] = 0.0
    if np.sqrt(eigs.min()) < 2.0 * ig.cell_size:
        # dispersion below the grid resolution: integrate on a local fine grid
        step = np.sqrt(eigs.min()) / 4.0
        n = int(np.ceil(8.5 * np.sqrt(eigs.max()) / step))
        c = (np.arange(-n, n) + 0.5) * step
        dx, dy = np.meshgrid(c, c)
        dx, dy = dx.ravel(), dy.ravel()
        dens = gaussian_pdf2(dx, dy, sigma) * step * step
        labels = classify(ig.geom, ax + dx, ay + dy)
        np.add.at(out, labels, dens)
        out[MISS_INDEX] = 0.0
    else:
        radius = max(8.5 * np.sqrt(eigs.max()), 1.5 * ig.cell_size)
        idx = _window_indices(ig, ax, ay, radius)
        if len(idx):
            dens = gaussian_pdf2(ig.xy[idx, 0] - ax, ig.xy[idx, 1] - ay, sigma) * ig.area
            np.add.at(out, ig.labels[idx], dens)
    s = out[:62].sum()
    if s >= 1.0:
        out[:62] /= s
        out[MISS_INDEX] = 0.0
    else:
        out[MISS_INDEX] = 1.0 - s


def hit_distribution(skill: SkillModel, a: tuple[float, float], geom: BoardGeometry,
                     cell_size: float) -> np.ndarray:
    """Categorical distribution over the 63 outcomes for a throw aimed at ``a``.

    Integrates the Gaussian density over grid cells by the midpoint rule;
    residual mass (off-board tails) goes to MISS so rows sum to exactly 1.
    """
    ig = integration_grid(geom, cell_size)
    sigma = skill.sigma_for_target(geom, a[0], a[1])
    row = np.zeros(N_OUTCOMES)
    _hit_row(ig, float(a[0]), float(a[1]), sigma, row)
    return row


@dataclass(frozen=True)
class HitTable:
    """Precomputed p(z; a) for every target of an action grid."""

    grid: ActionGrid
    probs: np.ndarray = field(repr=False)  # (n_targets, 63)

    def __post_init__(self):
        if self.probs.shape != (len(self.grid), N_OUTCOMES):
            raise ValueError("probs shape does not match grid")

    def validate(self, tol: float = 1e-9) -> None:
        if (self.probs < 0).any():
            raise ValueError("hit table has negative entries")
        err = np.abs(self.probs.sum(axis=1) - 1.0).max()
        if err > tol:
            raise ValueError(f"hit table rows not normalized (max error {err:.3g})")


def make_hit_table(skill: SkillModel, grid: ActionGrid, geom: BoardGeometry,
                   cell_size: float | None = None) -> HitTable:
    """Hit distribution for every grid target.  ``cell_size`` defaults to the
    action grid's own cell size, so one grid serves both roles."""
    ig = integration_grid(geom, cell_size if cell_size is not None else grid.cell_size)
    probs = np.zeros((len(grid), N_OUTCOMES))
    sigmas = [sig for _, sig in skill.parts]
    part_idx = np.array([skill.part_of_target(geom, x, y) for x, y in grid.xy])
    for k, (x, y) in enumerate(grid.xy):
        _hit_row(ig, x, y, sigmas[part_idx[k]], probs[k])
    return HitTable(grid=grid, probs=probs)


# ---------------------------------------------------------------------------
# region geometry for sampling and EM

def _wedge_theta_bounds(geom: BoardGeometry, base: int) -> tuple[float, float]:
    j = geom.segment_order.index(base)
    hi = np.radians(99.0 - 18.0 * j)
    return hi - np.radians(18.0), hi


def region_bands(geom: BoardGeometry, outcome: int,
                 miss_r_max: float) -> list[tuple[float, float, float, float]]:
    """Region as a list of annular sectors (r1, r2, theta1, theta2)."""
    two_pi = 2 * np.pi
    if outcome == DB_INDEX:
        return [(0.0, geom.r_db, 0.0, two_pi)]
    if outcome == SB_INDEX:
        return [(geom.r_db, geom.r_sb, 0.0, two_pi)]
    if outcome == MISS_INDEX:
        return [(geom.r_double_out, miss_r_max, 0.0, two_pi)]
    t1, t2 = _wedge_theta_bounds(geom, outcome % 20 + 1)
    if outcome < 20:  # single: two disjoint bands
        return [(geom.r_sb, geom.r_treble_in, t1, t2),
                (geom.r_treble_out, geom.r_double_in, t1, t2)]
    if outcome < 40:
        return [(geom.r_double_in, geom.r_double_out, t1, t2)]
    return [(geom.r_treble_in, geom.r_treble_out, t1, t2)]


def sample_uniform_region(geom: BoardGeometry, outcome: int, n: int,
                          rng: np.random.Generator, miss_r_max: float = 250.0) -> np.ndarray:
    """n points uniform (by area) on the region of an outcome."""
    bands = region_bands(geom, outcome, miss_r_max)
    areas = np.array([0.5 * (t2 - t1) * (r2 * r2 - r1 * r1) for r1, r2, t1, t2 in bands])
    if areas.sum() <= 0:
        raise ValueError(f"region {outcome_name(outcome)} has zero area")
    which = rng.choice(len(bands), size=n, p=areas / areas.sum()) if len(bands) > 1 \
        else np.zeros(n, dtype=int)
    pts = np.empty((n, 2))
    for b, (r1, r2, t1, t2) in enumerate(bands):
        m = which == b
        k = int(m.sum())
        r = np.sqrt(rng.uniform(r1 * r1, r2 * r2, size=k))
        t = rng.uniform(t1, t2, size=k)
        pts[m, 0] = r * np.cos(t)
        pts[m, 1] = r * np.sin(t)
    return pts


# ---------------------------------------------------------------------------
# EM fitting

@dataclass(frozen=True)
class EmConfig:
    m_samples: int = 5000
    max_iter: int = 100
    rel_tol: float = 1e-6
    rng_seed: int = 0

    def __post_init__(self):
        if self.m_samples < 1:
            raise ValueError("m_samples must be >= 1")


@dataclass
class EmTrace:
    sigmas: list[np.ndarray]  # estimate after each iteration, sigma0 first
    n_iter: int


def fit_em(data: list[AimRow], part_regions: frozenset[int], geom: BoardGeometry,
           cfg: EmConfig = EmConfig(), sigma0: np.ndarray | None = None,
           trace: EmTrace | None = None) -> np.ndarray:
    """EM covariance estimate for one part from censored count data.

    E-step expectations are importance-sampled with a uniform proposal on the
    observed region (fresh draws each iteration, seeded).  The M-step is the
    count-weighted average of the conditional scatter matrices.
    """
    rows = [r for r in data if r.count > 0 and r.target_region in part_regions]
    if not rows:
        raise ValueError("no data rows with positive count for this part")
    sigma = check_spd(sigma0 if sigma0 is not None else np.eye(2) * 100.0).copy()
    if trace is not None:
        trace.sigmas = [sigma.copy()]
    rng = np.random.default_rng(cfg.rng_seed)
    targets = {r.target_region: np.asarray(region_center(geom, r.target_region)) for r in rows}
    n_total = sum(r.count for r in rows)
    n_iter = 0
    for n_iter in range(1, cfg.max_iter + 1):
        miss_r_max = geom.r_double_out + 6.0 * np.sqrt(np.linalg.eigvalsh(sigma).max())
        scatter = np.zeros((2, 2))
        for r in rows:
            a = targets[r.target_region]
            nu = sample_uniform_region(geom, r.outcome, cfg.m_samples, rng, miss_r_max)
            d = a[None, :] - nu
            w = gaussian_pdf2(d[:, 0], d[:, 1], sigma)
            ws = w.sum()
            if ws <= 0:  # observed region numerically unreachable; darts fell far out
                w = np.full(len(w), 1.0 / len(w))
            else:
                w = w / ws
            scatter += r.count * np.einsum("j,ji,jk->ik", w, d, d)
        new_sigma = scatter / n_total
        rel = np.linalg.norm(new_sigma - sigma, "fro") / max(np.linalg.norm(sigma, "fro"), 1e-300)
        sigma = new_sigma
        if trace is not None:
            trace.sigmas.append(sigma.copy())
        if rel < cfg.rel_tol:
            break
    if trace is not None:
        trace.n_iter = n_iter
    return check_spd(sigma)


def log_likelihood(data: list[AimRow], sigma: np.ndarray, geom: BoardGeometry,
                   cell_size: float = 0.5) -> float:
    """Observed-data log-likelihood sum(n_i * log P(region z_i)) by grid integration."""
    check_spd(sigma)
    ig = integration_grid(geom, cell_size)
    row = np.zeros(N_OUTCOMES)
    rows_cache: dict[int, np.ndarray] = {}
    total = 0.0
    for r in data:
        if r.count == 0:
            continue
        if r.target_region not in rows_cache:
            ax, ay = region_center(geom, r.target_region)
            _hit_row(ig, ax, ay, sigma, row)
            rows_cache[r.target_region] = row.copy()
        p = rows_cache[r.target_region][r.outcome]
        if p <= 0.0:
            return float("-inf")
        total += r.count * np.log(p)
    return total


def fit_skill_model(data: list[AimRow], geom: BoardGeometry, cfg: EmConfig = EmConfig(),
                    partition: tuple[frozenset[int], ...] = DEFAULT_PARTITION,
                    sigma0: np.ndarray | None = None,
                    fallback_part: int = DEFAULT_FALLBACK_PART) -> SkillModel:
    """Fit every partition part that has data; parts without data keep sigma0."""
    s0 = check_spd(sigma0 if sigma0 is not None else np.eye(2) * 100.0)
    parts = []
    for k, regions in enumerate(partition):
        part_cfg = EmConfig(cfg.m_samples, cfg.max_iter, cfg.rel_tol, cfg.rng_seed + k)
        if any(r.count > 0 and r.target_region in regions for r in data):
            parts.append((regions, fit_em(data, regions, geom, part_cfg, s0)))
        else:
            parts.append((regions, s0.copy()))
    return SkillModel(parts=tuple(parts), fallback_part=fallback_part)


def simulate_throw(skill: SkillModel, a: tuple[float, float], geom: BoardGeometry,
                   rng: np.random.Generator) -> tuple[tuple[float, float], int]:
    """Sample a landing point and its outcome for a throw aimed at ``a``."""
    sigma = skill.sigma_for_target(geom, a[0], a[1])
    chol = np.linalg.cholesky(sigma)
    pt = np.asarray(a, dtype=np.float64) + chol @ rng.standard_normal(2)
    return (float(pt[0]), float(pt[1])), int(classify(geom, pt[0], pt[1]))
