import numpy as np
import pytest

import dartsolve
from dartsolve import board, ns_solver, skill


@pytest.fixture(scope="session")
def geom():
    return dartsolve.default_geometry()


@pytest.fixture(scope="session")
def perfect_hit_table(geom):
    """One target per scoring region, hit with certainty."""
    xy = np.array([board.region_center(geom, z) for z in range(62)])
    probs = np.zeros((62, board.N_OUTCOMES))
    probs[np.arange(62), np.arange(62)] = 1.0
    return skill.HitTable(grid=board.ActionGrid(cell_size=1.0, xy=xy), probs=probs)


def toy_hit_table(q: float) -> skill.HitTable:
    """Single target hitting D1 with probability q, MISS otherwise."""
    probs = np.zeros((1, board.N_OUTCOMES))
    probs[0, board.parse_outcome("D1")] = q
    probs[0, board.MISS_INDEX] = 1.0 - q
    return skill.HitTable(grid=board.ActionGrid(cell_size=1.0, xy=np.zeros((1, 2))),
                          probs=probs)


@pytest.fixture(scope="session")
def coarse_hit_table(geom):
    """Small, fast table: 20 mm grid, sloppy 25 mm isotropic skill."""
    grid = board.make_grid(geom, 20.0)
    return skill.make_hit_table(skill.isotropic_skill(25.0), grid, geom)


@pytest.fixture(scope="session")
def small_pro_table(geom):
    """Pro-level 4 mm skill on a coarse 10 mm grid, for two-player tests at
    modest start scores."""
    grid = board.make_grid(geom, 10.0)
    return skill.make_hit_table(skill.isotropic_skill(4.0), grid, geom)


@pytest.fixture(scope="session")
def eq41(small_pro_table):
    """Shared two-player equilibrium at start 41 on the pro table."""
    from dartsolve import zsg_solver

    return zsg_solver.solve_equilibrium(small_pro_table, small_pro_table,
                                        ns_solver.SolveConfig(start_score=41))


# desk-scale fixtures shared by the acceptance suite (start 171, 5 mm cells,
# pro-level sigma = 4 mm); session-scoped because the equilibrium solve is
# the dominant cost of the whole test run.

DESK_START = 171


@pytest.fixture(scope="session")
def desk_hit_table(geom):
    grid = board.make_grid(geom, 5.0)
    return skill.make_hit_table(skill.isotropic_skill(4.0), grid, geom)


@pytest.fixture(scope="session")
def desk_cfg():
    return ns_solver.SolveConfig(start_score=DESK_START)


@pytest.fixture(scope="session")
def desk_ns(desk_hit_table, desk_cfg):
    return ns_solver.solve_ns(desk_hit_table, desk_cfg)


@pytest.fixture(scope="session")
def desk_equilibrium(desk_hit_table, desk_cfg):
    from dartsolve import zsg_solver

    import time
    t0 = time.time()
    sol = zsg_solver.solve_equilibrium(desk_hit_table, desk_hit_table, desk_cfg)
    sol.solve_seconds = time.time() - t0
    return sol
