"""Configurations of the eight benchmark convergence tables, as data.

Each entry fixes the problem, method, grid spacing, step-size ladder and
horizon, together with the reference errors the runs are compared against.
Tables 2 and 4 default to ``h = 1e-3`` with the dense backend; their
``full_h`` variant uses ``h = 2.5e-4`` with the Krylov backend.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .harness import ExperimentPlan

LADDER_LIE_1D = (5e-4, 2.5e-4, 1.25e-4)
LADDER_STRANG_1D = (1e-3, 5e-4, 2.5e-4)
LADDER_LIE_2D = (5e-3, 2.5e-3, 1.25e-3)
LADDER_STRANG_2D = (1e-2, 5e-3, 2.5e-3)


@dataclass(frozen=True)
class TableSpec:
    number: int
    plan: ExperimentPlan
    local_ref: tuple[float, float, float]
    global_ref: tuple[float, float, float]
    full_h: float | None = None

    def plan_for(self, full_h: bool = False) -> ExperimentPlan:
        if full_h and self.full_h is not None:
            return replace(self.plan, h=self.full_h, backend="krylov")
        return self.plan


def _plan(problem, method, h, ks, T, backend="dense") -> ExperimentPlan:
    return ExperimentPlan(problem, method, h, ks, T, backend=backend)


TABLES: dict[int, TableSpec] = {
    1: TableSpec(
        1, _plan("p1_dirichlet", "lie", 1e-3, LADDER_LIE_1D, 0.2),
        (1.5838e-4, 4.2830e-5, 1.1390e-5), (6.8139e-3, 3.4035e-3, 1.7016e-3),
    ),
    2: TableSpec(
        2, _plan("p1_dirichlet", "strang", 1e-3, LADDER_STRANG_1D, 0.2),
        (8.5559e-5, 2.1777e-5, 5.5000e-6), (1.6140e-4, 4.2882e-5, 1.1235e-5),
        full_h=2.5e-4,
    ),
    3: TableSpec(
        3, _plan("p1_neumann", "lie", 1e-3, LADDER_LIE_1D, 0.2),
        (2.0286e-4, 5.1444e-5, 1.2795e-5), (3.9872e-2, 1.9887e-2, 9.9237e-3),
    ),
    4: TableSpec(
        4, _plan("p1_neumann", "strang", 1e-3, LADDER_STRANG_1D, 0.2),
        (2.6922e-5, 5.0772e-6, 9.1626e-7), (1.8549e-4, 4.6220e-5, 1.0814e-5),
        full_h=2.5e-4,
    ),
    5: TableSpec(
        5, _plan("p2_dirichlet", "lie", 1e-2, LADDER_LIE_2D, 1.0, backend="krylov"),
        (6.1550e-2, 1.9049e-2, 5.7445e-3), (6.1666e-1, 2.9307e-1, 1.4341e-1),
    ),
    6: TableSpec(
        6, _plan("p2_dirichlet", "strang", 1e-2, LADDER_STRANG_2D, 1.0, backend="krylov"),
        (5.4180e-2, 1.5992e-2, 4.5641e-3), (3.0713e-1, 7.7562e-2, 2.1856e-2),
    ),
    7: TableSpec(
        7, _plan("p2_dirichlet", "lie-split2d", 1e-2, LADDER_LIE_2D, 1.0),
        (6.9693e-2, 1.9980e-2, 5.8275e-3), (6.1373e-1, 2.9240e-1, 1.4325e-1),
    ),
    8: TableSpec(
        8, _plan("p2_dirichlet", "strang-split2d", 1e-2, LADDER_STRANG_2D, 1.0),
        (6.5879e-2, 1.8698e-2, 5.2568e-3), (3.4096e-1, 8.7881e-2, 2.3635e-2),
    ),
}


def get_table(n: int) -> TableSpec:
    try:
        return TABLES[n]
    except KeyError:
        raise KeyError(f"no table {n}; choose from 1..{len(TABLES)}") from None
