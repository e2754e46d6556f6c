"""Application-level performance measures: percent area coverage (PAC) and
cumulative distance travelled (CDT).

A free-space grid cell counts as covered when its center lies within sensing
range of some node that also has line of sight to it, so regions sealed
behind obstacles stay uncovered until a node enters them.
"""

from dataclasses import dataclass

import numpy as np

from .environment import Environment
from .grid import CoverageGrid, coverage_grid


@dataclass
class MetricsBundle:
    """Per-run metric traces aligned with the snapshot sequence."""

    pac: np.ndarray  # fraction of free cells covered, per step
    cdt: np.ndarray  # total distance travelled by all nodes, per step
    steps_to_cutoff: int
    steps_to_full_injection: int  # -1 when the node cap was never reached
    injected: np.ndarray  # bool per step: a node entered at this step
    converged: bool = True
    cutoff_reason: str = ""


def pac(nodes, env: Environment, grid: CoverageGrid | None = None) -> float:
    """Fraction of free-space cells within line-of-sight sensing range of at
    least one node. `nodes` is a sequence with .position and .r_sense."""
    if grid is None:
        grid = coverage_grid(env)
    if not nodes or grid.free_count == 0:
        return 0.0
    covered = np.zeros(grid.nx * grid.ny, dtype=bool)
    for nd in nodes:
        x, y = nd.position
        _, _, flat = grid.visible_disk(x, y, nd.r_sense)
        covered[flat] = True
    return float(covered.sum()) / grid.free_count


def pac_from_disks(disks, grid: CoverageGrid) -> float:
    """PAC from precomputed visible-disk flat indices (one array per node)."""
    if not disks or grid.free_count == 0:
        return 0.0
    covered = np.zeros(grid.nx * grid.ny, dtype=bool)
    for flat in disks:
        covered[flat] = True
    return float(covered.sum()) / grid.free_count


def cdt_series(tng) -> np.ndarray:
    """Cumulative distance travelled per step, recomputed from the TNG
    position channel. Raises when the channel is absent."""
    if tng.positions is None:
        raise ValueError("TNG has no node position channel (N records); "
                         "cumulative distance requires it")
    out = np.zeros(tng.n_steps)
    total = 0.0
    for t in range(1, tng.n_steps):
        prev = tng.positions[t - 1]
        cur = tng.positions[t]
        m = prev.shape[0]
        if m:
            d = cur[:m] - prev
            total += float(np.hypot(d[:, 0], d[:, 1]).sum())
        out[t] = total
    return out
