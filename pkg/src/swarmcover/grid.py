"""Occupancy grid shared by Voronoi cell construction, coverage metrics, and
the genetic search's fitness estimates.

Cells are uniform; a cell belongs to a region iff its center does. Grids are
cached per (environment, resolution) since environments are immutable.
"""

from functools import lru_cache

import numpy as np

from .environment import Environment, blocked_paths

DEFAULT_RESOLUTION = 200


class CoverageGrid:
    """Uniform grid of cell centers over the region with a free-space mask."""

    def __init__(self, env: Environment, resolution: int = DEFAULT_RESOLUTION):
        if resolution < 2:
            raise ValueError("grid resolution must be >= 2")
        self.env = env
        self.nx = resolution
        self.ny = resolution
        self.hx = env.width / self.nx
        self.hy = env.height / self.ny
        self.cell_area = self.hx * self.hy
        self.xs = (np.arange(self.nx) + 0.5) * self.hx
        self.ys = (np.arange(self.ny) + 0.5) * self.hy
        self.free = env.in_free_space(self.xs[None, :], self.ys[:, None])
        self.free_count = int(self.free.sum())

    def _window(self, x: float, y: float, radius: float):
        j0 = max(int((x - radius) / self.hx - 0.5), 0)
        j1 = min(int((x + radius) / self.hx + 0.5) + 1, self.nx)
        i0 = max(int((y - radius) / self.hy - 0.5), 0)
        i1 = min(int((y + radius) / self.hy + 0.5) + 1, self.ny)
        return i0, i1, j0, j1

    def free_disk(self, x: float, y: float, radius: float, stride: int = 1):
        """Free cell centers within `radius` of (x, y), ignoring line of sight.

        Returns (px, py, flat): center coordinates and flattened grid indices.
        stride > 1 subsamples every stride-th row/column for cheaper area
        estimates.
        """
        i0, i1, j0, j1 = self._window(x, y, radius)
        dxs = self.xs[j0:j1:stride] - x
        dys = self.ys[i0:i1:stride] - y
        mask = (dys[:, None] ** 2 + dxs[None, :] ** 2 <= radius * radius)
        mask &= self.free[i0:i1:stride, j0:j1:stride]
        ii, jj = np.nonzero(mask)
        gi = i0 + ii * stride
        gj = j0 + jj * stride
        return self.xs[gj], self.ys[gi], gi * self.nx + gj

    def visible_disk(self, x: float, y: float, radius: float, stride: int = 1):
        """Free cell centers within `radius` of (x, y) and in line of sight."""
        px, py, flat = self.free_disk(x, y, radius, stride)
        obstacles = self.env.obstacles_near(x, y, radius)
        if obstacles and px.size:
            keep = ~blocked_paths(
                np.array((x, y)), np.stack((px, py), axis=-1), obstacles)
            px, py, flat = px[keep], py[keep], flat[keep]
        return px, py, flat


@lru_cache(maxsize=8)
def coverage_grid(env: Environment, resolution: int = DEFAULT_RESOLUTION) -> CoverageGrid:
    return CoverageGrid(env, resolution)
