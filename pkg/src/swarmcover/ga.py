"""Conditional genetic search for sparsely connected nodes.

Nodes with few neighbors explore: a small mutation-only genetic search picks
the reachable position that maximizes newly covered area (area within sensing
range and line of sight of the candidate, not already covered by the node's
current disk or its neighbors') minus a movement penalty. Well-connected
nodes keep the plain centroid-seeking move.

All draws come from the caller's seeded generator, and equal-fitness ties
break toward the smallest (x, y), so proposals are fully deterministic.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .environment import (Environment, NoiseModel, Point, blocked_paths,
                          clamp_to_free_space, line_of_sight, sample_noise)
from .grid import CoverageGrid, coverage_grid


class Strategy(Enum):
    GA = "GA"
    VORONOI = "VORONOI"


@dataclass
class GaParams:
    """Knobs for the per-node genetic search.

    mutation_radius defaults to half the node's sensing radius when unset.
    coarse_stride subsamples the fitness grid (every nth cell per axis).
    """

    population: int = 12
    generations: int = 3
    mutation_radius: float | None = None
    elite: int = 2
    move_penalty: float = 0.1  # fitness cost per unit of displacement
    coarse_stride: int = 2

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if not (1 <= self.elite < self.population):
            raise ValueError("elite must satisfy 1 <= elite < population")
        if self.mutation_radius is not None and self.mutation_radius <= 0:
            raise ValueError("mutation_radius must be positive")
        if self.move_penalty < 0:
            raise ValueError("move_penalty must be >= 0")
        if self.coarse_stride < 1:
            raise ValueError("coarse_stride must be >= 1")


def select_strategy(neighbor_count: int, voronoi_threshold: int = 4) -> Strategy:
    """Exploration for sparsely connected nodes (including isolated ones),
    centroid-seeking at or above the crowding threshold."""
    if neighbor_count < 0:
        raise ValueError("neighbor_count must be >= 0")
    return Strategy.GA if neighbor_count < voronoi_threshold else Strategy.VORONOI


def _valid_candidate(p: Point, cand: Point, env: Environment) -> bool:
    """Reachable means inside the region with an unobstructed straight path."""
    if not (0.0 <= cand[0] <= env.width and 0.0 <= cand[1] <= env.height):
        return False
    return line_of_sight(p, cand, env)


def _ga_target(node, disk, perceived, neighbor_r, env: Environment, cfg,
               params: GaParams, rng, grid: CoverageGrid) -> Point:
    """Pick the node's next position by generational search; see ga_propose."""
    from .deployment import _voronoi_target

    p = np.array(node.position)
    s_max = cfg.s_max
    mut_sigma = (params.mutation_radius if params.mutation_radius is not None
                 else node.r_sense / 2.0)
    mut_noise = NoiseModel(mut_sigma)

    px, py, _ = grid.free_disk(node.position[0], node.position[1],
                               node.r_sense + s_max, stride=params.coarse_stride)
    pts = np.stack((px, py), axis=-1) if px.size else np.empty((0, 2))
    area_unit = grid.cell_area * params.coarse_stride**2
    obstacles = env.obstacles_near(node.position[0], node.position[1],
                                   node.r_sense + s_max)

    if pts.shape[0]:
        d2_own = ((pts - p) ** 2).sum(axis=1)
        own_vis = d2_own <= node.r_sense**2
        if obstacles:
            own_vis &= ~blocked_paths(p, pts, obstacles)
        covered = own_vis
        for q, r in zip(np.asarray(perceived, dtype=float).reshape(-1, 2), neighbor_r):
            covered = covered | (((pts - q) ** 2).sum(axis=1) <= r * r)
    else:
        covered = np.empty(0, dtype=bool)

    def fitness(cands: np.ndarray) -> np.ndarray:
        dist = np.hypot(cands[:, 0] - p[0], cands[:, 1] - p[1])
        if pts.shape[0] == 0:
            return -params.move_penalty * dist
        d2 = ((cands[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
        vis = d2 <= node.r_sense**2
        if obstacles:
            vis &= ~blocked_paths(cands[:, None, :], pts[None, :, :], obstacles)
        counts = (vis & ~covered[None, :]).sum(axis=1)
        return counts * area_unit - params.move_penalty * dist

    def draw_in_disk() -> Point | None:
        for _ in range(8):
            r = s_max * math.sqrt(rng.random())
            ang = 2.0 * math.pi * rng.random()
            cand = (p[0] + r * math.cos(ang), p[1] + r * math.sin(ang))
            if _valid_candidate(node.position, cand, env):
                return cand
        return None

    centroid_cand = clamp_to_free_space(
        node.position, _voronoi_target(node, disk, perceived, s_max), env, cfg.eps_wall)
    cands = [centroid_cand, node.position]
    for _ in range(params.population - 2):
        cands.append(draw_in_disk() or node.position)
    pool = np.array(cands)
    fit = fitness(pool)

    def ranked(c, f):
        order = np.lexsort((c[:, 1], c[:, 0], -f))
        return c[order], f[order]

    pool, fit = ranked(pool, fit)
    for _ in range(params.generations):
        elites = pool[:params.elite]
        children = []
        for k in range(params.population - params.elite):
            parent = elites[k % params.elite]
            child = None
            for _ in range(8):
                dx, dy = sample_noise(mut_noise, rng)
                cand = np.array((parent[0] + dx, parent[1] + dy))
                off = cand - p
                norm = math.hypot(off[0], off[1])
                if norm > s_max:
                    cand = p + off * (s_max / norm)
                cand = (float(cand[0]), float(cand[1]))
                if _valid_candidate(node.position, cand, env):
                    child = cand
                    break
            children.append(child if child is not None else
                            (float(parent[0]), float(parent[1])))
        kids = np.array(children)
        pool = np.vstack([elites, kids])
        fit = np.concatenate([fit[:params.elite], fitness(kids)])
        pool, fit = ranked(pool, fit)

    return (float(pool[0, 0]), float(pool[0, 1]))


def ga_propose(node, snapshot, env: Environment, cfg, params: GaParams, rng,
               perceived_positions=None, grid: CoverageGrid | None = None) -> Point:
    """Propose the node's next position by localized genetic search.

    The initial population is the capped Voronoi-centroid move, the current
    position, and uniform samples from the reachable disk of radius s_max;
    each generation keeps the elite and refills by Gaussian mutation of
    elites, clamped to the reachable free disk. Returns the current position
    when no candidate improves on staying put.

    perceived_positions defaults to the true positions of the node's
    adjacency neighbors; callers modelling perception noise pass their own.
    """
    if grid is None:
        grid = coverage_grid(env, cfg.grid_resolution)
    idx = node.id - 1
    nb = np.flatnonzero(snapshot.adjacency[idx])
    if perceived_positions is None:
        perceived = snapshot.positions[nb]
    else:
        perceived = np.asarray(perceived_positions, dtype=float).reshape(-1, 2)
    neighbor_r = np.array([snapshot.nodes[j].r_sense for j in nb])
    if perceived.shape[0] != neighbor_r.shape[0]:
        neighbor_r = np.full(perceived.shape[0], node.r_sense)
    disk = grid.visible_disk(node.position[0], node.position[1], node.r_sense)
    return _ga_target(node, disk, perceived, neighbor_r, env, cfg, params, rng, grid)


def step_ga_voronoi(snapshot, env: Environment, cfg, params: GaParams, rng):
    """One step where each node picks genetic search or the centroid move by
    its neighbor count, then moves under the usual kinematic rules."""
    from .deployment import _step

    return _step(snapshot, env, cfg, rng, ga_params=params)
