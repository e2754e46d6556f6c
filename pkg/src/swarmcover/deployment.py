"""Centroid-seeking deployment engine.

Each step, every node perceives its communication neighbors (positions
perturbed by Gaussian noise when enabled), builds its range-limited Voronoi
cell on the shared occupancy grid, and moves toward the cell centroid under a
per-step displacement cap, free-space clamping, and a minimum-separation
rule. Adjacency and all metrics always use true positions. New nodes enter
at the inlet whenever coverage improvement stalls, until the node cap.

A single run is sequential and fully determined by its seed; distinct runs
share no mutable state.
"""

import math
import random
from dataclasses import dataclass, field, replace

import numpy as np

from .environment import (Environment, NoiseModel, Point, clamp_to_free_space,
                          sample_noise)
from .grid import DEFAULT_RESOLUTION, CoverageGrid, coverage_grid
from .metrics import MetricsBundle, pac_from_disks
from .tng import TemporalNetworkGraph, adjacency_from_positions

VORONOI_ONLY = "voronoi_only"
GA_VORONOI = "ga_voronoi"

# annotation label for a node's first snapshot, before it has taken a step
INJECTED_LABEL = "INJECTED"


class EmptyCellError(Exception):
    """A node's Voronoi cell contains no grid cells (fully obstructed)."""


@dataclass(frozen=True)
class NodeState:
    """One sensor: identity, kinematics, and sensing/communication radii."""

    id: int  # 1-based, assigned in injection order
    position: Point
    r_sense: float
    r_comm: float
    injected_at: int
    distance_travelled: float = 0.0

    def __post_init__(self):
        if self.r_sense <= 0 or self.r_comm <= 0:
            raise ValueError("sensing and communication radii must be positive")
        if self.distance_travelled < 0:
            raise ValueError("distance_travelled cannot be negative")


@dataclass
class Snapshot:
    """All node states plus the adjacency matrix at one time step."""

    t: int
    nodes: list
    adjacency: np.ndarray
    strategy_labels: list | None = None

    def __post_init__(self):
        n = len(self.nodes)
        if self.adjacency.shape != (n, n):
            raise ValueError("adjacency dimension must equal node count")
        if n and (np.diag(self.adjacency).any()
                  or not (self.adjacency == self.adjacency.T).all()):
            raise ValueError("adjacency must be symmetric with zero diagonal")

    @property
    def positions(self) -> np.ndarray:
        return np.array([nd.position for nd in self.nodes], dtype=float).reshape(-1, 2)


@dataclass
class SimConfig:
    """Run parameters. r_comm, s_max, and d_min default to 2*r_sense,
    r_sense/4, and r_sense/10 respectively when left unset."""

    max_nodes: int = 40
    r_sense: float = 1.2
    r_comm: float | None = None
    s_max: float | None = None  # per-step displacement cap
    d_min: float | None = None  # minimum inter-node separation
    stall_window: int = 5  # steps between coverage-stall checks
    stall_threshold: float = 0.002  # PAC improvement below this -> inject
    settle_eps: float = 0.02  # quiescence displacement threshold
    settle_steps: int = 10  # consecutive quiet steps for quiescence
    pac_target: float = 0.95
    seed: int = 1
    strategy: str = VORONOI_ONLY
    step_cap: int = 5000
    grid_resolution: int = DEFAULT_RESOLUTION
    eps_wall: float = 0.01
    ga_neighbor_threshold: int = 4  # neighbors at or above this use the centroid move
    adjacency_from_perceived: bool = False  # sensitivity flag: noisy adjacency

    def __post_init__(self):
        if self.r_sense <= 0:
            raise ValueError("r_sense must be positive")
        if self.r_comm is None:
            self.r_comm = 2.0 * self.r_sense
        if self.s_max is None:
            self.s_max = self.r_sense / 4.0
        if self.d_min is None:
            self.d_min = self.r_sense / 10.0
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")
        if self.s_max <= 0:
            raise ValueError("s_max must be positive")
        if self.d_min < 0:
            raise ValueError("d_min must be >= 0")
        if self.r_comm <= 0:
            raise ValueError("r_comm must be positive")
        if self.stall_window < 1 or self.settle_steps < 1:
            raise ValueError("stall_window and settle_steps must be >= 1")
        if self.stall_threshold < 0:
            raise ValueError("stall_threshold must be >= 0")
        if self.settle_eps <= 0:
            raise ValueError("settle_eps must be positive")
        if not (0 < self.pac_target <= 1):
            raise ValueError("pac_target must be in (0, 1]")
        if self.step_cap < 1:
            raise ValueError("step_cap must be >= 1")
        if self.grid_resolution < 2:
            raise ValueError("grid_resolution must be >= 2")
        if self.eps_wall < 0:
            raise ValueError("eps_wall must be >= 0")
        if self.ga_neighbor_threshold < 1:
            raise ValueError("ga_neighbor_threshold must be >= 1")
        if self.strategy not in (VORONOI_ONLY, GA_VORONOI):
            raise ValueError(f"unknown strategy {self.strategy!r}")


@dataclass
class CellRegion:
    """Occupancy-grid representation of one node's Voronoi cell."""

    px: np.ndarray  # cell-center x coordinates
    py: np.ndarray
    cell_area: float

    @property
    def count(self) -> int:
        return self.px.size

    @property
    def area(self) -> float:
        return self.count * self.cell_area


def _cut_by_bisectors(px, py, position, perceived):
    """Keep the points on this node's side of every perpendicular bisector."""
    if perceived.size == 0 or px.size == 0:
        return px, py
    x, y = position
    mx = 0.5 * (perceived[:, 0] + x)
    my = 0.5 * (perceived[:, 1] + y)
    bx = perceived[:, 0] - x
    by = perceived[:, 1] - y
    keep = ((px[:, None] - mx) * bx + (py[:, None] - my) * by <= 0.0).all(axis=1)
    return px[keep], py[keep]


def compute_voronoi_cell(node: NodeState, snapshot: Snapshot, env: Environment,
                         perceived_positions, grid: CoverageGrid | None = None) -> CellRegion:
    """Range-limited, visibility-limited Voronoi cell of `node`.

    The cell is the set of free grid cells within the sensing radius and in
    line of sight of the node, on the node's side of the perpendicular
    bisector to every perceived neighbor position. With no neighbors it is
    the visibility-clipped sensing disk.
    """
    if grid is None:
        grid = coverage_grid(env)
    x, y = node.position
    px, py, _ = grid.visible_disk(x, y, node.r_sense)
    perceived = np.asarray(perceived_positions, dtype=float).reshape(-1, 2)
    px, py = _cut_by_bisectors(px, py, node.position, perceived)
    return CellRegion(px, py, grid.cell_area)


def cell_centroid(cell: CellRegion) -> Point:
    """Area centroid of the occupied grid cells; raises EmptyCellError for a
    fully obstructed node (callers hold position)."""
    if cell.count == 0:
        raise EmptyCellError("cell region is empty")
    return (float(cell.px.mean()), float(cell.py.mean()))


def _voronoi_target(node: NodeState, disk, perceived, s_max: float) -> Point:
    """Move target: cell centroid, capped at s_max from the current position."""
    px, py, _ = disk
    px, py = _cut_by_bisectors(px, py, node.position, perceived)
    if px.size == 0:
        return node.position
    cx = float(px.mean())
    cy = float(py.mean())
    x, y = node.position
    d = math.hypot(cx - x, cy - y)
    if d <= s_max:
        return (cx, cy)
    return (x + (cx - x) * s_max / d, y + (cy - y) * s_max / d)


def _separation_cap(start, move, others, d_min: float) -> float:
    """Largest fraction of `move` the node may take while keeping at least
    d_min from every other position it is currently at least d_min from."""
    if d_min <= 0 or others.shape[0] == 0:
        return 1.0
    a = float(move @ move)
    if a == 0.0:
        return 1.0
    w = start - others
    c = (w * w).sum(axis=1) - d_min * d_min
    b = 2.0 * (w @ move)
    disc = b * b - 4.0 * a * c
    consider = (c >= 0.0) & (disc > 0.0)
    if not consider.any():
        return 1.0
    sq = np.sqrt(disc[consider])
    bb = b[consider]
    t_in = (-bb - sq) / (2.0 * a)
    t_out = (-bb + sq) / (2.0 * a)
    hits = (t_in < 1.0) & (t_out > 0.0)
    if not hits.any():
        return 1.0
    return float(max(min(t_in[hits].min(), 1.0), 0.0))


def _node_disks(snapshot: Snapshot, grid: CoverageGrid):
    """Visible sensing disks for every node; shared by PAC and cell building."""
    return [grid.visible_disk(nd.position[0], nd.position[1], nd.r_sense)
            for nd in snapshot.nodes]


def _perceive(idx: int, snapshot: Snapshot, pos: np.ndarray,
              noise: NoiseModel, rng) -> np.ndarray:
    """Perceived positions of node idx's adjacency neighbors.

    The environment's noise deviation is dimensionless, so offsets scale
    with the perceiving node's communication range (ranging error grows with
    the range it is measured over). Draws are consumed in neighbor-id order.
    """
    nb = np.flatnonzero(snapshot.adjacency[idx])
    perceived = pos[nb].copy()
    if noise.sigma > 0:
        scale = snapshot.nodes[idx].r_comm
        for k in range(perceived.shape[0]):
            dx, dy = sample_noise(noise, rng)
            perceived[k, 0] += scale * dx
            perceived[k, 1] += scale * dy
    return perceived


def _step(snapshot: Snapshot, env: Environment, cfg: SimConfig, rng,
          ga_params=None, disks=None) -> Snapshot:
    """Advance one time step; ga_params switches on the per-node conditional
    genetic search for sparsely connected nodes."""
    grid = coverage_grid(env, cfg.grid_resolution)
    n = len(snapshot.nodes)
    pos = snapshot.positions
    noise = NoiseModel(env.noise_deviation)
    if disks is None:
        disks = _node_disks(snapshot, grid)

    if ga_params is not None:
        from .ga import Strategy, _ga_target, select_strategy

    labels = [] if ga_params is not None else None
    targets = []
    for idx, node in enumerate(snapshot.nodes):
        perceived = _perceive(idx, snapshot, pos, noise, rng)
        use_ga = False
        if ga_params is not None:
            use_ga = (select_strategy(perceived.shape[0], cfg.ga_neighbor_threshold)
                      is Strategy.GA)
            labels.append("GA" if use_ga else "VORONOI")
        if use_ga:
            neighbor_r = np.array(
                [snapshot.nodes[j].r_sense
                 for j in np.flatnonzero(snapshot.adjacency[idx])])
            targets.append(_ga_target(node, disks[idx], perceived, neighbor_r,
                                      env, cfg, ga_params, rng, grid))
        else:
            targets.append(_voronoi_target(node, disks[idx], perceived, cfg.s_max))

    cur = pos.copy()
    new_nodes = []
    for idx, node in enumerate(snapshot.nodes):
        start = (float(cur[idx, 0]), float(cur[idx, 1]))
        tgt = clamp_to_free_space(start, targets[idx], env, cfg.eps_wall)
        move = np.array(tgt) - cur[idx]
        others = np.delete(cur, idx, axis=0)
        tcap = _separation_cap(cur[idx], move, others, cfg.d_min)
        end = cur[idx] + tcap * move
        moved = math.hypot(end[0] - cur[idx, 0], end[1] - cur[idx, 1])
        cur[idx] = end
        new_nodes.append(replace(
            node,
            position=(float(end[0]), float(end[1])),
            distance_travelled=node.distance_travelled + moved))

    if cfg.adjacency_from_perceived and noise.sigma > 0:
        sensed = []
        for nd in new_nodes:
            dx, dy = sample_noise(noise, rng)
            sensed.append(replace(nd, position=(nd.position[0] + nd.r_comm * dx,
                                                nd.position[1] + nd.r_comm * dy)))
        adjacency = adjacency_from_positions(sensed, env)
    else:
        adjacency = adjacency_from_positions(new_nodes, env)
    return Snapshot(snapshot.t + 1, new_nodes, adjacency, labels)


def step_voronoi(snapshot: Snapshot, env: Environment, cfg: SimConfig, rng) -> Snapshot:
    """One centroid-seeking step for all nodes (no genetic search)."""
    return _step(snapshot, env, cfg, rng)


def inject_node(snapshot: Snapshot, env: Environment, cfg: SimConfig) -> Snapshot:
    """Append a node at the inlet (probing a small ring around it when the
    inlet is already occupied within d_min) and refresh adjacency."""
    n = len(snapshot.nodes)
    if n >= cfg.max_nodes:
        raise ValueError(f"node cap {cfg.max_nodes} already reached")
    placement = _placement(snapshot, env, cfg)
    node = NodeState(id=n + 1, position=placement, r_sense=cfg.r_sense,
                     r_comm=cfg.r_comm, injected_at=snapshot.t)
    nodes = list(snapshot.nodes) + [node]
    labels = None
    if snapshot.strategy_labels is not None:
        labels = list(snapshot.strategy_labels) + [INJECTED_LABEL]
    return Snapshot(snapshot.t, nodes, adjacency_from_positions(nodes, env), labels)


def _placement(snapshot: Snapshot, env: Environment, cfg: SimConfig) -> Point:
    inlet = env.inlet
    if not bool(env.in_free_space(*inlet)):
        raise ValueError(f"inlet {inlet} is not in free space")
    pos = snapshot.positions
    if pos.shape[0] == 0 or cfg.d_min == 0:
        return inlet
    d2 = ((pos - np.array(inlet)) ** 2).sum(axis=1)
    if d2.min() >= cfg.d_min**2:
        return inlet
    # deterministic ring probe: nearest free spot at multiples of d_min
    for ring in range(1, 9):
        r = ring * cfg.d_min
        for k in range(16):
            ang = 2.0 * math.pi * k / 16.0
            cand = (inlet[0] + r * math.cos(ang), inlet[1] + r * math.sin(ang))
            if not bool(env.in_free_space(*cand)):
                continue
            d2 = ((pos - np.array(cand)) ** 2).sum(axis=1)
            if d2.min() >= cfg.d_min**2:
                return cand
    return inlet  # crowded inlet: accept overlap, separation rule spreads it


@dataclass
class DeploymentResult:
    """Everything a run produces: the TNG, metric traces, and how it ended."""

    tng: TemporalNetworkGraph
    metrics: MetricsBundle
    final_snapshot: Snapshot
    converged: bool
    cutoff_reason: str


def run_deployment(env: Environment, cfg: SimConfig, ga_params=None) -> DeploymentResult:
    """Run a full deployment until cutoff: all nodes injected and either the
    swarm is quiescent or coverage reached its target. Deterministic for a
    given (env, cfg) including the seed; a hard step cap marks runs that
    never reach cutoff as non-converged."""
    if cfg.strategy == GA_VORONOI:
        from .ga import GaParams
        if ga_params is None:
            ga_params = GaParams()
    else:
        ga_params = None

    rng = random.Random(cfg.seed)
    grid = coverage_grid(env, cfg.grid_resolution)

    snap = Snapshot(0, [], np.zeros((0, 0), dtype=bool),
                    [] if ga_params is not None else None)
    snap = inject_node(snap, env, cfg)

    adjacency = [snap.adjacency]
    positions = [snap.positions]
    strategies = [list(snap.strategy_labels)] if ga_params is not None else None
    injected_at = [snap.nodes[0].injected_at]
    disks = _node_disks(snap, grid)
    pac_hist = [pac_from_disks([d[2] for d in disks], grid)]
    cdt_hist = [0.0]
    injected_flags = [True]
    settle_run = 0
    last_injection = 0
    full_at = 0 if cfg.max_nodes == 1 else -1
    converged = False
    reason = "step_cap"

    while True:
        t = snap.t
        count = len(snap.nodes)
        if count == cfg.max_nodes:
            if settle_run >= cfg.settle_steps:
                converged, reason = True, "quiescence"
                break
            if pac_hist[-1] >= cfg.pac_target:
                converged, reason = True, "pac_target"
                break
        if t >= cfg.step_cap:
            break

        want_inject = (
            count < cfg.max_nodes
            and t - last_injection >= cfg.stall_window
            and len(pac_hist) > cfg.stall_window
            and (pac_hist[-1] - pac_hist[-1 - cfg.stall_window]) < cfg.stall_threshold)

        new_snap = _step(snap, env, cfg, rng, ga_params=ga_params, disks=disks)
        disp = 0.0
        if count:
            delta = new_snap.positions[:count] - snap.positions
            disp = float(np.hypot(delta[:, 0], delta[:, 1]).max())
        settle_run = settle_run + 1 if disp < cfg.settle_eps else 0

        if want_inject:
            new_snap = inject_node(new_snap, env, cfg)
            injected_at.append(new_snap.nodes[-1].injected_at)
            last_injection = new_snap.t
            settle_run = 0
            if len(new_snap.nodes) == cfg.max_nodes and full_at < 0:
                full_at = new_snap.t

        snap = new_snap
        adjacency.append(snap.adjacency)
        positions.append(snap.positions)
        if strategies is not None:
            strategies.append(list(snap.strategy_labels))
        disks = _node_disks(snap, grid)
        pac_hist.append(pac_from_disks([d[2] for d in disks], grid))
        cdt_hist.append(sum(nd.distance_travelled for nd in snap.nodes))
        injected_flags.append(want_inject)

    tng = TemporalNetworkGraph(adjacency, injected_at, positions, strategies)
    metrics = MetricsBundle(
        pac=np.array(pac_hist),
        cdt=np.array(cdt_hist),
        steps_to_cutoff=snap.t,
        steps_to_full_injection=full_at,
        injected=np.array(injected_flags, dtype=bool),
        converged=converged,
        cutoff_reason=reason)
    return DeploymentResult(tng, metrics, snap, converged, reason)
