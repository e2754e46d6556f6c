"""Temporal network graphs: per-step adjacency snapshots, the edge-interval
(edge-centric) representation, connection-length statistics, and a
line-oriented log format.

Node ids are 1-based and fixed by injection order. Edges are unordered pairs
stored once with i < j. The log format, one record per line:

    S <t> <n>                     snapshot header: time step, node count
    N <id> <x> <y> <injected_at>  node position channel (optional)
    A <id> <label>                per-node strategy annotation (optional)
    E <i> <j>                     active edge, i < j, sorted

Records for one snapshot are contiguous; t starts at 0 and increments by 1.
"""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .environment import Environment, blocked_paths


class TngParseError(Exception):
    """Raised on malformed or inconsistent log content."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class EdgeInterval:
    """Maximal run of consecutive steps during which edge (i, j) is active."""

    i: int
    j: int
    start: int
    end: int  # inclusive

    def __post_init__(self):
        if not self.i < self.j:
            raise ValueError(f"edge interval requires i < j, got ({self.i}, {self.j})")
        if self.start > self.end:
            raise ValueError(f"empty interval ({self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass(eq=False)
class TemporalNetworkGraph:
    """Time-ordered adjacency matrices plus optional position/strategy channels.

    adjacency[t] is a symmetric boolean matrix whose dimension is the number
    of nodes injected by step t; dimensions never decrease with t.
    """

    adjacency: list  # list[np.ndarray], bool (n_t, n_t)
    injected_at: list  # injected_at[k] = first step containing node id k+1
    positions: list | None = None  # list[np.ndarray (n_t, 2)] or None
    strategies: list | None = None  # list[list[str]] or None

    def __post_init__(self):
        self.validate()

    @property
    def n_steps(self) -> int:
        return len(self.adjacency)

    @property
    def n_nodes(self) -> int:
        return len(self.injected_at)

    def node_count_at(self, t: int) -> int:
        return self.adjacency[t].shape[0]

    def validate(self):
        if not self.adjacency:
            raise ValueError("temporal network graph needs at least one snapshot")
        prev_n = 0
        for t, a in enumerate(self.adjacency):
            n = a.shape[0]
            if a.shape != (n, n):
                raise ValueError(f"adjacency at t={t} is not square")
            if n < prev_n:
                raise ValueError(f"node count decreases at t={t}")
            if n and (np.diag(a).any() or not (a == a.T).all()):
                raise ValueError(f"adjacency at t={t} not symmetric with zero diagonal")
            prev_n = n
        if prev_n != len(self.injected_at):
            raise ValueError("injected_at length does not match final node count")
        for k, tk in enumerate(self.injected_at):
            first = self._first_step_with(k + 1)
            if tk != first:
                raise ValueError(f"node {k + 1} injected_at={tk} but first appears at t={first}")
        if self.positions is not None:
            for t, (p, a) in enumerate(zip(self.positions, self.adjacency)):
                if p.shape != (a.shape[0], 2):
                    raise ValueError(f"position channel shape mismatch at t={t}")
        if self.strategies is not None:
            for t, (s, a) in enumerate(zip(self.strategies, self.adjacency)):
                if len(s) != a.shape[0]:
                    raise ValueError(f"strategy channel length mismatch at t={t}")

    def _first_step_with(self, node_id: int) -> int:
        for t, a in enumerate(self.adjacency):
            if a.shape[0] >= node_id:
                return t
        raise ValueError(f"node {node_id} never appears")

    def __eq__(self, other) -> bool:
        if not isinstance(other, TemporalNetworkGraph):
            return NotImplemented
        if self.n_steps != other.n_steps or self.injected_at != other.injected_at:
            return False
        if any((a != b).any() for a, b in zip(self.adjacency, other.adjacency)):
            return False
        if (self.positions is None) != (other.positions is None):
            return False
        if self.positions is not None:
            if any((p != q).any() for p, q in zip(self.positions, other.positions)):
                return False
        if self.strategies != other.strategies:
            return False
        return True


def adjacency_from_positions(nodes, env: Environment) -> np.ndarray:
    """Symmetric boolean adjacency: connected iff center distance is at most
    min of the two communication radii (boundary inclusive) and the straight
    path crosses no obstacle interior.

    `nodes` is any sequence with .position and .r_comm attributes.
    """
    n = len(nodes)
    adj = np.zeros((n, n), dtype=bool)
    if n < 2:
        return adj
    pos = np.array([nd.position for nd in nodes], dtype=float)
    rc = np.array([nd.r_comm for nd in nodes], dtype=float)
    diff = pos[:, None, :] - pos[None, :, :]
    d2 = (diff**2).sum(axis=-1)
    lim = np.minimum(rc[:, None], rc[None, :]) ** 2
    adj = d2 <= lim
    np.fill_diagonal(adj, False)
    if env.obstacles:
        for i in range(n - 1):
            js = np.flatnonzero(adj[i, i + 1:]) + i + 1
            if js.size == 0:
                continue
            blocked = blocked_paths(pos[i], pos[js], env.obstacles)
            if blocked.any():
                adj[i, js[blocked]] = False
                adj[js[blocked], i] = False
    return adj


def _pair_activity(tng: TemporalNetworkGraph):
    """Boolean (n_steps, n_pairs) activity table over all final-node pairs."""
    n = tng.n_nodes
    T = tng.n_steps
    iu, ju = np.triu_indices(n, 1)
    act = np.zeros((T, iu.size), dtype=bool)
    for t, a in enumerate(tng.adjacency):
        m = a.shape[0]
        if m < 2:
            continue
        sel = (iu < m) & (ju < m)
        act[t, sel] = a[iu[sel], ju[sel]]
    return act, iu, ju


def edge_intervals(tng: TemporalNetworkGraph) -> list[EdgeInterval]:
    """All maximal activity runs, sorted by (i, j, start)."""
    act, iu, ju = _pair_activity(tng)
    if act.size == 0:
        return []
    T, P = act.shape
    pad = np.zeros((1, P), dtype=bool)
    rise = act & ~np.vstack([pad, act[:-1]])
    fall = act & ~np.vstack([act[1:], pad])
    rt, rp = np.nonzero(rise)
    ft, fp = np.nonzero(fall)
    r_order = np.lexsort((rt, rp))
    f_order = np.lexsort((ft, fp))
    out = [
        EdgeInterval(int(iu[p]) + 1, int(ju[p]) + 1, int(s), int(e))
        for p, s, e in zip(rp[r_order], rt[r_order], ft[f_order])
    ]
    out.sort(key=lambda iv: (iv.i, iv.j, iv.start))
    return out


def connection_length_distribution(tng: TemporalNetworkGraph, bucket_edges=None):
    """Histogram of edge-interval durations.

    Default: dict mapping exact duration -> count (unit buckets). With
    bucket_edges (ascending sequence), returns (counts, edges) as from
    numpy.histogram.
    """
    lengths = [iv.length for iv in edge_intervals(tng)]
    if bucket_edges is None:
        return dict(sorted(Counter(lengths).items()))
    counts, edges = np.histogram(lengths, bins=np.asarray(bucket_edges, dtype=float))
    return counts, edges


def missing_pairs(tng: TemporalNetworkGraph) -> set[tuple[int, int]]:
    """Unordered node pairs (i < j) that never connect during the whole TNG."""
    act, iu, ju = _pair_activity(tng)
    if act.size == 0:
        n = tng.n_nodes
        return {(i + 1, j + 1) for i in range(n) for j in range(i + 1, n)}
    never = ~act.any(axis=0)
    return {(int(iu[p]) + 1, int(ju[p]) + 1) for p in np.flatnonzero(never)}


def intervals_to_adjacency(intervals, n_steps: int, node_counts) -> list[np.ndarray]:
    """Rebuild the adjacency sequence covered by a set of intervals.

    node_counts gives the matrix dimension per step. Used as the round-trip
    oracle for edge_intervals.
    """
    adj = [np.zeros((node_counts[t], node_counts[t]), dtype=bool) for t in range(n_steps)]
    for iv in intervals:
        for t in range(iv.start, iv.end + 1):
            adj[t][iv.i - 1, iv.j - 1] = True
            adj[t][iv.j - 1, iv.i - 1] = True
    return adj


# ---------------------------------------------------------------------------
# log I/O
# ---------------------------------------------------------------------------


def write_tng(tng: TemporalNetworkGraph, path):
    """Write the log format documented in the module docstring."""
    with open(path, "w", encoding="utf-8") as fh:
        for t, a in enumerate(tng.adjacency):
            n = a.shape[0]
            fh.write(f"S {t} {n}\n")
            if tng.positions is not None:
                pos = tng.positions[t]
                for k in range(n):
                    fh.write(
                        f"N {k + 1} {pos[k, 0]!r} {pos[k, 1]!r} "
                        f"{tng.injected_at[k]}\n")
            if tng.strategies is not None:
                for k, label in enumerate(tng.strategies[t]):
                    fh.write(f"A {k + 1} {label}\n")
            ii, jj = np.nonzero(np.triu(a, 1))
            for i, j in zip(ii, jj):
                fh.write(f"E {i + 1} {j + 1}\n")


def read_tng(path) -> TemporalNetworkGraph:
    """Parse a log file; raises TngParseError with the offending line number."""
    snapshots = []  # per snapshot: dict with n, edges, nodes, labels
    cur = None
    injected = {}

    def fail(msg, ln):
        raise TngParseError(msg, ln)

    with open(path, "r", encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "S":
                if len(parts) != 3:
                    fail(f"malformed snapshot header: {line!r}", ln)
                try:
                    t, n = int(parts[1]), int(parts[2])
                except ValueError:
                    fail(f"malformed snapshot header: {line!r}", ln)
                if t != len(snapshots):
                    fail(f"non-contiguous time step: expected t={len(snapshots)}, found t={t}", ln)
                if n < 0:
                    fail(f"negative node count {n}", ln)
                if snapshots and n < snapshots[-1]["n"]:
                    fail(f"node count decreases at t={t}", ln)
                cur = {"n": n, "edges": set(), "pos": {}, "labels": {}, "line": ln}
                snapshots.append(cur)
            elif tag == "E":
                if cur is None:
                    fail("edge record before any snapshot header", ln)
                if len(parts) != 3:
                    fail(f"malformed edge record: {line!r}", ln)
                try:
                    i, j = int(parts[1]), int(parts[2])
                except ValueError:
                    fail(f"malformed edge record: {line!r}", ln)
                if not (1 <= i < j <= cur["n"]):
                    fail(f"edge ({i}, {j}) is not an ordered in-range pair", ln)
                if (i, j) in cur["edges"]:
                    fail(f"duplicate edge ({i}, {j})", ln)
                cur["edges"].add((i, j))
            elif tag == "N":
                if cur is None:
                    fail("node record before any snapshot header", ln)
                if len(parts) != 5:
                    fail(f"malformed node record: {line!r}", ln)
                try:
                    k = int(parts[1])
                    x, y = float(parts[2]), float(parts[3])
                    inj = int(parts[4])
                except ValueError:
                    fail(f"malformed node record: {line!r}", ln)
                if not (1 <= k <= cur["n"]):
                    fail(f"node id {k} out of range", ln)
                if k in cur["pos"]:
                    fail(f"duplicate node record for id {k}", ln)
                if inj > len(snapshots) - 1:
                    fail(f"node {k} injected_at={inj} after its first snapshot", ln)
                if k in injected and injected[k] != inj:
                    fail(f"node {k} injected_at changed to {inj}", ln)
                injected[k] = inj
                cur["pos"][k] = (x, y)
            elif tag == "A":
                if cur is None:
                    fail("annotation record before any snapshot header", ln)
                if len(parts) != 3:
                    fail(f"malformed annotation record: {line!r}", ln)
                try:
                    k = int(parts[1])
                except ValueError:
                    fail(f"malformed annotation record: {line!r}", ln)
                if not (1 <= k <= cur["n"]):
                    fail(f"annotation id {k} out of range", ln)
                if k in cur["labels"]:
                    fail(f"duplicate annotation for id {k}", ln)
                cur["labels"][k] = parts[2]
            else:
                fail(f"unknown record tag {tag!r}", ln)

    if not snapshots:
        raise TngParseError("no snapshots")

    has_pos = [bool(s["pos"]) for s in snapshots]
    if any(has_pos) and not all(has_pos):
        raise TngParseError("position channel present in only some snapshots")
    has_lab = [bool(s["labels"]) for s in snapshots]
    if any(has_lab) and not all(has_lab):
        raise TngParseError("strategy channel present in only some snapshots")

    adjacency = []
    positions = [] if all(has_pos) and snapshots else None
    strategies = [] if all(has_lab) and snapshots else None
    for s in snapshots:
        n = s["n"]
        a = np.zeros((n, n), dtype=bool)
        for i, j in s["edges"]:
            a[i - 1, j - 1] = True
            a[j - 1, i - 1] = True
        adjacency.append(a)
        if positions is not None:
            if len(s["pos"]) != n:
                raise TngParseError(
                    f"position channel incomplete in snapshot at line {s['line']}")
            positions.append(np.array([s["pos"][k + 1] for k in range(n)], dtype=float))
        if strategies is not None:
            if len(s["labels"]) != n:
                raise TngParseError(
                    f"strategy channel incomplete in snapshot at line {s['line']}")
            strategies.append([s["labels"][k + 1] for k in range(n)])

    final_n = snapshots[-1]["n"]
    injected_at = []
    for k in range(1, final_n + 1):
        if k in injected:
            injected_at.append(injected[k])
        else:
            injected_at.append(next(t for t, s in enumerate(snapshots) if s["n"] >= k))

    try:
        return TemporalNetworkGraph(adjacency, injected_at, positions, strategies)
    except ValueError as exc:
        raise TngParseError(str(exc)) from exc
