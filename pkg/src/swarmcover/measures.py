"""Static graph measures applied per snapshot: spectral regularity difference,
eigenvector/degree centrality, degree distributions, and windowed (time-lag)
Pearson correlation between centrality time traces.

Eigenvalues for the regularity measure come from a dense symmetric
eigensolver; eigenvector centrality is computed independently by power
iteration so the two spectral routes can cross-check each other.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

UNDEFINED = math.nan  # marker for correlations over zero-variance data


class ConvergenceError(Exception):
    """Power iteration hit its iteration cap; carries the last residual."""

    def __init__(self, residual: float, iterations: int, step: int | None = None):
        self.residual = residual
        self.iterations = iterations
        self.step = step
        at = f" at t={step}" if step is not None else ""
        super().__init__(
            f"power iteration did not converge after {iterations} iterations"
            f"{at} (residual {residual:.3e})")


@dataclass(frozen=True)
class SpectrumSummary:
    """Adjacency eigenvalues in descending order."""

    eigenvalues: np.ndarray
    n: int

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[0]) if self.n else 0.0


@dataclass
class MeasureSeries:
    """Named time trace: step -> scalar or per-node vector."""

    name: str
    values: dict = field(default_factory=dict)

    @property
    def steps(self) -> list[int]:
        return sorted(self.values)


@dataclass
class EigenvectorCentrality:
    """L2-normalized nonnegative principal-eigenvector scores.

    defined is False for edgeless graphs (all scores zero). degenerate marks
    a spectral gap below 1e-6, where the score split between tied components
    is decided only by the iteration's arithmetic.
    """

    values: np.ndarray
    defined: bool
    iterations: int = 0
    residual: float = 0.0
    degenerate: bool = False


@dataclass
class CorrelationMap:
    """Windowed two-time Pearson correlations between two traces.

    matrix[i, j] correlates trace_a over [a_starts[i], a_starts[i]+w-1] with
    trace_b over [b_starts[j], ...]; undefined entries (zero-variance
    windows) hold NaN.
    """

    matrix: np.ndarray
    window: int
    a_starts: np.ndarray
    b_starts: np.ndarray
    pair: tuple[int, int] | None = None


def _as_symmetric(adj) -> np.ndarray:
    a = np.asarray(adj, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("adjacency must be a square matrix")
    if a.size and not np.allclose(a, a.T):
        raise ValueError("adjacency must be symmetric")
    return a


def spectrum_summary(adj) -> SpectrumSummary:
    a = _as_symmetric(adj)
    n = a.shape[0]
    if n == 0:
        return SpectrumSummary(np.empty(0), 0)
    ev = np.linalg.eigvalsh(a)[::-1]
    return SpectrumSummary(ev, n)


def regularity_difference(adj) -> float:
    """|sum of squared eigenvalues - n * largest eigenvalue|.

    Zero exactly for regular graphs; the squared-eigenvalue sum equals twice
    the edge count, which tests use as a cross-check.
    """
    s = spectrum_summary(adj)
    if s.n == 0:
        return 0.0
    return abs(float((s.eigenvalues**2).sum()) - s.n * s.lambda_max)


def eigenvector_centrality(adj, tol: float = 1e-10,
                           max_iter: int = 100_000) -> EigenvectorCentrality:
    """Power iteration on A + I (the shift keeps bipartite spectra from
    oscillating) with a deterministic all-ones start vector."""
    a = _as_symmetric(adj)
    n = a.shape[0]
    if n == 0:
        return EigenvectorCentrality(np.empty(0), defined=False)
    if not a.any():
        return EigenvectorCentrality(np.zeros(n), defined=False)

    v = np.ones(n) / math.sqrt(n)
    shifted = a + np.eye(n)
    lam = 0.0
    residual = math.inf
    for it in range(1, max_iter + 1):
        w = shifted @ v
        norm = np.linalg.norm(w)
        v = w / norm
        lam = float(v @ (a @ v))
        residual = float(np.max(np.abs(a @ v - lam * v)))
        if residual <= tol:
            break
    else:
        raise ConvergenceError(residual, max_iter)

    if v.sum() < 0:
        v = -v
    v = np.where(np.abs(v) < tol, np.maximum(v, 0.0), v)

    # Estimate the runner-up eigenvalue by deflated iteration to flag
    # near-ties of lambda_max (ill-conditioned component splits).
    u = np.ones(n) / math.sqrt(n)
    u -= (u @ v) * v
    degenerate = False
    un = np.linalg.norm(u)
    if un > 1e-12:
        u /= un
        for _ in range(200):
            u = shifted @ u
            u -= (u @ v) * v
            un = np.linalg.norm(u)
            if un < 1e-300:
                break
            u /= un
        if un >= 1e-300:
            lam2 = float(u @ (a @ u))
            degenerate = lam - lam2 < 1e-6
    return EigenvectorCentrality(v, defined=True, iterations=it,
                                 residual=residual, degenerate=degenerate)


def degree_centrality(adj, normalized: bool = False) -> np.ndarray:
    a = _as_symmetric(adj)
    deg = a.sum(axis=1)
    if normalized and a.shape[0] > 1:
        deg = deg / (a.shape[0] - 1)
    return deg


def degree_distribution(adj) -> dict[int, int]:
    a = _as_symmetric(adj)
    degrees = a.sum(axis=1).astype(int)
    return dict(sorted(Counter(degrees.tolist()).items()))


def ec_time_trace(tng, tol: float = 1e-10, max_iter: int = 100_000) -> MeasureSeries:
    """Eigenvector centrality per snapshot; vector length grows with the
    node count, so nodes have no entry before their injection step."""
    series = MeasureSeries("eigenvector_centrality")
    for t, a in enumerate(tng.adjacency):
        try:
            series.values[t] = eigenvector_centrality(a, tol=tol, max_iter=max_iter).values
        except ConvergenceError as exc:
            raise ConvergenceError(exc.residual, exc.iterations, step=t) from exc
    return series


def regularity_trace(tng) -> MeasureSeries:
    series = MeasureSeries("regularity_difference")
    for t, a in enumerate(tng.adjacency):
        series.values[t] = regularity_difference(a)
    return series


def degree_distribution_trace(tng) -> MeasureSeries:
    series = MeasureSeries("degree_distribution")
    for t, a in enumerate(tng.adjacency):
        series.values[t] = degree_distribution(a)
    return series


def node_trace(series: MeasureSeries, node_id: int):
    """Extract one node's scalar trace from a per-node vector series.

    Returns (first_step, values) covering the contiguous steps at which the
    node exists.
    """
    steps = [t for t in series.steps if len(series.values[t]) >= node_id]
    if not steps:
        raise ValueError(f"node {node_id} never appears in series {series.name!r}")
    values = np.array([series.values[t][node_id - 1] for t in steps], dtype=float)
    return steps[0], values


def pearson(a, b) -> float:
    """Pearson correlation with expectations taken as arithmetic means.

    Returns NaN (the undefined marker, never 0) when either input has zero
    variance. Raises on length mismatch or fewer than two samples.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("series must be one-dimensional and equally long")
    if a.size < 2:
        raise ValueError("series must contain at least two samples")
    if np.all(a == a[0]) or np.all(b == b[0]):
        return UNDEFINED
    ma = a.mean()
    mb = b.mean()
    cov = (a * b).mean() - ma * mb
    var_a = (a * a).mean() - ma * ma
    var_b = (b * b).mean() - mb * mb
    if var_a <= 0 or var_b <= 0:
        return UNDEFINED
    return float(np.clip(cov / math.sqrt(var_a * var_b), -1.0, 1.0))


def time_lag_correlation(trace_a, trace_b, window: int,
                         pair: tuple[int, int] | None = None) -> CorrelationMap:
    """Correlate every length-`window` segment of trace_a against every
    segment of trace_b; entry [i, j] pairs the windows starting at i and j."""
    a = np.asarray(trace_a, dtype=float)
    b = np.asarray(trace_b, dtype=float)
    if window < 2:
        raise ValueError("window must be >= 2")
    if window > a.size or window > b.size:
        raise ValueError("window exceeds trace length")
    na = a.size - window + 1
    nb = b.size - window + 1
    out = np.empty((na, nb))
    for i in range(na):
        wa = a[i:i + window]
        for j in range(nb):
            out[i, j] = pearson(wa, b[j:j + window])
    return CorrelationMap(out, window, np.arange(na), np.arange(nb), pair)
