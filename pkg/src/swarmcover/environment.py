"""Simulation world: bounded 2D region, impenetrable obstacles, inlet, and
the Gaussian perception-noise model.

Obstacles block both movement and line of sight. All geometric predicates
treat obstacle interiors as forbidden; boundaries count as free space.
"""

import math
from dataclasses import dataclass, field

import numpy as np

Point = tuple[float, float]


@dataclass(frozen=True)
class RectObstacle:
    """Axis-aligned rectangle, interior forbidden."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise ValueError(f"rectangle has no area: {self}")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)

    def contains_interior(self, x, y):
        """Strict interior test; works on scalars or numpy arrays."""
        return (x > self.x0) & (x < self.x1) & (y > self.y0) & (y < self.y1)


@dataclass(frozen=True)
class CircleObstacle:
    """Circular obstacle, interior forbidden."""

    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError(f"circle has no area: {self}")

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        return (self.cx - self.r, self.cy - self.r, self.cx + self.r, self.cy + self.r)

    def contains_interior(self, x, y):
        return (x - self.cx) ** 2 + (y - self.cy) ** 2 < self.r**2


Obstacle = RectObstacle | CircleObstacle


@dataclass(frozen=True)
class Environment:
    """Immutable description of the deployment region.

    width/height span the region [0, width] x [0, height]; the inlet is where
    new nodes enter; noise_deviation is the std dev of the Gaussian offsets
    applied to perceived neighbor positions (0 disables noise).
    """

    width: float
    height: float
    inlet: Point
    obstacles: tuple[Obstacle, ...] = ()
    noise_deviation: float = 0.0

    def __post_init__(self):
        if not (self.width > 0 and self.height > 0):
            raise ValueError("region width and height must be positive")
        if self.noise_deviation < 0:
            raise ValueError("noise_deviation must be >= 0")
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        ix, iy = self.inlet
        if not (0 <= ix <= self.width and 0 <= iy <= self.height):
            raise ValueError(f"inlet {self.inlet} outside region bounds")
        for ob in self.obstacles:
            bx0, by0, bx1, by1 = ob.bounds
            if bx0 < 0 or by0 < 0 or bx1 > self.width or by1 > self.height:
                raise ValueError(f"obstacle {ob} extends outside region bounds")
            if bool(ob.contains_interior(ix, iy)):
                raise ValueError(f"inlet {self.inlet} lies inside obstacle {ob}")

    def in_free_space(self, x, y):
        """True where (x, y) is inside bounds and outside all obstacle interiors."""
        ok = (x >= 0) & (x <= self.width) & (y >= 0) & (y <= self.height)
        for ob in self.obstacles:
            ok = ok & ~ob.contains_interior(x, y)
        return ok

    def obstacles_near(self, x: float, y: float, radius: float) -> list[Obstacle]:
        """Obstacles whose bounding box intersects the disk of given radius."""
        out = []
        for ob in self.obstacles:
            bx0, by0, bx1, by1 = ob.bounds
            dx = max(bx0 - x, 0.0, x - bx1)
            dy = max(by0 - y, 0.0, y - by1)
            if dx * dx + dy * dy <= radius * radius:
                out.append(ob)
        return out


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean Gaussian perturbation source; noise power N_o = 2 sigma^2."""

    sigma: float
    mu: float = 0.0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")

    @property
    def noise_power(self) -> float:
        return 2.0 * self.sigma**2


def sample_noise(model: NoiseModel, rng) -> tuple[float, float]:
    """Draw one 2D offset with independent N(mu, sigma) coordinates.

    Uses the Box-Muller transform over exactly two uniform draws from `rng`
    (any object with a .random() method, e.g. random.Random), so streams are
    reproducible from the seed alone. sigma == 0 consumes no draws and
    returns the exact zero vector.
    """
    if model.sigma == 0.0:
        return (model.mu, model.mu)
    u1 = 1.0 - rng.random()  # (0, 1]: keeps log finite
    u2 = rng.random()
    r = model.sigma * math.sqrt(-2.0 * math.log(u1))
    a = 2.0 * math.pi * u2
    return (model.mu + r * math.cos(a), model.mu + r * math.sin(a))


# ---------------------------------------------------------------------------
# segment-vs-obstacle predicates
# ---------------------------------------------------------------------------

_EPS_PARAM = 1e-12


def _segment_circle_entry(p, v, ob: CircleObstacle):
    """Smallest t in [0,1] where segment p + t*v enters the circle interior,
    or None. Assumes p is not strictly inside."""
    a = v[0] * v[0] + v[1] * v[1]
    if a == 0.0:
        return None
    wx, wy = p[0] - ob.cx, p[1] - ob.cy
    b = 2.0 * (v[0] * wx + v[1] * wy)
    c = wx * wx + wy * wy - ob.r * ob.r
    disc = b * b - 4.0 * a * c
    if disc <= 0.0:  # miss or tangency: no interior crossing
        return None
    sq = math.sqrt(disc)
    t_in = (-b - sq) / (2.0 * a)
    t_out = (-b + sq) / (2.0 * a)
    if t_out <= _EPS_PARAM or t_in >= 1.0:
        return None
    return max(t_in, 0.0)


def _segment_rect_entry(p, v, ob: RectObstacle):
    """Smallest t in [0,1] where the segment enters the open rectangle, or None."""
    t0, t1 = 0.0, 1.0
    for axis, (lo, hi) in ((0, (ob.x0, ob.x1)), (1, (ob.y0, ob.y1))):
        d = v[axis]
        s = p[axis]
        if d == 0.0:
            if not (lo <= s <= hi):
                return None
            continue
        ta = (lo - s) / d
        tb = (hi - s) / d
        if ta > tb:
            ta, tb = tb, ta
        t0 = max(t0, ta)
        t1 = min(t1, tb)
        if t1 - t0 <= _EPS_PARAM:
            return None
    # Reject grazing contact: midpoint of the clipped span must be interior.
    tm = 0.5 * (t0 + t1)
    if not ob.contains_interior(p[0] + tm * v[0], p[1] + tm * v[1]):
        return None
    return t0


def _segment_entry(p, v, ob: Obstacle):
    if isinstance(ob, CircleObstacle):
        return _segment_circle_entry(p, v, ob)
    return _segment_rect_entry(p, v, ob)


def line_of_sight(p: Point, q: Point, env: Environment) -> bool:
    """True iff the segment pq crosses no obstacle interior."""
    v = (q[0] - p[0], q[1] - p[1])
    for ob in env.obstacles:
        if _segment_entry(p, v, ob) is not None:
            return False
    return True


def blocked_paths(starts, ends, obstacles) -> np.ndarray:
    """Vectorized obstruction test for many segments at once.

    starts/ends are broadcastable (..., 2) arrays; returns a boolean array of
    the broadcast shape, True where the segment crosses an obstacle interior.
    """
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    v = ends - starts
    shape = v.shape[:-1]
    blocked = np.zeros(shape, dtype=bool)
    if not obstacles:
        return blocked
    px, py = starts[..., 0], starts[..., 1]
    vx, vy = v[..., 0], v[..., 1]
    for ob in obstacles:
        if isinstance(ob, CircleObstacle):
            wx = ob.cx - px
            wy = ob.cy - py
            vv = vx * vx + vy * vy
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.clip(np.where(vv > 0, (wx * vx + wy * vy) / vv, 0.0), 0.0, 1.0)
            dx = wx - t * vx
            dy = wy - t * vy
            blocked |= dx * dx + dy * dy < ob.r * ob.r
        else:
            t0 = np.zeros(shape)
            t1 = np.ones(shape)
            ok = np.ones(shape, dtype=bool)
            for d, s, lo, hi in ((vx, px, ob.x0, ob.x1), (vy, py, ob.y0, ob.y1)):
                with np.errstate(divide="ignore", invalid="ignore"):
                    ta = (lo - s) / d
                    tb = (hi - s) / d
                enter = np.minimum(ta, tb)
                leave = np.maximum(ta, tb)
                par = d == 0.0
                inside = (s >= lo) & (s <= hi)
                enter = np.where(par, np.where(inside, -np.inf, np.inf), enter)
                leave = np.where(par, np.where(inside, np.inf, -np.inf), leave)
                t0 = np.maximum(t0, enter)
                t1 = np.minimum(t1, leave)
                ok &= ~(par & ~inside)
            ok &= t1 - t0 > _EPS_PARAM
            tm = 0.5 * (t0 + t1)
            mx = px + tm * vx
            my = py + tm * vy
            blocked |= ok & ob.contains_interior(mx, my)
    return blocked


def clamp_to_free_space(start: Point, target: Point, env: Environment,
                        eps_wall: float = 0.01) -> Point:
    """Farthest point along start->target reachable without crossing an
    obstacle interior or leaving the region, backed off by eps_wall.

    `start` must be in free space. Returns `start` unchanged for a degenerate
    segment or when the path is blocked immediately.
    """
    v = (target[0] - start[0], target[1] - start[1])
    length = math.hypot(v[0], v[1])
    if length == 0.0:
        return start

    t_stop = math.inf
    # region boundary exit
    for d, s, lo, hi in ((v[0], start[0], 0.0, env.width),
                         (v[1], start[1], 0.0, env.height)):
        if d > 0.0:
            t_stop = min(t_stop, (hi - s) / d)
        elif d < 0.0:
            t_stop = min(t_stop, (lo - s) / d)
    for ob in env.obstacles:
        t = _segment_entry(start, v, ob)
        if t is not None:
            t_stop = min(t_stop, t)
    if t_stop >= 1.0:
        return target
    dist = max(t_stop * length - eps_wall, 0.0)
    return (start[0] + v[0] / length * dist, start[1] + v[1] / length * dist)
