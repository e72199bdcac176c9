"""Sector geometry, random user deployment, and distance-gated pair formation.

A deployment is one sector's worth of users split into D2D pairs (both ends
within d0 of each other) and cellular users (everyone left over). Pairing is
a greedy double-index scan: deterministic for a given user order.
"""

import math
from dataclasses import dataclass

import numpy as np

from d2dsim import kernels

TWO_PI = 6.283185307179586


@dataclass(frozen=True)
class SectorGeometry:
    """Circular sector: apex at the BS, bisector azimuth orientation_deg."""

    radius_m: float
    arc_deg: float = 120.0
    orientation_deg: float = 60.0
    apex: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.radius_m <= 0:
            raise ValueError("radius_m must be > 0")
        if not 0 < self.arc_deg <= 360:
            raise ValueError("arc_deg must be in (0, 360]")

    @property
    def start_rad(self) -> float:
        return math.radians(self.orientation_deg - self.arc_deg / 2.0)

    @property
    def arc_rad(self) -> float:
        return math.radians(self.arc_deg)

    def contains(self, loc, tol: float = 1e-9) -> bool:
        dx = loc.x - self.apex[0]
        dy = loc.y - self.apex[1]
        if math.sqrt(dx * dx + dy * dy) > self.radius_m * (1.0 + tol):
            return False
        theta = math.atan2(dy, dx)
        t = math.fmod(theta - self.start_rad, TWO_PI)
        if t < 0.0:
            t += TWO_PI
        return t <= self.arc_rad + tol


@dataclass(frozen=True)
class UserLocation:
    x: float
    y: float


@dataclass(frozen=True)
class D2DPair:
    id: int
    tx: UserLocation
    rx: UserLocation

    @property
    def midpoint(self) -> tuple[float, float]:
        return ((self.tx.x + self.rx.x) * 0.5, (self.tx.y + self.rx.y) * 0.5)


@dataclass(frozen=True)
class CellularUser:
    id: int
    location: UserLocation


@dataclass(frozen=True)
class Deployment:
    sector: SectorGeometry
    pairs: tuple[D2DPair, ...]
    cellular: tuple[CellularUser, ...]
    n_total: int

    @property
    def d(self) -> int:
        return len(self.pairs)

    @property
    def c(self) -> int:
        return len(self.cellular)


def distance(a: UserLocation, b: UserLocation) -> float:
    dx = a.x - b.x
    dy = a.y - b.y
    return math.sqrt(dx * dx + dy * dy)


def deploy_users(sector: SectorGeometry, n: int, rng: np.random.Generator) -> list[UserLocation]:
    """Draw n points uniform over the sector's area.

    Radial coordinate is radius * sqrt(u) (area-uniform), azimuth uniform
    over the arc. One (n, 2) uniform draw per call, so the stream position
    is a pure function of n.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    draws = rng.random((n, 2))
    out_x = np.empty(n, dtype=np.float64)
    out_y = np.empty(n, dtype=np.float64)
    kernels.sector_points(
        np.ascontiguousarray(draws[:, 0]),
        np.ascontiguousarray(draws[:, 1]),
        sector.radius_m,
        sector.start_rad,
        sector.arc_rad,
        sector.apex[0],
        sector.apex[1],
        out_x,
        out_y,
    )
    return [UserLocation(float(out_x[i]), float(out_y[i])) for i in range(n)]


def form_pairs(users: list[UserLocation], d0: float, sector: SectorGeometry) -> Deployment:
    """Greedy pair formation over the user list, leftovers become cellular.

    Scan order is (x ascending, then y ascending, x < y): the first unpaired
    y within (0, d0] of an unpaired x pairs with it and both leave the pool.
    The zero-distance gate only matters for degenerate duplicate inputs.
    """
    if d0 <= 0:
        raise ValueError("d0 must be > 0")
    n = len(users)
    xs = np.fromiter((u.x for u in users), dtype=np.float64, count=n)
    ys = np.fromiter((u.y for u in users), dtype=np.float64, count=n)
    out_a = np.empty(n // 2 + 1, dtype=np.int64)
    out_b = np.empty(n // 2 + 1, dtype=np.int64)
    count = kernels.greedy_pairs(xs, ys, float(d0), out_a, out_b)

    pairs = []
    taken = set()
    for pid in range(count):
        a = int(out_a[pid])
        b = int(out_b[pid])
        pairs.append(D2DPair(pid, users[a], users[b]))
        taken.add(a)
        taken.add(b)
    cellular = []
    cid = 0
    for i in range(n):
        if i not in taken:
            cellular.append(CellularUser(cid, users[i]))
            cid += 1
    return Deployment(sector, tuple(pairs), tuple(cellular), n)


def pair_wedges(deployment: Deployment) -> np.ndarray:
    """Tri-sector wedge index of each pair's midpoint."""
    d = deployment.d
    mx = np.fromiter((p.midpoint[0] for p in deployment.pairs), dtype=np.float64, count=d)
    my = np.fromiter((p.midpoint[1] for p in deployment.pairs), dtype=np.float64, count=d)
    out = np.empty(d, dtype=np.int64)
    sector = deployment.sector
    kernels.sector_wedges(mx, my, sector.apex[0], sector.apex[1], sector.start_rad, out)
    return out
