"""Packing and covering numbers of finite point clouds, and dimension slopes.

Centers are always cloud points.  A delta-packing is a subset with pairwise
distances >= 2*delta (open balls disjoint); a delta-covering is a subset of
centers whose closed delta-balls contain every cloud point.  Exact counts are
computed by branch and bound and are only allowed up to EXACT_SIZE_LIMIT
points; greedy results are labeled as one-sided bounds, never as the true
packing or covering number.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SizeGuardError, ValidationError

EXACT_SIZE_LIMIT = 64

METRICS = ("euclidean", "total-variation")


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray              # (m, d)
    metric: str = "euclidean"
    provenance: str = ""

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.metric not in METRICS:
            raise ValidationError(f"unknown metric {self.metric!r}")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def distance_matrix(self) -> np.ndarray:
        p = self.points
        if self.metric == "euclidean":
            diff = p[:, None, :] - p[None, :, :]
            return np.sqrt((diff**2).sum(axis=2))
        return 0.5 * np.abs(p[:, None, :] - p[None, :, :]).sum(axis=2)


@dataclass(frozen=True)
class PackingResult:
    radius: float
    center_indices: tuple[int, ...]
    count: int
    exact: bool


@dataclass(frozen=True)
class CoveringResult:
    radius: float
    center_indices: tuple[int, ...]
    count: int
    exact: bool


@dataclass(frozen=True)
class DimensionEstimate:
    radii_grid: tuple[float, ...]
    log_counts: tuple[float, ...]
    slope: float
    slope_lower: float
    slope_upper: float
    fit_residual: float
    exact_counts: bool


def _greedy_packing(dist: np.ndarray, delta: float) -> list[int]:
    """Farthest-point maximal packing, seeded at index 0, ties by index."""
    m = dist.shape[0]
    chosen = [0]
    mindist = dist[0].copy()
    while True:
        far = int(np.argmax(mindist))
        if mindist[far] < 2 * delta:
            break
        chosen.append(far)
        mindist = np.minimum(mindist, dist[far])
    return sorted(chosen)


def _exact_packing(dist: np.ndarray, delta: float) -> list[int]:
    """Maximum subset with pairwise distance >= 2*delta (max independent set
    of the conflict graph), by branch and bound over bitmasks."""
    m = dist.shape[0]
    conflict = [0] * m
    for i in range(m):
        mask = 0
        for j in range(m):
            if j != i and dist[i, j] < 2 * delta:
                mask |= 1 << j
        conflict[i] = mask

    best: list[int] = []

    def grow(cand: int, picked: list[int]):
        nonlocal best
        if len(picked) + cand.bit_count() <= len(best):
            return
        if cand == 0:
            if len(picked) > len(best):
                best = picked.copy()
            return
        v = (cand & -cand).bit_length() - 1
        # branch: take v, then skip v
        picked.append(v)
        grow(cand & ~conflict[v] & ~(1 << v), picked)
        picked.pop()
        grow(cand & ~(1 << v), picked)

    grow((1 << m) - 1, [])
    return sorted(best)


def _greedy_covering(dist: np.ndarray, delta: float) -> list[int]:
    """Greedy set cover: repeatedly take the ball covering most uncovered
    points; ties by lowest center index."""
    m = dist.shape[0]
    balls = dist <= delta
    uncovered = np.ones(m, dtype=bool)
    chosen: list[int] = []
    while uncovered.any():
        gains = (balls & uncovered[None, :]).sum(axis=1)
        c = int(np.argmax(gains))
        if gains[c] == 0:
            raise ValidationError("point cannot be covered (degenerate ball)")
        chosen.append(c)
        uncovered &= ~balls[c]
    return sorted(chosen)


def _exact_covering(dist: np.ndarray, delta: float) -> list[int]:
    """Minimum set cover by branch and bound, bounded by the greedy solution."""
    m = dist.shape[0]
    ball = [0] * m
    for c in range(m):
        mask = 0
        for p in range(m):
            if dist[c, p] <= delta:
                mask |= 1 << p
        ball[c] = mask
    full = (1 << m) - 1
    best = _greedy_covering(dist, delta)
    best_len = len(best)

    # centers that could ever cover each point, for branching
    coverers = [[c for c in range(m) if ball[c] >> p & 1] for p in range(m)]

    def search(covered: int, chosen: list[int]):
        nonlocal best, best_len
        if covered == full:
            if len(chosen) < best_len:
                best, best_len = chosen.copy(), len(chosen)
            return
        if len(chosen) + 1 >= best_len:
            return
        # branch on the uncovered point with fewest available centers
        pivot, options = -1, None
        for p in range(m):
            if covered >> p & 1:
                continue
            opts = [c for c in coverers[p] if ball[c] & ~covered]
            if options is None or len(opts) < len(options):
                pivot, options = p, opts
            if len(opts) <= 1:
                break
        if not options:
            return
        for c in options:
            chosen.append(c)
            search(covered | ball[c], chosen)
            chosen.pop()

    search(0, [])
    return sorted(best)


def max_packing(cloud: PointCloud, delta: float, mode: str = "greedy") -> PackingResult:
    """Largest (greedy) or maximum (exact) delta-packing of the cloud.

    Greedy runs farthest-point sampling and is a certified lower bound on the
    packing number; its centers also form a valid 2*delta covering.  Exact mode
    is refused above EXACT_SIZE_LIMIT points.
    """
    if delta <= 0:
        raise ValidationError("radius must be positive")
    dist = cloud.distance_matrix()
    if mode == "greedy":
        centers, exact = _greedy_packing(dist, delta), False
    elif mode == "exact":
        if len(cloud) > EXACT_SIZE_LIMIT:
            raise SizeGuardError(f"exact packing limited to {EXACT_SIZE_LIMIT} points")
        centers, exact = _exact_packing(dist, delta), True
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    return PackingResult(delta, tuple(centers), len(centers), exact)


def min_covering(cloud: PointCloud, delta: float, mode: str = "greedy") -> CoveringResult:
    """Smallest found (greedy upper bound) or minimum (exact) delta-covering."""
    if delta <= 0:
        raise ValidationError("radius must be positive")
    dist = cloud.distance_matrix()
    if mode == "greedy":
        centers, exact = _greedy_covering(dist, delta), False
    elif mode == "exact":
        if len(cloud) > EXACT_SIZE_LIMIT:
            raise SizeGuardError(f"exact covering limited to {EXACT_SIZE_LIMIT} points")
        centers, exact = _exact_covering(dist, delta), True
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    return CoveringResult(delta, tuple(centers), len(centers), exact)


def estimate_dimension(cloud, radii: Sequence[float]) -> DimensionEstimate:
    """Least-squares slope of log2(covering count) against -log2(radius).

    `cloud` is either a PointCloud or a callable radius -> PointCloud.  The
    grid must hold at least 4 strictly decreasing radii spanning two octaves.
    slope_lower / slope_upper are the min / max two-point slopes between
    consecutive grid radii: finite-scale stand-ins for the lim inf / lim sup
    growth exponents.  Exact covering counts are used when every cloud on the
    grid is within the exact-size guard, greedy counts otherwise.
    """
    radii = [float(r) for r in radii]
    if len(radii) < 4:
        raise ValidationError("need at least 4 grid radii")
    if any(r2 >= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValidationError("radii must be strictly decreasing")
    if radii[0] / radii[-1] < 4:
        raise ValidationError("grid must span at least two octaves")

    clouds = [cloud(r) if callable(cloud) else cloud for r in radii]
    exact = all(len(c) <= EXACT_SIZE_LIMIT for c in clouds)
    counts = [min_covering(c, r, "exact" if exact else "greedy").count
              for c, r in zip(clouds, radii)]

    x = -np.log2(radii)
    y = np.log2(counts)
    if np.allclose(y, y[0]):
        slope, intercept = 0.0, float(y[0])
    else:
        slope, intercept = np.polyfit(x, y, 1)
    fit = slope * x + intercept
    two_point = [(y[i + 1] - y[i]) / (x[i + 1] - x[i]) for i in range(len(x) - 1)]
    return DimensionEstimate(
        radii_grid=tuple(radii),
        log_counts=tuple(float(v) for v in y),
        slope=float(slope),
        slope_lower=float(min(two_point)),
        slope_upper=float(max(two_point)),
        fit_residual=float(np.max(np.abs(fit - y))),
        exact_counts=exact,
    )


def cloud_from_channel(W, embedding: str = "sqrt", provenance: str = "") -> PointCloud:
    """Point cloud of a channel's output distributions.

    embedding="sqrt" gives the square-root rows under the Euclidean metric,
    embedding="raw" the rows themselves under total variation.
    """
    if embedding == "sqrt":
        return PointCloud(np.sqrt(W.matrix), "euclidean", provenance or "sqrt-output-set")
    if embedding == "raw":
        return PointCloud(W.matrix.copy(), "total-variation", provenance or "output-set")
    raise ValidationError(f"unknown embedding {embedding!r}")
