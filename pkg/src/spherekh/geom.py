"""Point scatterings and equal-area partitions on the unit d-sphere.

The partition construction is the recursive zonal one: two polar caps plus
collars split into equal-area sub-regions of a lower-dimensional sphere.
Band boundaries come from inverting the cap-area function exactly, so all
regions have area ``surface_area(d) / n`` up to inverse-function roundoff.
Cell diameters are exact: the chord maximum over a band times a sub-region
is attained at a band corner, at the equator crossing, or at an interior
critical latitude, and all three candidate families are enumerated.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import betainc, betaincinv

from .specfun import surface_area

__all__ = [
    "Scattering",
    "Region",
    "Partition",
    "CirclePartition",
    "ZonalPartition",
    "MatchedPartition",
    "MergedPartition",
    "MeshNormEstimate",
    "ReductionResult",
    "PartitionMatchError",
    "unit_vector",
    "euclidean_distance",
    "random_points",
    "equal_area_partition",
    "partition_norm",
    "representatives",
    "match_partition_to_scattering",
    "mesh_norm",
    "reduce_scattering",
]

# points further than this from the sphere are treated as data errors,
# anything closer is renormalized silently
_UNIT_TOL = 1e-6
_MIN_SEPARATION = 1e-9


class PartitionMatchError(ValueError):
    """A partition and a scattering fail the one-point-per-region pairing."""


def unit_vector(v) -> np.ndarray:
    """Return v rescaled to unit length, rejecting near-zero vectors."""
    arr = np.asarray(v, dtype=float)
    nrm = float(np.linalg.norm(arr))
    if nrm < 1e-12:
        raise ValueError("cannot normalize a near-zero vector")
    return arr / nrm


def euclidean_distance(x, y) -> float:
    return float(np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)))


def random_points(dim: int, count: int, rng) -> np.ndarray:
    """Draw ``count`` independent uniform points on S^dim.

    ``rng`` is a numpy Generator or a seed for one.
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    pts = rng.normal(size=(count, dim + 1))
    norms = np.linalg.norm(pts, axis=1)
    while np.any(norms < 1e-8):
        bad = norms < 1e-8
        pts[bad] = rng.normal(size=(int(bad.sum()), dim + 1))
        norms = np.linalg.norm(pts, axis=1)
    return pts / norms[:, None]


def _validated_sphere_points(points, what: str) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] < 3:
        raise ValueError(f"{what} must be a 2-D array of points in R^(d+1) with d >= 2")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what} contains non-finite coordinates")
    norms = np.linalg.norm(arr, axis=1)
    off = np.abs(norms - 1.0)
    worst = int(np.argmax(off))
    if off[worst] > _UNIT_TOL:
        raise ValueError(
            f"{what}: point {worst} lies off the unit sphere "
            f"(|x| = {norms[worst]:.9g})"
        )
    # dividing by a norm that is already 1 to machine precision would
    # still flip low bits; skipping it makes re-validation idempotent
    scale = np.where(off <= 64 * np.finfo(float).eps, 1.0, norms)
    return arr / scale[:, None]


@dataclass
class Scattering:
    """A finite set of pairwise distinct points on S^dim.

    Points within 1e-6 of unit length are renormalized on construction;
    anything further off the sphere, and any coincident pair, is rejected.
    """

    points: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.points = _validated_sphere_points(self.points, "scattering")
        n = len(self.points)
        if n == 0:
            raise ValueError("scattering must contain at least one point")
        if n >= 2:
            dist, idx = cKDTree(self.points).query(self.points, k=2)
            nearest = dist[:, 1]
            i = int(np.argmin(nearest))
            if nearest[i] <= _MIN_SEPARATION:
                raise ValueError(
                    f"scattering points {i} and {int(idx[i, 1])} coincide "
                    f"(separation {nearest[i]:.3g})"
                )

    @property
    def dim(self) -> int:
        return self.points.shape[1] - 1

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class Region:
    """One partition cell: exact area, exact diameter, a point inside it."""

    area: float
    diameter: float
    representative: np.ndarray


class Partition:
    """Base interface: a list of regions plus a total membership function."""

    dim: int
    regions: list

    @property
    def size(self) -> int:
        return len(self.regions)

    def region_index(self, points) -> np.ndarray:
        raise NotImplementedError


def partition_norm(partition: Partition) -> float:
    """Largest region diameter."""
    return max(r.diameter for r in partition.regions)


def representatives(partition: Partition) -> np.ndarray:
    return np.array([r.representative for r in partition.regions])


def _arc_diameter(width: float) -> float:
    return 2.0 * math.sin(min(width, math.pi) / 2.0)


class CirclePartition(Partition):
    """S^1 split into ``count`` equal closed arcs, seam at angle zero.

    Used as the recursion base for collar subdivisions; region areas are arc
    lengths.  Shared arc endpoints belong to the lower-index arc.
    """

    dim = 1

    def __init__(self, count: int):
        if count < 1:
            raise ValueError("need at least one arc")
        self.count = count
        self.width = 2.0 * math.pi / count
        diam = _arc_diameter(self.width)
        mids = (np.arange(count) + 0.5) * self.width
        self.regions = [
            Region(self.width, diam, np.array([math.cos(a), math.sin(a)]))
            for a in mids
        ]

    def region_index(self, points) -> np.ndarray:
        arr = np.atleast_2d(np.asarray(points, dtype=float))
        phi = np.mod(np.arctan2(arr[:, 1], arr[:, 0]), 2.0 * math.pi)
        q = phi / self.width
        k = np.floor(q).astype(np.int64)
        exact = (q == k) & (k > 0)
        k[exact] -= 1
        np.clip(k, 0, self.count - 1, out=k)
        return k


def _band_diameter_sq(t_lo: float, t_hi: float, sub_diameter: float) -> float:
    """Exact squared diameter of {(s*xi, t): t in [t_lo, t_hi], xi in cell}.

    With u the cosine of the angle between the xi factors, the squared chord
    is 2 - 2 t_a t_b - 2 s_a s_b u, maximal at u = c = 1 - sub_diameter^2/2.
    The minimum of g = t_a t_b + s_a s_b c over the latitude rectangle sits
    at a corner, at the interior stationary point (0, 0), or (for c < 0) at
    an edge-critical latitude; all are enumerated.
    """
    c = 1.0 - sub_diameter * sub_diameter / 2.0
    s_lo = math.sqrt(max(1.0 - t_lo * t_lo, 0.0))
    s_hi = math.sqrt(max(1.0 - t_hi * t_hi, 0.0))
    corners = [(t_lo, s_lo), (t_hi, s_hi)]
    best = 0.0
    for ta, sa in corners:
        for tb, sb in corners:
            best = max(best, 2.0 - 2.0 * ta * tb - 2.0 * sa * sb * c)
    if t_lo <= 0.0 <= t_hi:
        best = max(best, 2.0 - 2.0 * c)
    if c < 0.0:
        for tt, ss in corners:
            radius = math.hypot(tt, c * ss)
            if radius > 0.0 and t_lo <= -tt / radius <= t_hi:
                best = max(best, 2.0 + 2.0 * radius)
    return min(best, 4.0)


def _embed(xi: np.ndarray, t: float) -> np.ndarray:
    s = math.sqrt(max(1.0 - t * t, 0.0))
    return np.concatenate([s * xi, [t]])


@dataclass
class _Band:
    t_hi: float
    t_lo: float
    count: int
    offset: int
    sub: Partition | None


class ZonalPartition(Partition):
    """Equal-area partition of S^dim into latitude bands of sub-cells.

    The polar axis is the last coordinate; bands are ordered north to south
    and shared latitude boundaries belong to the northern band, so every
    point of the sphere has exactly one region index.
    """

    def __init__(self, dim: int, bands: list):
        self.dim = dim
        self.bands = bands
        self.regions = []
        area = surface_area(dim)

        def frac(t: float) -> float:
            return float(betainc(dim / 2.0, dim / 2.0, (1.0 - t) / 2.0))

        for band in bands:
            band_area = area * (frac(band.t_lo) - frac(band.t_hi))
            cell_area = band_area / band.count
            t_mid = math.cos(
                (math.acos(band.t_hi) + math.acos(band.t_lo)) / 2.0
            )
            if band.sub is None:
                diam = math.sqrt(_band_diameter_sq(band.t_lo, band.t_hi, 2.0))
                if band.t_hi >= 1.0:
                    rep = np.zeros(dim + 1)
                    rep[dim] = 1.0
                elif band.t_lo <= -1.0:
                    rep = np.zeros(dim + 1)
                    rep[dim] = -1.0
                else:
                    xi = np.zeros(dim)
                    xi[0] = 1.0
                    rep = _embed(xi, t_mid)
                self.regions.append(Region(cell_area, diam, rep))
            else:
                for sub_region in band.sub.regions:
                    diam = math.sqrt(
                        _band_diameter_sq(band.t_lo, band.t_hi, sub_region.diameter)
                    )
                    rep = _embed(sub_region.representative, t_mid)
                    self.regions.append(Region(cell_area, diam, rep))

    def region_index(self, points) -> np.ndarray:
        arr = np.atleast_2d(np.asarray(points, dtype=float))
        if arr.shape[1] != self.dim + 1:
            raise ValueError(
                f"points have {arr.shape[1]} coordinates, expected {self.dim + 1}"
            )
        t = np.clip(arr[:, -1], -1.0, 1.0)
        lower = np.array([b.t_lo for b in self.bands])
        band_idx = np.searchsorted(-lower, -t, side="left")
        np.clip(band_idx, 0, len(self.bands) - 1, out=band_idx)
        out = np.empty(len(arr), dtype=np.int64)
        for j, band in enumerate(self.bands):
            mask = band_idx == j
            if not np.any(mask):
                continue
            if band.sub is None:
                out[mask] = band.offset
                continue
            xi = arr[mask, :-1]
            nrm = np.linalg.norm(xi, axis=1)
            safe = nrm > 1e-15
            xi = np.where(safe[:, None], xi / np.where(safe, nrm, 1.0)[:, None], 0.0)
            xi[~safe, 0] = 1.0
            out[mask] = band.offset + band.sub.region_index(xi)
        return out


def _cap_height(dim: int, fraction: float) -> float:
    # latitude t whose northern cap covers the given area fraction
    return 1.0 - 2.0 * float(betaincinv(dim / 2.0, dim / 2.0, fraction))


def _collar_counts(dim: int, n: int) -> list[int]:
    """Region counts for the collars between the two unit caps."""
    theta_c = math.acos(_cap_height(dim, 1.0 / n))
    ideal_angle = (surface_area(dim) / n) ** (1.0 / dim)
    n_collars = max(1, round((math.pi - 2.0 * theta_c) / ideal_angle))
    fitting = (math.pi - 2.0 * theta_c) / n_collars

    def cap_fraction(theta: float) -> float:
        return float(betainc(dim / 2.0, dim / 2.0, (1.0 - math.cos(theta)) / 2.0))

    edges = [cap_fraction(theta_c + i * fitting) for i in range(n_collars + 1)]
    ideal = [n * (edges[i + 1] - edges[i]) for i in range(n_collars)]
    counts: list[int] = []
    carry = 0.0
    for y in ideal:
        k = max(1, round(y + carry))
        carry += y - k
        counts.append(k)
    diff = (n - 2) - sum(counts)
    while diff != 0:
        if diff > 0:
            counts[counts.index(max(counts))] += 1
            diff -= 1
        else:
            big = max(c for c in counts if c > 1)
            counts[counts.index(big)] -= 1
            diff += 1
    return counts


def _sub_partition(dim: int, count: int) -> Partition | None:
    if count == 1:
        return None
    if dim - 1 == 1:
        return CirclePartition(count)
    return equal_area_partition(dim - 1, count)


def equal_area_partition(dim: int, n: int) -> ZonalPartition:
    """Partition S^dim into n regions of equal area and small diameter.

    Diameters scale as n^(-1/dim); every region carries its exact area,
    exact diameter, and an interior representative point.
    """
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    if n < 1:
        raise ValueError(f"need at least one region, got {n}")
    if n == 1:
        return ZonalPartition(dim, [_Band(1.0, -1.0, 1, 0, None)])
    if n == 2:
        return ZonalPartition(
            dim, [_Band(1.0, 0.0, 1, 0, None), _Band(0.0, -1.0, 1, 1, None)]
        )
    counts = [1] + _collar_counts(dim, n) + [1]
    cum = np.cumsum(counts)
    bounds = [_cap_height(dim, cum[j] / n) for j in range(len(counts) - 1)]
    bands = []
    offset = 0
    for j, count in enumerate(counts):
        t_hi = 1.0 if j == 0 else bounds[j - 1]
        t_lo = -1.0 if j == len(counts) - 1 else bounds[j]
        bands.append(_Band(t_hi, t_lo, count, offset, _sub_partition(dim, count)))
        offset += count
    return ZonalPartition(dim, bands)


class MatchedPartition(Partition):
    """A partition whose representatives were replaced by scattering points."""

    def __init__(self, base: Partition, reps: np.ndarray):
        self.base = base
        self.dim = base.dim
        self.regions = [
            Region(r.area, r.diameter, reps[i]) for i, r in enumerate(base.regions)
        ]

    def region_index(self, points) -> np.ndarray:
        return self.base.region_index(points)


def match_partition_to_scattering(partition: Partition, scattering: Scattering):
    """Pair each region with the unique scattering point it contains.

    Returns a copy of the partition whose representatives are the scattering
    points.  Raises PartitionMatchError naming the first region holding zero
    or several points.
    """
    if partition.size != len(scattering):
        raise PartitionMatchError(
            f"partition has {partition.size} regions but scattering has "
            f"{len(scattering)} points"
        )
    idx = partition.region_index(scattering.points)
    counts = np.bincount(idx, minlength=partition.size)
    bad = np.nonzero(counts != 1)[0]
    if len(bad):
        k = int(bad[0])
        raise PartitionMatchError(
            f"region {k} contains {int(counts[k])} scattering points, expected 1"
        )
    reps = np.empty_like(scattering.points)
    reps[idx] = scattering.points
    return MatchedPartition(partition, reps)


def _thread_count() -> int:
    raw = os.environ.get("SPHERE_KH_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _max_min_distance(samples: np.ndarray, points: np.ndarray) -> float:
    """max over samples of the distance to the nearest point; all unit rows."""
    tgt = np.asarray(points, dtype=float)

    def block_best(block: np.ndarray) -> float:
        dots = block @ tgt.T
        dists = np.sqrt(np.maximum(2.0 - 2.0 * dots.max(axis=1), 0.0))
        return float(dists.max())

    rows = max(1, int(4_000_000 / max(len(tgt), 1)))
    blocks = [samples[i : i + rows] for i in range(0, len(samples), rows)]
    threads = _thread_count()
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return max(pool.map(block_best, blocks))
    return max(block_best(b) for b in blocks)


@dataclass
class MeshNormEstimate:
    """Sampled covering radius with a rigorous two-sided enclosure.

    The true mesh norm lies in [value, value + resolution_error]: the sample
    maximum is a lower bound, and moving from any sphere point to its nearest
    sample cell center changes the distance-to-scattering by at most that
    cell's diameter.
    """

    value: float
    resolution_error: float

    @property
    def lower(self) -> float:
        return self.value

    @property
    def upper(self) -> float:
        return self.value + self.resolution_error


def _mesh_norm_from_samples(
    samples: np.ndarray, sample_error: float, points: np.ndarray
) -> MeshNormEstimate:
    return MeshNormEstimate(_max_min_distance(samples, points), sample_error)


def mesh_norm(scattering: Scattering, resolution: int | None = None) -> MeshNormEstimate:
    """Estimate the covering radius of a scattering.

    Samples the distance-to-nearest-point at the centers of an equal-area
    partition with ``resolution`` cells (default 16 per scattering point).
    """
    res = int(resolution) if resolution is not None else 16 * len(scattering)
    if res < 1:
        raise ValueError("resolution must be positive")
    grid = equal_area_partition(scattering.dim, res)
    samples = representatives(grid)
    return _mesh_norm_from_samples(samples, partition_norm(grid), scattering.points)


@dataclass
class ReductionResult:
    """Output of reduce_scattering; unpacks as (scattering, partition)."""

    scattering: Scattering
    partition: Partition
    mesh_norm_original: MeshNormEstimate
    mesh_norm_reduced: MeshNormEstimate
    partition_norm: float
    constant_ratio: float
    reference_ratio: float

    def __iter__(self):
        return iter((self.scattering, self.partition))


class MergedPartition(Partition):
    """Cells of a base partition merged into groups, one kept point each.

    Region areas are exact sums; diameters are certified upper bounds via
    the triangle inequality through cell representatives, capped at 2.
    """

    def __init__(self, base: Partition, groups: list[list[int]], reps: np.ndarray):
        self.base = base
        self.dim = base.dim
        self._assign = np.full(base.size, -1, dtype=np.int64)
        base_reps = representatives(base)
        self.regions = []
        for g, cells in enumerate(groups):
            for c in cells:
                self._assign[c] = g
            area = sum(base.regions[c].area for c in cells)
            diam = 0.0
            for a in cells:
                ra = base.regions[a]
                diam = max(diam, ra.diameter)
                for b in cells:
                    if b <= a:
                        continue
                    rb = base.regions[b]
                    gap = float(np.linalg.norm(base_reps[a] - base_reps[b]))
                    diam = max(diam, ra.diameter + gap + rb.diameter)
            self.regions.append(Region(area, min(diam, 2.0), reps[g]))

    def region_index(self, points) -> np.ndarray:
        return self._assign[self.base.region_index(points)]


def reduce_scattering(
    scattering: Scattering, resolution: int | None = None
) -> ReductionResult:
    """Thin a scattering to one point per cell of an equal-area partition.

    The cell count starts at the scattering size and is refined only until
    the partition norm is at most twice the (upper) mesh norm, so a
    well-separated scattering survives unreduced.  Empty cells are merged
    into the cell whose scattering point is nearest their center, keeping a
    partition matched to the kept points with certified diameters.
    """
    dim = scattering.dim
    pts = scattering.points
    res = int(resolution) if resolution is not None else 16 * len(scattering)
    grid = equal_area_partition(dim, res)
    samples = representatives(grid)
    sample_err = partition_norm(grid)
    est_orig = _mesh_norm_from_samples(samples, sample_err, pts)
    target = 2.0 * est_orig.upper

    n_cells = len(scattering)
    base = equal_area_partition(dim, n_cells)
    for _ in range(64):
        norm = partition_norm(base)
        if norm <= target:
            break
        factor = max((norm / target) ** dim, 1.3)
        n_cells = int(math.ceil(n_cells * factor)) + 1
        base = equal_area_partition(dim, n_cells)
    else:
        raise RuntimeError("partition refinement did not reach the target diameter")

    idx = base.region_index(pts)
    # unique returns cells in increasing order with the first (lowest-index)
    # point of each, which is the kept representative
    occupied, first = np.unique(idx, return_index=True)
    kept_points = pts[first]
    cell_to_group = {int(c): g for g, c in enumerate(occupied)}
    groups: list[list[int]] = [[int(c)] for c in occupied]
    base_reps = representatives(base)
    empty = np.setdiff1d(np.arange(base.size), occupied)
    for c in empty:
        dots = pts @ base_reps[c]
        host = int(idx[int(np.argmax(dots))])
        groups[cell_to_group[host]].append(int(c))
    merged = MergedPartition(base, groups, kept_points)
    reduced = Scattering(kept_points, label=scattering.label)
    est_red = _mesh_norm_from_samples(samples, sample_err, reduced.points)
    pnorm = partition_norm(merged)
    ratio = pnorm / max(est_orig.value, 1e-300)
    reference = 8.0 * dim * math.sqrt(2.0 * dim * (dim + 1))
    return ReductionResult(
        scattering=reduced,
        partition=merged,
        mesh_norm_original=est_orig,
        mesh_norm_reduced=est_red,
        partition_norm=pnorm,
        constant_ratio=ratio,
        reference_ratio=reference,
    )
