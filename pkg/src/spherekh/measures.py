"""Signed measures on the sphere and their Newtonian potentials.

Measures are finite sums of atoms (signed) or positive quadrature nodes; the
Newtonian kernel is the harmonic one for R^(d+1), |x - y|^(1-d).  Degree-wise
information about an atomic measure is held zonally per atom: the degree-l
component of a unit atom against the addition-formula kernel has coefficient
one, so coefficient sequences live in ZonalCoefficients with a pole, and the
inward sweep onto a shell is a per-degree geometric rescaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geom import _validated_sphere_points
from .specfun import (
    harmonic_dim,
    kernel_coefficient,
    latitude_quadrature,
    legendre_table,
    surface_area,
)

__all__ = [
    "ShellConfig",
    "DiscreteSignedMeasure",
    "QuadratureMeasure",
    "ZonalCoefficients",
    "SingularityError",
    "sphere_surface_quadrature",
    "newtonian_potential",
    "potential_values",
    "potential_on_shell",
    "shell_norm",
    "conjugate_exponent",
    "zonal_coefficients_of_atom",
    "balayage_transform",
    "zonal_potential_profile",
    "shell_zonal_potential_profile",
]

_SINGULARITY_GUARD = 1e-12


class SingularityError(ValueError):
    """An evaluation point collides with an atom of the measure."""


@dataclass(frozen=True)
class ShellConfig:
    """Inner support radius r0 and evaluation shell radius r, 0 < r0 < r < 1."""

    r0: float
    r: float

    def __post_init__(self):
        if not 0.0 < self.r0 < self.r < 1.0:
            raise ValueError(
                f"shell radii must satisfy 0 < r0 < r < 1, got r0={self.r0}, r={self.r}"
            )


@dataclass
class DiscreteSignedMeasure:
    """Finite signed combination of unit-sphere atoms."""

    points: np.ndarray
    weights: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.points = _validated_sphere_points(self.points, "measure support")
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 1 or len(self.weights) != len(self.points):
            raise ValueError("weights must be a vector aligned with the atoms")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")

    @property
    def dim(self) -> int:
        return self.points.shape[1] - 1

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    @property
    def total_variation(self) -> float:
        return float(np.abs(self.weights).sum())

    def positive_part(self) -> "DiscreteSignedMeasure":
        keep = self.weights > 0
        if not np.any(keep):
            raise ValueError("measure has no positive part")
        return DiscreteSignedMeasure(self.points[keep], self.weights[keep], self.label)

    def negative_part(self) -> "DiscreteSignedMeasure":
        keep = self.weights < 0
        if not np.any(keep):
            raise ValueError("measure has no negative part")
        return DiscreteSignedMeasure(self.points[keep], -self.weights[keep], self.label)

    def scaled(self, factor: float) -> "DiscreteSignedMeasure":
        return DiscreteSignedMeasure(self.points, factor * self.weights, self.label)


@dataclass
class QuadratureMeasure:
    """Positive nodes-and-weights measure on the unit sphere.

    The surface-measure factory produces weights summing to the sphere area;
    `normalized` copies rescale to unit mass for probability surrogates.
    ``degree`` records the polynomial exactness when known.
    """

    nodes: np.ndarray
    weights: np.ndarray
    degree: int | None = None
    label: str = ""

    def __post_init__(self):
        self.nodes = _validated_sphere_points(self.nodes, "quadrature nodes")
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.ndim != 1 or len(self.weights) != len(self.nodes):
            raise ValueError("weights must be a vector aligned with the nodes")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights <= 0):
            raise ValueError("quadrature weights must be positive and finite")

    @property
    def dim(self) -> int:
        return self.nodes.shape[1] - 1

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def normalized(self) -> "QuadratureMeasure":
        return QuadratureMeasure(
            self.nodes, self.weights / self.mass, self.degree, self.label
        )


def _circle_nodes(count: int) -> tuple[np.ndarray, np.ndarray]:
    angles = 2.0 * math.pi * np.arange(count) / count
    nodes = np.column_stack([np.cos(angles), np.sin(angles)])
    weights = np.full(count, 2.0 * math.pi / count)
    return nodes, weights


def _product_nodes(dim: int, degree: int) -> tuple[np.ndarray, np.ndarray]:
    if dim == 1:
        return _circle_nodes(degree + 1)
    t, wt = latitude_quadrature(dim, degree // 2 + 1)
    sub_nodes, sub_w = _product_nodes(dim - 1, degree)
    s = np.sqrt(np.maximum(1.0 - t * t, 0.0))
    nodes = np.empty((len(t) * len(sub_nodes), dim + 1))
    weights = np.empty(len(t) * len(sub_nodes))
    m = len(sub_nodes)
    for i in range(len(t)):
        nodes[i * m : (i + 1) * m, :dim] = s[i] * sub_nodes
        nodes[i * m : (i + 1) * m, dim] = t[i]
        weights[i * m : (i + 1) * m] = wt[i] * sub_w
    return nodes, weights


def sphere_surface_quadrature(dim: int, degree: int) -> QuadratureMeasure:
    """Product quadrature on S^dim exact for polynomials up to ``degree``.

    Gauss nodes against the latitude weight times a uniform azimuth grid,
    applied recursively; weights sum to the surface area.
    """
    if dim < 2:
        raise ValueError(f"dimension must be at least 2, got {dim}")
    if degree < 0:
        raise ValueError(f"degree must be nonnegative, got {degree}")
    nodes, weights = _product_nodes(dim, degree)
    return QuadratureMeasure(nodes, weights, degree=degree)


def _support(measure) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(measure, DiscreteSignedMeasure):
        return measure.points, measure.weights
    if isinstance(measure, QuadratureMeasure):
        return measure.nodes, measure.weights
    raise TypeError(f"not a measure: {type(measure).__name__}")


def potential_values(measure, targets) -> np.ndarray:
    """Newtonian potential of the measure at each target point (vectorized).

    Targets may lie anywhere except within 1e-12 of an atom.
    """
    pts, w = _support(measure)
    d = pts.shape[1] - 1
    tg = np.atleast_2d(np.asarray(targets, dtype=float))
    if tg.shape[1] != d + 1:
        raise ValueError(f"targets have {tg.shape[1]} coordinates, expected {d + 1}")
    out = np.empty(len(tg))
    chunk = max(1, int(4_000_000 / max(len(pts), 1)))
    for start in range(0, len(tg), chunk):
        block = tg[start : start + chunk]
        # atoms are unit vectors: |x-p|^2 = |x|^2 + 1 - 2 x.p
        sq = (
            np.sum(block * block, axis=1)[:, None]
            + 1.0
            - 2.0 * block @ pts.T
        )
        np.maximum(sq, 0.0, out=sq)
        dist = np.sqrt(sq)
        nearest = dist.min(axis=1)
        if np.min(nearest) <= _SINGULARITY_GUARD:
            i = int(np.argmin(nearest))
            j = int(np.argmin(dist[i]))
            raise SingularityError(
                f"evaluation point {start + i} coincides with atom {j}"
            )
        out[start : start + chunk] = (dist ** (1 - d)) @ w
    return out


def newtonian_potential(measure, x) -> float:
    """Potential value at a single point."""
    return float(potential_values(measure, np.asarray(x, dtype=float)[None, :])[0])


def potential_on_shell(measure, cfg: ShellConfig, quad: QuadratureMeasure) -> np.ndarray:
    """Profile of U at r times each quadrature node (always off-support)."""
    return potential_values(measure, cfg.r * quad.nodes)


def conjugate_exponent(p: float) -> float:
    if p == math.inf:
        return 1.0
    if p == 1.0:
        return math.inf
    return p / (p - 1.0)


def shell_norm(profile, quad: QuadratureMeasure, cfg: ShellConfig, p: float) -> float:
    """L_p norm of a shell profile against the surface measure of r S^d.

    The surface element on the shell is r^d times the unit-sphere one, so
    finite-p norms carry the factor r^d inside the sum; p = inf is the max.
    """
    vals = np.asarray(profile, dtype=float)
    if vals.shape != quad.weights.shape:
        raise ValueError("profile and quadrature are not aligned")
    if p == math.inf:
        return float(np.max(np.abs(vals)))
    p = float(p)
    if p < 1.0:
        raise ValueError(f"norm exponent must be at least 1, got {p}")
    d = quad.dim
    return float(np.sum(quad.weights * cfg.r**d * np.abs(vals) ** p) ** (1.0 / p))


def _unit_pole(pole) -> np.ndarray:
    arr = np.asarray(pole, dtype=float)
    nrm = float(np.linalg.norm(arr))
    if abs(nrm - 1.0) > 1e-6:
        raise ValueError(f"pole must lie on the unit sphere, |p| = {nrm:.9g}")
    return arr / nrm


@dataclass
class ZonalCoefficients:
    """Per-degree coefficients of a rotationally reduced measure.

    Represents sum_l coeffs[l] * (N_l / area) * P_l(pole . zeta) where N_l is
    the degree-l harmonic count; a unit atom has all coefficients one.
    """

    pole: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        self.pole = _unit_pole(self.pole)
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.ndim != 1 or len(self.coeffs) == 0:
            raise ValueError("coefficients must be a nonempty vector")
        if not np.all(np.isfinite(self.coeffs)):
            raise ValueError("coefficients must be finite")

    @property
    def dim(self) -> int:
        return len(self.pole) - 1

    @property
    def max_degree(self) -> int:
        return len(self.coeffs) - 1


def zonal_coefficients_of_atom(pole, truncation: int) -> ZonalCoefficients:
    """Zonal normal form of a unit atom: every degree carries coefficient 1."""
    if truncation < 0:
        raise ValueError("truncation degree must be nonnegative")
    return ZonalCoefficients(pole, np.ones(truncation + 1))


def balayage_transform(zc: ZonalCoefficients, cfg: ShellConfig) -> ZonalCoefficients:
    """Sweep a unit-sphere measure onto the shell r S^d.

    Degree l picks up the factor r^(l + d - 1); the potential of the swept
    measure agrees with the original on the closed ball of radius r.
    """
    d = zc.dim
    l = np.arange(len(zc.coeffs))
    return ZonalCoefficients(zc.pole.copy(), zc.coeffs * cfg.r ** (l + d - 1))


def _zonal_sum(zc: ZonalCoefficients, factors: np.ndarray, directions) -> np.ndarray:
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    u = np.clip(dirs @ zc.pole, -1.0, 1.0)
    table = legendre_table(zc.dim, zc.max_degree, u)
    return factors @ table


def zonal_potential_profile(zc: ZonalCoefficients, radius: float, directions) -> np.ndarray:
    """Potential of the unit-sphere measure at radius * direction, radius < 1."""
    d = zc.dim
    area = surface_area(d)
    factors = np.array(
        [
            zc.coeffs[l] * kernel_coefficient(d, l, radius) * harmonic_dim(d, l) / area
            for l in range(len(zc.coeffs))
        ]
    )
    return _zonal_sum(zc, factors, directions)


def shell_zonal_potential_profile(
    zc: ZonalCoefficients, cfg: ShellConfig, directions
) -> np.ndarray:
    """Potential of a measure living on r S^d, evaluated on r S^d itself.

    The degree-l kernel factor on the common sphere is
    (d-1) * area / ((2l + d - 1) * r^(d-1)); convergence requires the
    coefficients to decay, which swept measures do geometrically.
    """
    d = zc.dim
    area = surface_area(d)
    l = np.arange(len(zc.coeffs))
    factors = (
        zc.coeffs
        * (d - 1)
        * area
        / ((2 * l + d - 1) * cfg.r ** (d - 1))
        * np.array([harmonic_dim(d, k) for k in range(len(zc.coeffs))])
        / area
    )
    return _zonal_sum(zc, factors, directions)
