"""Atom-centered quadrature grids, integration and radial interpolation.

Every atom carries a tensor product of a radial rule on (0, rmax) and an
angular rule on the unit sphere. Radial weights integrate int_0^rmax f(r) dr;
angular weights are normalized to the *mean* over the sphere, so a full
volume integral of samples f[i, j] reads

    4*pi * sum_i w_i r_i^2 * sum_j eta_j f[i, j].
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .lebedev import LEBEDEV_DEGREE, lebedev_grid

__all__ = [
    "RadialGrid",
    "AngularGrid",
    "AtomicGridSet",
    "build_radial",
    "build_angular",
    "spherical_average",
    "integrate_atom",
    "interpolate_radial",
]


@dataclass(frozen=True)
class RadialGrid:
    nodes: np.ndarray    # strictly increasing, in (0, rmax)
    weights: np.ndarray  # for int_0^rmax f(r) dr
    rmax: float
    kind: str = "gauss_legendre"

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ValueError("need at least two radial nodes")
        if np.any(np.diff(nodes) <= 0):
            raise ValueError("radial nodes must be strictly increasing")
        if nodes[0] <= 0 or nodes[-1] >= self.rmax:
            raise ValueError("radial nodes must lie inside (0, rmax)")


@dataclass(frozen=True)
class AngularGrid:
    points: np.ndarray   # (n, 3) unit vectors
    weights: np.ndarray  # sum to 1 (mean over the sphere)
    kind: str            # "lebedev" | "axial"
    degree: int          # highest polynomial degree integrated exactly

    def __post_init__(self):
        norms = np.linalg.norm(self.points, axis=1)
        if np.max(np.abs(norms - 1.0)) > 1e-12:
            raise ValueError("angular nodes must be unit vectors")
        if abs(float(np.sum(self.weights)) - 1.0) > 1e-13:
            raise ValueError("angular weights must sum to 1")


@lru_cache(maxsize=32)
def _gauss_legendre(n):
    x, w = roots_legendre(n)
    return np.asarray(x), np.asarray(w)


def build_radial(n, rmax, kind="gauss_legendre"):
    """Radial quadrature with n nodes on (0, rmax).

    "gauss_legendre" integrates polynomials of degree <= 2n-1 exactly on
    [0, rmax]. "log" maps Gauss-Legendre nodes t in [0, 1] through
    r = rmax*(e^t - 1)/(e - 1) with Jacobian-adjusted weights, clustering
    nodes near the origin.
    """
    if n < 2:
        raise ValueError("need n >= 2 radial nodes")
    if rmax <= 0:
        raise ValueError("rmax must be positive")
    x, w = _gauss_legendre(n)
    if kind == "gauss_legendre":
        nodes = 0.5 * rmax * (x + 1.0)
        weights = 0.5 * rmax * w
    elif kind == "log":
        t = 0.5 * (x + 1.0)
        wt = 0.5 * w
        e1 = math.e - 1.0
        nodes = rmax * (np.exp(t) - 1.0) / e1
        weights = wt * rmax * np.exp(t) / e1
    else:
        raise ValueError(f"unknown radial kind {kind!r}")
    return RadialGrid(nodes=nodes, weights=weights, rmax=float(rmax), kind=kind)


def build_angular(order, kind="lebedev"):
    """Angular quadrature on the unit sphere.

    "lebedev" requires `order` to be one of the embedded point counts and is
    exact for spherical harmonics up to the tabulated degree. "axial" puts
    `order` Gauss-Legendre nodes in cos(theta) on a single meridian; it is
    only valid for integrands that are symmetric about the z axis, for which
    it is exact up to degree 2*order - 1.
    """
    if kind == "lebedev":
        points, weights = lebedev_grid(order)
        return AngularGrid(points=points, weights=weights, kind=kind,
                           degree=LEBEDEV_DEGREE[order])
    if kind == "axial":
        if order < 1:
            raise ValueError("axial grid needs at least one node")
        u, w = _gauss_legendre(order)
        sin_t = np.sqrt(np.clip(1.0 - u**2, 0.0, None))
        points = np.column_stack([sin_t, np.zeros_like(u), u])
        return AngularGrid(points=points, weights=0.5 * w, kind=kind,
                           degree=2 * order - 1)
    raise ValueError(f"unknown angular kind {kind!r}")


def spherical_average(values, angular):
    """Mean over the sphere of one value per angular node."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] != angular.weights.size:
        raise ValueError("one value per angular node required")
    return values @ angular.weights


def interpolate_radial(nodes, values, r_query, rmax=None):
    """Piecewise-linear radial interpolation with the grid tail rule.

    Constant w(r_1) on [0, r_1); linear between nodes; linear decay to zero
    between the last node and rmax; identically zero beyond rmax. With
    rmax=None, zero beyond the last node.
    """
    nodes = np.asarray(nodes, dtype=float)
    values = np.asarray(values, dtype=float)
    if nodes.shape != values.shape:
        raise ValueError("nodes and values must have matching shapes")
    r = np.asarray(r_query, dtype=float)
    if rmax is not None and rmax > nodes[-1]:
        nodes = np.append(nodes, rmax)
        values = np.append(values, 0.0)
    out = np.interp(r, nodes, values, left=values[0], right=0.0)
    return float(out) if np.isscalar(r_query) else out


class AtomicGridSet:
    """Per-atom radial x angular grids with cached density samples.

    Also caches, lazily, the inter-atom distance tables
    |R_a - R_b + r_i sigma_j| needed by stockholder weights.
    """

    def __init__(self, positions, radial, angular):
        self.positions = np.atleast_2d(np.asarray(positions, dtype=float))
        natom = self.positions.shape[0]
        self.radial = self._per_atom(radial, natom, RadialGrid)
        self.angular = self._per_atom(angular, natom, AngularGrid)
        self.samples = None
        self._rel_points = {}
        self._dist = {}

    @staticmethod
    def _per_atom(obj, natom, cls):
        if isinstance(obj, cls):
            return [obj] * natom
        obj = list(obj)
        if len(obj) != natom:
            raise ValueError("need one grid per atom")
        return obj

    @property
    def natom(self):
        return self.positions.shape[0]

    def points_rel(self, atom):
        """Grid points of atom's grid relative to its center, shape (nr, ns, 3)."""
        cached = self._rel_points.get(atom)
        if cached is None:
            r = self.radial[atom].nodes
            sigma = self.angular[atom].points
            cached = r[:, None, None] * sigma[None, :, :]
            self._rel_points[atom] = cached
        return cached

    def points_abs(self, atom):
        """Absolute grid points R_a + r_i sigma_j, shape (nr, ns, 3)."""
        return self.positions[atom][None, None, :] + self.points_rel(atom)

    def distances(self, a, b):
        """|R_a + r_i sigma_j - R_b| on atom a's grid, shape (nr, ns).

        For b == a this is just the radial node value, broadcast over angles.
        """
        key = (a, b)
        cached = self._dist.get(key)
        if cached is None:
            if a == b:
                nr = self.radial[a].nodes.size
                ns = self.angular[a].points.shape[0]
                cached = np.broadcast_to(self.radial[a].nodes[:, None], (nr, ns))
            else:
                diff = self.points_abs(a) - self.positions[b][None, None, :]
                cached = np.linalg.norm(diff, axis=-1)
            self._dist[key] = cached
        return cached

    def sample_density(self, rho):
        """Evaluate and cache rho at every grid point; rho maps (n,3) -> (n,)."""
        samples = []
        for a in range(self.natom):
            pts = self.points_abs(a)
            vals = np.asarray(rho(pts.reshape(-1, 3)), dtype=float).reshape(pts.shape[:2])
            if np.any(vals < 0):
                raise ValueError("density samples must be nonnegative")
            samples.append(vals)
        self.samples = samples
        return self

    def axis_aligned(self, tol=1e-10):
        """True when all atoms lie on the z axis (required for axial grids)."""
        return bool(np.all(np.abs(self.positions[:, :2]) < tol))


def integrate_atom(grids, atom, values):
    """4*pi sum_i w_i r_i^2 sum_j eta_j f[i, j] over one atom's grid."""
    radial = grids.radial[atom]
    angular = grids.angular[atom]
    f = np.asarray(values, dtype=float)
    if f.shape != (radial.nodes.size, angular.weights.size):
        raise ValueError(f"sample shape {f.shape} does not match grid")
    wr = 4.0 * math.pi * radial.weights * radial.nodes**2
    return float(wr @ (f @ angular.weights))
