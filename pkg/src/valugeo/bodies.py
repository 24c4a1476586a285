"""Convex and star bodies in R^3.

Convex bodies expose an exact support function; star bodies expose a
positive radial function.  Balls and origin-centred ellipsoids are both.
All evaluators accept a single vector of shape ``(3,)`` or a batch of shape
``(N, 3)`` and return a float or an ``(N,)`` array accordingly.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import ConvexHull, QhullError
from scipy.special import ellipe, ellipk

from .sphere import SphericalGrid, Subspace, as_grid, circle_points, kappa, tangent_frames, unit

DIM = 3
ORIGIN_MARGIN = 1e-6
CIRCLE_NODES = 512
CONE_NODES = {"coarse": 8, "medium": 12, "acceptance": 20, "fine": 24}


class GeometryError(ValueError):
    """A body violates its invariants (degenerate, origin not interior, ...)."""


def _batch(U) -> tuple[np.ndarray, bool]:
    U = np.asarray(U, dtype=float)
    if U.shape[-1] != DIM:
        raise GeometryError(f"only dimension {DIM} is supported, got vectors of length {U.shape[-1]}")
    single = U.ndim == 1
    return np.atleast_2d(U), single


def _out(values: np.ndarray, single: bool):
    return float(values[0]) if single else values


def _check_dim(n: int) -> None:
    if n != DIM:
        raise GeometryError(f"only n = {DIM} is implemented (got n = {n})")


# ---------------------------------------------------------------------------
# base classes

class ConvexBody:
    """Compact convex set with non-empty interior."""

    kind = "convex"
    n = DIM

    def support(self, U):
        U, single = _batch(U)
        return _out(self._support(U), single)

    def _support(self, U: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def width(self, U) -> np.ndarray:
        U, single = _batch(U)
        return _out(self._support(U) + self._support(-U), single)

    def volume(self) -> float:
        raise NotImplementedError

    def shadow_area(self, U) -> np.ndarray:
        """Area of the projection onto u^perp."""
        U, single = _batch(U)
        return _out(self._shadow_area(U), single)

    def shadow_half_perimeter(self, U) -> np.ndarray:
        """First intrinsic volume (half perimeter) of the projection onto u^perp."""
        U, single = _batch(U)
        return _out(self._shadow_half_perimeter(U), single)

    def _shadow_area(self, U):
        return self.as_polytope()._shadow_area(U)

    def _shadow_half_perimeter(self, U):
        return self.as_polytope()._shadow_half_perimeter(U)

    def as_polytope(self) -> "Polytope":
        raise GeometryError(f"{type(self).__name__} has no polytope representation")

    def is_polytopal(self) -> bool:
        return False

    def rotate(self, R: np.ndarray) -> "ConvexBody":
        raise NotImplementedError

    def scale(self, r: float) -> "ConvexBody":
        return Combination(((r, self),))

    def to_json(self) -> dict:
        raise NotImplementedError


class StarBody:
    """Compact star-shaped set with positive continuous radial function."""

    kind = "star"
    n = DIM

    def radial(self, U):
        U, single = _batch(U)
        return _out(self._radial(U), single)

    def _radial(self, U: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def quadrature(self, grid="acceptance") -> SphericalGrid:
        """Spherical rule used to integrate functions of rho over S^2."""
        return as_grid(grid)

    def volume_star(self, grid="acceptance") -> float:
        g = self.quadrature(grid)
        return float(g.weights @ self._radial(g.nodes) ** 3) / 3

    def circle_power_integral(self, U, i: int) -> np.ndarray:
        """Integral of rho^i over the great circle u^perp (angle measure, total 2*pi)."""
        U, single = _batch(U)
        return _out(self._circle_power_integral(U, i), single)

    def _circle_power_integral(self, U: np.ndarray, i: int) -> np.ndarray:
        if i == 0:
            return np.full(len(U), 2 * np.pi)
        out = np.empty(len(U))
        for k in range(0, len(U), 256):
            pts = circle_points(U[k:k + 256], CIRCLE_NODES)
            vals = self._radial(pts.reshape(-1, 3)).reshape(pts.shape[:2]) ** i
            out[k:k + 256] = vals.mean(axis=1) * 2 * np.pi
        return out

    def section_area(self, U):
        """Area of the central section by u^perp."""
        U, single = _batch(U)
        return _out(self._circle_power_integral(U, 2) / 2, single)

    def chord(self, U):
        """Length of the central chord in direction u."""
        U, single = _batch(U)
        return _out(self._radial(U) + self._radial(-U), single)

    def rotate(self, R: np.ndarray) -> "StarBody":
        raise NotImplementedError

    def scale(self, r: float) -> "StarBody":
        return RadialCombination(1, ((r, self),))

    def to_json(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# polytopes

@dataclass(frozen=True)
class PolytopeData:
    """Facet and edge data of a polytope."""

    normals: np.ndarray      # (F, 3) outer unit normals
    offsets: np.ndarray      # (F,) support values h(K, n_j)
    areas: np.ndarray        # (F,)
    edge_lengths: np.ndarray  # (E,)
    edge_dirs: np.ndarray    # (E, 3) unit directions
    edge_facets: np.ndarray  # (E, 2) indices of the adjacent facets
    volume: float


def _merge_facets(hull, scale: float) -> np.ndarray:
    """Label hull triangles so that coplanar neighbours share a facet."""
    eqs = np.column_stack([hull.equations[:, :3], hull.equations[:, 3] / scale])
    S = len(eqs)
    src = np.repeat(np.arange(S), 3)
    dst = hull.neighbors.ravel()
    same = np.max(np.abs(eqs[src] - eqs[dst]), axis=1) < 1e-8
    graph = coo_matrix((np.ones(same.sum()), (src[same], dst[same])), shape=(S, S))
    return connected_components(graph, directed=False)[1]


class Polytope(ConvexBody):
    """Convex hull of finitely many points (Qhull)."""

    kind = "polytope"

    def __init__(self, vertices):
        pts = np.asarray(vertices, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != DIM:
            raise GeometryError("vertices must be an (N, 3) array")
        if len(pts) < 4:
            raise GeometryError("a full-dimensional polytope needs at least 4 vertices")
        try:
            hull = ConvexHull(pts)
        except QhullError as exc:
            raise GeometryError(f"degenerate polytope: {exc.args[0].splitlines()[0]}") from None
        if hull.volume <= 1e-12 * np.ptp(pts, axis=0).max() ** 3:
            raise GeometryError("degenerate polytope (zero volume)")
        self._hull = hull
        self.vertices = pts[hull.vertices]
        self.vertices.setflags(write=False)

    def __repr__(self) -> str:
        return f"Polytope({len(self.vertices)} vertices)"

    def _support(self, U):
        return (U @ self.vertices.T).max(axis=1)

    def is_polytopal(self) -> bool:
        return True

    def as_polytope(self) -> "Polytope":
        return self

    @cached_property
    def data(self) -> PolytopeData:
        hull = self._hull
        pts = hull.points
        diam = float(np.ptp(pts, axis=0).max())
        labels = _merge_facets(hull, diam)
        nf = labels.max() + 1
        tri = pts[hull.simplices]
        cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        tri_area = np.linalg.norm(cross, axis=1) / 2
        areas = np.bincount(labels, weights=tri_area, minlength=nf)
        normals = np.zeros((nf, 3))
        offsets = np.zeros(nf)
        np.add.at(normals, labels, hull.equations[:, :3] * tri_area[:, None])
        np.add.at(offsets, labels, -hull.equations[:, 3] * tri_area)
        normals /= areas[:, None]
        offsets /= areas
        nn = np.linalg.norm(normals, axis=1)
        normals /= nn[:, None]
        offsets /= nn
        lengths, dirs, pairs = [], [], []
        for s, nbrs in enumerate(hull.neighbors):
            for k, t in enumerate(nbrs):
                if t < s or labels[t] == labels[s]:
                    continue
                a, b = [v for j, v in enumerate(hull.simplices[s]) if j != k]
                e = pts[b] - pts[a]
                ln = np.linalg.norm(e)
                lengths.append(ln)
                dirs.append(e / ln)
                pairs.append((labels[s], labels[t]))
        vol = float(offsets @ areas) / 3
        return PolytopeData(normals, offsets, areas, np.array(lengths),
                            np.array(dirs).reshape(-1, 3), np.array(pairs, dtype=int).reshape(-1, 2), vol)

    def volume(self) -> float:
        return self.data.volume

    def surface_area(self) -> float:
        return float(self.data.areas.sum())

    def _shadow_area(self, U):
        d = self.data
        return np.abs(U @ d.normals.T) @ d.areas / 2

    def _shadow_half_perimeter(self, U):
        d = self.data
        sgn = np.sign(U @ d.normals.T)
        silhouette = np.abs(sgn[:, d.edge_facets[:, 0]] - sgn[:, d.edge_facets[:, 1]]) / 2
        proj = np.sqrt(np.clip(1 - (U @ d.edge_dirs.T) ** 2, 0, None))
        return (silhouette * proj) @ d.edge_lengths / 2

    def dihedral_angles(self) -> np.ndarray:
        """Exterior angles (between adjacent outer normals) at the edges."""
        d = self.data
        c = np.einsum("ij,ij->i", d.normals[d.edge_facets[:, 0]], d.normals[d.edge_facets[:, 1]])
        return np.arccos(np.clip(c, -1, 1))

    def translate(self, t) -> "Polytope":
        return Polytope(self.vertices + np.asarray(t, dtype=float))

    def rotate(self, R) -> "Polytope":
        return Polytope(self.vertices @ np.asarray(R).T)

    def scale(self, r: float) -> "Polytope":
        return Polytope(r * self.vertices)

    def linear_image(self, A) -> "Polytope":
        return Polytope(self.vertices @ np.asarray(A, dtype=float).T)

    def contains_origin(self, margin: float = ORIGIN_MARGIN) -> bool:
        return bool(self.data.offsets.min() > margin)

    def polar(self) -> "Polytope":
        d = self.data
        if not self.contains_origin():
            raise GeometryError("origin is not interior; polar body is unbounded")
        return Polytope(d.normals / d.offsets[:, None])

    def as_star(self) -> "StarPolytope":
        return StarPolytope(self)

    def to_json(self) -> dict:
        return {"kind": "polytope", "vertices": self.vertices.tolist()}


class Zonotope(ConvexBody):
    """Minkowski sum of centred segments [-g_j, g_j]."""

    kind = "zonotope"

    def __init__(self, generators):
        g = np.asarray(generators, dtype=float)
        if g.ndim != 2 or g.shape[1] != DIM or np.linalg.matrix_rank(g) < DIM:
            raise GeometryError("zonotope generators must span R^3")
        self.generators = g

    def _support(self, U):
        return np.abs(U @ self.generators.T).sum(axis=1)

    def is_polytopal(self) -> bool:
        return True

    @cached_property
    def _polytope(self) -> Polytope:
        pts = np.zeros((1, DIM))
        for g in self.generators:
            pts = _prune(np.concatenate([pts + g, pts - g]))
        return Polytope(pts)

    def as_polytope(self) -> Polytope:
        return self._polytope

    def volume(self) -> float:
        # sum over generator triples of |det|, times 2^3
        return 8.0 * sum(abs(np.linalg.det(self.generators[list(c)]))
                         for c in itertools.combinations(range(len(self.generators)), 3))

    def rotate(self, R) -> "Zonotope":
        return Zonotope(self.generators @ np.asarray(R).T)

    def scale(self, r: float) -> "Zonotope":
        return Zonotope(r * self.generators)

    def to_json(self) -> dict:
        return {"kind": "zonotope", "generators": self.generators.tolist()}


class Combination(ConvexBody):
    """Minkowski combination sum_j lambda_j K_j."""

    kind = "combination"

    def __init__(self, terms: Sequence[tuple[float, ConvexBody]]):
        terms = tuple((float(c), K) for c, K in terms)
        if not terms:
            raise GeometryError("empty Minkowski combination")
        if any(c < 0 for c, _ in terms) or not any(c > 0 for c, _ in terms):
            raise GeometryError("coefficients must be non-negative with one positive")
        self.terms = terms

    def _support(self, U):
        return sum(c * K._support(U) for c, K in self.terms)

    def is_polytopal(self) -> bool:
        return all(K.is_polytopal() for _, K in self.terms)

    @cached_property
    def _polytope(self) -> Polytope:
        return minkowski_combine(self.terms)

    def as_polytope(self) -> Polytope:
        if not self.is_polytopal():
            raise GeometryError("combination contains smooth bodies")
        return self._polytope

    def volume(self) -> float:
        return self.as_polytope().volume()

    def rotate(self, R) -> "Combination":
        return Combination(tuple((c, K.rotate(R)) for c, K in self.terms))

    def to_json(self) -> dict:
        return {"kind": "combination", "terms": [[c, K.to_json()] for c, K in self.terms]}


def _prune(pts: np.ndarray) -> np.ndarray:
    """Drop non-extreme points once the set is full-dimensional."""
    if len(pts) <= 64:
        return pts
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return pts
    return pts[hull.vertices]


def minkowski_combine(terms: Sequence[tuple[float, ConvexBody]]) -> Polytope:
    """Polytope lambda_1 K_1 + ... + lambda_m K_m (hull of all vertex sums)."""
    terms = list(terms)
    if not terms:
        raise GeometryError("empty Minkowski combination")
    if any(c < 0 for c, _ in terms) or not any(c > 0 for c, _ in terms):
        raise GeometryError("coefficients must be non-negative with one positive")
    pts = np.zeros((1, DIM))
    for c, K in terms:
        if c == 0:
            continue
        V = c * K.as_polytope().vertices
        pts = (pts[:, None, :] + V[None, :, :]).reshape(-1, DIM)
        pts = _prune(pts)
    return Polytope(pts)


# ---------------------------------------------------------------------------
# ellipsoids and balls

class Ellipsoid(ConvexBody, StarBody):
    """Origin-centred ellipsoid {x : x^T A^{-1} x <= 1}; h(u) = sqrt(u^T A u)."""

    kind = "ellipsoid"

    def __init__(self, shape):
        A = np.asarray(shape, dtype=float)
        if A.shape != (DIM, DIM):
            raise GeometryError("ellipsoid shape must be a 3x3 matrix")
        if not np.allclose(A, A.T, atol=1e-12 * np.abs(A).max()):
            raise GeometryError("ellipsoid shape matrix must be symmetric")
        if np.linalg.eigvalsh(A).min() <= 0:
            raise GeometryError("ellipsoid shape matrix must be positive definite")
        self.shape = A
        self.inverse = np.linalg.inv(A)

    @classmethod
    def from_axes(cls, axes: Sequence[float], rotation=None) -> "Ellipsoid":
        D = np.diag(np.asarray(axes, dtype=float) ** 2)
        if rotation is not None:
            R = np.asarray(rotation, dtype=float)
            D = R @ D @ R.T
        return cls(D)

    def __repr__(self) -> str:
        return f"Ellipsoid(axes={np.sqrt(np.linalg.eigvalsh(self.shape)).round(6).tolist()})"

    def _support(self, U):
        return np.sqrt(np.einsum("ij,jk,ik->i", U, self.shape, U))

    def _radial(self, U):
        return 1 / np.sqrt(np.einsum("ij,jk,ik->i", U, self.inverse, U))

    def volume(self) -> float:
        return kappa(3) * math.sqrt(np.linalg.det(self.shape))

    def volume_star(self, grid="acceptance") -> float:
        return StarBody.volume_star(self, grid)

    def _projected_shapes(self, U, M):
        a, b = tangent_frames(U)
        T = np.stack([a, b], axis=2)  # (N, 3, 2)
        return np.einsum("nik,ij,njl->nkl", T, M, T)

    def _shadow_area(self, U):
        return np.pi * math.sqrt(np.linalg.det(self.shape)) * np.sqrt(
            np.einsum("ij,jk,ik->i", U, self.inverse, U))

    def _shadow_half_perimeter(self, U):
        ev = np.linalg.eigvalsh(self._projected_shapes(U, self.shape))
        a, b = np.sqrt(ev[:, 1]), np.sqrt(ev[:, 0])
        return 2 * a * ellipe(1 - (b / a) ** 2)

    def _circle_power_integral(self, U, i):
        if i not in (1, 2):
            return StarBody._circle_power_integral(self, U, i)
        ev = np.linalg.eigvalsh(self._projected_shapes(U, self.inverse))
        if i == 2:
            return 2 * np.pi / np.sqrt(ev[:, 0] * ev[:, 1])
        return 4 / np.sqrt(ev[:, 1]) * ellipk(1 - ev[:, 0] / ev[:, 1])

    def rotate(self, R) -> "Ellipsoid":
        R = np.asarray(R, dtype=float)
        return Ellipsoid(R @ self.shape @ R.T)

    def scale(self, r: float) -> "Ellipsoid":
        return Ellipsoid(r**2 * self.shape)

    def linear_image(self, A) -> "Ellipsoid":
        A = np.asarray(A, dtype=float)
        return Ellipsoid(A @ self.shape @ A.T)

    def polar(self) -> "Ellipsoid":
        return Ellipsoid(self.inverse)

    def is_ball(self, tol: float = 1e-12) -> bool:
        ev = np.linalg.eigvalsh(self.shape)
        return bool(ev.max() - ev.min() <= tol * ev.max())

    def as_star(self) -> "Ellipsoid":
        return self

    def to_json(self) -> dict:
        return {"kind": "ellipsoid", "shape": self.shape.tolist()}


class Ball(Ellipsoid):
    """Centred Euclidean ball of radius r."""

    kind = "ball"

    def __init__(self, radius: float = 1.0):
        if not radius > 0:
            raise GeometryError("ball radius must be positive")
        self.radius = float(radius)
        super().__init__(self.radius**2 * np.eye(DIM))

    def __repr__(self) -> str:
        return f"Ball({self.radius:g})"

    def _support(self, U):
        return self.radius * np.linalg.norm(U, axis=1)

    def _radial(self, U):
        return self.radius / np.linalg.norm(U, axis=1)

    def volume(self) -> float:
        return kappa(3) * self.radius**3

    def _shadow_area(self, U):
        return np.full(len(U), np.pi * self.radius**2)

    def _shadow_half_perimeter(self, U):
        return np.full(len(U), np.pi * self.radius)

    def _circle_power_integral(self, U, i):
        return np.full(len(U), 2 * np.pi * self.radius**i)

    def rotate(self, R) -> "Ball":
        return self

    def scale(self, r: float) -> "Ball":
        return Ball(r * self.radius)

    def polar(self) -> "Ball":
        return Ball(1 / self.radius)

    def is_ball(self, tol: float = 1e-12) -> bool:
        return True

    def to_json(self) -> dict:
        return {"kind": "ball", "radius": self.radius}


# ---------------------------------------------------------------------------
# star bodies

def _cone_rule(P: Polytope, n: int) -> SphericalGrid:
    cache = P.__dict__.setdefault("_cone_rules", {})
    if n in cache:
        return cache[n]
    hull = P._hull
    x, wx = np.polynomial.legendre.leggauss(n)
    x, wx = (x + 1) / 2, wx / 2
    xi, eta = np.meshgrid(x, x, indexing="ij")
    w2 = np.outer(wx, wx) * xi
    tri = hull.points[hull.simplices]
    A, B, C = tri[:, 0], tri[:, 1], tri[:, 2]
    pts = (A[:, None, None] + xi[None, :, :, None] * ((B - A)[:, None, None]
           + eta[None, :, :, None] * (C - B)[:, None, None]))
    jac = np.linalg.norm(np.cross(B - A, C - B), axis=1)
    b = -hull.equations[:, 3]
    r = np.linalg.norm(pts, axis=-1)
    weights = (jac * b)[:, None, None] * w2[None] / r**3
    nodes = (pts / r[..., None]).reshape(-1, 3)
    rule = SphericalGrid(nodes, weights.ravel(), f"cone{n}", n, n)
    cache[n] = rule
    return rule


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


class StarPolytope(StarBody):
    """A polytope with the origin in its interior, viewed as a star body."""

    kind = "star_polytope"

    def __init__(self, polytope):
        P = polytope if isinstance(polytope, Polytope) else Polytope(polytope)
        if not P.contains_origin():
            raise GeometryError("star polytope must contain the origin in its interior")
        self.polytope = P

    def __repr__(self) -> str:
        return f"StarPolytope({len(self.polytope.vertices)} vertices)"

    def _radial(self, U):
        d = self.polytope.data
        dots = U @ d.normals.T
        with np.errstate(divide="ignore"):
            t = np.where(dots > 0, d.offsets / np.where(dots > 0, dots, 1.0), np.inf)
        return t.min(axis=1)

    def volume(self) -> float:
        return self.polytope.volume()

    def quadrature(self, grid="acceptance") -> SphericalGrid:
        """Facet-cone rule: collapsed Gauss-Legendre on every hull triangle.

        rho is smooth inside each cone over a facet, so integrands built from
        rho are integrated to near machine precision.
        """
        if isinstance(grid, SphericalGrid):
            grid = grid.resolution
        n = CONE_NODES.get(grid, 16)
        return _cone_rule(self.polytope, n)

    def section_polygon(self, u) -> np.ndarray:
        """Vertices (in the frame of tangent_frames(u)) of the central section, ccw."""
        q, _ = self._dual_points(np.asarray(u, dtype=float))
        return np.linalg.solve(np.stack([q, np.roll(q, -1, axis=0)], axis=1), np.ones((len(q), 2, 1)))[..., 0]

    def _dual_points(self, u):
        d = self.polytope.data
        a, b = tangent_frames(u[None])
        q = np.stack([d.normals @ a[0], d.normals @ b[0]], axis=1) / d.offsets[:, None]
        q = q[np.linalg.norm(q, axis=1) > 1e-14]
        hull = ConvexHull(q)
        return q[hull.vertices], hull

    def _circle_power_integral(self, U, i):
        if i not in (1, 2):
            return StarBody._circle_power_integral(self, U, i)
        out = np.empty(len(U))
        for k, u in enumerate(U):
            q, _ = self._dual_points(u)
            qn = np.roll(q, -1, axis=0)
            x = np.linalg.solve(np.stack([q, qn], axis=1), np.ones((len(q), 2, 1)))[..., 0]
            theta = np.arctan2(x[:, 1], x[:, 0])        # vertex between edge k and k+1
            phi = np.arctan2(q[:, 1], q[:, 0])
            d = 1 / np.linalg.norm(q, axis=1)
            a1 = _wrap(np.roll(theta, 1) - phi)
            a2 = _wrap(theta - phi)
            if i == 2:
                out[k] = np.sum(d**2 * (np.tan(a2) - np.tan(a1)))
            else:
                out[k] = np.sum(d * (np.arctanh(np.sin(a2)) - np.arctanh(np.sin(a1))))
        return out

    def rotate(self, R) -> "StarPolytope":
        return StarPolytope(self.polytope.rotate(R))

    def scale(self, r: float) -> "StarPolytope":
        return StarPolytope(self.polytope.scale(r))

    def to_json(self) -> dict:
        return {"kind": "star_polytope", "vertices": self.polytope.vertices.tolist()}


@dataclass(frozen=True)
class LegendreTerm:
    """coeff * P_degree(axis . u)."""

    axis: tuple
    degree: int
    coeff: float


class PerturbedBall(StarBody):
    """rho(u) = r0 (1 + eps * profile(u)) with profile a sum of zonal Legendre terms."""

    kind = "perturbed_ball"

    def __init__(self, r0: float, eps: float, profile: Sequence[LegendreTerm | dict] = ()):
        terms = []
        for t in profile:
            if isinstance(t, dict):
                t = LegendreTerm(tuple(t["axis"]), int(t["degree"]), float(t["coeff"]))
            axis = tuple(float(x) for x in unit(t.axis))
            terms.append(LegendreTerm(axis, int(t.degree), float(t.coeff)))
        if not r0 > 0:
            raise GeometryError("base radius must be positive")
        if not 0 <= abs(eps) < 1:
            raise GeometryError("perturbation amplitude must satisfy |eps| < 1")
        if sum(abs(t.coeff) for t in terms) > 1 + 1e-12:
            raise GeometryError("profile must be bounded by 1 (sum of |coeff| <= 1)")
        self.r0, self.eps, self.profile = float(r0), float(eps), tuple(terms)

    def __repr__(self) -> str:
        return f"PerturbedBall(r0={self.r0:g}, eps={self.eps:g}, {len(self.profile)} terms)"

    def profile_values(self, U) -> np.ndarray:
        U = np.atleast_2d(U)
        out = np.zeros(len(U))
        for t in self.profile:
            out += t.coeff * npleg.legval(U @ np.asarray(t.axis), [0] * t.degree + [1])
        return out

    def _radial(self, U):
        return self.r0 * (1 + self.eps * self.profile_values(U / np.linalg.norm(U, axis=1, keepdims=True)))

    def is_even(self) -> bool:
        return all(t.degree % 2 == 0 for t in self.profile)

    def hull_approximant(self, level: int = 2) -> Polytope:
        """Convex hull of boundary points above the vertices of an icosphere."""
        V = icosphere(level)
        return Polytope(self._radial(V)[:, None] * V)

    def rotate(self, R) -> "PerturbedBall":
        R = np.asarray(R, dtype=float)
        return PerturbedBall(self.r0, self.eps,
                             [LegendreTerm(tuple(R @ np.asarray(t.axis)), t.degree, t.coeff) for t in self.profile])

    def scale(self, r: float) -> "PerturbedBall":
        return PerturbedBall(r * self.r0, self.eps, self.profile)

    def to_json(self) -> dict:
        return {"kind": "perturbed_ball", "r0": self.r0, "eps": self.eps,
                "profile": [{"axis": list(t.axis), "degree": t.degree, "coeff": t.coeff} for t in self.profile]}


class RadialCombination(StarBody):
    """rho^i = sum_j lambda_j rho_j^i (radial sum of order i)."""

    kind = "radial_combination"

    def __init__(self, order: float, terms: Sequence[tuple[float, StarBody]]):
        terms = tuple((float(c), L) for c, L in terms)
        if not order > 0:
            raise GeometryError("radial combinations need a positive order")
        if not terms or any(c < 0 for c, _ in terms) or not any(c > 0 for c, _ in terms):
            raise GeometryError("coefficients must be non-negative with one positive")
        self.order, self.terms = float(order), terms

    def _radial(self, U):
        return sum(c * L._radial(U) ** self.order for c, L in self.terms) ** (1 / self.order)

    def quadrature(self, grid="acceptance") -> SphericalGrid:
        # balls add no kinks, so a single non-ball term's rule stays adapted
        rest = [L for _, L in self.terms if not isinstance(L, Ball)]
        if len(rest) == 1:
            return rest[0].quadrature(grid)
        return as_grid(grid)

    def _circle_power_integral(self, U, i):
        # order-1 sums of one body with balls expand binomially into exact pieces
        balls = [(c, L) for c, L in self.terms if isinstance(L, Ball)]
        rest = [(c, L) for c, L in self.terms if not isinstance(L, Ball)]
        if self.order != 1 or len(rest) > 1 or not float(i).is_integer() or i < 0:
            return StarBody._circle_power_integral(self, U, i)
        r = sum(c * L.radius for c, L in balls)
        if not rest:
            return np.full(len(U), 2 * np.pi * r**i)
        c0, L0 = rest[0]
        i = int(i)
        return sum(math.comb(i, j) * c0**j * r ** (i - j) * L0._circle_power_integral(U, j)
                   for j in range(i + 1))

    def rotate(self, R) -> "RadialCombination":
        return RadialCombination(self.order, tuple((c, L.rotate(R)) for c, L in self.terms))

    def to_json(self) -> dict:
        return {"kind": "radial_combination", "order": self.order,
                "terms": [[c, L.to_json()] for c, L in self.terms]}


def radial_sum(L1: StarBody, L2: StarBody, order: float = 1) -> RadialCombination:
    return RadialCombination(order, ((1.0, L1), (1.0, L2)))


# ---------------------------------------------------------------------------
# fields

@dataclass(frozen=True, eq=False)
class SupportField:
    """Support function of an operator image, evaluated lazily."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    description: str = ""
    tag: str = ""

    def __call__(self, U):
        U, single = _batch(U)
        vals = np.asarray(self.evaluator(U), dtype=float)
        if np.any(vals <= 0):
            raise GeometryError(f"non-positive value in field {self.description!r}")
        return _out(vals, single)

    def sample(self, grid="acceptance") -> np.ndarray:
        return self(as_grid(grid).nodes)


class RadialField(SupportField):
    """Radial function of an operator image, evaluated lazily."""


# ---------------------------------------------------------------------------
# functional interface

def support(K: ConvexBody, u):
    return K.support(u)


def radial(L: StarBody, u):
    return L.radial(u)


def polar_radial(K, u):
    """rho(K*, u) = 1 / h(K, u)."""
    h = np.asarray(K(u) if isinstance(K, SupportField) else K.support(u), dtype=float)
    if np.any(h <= 0):
        raise GeometryError("origin is not interior: non-positive support value")
    return 1 / h if h.ndim else float(1 / h)


def volume(K: ConvexBody) -> float:
    return K.volume()


def volume_star(L, grid="acceptance") -> float:
    g = as_grid(grid)
    rho = L(g.nodes) if isinstance(L, SupportField) else L.radial(g.nodes)
    return float(g.weights @ rho**3) / 3


def _subspace_vector(E, i: int | None):
    if isinstance(E, Subspace):
        if E.dim == 1:
            return E.frame[0], 1
        return E.normal(), 2
    return unit(E), i


def shadow_volume(K: ConvexBody, E, i: int | None = None, first_intrinsic: bool = False) -> float:
    """i-dimensional volume of the projection of K onto E.

    ``E`` is a Subspace, or a unit vector together with ``i`` (a line
    direction for i = 1, a plane normal for i = 2).  With
    ``first_intrinsic`` a planar shadow reports half its perimeter.
    """
    v, i = _subspace_vector(E, i)
    if i == 1:
        return float(K.width(v))
    if i != 2:
        raise GeometryError("shadow_volume supports i in {1, 2}")
    if first_intrinsic:
        return float(K.shadow_half_perimeter(v))
    if K.is_polytopal():
        P = K.as_polytope()
        a, b = tangent_frames(v[None])
        pts = P.vertices @ np.stack([a[0], b[0]], axis=1)
        return float(ConvexHull(pts).volume)
    return float(K.shadow_area(v))


def shadow_perimeter_2d(K: ConvexBody, normal) -> float:
    """Perimeter of the planar shadow via a 2-D hull (oracle for half perimeters)."""
    a, b = tangent_frames(unit(normal)[None])
    pts = K.as_polytope().vertices @ np.stack([a[0], b[0]], axis=1)
    hull = ConvexHull(pts)
    return float(hull.area)


def section_volume(L: StarBody, E, i: int | None = None) -> float:
    """i-dimensional volume of the central section of L by E."""
    v, i = _subspace_vector(E, i)
    if i == 1:
        return float(L.chord(v))
    if i != 2:
        raise GeometryError("section_volume supports i in {1, 2}")
    if isinstance(L, StarPolytope):
        x, y = L.section_polygon(v).T
        return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
    return float(L.section_area(v))


# ---------------------------------------------------------------------------
# polyhedral approximations of the sphere

def icosphere(level: int = 2) -> np.ndarray:
    """Vertices of the level-k subdivided icosahedron (12, 42, 162, 642, ...)."""
    g = (1 + 5**0.5) / 2
    V = [(-1, g, 0), (1, g, 0), (-1, -g, 0), (1, -g, 0), (0, -1, g), (0, 1, g),
         (0, -1, -g), (0, 1, -g), (g, 0, -1), (g, 0, 1), (-g, 0, -1), (-g, 0, 1)]
    verts = [np.array(v, float) / np.linalg.norm(v) for v in V]
    faces = ConvexHull(np.array(verts)).simplices.tolist()
    for _ in range(level):
        cache: dict = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                verts.append(unit(verts[i] + verts[j]))
                cache[key] = len(verts) - 1
            return cache[key]

        new = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new += [[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]
        faces = new
    return np.array(verts)


def ball_polytope(radius: float = 1.0, level: int = 4) -> Polytope:
    """Inscribed icosphere approximant of a ball."""
    return Polytope(radius * icosphere(level))


# ---------------------------------------------------------------------------
# JSON

def body_from_json(d: dict):
    kind = d.get("kind")
    if kind == "polytope":
        return Polytope(d["vertices"])
    if kind == "ellipsoid":
        if "axes" in d:
            return Ellipsoid.from_axes(d["axes"], d.get("rotation"))
        return Ellipsoid(d["shape"])
    if kind == "ball":
        return Ball(d.get("radius", 1.0))
    if kind == "zonotope":
        return Zonotope(d["generators"])
    if kind == "star_polytope":
        return StarPolytope(Polytope(d["vertices"]))
    if kind == "perturbed_ball":
        return PerturbedBall(d["r0"], d["eps"], d.get("profile", ()))
    if kind == "combination":
        return Combination([(c, body_from_json(t)) for c, t in d["terms"]])
    if kind == "radial_combination":
        return RadialCombination(d["order"], [(c, body_from_json(t)) for c, t in d["terms"]])
    raise GeometryError(f"unknown body kind {kind!r}")


def as_star(body) -> StarBody:
    """Star-body view of a body (polytopes must contain the origin)."""
    if isinstance(body, StarBody):
        return body
    if isinstance(body, Polytope):
        return StarPolytope(body)
    if body.is_polytopal():
        return StarPolytope(body.as_polytope())
    raise GeometryError(f"{type(body).__name__} has no star-body view")
