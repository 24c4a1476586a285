"""Projection bodies, zonoids and zonal Minkowski valuations.

Every operator returns support values for a batch of directions; the
``*_field`` helpers wrap them as :class:`~valugeo.bodies.SupportField`.

The valuation image of a polytope is evaluated against its area measures:
the surface area measure is atomic on the facet normals, and the mixed
area measure S(K, B, .) lives on the great-circle arcs joining the normals
of adjacent facets, with density half the edge length.
"""
from __future__ import annotations

import numpy as np

from .bodies import (Ball, ConvexBody, Ellipsoid, GeometryError, Polytope, SupportField,
                     _batch, _out, ball_polytope, minkowski_combine)
from .sphere import ZonalMeasure, as_grid, integrate_zonal, kernel_apply

ARC_NODES = 16


# ---------------------------------------------------------------------------
# zonoids

def zonoid_support(mu: ZonalMeasure, p: float, v, u) -> np.ndarray:
    """h(Z^mu_p(v), u), a function of u . v only."""
    s = np.einsum("...i,...i->...", np.asarray(u, float), np.asarray(v, float))
    return mu.zonoid_moment(np.clip(s, -1, 1), p) ** (1 / p)


def zonoid_support_direct(mu: ZonalMeasure, p: float, v, u) -> float:
    """Same quantity by rotated integration of |u . w|^p (oracle)."""
    u = np.asarray(u, float)
    val = integrate_zonal(lambda W: np.abs(W @ u) ** p, mu, v)
    return val ** (1 / p)


def _moment(mu: ZonalMeasure, p: float):
    return lambda s: mu.zonoid_moment(np.clip(s, -1, 1), p)


def _density_moment(mu: ZonalMeasure, p: float):
    atom = mu.atom_mass
    return lambda s: mu.zonoid_moment(np.clip(s, -1, 1), p) - atom * np.abs(s) ** p


# ---------------------------------------------------------------------------
# projection bodies

def proj_body_support(K: ConvexBody, i: int, U):
    """h(Pi_i K, u): area (i = 2) or half perimeter (i = 1) of the shadow on u^perp."""
    if i == 2:
        return K.shadow_area(U)
    if i == 1:
        return K.shadow_half_perimeter(U)
    raise GeometryError("projection bodies are implemented for i in {1, 2}")


def proj_body_support_measure(P: Polytope, i: int, U):
    """h(Pi_i P, u) = 1/2 int |u.v| dS_i(P, v), evaluated on the area measures."""
    U, single = _batch(U)
    if i == 2:
        d = P.data
        vals = np.abs(U @ d.normals.T) @ d.areas / 2
    elif i == 1:
        vals = _edge_arc_abs(P, U) / 2
    else:
        raise GeometryError("projection bodies are implemented for i in {1, 2}")
    return _out(vals, single)


def _arcs(P: Polytope):
    d = P.data
    n1 = d.normals[d.edge_facets[:, 0]]
    n2 = d.normals[d.edge_facets[:, 1]]
    c = np.clip(np.einsum("ij,ij->i", n1, n2), -1, 1)
    theta = np.arccos(c)
    w = n2 - c[:, None] * n1
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    return n1, w, theta, d.edge_lengths / 2


def _abs_cos_antiderivative(x):
    k = np.floor((x + np.pi / 2) / np.pi)
    return 2 * k + np.sin(x) * (1 - 2 * (k % 2))


def _edge_arc_abs(P: Polytope, U: np.ndarray) -> np.ndarray:
    """sum_e (len_e / 2) int_{arc_e} |u . v| dphi, in closed form."""
    n1, w, theta, wt = _arcs(P)
    A = U @ n1.T
    B = U @ w.T
    R = np.hypot(A, B)
    phi0 = np.arctan2(B, A)
    arc = R * (_abs_cos_antiderivative(theta - phi0) - _abs_cos_antiderivative(-phi0))
    return arc @ wt


def _edge_arc_smooth(P: Polytope, U: np.ndarray, f) -> np.ndarray:
    """sum_e (len_e / 2) int_{arc_e} f(u . v) dphi by Gauss-Legendre on each arc."""
    n1, w, theta, wt = _arcs(P)
    x, wx = np.polynomial.legendre.leggauss(ARC_NODES)
    phi = theta[:, None] * (x + 1) / 2                      # (E, q)
    V = np.cos(phi)[..., None] * n1[:, None] + np.sin(phi)[..., None] * w[:, None]
    scale = wt * theta / 2
    out = np.empty(len(U))
    for k in range(0, len(U), 256):
        S = np.einsum("ni,eqi->neq", U[k:k + 256], V)
        out[k:k + 256] = (f(S) @ wx) @ scale
    return out


# ---------------------------------------------------------------------------
# smooth bodies: curvature densities of the area measures

def _ellipsoid_area_density(E: Ellipsoid, i: int, V: np.ndarray) -> np.ndarray:
    A = E.shape
    h = np.sqrt(np.einsum("ij,jk,ik->i", V, A, V))
    if i == 2:
        return np.linalg.det(A) / h**4
    AV = V @ A
    return (np.trace(A) / h - np.einsum("ij,ij->i", AV, AV) / h**3) / 2


def area_measure_integral(K: ConvexBody, i: int, U: np.ndarray, kernel, grid="acceptance",
                          atom_abs: float = 0.0) -> np.ndarray:
    """int kernel(u . v) dS_i(K, v) + atom_abs * int |u . v| dS_i(K, v).

    ``kernel`` must be smooth; the |u.v| part is handled exactly.
    """
    if isinstance(K, Ball):
        g = as_grid(grid)
        base = kernel_apply(np.ones(len(g)), g, U, kernel) if kernel is not None else np.zeros(len(U))
        return K.radius**i * (base + atom_abs * 2 * np.pi)
    if isinstance(K, Ellipsoid):
        g = as_grid(grid)
        out = np.zeros(len(U))
        if kernel is not None:
            out += kernel_apply(_ellipsoid_area_density(K, i, g.nodes), g, U, kernel)
        if atom_abs:
            out += atom_abs * 2 * proj_body_support(K, i, U)
        return out
    P = K.as_polytope()
    out = np.zeros(len(U))
    if i == 2:
        d = P.data
        S = U @ d.normals.T
        if kernel is not None:
            out += kernel(S) @ d.areas
        if atom_abs:
            out += atom_abs * (np.abs(S) @ d.areas)
        return out
    if i != 1:
        raise GeometryError("area measures are implemented for i in {1, 2}")
    if kernel is not None:
        out += _edge_arc_smooth(P, U, kernel)
    if atom_abs:
        out += atom_abs * _edge_arc_abs(P, U)
    return out


# ---------------------------------------------------------------------------
# Minkowski valuations

def phi_i_support(K: ConvexBody, mu: ZonalMeasure, i: int, U, grid="acceptance"):
    """h(Phi^mu_i K, u) = int h(Z^mu(u), v) dS_i(K, v)."""
    U, single = _batch(U)
    if i not in (1, 2):
        raise GeometryError("Phi^mu_i is implemented for i in {1, 2}")
    kernel = None if mu.is_discrete else _density_moment(mu, 1.0)
    if isinstance(K, Ball) and kernel is not None:
        vals = np.full(len(U), 2 * np.pi * mu.total_mass() * K.radius**i)
    else:
        vals = area_measure_integral(K, i, U, kernel, grid, atom_abs=mu.atom_mass)
    return _out(vals, single)


def phi_i_support_lemma(K: ConvexBody, mu: ZonalMeasure, i: int, u, **kw) -> float:
    """2 * int h(Pi_i K, w) d(mu_u)(w): the rotated-average representation."""
    return 2 * integrate_zonal(lambda W: proj_body_support(K, i, W), mu, u, **kw)


def phi_support(K: ConvexBody, mu: ZonalMeasure, U, grid="acceptance"):
    return phi_i_support(K, mu, 2, U, grid)


def _polytopal(K: ConvexBody) -> Polytope:
    if isinstance(K, Ball):
        return ball_polytope(K.radius)
    return K.as_polytope()


def phi_mixed_support(K1: ConvexBody, K2: ConvexBody, mu: ZonalMeasure, U, grid="acceptance"):
    """h(Phi^mu(K1, K2), u) by polarization over Minkowski sums.

    Balls enter through the inscribed icosphere approximant.
    """
    U, single = _batch(U)
    if K1 is K2:
        return _out(phi_i_support(K1, mu, 2, U, grid), single)
    P1, P2 = _polytopal(K1), _polytopal(K2)
    S = minkowski_combine([(1.0, P1), (1.0, P2)])
    vals = 0.5 * (phi_i_support(S, mu, 2, U, grid) - phi_i_support(P1, mu, 2, U, grid)
                  - phi_i_support(P2, mu, 2, U, grid))
    return _out(vals, single)


# ---------------------------------------------------------------------------
# L_p versions

def lp_proj_constant(p: float) -> float:
    """a_{3,p} = 1 / int |e . v|^p dv."""
    if p < 1:
        raise ValueError("p must be at least 1")
    return (p + 1) / (4 * np.pi)


def _lp_weights(K: ConvexBody, p: float):
    P = K.as_polytope()
    d = P.data
    if d.offsets.min() <= 0:
        raise GeometryError("origin is not interior")
    return d.normals, d.areas * d.offsets ** (1 - p)


def lp_surface_integral(K: ConvexBody, p: float, U, kernel, grid="acceptance") -> np.ndarray:
    """int kernel(u . v) dS_p(K, v) with dS_p = h^{1-p} dS."""
    if isinstance(K, Ball):
        g = as_grid(grid)
        return K.radius ** (3 - p) * kernel_apply(np.ones(len(g)), g, U, kernel)
    if isinstance(K, Ellipsoid):
        g = as_grid(grid)
        dens = _ellipsoid_area_density(K, 2, g.nodes) * K._support(g.nodes) ** (1 - p)
        return kernel_apply(dens, g, U, kernel)
    normals, weights = _lp_weights(K, p)
    return kernel(U @ normals.T) @ weights


def lp_proj_support(K: ConvexBody, p: float, U, grid="acceptance"):
    """h(Pi_p K, u) with h^p = a_{3,p} int |u . v|^p dS_p(K, v)."""
    U, single = _batch(U)
    a = lp_proj_constant(p)
    if isinstance(K, Ball):
        vals = np.full(len(U), K.radius ** ((3 - p) / p))
    else:
        vals = (a * lp_surface_integral(K, p, U, lambda s: np.abs(s) ** p, grid)) ** (1 / p)
    return _out(vals, single)


def phi_p_support(K: ConvexBody, mu: ZonalMeasure, p: float, U, grid="acceptance"):
    """h(Phi^mu_p K, u) with h^p = int h(Z^mu_p(u), v)^p dS_p(K, v)."""
    U, single = _batch(U)
    if isinstance(K, Ball):
        vals = np.full(len(U), (mu.total_mass() * K.radius ** (3 - p) / lp_proj_constant(p)) ** (1 / p))
    else:
        vals = lp_surface_integral(K, p, U, _moment(mu, p), grid) ** (1 / p)
    return _out(vals, single)


# ---------------------------------------------------------------------------
# fields and polar volumes

def phi_i_field(K, mu, i, grid="acceptance") -> SupportField:
    return SupportField(lambda U: phi_i_support(K, mu, i, U, grid), f"Phi^mu_{i} {K!r}", "phi_i")


def proj_field(K, i) -> SupportField:
    return SupportField(lambda U: proj_body_support(K, i, U), f"Pi_{i} {K!r}", "proj")


def phi_mixed_field(K1, K2, mu, grid="acceptance") -> SupportField:
    return SupportField(lambda U: phi_mixed_support(K1, K2, mu, U, grid), "Phi^mu(K1,K2)", "phi_mixed")


def phi_p_field(K, mu, p, grid="acceptance") -> SupportField:
    return SupportField(lambda U: phi_p_support(K, mu, p, U, grid), f"Phi^mu_{p} {K!r}", "phi_p")


def lp_proj_field(K, p, grid="acceptance") -> SupportField:
    return SupportField(lambda U: lp_proj_support(K, p, U, grid), f"Pi_{p} {K!r}", "proj_p")


def polar_volume(field, grid="acceptance") -> float:
    """Volume of the polar body: (1/3) int h^{-3} du."""
    g = as_grid(grid)
    h = field(g.nodes) if callable(field) else np.asarray(field, dtype=float)
    if np.any(h <= 0):
        raise GeometryError("support field must be positive")
    return float(g.weights @ h**-3) / 3
