"""Scalar functionals: mixed and dual mixed volumes, quermassintegrals,
affine and dual affine quermassintegrals, L_p mixed volumes."""
from __future__ import annotations

import math

import numpy as np

from .bodies import (Ball, ConvexBody, Ellipsoid, GeometryError, Polytope, StarBody, SupportField,
                     ball_polytope, minkowski_combine)
from .sphere import as_grid, grassmann_samples, kappa
from .valuations import _arcs, _ellipsoid_area_density

KAPPA3 = kappa(3)


def _polytopal(K: ConvexBody) -> Polytope:
    if isinstance(K, Ball):
        return ball_polytope(K.radius)
    return K.as_polytope()


def _eval_radial(F, V):
    if isinstance(F, StarBody):
        return F._radial(V)
    return np.asarray(F(V), dtype=float)


def _eval(F, V):
    if isinstance(F, ConvexBody):
        return F._support(V)
    if isinstance(F, StarBody):
        return F._radial(V)
    return np.asarray(F(V), dtype=float)


# ---------------------------------------------------------------------------
# mixed volumes

def mixed_volume(K1: ConvexBody, K2: ConvexBody, K3: ConvexBody) -> float:
    """V(K1, K2, K3) by inclusion-exclusion over volumes of Minkowski sums.

    Balls are replaced by the inscribed icosphere approximant.
    """
    if K1 is K2 is K3:
        return K1.volume()
    P = [_polytopal(K) for K in (K1, K2, K3)]

    def vol(*idx):
        return minkowski_combine([(1.0, P[i]) for i in idx]).volume()

    return (vol(0, 1, 2) - vol(0, 1) - vol(0, 2) - vol(1, 2) + P[0].volume() + P[1].volume()
            + P[2].volume()) / 6


def area_measure_apply(K1: ConvexBody, K2: ConvexBody, F, grid="acceptance") -> float:
    """int F(v) dS(K1, K2, v) for the mixed area measure of K1 and K2.

    Supported pairs: polytopes (atomic, by polarization of facet measures),
    a polytope with a ball (edge arcs), and a ball or ellipsoid with itself
    or with a ball (curvature densities on the grid).
    """
    if isinstance(K2, Ball) and not isinstance(K1, Ball):
        K1, K2 = K2, K1
    if isinstance(K1, Ball):
        r = K1.radius
        if isinstance(K2, Ellipsoid):
            g = as_grid(grid)
            dens = np.ones(len(g)) * K2.radius if isinstance(K2, Ball) else _ellipsoid_area_density(K2, 1, g.nodes)
            return r * float(g.weights @ (dens * _eval(F, g.nodes)))
        P = K2.as_polytope()
        n1, w, theta, wt = _arcs(P)
        x, wx = np.polynomial.legendre.leggauss(16)
        phi = theta[:, None] * (x + 1) / 2
        V = np.cos(phi)[..., None] * n1[:, None] + np.sin(phi)[..., None] * w[:, None]
        vals = _eval(F, V.reshape(-1, 3)).reshape(V.shape[:2])
        return r * float((vals @ wx) @ (wt * theta / 2))
    if isinstance(K1, Ellipsoid) or isinstance(K2, Ellipsoid):
        if K1 is not K2:
            raise GeometryError("mixed area measures of distinct smooth bodies are not supported")
        g = as_grid(grid)
        return float(g.weights @ (_ellipsoid_area_density(K1, 2, g.nodes) * _eval(F, g.nodes)))
    P1, P2 = K1.as_polytope(), K2.as_polytope()

    def facet_sum(P):
        d = P.data
        return float(d.areas @ _eval(F, d.normals))

    if P1 is P2:
        return facet_sum(P1)
    S = minkowski_combine([(1.0, P1), (1.0, P2)])
    return 0.5 * (facet_sum(S) - facet_sum(P1) - facet_sum(P2))


def mixed_volume_support(K1: ConvexBody, K2: ConvexBody, M, grid="acceptance") -> float:
    """V(K1, K2, M) = (1/3) int h(M, v) dS(K1, K2, v); M a body or a support field."""
    return area_measure_apply(K1, K2, M, grid) / 3


# ---------------------------------------------------------------------------
# quermassintegrals

def quermassintegrals(K: ConvexBody, grid="acceptance") -> tuple[float, float, float, float]:
    """(W_0, W_1, W_2, W_3) with W_i = V(K[3 - i], B[i])."""
    if isinstance(K, Ball):
        return tuple(KAPPA3 * K.radius ** (3 - i) for i in range(4))
    if isinstance(K, Ellipsoid):
        g = as_grid(grid)
        S = float(g.weights @ _ellipsoid_area_density(K, 2, g.nodes))
        W2 = float(g.weights @ K._support(g.nodes)) / 3
        return (K.volume(), S / 3, W2, KAPPA3)
    P = K.as_polytope()
    W2 = float(P.data.edge_lengths @ P.dihedral_angles()) / 6
    return (P.volume(), P.surface_area() / 3, W2, KAPPA3)


def intrinsic_volumes(K: ConvexBody, grid="acceptance") -> tuple[float, float, float, float]:
    """(V_0, ..., V_3) from kappa_{3-i} V_i = C(3, i) W_{3-i}."""
    W = quermassintegrals(K, grid)
    return tuple(math.comb(3, i) * W[3 - i] / kappa(3 - i) for i in range(4))


# ---------------------------------------------------------------------------
# dual mixed volumes

def _star_rule(bodies, grid):
    first = bodies[0]
    if all(b is first for b in bodies) and isinstance(first, StarBody):
        return first.quadrature(grid)
    return as_grid(grid)


def dual_mixed_volume(L1, L2, L3, grid="acceptance") -> float:
    """(1/3) int rho_1 rho_2 rho_3 du."""
    g = _star_rule([L1, L2, L3], grid)
    return float(g.weights @ (_eval_radial(L1, g.nodes) * _eval_radial(L2, g.nodes)
                              * _eval_radial(L3, g.nodes))) / 3


def dual_quermassintegrals(L, grid="acceptance") -> tuple[float, float, float, float]:
    """(W~_0, ..., W~_3) with W~_i = (1/3) int rho^(3 - i) du."""
    if isinstance(L, Ball):
        return tuple(KAPPA3 * L.radius ** (3 - i) for i in range(4))
    g = _star_rule([L], grid)
    rho = _eval_radial(L, g.nodes)
    return tuple(float(g.weights @ rho ** (3 - i)) / 3 for i in range(4))


def dual_quermass_grassmann(L: StarBody, i: int, grid="acceptance") -> float:
    """(kappa_3 / kappa_i) int V_i(L cap E) d nu_i(E), i in {1, 2}."""
    G = grassmann_samples(i, grid)
    if i == 1:
        vals = L.chord(G.directions)
    else:
        vals = L.section_area(G.directions)
    return KAPPA3 / kappa(i) * float(G.weights @ vals)


# ---------------------------------------------------------------------------
# affine quermassintegrals

def affine_quermassintegral(K: ConvexBody, i: int, grid="acceptance") -> float:
    """A_{3-i}(K) = (kappa_3 / kappa_i) (int V_i(K|E)^{-3} d nu_i(E))^{-1/3}.

    Conventions A_0 = V(K) (i = 3) and A_3 = kappa_3 (i = 0).
    """
    if i == 0:
        return KAPPA3
    if i == 3:
        return K.volume()
    if i not in (1, 2):
        raise GeometryError("affine quermassintegrals need i in {0, 1, 2, 3}")
    G = grassmann_samples(i, grid)
    shadows = K.width(G.directions) if i == 1 else K.shadow_area(G.directions)
    if np.any(shadows <= 0):
        raise GeometryError("zero-volume shadow")
    return KAPPA3 / kappa(i) * float(G.weights @ shadows**-3.0) ** (-1 / 3)


def dual_affine_quermassintegral(L: StarBody, i: int, grid="acceptance") -> float:
    """A~_{3-i}(L) = (kappa_3 / kappa_i) (int V_i(L cap E)^3 d nu_i(E))^{1/3}.

    Conventions A~_0 = V(L) (i = 3) and A~_3 = kappa_3 (i = 0).
    """
    if i == 0:
        return KAPPA3
    if i == 3:
        return L.volume_star(grid)
    if i not in (1, 2):
        raise GeometryError("dual affine quermassintegrals need i in {0, 1, 2, 3}")
    if i == 1:
        # chords are even, so the line average is a sphere average on the body's own rule
        g = L.quadrature(grid) if isinstance(L, StarBody) else as_grid(grid)
        mean = float(g.weights @ L.chord(g.nodes) ** 3.0) / (4 * np.pi)
    else:
        G = grassmann_samples(i, grid)
        mean = float(G.weights @ L.section_area(G.directions) ** 3.0)
    return KAPPA3 / kappa(i) * mean ** (1 / 3)


# ---------------------------------------------------------------------------
# L_p mixed volumes

def lp_mixed_volume(K: ConvexBody, L, p: float, grid="acceptance") -> float:
    """V_p(K, L) = (1/3) int h(L, v)^p dS_p(K, v), dS_p = h(K, .)^{1-p} dS(K, .)."""
    if isinstance(K, Ball):
        g = as_grid(grid)
        return K.radius ** (3 - p) * float(g.weights @ _eval(L, g.nodes) ** p) / 3
    if isinstance(K, Ellipsoid):
        g = as_grid(grid)
        dens = _ellipsoid_area_density(K, 2, g.nodes) * K._support(g.nodes) ** (1 - p)
        return float(g.weights @ (dens * _eval(L, g.nodes) ** p)) / 3
    d = K.as_polytope().data
    if d.offsets.min() <= 0:
        raise GeometryError("origin is not interior")
    return float((d.areas * d.offsets ** (1 - p)) @ _eval(L, d.normals) ** p) / 3


def lp_dual_mixed_volume(K, L, p: float, grid="acceptance") -> float:
    """V~_{-p}(K, L) = (1/3) int rho(K, u)^{3+p} rho(L, u)^{-p} du."""
    g = _star_rule([K, L], grid)
    return float(g.weights @ (_eval_radial(K, g.nodes) ** (3 + p) * _eval_radial(L, g.nodes) ** (-p))) / 3


def firey_ball_volume(r: float, t: float, s: float, p: float) -> float:
    """Volume of rB +_p t (sB), a ball of radius (r^p + t s^p)^(1/p)."""
    return KAPPA3 * (r**p + t * s**p) ** (3 / p)


# ---------------------------------------------------------------------------
# polar volumes

def polar_volume_exact(K: ConvexBody) -> float:
    """V(K*) in closed form for polytopes and ellipsoids."""
    if isinstance(K, Ellipsoid):
        return K.polar().volume()
    return K.as_polytope().polar().volume()


def support_polar_volume(K, grid="acceptance") -> float:
    """(1/3) int h(K, u)^{-3} du on the grid."""
    g = as_grid(grid)
    return float(g.weights @ _eval(K, g.nodes) ** -3.0) / 3


__all__ = [
    "mixed_volume", "area_measure_apply", "mixed_volume_support", "quermassintegrals",
    "intrinsic_volumes", "dual_mixed_volume", "dual_quermassintegrals", "dual_quermass_grassmann",
    "affine_quermassintegral", "dual_affine_quermassintegral", "lp_mixed_volume",
    "lp_dual_mixed_volume", "firey_ball_volume", "polar_volume_exact", "support_polar_volume",
    "SupportField",
]
