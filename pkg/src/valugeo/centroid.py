"""Centroid bodies Gamma_p, Gamma^mu_p and p-th moments of star bodies.

Support values use the polar-coordinates form on a fixed spherical grid,

    h(Gamma^mu_p L, u)^p = 1 / ((3 + p) V(L)) * sum_k w_k h(Z^mu_p(u), v_k)^p rho(L, v_k)^(3 + p),

with V(L) computed on the same grid.  Balls and (for Gamma_p) ellipsoids
are evaluated in closed form.
"""
from __future__ import annotations

import numpy as np

from .bodies import (Ball, Ellipsoid, GeometryError, RadialField, StarBody, SupportField,
                     _batch, _out)
from .sphere import (ZonalMeasure, as_grid, build_grid, circle_points, density_apply,
                     kernel_apply, rotated_split_nodes, tangent_frames)

CHUNK = 512


def _quadrature(L, grid):
    return L.quadrature(grid) if isinstance(L, StarBody) else as_grid(grid)


def _rho(L, V: np.ndarray) -> np.ndarray:
    if isinstance(L, StarBody):
        return L._radial(V)
    vals = np.asarray(L(V), dtype=float)
    if np.any(vals <= 0):
        raise GeometryError("radial field must be positive")
    return vals


def polar_star(field: SupportField) -> RadialField:
    """Star body with radial function 1 / field (the polar of a convex body)."""
    return RadialField(lambda U: 1 / field(U), f"polar of {field.description}", "polar")


def ball_centroid_constant(p: float) -> float:
    """h(Gamma_p B, u)^p = 3 / ((p + 1)(p + 3))."""
    return 3 / ((p + 1) * (p + 3))


def centroid_p_support(L, p: float, U, grid="acceptance"):
    """h(Gamma_p L, u); Gamma_1 is the classical centroid body."""
    U, single = _batch(U)
    if p < 1:
        raise ValueError("p must be at least 1")
    if isinstance(L, Ellipsoid):
        T = np.linalg.cholesky(L.shape)
        vals = ball_centroid_constant(p) ** (1 / p) * np.linalg.norm(U @ T, axis=1)
    else:
        vals = _polar_form(L, lambda s: np.abs(s) ** p, p, U, grid) ** (1 / p)
    return _out(vals, single)


def gamma_mu_p_support(L, mu: ZonalMeasure, p: float, U, grid="acceptance"):
    """h(Gamma^mu_p L, u) with the zonoid kernel of mu in place of |u . v|^p."""
    U, single = _batch(U)
    if p < 1:
        raise ValueError("p must be at least 1")
    if isinstance(L, Ball):
        c = mu.total_mass() * ball_centroid_constant(p)
        vals = np.full(len(U), L.radius * c ** (1 / p))
    elif isinstance(L, Ellipsoid) and mu.is_discrete:
        vals = mu.total_mass() ** (1 / p) * centroid_p_support(L, p, U, grid)
    else:
        vals = _polar_form(L, lambda s: mu.zonoid_moment(np.clip(s, -1, 1), p), p, U, grid) ** (1 / p)
    return _out(vals, single)


def gamma_mu_p_support_lemma(L, mu: ZonalMeasure, p: float, u, grid="acceptance", **kw) -> float:
    """(int h(Gamma_p L, w)^p d(mu_u)(w))^(1/p): rotated-average form (oracle)."""
    from .sphere import integrate_zonal
    val = integrate_zonal(lambda W: centroid_p_support(L, p, W, grid) ** p, mu, u, **kw)
    return val ** (1 / p)


def _polar_form(L, kernel, p, U, grid):
    g = _quadrature(L, grid)
    rho = _rho(L, g.nodes)
    vol = float(g.weights @ rho**3) / 3
    vals = kernel_apply(rho ** (3 + p), g, U, kernel, CHUNK)
    return vals / ((3 + p) * vol)


def p_moment(L, p: float, grid="acceptance") -> float:
    """I_p(L) = (int_L |x|^p dx)^(1/p)."""
    if isinstance(L, Ball):
        return (4 * np.pi * L.radius ** (3 + p) / (3 + p)) ** (1 / p)
    g = _quadrature(L, grid)
    return (float(g.weights @ _rho(L, g.nodes) ** (3 + p)) / (3 + p)) ** (1 / p)


def centroid_field(L, p: float = 1, grid="acceptance") -> SupportField:
    return SupportField(lambda U: centroid_p_support(L, p, U, grid), f"Gamma_{p}", "gamma_p")


def gamma_field(L, mu: ZonalMeasure, p: float = 1, grid="acceptance") -> SupportField:
    return SupportField(lambda U: gamma_mu_p_support(L, mu, p, U, grid), f"Gamma^mu_{p}", "gamma_mu_p")


# ---------------------------------------------------------------------------
# volumes of centroid images

def _weight_function(L, mu: ZonalMeasure, p: float, grid):
    """R = rho^(3+p) * mu as a pointwise evaluator, and the constant c."""
    g = _quadrature(L, grid)
    rho_g = _rho(L, g.nodes)
    F_g = rho_g ** (3 + p)
    c = 1 / ((3 + p) * float(g.weights @ rho_g**3) / 3)
    atom = mu.atom_mass

    def R(W):
        out = density_apply(mu, F_g, g, W) if not mu.is_discrete and not mu.polynomial_density else 0.0
        if mu.polynomial_density:
            out = out + _poly_density_apply(mu, F_g, g, W)
        if atom:
            out = out + atom / 2 * (_rho(L, W) ** (3 + p) + _rho(L, -W) ** (3 + p))
        return out

    return R, c


def _poly_density_apply(mu: ZonalMeasure, F: np.ndarray, g, W: np.ndarray) -> np.ndarray:
    """int F(v) g(w . v) dv for polynomial g via moment tensors."""
    coeffs = mu.coeffs if mu.density_kind == "poly" else mu.coeffs[:1]
    wF = g.weights * F
    out = np.zeros(len(W))
    for k, ck in enumerate(coeffs):
        if ck == 0:
            continue
        if k == 0:
            out += ck * wF.sum()
            continue
        powers = np.ones((len(g), 1))
        for _ in range(k):
            powers = (powers[:, :, None] * g.nodes[:, None, :]).reshape(len(g), -1)
        T = wF @ powers                                    # flattened order-k tensor
        for i in range(0, len(W), 65536):
            Wi = W[i:i + 65536]
            wp = np.ones((len(Wi), 1))
            for _ in range(k):
                wp = (wp[:, :, None] * Wi[:, None, :]).reshape(len(Wi), -1)
            out[i:i + 65536] += ck * (wp @ T)
    return out


def gamma2_matrix(L, mu: ZonalMeasure, grid="acceptance") -> np.ndarray:
    """Q with h(Gamma^mu_2 L, u)^2 = u^T Q u.

    The p = 2 kernel is quadratic, z(s) = z(0) + (z(1) - z(0)) s^2, so
    Gamma^mu_2 L is an origin-centred ellipsoid.
    """
    g = _quadrature(L, grid)
    rho = _rho(L, g.nodes)
    w5 = g.weights * rho**5
    z0, z1 = (float(mu.zonoid_moment(np.array(x), 2)) for x in (0.0, 1.0))
    Q = z0 * w5.sum() * np.eye(3) + (z1 - z0) * (g.nodes.T * w5) @ g.nodes
    return Q / (5 * float(g.weights @ rho**3) / 3)


def gamma_volume(L, mu: ZonalMeasure, p: float = 1, grid="acceptance", outer="medium",
                 n_t: int = 24, n_phi: int = 48, n_circle: int = 128, method: str = "auto") -> float:
    """Volume of Gamma^mu_p L from its support function and curvature.

    With G = h^p = c int |u . w|^p R(w) dw, the Hessian of h = G^(1/p) is
    formed analytically and V = (1/3) int h det(D^2 h restricted to u^perp) du.
    Supported for p = 1 and p >= 2.  For p = 2 the default ``method="auto"``
    uses the exact ellipsoid form (:func:`gamma2_matrix`); ``method="hessian"``
    forces the general route.
    """
    if not (p == 1 or p >= 2):
        raise ValueError("gamma_volume supports p = 1 and p >= 2")
    if method not in ("auto", "hessian"):
        raise ValueError("method must be 'auto' or 'hessian'")
    if isinstance(L, Ball):
        return 4 * np.pi / 3 * (L.radius * (mu.total_mass() * ball_centroid_constant(p)) ** (1 / p)) ** 3
    if p == 2 and method == "auto":
        return 4 * np.pi / 3 * float(np.sqrt(np.linalg.det(gamma2_matrix(L, mu, grid))))
    R, c = _weight_function(L, mu, p, grid)
    go = build_grid(outer)
    total = 0.0
    for i in range(0, len(go), 64):
        U = go.nodes[i:i + 64]
        pts, w, t = rotated_split_nodes(U, n_t, n_phi)
        Rv = R(pts.reshape(-1, 3)).reshape(pts.shape[:2]) * w
        G = c * Rv @ np.abs(t) ** p
        grad = c * p * np.einsum("nm,nmi->ni", (np.abs(t) ** (p - 1) * np.sign(t)) * Rv, pts)
        if p == 1:
            cp = circle_points(U, n_circle)
            Rc = R(cp.reshape(-1, 3)).reshape(cp.shape[:2])
            hess = 2 * c * np.einsum("nm,nmi,nmj->nij", Rc, cp, cp) * (2 * np.pi / n_circle)
        else:
            hess = c * p * (p - 1) * np.einsum("nm,nmi,nmj->nij", np.abs(t) ** (p - 2) * Rv, pts, pts)
        H = G ** (1 / p)
        D2 = (G ** (1 / p - 1) / p)[:, None, None] * hess + (
            (1 / p) * (1 / p - 1) * G ** (1 / p - 2))[:, None, None] * grad[:, :, None] * grad[:, None, :]
        a, b = tangent_frames(U)
        haa = np.einsum("ni,nij,nj->n", a, D2, a)
        hbb = np.einsum("ni,nij,nj->n", b, D2, b)
        hab = np.einsum("ni,nij,nj->n", a, D2, b)
        total += float(go.weights[i:i + 64] @ (H * (haa * hbb - hab**2)))
    return total / 3
