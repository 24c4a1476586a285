"""Quadrature on the unit sphere S^2 and even zonal measures.

Everything here works with batches of unit vectors stored as ``(N, 3)``
arrays.  The pole of every zonal object is ``E_BAR = e3``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.interpolate import CubicSpline

E_BAR = np.array([0.0, 0.0, 1.0])

RESOLUTIONS = {
    "coarse": (16, 32),
    "medium": (32, 64),
    "acceptance": (64, 128),
    "fine": (128, 256),
}

ArrayFn = Callable[[np.ndarray], np.ndarray]


def kappa(m: int) -> float:
    """Volume of the m-dimensional unit ball."""
    return math.pi ** (m / 2) / math.gamma(m / 2 + 1)


def unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# grids

@dataclass(frozen=True, eq=False)
class SphericalGrid:
    nodes: np.ndarray
    weights: np.ndarray
    resolution: str
    n_polar: int
    n_azimuth: int

    def __len__(self) -> int:
        return len(self.weights)

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ values)

    def hemisphere(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes with positive e3-component and their weights (summing to 2*pi)."""
        mask = self.nodes[:, 2] > 0
        return self.nodes[mask], self.weights[mask]

    @property
    def degree(self) -> int:
        """Spherical-harmonic degree integrated exactly."""
        return min(2 * self.n_polar - 1, self.n_azimuth - 1)


def _product_grid(n_polar: int, n_azimuth: int, resolution: str) -> SphericalGrid:
    t, wt = np.polynomial.legendre.leggauss(n_polar)
    phi = 2 * np.pi * np.arange(n_azimuth) / n_azimuth
    s = np.sqrt(1 - t**2)
    nodes = np.stack(
        [
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
            np.repeat(t, n_azimuth),
        ],
        axis=1,
    )
    weights = np.repeat(wt, n_azimuth) * (2 * np.pi / n_azimuth)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SphericalGrid(nodes, weights, resolution, n_polar, n_azimuth)


@lru_cache(maxsize=None)
def build_grid(resolution: str = "acceptance") -> SphericalGrid:
    """Gauss-Legendre in the polar cosine times a uniform azimuth rule.

    Resolutions: ``coarse`` (16x32), ``medium`` (32x64), ``acceptance``
    (64x128) and ``fine`` (128x256).
    """
    if isinstance(resolution, SphericalGrid):
        return resolution
    try:
        n_polar, n_azimuth = RESOLUTIONS[resolution]
    except KeyError:
        raise ValueError(f"unknown grid resolution {resolution!r}") from None
    return _product_grid(n_polar, n_azimuth, resolution)


def as_grid(grid) -> SphericalGrid:
    return grid if isinstance(grid, SphericalGrid) else build_grid(grid)


# ---------------------------------------------------------------------------
# rotations and frames

def rotate_to_axis(u) -> np.ndarray:
    """Rotation R with R @ e3 = u.

    Shortest-arc rotation about e3 x u; for u = -e3 the rotation by pi about
    e1, i.e. diag(1, -1, -1).
    """
    return rotations_to_axes(np.asarray(u, dtype=float)[None])[0]


def rotations_to_axes(U: np.ndarray) -> np.ndarray:
    U = np.asarray(U, dtype=float)
    c = U[:, 2]
    k = np.stack([-U[:, 1], U[:, 0], np.zeros(len(U))], axis=1)
    K = np.zeros((len(U), 3, 3))
    K[:, 0, 1], K[:, 0, 2] = -k[:, 2], k[:, 1]
    K[:, 1, 0], K[:, 1, 2] = k[:, 2], -k[:, 0]
    K[:, 2, 0], K[:, 2, 1] = -k[:, 1], k[:, 0]
    antipodal = c < -1 + 1e-14
    denom = np.where(antipodal, 1.0, 1 + c)
    R = c[:, None, None] * np.eye(3) + K + k[:, :, None] * k[:, None, :] / denom[:, None, None]
    R[antipodal] = np.diag([1.0, -1.0, -1.0])
    return R


def tangent_frames(U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal pairs (a, b) spanning u^perp, taken from rotate_to_axis."""
    R = rotations_to_axes(U)
    return R[:, :, 0], R[:, :, 1]


@dataclass(frozen=True, eq=False)
class Subspace:
    """Linear subspace of R^3 given by an orthonormal frame (rows)."""

    frame: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.frame)

    def __post_init__(self):
        f = np.atleast_2d(np.asarray(self.frame, dtype=float))
        if not np.allclose(f @ f.T, np.eye(len(f)), atol=1e-12):
            raise ValueError("subspace frame is not orthonormal")
        object.__setattr__(self, "frame", f)

    @classmethod
    def line(cls, e) -> "Subspace":
        return cls(unit(e)[None])

    @classmethod
    def plane(cls, normal) -> "Subspace":
        a, b = tangent_frames(unit(normal)[None])
        return cls(np.stack([a[0], b[0]]))

    def normal(self) -> np.ndarray:
        if self.dim != 2:
            raise ValueError("normal() is only defined for planes")
        return unit(np.cross(self.frame[0], self.frame[1]))


# ---------------------------------------------------------------------------
# great circles

@dataclass(frozen=True, eq=False)
class GreatCircleRule:
    axis: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray


def great_circle_rule(u, M: int = 128) -> GreatCircleRule:
    if M < 16:
        raise ValueError("great circle rules need at least 16 nodes")
    u = unit(u)
    a, b = tangent_frames(u[None])
    theta = 2 * np.pi * np.arange(M) / M
    nodes = np.cos(theta)[:, None] * a + np.sin(theta)[:, None] * b
    return GreatCircleRule(u, nodes, np.full(M, 1.0 / M))


def circle_points(U: np.ndarray, M: int) -> np.ndarray:
    """Uniform nodes on the great circles u^perp, shape (len(U), M, 3)."""
    a, b = tangent_frames(U)
    theta = 2 * np.pi * np.arange(M) / M
    return (np.cos(theta)[None, :, None] * a[:, None, :]
            + np.sin(theta)[None, :, None] * b[:, None, :])


def spherical_radon(f: ArrayFn, u, rule: GreatCircleRule | int = 128) -> float:
    """Average of f over the great circle orthogonal to u."""
    if not isinstance(rule, GreatCircleRule):
        rule = great_circle_rule(u, rule)
    return float(rule.weights @ f(rule.nodes))


def radon_transform(f: ArrayFn, U: np.ndarray, M: int = 128) -> np.ndarray:
    U = np.atleast_2d(U)
    pts = circle_points(U, M)
    return f(pts.reshape(-1, 3)).reshape(len(U), M).mean(axis=1)


def rotated_split_nodes(U: np.ndarray, n_t: int = 24, n_phi: int = 48):
    """Quadrature nodes around each pole u, split at the great circle u^perp.

    Returns ``points`` of shape (len(U), n_t * 2 * n_phi, 3), the weights
    (summing to 4*pi) and the heights t = u . w of the nodes.  Integrands of
    the form |u.w|^p F(w) with smooth F are integrated to high accuracy.
    """
    x, wx = np.polynomial.legendre.leggauss(n_t)
    t = np.concatenate([(x - 1) / 2, (x + 1) / 2])
    wt = np.concatenate([wx, wx]) / 2
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    s = np.sqrt(1 - t**2)
    tt = np.repeat(t, n_phi)
    cc = np.outer(s, np.cos(phi)).ravel()
    ss = np.outer(s, np.sin(phi)).ravel()
    w = np.repeat(wt, n_phi) * (2 * np.pi / n_phi)
    R = rotations_to_axes(U)
    pts = (cc[None, :, None] * R[:, None, :, 0] + ss[None, :, None] * R[:, None, :, 1]
           + tt[None, :, None] * R[:, None, :, 2])
    return pts, w, tt


# ---------------------------------------------------------------------------
# zonal kernels

def circle_abs_power_mean(a, b, p: float) -> np.ndarray:
    """Mean over phi of |a + b cos(phi)|^p for b >= 0 (vectorized)."""
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if p == 2:
        return a**2 + b**2 / 2
    if p == 1:
        out = np.abs(a).astype(float)
        inner = b > np.abs(a)
        ai, bi = a[inner], b[inner]
        out[inner] = (2 / np.pi) * (np.sqrt(bi**2 - ai**2) + ai * np.arcsin(ai / bi))
        return out
    x, wx = np.polynomial.legendre.leggauss(32)
    ratio = np.clip(-a / np.where(b > 0, b, 1.0), -1, 1)
    kink = np.where(b > np.abs(a), np.arccos(ratio), np.pi)
    total = np.zeros(a.shape)
    for lo, hi in ((np.zeros(a.shape), kink), (kink, np.full(a.shape, np.pi))):
        half = (hi - lo) / 2
        phi = lo[..., None] + half[..., None] * (x + 1)
        vals = np.abs(a[..., None] + b[..., None] * np.cos(phi)) ** p
        total += half * (vals @ wx)
    return total / np.pi


def funk_hecke_abs(l: int, p: float) -> float:
    """2*pi * int_{-1}^{1} |t|^p P_l(t) dt."""
    if l % 2:
        return 0.0
    c = npleg.leg2poly([0] * l + [1])
    return 4 * np.pi * sum(ck / (p + k + 1) for k, ck in enumerate(c))


def _legendre_at_zero(l: int) -> float:
    return float(npleg.legval(0.0, [0] * l + [1]))


@dataclass(frozen=True)
class ZonalMeasure:
    """Even SO(2)-invariant measure on S^2 with pole e3.

    ``atoms`` are point masses at the poles t = +-1 (equal masses).  The
    absolutely continuous part is ``g(e3 . w) dw`` with ``g`` either a
    constant (``uniform``), an even polynomial in t (``poly``, power
    coefficients) or a constant on the double cap |t| >= cos(alpha)
    (``cap``).
    """

    atoms: tuple = ()
    density_kind: str | None = None
    coeffs: tuple = ()
    alpha: float = 0.0
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        atoms = tuple((float(t), float(m)) for t, m in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        masses = {}
        for t, m in atoms:
            if abs(abs(t) - 1) > 1e-12:
                raise ValueError("atoms of an even zonal measure must sit at t = +-1")
            if m <= 0:
                raise ValueError("atom masses must be positive")
            masses[round(t)] = masses.get(round(t), 0.0) + m
        if masses and abs(masses.get(1, 0.0) - masses.get(-1, 0.0)) > 1e-12 * max(masses.values()):
            raise ValueError("atoms are not symmetric under t -> -t")
        if self.density_kind not in (None, "uniform", "poly", "cap"):
            raise ValueError(f"unknown density kind {self.density_kind!r}")
        if self.density_kind == "poly" and any(abs(c) > 0 for c in self.coeffs[1::2]):
            raise ValueError("polynomial density must be even")
        if self.density_kind == "cap" and not 0 < self.alpha < np.pi / 2:
            raise ValueError("cap angle must lie in (0, pi/2)")
        tt = np.linspace(-1, 1, 201)
        if self.density_kind is not None and self.g(tt).min() < -1e-12:
            raise ValueError("density must be non-negative")
        if self.total_mass() <= 0:
            raise ValueError("zonal measure is trivial")

    # -- constructors -----------------------------------------------------
    @classmethod
    def discrete(cls, mass: float = 0.5) -> "ZonalMeasure":
        return cls(atoms=((1.0, mass / 2), (-1.0, mass / 2)), name=f"discrete({mass:g})")

    @classmethod
    def lebesgue(cls, mass: float = 0.5) -> "ZonalMeasure":
        return cls(density_kind="uniform", coeffs=(mass / (4 * np.pi),), name=f"lebesgue({mass:g})")

    @classmethod
    def poly(cls, coeffs: Sequence[float], mass: float | None = None) -> "ZonalMeasure":
        mu = cls(density_kind="poly", coeffs=tuple(coeffs))
        return mu if mass is None else mu.normalized(mass)

    @classmethod
    def quadratic(cls, mass: float = 0.5) -> "ZonalMeasure":
        """Density proportional to t^2: mass concentrated towards the poles."""
        return replace_name(cls.poly((0.0, 0.0, 1.0), mass), f"quadratic({mass:g})")

    @classmethod
    def cap(cls, alpha: float, mass: float = 0.5) -> "ZonalMeasure":
        mu = cls(density_kind="cap", coeffs=(1.0,), alpha=alpha)
        return replace_name(mu.normalized(mass), f"cap({alpha:g},{mass:g})")

    @classmethod
    def preset(cls, name: str, mass: float = 0.5) -> "ZonalMeasure":
        name = name.strip()
        if name == "discrete":
            return cls.discrete(mass)
        if name == "lebesgue":
            return cls.lebesgue(mass)
        if name == "quadratic":
            return cls.quadratic(mass)
        if name.startswith("cap"):
            arg = name[3:].strip("()") or "0.5"
            return cls.cap(float(arg), mass)
        raise ValueError(f"unknown measure preset {name!r}")

    # -- basic quantities -------------------------------------------------
    @property
    def atom_mass(self) -> float:
        return sum(m for _, m in self.atoms)

    @property
    def is_discrete(self) -> bool:
        return self.density_kind is None

    def g(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.density_kind is None:
            return np.zeros_like(t)
        if self.density_kind == "uniform":
            return np.full_like(t, self.coeffs[0])
        if self.density_kind == "poly":
            return np.polynomial.polynomial.polyval(t, self.coeffs)
        return np.where(np.abs(t) >= np.cos(self.alpha), self.coeffs[0], 0.0)

    def density_mass(self) -> float:
        if self.density_kind is None:
            return 0.0
        if self.density_kind == "uniform":
            return 4 * np.pi * self.coeffs[0]
        if self.density_kind == "poly":
            return 2 * np.pi * sum(2 * c / (k + 1) for k, c in enumerate(self.coeffs) if k % 2 == 0)
        return 4 * np.pi * self.coeffs[0] * (1 - np.cos(self.alpha))

    def total_mass(self) -> float:
        return self.atom_mass + self.density_mass()

    def scaled(self, factor: float) -> "ZonalMeasure":
        return ZonalMeasure(
            atoms=tuple((t, m * factor) for t, m in self.atoms),
            density_kind=self.density_kind,
            coeffs=tuple(c * factor for c in self.coeffs),
            alpha=self.alpha,
            name=self.name,
        )

    def normalized(self, mass: float) -> "ZonalMeasure":
        return self.scaled(mass / self.total_mass())

    def legendre_coeffs(self) -> np.ndarray:
        """g = sum_l c_l P_l for polynomial densities."""
        if self.density_kind == "uniform":
            return np.array(self.coeffs[:1])
        if self.density_kind == "poly":
            return npleg.poly2leg(self.coeffs)
        raise ValueError("Legendre coefficients need a polynomial density")

    @property
    def polynomial_density(self) -> bool:
        return self.density_kind in ("uniform", "poly")

    # -- kernels ----------------------------------------------------------
    def zonoid_moment(self, s, p: float = 1.0) -> np.ndarray:
        """int |u.w|^p d(mu rotated to v)(w) as a function of s = u.v."""
        s = np.asarray(s, dtype=float)
        out = self.atom_mass * np.abs(s) ** p
        if self.density_kind is None:
            return out
        if self.polynomial_density:
            c = self.legendre_coeffs()
            lam = [cl * funk_hecke_abs(l, p) for l, cl in enumerate(c)]
            return out + npleg.legval(s, lam)
        return out + _density_moment_spline(self, float(p))(np.abs(s))

    def zonoid_moment_numeric(self, s, p: float = 1.0, n: int = 64) -> np.ndarray:
        """Direct quadrature of the density part (oracle for zonoid_moment)."""
        s = np.atleast_1d(np.asarray(s, dtype=float))
        out = self.atom_mass * np.abs(s) ** p
        if self.density_kind is None:
            return out
        x, wx = np.polynomial.legendre.leggauss(n)
        res = np.empty(len(s))
        for i, si in enumerate(s):
            brk = {-1.0, 1.0, -np.sqrt(1 - si**2), np.sqrt(1 - si**2)}
            if self.density_kind == "cap":
                ca = np.cos(self.alpha)
                brk |= {-ca, ca}
            brk = sorted(brk)
            acc = 0.0
            for lo, hi in zip(brk[:-1], brk[1:]):
                if hi - lo < 1e-15:
                    continue
                t = lo + (hi - lo) * (x + 1) / 2
                b = np.sqrt(np.clip((1 - si**2) * (1 - t**2), 0, None))
                vals = self.g(t) * circle_abs_power_mean(si * t, b, p)
                acc += (hi - lo) / 2 * (vals @ wx)
            res[i] = 2 * np.pi * acc
        return out + res

    def radon_kernel(self, s) -> np.ndarray:
        """Density of (density part) * Radon against dv, as a function of s = u.v."""
        s = np.asarray(s, dtype=float)
        if self.density_kind is None:
            return np.zeros_like(s)
        if self.polynomial_density:
            c = self.legendre_coeffs()
            return npleg.legval(s, [cl * _legendre_at_zero(l) for l, cl in enumerate(c)])
        r = np.sqrt(np.clip(1 - s**2, 0, None))
        ca = np.cos(self.alpha)
        ratio = np.where(r > ca, ca / np.where(r > 0, r, 1.0), 1.0)
        return self.coeffs[0] * (2 / np.pi) * np.arccos(np.clip(ratio, -1, 1))

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        d: dict = {"atoms": [[t, m] for t, m in self.atoms]}
        if self.density_kind is not None:
            d["density"] = {"kind": self.density_kind, "coeffs": list(self.coeffs)}
            if self.density_kind == "cap":
                d["density"]["alpha"] = self.alpha
        d["name"] = self.name
        return d

    @classmethod
    def from_json(cls, d: dict) -> "ZonalMeasure":
        dens = d.get("density") or {}
        mu = cls(
            atoms=tuple(tuple(a) for a in d.get("atoms", ())),
            density_kind=dens.get("kind"),
            coeffs=tuple(dens.get("coeffs", ())),
            alpha=float(dens.get("alpha", 0.0)),
            name=d.get("name", "custom"),
        )
        if d.get("total_mass_override") is not None:
            mu = replace_name(mu.normalized(float(d["total_mass_override"])), mu.name)
        return mu


def replace_name(mu: ZonalMeasure, name: str) -> ZonalMeasure:
    object.__setattr__(mu, "name", name)
    return mu


@lru_cache(maxsize=64)
def _density_moment_spline(mu: ZonalMeasure, p: float) -> CubicSpline:
    s = np.linspace(0, 1, 1025)
    dens_only = ZonalMeasure(density_kind=mu.density_kind, coeffs=mu.coeffs, alpha=mu.alpha)
    vals = dens_only.zonoid_moment_numeric(s, p)
    return CubicSpline(s, vals)


# ---------------------------------------------------------------------------
# zonal integration and convolution

def integrate_zonal(F: ArrayFn, mu: ZonalMeasure, u, n_lat: int = 64, n_az: int = 128,
                    rotation: np.ndarray | None = None) -> float:
    """int F d(mu_u): mu rotated so that its pole sits at u.

    ``rotation`` overrides rotate_to_axis(u); any rotation taking e3 to u
    gives the same value.
    """
    u = unit(u)
    R = rotate_to_axis(u) if rotation is None else np.asarray(rotation)
    total = 0.0
    for t, m in mu.atoms:
        total += m * float(F((t * u)[None])[0])
    if mu.density_kind is None:
        return total
    x, wx = _latitude_rule(mu, n_lat)
    phi = 2 * np.pi * np.arange(n_az) / n_az
    s = np.sqrt(1 - x**2)
    local = np.stack(
        [np.outer(s, np.cos(phi)).ravel(), np.outer(s, np.sin(phi)).ravel(), np.repeat(x, n_az)],
        axis=1,
    )
    vals = F(local @ R.T).reshape(len(x), n_az).mean(axis=1)
    return total + 2 * np.pi * float((wx * mu.g(x)) @ vals)


def _latitude_rule(mu: ZonalMeasure, n: int):
    """Gauss-Legendre on [-1, 1], split where the density jumps."""
    x, wx = np.polynomial.legendre.leggauss(n)
    if mu.density_kind != "cap":
        return x, wx
    c = np.cos(mu.alpha)
    brk = [-1.0, -c, c, 1.0]
    xs, ws = [], []
    for lo, hi in zip(brk[:-1], brk[1:]):
        xs.append(lo + (hi - lo) * (x + 1) / 2)
        ws.append(wx * (hi - lo) / 2)
    return np.concatenate(xs), np.concatenate(ws)


def convolve_zonal(f: ArrayFn, mu: ZonalMeasure, **kw) -> ArrayFn:
    """(f * mu)(u) = int f d(mu_u), returned as a vectorized field."""

    def field(U):
        U = np.atleast_2d(U)
        return np.array([integrate_zonal(f, mu, u, **kw) for u in U])

    return field


def kernel_apply(values: np.ndarray, grid: SphericalGrid, U: np.ndarray,
                 kernel: Callable[[np.ndarray], np.ndarray], chunk: int = 512) -> np.ndarray:
    """sum_k w_k values_k kernel(u . v_k) for every u in U."""
    U = np.atleast_2d(U)
    wv = grid.weights * values
    out = np.empty(len(U))
    for i in range(0, len(U), chunk):
        S = U[i:i + chunk] @ grid.nodes.T
        out[i:i + chunk] = kernel(S) @ wv
    return out


def density_apply(mu: ZonalMeasure, values: np.ndarray, grid: SphericalGrid,
                  W: np.ndarray) -> np.ndarray:
    """int F(v) g(w.v) dv at the points W, with F sampled on ``grid``."""
    W = np.atleast_2d(W)
    if mu.density_kind is None:
        return np.zeros(len(W))
    return kernel_apply(values, grid, W, mu.g)


def convolve_with_measure(values: np.ndarray, grid: SphericalGrid, mu: ZonalMeasure,
                          W: np.ndarray, F: ArrayFn | None = None) -> np.ndarray:
    """(F * mu)(w) = int F d(mu_w); atoms use F directly when given."""
    W = np.atleast_2d(W)
    out = density_apply(mu, values, grid, W)
    if mu.atom_mass:
        if F is None:
            raise ValueError("atoms need a pointwise evaluator")
        out = out + mu.atom_mass / 2 * (F(W) + F(-W))
    return out


# ---------------------------------------------------------------------------
# Grassmannians of R^3

@dataclass(frozen=True, eq=False)
class GrassmannSample:
    dim: int
    directions: np.ndarray
    weights: np.ndarray

    def __iter__(self) -> Iterator[tuple[Subspace, float]]:
        for d, w in zip(self.directions, self.weights):
            yield (Subspace.line(d) if self.dim == 1 else Subspace.plane(d)), float(w)

    def __len__(self) -> int:
        return len(self.weights)


def grassmann_samples(i: int, grid="acceptance") -> GrassmannSample:
    """Haar-weighted samples of Gr(3, i) from the upper hemisphere of a grid.

    Lines are stored by their direction, planes by their unit normal.
    """
    if i not in (1, 2):
        raise ValueError("only Gr(3,1) and Gr(3,2) are supported")
    nodes, w = as_grid(grid).hemisphere()
    return GrassmannSample(i, nodes, w / w.sum())
