"""Intersection bodies and zonal radial Minkowski valuations.

The radial function of Psi^tau_i L splits into the atoms of tau at the
poles, which reproduce a multiple of the intersection body, and the
density part, which is rho(L, .)^i integrated against the Radon transform
of the density:

    rho(Psi^tau_i L, u) = m_atoms / pi * rho(I_i L, u) + int rho(L, v)^i K(u . v) dv,

where K(u . v) is the mean of g(u . w) over the great circle w in v^perp.
"""
from __future__ import annotations

import math

import numpy as np

from .bodies import Ball, RadialField, StarBody, _batch, _out, radial_sum
from .sphere import ZonalMeasure, integrate_zonal, kernel_apply


def _check_order(i: int) -> None:
    if i not in (0, 1, 2):
        raise ValueError("radial valuations are implemented for i in {0, 1, 2}")


def intersection_body_radial(L: StarBody, i: int, U):
    """rho(I_i L, u) = pi * mean of rho(L, .)^i over the great circle u^perp."""
    _check_order(i)
    U, single = _batch(U)
    return _out(L._circle_power_integral(U, i) / 2, single)


def psi_i_radial(L: StarBody, tau: ZonalMeasure, i: int, U, grid="acceptance"):
    """rho(Psi^tau_i L, u)."""
    _check_order(i)
    U, single = _batch(U)
    vals = np.zeros(len(U))
    if tau.atom_mass:
        vals += tau.atom_mass / np.pi * L._circle_power_integral(U, i) / 2
    if not tau.is_discrete:
        g = L.quadrature(grid)
        vals += kernel_apply(L._radial(g.nodes) ** i, g, U, tau.radon_kernel)
    return _out(vals, single)


def psi_i_radial_lemma(L: StarBody, tau: ZonalMeasure, i: int, u, **kw) -> float:
    """(1/pi) int rho(I_i L, w) d(tau_u)(w): the rotated-average form (oracle)."""
    return integrate_zonal(lambda W: intersection_body_radial(L, i, W), tau, u, **kw) / np.pi


def psi_radial(L: StarBody, tau: ZonalMeasure, U, grid="acceptance"):
    return psi_i_radial(L, tau, 2, U, grid)


def steiner_radial_decomposition(L: StarBody, tau: ZonalMeasure, r: float, U, grid="acceptance"):
    """Both sides of Psi^tau(L +~ rB) = sum_i C(2, i) r^(2-i) Psi^tau_i L."""
    lhs_body = L if r == 0 else radial_sum(L, Ball(r))
    lhs = psi_i_radial(lhs_body, tau, 2, U, grid)
    rhs = sum(math.comb(2, i) * r ** (2 - i) * np.asarray(psi_i_radial(L, tau, i, U, grid))
              for i in range(3))
    return lhs, rhs


def intersection_field(L: StarBody, i: int = 2) -> RadialField:
    return RadialField(lambda U: intersection_body_radial(L, i, U), f"I_{i} {L!r}", "intersection")


def psi_field(L: StarBody, tau: ZonalMeasure, i: int = 2, grid="acceptance") -> RadialField:
    return RadialField(lambda U: psi_i_radial(L, tau, i, U, grid), f"Psi^tau_{i} {L!r}", "psi_i")
