import itertools
import json

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from valugeo.bodies import (Ball, Ellipsoid, GeometryError, LegendreTerm, PerturbedBall, Polytope,
                            RadialCombination, StarPolytope, Zonotope, as_star, ball_polytope,
                            body_from_json, minkowski_combine, polar_radial, radial_sum,
                            section_volume, shadow_perimeter_2d, shadow_volume, volume_star)
from valugeo.corpus import cube, octahedron, random_polytope
from valugeo.sphere import Subspace, build_grid, unit

from conftest import random_rotation, random_units

E1, E2, E3 = np.eye(3)
DIAG = unit([1.0, 1.0, 1.0])


class TestSupport:
    def test_cube(self, cube2):
        assert cube2.support(E1) == 1.0

    def test_ellipsoid_axis(self):
        E = Ellipsoid.from_axes([1.0, 2.0, 3.0])
        assert abs(E.support(E2) - 2) < 1e-15

    def test_zonotope_against_vertex_sums(self):
        Z = Zonotope(np.eye(3))
        # [DERIVED] brute force over the 8 sign choices of generator sums
        verts = np.array([np.array(s) @ np.eye(3) for s in itertools.product([-1, 1], repeat=3)])
        assert abs(Z.support(DIAG) - np.max(verts @ DIAG)) < 1e-15
        assert abs(Z.support(DIAG) - np.sqrt(3)) < 1e-15

    def test_ball_is_constant(self, rng):
        assert np.allclose(Ball(2.5).support(random_units(rng, 10)), 2.5)

    def test_sublinear(self, rng):
        bodies = [cube(), octahedron(), Ellipsoid.from_axes([1, 2, 3]), Zonotope(rng.normal(size=(5, 3)))]
        X, Y = rng.normal(size=(1000, 3)), rng.normal(size=(1000, 3))
        for K in bodies:
            h = lambda V: np.linalg.norm(V, axis=1) * K.support(unit(V))
            assert np.all(h(X) + h(Y) >= h(X + Y) - 1e-12)


class TestRadial:
    def test_ball(self, rng):
        assert np.allclose(Ball(1.0).radial(random_units(rng, 5)), 1.0)

    def test_cube_corner(self):
        assert abs(StarPolytope(cube()).radial(DIAG) - np.sqrt(3)) < 1e-14

    def test_radial_combination_of_balls(self, rng):
        L = RadialCombination(1, [(1.0, Ball(1.0)), (1.0, Ball(2.0))])
        assert np.allclose(L.radial(random_units(rng, 5)), 3.0, atol=1e-14)
        assert np.allclose(radial_sum(Ball(1.0), Ball(2.0)).radial(E1), 3.0)

    def test_star_polytope_requires_origin(self):
        with pytest.raises(GeometryError):
            StarPolytope(cube().translate([2.0, 0, 0]))

    def test_polar_duality(self, rng):
        U = random_units(rng, 200)
        for K in [cube(), octahedron(), random_polytope(12, rng, True)]:
            Ks = StarPolytope(K.polar())
            assert np.allclose(Ks.radial(U) * K.support(U), 1, atol=1e-10)
        E = Ellipsoid.from_axes([1, 2, 3])
        assert np.allclose(E.polar().radial(U) * E.support(U), 1, atol=1e-10)


class TestPolarRadial:
    def test_balls(self, rng):
        U = random_units(rng, 4)
        assert np.allclose(polar_radial(Ball(1.0), U), 1)
        assert np.allclose(polar_radial(Ball(2.0), U), 0.5)

    def test_cube_vs_cross_polytope(self):
        assert abs(polar_radial(cube(), DIAG) - 1 / np.sqrt(3)) < 1e-15
        # [DERIVED] the polar of the cube is the cross-polytope
        assert abs(StarPolytope(octahedron()).radial(DIAG) - 1 / np.sqrt(3)) < 1e-15

    def test_origin_not_interior(self):
        with pytest.raises(GeometryError):
            polar_radial(cube().translate([1.0, 0, 0]), -E1)


class TestMinkowski:
    def test_identity_and_halves(self, rng):
        C = cube()
        S = minkowski_combine([(1.0, C), (0.0, octahedron())])
        U = build_grid("acceptance").nodes
        assert np.allclose(S.support(U), C.support(U), atol=1e-12)
        half = minkowski_combine([(0.5, C), (0.5, C)])
        assert np.allclose(half.support(U), C.support(U), atol=1e-12)

    def test_segments_make_square(self):
        # flat bodies are rejected, so a thin third generator stands in for the square;
        # it is invisible in directions orthogonal to e3
        A = Zonotope(np.array([E1, 1e-3 * E2, 1e-3 * E3]))
        B = Zonotope(np.array([1e-3 * E1, E2, 1e-3 * E3]))
        S = minkowski_combine([(1.0, A), (1.0, B)])
        u = unit([1.0, 1.0, 0.0])
        # [DERIVED] brute-force vertex sums
        V = np.array([a + b for a in A.as_polytope().vertices for b in B.as_polytope().vertices])
        assert abs(S.support(u) - np.max(V @ u)) < 1e-12
        assert abs(S.support(u) - np.sqrt(2) * 1.001) < 1e-12

    def test_support_is_additive(self, rng):
        A, B = random_polytope(9, rng), random_polytope(11, rng, True)
        S = minkowski_combine([(0.7, A), (1.3, B), (0.4, octahedron())])
        U = build_grid("acceptance").nodes
        assert np.allclose(S.support(U), 0.7 * A.support(U) + 1.3 * B.support(U) + 0.4 * octahedron().support(U),
                           atol=1e-10)

    def test_empty(self):
        with pytest.raises((GeometryError, ValueError)):
            minkowski_combine([])


class TestVolume:
    def test_exact(self):
        assert abs(cube().volume() - 8) < 1e-14
        assert abs(Ball(1.0).volume() - 4 * np.pi / 3) < 1e-15

    def test_ellipsoid_monte_carlo(self):
        # [DERIVED] rejection sampling in the bounding box [-1,1]x[-2,2]x[-3,3]
        rng = np.random.default_rng(7)
        X = rng.uniform(-1, 1, size=(400_000, 3)) * [1, 2, 3]
        frac = np.mean(np.sum((X / [1, 2, 3]) ** 2, axis=1) <= 1)
        mc = frac * 48
        assert abs(mc / (8 * np.pi) - 1) < 1e-2
        assert abs(Ellipsoid.from_axes([1, 2, 3]).volume() - 8 * np.pi) < 1e-12

    def test_volume_star(self):
        assert abs(volume_star(Ball(1.0)) - 4 * np.pi / 3) < 1e-12
        C = as_star(cube())
        # the plain grid and the facet-cone rule both approach 8
        assert abs(volume_star(C, "acceptance") / 8 - 1) < 1e-3
        assert abs(volume_star(C, "fine") / 8 - 1) < 1e-3
        assert abs(C.volume_star("coarse") - 8) < 1e-12

    def test_volume_star_perturbed_ball_converges(self):
        L = PerturbedBall(1.0, 0.1, [LegendreTerm((0.0, 0.0, 1.0), 2, 1.0)])
        v = [volume_star(L, g) for g in ("medium", "acceptance", "fine")]
        assert abs(v[1] - v[2]) < 1e-10
        assert abs(v[0] - v[2]) < 1e-8

    def test_flat_polytope_rejected(self):
        with pytest.raises(GeometryError):
            Polytope(np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0.0]]))


class TestShadowsAndSections:
    def test_ball(self, rng):
        u = unit(rng.normal(size=3))
        assert abs(shadow_volume(Ball(1.0), Subspace.plane(u)) - np.pi) < 1e-12
        assert abs(section_volume(Ball(1.0), Subspace.plane(u)) - np.pi) < 1e-12
        assert abs(section_volume(Ball(2.0), Subspace.line(u)) - 4) < 1e-12

    def test_cube(self):
        C = cube()
        assert abs(shadow_volume(C, Subspace.plane(E3)) - 4) < 1e-12
        assert abs(shadow_volume(C, E3, 2, first_intrinsic=True) - 4) < 1e-12
        assert abs(shadow_perimeter_2d(C, E3) / 2 - 4) < 1e-12
        assert abs(section_volume(as_star(C), Subspace.plane(E3)) - 4) < 1e-6

    def test_shadow_area_matches_2d_hull(self, rng):
        K = random_polytope(15, rng)
        for u in random_units(rng, 10):
            a, b = np.linalg.svd(np.eye(3) - np.outer(u, u))[0][:, :2].T
            hull = ConvexHull(K.vertices @ np.stack([a, b], axis=1))
            assert abs(K.shadow_area(u) - hull.volume) < 1e-10

    def test_rotation_invariance(self, rng):
        K = random_polytope(12, rng, True)
        L = as_star(K)
        for _ in range(5):
            R = random_rotation(rng)
            u = unit(rng.normal(size=3))
            assert abs(shadow_volume(K.rotate(R), R @ u, 2) - shadow_volume(K, u, 2)) < 1e-10
            assert abs(section_volume(L.rotate(R), R @ u, 2) - section_volume(L, u, 2)) < 1e-10
            assert abs(shadow_volume(K.rotate(R), R @ u, 1) - shadow_volume(K, u, 1)) < 1e-10

    def test_unsupported_dimension(self, cube2):
        with pytest.raises(GeometryError):
            shadow_volume(cube2, E3, 3)


class TestJson:
    @pytest.mark.parametrize("body", [
        cube(), Ball(2.0), Ellipsoid.from_axes([1, 1, 2]), Zonotope(np.array([[1, 0.2, 0], [0, 1, 0.3], [0.1, 0, 1]])),
        StarPolytope(octahedron()),
        PerturbedBall(1.0, 0.15, [LegendreTerm(tuple(unit([1.0, 2, 3])), 2, 0.6),
                                  LegendreTerm((0.0, 0.0, 1.0), 4, 0.4)]),
    ], ids=lambda b: type(b).__name__)
    def test_round_trip_bit_exact(self, body, rng):
        back = body_from_json(json.loads(json.dumps(body.to_json())))
        U = random_units(rng, 50)
        f = (lambda B: B.support(U)) if hasattr(body, "support") else (lambda B: B.radial(U))
        assert np.array_equal(f(back), f(body))

    def test_unknown_kind(self):
        with pytest.raises((GeometryError, KeyError, ValueError)):
            body_from_json({"kind": "torus"})


def test_ball_polytope_is_inscribed():
    P = ball_polytope(1.0)
    assert len(P.vertices) >= 320
    assert 0.99 < P.volume() / (4 * np.pi / 3) < 1


def test_perturbed_ball_radial_formula(rng):
    L = PerturbedBall(1.5, 0.1, [LegendreTerm((0.0, 0.0, 1.0), 2, 1.0)])
    U = random_units(rng, 20)
    P2 = (3 * U[:, 2] ** 2 - 1) / 2
    assert np.allclose(L.radial(U), 1.5 * (1 + 0.1 * P2), atol=1e-14)
