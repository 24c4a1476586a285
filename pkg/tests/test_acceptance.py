"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The full ``valugeo verify --suite all`` run (criterion 11) is executed once per
session through the CLI; its reports also serve criteria 4, 5, 6, 9 and 10.
"""
import json
import time

import numpy as np
import pytest

from valugeo import radial_valuations as rv
from valugeo import valuations as val
from valugeo import verify
from valugeo.bodies import Ball, as_star, section_volume, volume_star
from valugeo.cli import main
from valugeo.corpus import cube, default_corpus, octahedron
from valugeo.sphere import ZonalMeasure, build_grid, convolve_zonal, radon_transform, unit

from conftest import record_criterion

K2, K3 = np.pi, 4 * np.pi / 3
TIME_LIMIT_S = 15 * 60


@pytest.fixture(scope="session")
def suite_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("suite") / "reports.json"
    t0 = time.perf_counter()
    code = main(["verify", "--suite", "all", "--grid", "acceptance", "--out", str(out)])
    wall = time.perf_counter() - t0
    return code, wall, json.loads(out.read_text())


def rows(suite_run, check):
    return [r for r in suite_run[2] if r["check"] == check]


def worst(rs):
    return min(r["margin"] for r in rs)


# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["cube", "octahedron"])
@pytest.mark.parametrize("preset", ["discrete", "lebesgue"])
def test_criterion_01_mixed_identity(name, preset):
    K = {"cube": cube, "octahedron": octahedron}[name]()
    mu = ZonalMeasure.preset(preset, 0.5)
    t0 = time.perf_counter()
    v = verify.identity_5_5_value(K, K, mu, "acceptance")
    dt = time.perf_counter() - t0
    ok = abs(v - 0.25) <= 1e-5 and dt < 60
    record_criterion(1, f"V(K,K,Gamma Phi*(K,K)) = 1/4, {name}, {preset}(1/2)", ok,
                     f"value {v:.12f}, {dt:.2f} s")
    assert ok


@pytest.mark.parametrize("name", ["B", "cube"])
@pytest.mark.parametrize("preset", ["discrete", "lebesgue"])
def test_criterion_02_lp_identity_literal(name, preset):
    """The criterion states 2/(n+p) = 0.4 at p = 2; this checks that literal value."""
    K = Ball(1.0) if name == "B" else cube()
    v = verify.identity_5_8_value(K, ZonalMeasure.preset(preset, 0.5), 2, "acceptance")
    ok = abs(v - 0.4) <= 1e-4
    record_criterion(2, f"V_p(K, Gamma_p Phi_p* K) = 0.4, {name}, {preset}(1/2), p=2", ok, f"value {v:.12f}")
    assert ok


@pytest.mark.parametrize("name", ["B", "cube"])
@pytest.mark.parametrize("preset", ["discrete", "lebesgue"])
def test_lp_identity_value_one_over_n_plus_p(name, preset):
    """Companion to criterion 2: the computed value is 1/(n+p) to 1e-4."""
    K = Ball(1.0) if name == "B" else cube()
    v = verify.identity_5_8_value(K, ZonalMeasure.preset(preset, 0.5), 2, "acceptance")
    assert abs(v - 0.2) <= 1e-4


@pytest.mark.parametrize("preset", ["discrete", "lebesgue", "quadratic"])
def test_criterion_03_ball_identities(preset):
    U = unit(np.random.default_rng(3).normal(size=(8, 3)))
    errs = {}
    for mass in (0.5, 1.0):
        for key, (vals, target) in verify.ball_identity_values(ZonalMeasure.preset(preset, mass), U).items():
            errs[f"{key} m={mass}"] = float(np.max(np.abs(vals - target)))
    worst_key = max(errs, key=errs.get)
    ok = errs[worst_key] <= 1e-8
    record_criterion(3, f"ball identities, {preset}", ok, f"max error {errs[worst_key]:.2e} at {worst_key}")
    assert ok


def test_criterion_04_petty_and_primal_chain(suite_run):
    petty = val.polar_volume(val.proj_field(Ball(1.0), 2)) * K3**2
    chain = rows(suite_run, "chain_primal")
    bodies = {r["bodies"][0] for r in chain}
    presets = {r["measure"].split("(")[0] for r in chain if r["measure"]}
    ball = [r for r in chain if r["bodies"] == ["B"]]
    ok = (abs(petty - 64 / 27) <= 1e-8 and worst(chain) >= -1e-8 and len(bodies) == 12 and len(presets) == 3
          and {r["params"][:3] for r in chain} == {"i=1", "i=2"}
          and max(abs(r["margin"]) for r in ball) <= 1e-5)
    record_criterion(4, "Petty product 64/27 and primal chain", ok,
                     f"petty {petty:.12f}, min margin {worst(chain):.2e}, ball max |margin| "
                     f"{max(abs(r['margin']) for r in ball):.1e}")
    assert ok


def test_criterion_05_dual_chain(suite_run):
    chain = rows(suite_run, "chain_dual")
    ball = [r for r in chain if r["bodies"] == ["B"]]
    ok = bool(chain) and worst(chain) >= -1e-8 and max(abs(r["margin"]) for r in ball) <= 1e-5
    record_criterion(5, "dual chain with tau(S^2) = pi", ok,
                     f"{len(chain)} reports, min margin {worst(chain):.2e}")
    assert ok


def test_criterion_06_busemann(suite_run):
    ratio = volume_star(rv.intersection_field(Ball(1.0), 2)) / K3**2
    psi = rows(suite_run, "busemann_psi")
    ok = abs(ratio - 3 * np.pi**2 / 4) <= 1e-6 and not any(r["verdict"] == "fail" for r in psi)
    record_criterion(6, "V(IB)/V(B)^2 = 3 pi^2/4 and busemann_psi", ok,
                     f"ratio error {abs(ratio - 3 * np.pi**2 / 4):.1e}, busemann_psi min margin {worst(psi):.2e}")
    assert ok


def test_criterion_07_steiner():
    U = unit(np.random.default_rng(7).normal(size=(50, 3)))
    defect = 0.0
    for L in (Ball(1.0), as_star(cube())):
        for tau in (ZonalMeasure.discrete(np.pi), ZonalMeasure.lebesgue(np.pi)):
            for r in (0.0, 0.5, 1.0):
                lhs, rhs = rv.steiner_radial_decomposition(L, tau, r, U)
                defect = max(defect, float(np.max(np.abs(lhs - rhs) / np.abs(rhs))))
    ok = defect < 1e-8
    record_criterion(7, "Steiner decomposition", ok, f"max relative defect {defect:.2e}")
    assert ok


def test_criterion_08_oracle_pairs():
    rng = np.random.default_rng(8)
    U = unit(rng.normal(size=(100, 3)))
    polys = [b.convex for b in default_corpus() if b.convex.is_polytopal()]
    e1 = max(float(np.max(np.abs(val.proj_body_support(P.as_polytope(), i, U)
                                  - val.proj_body_support_measure(P.as_polytope(), i, U))))
             for P in polys for i in (1, 2))
    stars = [as_star(P.as_polytope()) for P in polys if P.as_polytope().contains_origin()]
    e2 = max(abs(rv.intersection_body_radial(L, 2, u) - section_volume(L, u, 2)) for L in stars for u in U[:20])
    g = build_grid("acceptance")
    A, B = rng.normal(size=(3, 3)), rng.normal(size=(3, 3))
    f = lambda W: np.einsum("ni,ij,nj->n", W, A, W) + W[:, 0] ** 3
    h = lambda W: np.einsum("ni,ij,nj->n", W, B, W) ** 2 + W[:, 1]
    e3 = abs(g.integrate(radon_transform(f, g.nodes) * h(g.nodes)) - g.integrate(f(g.nodes) * radon_transform(h, g.nodes)))
    mu1, mu2 = ZonalMeasure.poly([1.0, 0.0, 1.0]), ZonalMeasure.poly([0.5, 0.0, 0.0, 0.0, 1.0])
    a = convolve_zonal(lambda W: 1 + W[:, 2] ** 2, mu2)(U)
    b = convolve_zonal(lambda W: 0.5 + W[:, 2] ** 4, mu1)(U)
    e4 = float(np.max(np.abs(a - b)))
    ok = e1 <= 1e-9 and e2 <= 1e-6 and e3 <= 1e-6 and e4 <= 1e-8
    record_criterion(8, "oracle pairs", ok,
                     f"projection {e1:.1e}, intersection {e2:.1e}, Radon {e3:.1e}, convolution {e4:.1e}")
    assert ok


def test_criterion_09_dominance(suite_run):
    phi = [r for r in rows(suite_run, "chain_primal") if "Phi* <= Pi*" in r["params"] and r["params"].startswith("i=2")]
    gam = rows(suite_run, "gamma_star_dom")
    m = min(worst(phi), worst(gam))
    ok = bool(phi) and bool(gam) and m >= -1e-8
    record_criterion(9, "dominance of Phi* by Pi* and of Gamma^mu_p* by Gamma_p*", ok,
                     f"min margins {worst(phi):.2e} / {worst(gam):.2e}")
    assert ok


def test_criterion_10_background(suite_run):
    ids = ("blaschke_santalo", "dual_affine_ineq", "af_consequences", "lp_dual_minkowski")
    fails = {cid: sum(r["verdict"] == "fail" for r in rows(suite_run, cid)) for cid in ids}
    probe = rows(suite_run, "lutwak_conjecture_probe")
    ratio = min(r["lhs"] / r["rhs"] for r in probe)
    ok = not any(fails.values()) and all(rows(suite_run, c) for c in ids) and ratio >= 1 - 5e-3
    record_criterion(10, "background inequalities and conjecture probe", ok,
                     f"failures {fails}, probe min ratio {ratio:.6f}")
    assert ok


def test_criterion_11_full_suite(suite_run):
    code, wall, reps = suite_run
    ok = code == 0 and wall < TIME_LIMIT_S
    record_criterion(11, "verify --suite all at the acceptance grid", ok,
                     f"exit {code}, {wall:.0f} s, {len(reps)} reports")
    assert ok
