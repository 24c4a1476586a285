import json
import math

import numpy as np
import pytest

from valugeo import verify
from valugeo.corpus import default_corpus
from valugeo.sphere import ZonalMeasure

GRIDS = ("coarse", "medium", "acceptance", "fine")


@pytest.fixture(scope="module")
def small():
    keep = {"B", "2B", "cube", "octahedron", "ellipsoid_112"}
    return [b for b in default_corpus() if b.id in keep]


def test_registry_ids():
    assert len(verify.REGISTRY) == 24
    assert set(verify.PROBES) <= set(verify.REGISTRY)
    assert list(verify.resolve_suite("all")) == list(verify.REGISTRY)


def test_tolerance_table_is_complete():
    for cid in verify.REGISTRY:
        for g in GRIDS:
            tol, eq = verify.tolerance(cid, g)
            assert tol > 0 and eq > 0
        # refining the grid never loosens a tolerance
        assert verify.tolerance(cid, "coarse")[0] >= verify.tolerance(cid, "acceptance")[0]
    with pytest.raises(KeyError):
        verify.tolerance("petty_phi", "ultra")


def test_unknown_ids():
    with pytest.raises(verify.CheckError):
        verify.check("nope")
    with pytest.raises(verify.CheckError):
        verify.resolve_suite("petty_phi,nope")


@pytest.mark.parametrize("margin,expect,verdict", [
    (0.0, False, "equality-witness"), (1e-7, False, "equality-witness"), (0.3, False, "pass"),
    (-1e-9, False, "equality-witness"), (-0.3, False, "fail"), (0.3, True, "fail"), (math.nan, False, "fail"),
])
def test_verdict_rules(margin, expect, verdict):
    assert verify._verdict(margin, 1e-8, 1e-5, expect) == verdict


def test_petty_ball_is_equality_witness(small):
    reps = verify.check("petty_phi", small)
    ball = [r for r in reps if r.bodies == ("B",) and r.measure.startswith("discrete")]
    assert ball
    r = ball[0]
    # [DERIVED] (kappa_3 / kappa_2)^3 = 64/27 for mu(S^2) = 1/2
    assert abs(r.lhs - 64 / 27) < 1e-8
    assert r.verdict == "equality-witness"
    assert not any(x.failed for x in reps)


def test_identity_5_5_cube_lebesgue():
    from valugeo.corpus import cube
    C = cube()
    assert abs(verify.identity_5_5_value(C, C, ZonalMeasure.lebesgue(0.5)) - 0.25) < 1e-5


def test_identity_5_8_value_is_one_over_n_plus_p():
    from valugeo.bodies import Ball
    for p in (2, 3):
        v = verify.identity_5_8_value(Ball(1.0), ZonalMeasure.lebesgue(0.5), p)
        assert abs(v - 1 / (3 + p)) < 1e-10


@pytest.mark.parametrize("cid", ["petty_phi", "phi_i_ppi", "identity_5_5", "identity_5_8", "identity_5_4",
                                 "blaschke_santalo", "busemann_intersection", "dual_affine_ineq",
                                 "moment_ineq", "lp_dual_minkowski"])
def test_cheap_checks_green_on_small_corpus(small, cid):
    reps = verify.check(cid, small, verify.Config(grid="acceptance"))
    assert reps
    bad = [(r.bodies, r.measure, r.params, r.margin) for r in reps if r.failed]
    assert not bad


def test_balls_are_equality_witnesses(small):
    """Ball cases of ball-extremal inequalities sit within 1e-5 of equality."""
    ball_ids = {"B", "2B"}
    for cid in ("petty_phi", "phi_i_ppi", "busemann_intersection", "dual_affine_ineq", "blaschke_santalo"):
        for r in verify.check(cid, small):
            if set(r.bodies) <= ball_ids:
                assert abs(r.margin) <= 1e-5, (cid, r.bodies, r.margin)


def test_report_serialization(small):
    reps = verify.check("identity_5_5", small)
    rows = verify.reports_to_json(reps, runtime=False)
    assert all("runtime_ms" not in r for r in rows)
    json.dumps(rows)
    csv = verify.reports_to_csv(reps)
    assert csv.splitlines()[0].startswith("check,")
    assert len(csv.strip().splitlines()) == len(reps) + 1


def test_run_suite_is_deterministic_and_ordered(small):
    cfg = verify.Config(grid="coarse", threads=2)
    ids = ["blaschke_santalo", "identity_5_5", "petty_phi"]
    a = verify.run_suite(ids, small, cfg)
    b = verify.run_suite(ids, small, verify.Config(grid="coarse", threads=1))
    assert verify.reports_to_json(a, runtime=False) == verify.reports_to_json(b, runtime=False)
    order = [r.check for r in a]
    # reports come back grouped in the requested id order, whatever the completion order
    assert order == sorted(order, key=ids.index)


def test_probe_reports_never_fail(small):
    reps = verify.check("gamma_open_probe", small, verify.Config(grid="coarse"))
    assert reps and all(r.probe for r in reps)
    assert verify.suite_passed(reps)


def test_threads_env(monkeypatch):
    monkeypatch.setenv("VALUGEO_THREADS", "3")
    assert verify.max_threads() == 3
