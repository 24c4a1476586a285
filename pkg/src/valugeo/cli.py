"""Command-line front end: ``valugeo compute|verify|corpus|probe``.

Exit codes: 0 success, 1 failed checks, 2 usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import centroid as cen
from . import functionals as fn
from . import radial_valuations as rv
from . import valuations as val
from . import verify
from .bodies import GeometryError
from .corpus import default_corpus, emit, generate, load
from .sphere import RESOLUTIONS, ZonalMeasure, as_grid, radon_transform

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# inputs

def _body(spec: str | None, seed: int) -> CorpusBody:
    if spec is None:
        raise UsageError("--body is required for this operation")
    path = Path(spec)
    if path.exists():
        bodies = load(path)
        if len(bodies) != 1:
            raise UsageError(f"{spec} holds {len(bodies)} bodies; pass a single body")
        return bodies[0]
    for b in default_corpus(seed):
        if b.id == spec:
            return b
    raise UsageError(f"no body file or default-corpus id named {spec!r}")


def _measure(spec: str | None, mass: float, flag: str) -> ZonalMeasure:
    if spec is None:
        raise UsageError(f"{flag} is required for this operation")
    path = Path(spec)
    if path.exists():
        return ZonalMeasure.from_json(json.loads(path.read_text()))
    try:
        return ZonalMeasure.preset(spec, mass)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _need(value, flag: str):
    if value is None:
        raise UsageError(f"{flag} is required for this operation")
    return value


# ---------------------------------------------------------------------------
# compute

def _field_op(fn_of_nodes):
    return ("field", fn_of_nodes)


def _scalar_op(fn_):
    return ("scalar", fn_)


def _compute_op(a, grid: str):
    """Resolve --op into ('field', f(U)) or ('scalar', f())."""
    op = a.op
    mu = lambda: _measure(a.mu, a.mass if a.mass is not None else 0.5, "--mu")
    tau = lambda: _measure(a.tau, a.mass if a.mass is not None else math.pi, "--tau")
    i = lambda: int(_need(a.i, "--i"))
    p = lambda: float(_need(a.p, "--p"))
    b = _body(a.body, a.seed)
    K, L = b.convex, b.star
    table = {
        "support": lambda: _field_op(lambda U: K.support(U)),
        "radial": lambda: _field_op(lambda U: L.radial(U)),
        "proj": lambda: _field_op(lambda U: val.proj_body_support(K, i(), U)),
        "proj_p": lambda: _field_op(lambda U: val.lp_proj_support(K, p(), U, grid)),
        "phi_i": lambda: _field_op(lambda U: val.phi_i_support(K, mu(), i(), U, grid)),
        "phi_p": lambda: _field_op(lambda U: val.phi_p_support(K, mu(), p(), U, grid)),
        "centroid_p": lambda: _field_op(lambda U: cen.centroid_p_support(L, p(), U, grid)),
        "gamma_mu_p": lambda: _field_op(lambda U: cen.gamma_mu_p_support(L, mu(), p(), U, grid)),
        "intersection": lambda: _field_op(lambda U: rv.intersection_body_radial(L, i(), U)),
        "psi_i": lambda: _field_op(lambda U: rv.psi_i_radial(L, tau(), i(), U, grid)),
        "radon": lambda: _field_op(lambda U: radon_transform(lambda V: L.radial(V), U)),
        "volume": lambda: _scalar_op(K.volume),
        "volume_star": lambda: _scalar_op(lambda: L.volume_star(grid)),
        "polar_volume": lambda: _scalar_op(lambda: fn.polar_volume_exact(K)),
        "quermass": lambda: _scalar_op(lambda: list(fn.quermassintegrals(K, grid))),
        "intrinsic_volumes": lambda: _scalar_op(lambda: list(fn.intrinsic_volumes(K, grid))),
        "dual_quermass": lambda: _scalar_op(lambda: list(fn.dual_quermassintegrals(L, grid))),
        "affine_quermass": lambda: _scalar_op(lambda: fn.affine_quermassintegral(K, i(), grid)),
        "dual_affine_quermass": lambda: _scalar_op(lambda: fn.dual_affine_quermassintegral(L, i(), grid)),
        "p_moment": lambda: _scalar_op(lambda: cen.p_moment(L, p(), grid)),
        "gamma_volume": lambda: _scalar_op(lambda: cen.gamma_volume(L, mu(), p(), grid)),
        "phi_polar_volume": lambda: _scalar_op(
            lambda: val.polar_volume(val.phi_i_field(K, mu(), i(), grid), grid)),
    }
    if op not in table:
        raise UsageError(f"unknown --op {op!r}; choose from {', '.join(sorted(table))}")
    return table[op]()


COMPUTE_OPS = ("support", "radial", "proj", "proj_p", "phi_i", "phi_p", "centroid_p", "gamma_mu_p",
               "intersection", "psi_i", "radon", "volume", "volume_star", "polar_volume", "quermass",
               "intrinsic_volumes", "dual_quermass", "affine_quermass", "dual_affine_quermass",
               "p_moment", "gamma_volume", "phi_polar_volume")


def cmd_compute(a) -> tuple[int, str]:
    t0 = time.perf_counter()
    kind, f = _compute_op(a, a.grid)
    if kind == "scalar":
        value = f()
        out = {"op": a.op, "body": a.body, "value": value, "grid": a.grid}
        text_csv = f"op,value\n{a.op},{value!r}\n" if not isinstance(value, list) else None
    else:
        g = as_grid(a.grid)
        values = np.asarray(f(g.nodes), dtype=float)
        out = {"op": a.op, "body": a.body, "grid": a.grid, "nodes": g.nodes.tolist(),
               "weights": g.weights.tolist(), "values": values.tolist()}
        text_csv = "x,y,z,value\n" + "".join(
            f"{x!r},{y!r},{z!r},{v!r}\n" for (x, y, z), v in zip(g.nodes.tolist(), values.tolist()))
    out["runtime_ms"] = round((time.perf_counter() - t0) * 1e3, 3)
    if a.format == "csv":
        if text_csv is None:
            raise UsageError("csv output is not available for vector-valued scalars")
        return EXIT_OK, text_csv
    return EXIT_OK, json.dumps(out, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# verify, probe, corpus

def _corpus(spec: str, seed: int):
    if spec == "default":
        return default_corpus(seed)
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"corpus {spec!r} not found")
    return load(path)


def _render(reports, fmt: str) -> str:
    if fmt == "csv":
        return verify.reports_to_csv(reports)
    return json.dumps(verify.reports_to_json(reports), indent=1, sort_keys=True) + "\n"


def cmd_verify(a) -> tuple[int, str]:
    config = verify.Config(grid=a.grid, seed=a.seed, threads=a.threads)
    try:
        ids = verify.resolve_suite(a.suite)
    except verify.CheckError as e:
        raise UsageError(str(e)) from None
    reports = verify.run_suite(ids, _corpus(a.corpus, a.seed), config)
    code = EXIT_OK if verify.suite_passed(reports) else EXIT_FAIL
    return code, _render(reports, a.format)


def cmd_probe(a) -> tuple[int, str]:
    config = verify.Config(grid=a.grid, seed=a.seed, threads=a.threads, probe_samples=a.samples)
    reports = verify.run_suite(list(verify.PROBES), _corpus(a.corpus, a.seed), config)
    if a.format == "csv":
        return EXIT_OK, verify.reports_to_csv(reports)
    summary = {}
    for r in reports:
        key = f"{r.check} {r.params}".strip()
        ratio = r.lhs / r.rhs
        if key not in summary or ratio < summary[key]["min_ratio"]:
            summary[key] = {"min_ratio": ratio, "bodies": list(r.bodies), "measure": r.measure}
    out = {"summary": summary, "reports": verify.reports_to_json(reports)}
    return EXIT_OK, json.dumps(out, indent=1, sort_keys=True) + "\n"


def cmd_corpus(a) -> tuple[int, str]:
    if a.spec:
        bodies = generate(json.loads(Path(a.spec).read_text()), a.seed)
    else:
        bodies = default_corpus(a.seed)
    if a.emit:
        paths = emit(a.emit, bodies, a.seed)
        return EXIT_OK, json.dumps([str(p) for p in paths], indent=1) + "\n"
    return EXIT_OK, json.dumps([b.to_json() for b in bodies], indent=1, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--grid", choices=sorted(RESOLUTIONS), default=d("acceptance"))
    parser.add_argument("--seed", type=int, default=d(42))
    parser.add_argument("--format", choices=("json", "csv"), default=d("json"))
    parser.add_argument("--out", default=d(None), help="write output to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="valugeo", description="Zonal Minkowski valuations and their inequalities.")
    _common(p, suppress=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compute", help="evaluate one operator or functional")
    _common(c, suppress=True)
    c.add_argument("--op", required=True, help=f"one of: {', '.join(COMPUTE_OPS)}")
    c.add_argument("--body", help="body JSON file or default-corpus id")
    c.add_argument("--mu", help="measure preset (discrete, lebesgue, quadratic, cap(alpha)) or JSON file")
    c.add_argument("--tau", help="measure preset for radial valuations")
    c.add_argument("--mass", type=float, help="total mass (default 1/2 for --mu, pi for --tau)")
    c.add_argument("--i", type=int)
    c.add_argument("--p", type=float)

    v = sub.add_parser("verify", help="run registry checks")
    _common(v, suppress=True)
    v.add_argument("--suite", default="all", help="'all' or comma-separated check ids")
    v.add_argument("--corpus", default="default", help="'default', a directory or a JSON file")
    v.add_argument("--threads", type=int, help="worker threads (capped by VALUGEO_THREADS)")

    pr = sub.add_parser("probe", help="report-only probes (Lutwak projection conjecture and the Gamma open problem)")
    _common(pr, suppress=True)
    pr.add_argument("--corpus", default="default")
    pr.add_argument("--samples", type=int, default=8, help="extra random polytopes for the conjecture probe")
    pr.add_argument("--threads", type=int)

    k = sub.add_parser("corpus", help="generate or emit the body corpus")
    _common(k, suppress=True)
    k.add_argument("--emit", help="directory to write one JSON file per body")
    k.add_argument("--spec", help="JSON generator spec (default: built-in corpus)")
    return p


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "probe": cmd_probe, "corpus": cmd_corpus}


def main(argv: list[str] | None = None) -> int:
    try:
        a = build_parser().parse_args(argv)
        code, text = COMMANDS[a.command](a)
    except UsageError as e:
        print(f"valugeo: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (GeometryError, ValueError, KeyError, OSError, json.JSONDecodeError) as e:
        print(f"valugeo: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if a.out:
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
