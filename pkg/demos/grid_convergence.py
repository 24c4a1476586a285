"""Margin drift between two quadrature grids.

Runs the selected registry checks on the default corpus at a coarse and a
reference grid and prints, per check, the largest change in margin and the
body where it occurs.  This is how the coarse-grid tolerance table in
``valugeo.verify`` was sized.

    python demos/grid_convergence.py --checks petty_phi,chain_dual
"""
import argparse
from collections import defaultdict

from valugeo.verify import Config, run_suite


def drift(checks, coarse, reference, seed=42):
    a = run_suite(checks, config=Config(grid=coarse, seed=seed))
    b = run_suite(checks, config=Config(grid=reference, seed=seed))
    key = lambda r: (r.check, r.bodies, r.measure, r.params)
    ref = {key(r): r.margin for r in b}
    out = defaultdict(lambda: (0.0, None))
    for r in a:
        d = abs(r.margin - ref[key(r)])
        if d >= out[r.check][0]:
            out[r.check] = (d, ",".join(r.bodies))
    return dict(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--checks", default="petty_phi,gppi_mixed,chain_dual,busemann_psi")
    ap.add_argument("--coarse", default="coarse")
    ap.add_argument("--reference", default="acceptance")
    a = ap.parse_args()
    print(f"{'check':24s} {'max |d margin|':>15s}  body")
    for cid, (d, body) in drift(a.checks.split(","), a.coarse, a.reference).items():
        print(f"{cid:24s} {d:15.3e}  {body}")


if __name__ == "__main__":
    main()
