"""Deterministic test bodies and measure presets."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bodies import (Ball, ConvexBody, Ellipsoid, GeometryError, LegendreTerm, PerturbedBall,
                     Polytope, StarBody, Zonotope, as_star, body_from_json)
from .sphere import ZonalMeasure, unit

DEFAULT_SEED = 42
SHEAR = np.array([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
PRESETS = ("discrete", "lebesgue", "quadratic")


@dataclass(frozen=True, eq=False)
class CorpusBody:
    """A named body with its convex and star-body roles."""

    id: str
    convex: ConvexBody
    star: StarBody

    @property
    def is_ball(self) -> bool:
        return isinstance(self.convex, Ball)

    @property
    def symmetric(self) -> bool:
        if isinstance(self.convex, Ellipsoid):
            return True
        V = self.convex.as_polytope().vertices
        d = V[:, None, :] + V[None, :, :]
        return bool(np.all(np.min(np.linalg.norm(d, axis=2), axis=1) < 1e-9 * np.abs(V).max()))

    def to_json(self) -> dict:
        body = self.star if isinstance(self.star, PerturbedBall) else self.convex
        return {"id": self.id, "body": body.to_json()}

    @classmethod
    def from_json(cls, d: dict) -> "CorpusBody":
        body = body_from_json(d["body"])
        return cls.from_body(d["id"], body)

    @classmethod
    def from_body(cls, name: str, body) -> "CorpusBody":
        if isinstance(body, PerturbedBall):
            return cls(name, body.hull_approximant(), body)
        if isinstance(body, StarBody) and not isinstance(body, ConvexBody):
            raise GeometryError(f"{name}: star-only bodies have no convex role")
        return cls(name, body, as_star(body))


# ---------------------------------------------------------------------------
# generators

def cube(half: float = 1.0) -> Polytope:
    return Polytope(half * np.array(list(itertools.product([-1.0, 1.0], repeat=3))))


def octahedron(r: float = 1.0) -> Polytope:
    return Polytope(r * np.vstack([np.eye(3), -np.eye(3)]))


def simplex() -> Polytope:
    """Regular simplex shifted so its centroid is the origin."""
    V = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float)
    return Polytope(V - V.mean(axis=0))


def random_polytope(n_points: int, rng: np.random.Generator, symmetrize: bool = False,
                    r_min: float = 0.7, r_max: float = 1.2) -> Polytope:
    """Hull of random points with radii in [r_min, r_max], centred at the vertex mean."""
    pts = unit(rng.normal(size=(n_points, 3))) * rng.uniform(r_min, r_max, size=(n_points, 1))
    if symmetrize:
        pts = np.vstack([pts, -pts])
    else:
        pts = pts - pts.mean(axis=0)
    P = Polytope(pts)
    if not P.contains_origin():
        raise GeometryError("random polytope does not contain the origin")
    return P


def perturbed_ball(eps: float, rng: np.random.Generator, degrees=(2, 4), r0: float = 1.0) -> PerturbedBall:
    """Ball perturbed by zonal Legendre terms about random axes (even degrees keep symmetry)."""
    if not 0 <= eps < 1:
        raise GeometryError("perturbation amplitude must lie in [0, 1)")
    if any(d > 4 for d in degrees):
        raise GeometryError("harmonic profile degree must be at most 4")
    w = rng.uniform(0.5, 1.0, size=len(degrees))
    w /= w.sum()
    terms = [LegendreTerm(tuple(unit(rng.normal(size=3))), int(d), float(c)) for d, c in zip(degrees, w)]
    return PerturbedBall(r0, eps, terms)


def zonotope(k: int, rng: np.random.Generator) -> Zonotope:
    return Zonotope(rng.normal(size=(k, 3)) * 0.5)


def ellipsoid(axes) -> Ellipsoid:
    axes = np.asarray(axes, dtype=float)
    if np.allclose(axes, axes[0]):
        return Ball(float(axes[0]))
    return Ellipsoid.from_axes(axes)


def generate(spec: dict | list, seed: int = DEFAULT_SEED) -> list[CorpusBody]:
    """Bodies described by ``spec`` (one dict or a list of dicts), reproducible from ``seed``.

    Each dict names a ``generator`` (random_polytope, ellipsoid, perturbed_ball,
    zonotope, cube, octahedron, simplex, ball) and its parameters.
    """
    specs = spec if isinstance(spec, list) else [spec]
    rng = np.random.default_rng(seed)
    out = []
    for k, s in enumerate(specs):
        gen = s.get("generator")
        name = s.get("id", f"{gen}_{k}")
        if gen == "random_polytope":
            body = random_polytope(int(s.get("n_points", 12)), rng, bool(s.get("symmetrize", False)))
        elif gen == "ellipsoid":
            body = ellipsoid(s["axes"])
        elif gen == "perturbed_ball":
            body = perturbed_ball(float(s["eps"]), rng, tuple(s.get("degrees", (2, 4))), float(s.get("r0", 1.0)))
            if body.eps == 0:
                body = Ball(body.r0)
        elif gen == "zonotope":
            body = zonotope(int(s.get("k", 4)), rng)
        elif gen == "cube":
            body = cube(float(s.get("half", 1.0)))
        elif gen == "octahedron":
            body = octahedron(float(s.get("r", 1.0)))
        elif gen == "simplex":
            body = simplex()
        elif gen == "ball":
            body = Ball(float(s.get("radius", 1.0)))
        else:
            raise GeometryError(f"unknown generator {gen!r}")
        out.append(CorpusBody.from_body(name, body))
    return out


DEFAULT_SPEC = [
    {"generator": "ball", "id": "B"},
    {"generator": "ball", "radius": 2.0, "id": "2B"},
    {"generator": "cube", "id": "cube"},
    {"generator": "octahedron", "id": "octahedron"},
    {"generator": "ellipsoid", "axes": [1, 1, 2], "id": "ellipsoid_112"},
    {"generator": "random_polytope", "n_points": 10, "symmetrize": True, "id": "random_polytope_0"},
    {"generator": "random_polytope", "n_points": 14, "symmetrize": True, "id": "random_polytope_1"},
    {"generator": "random_polytope", "n_points": 18, "symmetrize": False, "id": "random_polytope_2"},
    {"generator": "perturbed_ball", "eps": 0.15, "degrees": [2], "id": "perturbed_ball_0"},
    {"generator": "perturbed_ball", "eps": 0.15, "degrees": [2, 4], "id": "perturbed_ball_1"},
    {"generator": "zonotope", "k": 4, "id": "zonotope_0"},
]


def default_corpus(seed: int = DEFAULT_SEED) -> list[CorpusBody]:
    """The 12-body default corpus (the sheared cube is inserted after the octahedron)."""
    bodies = generate(DEFAULT_SPEC, seed)
    sheared = CorpusBody.from_body("sheared_cube", cube().linear_image(SHEAR))
    return bodies[:4] + [sheared] + bodies[4:]


def measure_presets(mass: float) -> dict[str, ZonalMeasure]:
    return {name: ZonalMeasure.preset(name, mass) for name in PRESETS}


# ---------------------------------------------------------------------------
# serialization

def emit(directory, bodies: list[CorpusBody] | None = None, seed: int = DEFAULT_SEED) -> list[Path]:
    """Write one JSON file per body plus measures.json into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    bodies = default_corpus(seed) if bodies is None else bodies
    paths = []
    for b in bodies:
        path = directory / f"{b.id}.json"
        path.write_text(json.dumps(b.to_json(), indent=2, sort_keys=True) + "\n")
        paths.append(path)
    measures = {f"{name}({m:g})": ZonalMeasure.preset(name, m).to_json()
                for m in (0.5, 1.0, float(np.pi)) for name in PRESETS}
    mpath = directory / "measures.json"
    mpath.write_text(json.dumps(measures, indent=2, sort_keys=True) + "\n")
    paths.append(mpath)
    return paths


def load(path) -> list[CorpusBody]:
    """Bodies from a directory of JSON files, a JSON list, or a single body file."""
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.glob("*.json") if p.name != "measures.json")
        return [_load_one(json.loads(p.read_text()), p.stem) for p in files]
    data = json.loads(path.read_text())
    if isinstance(data, list):
        return [_load_one(d, f"body_{k}") for k, d in enumerate(data)]
    return [_load_one(data, path.stem)]


def _load_one(d: dict, default_id: str) -> CorpusBody:
    if "body" in d:
        return CorpusBody.from_json(d)
    return CorpusBody.from_body(default_id, body_from_json(d))
