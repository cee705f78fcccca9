"""Built-in example models and a seeded suite of random models."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from . import config
from .errors import UnknownExample
from .model import DistributionModel, MixedLaw1D, validate_model

__all__ = ["EXAMPLES", "example_model", "example_spec", "random_model_suite", "square_secant_error"]

EXAMPLES = {
    "ex2_4": "discrete X in {-1, 1}; xi > 0 while R^2 = 0 and Lambda = 0",
    "ex2_5": "discrete X in {0, 1}; R^2 = 0 but Lambda = 1/9",
    "ex2_6": "X ~ U[0,1], Y = 1/2 + Z X / 2 with a fair sign Z; R^2 = 0 and Lambda = 0",
    "ex2_6_sq": "same X with response Y^2; Lambda = 0 but R^2 = 1/16",
    "ex3_3": "discrete X in {-1, 1} with separated conditional supports; Lambda = 1",
    "ex3_4": "X ~ U([-1,0] u [1,3]), Y = 3 * 1{X >= 1} - 1; perfect dependence, Lambda = 4/9",
    "ex3_5": "P(X = n) = 2^-n with nested uniform conditionals, truncated after 40 atoms",
}


def _law(atoms=(), pieces=()):
    return {
        "atoms": [{"location": a, "mass": m} for a, m in atoms],
        "pieces": [{"lower": lo, "upper": hi, "mass": m} for lo, hi, m in pieces],
    }


def _point(alpha, beta=0.0):
    return {"alpha": alpha, "beta": beta}


def _square_knots(k: int) -> np.ndarray:
    # graded toward x = 1, where (1 - x)^2 / 4 flattens out
    j = np.arange(k + 1) / k
    return 1.0 - (1.0 - j) ** 2


def _ex2_6_sq_spec(k: int) -> dict:
    knots = _square_knots(k)
    pieces, comps = [], []
    for i, (x0, x1) in enumerate(zip(knots[:-1], knots[1:])):
        pieces.append({"lower": float(x0), "upper": float(x1), "mass": float(x1 - x0)})
        for sign in (1.0, -1.0):
            f0, f1 = (1 + sign * x0) ** 2 / 4, (1 + sign * x1) ** 2 / 4
            beta = (f1 - f0) / (x1 - x0)
            amap = _point(float(f0 - beta * x0), float(beta))
            comps.append({"weight": 0.5, "lower": amap, "upper": amap, "piece": i})
    err = square_secant_error(k)
    return {
        "p": 1,
        "marginal": {"atoms": [], "pieces": pieces},
        "conditional": {"atom_laws": {}, "continuous_components": comps},
        "notes": [f"secant approximation of y -> y^2 on {k} graded X-pieces; sup CDF error {err:.2e}"],
    }


@lru_cache(maxsize=8)
def square_secant_error(k: int = config.SQUARE_PIECES) -> float:
    """Sup distance between the approximate and the exact CDF of Y^2."""
    knots = _square_knots(k)
    atoms, pieces = [], []
    for x0, x1 in zip(knots[:-1], knots[1:]):
        for sign in (1.0, -1.0):
            f0, f1 = (1 + sign * x0) ** 2 / 4, (1 + sign * x1) ** 2 / 4
            pieces.append((min(f0, f1), max(f0, f1), 0.5 * (x1 - x0)))
    approx = MixedLaw1D.build(atoms, pieces, normalize=True)
    s = np.linspace(0.0, 1.0, 200001)
    exact = 0.5 * np.clip(2 * np.sqrt(s) - 1, 0, 1) + 0.5 * np.clip(2 * np.sqrt(s), 0, 1)
    return float(np.max(np.abs(approx.cdf(s) - exact)))


def example_spec(example_id: str) -> dict:
    """Raw JSON-ready description of a catalog model."""
    if example_id == "ex2_4":
        return {
            "p": 1,
            "marginal": {"atoms": [{"point": [-1], "mass": "4/7"}, {"point": [1], "mass": "3/7"}]},
            "conditional": {
                "atom_laws": {
                    "0": _law(pieces=[(-1.5, -0.5, "1/2"), (0.5, 1.5, "1/2")]),
                    "1": _law(pieces=[(-0.5, 0.5, 1)]),
                }
            },
        }
    if example_id == "ex2_5":
        return {
            "p": 1,
            "marginal": {"atoms": [{"point": [0], "mass": "1/3"}, {"point": [1], "mass": "2/3"}]},
            "conditional": {
                "atom_laws": {
                    "0": _law(pieces=[(-0.5, 0.5, 1)]),
                    "1": _law(pieces=[(-1.5, -0.5, "2/3"), (1, 3, "1/3")]),
                }
            },
        }
    if example_id == "ex2_6":
        return {
            "p": 1,
            "marginal": {"pieces": [{"lower": 0, "upper": 1, "mass": 1}]},
            "conditional": {
                "continuous_components": [
                    {"weight": "1/2", "lower": _point(0.5, 0.5), "upper": _point(0.5, 0.5)},
                    {"weight": "1/2", "lower": _point(0.5, -0.5), "upper": _point(0.5, -0.5)},
                ]
            },
        }
    if example_id == "ex2_6_sq":
        return _ex2_6_sq_spec(config.SQUARE_PIECES)
    if example_id == "ex3_3":
        return {
            "p": 1,
            "marginal": {"atoms": [{"point": [-1], "mass": "1/3"}, {"point": [1], "mass": "2/3"}]},
            "conditional": {
                "atom_laws": {
                    "0": _law(pieces=[(-1, 0, 1)]),
                    "1": _law(atoms=[(1, "1/2")], pieces=[(1, 3, "1/2")]),
                }
            },
        }
    if example_id == "ex3_4":
        return {
            "p": 1,
            "marginal": {
                "pieces": [{"lower": -1, "upper": 0, "mass": "1/3"}, {"lower": 1, "upper": 3, "mass": "2/3"}]
            },
            "conditional": {
                "continuous_components": [
                    {"weight": 1, "lower": _point(-1), "upper": _point(-1), "piece": 0},
                    {"weight": 1, "lower": _point(2), "upper": _point(2), "piece": 1},
                ]
            },
        }
    if example_id == "ex3_5":
        k = config.EX3_5_ATOMS
        atoms = [{"point": [n], "mass": f"1/{2**n}"} for n in range(1, k + 1)]
        laws = {
            str(n - 1): _law(pieces=[(2.0 - 2.0 ** (3 - n), 2.0 - 2.0 ** (2 - n), 1)]) for n in range(1, k + 1)
        }
        return {
            "p": 1,
            "truncated": True,
            "marginal": {"atoms": atoms},
            "conditional": {"atom_laws": laws},
            "notes": [f"countable family truncated after {k} atoms"],
        }
    raise UnknownExample(f"unknown example id {example_id!r}; known: {', '.join(EXAMPLES)}")


@lru_cache(maxsize=None)
def example_model(example_id: str) -> DistributionModel:
    return validate_model(example_spec(example_id))


# ---------------------------------------------------------------------------
# random models
# ---------------------------------------------------------------------------


def _random_law(rng: np.random.Generator, lo: float, hi: float, lattice: bool) -> list:
    """1 to 3 uniform pieces inside [lo, hi], optionally an atom on a coarse lattice."""
    k = int(rng.integers(1, 4))
    masses = rng.dirichlet(np.ones(k + (1 if lattice else 0)))
    pieces = []
    for m in masses[:k]:
        a, b = np.sort(rng.uniform(lo, hi, 2))
        if b - a < 1e-3:
            b = a + 1e-3
        pieces.append((round(float(a), 6), round(float(b), 6), float(m)))
    atoms = []
    if lattice:
        atoms.append((float(np.round(rng.uniform(lo, hi) * 4) / 4), float(masses[-1])))
    return atoms, pieces


def _spec_from_parts(points, masses, laws, x_pieces=None) -> dict:
    total = sum(masses) + sum(pc[2] for pc in (x_pieces or []))
    spec = {
        "p": 1,
        "marginal": {
            "atoms": [{"point": [float(pt)], "mass": float(m / total)} for pt, m in zip(points, masses)],
            "pieces": [],
        },
        "conditional": {"atom_laws": {}, "continuous_components": []},
    }
    for i, (atoms, pieces) in enumerate(laws):
        spec["conditional"]["atom_laws"][str(i)] = _law(atoms, pieces)
    if x_pieces:
        for j, (lo, hi, m, comps) in enumerate(x_pieces):
            spec["marginal"]["pieces"].append({"lower": lo, "upper": hi, "mass": float(m / total)})
            for w, lower, upper in comps:
                spec["conditional"]["continuous_components"].append(
                    {"weight": w, "lower": lower, "upper": upper, "piece": j}
                )
    return spec


def _random_spec(rng: np.random.Generator, kind: str) -> dict:
    k = int(rng.integers(2, 6))
    points = np.sort(rng.choice(np.arange(-10, 11), size=k, replace=False)).astype(float)
    masses = list(rng.dirichlet(np.ones(k)))
    lattice = bool(rng.random() < 0.4)
    if kind == "independent":
        law = _random_law(rng, -2.0, 2.0, lattice)
        laws = [law] * k
    elif kind == "functional":
        values = rng.choice(np.arange(-5, 6), size=k, replace=False)
        laws = [([(float(v), 1.0)], []) for v in values]
    elif kind == "separated":
        edges = np.cumsum(rng.uniform(0.5, 2.0, k + 1))
        order = rng.permutation(k)
        laws = [None] * k
        for slot, i in enumerate(order):
            laws[i] = _random_law(rng, edges[slot], edges[slot + 1] - 0.25, lattice)
    elif kind == "mixed":
        laws = [_random_law(rng, -2.0, 2.0, lattice) for _ in range(k)]
        lo = float(points[-1] + 1)
        hi = lo + float(rng.uniform(0.5, 2.0))
        comps = []
        w = rng.dirichlet(np.ones(2))
        alpha, beta = float(rng.uniform(-1, 1)), float(rng.uniform(-1, 1))
        amap = {"alpha": round(alpha - beta * lo, 6), "beta": round(beta, 6)}
        comps.append((float(w[0]), amap, amap))
        a, b = np.sort(rng.uniform(-2, 2, 2))
        comps.append((float(w[1]), {"alpha": round(float(a), 6), "beta": 0}, {"alpha": round(float(b) + 0.01, 6), "beta": 0}))
        x_mass = float(rng.uniform(0.1, 0.5))
        return _spec_from_parts(points, [m * (1 - x_mass) for m in masses], laws, [(lo, hi, x_mass, comps)])
    else:
        laws = [_random_law(rng, -2.0, 2.0, lattice) for _ in range(k)]
    return _spec_from_parts(points, masses, laws)


def random_model_suite(count: int = 50, seed: int = 20240917) -> list[DistributionModel]:
    """Seeded random models: mostly generic discrete-X models, plus
    independent, functional, separated and mixed (atoms plus one X-piece)
    members so every characterization is exercised."""
    rng = np.random.default_rng(seed)
    kinds = ["random"] * 5 + ["independent", "functional", "separated", "mixed", "random"]
    out = []
    for i in range(count):
        spec = _random_spec(rng, kinds[i % len(kinds)])
        spec["notes"] = [f"random suite member {i} ({kinds[i % len(kinds)]})"]
        out.append(validate_model(spec))
    return out
