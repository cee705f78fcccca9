"""Joint laws of a predictor vector X and a response Y.

The family is closed under everything the rest of the package needs:

* one-dimensional laws are finite mixtures of atoms and uniform pieces
  (:class:`MixedLaw1D`);
* X is a finite mixture of atoms (any dimension) and, for p = 1, uniform
  pieces;
* given an X-atom, Y follows an arbitrary :class:`MixedLaw1D`; given X = x in a
  uniform piece, Y is a finite mixture of components that are either a point
  mass at ``alpha + beta * x`` or a uniform law on a fixed interval.

Every quantity of interest (conditional CDFs, Markov-product CDFs, relative
effects) is then piecewise polynomial and can be evaluated in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Any, Mapping, Sequence

import numpy as np

from . import config
from .errors import (
    CountError,
    DimensionError,
    DomainError,
    GeometryError,
    MassError,
    SupportError,
    ValidationError,
)

__all__ = [
    "MixedLaw1D",
    "MarginalX",
    "AffineMap",
    "Component",
    "ConditionalFamily",
    "DistributionModel",
    "Dataset",
    "parse_number",
    "validate_model",
    "conditional_law",
    "marginal_law_Y",
    "law_cdf",
    "law_quantile",
    "sample_joint",
    "collision_probability",
    "model_breakpoints",
]


def parse_number(value: Any) -> float:
    """Accept ints, floats, decimal strings and exact rationals ``"p/q"``."""
    if isinstance(value, bool):
        raise TypeError("boolean is not a number")
    if isinstance(value, (int, float, Fraction)):
        return float(value)
    if isinstance(value, str):
        return float(Fraction(value.strip()))
    raise TypeError(f"cannot interpret {value!r} as a number")


# ---------------------------------------------------------------------------
# one-dimensional laws
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MixedLaw1D:
    """Finite mixture of atoms ``(location, mass)`` and uniform pieces
    ``(lower, upper, mass)``. Pieces may overlap; atoms may not coincide."""

    atoms: tuple[tuple[float, float], ...] = ()
    pieces: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        atoms = tuple((float(a), float(m)) for a, m in self.atoms)
        pieces = tuple((float(lo), float(hi), float(m)) for lo, hi, m in self.pieces)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "pieces", pieces)
        total = 0.0
        for loc, m in atoms:
            if m < 0 or not np.isfinite(loc):
                raise MassError(f"invalid atom ({loc}, {m})")
            total += m
        for lo, hi, m in pieces:
            if m < 0:
                raise MassError(f"negative piece mass {m}")
            if not lo < hi:
                raise GeometryError(f"piece [{lo}, {hi}] needs lower < upper; state degenerate intervals as atoms")
            total += m
        if abs(total - 1.0) > config.LAW_MASS_TOL:
            raise MassError(f"law masses sum to {total!r}, not 1")
        locs = [a for a, _ in atoms]
        if len(set(locs)) != len(locs):
            raise GeometryError("atom locations must be pairwise distinct")

    @classmethod
    def build(cls, atoms=(), pieces=(), *, normalize: bool = False) -> "MixedLaw1D":
        """Merge coinciding atoms, drop zero-mass parts, optionally renormalize."""
        merged: dict[float, float] = {}
        for loc, m in atoms:
            if m > 0:
                merged[float(loc)] = merged.get(float(loc), 0.0) + float(m)
        kept = [(float(lo), float(hi), float(m)) for lo, hi, m in pieces if m > 0]
        if normalize:
            total = sum(merged.values()) + sum(m for *_, m in kept)
            merged = {k: v / total for k, v in merged.items()}
            kept = [(lo, hi, m / total) for lo, hi, m in kept]
        return cls(tuple(sorted(merged.items())), tuple(kept))

    @classmethod
    def uniform(cls, lower: float, upper: float) -> "MixedLaw1D":
        return cls((), ((lower, upper, 1.0),))

    @classmethod
    def point(cls, location: float) -> "MixedLaw1D":
        return cls(((location, 1.0),), ())

    # cached array views -----------------------------------------------------
    @cached_property
    def _atom_arrays(self):
        if not self.atoms:
            return np.empty(0), np.empty(0)
        a = np.array(self.atoms, dtype=float)
        return a[:, 0], a[:, 1]

    @cached_property
    def _piece_arrays(self):
        if not self.pieces:
            return np.empty(0), np.empty(0), np.empty(0)
        p = np.array(self.pieces, dtype=float)
        return p[:, 0], p[:, 1], p[:, 2]

    def _continuous_cdf(self, y: np.ndarray) -> np.ndarray:
        lo, hi, m = self._piece_arrays
        if lo.size == 0:
            return np.zeros_like(y)
        frac = np.clip((y[..., None] - lo) / (hi - lo), 0.0, 1.0)
        return frac @ m

    def cdf(self, y):
        """Right-continuous distribution function, vectorized."""
        y = np.asarray(y, dtype=float)
        loc, m = self._atom_arrays
        out = self._continuous_cdf(y)
        if loc.size:
            out = out + (loc <= y[..., None]) @ m
        return out

    def cdf_left(self, y):
        """Left limit ``P(Z < y)``."""
        y = np.asarray(y, dtype=float)
        loc, m = self._atom_arrays
        out = self._continuous_cdf(y)
        if loc.size:
            out = out + (loc < y[..., None]) @ m
        return out

    def point_mass(self, y):
        y = np.asarray(y, dtype=float)
        loc, m = self._atom_arrays
        if loc.size == 0:
            return np.zeros_like(y)
        return (loc == y[..., None]) @ m

    @cached_property
    def breakpoints(self) -> np.ndarray:
        loc, _ = self._atom_arrays
        lo, hi, _ = self._piece_arrays
        return np.unique(np.concatenate([loc, lo, hi]))

    @property
    def support_bounds(self) -> tuple[float, float]:
        b = self.breakpoints
        return float(b[0]), float(b[-1])

    @property
    def is_degenerate(self) -> bool:
        return not self.pieces and len(self.atoms) == 1

    def mean(self) -> float:
        loc, m = self._atom_arrays
        lo, hi, pm = self._piece_arrays
        return float(loc @ m + ((lo + hi) / 2) @ pm)

    def second_moment(self) -> float:
        loc, m = self._atom_arrays
        lo, hi, pm = self._piece_arrays
        return float((loc**2) @ m + ((lo * lo + lo * hi + hi * hi) / 3) @ pm)

    def variance(self) -> float:
        mu = self.mean()
        return max(self.second_moment() - mu * mu, 0.0)

    def quantile(self, u):
        """Generalized inverse ``inf{y : F(y) >= u}``; ``u = 0`` maps to the
        lower end of the support."""
        u_arr = np.asarray(u, dtype=float)
        if np.any((u_arr < 0) | (u_arr > 1)) or np.any(np.isnan(u_arr)):
            raise DomainError("quantile level must lie in [0, 1]")
        b = self.breakpoints
        right = self.cdf(b)
        left = self.cdf_left(b)
        tol = 1e-12
        k = np.searchsorted(right, u_arr - tol, side="left")
        k = np.minimum(k, b.size - 1)
        out = b[k].astype(float)
        inner = k > 0
        if np.any(inner):
            kk = k[inner] if out.ndim else k
            uu = u_arr[inner] if out.ndim else u_arr
            f0 = right[kk - 1]
            f1 = left[kk]
            slope_ok = (f1 > f0) & (f1 >= uu - tol)
            t = np.where(slope_ok, (uu - f0) / np.where(f1 > f0, f1 - f0, 1.0), 1.0)
            t = np.clip(t, 0.0, 1.0)
            val = b[kk - 1] + t * (b[kk] - b[kk - 1])
            if out.ndim:
                out[inner] = val
            else:
                out = np.asarray(val, dtype=float)
        return out if out.ndim else float(out)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        loc, am = self._atom_arrays
        lo, hi, pm = self._piece_arrays
        weights = np.concatenate([am, pm])
        cum = np.cumsum(weights)
        pick = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
        pick = np.minimum(pick, weights.size - 1)
        v = rng.random(n)
        na = loc.size
        out = np.empty(n)
        is_atom = pick < na
        out[is_atom] = loc[pick[is_atom]]
        j = pick[~is_atom] - na
        out[~is_atom] = lo[j] + v[~is_atom] * (hi[j] - lo[j])
        return out

    def to_dict(self) -> dict:
        return {
            "atoms": [{"location": a, "mass": m} for a, m in self.atoms],
            "pieces": [{"lower": lo, "upper": hi, "mass": m} for lo, hi, m in self.pieces],
        }


def law_cdf(law: MixedLaw1D, y):
    return law.cdf(y)


def law_quantile(law: MixedLaw1D, u):
    return law.quantile(u)


# ---------------------------------------------------------------------------
# predictor marginal and conditional family
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MarginalX:
    atoms: tuple[tuple[tuple[float, ...], float], ...] = ()
    pieces: tuple[tuple[float, float, float], ...] = ()

    @property
    def atom_points(self) -> list[tuple[float, ...]]:
        return [pt for pt, _ in self.atoms]


@dataclass(frozen=True)
class AffineMap:
    alpha: float
    beta: float = 0.0

    def __call__(self, x):
        return self.alpha + self.beta * np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Component:
    """One mixture component of Y given X = x inside a uniform X-piece.

    ``lower == upper`` is a point mass at ``lower(x)``; otherwise both maps
    must be constant and the component is uniform on ``[lower, upper]``.
    """

    weight: float
    lower: AffineMap
    upper: AffineMap

    @property
    def is_point(self) -> bool:
        return self.lower == self.upper

    @property
    def alpha(self) -> float:
        return self.lower.alpha

    @property
    def beta(self) -> float:
        return self.lower.beta


@dataclass(frozen=True)
class ConditionalFamily:
    atom_laws: tuple[MixedLaw1D, ...] = ()
    # one tuple of components per X-piece, aligned with MarginalX.pieces
    piece_components: tuple[tuple[Component, ...], ...] = ()


@dataclass(frozen=True)
class DistributionModel:
    p: int
    marginal: MarginalX
    conditional: ConditionalFamily
    truncation_tail_mass: float = 0.0
    notes: tuple[str, ...] = field(default=(), compare=False)

    @property
    def has_continuous_x(self) -> bool:
        return bool(self.marginal.pieces)

    def x_cells(self):
        """Yield ``(kind, index, lower, upper, mass)`` over atoms and pieces."""
        for i, (pt, m) in enumerate(self.marginal.atoms):
            yield "atom", i, pt, pt, m
        for j, (lo, hi, m) in enumerate(self.marginal.pieces):
            yield "piece", j, lo, hi, m


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


def _parse_law(raw: Mapping) -> MixedLaw1D:
    atoms = [(parse_number(a["location"]), parse_number(a["mass"])) for a in raw.get("atoms", [])]
    pieces = [
        (parse_number(pc["lower"]), parse_number(pc["upper"]), parse_number(pc["mass"]))
        for pc in raw.get("pieces", [])
    ]
    for lo, hi, _ in pieces:
        if not lo < hi:
            raise GeometryError(f"piece [{lo}, {hi}] needs lower < upper")
    locs = [a for a, _ in atoms]
    if len(set(locs)) != len(locs):
        raise GeometryError("duplicate atom locations in conditional law")
    if any(m < 0 for _, m in atoms) or any(m < 0 for *_, m in pieces):
        raise MassError("negative mass in conditional law")
    total = sum(m for _, m in atoms) + sum(m for *_, m in pieces)
    if abs(total - 1.0) > config.MASS_TOL:
        raise MassError(f"conditional law masses sum to {total!r}")
    return MixedLaw1D.build(atoms, pieces, normalize=True)


def _parse_affine(raw) -> AffineMap:
    if isinstance(raw, Mapping):
        return AffineMap(parse_number(raw.get("alpha", 0)), parse_number(raw.get("beta", 0)))
    return AffineMap(parse_number(raw), 0.0)


def validate_model(spec: Mapping) -> DistributionModel:
    """Build a normalized :class:`DistributionModel` from a raw description.

    Masses within 1e-6 of one are renormalized. With ``"truncated": true`` the
    atom masses describe a countable family cut after finitely many atoms; the
    missing mass is recorded as ``truncation_tail_mass`` and must not exceed
    1e-9.
    """
    if isinstance(spec, DistributionModel):
        return spec
    try:
        return _validate(spec)
    except ValidationError:
        raise
    except (KeyError, TypeError, ValueError, ZeroDivisionError, AttributeError) as exc:
        raise GeometryError(f"malformed model description: {exc!r}") from exc


def _validate(spec: Mapping) -> DistributionModel:
    try:
        p = int(spec["p"])
        marg = spec.get("marginal", {})
        cond = spec.get("conditional", {})
    except (KeyError, TypeError, ValueError) as exc:
        raise GeometryError(f"malformed model description: {exc}") from exc
    if p < 1:
        raise DimensionError("p must be a positive integer")

    raw_atoms = marg.get("atoms", [])
    raw_pieces = marg.get("pieces", [])
    points = []
    atom_masses = []
    for a in raw_atoms:
        pt = a["point"]
        pt = tuple(parse_number(v) for v in (pt if isinstance(pt, (list, tuple)) else [pt]))
        if len(pt) != p:
            raise DimensionError(f"atom point {pt} has length {len(pt)}, expected p = {p}")
        points.append(pt)
        atom_masses.append(parse_number(a["mass"]))
    if len(set(points)) != len(points):
        raise GeometryError("duplicate X atoms")
    pieces = []
    for pc in raw_pieces:
        lo, hi, m = parse_number(pc["lower"]), parse_number(pc["upper"]), parse_number(pc["mass"])
        if not lo < hi:
            raise GeometryError(f"X piece [{lo}, {hi}] needs lower < upper")
        pieces.append((lo, hi, m))
    if pieces and p != 1:
        raise DimensionError("a continuous X part is only supported for p = 1")
    masses = atom_masses + [m for *_, m in pieces]
    if not masses:
        raise MassError("the X marginal carries no mass")
    if any(m < 0 for m in masses):
        raise MassError("negative X mass")
    total = sum(masses)
    tail = 0.0
    if spec.get("truncated", False):
        tail = 1.0 - total
        if tail < -config.LAW_MASS_TOL or tail > config.TRUNCATION_TAIL_MAX:
            raise MassError(f"truncated family leaves tail mass {tail!r}; need 0 <= tail <= 1e-9")
        tail = max(tail, 0.0)
    elif abs(total - 1.0) > config.MASS_TOL:
        raise MassError(f"X masses sum to {total!r}, not 1")
    else:
        # a previously truncated and renormalized model written back to disk
        tail = parse_number(spec.get("truncation_tail_mass", 0))
        if not 0 <= tail <= config.TRUNCATION_TAIL_MAX:
            raise MassError(f"recorded truncation tail {tail!r} outside [0, 1e-9]")
    atoms = tuple((pt, m / total) for pt, m in zip(points, atom_masses))
    pieces = tuple((lo, hi, m / total) for lo, hi, m in pieces)

    raw_laws = cond.get("atom_laws", {})
    if isinstance(raw_laws, Mapping):
        lookup = {int(k): v for k, v in raw_laws.items()}
    else:
        lookup = dict(enumerate(raw_laws))
    extra = set(lookup) - set(range(len(atoms)))
    if extra:
        raise GeometryError(f"conditional laws given for unknown atoms {sorted(extra)}")
    laws = []
    for i in range(len(atoms)):
        if i not in lookup:
            raise GeometryError(f"X atom {i} has no conditional law")
        laws.append(_parse_law(lookup[i]))

    comps_by_piece: list[list[Component]] = [[] for _ in pieces]
    for rc in cond.get("continuous_components", []):
        comp = Component(parse_number(rc["weight"]), _parse_affine(rc["lower"]), _parse_affine(rc["upper"]))
        if comp.weight < 0:
            raise MassError("negative component weight")
        targets = [int(rc["piece"])] if "piece" in rc else range(len(pieces))
        for j in targets:
            if not 0 <= j < len(pieces):
                raise GeometryError(f"component refers to unknown X piece {j}")
            comps_by_piece[j].append(comp)
    final_comps = []
    for j, comps in enumerate(comps_by_piece):
        lo, hi, _ = pieces[j]
        if not comps:
            raise GeometryError(f"X piece {j} has no conditional components")
        wsum = sum(c.weight for c in comps)
        if abs(wsum - 1.0) > config.MASS_TOL:
            raise MassError(f"component weights of piece {j} sum to {wsum!r}")
        normed = []
        for c in comps:
            if not c.is_point:
                if c.lower.beta != 0 or c.upper.beta != 0:
                    raise GeometryError("non-degenerate components must have constant endpoints (beta = 0)")
                if not c.lower.alpha < c.upper.alpha:
                    raise GeometryError("component needs lower(x) <= upper(x) on its piece")
            normed.append(Component(c.weight / wsum, c.lower, c.upper))
        final_comps.append(tuple(normed))

    notes = tuple(str(s) for s in spec.get("notes", ()))
    model = DistributionModel(
        p=p,
        marginal=MarginalX(atoms, pieces),
        conditional=ConditionalFamily(tuple(laws), tuple(final_comps)),
        truncation_tail_mass=tail,
        notes=notes,
    )
    marginal_law_Y(model)  # must be a valid law
    return model


# ---------------------------------------------------------------------------
# exact laws
# ---------------------------------------------------------------------------


def _law_from_components(comps: Sequence[Component], x: float) -> MixedLaw1D:
    atoms, pieces = [], []
    for c in comps:
        if c.is_point:
            atoms.append((float(c.lower(x)), c.weight))
        else:
            pieces.append((c.lower.alpha, c.upper.alpha, c.weight))
    return MixedLaw1D.build(atoms, pieces)


def _locate_piece(model: DistributionModel, x: float) -> int | None:
    for j, (lo, hi, _) in enumerate(model.marginal.pieces):
        if lo <= x <= hi:
            return j
    return None


def conditional_law(model: DistributionModel, x) -> MixedLaw1D:
    """Exact law of Y given X = x."""
    pt = tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float)).ravel())
    if len(pt) != model.p:
        raise DimensionError(f"x has length {len(pt)}, expected {model.p}")
    for i, (apt, _) in enumerate(model.marginal.atoms):
        if apt == pt:
            return model.conditional.atom_laws[i]
    if model.p == 1:
        j = _locate_piece(model, pt[0])
        if j is not None:
            return _law_from_components(model.conditional.piece_components[j], pt[0])
    raise SupportError(f"x = {pt} is outside the support of the X marginal")


@lru_cache(maxsize=256)
def marginal_law_Y(model: DistributionModel) -> MixedLaw1D:
    """Exact Y-marginal: atom conditionals mixed by atom mass, affine point
    components pushed forward through the uniform X-pieces."""
    atoms: list[tuple[float, float]] = []
    pieces: list[tuple[float, float, float]] = []
    for (_, m), law in zip(model.marginal.atoms, model.conditional.atom_laws):
        atoms.extend((a, m * am) for a, am in law.atoms)
        pieces.extend((lo, hi, m * pm) for lo, hi, pm in law.pieces)
    for (a, b, m), comps in zip(model.marginal.pieces, model.conditional.piece_components):
        for c in comps:
            w = m * c.weight
            if not c.is_point:
                pieces.append((c.lower.alpha, c.upper.alpha, w))
            elif c.beta == 0:
                atoms.append((c.alpha, w))
            else:
                ya, yb = float(c.lower(a)), float(c.lower(b))
                pieces.append((min(ya, yb), max(ya, yb), w))
    return MixedLaw1D.build(atoms, pieces, normalize=True)


def collision_probability(model: DistributionModel) -> float:
    """``P(X = X*)`` for an independent copy ``X*``."""
    return float(sum(m * m for _, m in model.marginal.atoms))


@lru_cache(maxsize=256)
def model_breakpoints(model: DistributionModel) -> np.ndarray:
    """All y-values at which conditional or Markov-product quantities may
    change polynomial form: law breakpoints, images of X-piece endpoints, and
    crossings of two point components within one piece."""
    pts = [marginal_law_Y(model).breakpoints]
    for (a, b, _), comps in zip(model.marginal.pieces, model.conditional.piece_components):
        point_comps = [c for c in comps if c.is_point]
        for c in point_comps:
            pts.append(np.array([float(c.lower(a)), float(c.lower(b))]))
        for i, c in enumerate(point_comps):
            for d in point_comps[i + 1:]:
                if c.beta != d.beta:
                    xs = (d.alpha - c.alpha) / (c.beta - d.beta)
                    if a < xs < b:
                        pts.append(np.array([float(c.lower(xs))]))
    return np.unique(np.concatenate(pts))


# ---------------------------------------------------------------------------
# samples
# ---------------------------------------------------------------------------


@dataclass
class Dataset:
    """Observed rows ``(x, y)``; ``seed`` is ``None`` for ingested data."""

    x: np.ndarray
    y: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.asarray(self.y, dtype=float).ravel()
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise DimensionError("x and y must have the same number of rows")
        self.x, self.y = x, y

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


def _draw_x(model: DistributionModel, rng: np.random.Generator, n: int):
    """Return (x, cell) where cell < n_atoms indexes an atom and
    cell >= n_atoms indexes piece ``cell - n_atoms``."""
    atoms = model.marginal.atoms
    pieces = model.marginal.pieces
    masses = np.array([m for _, m in atoms] + [m for *_, m in pieces])
    cum = np.cumsum(masses)
    cell = np.searchsorted(cum, rng.random(n) * cum[-1], side="right")
    cell = np.minimum(cell, masses.size - 1)
    v = rng.random(n)
    x = np.empty((n, model.p))
    na = len(atoms)
    if na:
        pts = np.array([pt for pt, _ in atoms], dtype=float)
        sel = cell < na
        x[sel] = pts[cell[sel]]
    if pieces:
        lo = np.array([pc[0] for pc in pieces])
        hi = np.array([pc[1] for pc in pieces])
        sel = cell >= na
        j = cell[sel] - na
        x[sel, 0] = lo[j] + v[sel] * (hi[j] - lo[j])
    return x, cell


def _draw_y(model: DistributionModel, rng: np.random.Generator, x: np.ndarray, cell: np.ndarray) -> np.ndarray:
    n = cell.shape[0]
    y = np.empty(n)
    na = len(model.marginal.atoms)
    for i, law in enumerate(model.conditional.atom_laws):
        idx = np.flatnonzero(cell == i)
        if idx.size:
            y[idx] = law.sample(rng, idx.size)
    for j, comps in enumerate(model.conditional.piece_components):
        idx = np.flatnonzero(cell == na + j)
        if not idx.size:
            continue
        w = np.cumsum([c.weight for c in comps])
        pick = np.minimum(np.searchsorted(w, rng.random(idx.size) * w[-1], side="right"), len(comps) - 1)
        v = rng.random(idx.size)
        xv = x[idx, 0]
        vals = np.empty(idx.size)
        for k, c in enumerate(comps):
            sel = pick == k
            if c.is_point:
                vals[sel] = c.lower(xv[sel])
            else:
                vals[sel] = c.lower.alpha + v[sel] * (c.upper.alpha - c.lower.alpha)
        y[idx] = vals
    return y


def sample_joint(model: DistributionModel, n: int, seed: int) -> Dataset:
    """Draw ``n`` i.i.d. rows; identical (model, n, seed) give identical bytes."""
    if n < 1:
        raise CountError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    x, cell = _draw_x(model, rng, n)
    y = _draw_y(model, rng, x, cell)
    return Dataset(x, y, seed)
