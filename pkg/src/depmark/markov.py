"""Markov product (Y, Y') of a model: sampling, closed-form joint CDF and the
distributional transform (F_Y(Y), F_Y(Y')).

Every Markov-product quantity reduces to expectations of products of two
conditional "event probabilities" K(y | X), where K is one of

* ``"le"``  P(Y <= y | X)
* ``"lt"``  P(Y <  y | X)
* ``"ge"``  P(Y >= y | X)
* ``"eq"``  P(Y =  y | X)

Over an X-atom these are read off the conditional law. Over a uniform X-piece
each component turns ``{x : K holds}`` into an x-interval (point components)
or a constant fraction (interval components), so the x-integral of a product
is an interval-overlap length. No quadrature is involved.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import CountError, StateError
from .model import (
    AffineMap,
    Component,
    ConditionalFamily,
    Dataset,
    DistributionModel,
    MarginalX,
    MixedLaw1D,
    _draw_x,
    _draw_y,
    marginal_law_Y,
)

__all__ = [
    "MarkovDataset",
    "sample_markov",
    "markov_cdf",
    "markov_cdf_left_diagonal",
    "cond_expectation",
    "cond_product_expectation",
    "transform_markov",
    "empirical_transform",
    "transform_model",
    "level_set_bound",
    "transformed_markov_cdf",
]


@dataclass
class MarkovDataset:
    x: np.ndarray
    y: np.ndarray
    yprime: np.ndarray
    transformed: bool = False
    seed: int | None = None

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        self.x = x
        self.y = np.asarray(self.y, dtype=float).ravel()
        self.yprime = np.asarray(self.yprime, dtype=float).ravel()
        if not (x.shape[0] == self.y.size == self.yprime.size):
            raise CountError("x, y and yprime must have equal length")
        if self.transformed:
            for col in (self.y, self.yprime):
                if col.size and (col.min() < 0 or col.max() > 1):
                    raise StateError("transformed values must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.y.size

    def pairs(self) -> np.ndarray:
        return np.column_stack([self.y, self.yprime])


def sample_markov(model: DistributionModel, n: int, seed: int) -> MarkovDataset:
    """Rows (x, y, y') with y and y' independent draws from the conditional
    law at the same x."""
    if n < 1:
        raise CountError("sample size must be at least 1")
    rng = np.random.default_rng(seed)
    x, cell = _draw_x(model, rng, n)
    y = _draw_y(model, rng, x, cell)
    yp = _draw_y(model, rng, x, cell)
    return MarkovDataset(x, y, yp, False, seed)


# ---------------------------------------------------------------------------
# closed-form conditional expectations
# ---------------------------------------------------------------------------


def _law_event(law: MixedLaw1D, kind: str, y: np.ndarray) -> np.ndarray:
    if kind == "le":
        return law.cdf(y)
    if kind == "lt":
        return law.cdf_left(y)
    if kind == "ge":
        return 1.0 - law.cdf_left(y)
    if kind == "eq":
        return law.point_mass(y)
    raise ValueError(f"unknown event kind {kind!r}")


def _comp_event(c: Component, a: float, b: float, kind: str, y: np.ndarray):
    """Return (lo, hi, s): the x-interval in [a, b] on which the event holds
    and a constant probability factor."""
    ones = np.ones_like(y)
    if not c.is_point:
        lo_c, hi_c = c.lower.alpha, c.upper.alpha
        frac = np.clip((y - lo_c) / (hi_c - lo_c), 0.0, 1.0)
        if kind in ("le", "lt"):
            s = frac
        elif kind == "ge":
            s = 1.0 - frac
        else:
            s = np.zeros_like(y)
        return a * ones, b * ones, s
    alpha, beta = c.alpha, c.beta
    if beta == 0.0:
        if kind == "le":
            hit = alpha <= y
        elif kind == "lt":
            hit = alpha < y
        elif kind == "ge":
            hit = alpha >= y
        else:
            hit = alpha == y
        return a * ones, np.where(hit, b, a), ones
    if kind == "eq":
        return a * ones, a * ones, ones
    t = np.clip((y - alpha) / beta, a, b)
    below = (kind in ("le", "lt")) == (beta > 0)
    if below:
        return a * ones, t, ones
    return t, b * ones, ones


def cond_expectation(model: DistributionModel, kind: str, y) -> np.ndarray:
    """E[K(y | X)], i.e. the marginal event probability, evaluated through
    the conditional family."""
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    for (_, m), law in zip(model.marginal.atoms, model.conditional.atom_laws):
        out = out + m * _law_event(law, kind, y)
    for (a, b, m), comps in zip(model.marginal.pieces, model.conditional.piece_components):
        acc = np.zeros_like(y)
        for c in comps:
            lo, hi, s = _comp_event(c, a, b, kind, y)
            acc = acc + c.weight * (hi - lo) * s
        out = out + m / (b - a) * acc
    return out


def cond_product_expectation(model: DistributionModel, kind1: str, y1, kind2: str, y2) -> np.ndarray:
    """E[K1(y1 | X) K2(y2 | X)] in closed form (broadcast over y1, y2)."""
    y1, y2 = np.broadcast_arrays(np.asarray(y1, dtype=float), np.asarray(y2, dtype=float))
    out = np.zeros(y1.shape)
    for (_, m), law in zip(model.marginal.atoms, model.conditional.atom_laws):
        out = out + m * _law_event(law, kind1, y1) * _law_event(law, kind2, y2)
    for (a, b, m), comps in zip(model.marginal.pieces, model.conditional.piece_components):
        ev1 = [_comp_event(c, a, b, kind1, y1) for c in comps]
        ev2 = ev1 if (kind1 == kind2 and y1 is y2) else [_comp_event(c, a, b, kind2, y2) for c in comps]
        acc = np.zeros(y1.shape)
        for c, (lo1, hi1, s1) in zip(comps, ev1):
            for d, (lo2, hi2, s2) in zip(comps, ev2):
                overlap = np.maximum(np.minimum(hi1, hi2) - np.maximum(lo1, lo2), 0.0)
                acc = acc + c.weight * d.weight * overlap * s1 * s2
        out = out + m / (b - a) * acc
    return out


def markov_cdf(model: DistributionModel, y, yprime) -> np.ndarray | float:
    """H(y, y') = P(Y <= y, Y' <= y') = E[F(y | X) F(y' | X)]."""
    out = cond_product_expectation(model, "le", y, "le", yprime)
    return out if out.ndim else float(out)


def markov_cdf_left_diagonal(model: DistributionModel, y) -> np.ndarray | float:
    """P(Y < y, Y' < y) obtained from H(y, y) by removing the two atom lines
    {Y = y} and {Y' = y} and adding back their intersection."""
    y = np.asarray(y, dtype=float)
    h = cond_product_expectation(model, "le", y, "le", y)
    line = cond_product_expectation(model, "eq", y, "le", y)
    corner = cond_product_expectation(model, "eq", y, "eq", y)
    out = h - 2.0 * line + corner
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# distributional transform
# ---------------------------------------------------------------------------


def transform_markov(model: DistributionModel, data: MarkovDataset) -> MarkovDataset:
    if data.transformed:
        raise StateError("data are already transformed")
    law = marginal_law_Y(model)
    return MarkovDataset(data.x.copy(), law.cdf(data.y), law.cdf(data.yprime), True, data.seed)


Sample = Union[MarkovDataset, Dataset]


def empirical_transform(data: Sample) -> Sample:
    """Replace y by R_i / n from the pooled y-column; y' uses the same
    empirical CDF."""
    y = data.y
    n = y.size
    if n < 2:
        raise CountError("need at least two observations")
    ys = np.sort(y)
    u = np.searchsorted(ys, y, side="right") / n
    if isinstance(data, MarkovDataset):
        if data.transformed:
            raise StateError("data are already transformed")
        up = np.searchsorted(ys, data.yprime, side="right") / n
        return MarkovDataset(data.x.copy(), u, up, True, data.seed)
    return Dataset(data.x.copy(), u, data.seed)


def level_set_bound(law: MixedLaw1D, u) -> tuple[np.ndarray, np.ndarray]:
    """For each level u return (y*, closed) with
    ``{y : F(y) <= u} = (-inf, y*]`` if closed else ``(-inf, y*)``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    bp = law.breakpoints
    right = law.cdf(bp)
    left = law.cdf_left(bp)
    tol = 1e-12
    k = np.searchsorted(right, u + tol, side="right")
    ystar = np.full(u.shape, np.inf)
    closed = np.ones(u.shape, dtype=bool)
    inside = k < bp.size
    kk = k[inside]
    uu = u[inside]
    ys = bp[kk].astype(float)
    cl = np.zeros(kk.shape, dtype=bool)
    has_prev = kk > 0
    prev = np.maximum(kk - 1, 0)
    f0 = right[prev]
    f1 = left[kk]
    crossing = has_prev & (f1 > uu + tol)
    t = (uu - f0) / np.where(f1 > f0, f1 - f0, 1.0)
    ys = np.where(crossing, bp[prev] + np.clip(t, 0, 1) * (bp[kk] - bp[prev]), ys)
    cl = crossing
    ystar[inside] = ys
    closed[inside] = cl
    return ystar, closed


def transformed_markov_cdf(model: DistributionModel, u, v) -> np.ndarray:
    """P(F_Y(Y) <= u, F_Y(Y') <= v) on a grid, computed from the untransformed
    model by mapping each level to a one-sided y-bound."""
    law = marginal_law_Y(model)
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    shape = u.shape
    yu, cu = level_set_bound(law, u.ravel())
    yv, cv = level_set_bound(law, v.ravel())
    out = np.empty(u.size)
    for ku in (True, False):
        for kv in (True, False):
            sel = (cu == ku) & (cv == kv)
            if not np.any(sel):
                continue
            out[sel] = cond_product_expectation(
                model, "le" if ku else "lt", yu[sel], "le" if kv else "lt", yv[sel]
            )
    return out.reshape(shape)


def _push_law(law: MixedLaw1D, F: MixedLaw1D) -> MixedLaw1D:
    """Law of F(Z) for Z ~ law, F the CDF of ``F`` (piecewise linear between
    its breakpoints, jumps at its atoms)."""
    atoms = [(float(F.cdf(a)), m) for a, m in law.atoms]
    pieces = []
    bp = F.breakpoints
    for lo, hi, m in law.pieces:
        cuts = np.unique(np.concatenate([[lo, hi], bp[(bp > lo) & (bp < hi)]]))
        for s0, s1 in zip(cuts[:-1], cuts[1:]):
            w = m * (s1 - s0) / (hi - lo)
            # right value at s0 equals left value at s1 only across a jump-free span
            f0 = float(F.cdf(s0))
            f1 = float(F.cdf_left(s1))
            if f1 > f0:
                pieces.append((f0, f1, w))
            else:
                atoms.append((f0, w))
    return MixedLaw1D.build(atoms, pieces, normalize=True)


def transform_model(model: DistributionModel) -> DistributionModel:
    """The model of (X, F_Y(Y)). X-pieces are split wherever a point
    component crosses a breakpoint of F_Y so the transformed components stay
    affine in x."""
    F = marginal_law_Y(model)
    bp = F.breakpoints
    laws = tuple(_push_law(law, F) for law in model.conditional.atom_laws)
    new_pieces = []
    new_comps = []
    for (a, b, m), comps in zip(model.marginal.pieces, model.conditional.piece_components):
        xcuts = {a, b}
        for c in comps:
            if c.is_point and c.beta != 0:
                xs = (bp - c.alpha) / c.beta
                xcuts.update(float(x) for x in xs[(xs > a) & (xs < b)])
        xcuts = sorted(xcuts)
        for x0, x1 in zip(xcuts[:-1], xcuts[1:]):
            if x1 <= x0:
                continue
            sub = []
            for c in comps:
                if c.is_point and c.beta != 0:
                    # F is affine on the image of (x0, x1); fit through two interior points
                    xa, xb = x0 + (x1 - x0) / 3, x0 + 2 * (x1 - x0) / 3
                    fa, fb = float(F.cdf(c.lower(xa))), float(F.cdf(c.lower(xb)))
                    beta = (fb - fa) / (xb - xa)
                    amap = AffineMap(fa - beta * xa, beta)
                    sub.append(Component(c.weight, amap, amap))
                elif c.is_point:
                    f0 = float(F.cdf(c.alpha))
                    sub.append(Component(c.weight, AffineMap(f0), AffineMap(f0)))
                else:
                    pushed = _push_law(MixedLaw1D.uniform(c.lower.alpha, c.upper.alpha), F)
                    for loc, w in pushed.atoms:
                        sub.append(Component(c.weight * w, AffineMap(loc), AffineMap(loc)))
                    for lo, hi, w in pushed.pieces:
                        sub.append(Component(c.weight * w, AffineMap(lo), AffineMap(hi)))
            new_pieces.append((x0, x1, m * (x1 - x0) / (b - a)))
            new_comps.append(tuple(sub))
    return DistributionModel(
        p=model.p,
        marginal=MarginalX(model.marginal.atoms, tuple(new_pieces)),
        conditional=ConditionalFamily(laws, tuple(new_comps)),
        truncation_tail_mass=model.truncation_tail_mass,
        notes=model.notes,
    )
