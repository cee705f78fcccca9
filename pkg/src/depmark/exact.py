"""Exact values of xi, R^2 and Lambda.

Each measure is computed twice: from its defining formula and from the
Markov-product representation. The two routes share only the model and the
closed-form conditional-event engine in :mod:`depmark.markov`.

Integrals against P^Y use the atoms of P^Y plus 3-point Gauss-Legendre rules
on every span between consecutive model breakpoints; all integrands are
polynomials of degree <= 2 on those spans, so the rule is exact. Lambda over
continuous X-pieces is integrated the same way in two iterated stages, with
spans cut wherever two conditional supports cross.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import config
from .errors import DegenerateError
from .markov import cond_product_expectation, markov_cdf_left_diagonal
from .model import (
    Component,
    DistributionModel,
    MixedLaw1D,
    collision_probability,
    marginal_law_Y,
    model_breakpoints,
)

__all__ = [
    "MeasureReport",
    "relative_effect",
    "order_probabilities",
    "xi_exact",
    "xi_via_markov",
    "r2_exact",
    "r2_via_markov",
    "lambda_exact",
    "lambda_via_markov",
    "lambda_markov_numerator",
    "exact_reports",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(3)


@dataclass
class MeasureReport:
    xi: float | None = None
    r2: float | None = None
    lam: float | None = None
    path: str = "definition"
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"xi": self.xi, "r2": self.r2, "lambda": self.lam, "path": self.path, "notes": list(self.notes)}


def _notes(model: DistributionModel) -> list[str]:
    out = []
    if model.truncation_tail_mass > 0:
        out.append(f"truncated countable family, tail mass {model.truncation_tail_mass:.3e}")
    return out


def _require_nondegenerate_y(model: DistributionModel) -> MixedLaw1D:
    law = marginal_law_Y(model)
    if law.is_degenerate:
        raise DegenerateError("Y is almost surely constant")
    return law


# ---------------------------------------------------------------------------
# relative effect
# ---------------------------------------------------------------------------


def _spans(lo: float, hi: float, cuts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    inner = cuts[(cuts > lo) & (cuts < hi)]
    edges = np.concatenate([[lo], inner, [hi]])
    return edges[:-1], edges[1:]


def _integrate_piecewise_linear(law2: MixedLaw1D, cuts: np.ndarray, at_atom, on_span) -> float:
    """Integrate against ``law2`` a function that is affine between ``cuts``.
    ``at_atom(z)`` is its value at atoms of law2, ``on_span(mid)`` its value at
    span midpoints (exact for affine integrands)."""
    total = 0.0
    if law2.atoms:
        loc, m = law2._atom_arrays
        total += float(at_atom(loc) @ m)
    for lo, hi, m in law2.pieces:
        s0, s1 = _spans(lo, hi, cuts)
        total += m / (hi - lo) * float(on_span(0.5 * (s0 + s1)) @ (s1 - s0))
    return total


def relative_effect(law1: MixedLaw1D, law2: MixedLaw1D) -> float:
    """Psi(P1, P2) = int P(Z1 < z) + 1/2 P(Z1 = z) dP2(z)."""
    cuts = law1.breakpoints
    return _integrate_piecewise_linear(
        law2,
        cuts,
        lambda z: law1.cdf_left(z) + 0.5 * law1.point_mass(z),
        law1.cdf,
    )


def order_probabilities(law1: MixedLaw1D, law2: MixedLaw1D) -> tuple[float, float, float]:
    """(P(Z1 < Z2), P(Z1 = Z2), P(Z1 > Z2)) for independent Z1 ~ law1, Z2 ~ law2."""
    cuts = law1.breakpoints
    less = _integrate_piecewise_linear(law2, cuts, law1.cdf_left, law1.cdf)
    greater = _integrate_piecewise_linear(law2, cuts, lambda z: 1.0 - law1.cdf(z), lambda z: 1.0 - law1.cdf(z))
    tie = 0.0
    if law2.atoms:
        loc, m = law2._atom_arrays
        tie = float(law1.point_mass(loc) @ m)
    return less, tie, greater


# ---------------------------------------------------------------------------
# xi
# ---------------------------------------------------------------------------


@lru_cache(maxsize=256)
def _py_rule(model: DistributionModel) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights integrating piecewise quadratics exactly against P^Y."""
    law = marginal_law_Y(model)
    cuts = model_breakpoints(model)
    nodes = [np.array([a for a, _ in law.atoms])]
    weights = [np.array([m for _, m in law.atoms])]
    for lo, hi, m in law.pieces:
        s0, s1 = _spans(lo, hi, cuts)
        half = 0.5 * (s1 - s0)
        mid = 0.5 * (s0 + s1)
        nodes.append((mid[:, None] + half[:, None] * _GL_X).ravel())
        weights.append((half[:, None] * _GL_W * (m / (hi - lo))).ravel())
    return np.concatenate(nodes), np.concatenate(weights)


@lru_cache(maxsize=256)
def xi_exact(model: DistributionModel) -> MeasureReport:
    """Ratio of int Var(P(Y >= y | X)) dP^Y to int Var(1{Y >= y}) dP^Y."""
    law = _require_nondegenerate_y(model)
    y, w = _py_rule(model)
    surv = 1.0 - law.cdf_left(y)
    cond_sq = cond_product_expectation(model, "ge", y, "ge", y)
    num = float(w @ (cond_sq - surv**2))
    den = float(w @ (surv * (1.0 - surv)))
    if den <= 0:
        raise DegenerateError("Y is almost surely constant")
    return MeasureReport(xi=num / den, path="definition", notes=_notes(model))


@lru_cache(maxsize=256)
def xi_via_markov(model: DistributionModel) -> MeasureReport:
    """a * int P(Y < y, Y' < y) dP^Y - b."""
    law = _require_nondegenerate_y(model)
    y, w = _py_rule(model)
    f_left = law.cdf_left(y)
    a_inv = float(w @ (f_left * (1.0 - f_left)))
    if a_inv <= 0:
        raise DegenerateError("Y is almost surely constant")
    a = 1.0 / a_inv
    b = a * float(w @ f_left**2)
    h = markov_cdf_left_diagonal(model, y)
    return MeasureReport(xi=a * float(w @ h) - b, path="markov", notes=_notes(model))


# ---------------------------------------------------------------------------
# R^2
# ---------------------------------------------------------------------------


def _uniform_x_moments(a: float, b: float) -> tuple[float, float]:
    return 0.5 * (a + b), (a * a + a * b + b * b) / 3.0


def _piece_mean_coeffs(comps: tuple[Component, ...]) -> tuple[float, float]:
    """Conditional mean over a piece is A + B x."""
    A = B = 0.0
    for c in comps:
        if c.is_point:
            A += c.weight * c.alpha
            B += c.weight * c.beta
        else:
            A += c.weight * 0.5 * (c.lower.alpha + c.upper.alpha)
    return A, B


def _piece_second_moment(comps: tuple[Component, ...], ex: float, ex2: float) -> float:
    """E[E(Y^2 | X)] over a uniform piece."""
    total = 0.0
    for c in comps:
        if c.is_point:
            total += c.weight * (c.alpha**2 + 2 * c.alpha * c.beta * ex + c.beta**2 * ex2)
        else:
            lo, hi = c.lower.alpha, c.upper.alpha
            total += c.weight * (lo * lo + lo * hi + hi * hi) / 3.0
    return total


@lru_cache(maxsize=256)
def r2_exact(model: DistributionModel) -> MeasureReport:
    """Var(E(Y|X)) / Var(Y) with Var(Y) split by the law of total variance."""
    _require_nondegenerate_y(model)
    mass, means, second = [], [], []
    for (_, m), law in zip(model.marginal.atoms, model.conditional.atom_laws):
        mass.append(m)
        means.append(law.mean())
        second.append(law.second_moment())
    ey = float(np.dot(mass, means)) if mass else 0.0
    piece_terms = []
    for (a, b, m), comps in zip(model.marginal.pieces, model.conditional.piece_components):
        A, B = _piece_mean_coeffs(comps)
        ex, ex2 = _uniform_x_moments(a, b)
        ey += m * (A + B * ex)
        piece_terms.append((m, A, B, ex, ex2, _piece_second_moment(comps, ex, ex2)))
    var_mean = 0.0
    mean_var = 0.0
    for m, mu, s in zip(mass, means, second):
        var_mean += m * (mu - ey) ** 2
        mean_var += m * (s - mu * mu)
    for m, A, B, ex, ex2, s in piece_terms:
        c = A - ey
        var_mean += m * (c * c + 2 * c * B * ex + B * B * ex2)
        mu_sq = A * A + 2 * A * B * ex + B * B * ex2
        mean_var += m * (s - mu_sq)
    total = var_mean + max(mean_var, 0.0)
    if total <= 0:
        raise DegenerateError("Var(Y) = 0")
    return MeasureReport(r2=var_mean / total, path="definition", notes=_notes(model))


@lru_cache(maxsize=256)
def r2_via_markov(model: DistributionModel) -> MeasureReport:
    """Pearson correlation of (Y, Y'): E[YY'] = E[E(Y|X)^2], margins from P^Y."""
    law = _require_nondegenerate_y(model)
    eyy = 0.0
    for (_, m), cl in zip(model.marginal.atoms, model.conditional.atom_laws):
        eyy += m * cl.mean() ** 2
    for (a, b, m), comps in zip(model.marginal.pieces, model.conditional.piece_components):
        A, B = _piece_mean_coeffs(comps)
        ex, ex2 = _uniform_x_moments(a, b)
        eyy += m * (A * A + 2 * A * B * ex + B * B * ex2)
    mu = law.mean()
    var = law.variance()
    if var <= 0:
        raise DegenerateError("Var(Y) = 0")
    return MeasureReport(r2=(eyy - mu * mu) / var, path="markov", notes=_notes(model))


# ---------------------------------------------------------------------------
# Lambda
# ---------------------------------------------------------------------------


def _gl_nodes(s0: np.ndarray, s1: np.ndarray):
    """Nodes/weights (last axis of size 3) for spans [s0, s1], any leading shape."""
    half = 0.5 * (s1 - s0)[..., None]
    mid = 0.5 * (s0 + s1)[..., None]
    return mid + half * _GL_X, half * _GL_W


def _comp_order(c: Component, v1, d: Component, v2):
    """Order probabilities of component c (evaluated at x1) against d (at x2).
    ``v1``/``v2`` are the point locations when the component is a point."""
    if c.is_point and d.is_point:
        less = (v1 < v2).astype(float)
        tie = (v1 == v2).astype(float)
        return less, tie, 1.0 - less - tie
    if c.is_point:
        lo, hi = d.lower.alpha, d.upper.alpha
        greater = np.clip((v1 - lo) / (hi - lo), 0.0, 1.0)
        return 1.0 - greater, np.zeros_like(greater), greater
    if d.is_point:
        lo, hi = c.lower.alpha, c.upper.alpha
        less = np.clip((v2 - lo) / (hi - lo), 0.0, 1.0)
        return less, np.zeros_like(less), 1.0 - less
    less, tie, greater = order_probabilities(
        MixedLaw1D.uniform(c.lower.alpha, c.upper.alpha), MixedLaw1D.uniform(d.lower.alpha, d.upper.alpha)
    )
    shape = np.shape(v1)
    return np.full(shape, less), np.full(shape, tie), np.full(shape, greater)


def _law_vs_comp(law: MixedLaw1D, d: Component, v2):
    """Order probabilities of an atom conditional law against component d."""
    if d.is_point:
        less = law.cdf_left(v2)
        tie = law.point_mass(v2)
        return less, tie, 1.0 - less - tie
    less, tie, greater = order_probabilities(law, MixedLaw1D.uniform(d.lower.alpha, d.upper.alpha))
    shape = np.shape(v2)
    return np.full(shape, less), np.full(shape, tie), np.full(shape, greater)


def _cell_value(less, tie, greater, route: str):
    if route == "definition":
        psi = less + 0.5 * tie
        return (2.0 * psi - 1.0) ** 2
    # concordance minus discordance of two Markov pairs given (x1, x2)
    return greater**2 + less**2 - 2.0 * greater * less


def _atom_piece_term(law: MixedLaw1D, a: float, b: float, m: float, comps, route: str) -> float:
    cuts = [a, b]
    bp = law.breakpoints
    for d in comps:
        if d.is_point and d.beta != 0:
            xs = (bp - d.alpha) / d.beta
            cuts.extend(xs[(xs > a) & (xs < b)])
    cuts = np.unique(cuts)
    x2, w2 = _gl_nodes(cuts[:-1], cuts[1:])
    less = np.zeros_like(x2)
    tie = np.zeros_like(x2)
    greater = np.zeros_like(x2)
    for d in comps:
        l_, t_, g_ = _law_vs_comp(law, d, d.lower(x2) if d.is_point else x2)
        less += d.weight * l_
        tie += d.weight * t_
        greater += d.weight * g_
    return m / (b - a) * float(np.sum(w2 * _cell_value(less, tie, greater, route)))


def _piece_piece_term(p1, comps1, p2, comps2, route: str) -> float:
    a1, b1, m1 = p1
    a2, b2, m2 = p2
    # x2-breaklines as x2 = off + slope * x1
    lines = [(a2, 0.0), (b2, 0.0)]
    x1_cuts = {a1, b1}
    for c in comps1:
        for d in comps2:
            if d.is_point and d.beta != 0:
                if c.is_point:
                    lines.append(((c.alpha - d.alpha) / d.beta, c.beta / d.beta))
                else:
                    lines.append(((c.lower.alpha - d.alpha) / d.beta, 0.0))
                    lines.append(((c.upper.alpha - d.alpha) / d.beta, 0.0))
            elif c.is_point and c.beta != 0:
                targets = [d.alpha] if d.is_point else [d.lower.alpha, d.upper.alpha]
                for v in targets:
                    x1_cuts.add((v - c.alpha) / c.beta)
    lines = list(set(lines))
    for i, (o1, s1) in enumerate(lines):
        for o2, s2 in lines[i + 1:]:
            if s1 != s2:
                x1_cuts.add((o2 - o1) / (s1 - s2))
    x1c = np.array(sorted(x for x in x1_cuts if a1 <= x <= b1))
    x1, w1 = _gl_nodes(x1c[:-1], x1c[1:])
    x1 = x1.ravel()
    w1 = w1.ravel()
    off = np.array([o for o, _ in lines])
    slope = np.array([s for _, s in lines])
    brk = np.sort(np.clip(off[None, :] + slope[None, :] * x1[:, None], a2, b2), axis=1)
    x2, w2 = _gl_nodes(brk[:, :-1], brk[:, 1:])  # (n1, nspan, 3)
    X1 = np.broadcast_to(x1[:, None, None], x2.shape)
    less = np.zeros(x2.shape)
    tie = np.zeros(x2.shape)
    greater = np.zeros(x2.shape)
    for c in comps1:
        v1 = c.lower(X1) if c.is_point else X1
        for d in comps2:
            v2 = d.lower(x2) if d.is_point else x2
            l_, t_, g_ = _comp_order(c, v1, d, v2)
            ww = c.weight * d.weight
            less += ww * l_
            tie += ww * t_
            greater += ww * g_
    inner = np.sum(w2 * _cell_value(less, tie, greater, route), axis=(1, 2))
    return m1 / (b1 - a1) * m2 / (b2 - a2) * float(w1 @ inner)


@lru_cache(maxsize=256)
def _lambda_integral(model: DistributionModel, route: str) -> float:
    atoms = model.marginal.atoms
    laws = model.conditional.atom_laws
    total = 0.0
    for i, ((_, mi), li) in enumerate(zip(atoms, laws)):
        for (_, mj), lj in zip(atoms, laws):
            if route == "definition":
                psi = relative_effect(li, lj)
                val = (2.0 * psi - 1.0) ** 2
            else:
                less, _, greater = order_probabilities(li, lj)
                val = greater**2 + less**2 - 2.0 * greater * less
            total += mi * mj * val
    pieces = model.marginal.pieces
    comps = model.conditional.piece_components
    for (_, mi), li in zip(atoms, laws):
        for (a, b, m), cs in zip(pieces, comps):
            # both orders contribute equally
            total += 2.0 * mi * _atom_piece_term(li, a, b, m, cs, route)
    for p1, c1 in zip(pieces, comps):
        for p2, c2 in zip(pieces, comps):
            total += _piece_piece_term(p1, c1, p2, c2, route)
    return total


def _lambda_denominator(model: DistributionModel) -> float:
    _require_nondegenerate_y(model)
    coll = collision_probability(model)
    if 1.0 - coll <= config.EXACT_TOL * 1e-3:
        raise DegenerateError("X is almost surely constant")
    return 1.0 - coll


@lru_cache(maxsize=256)
def lambda_exact(model: DistributionModel) -> MeasureReport:
    """4 / (1 - P(X = X*)) * int (Psi - 1/2)^2 d(P^X x P^X)."""
    den = _lambda_denominator(model)
    return MeasureReport(lam=_lambda_integral(model, "definition") / den, path="definition", notes=_notes(model))


def lambda_markov_numerator(model: DistributionModel) -> float:
    """P(concordance) - P(discordance) of two independent Markov pairs."""
    return _lambda_integral(model, "markov")


@lru_cache(maxsize=256)
def lambda_via_markov(model: DistributionModel) -> MeasureReport:
    den = _lambda_denominator(model)
    return MeasureReport(lam=lambda_markov_numerator(model) / den, path="markov", notes=_notes(model))


def exact_reports(model: DistributionModel) -> list[MeasureReport]:
    """One combined report per computation path."""
    out = []
    for path, fx, fr, fl in (
        ("definition", xi_exact, r2_exact, lambda_exact),
        ("markov", xi_via_markov, r2_via_markov, lambda_via_markov),
    ):
        rep = MeasureReport(path=path, notes=_notes(model))
        rep.xi = fx(model).xi
        rep.r2 = fr(model).r2
        try:
            rep.lam = fl(model).lam
        except DegenerateError as exc:
            rep.notes.append(f"lambda undefined: {exc}")
        out.append(rep)
    return out
