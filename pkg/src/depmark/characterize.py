"""Decide the extreme-dependence concepts of (X, Y) on exact models and on
sampled Markov products.

Five concepts are covered: independence, zero correlation of (Y, Y'),
concordance balance, comonotonicity (Y = Y'), and complete separation, the
last one through an ordinal-sum structure of (F_Y(Y), F_Y(Y')).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import config
from .errors import CountError, StateError
from .estimate import concordance_difference
from .exact import (
    lambda_exact,
    lambda_markov_numerator,
    r2_exact,
    r2_via_markov,
    xi_exact,
)
from .markov import (
    MarkovDataset,
    level_set_bound,
    markov_cdf,
    transformed_markov_cdf,
)
from .model import DistributionModel, MixedLaw1D, marginal_law_Y, model_breakpoints

__all__ = [
    "Block",
    "OrdinalSumStructure",
    "Decision",
    "CharacterizationReport",
    "independence_stat",
    "concordance_balance",
    "comonotone_check",
    "ordinal_sum_detect",
    "ordinal_sum_exact",
    "classify",
    "classify_empirical",
]


@dataclass
class Block:
    a: float
    b: float
    mass: float
    independence_stat: float


@dataclass
class OrdinalSumStructure:
    cuts: list[float]
    blocks: list[Block]
    diagonal_mass: float
    diagonal_uniform_stat: float
    n: int | None = None

    @property
    def size(self) -> int:
        return len(self.blocks)

    def to_dict(self) -> dict:
        return {
            "cuts": list(self.cuts),
            "blocks": [asdict(b) for b in self.blocks],
            "diagonal_mass": self.diagonal_mass,
            "diagonal_uniform_stat": self.diagonal_uniform_stat,
            "size": self.size,
        }


@dataclass
class Decision:
    flag: bool
    statistic: float
    threshold: float
    measure_flag: bool | None = None

    def __post_init__(self):
        self.flag = bool(self.flag)
        self.statistic = float(self.statistic)
        self.threshold = float(self.threshold)
        if self.measure_flag is not None:
            self.measure_flag = bool(self.measure_flag)

    def to_dict(self) -> dict:
        out = {"flag": self.flag, "statistic": self.statistic, "threshold": self.threshold}
        if self.measure_flag is not None:
            out["measure_route_flag"] = self.measure_flag
        return out


@dataclass
class CharacterizationReport:
    independent: Decision
    uncorrelated: Decision
    concordance_balanced: Decision
    comonotone: Decision
    completely_separated: Decision
    structure: OrdinalSumStructure | None
    mode: str
    notes: list[str] = field(default_factory=list)

    FLAGS = ("independent", "uncorrelated", "concordance_balanced", "comonotone", "completely_separated")

    def flags(self) -> tuple[bool, ...]:
        return tuple(getattr(self, k).flag for k in self.FLAGS)

    def routes_agree(self) -> bool:
        return all(
            getattr(self, k).measure_flag is None or getattr(self, k).measure_flag == getattr(self, k).flag
            for k in self.FLAGS
        )

    def to_dict(self) -> dict:
        out = {"mode": self.mode}
        for k in self.FLAGS:
            out[k] = getattr(self, k).to_dict()
        out["ordinal_sum"] = self.structure.to_dict() if self.structure is not None else None
        out["notes"] = list(self.notes)
        return out


# ---------------------------------------------------------------------------
# empirical statistics
# ---------------------------------------------------------------------------


def _grid_levels(k: int = config.GRID_LEVELS) -> np.ndarray:
    return (np.arange(1, k + 1) - 0.5) / k


def _grid_independence(y: np.ndarray, yp: np.ndarray) -> float:
    """sup over an empirical-quantile grid of |H_n - F_n G_n|."""
    n = y.size
    levels = _grid_levels()
    qy = np.unique(np.quantile(y, levels, method="inverted_cdf"))
    qp = np.unique(np.quantile(yp, levels, method="inverted_cdf"))
    # bin j holds values with q[j-1] < value <= q[j]; the last bin is beyond the grid
    by = np.searchsorted(qy, y, side="left")
    bp = np.searchsorted(qp, yp, side="left")
    counts = np.zeros((qy.size + 1, qp.size + 1))
    np.add.at(counts, (by, bp), 1.0)
    H = counts.cumsum(axis=0).cumsum(axis=1)[:-1, :-1] / n
    F = np.bincount(by, minlength=qy.size + 1).cumsum()[:-1] / n
    G = np.bincount(bp, minlength=qp.size + 1).cumsum()[:-1] / n
    return float(np.max(np.abs(H - F[:, None] * G[None, :])))


def independence_stat(pairs: MarkovDataset) -> float:
    """Flag independence of (Y, Y') when the value is <= 2.5 / sqrt(n)."""
    if pairs.n < 10:
        raise CountError("need at least 10 pairs")
    return _grid_independence(pairs.y, pairs.yprime)


def concordance_balance(pairs: MarkovDataset) -> float:
    """(C - D) / (n(n-1)/2) of the pairs (y, y')."""
    n = pairs.n
    if n < 2:
        raise CountError("need at least two pairs")
    return concordance_difference(pairs.y, pairs.yprime) / (n * (n - 1) / 2)


def _uniform_ks(s: np.ndarray) -> float:
    """Sup distance between the empirical CDF of s and U[0, 1]."""
    if s.size == 0:
        return 0.0
    s = np.sort(s)
    m = s.size
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - s), np.max(s - (i - 1) / m)))


def ordinal_sum_detect(pairs: MarkovDataset, block_tol: float = config.BLOCK_TOL) -> OrdinalSumStructure:
    """Finest ordinal-sum structure compatible with a transformed sample.

    A level c is a cut when no pair straddles it (min <= c < max). Between
    consecutive cuts, intervals holding an off-diagonal pair become blocks;
    the remaining intervals form the diagonal component, whose u-values are
    compared against the uniform law on that component.
    """
    if not pairs.transformed:
        raise StateError("ordinal-sum detection needs transformed pairs")
    n = pairs.n
    if n < 20:
        raise CountError("need at least 20 pairs")
    u, v = pairs.y, pairs.yprime
    lo, hi = np.minimum(u, v), np.maximum(u, v)
    w = np.unique(np.concatenate([u, v]))
    ilo = np.searchsorted(w, lo)
    ihi = np.searchsorted(w, hi)
    diff = np.zeros(w.size + 1, dtype=np.int64)
    np.add.at(diff, ilo, 1)
    np.add.at(diff, ihi, -1)
    straddle = np.cumsum(diff)[:-1]  # gap k lies between w[k] and w[k+1]
    gaps = np.flatnonzero(straddle[:-1] == 0) if w.size > 1 else np.array([], dtype=int)
    cuts = [float(0.5 * (w[k] + w[k + 1])) for k in gaps]
    edges = np.array([0.0] + cuts + [1.0])
    # interval index of every pair (both coordinates fall in the same one)
    seg = np.searchsorted(edges[1:-1], lo, side="left")
    off = (hi - lo) > block_tol
    nseg = edges.size - 1
    seg_count = np.bincount(seg, minlength=nseg)
    seg_off = np.bincount(seg[off], minlength=nseg)
    blocks = []
    diag_segments = []
    for k in range(nseg):
        if seg_count[k] == 0:
            continue
        if seg_off[k] > 0:
            sel = seg == k
            stat = _grid_independence(u[sel], v[sel]) if seg_count[k] >= 2 else 0.0
            blocks.append(Block(float(edges[k]), float(edges[k + 1]), seg_count[k] / n, stat))
        else:
            diag_segments.append(k)
    # the diagonal component is everything outside the blocks
    block_a = np.array([b.a for b in blocks])
    block_b = np.array([b.b for b in blocks])
    dlen = 1.0 - float(np.sum(block_b - block_a))
    diag_sel = np.isin(seg, diag_segments)
    diag_mass = float(diag_sel.sum()) / n
    if diag_sel.any() and dlen > 0:
        t = u[diag_sel]
        covered = np.clip(t[:, None] - block_a[None, :], 0.0, block_b - block_a).sum(axis=1) if blocks else 0.0
        diag_stat = _uniform_ks((t - covered) / dlen)
    else:
        diag_stat = 0.0
    return OrdinalSumStructure(cuts, blocks, diag_mass, diag_stat, n)


def _pooled_transform(pairs: MarkovDataset) -> MarkovDataset:
    """Empirical CDF of the pooled (y, y') values. Unlike the y-column
    transform it never maps a y' value onto the rank of a neighboring y, which
    would create spurious straddles at block boundaries."""
    pooled = np.sort(np.concatenate([pairs.y, pairs.yprime]))
    m = pooled.size
    u = np.searchsorted(pooled, pairs.y, side="right") / m
    v = np.searchsorted(pooled, pairs.yprime, side="right") / m
    return MarkovDataset(pairs.x, u, v, True, pairs.seed)


def _empirical_separated(st: OrdinalSumStructure) -> tuple[bool, float]:
    # blocks too small for the grid statistic carry no evidence either way
    stats = [
        b.independence_stat * np.sqrt(b.mass * st.n) / config.INDEPENDENCE_C
        for b in st.blocks
        if b.mass * st.n >= 10
    ]
    if st.diagonal_mass > 0:
        stats.append(st.diagonal_uniform_stat * np.sqrt(st.diagonal_mass * st.n) / config.UNIFORMITY_C)
    worst = max(stats) if stats else 0.0
    trivial = len(st.blocks) == 1 and st.diagonal_mass == 0.0
    return bool(worst <= 1.0 and not trivial), float(worst)


def classify_empirical(pairs: MarkovDataset, block_tol: float = config.BLOCK_TOL) -> CharacterizationReport:
    """Flags from a Markov-product sample; every threshold is c / sqrt(n)."""
    n = pairs.n
    root = np.sqrt(n)
    ind = independence_stat(pairs)
    y, yp = pairs.y, pairs.yprime
    a, b = y - y.mean(), yp - yp.mean()
    denom = np.sqrt(float(a @ a) * float(b @ b))
    corr = float(a @ b) / denom if denom > 0 else 0.0
    bal = concordance_balance(pairs)
    gap = float(np.max(np.abs(y - yp)))
    transformed = pairs if pairs.transformed else _pooled_transform(pairs)
    st = ordinal_sum_detect(transformed, block_tol)
    sep, sep_stat = _empirical_separated(st)
    return CharacterizationReport(
        independent=Decision(ind <= config.INDEPENDENCE_C / root, ind, config.INDEPENDENCE_C / root),
        uncorrelated=Decision(abs(corr) <= config.UNCORRELATED_C / root, corr, config.UNCORRELATED_C / root),
        concordance_balanced=Decision(abs(bal) <= config.CONCORDANCE_C / root, bal, config.CONCORDANCE_C / root),
        comonotone=Decision(gap == 0.0, gap, 0.0),
        completely_separated=Decision(sep, sep_stat, 1.0),
        structure=st,
        mode="empirical",
        notes=["separation statistic is the worst block or diagonal statistic relative to its threshold"],
    )


# ---------------------------------------------------------------------------
# exact checks
# ---------------------------------------------------------------------------


def _y_grid(model: DistributionModel, dense: bool = True) -> np.ndarray:
    """Breakpoints, three interior points per span, and points outside."""
    bp = model_breakpoints(model)
    pts = [bp, [bp[0] - 1.0, bp[-1] + 1.0]]
    if dense and bp.size > 1:
        for t in (0.25, 0.5, 0.75):
            pts.append(bp[:-1] + t * np.diff(bp))
    return np.unique(np.concatenate(pts))


def _coarse(grid: np.ndarray, k: int = 40) -> np.ndarray:
    if grid.size <= k:
        return grid
    return grid[np.unique(np.linspace(0, grid.size - 1, k).astype(int))]


def _exact_independence(model: DistributionModel) -> float:
    law = marginal_law_Y(model)
    g = _y_grid(model)
    F = law.cdf(g)
    diag = np.abs(markov_cdf(model, g, g) - F * F)
    c = _coarse(g)
    Fc = law.cdf(c)
    full = np.abs(markov_cdf(model, c[:, None], c[None, :]) - Fc[:, None] * Fc[None, :])
    return float(max(diag.max(), full.max()))


def comonotone_check(obj, tol: float = config.COMONOTONE_TOL) -> tuple[bool, float]:
    """Exact mode: max |H(y, y') - min(F(y), F(y'))| on a grid. Empirical
    mode: max |y - y'|, comonotone only when it is exactly zero."""
    if isinstance(obj, MarkovDataset):
        gap = float(np.max(np.abs(obj.y - obj.yprime)))
        return gap == 0.0, gap
    law = marginal_law_Y(obj)
    g = _y_grid(obj)
    F = law.cdf(g)
    diag = np.abs(markov_cdf(obj, g, g) - F)
    c = _coarse(g)
    Fc = law.cdf(c)
    full = np.abs(markov_cdf(obj, c[:, None], c[None, :]) - np.minimum(Fc[:, None], Fc[None, :]))
    stat = float(max(diag.max(), full.max()))
    return stat <= tol, stat


def _transformed_cdf(law: MixedLaw1D, F: MixedLaw1D, u: np.ndarray) -> np.ndarray:
    """P(F_Y(Z) <= u) for Z ~ law."""
    ystar, closed = level_set_bound(F, u)
    return np.where(closed, law.cdf(ystar), law.cdf_left(ystar))


def _lebesgue_outside(t: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if a.size == 0:
        return t
    return t - np.clip(t[..., None] - a, 0.0, b - a).sum(axis=-1)


def ordinal_sum_exact(model: DistributionModel, tol: float = config.EXACT_TOL) -> tuple[OrdinalSumStructure, bool]:
    """Candidate blocks (b_z - P(X = z), b_z] with b_z the transformed upper
    support end of the conditional law at atom z, checked against the
    transformed Markov-product CDF."""
    F = marginal_law_Y(model)
    blocks = []
    laws = []
    ok = True
    for (_, m), law in zip(model.marginal.atoms, model.conditional.atom_laws):
        b = float(F.cdf(law.support_bounds[1]))
        a = b - m
        blocks.append([a, b, m])
        laws.append(law)
    order = sorted(range(len(blocks)), key=lambda i: blocks[i][0])
    blocks = [blocks[i] for i in order]
    laws = [laws[i] for i in order]
    A = np.array([bk[0] for bk in blocks])
    B = np.array([bk[1] for bk in blocks])
    if blocks and (A.min() < -tol or np.any(A[1:] < B[:-1] - tol)):
        ok = False
    grid = [np.linspace(0.0, 1.0, 101), A, B, F.cdf(F.breakpoints), F.cdf_left(F.breakpoints)]
    g = np.unique(np.clip(np.concatenate(grid), 0.0, 1.0))
    g = np.unique(np.concatenate([g, 0.5 * (g[1:] + g[:-1])]))
    G = np.array([_transformed_cdf(law, F, g) for law in laws]) if laws else np.zeros((0, g.size))
    # each transformed conditional must live in its block; measured as the
    # probability mass found outside it
    support_err = 0.0
    for k in range(len(laws)):
        below = _transformed_cdf(laws[k], F, np.array([A[k]]))[0] if A[k] >= 0 else 0.0
        above = 1.0 - _transformed_cdf(laws[k], F, np.array([B[k]]))[0]
        support_err = max(support_err, blocks[k][2] * (abs(below) + abs(above)))
    masses = np.array([bk[2] for bk in blocks])
    H = transformed_markov_cdf(model, g[:, None], g[None, :])
    blockpart = np.einsum("k,ki,kj->ij", masses, G, G) if laws else 0.0
    lam = _lebesgue_outside(np.minimum(g[:, None], g[None, :]), A, B)
    err = float(np.max(np.abs(H - blockpart - lam)))
    stat = max(err, support_err)
    ok = ok and stat <= tol
    cuts = sorted({float(x) for x in np.concatenate([A, B]) if tol < x < 1 - tol})
    st = OrdinalSumStructure(
        cuts=cuts,
        blocks=[Block(float(a), float(b), float(m), 0.0) for a, b, m in blocks],
        diagonal_mass=float(max(1.0 - masses.sum(), 0.0)) if blocks else 1.0,
        diagonal_uniform_stat=err,
    )
    return st, ok


def classify(model: DistributionModel) -> CharacterizationReport:
    """Exact flags for all five concepts. The reported flag comes from the
    Markov-product criterion; the flag implied by the measure values is
    recorded next to it and any disagreement is noted."""
    tol = config.EXACT_TOL
    xi = xi_exact(model).xi
    r2 = r2_exact(model).r2
    lam = lambda_exact(model).lam

    ind_stat = _exact_independence(model)
    r2m = r2_via_markov(model).r2
    num = lambda_markov_numerator(model)
    com_flag, com_stat = comonotone_check(model)
    st, sep_flag = ordinal_sum_exact(model)
    report = CharacterizationReport(
        independent=Decision(ind_stat <= tol, ind_stat, tol, abs(xi) <= tol),
        uncorrelated=Decision(abs(r2m) <= tol, r2m, tol, abs(r2) <= tol),
        concordance_balanced=Decision(abs(num) <= tol, num, tol, abs(lam) <= tol),
        comonotone=Decision(com_flag, com_stat, config.COMONOTONE_TOL, abs(xi - 1.0) <= tol),
        completely_separated=Decision(sep_flag, st.diagonal_uniform_stat, tol, abs(lam - 1.0) <= tol),
        structure=st,
        mode="exact",
    )
    for k in report.FLAGS:
        d = getattr(report, k)
        if d.measure_flag != d.flag:
            report.notes.append(f"{k}: measure route says {d.measure_flag}, Markov route says {d.flag}")
    return report
