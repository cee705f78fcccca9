"""Scatter data behind the seven figures, one CSV per panel."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .catalog import example_model
from .errors import DomainError, IoError
from .io import write_dataset
from .markov import MarkovDataset, sample_markov, transform_markov
from .model import Dataset

__all__ = ["FIGURES", "ORDINAL_BLOCKS", "ORDINAL_CUT_SETS", "emit_figure_data", "ordinal_sum_sample"]

FIGURES = {
    1: "ex2_4",
    2: "ex2_5",
    3: "ex2_6",
    4: None,
    5: "ex3_3",
    6: "ex3_4",
    7: "ex3_5",
}
# panels that also show the distributional transform
_TRANSFORMED = {5, 6, 7}

ORDINAL_BLOCKS = ((0.0, 0.2), (0.2, 0.5), (0.5, 1.0))
ORDINAL_CUT_SETS = ((0.2, 0.5), (0.2,), (0.5,))


def ordinal_sum_sample(n: int, seed: int) -> MarkovDataset:
    """Pairs on [0,1]^2 built from three blocks, each block carrying an
    independent uniform pair; x records the block index."""
    rng = np.random.default_rng(seed)
    a = np.array([lo for lo, _ in ORDINAL_BLOCKS])
    w = np.array([hi - lo for lo, hi in ORDINAL_BLOCKS])
    k = np.minimum(np.searchsorted(np.cumsum(w), rng.random(n), side="right"), w.size - 1)
    # 1 - U keeps values inside the half-open block (a, b]
    u = a[k] + w[k] * (1.0 - rng.random(n))
    v = a[k] + w[k] * (1.0 - rng.random(n))
    return MarkovDataset((k + 1).astype(float), u, v, True, seed)


def emit_figure_data(fig_id: int, n: int, seed: int, out_dir) -> list[Path]:
    if fig_id not in FIGURES:
        raise DomainError(f"figure id must be one of 1..7, got {fig_id}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {out}: {exc}") from exc
    stem = f"fig{fig_id}"
    written: list[Path] = []

    def put(data, name):
        path = out / f"{stem}_{name}.csv"
        write_dataset(data, path)
        written.append(path)

    if fig_id == 4:
        data = ordinal_sum_sample(n, seed)
        put(data, "sample")
        path = out / f"{stem}_cuts.csv"
        try:
            with open(path, "w") as fh:
                fh.write("representation,cuts\n")
                for i, cuts in enumerate(ORDINAL_CUT_SETS, start=1):
                    fh.write(f"{i},{' '.join(repr(c) for c in cuts)}\n")
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
        written.append(path)
        return written

    model = example_model(FIGURES[fig_id])
    mk = sample_markov(model, n, seed)
    put(Dataset(mk.x, mk.y, seed), "xy")
    put(mk, "markov")
    if fig_id == 3:
        # the same draws with response Y^2
        sq = MarkovDataset(mk.x, mk.y**2, mk.yprime**2, False, seed)
        put(Dataset(sq.x, sq.y, seed), "xy_squared")
        put(sq, "markov_squared")
    elif fig_id in _TRANSFORMED:
        tr = transform_markov(model, mk)
        put(Dataset(tr.x, tr.y, seed), "x_transformed")
        put(tr, "markov_transformed")
    return written
