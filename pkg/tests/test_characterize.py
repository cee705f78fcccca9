import numpy as np
import pytest

from depmark import config
from depmark.catalog import EXAMPLES, example_model, random_model_suite
from depmark.characterize import (
    classify,
    classify_empirical,
    comonotone_check,
    concordance_balance,
    independence_stat,
    ordinal_sum_detect,
    ordinal_sum_exact,
)
from depmark.errors import DegenerateError, StateError
from depmark.exact import lambda_exact, r2_exact, xi_exact
from depmark.figures import ORDINAL_BLOCKS, ordinal_sum_sample
from depmark.markov import MarkovDataset, sample_markov, transform_markov
from depmark.model import validate_model

INDEP = validate_model(
    {
        "p": 1,
        "marginal": {"atoms": [{"point": [0], "mass": 0.5}, {"point": [1], "mass": 0.5}]},
        "conditional": {
            "atom_laws": {
                "0": {"pieces": [{"lower": 0, "upper": 1, "mass": 1}]},
                "1": {"pieces": [{"lower": 0, "upper": 1, "mass": 1}]},
            }
        },
    }
)


def _thr(c, n):
    return c / np.sqrt(n)


# ---------------------------------------------------------------- empirical statistics


@pytest.mark.slow
def test_independence_calibration():
    n = 10_000
    ok = sum(independence_stat(sample_markov(INDEP, n, s)) <= _thr(config.INDEPENDENCE_C, n) for s in range(100))
    assert ok >= 90


def test_independence_detects_dependence():
    n = 10_000
    assert independence_stat(sample_markov(example_model("ex2_4"), n, 1)) > _thr(config.INDEPENDENCE_C, n)
    u = np.random.default_rng(0).random(n)
    assert independence_stat(MarkovDataset(np.zeros(n), u, u)) == pytest.approx(0.25, abs=0.01)


def test_concordance_balance_examples():
    n = 100_000
    assert abs(concordance_balance(sample_markov(example_model("ex2_4"), n, 2))) <= _thr(config.CONCORDANCE_C, n)
    v = concordance_balance(sample_markov(example_model("ex2_5"), n, 2))
    assert v > 0 and v == pytest.approx(4 / 81, abs=0.01)
    assert concordance_balance(MarkovDataset(np.zeros(3), [1, 2, 3], [1, 2, 3])) == 1.0


def test_comonotone_examples():
    ok, stat = comonotone_check(example_model("ex3_4"))
    assert ok and stat <= 1e-10
    ok, stat = comonotone_check(sample_markov(example_model("ex3_4"), 2000, 1))
    assert ok and stat == 0.0
    assert not comonotone_check(example_model("ex3_3"))[0]
    assert not comonotone_check(sample_markov(example_model("ex3_3"), 2000, 1))[0]


# ---------------------------------------------------------------- ordinal sums, empirical


def test_detect_example_3_3():
    m = example_model("ex3_3")
    n = 10_000
    st = ordinal_sum_detect(transform_markov(m, sample_markov(m, n, 3)))
    assert st.size == 2
    masses = sorted(b.mass for b in st.blocks)
    assert masses[0] == pytest.approx(1 / 3, abs=0.02) and masses[1] == pytest.approx(2 / 3, abs=0.02)
    for b in st.blocks:
        assert b.independence_stat <= _thr(config.INDEPENDENCE_C, b.mass * n)
    assert sum(b.mass for b in st.blocks) + st.diagonal_mass == pytest.approx(1.0)


def test_detect_diagonal_uniform():
    n = 5000
    u = np.random.default_rng(1).random(n)
    st = ordinal_sum_detect(MarkovDataset(np.zeros(n), u, u, True))
    assert st.size == 0 and st.diagonal_mass == 1.0
    assert st.diagonal_uniform_stat <= _thr(config.UNIFORMITY_C, n)


def test_detect_example_3_4_fails_uniformity():
    m = example_model("ex3_4")
    st = ordinal_sum_detect(transform_markov(m, sample_markov(m, 2000, 1)))
    assert st.size == 0 and st.diagonal_uniform_stat >= 0.3


def test_detect_needs_transformed_pairs():
    mk = sample_markov(example_model("ex3_3"), 100, 1)
    with pytest.raises(StateError):
        ordinal_sum_detect(mk)


def test_detect_structure_invariants():
    m = example_model("ex3_5")
    t = transform_markov(m, sample_markov(m, 5000, 4))
    st = ordinal_sum_detect(t)
    for blk in st.blocks:
        assert blk.a < blk.b
    edges = [0.0] + st.cuts + [1.0]
    for blk in st.blocks:
        i = edges.index(blk.a)
        assert edges[i + 1] == blk.b
    assert sum(b.mass for b in st.blocks) + st.diagonal_mass == pytest.approx(1.0)
    # invariant under row relabeling and column swaps
    perm = np.random.default_rng(0).permutation(t.n)
    for other in (
        MarkovDataset(t.x[perm], t.y[perm], t.yprime[perm], True),
        MarkovDataset(t.x, t.yprime, t.y, True),
    ):
        so = ordinal_sum_detect(other)
        assert so.cuts == st.cuts
        assert [(b.a, b.b, b.mass) for b in so.blocks] == [(b.a, b.b, b.mass) for b in st.blocks]


def test_detect_finest_structure_of_ordinal_sample():
    st = ordinal_sum_detect(ordinal_sum_sample(2000, 42))
    assert st.size == 3
    for blk, (a, b) in zip(st.blocks, ORDINAL_BLOCKS):
        assert blk.mass == pytest.approx(b - a, abs=0.04)
    inner = [c for c in st.cuts]
    assert any(abs(c - 0.2) < 0.02 for c in inner) and any(abs(c - 0.5) < 0.02 for c in inner)


def test_cut_convention_half_open():
    # a pair sitting exactly at c does not straddle c
    u = np.array([0.25] * 10 + [0.3, 0.6] * 5 + [0.9, 0.7] * 5)
    v = np.array([0.1] * 10 + [0.6, 0.3] * 5 + [0.7, 0.9] * 5)
    st = ordinal_sum_detect(MarkovDataset(np.zeros(u.size), u, v, True))
    assert len(st.cuts) == 2 and st.cuts[0] == pytest.approx(0.275)


# ---------------------------------------------------------------- ordinal sums, exact


def test_exact_ordinal_sums():
    st, ok = ordinal_sum_exact(example_model("ex3_3"))
    assert ok
    assert [(b.a, b.b) for b in st.blocks] == [(0.0, pytest.approx(1 / 3)), (pytest.approx(1 / 3), 1.0)]
    st, ok = ordinal_sum_exact(example_model("ex3_5"))
    assert ok and st.size == 40
    widths = sorted((b.b - b.a for b in st.blocks), reverse=True)
    assert np.allclose(widths, [2.0**-k for k in range(1, 41)], rtol=0, atol=1e-9)
    assert not ordinal_sum_exact(example_model("ex2_4"))[1]
    assert not ordinal_sum_exact(example_model("ex3_4"))[1]


# ---------------------------------------------------------------- classify


def test_classify_examples():
    r = classify(example_model("ex2_4"))
    assert r.flags() == (False, True, True, False, False)
    r = classify(example_model("ex3_4"))
    assert r.comonotone.flag and not r.completely_separated.flag
    r = classify(example_model("ex2_6_sq"))
    assert r.concordance_balanced.flag and not r.uncorrelated.flag
    r = classify(example_model("ex3_3"))
    assert r.completely_separated.flag and r.structure.size == 2


@pytest.mark.parametrize("example_id", list(EXAMPLES))
def test_classify_routes_agree(example_id):
    r = classify(example_model(example_id))
    assert r.routes_agree() and not r.notes
    d = r.to_dict()
    assert d["mode"] == "exact"
    for k in r.FLAGS:
        assert {"flag", "statistic", "threshold", "measure_route_flag"} <= set(d[k])


def test_suite_lattice_and_theorems():
    for m in random_model_suite():
        r = classify(m)
        assert r.routes_agree()
        ind, unc, bal, com, sep = r.flags()
        if ind:
            assert unc and bal
        if abs(r2_exact(m).r2 - 1) <= 1e-9:
            assert comonotone_check(m)[0]
            assert comonotone_check(sample_markov(m, 2000, 1))[0]
        if comonotone_check(sample_markov(m, 100_000, 2))[0]:
            assert xi_exact(m).xi == pytest.approx(1, abs=1e-9)
        try:
            lam = lambda_exact(m).lam
        except DegenerateError:
            continue
        if sep and not m.marginal.pieces:
            assert abs(lam - 1) <= 1e-9
            assert r.structure.size == len(m.marginal.atoms)


def test_converse_witnesses():
    # independence is strictly stronger than either weak null
    r = classify(example_model("ex2_4"))
    assert not r.independent.flag and r.uncorrelated.flag and r.concordance_balanced.flag
    r = classify(example_model("ex2_5"))
    assert r.uncorrelated.flag and not r.concordance_balanced.flag
    r = classify(example_model("ex2_6_sq"))
    assert r.concordance_balanced.flag and not r.uncorrelated.flag


def test_classify_empirical_examples():
    m = example_model("ex3_3")
    r = classify_empirical(sample_markov(m, 20_000, 3))
    assert r.mode == "empirical"
    assert r.completely_separated.flag and r.structure.size == 2
    r = classify_empirical(sample_markov(example_model("ex3_4"), 5000, 3))
    assert r.comonotone.flag and not r.completely_separated.flag
    r = classify_empirical(sample_markov(example_model("ex2_4"), 20_000, 3))
    assert not r.independent.flag and not r.completely_separated.flag
    r = classify_empirical(sample_markov(INDEP, 20_000, 3))
    assert r.independent.flag and r.uncorrelated.flag and r.concordance_balanced.flag
    for k in r.FLAGS:
        assert getattr(r, k).threshold >= 0
