import numpy as np
import pytest
from hypothesis import given, settings

from depmark.catalog import EXAMPLES, example_model, random_model_suite
from depmark.errors import DegenerateError
from depmark.exact import (
    exact_reports,
    lambda_exact,
    lambda_via_markov,
    order_probabilities,
    r2_exact,
    r2_via_markov,
    relative_effect,
    xi_exact,
    xi_via_markov,
)
from depmark.markov import transform_model
from depmark.model import MixedLaw1D, collision_probability, conditional_law, marginal_law_Y, validate_model

from strategies import mixed_laws


def _atoms_model(laws, masses=None):
    masses = masses or [1 / len(laws)] * len(laws)
    return validate_model(
        {
            "p": 1,
            "marginal": {"atoms": [{"point": [i], "mass": m} for i, m in enumerate(masses)]},
            "conditional": {"atom_laws": {str(i): law for i, law in enumerate(laws)}},
        }
    )


U01 = {"pieces": [{"lower": 0, "upper": 1, "mass": 1}]}
INDEP = _atoms_model([U01, U01, U01])


# ---------------------------------------------------------------- relative effect


def test_relative_effect_examples():
    assert relative_effect(MixedLaw1D.uniform(0, 1), MixedLaw1D.uniform(0, 1)) == pytest.approx(0.5)
    m = example_model("ex2_4")
    assert relative_effect(conditional_law(m, -1), conditional_law(m, 1)) == pytest.approx(0.5, abs=1e-15)
    m = example_model("ex2_5")
    assert relative_effect(conditional_law(m, 0), conditional_law(m, 1)) == pytest.approx(1 / 3, abs=1e-15)


@settings(max_examples=80, deadline=None)
@given(mixed_laws(), mixed_laws())
def test_relative_effect_antisymmetry(p, q):
    assert relative_effect(p, q) + relative_effect(q, p) == pytest.approx(1.0, abs=1e-12)
    assert relative_effect(p, p) == pytest.approx(0.5, abs=1e-12)
    less, tie, greater = order_probabilities(p, q)
    assert less + tie + greater == pytest.approx(1.0, abs=1e-12)
    assert min(less, tie, greater) >= -1e-15


@settings(max_examples=40, deadline=None)
@given(mixed_laws(), mixed_laws())
def test_relative_effect_monte_carlo(p, q):
    rng = np.random.default_rng(0)
    n = 200_000
    z1, z2 = p.sample(rng, n), q.sample(rng, n)
    mc = np.mean(z1 < z2) + 0.5 * np.mean(z1 == z2)
    assert relative_effect(p, q) == pytest.approx(mc, abs=5 / np.sqrt(n))


# ---------------------------------------------------------------- xi


def test_xi_examples():
    assert xi_exact(INDEP).xi == pytest.approx(0, abs=1e-12)
    assert xi_via_markov(INDEP).xi == pytest.approx(0, abs=1e-12)
    assert xi_exact(example_model("ex3_4")).xi == pytest.approx(1, abs=1e-10)
    m = example_model("ex2_4")
    assert xi_exact(m).xi == pytest.approx(6 / 49, abs=1e-12)
    assert xi_via_markov(m).xi == pytest.approx(6 / 49, abs=1e-12)


def test_xi_monte_carlo_oracle():
    """Both integrals of the definition estimated by averaging over draws
    of Y, with the conditional survival functions evaluated directly."""
    m = example_model("ex2_4")
    law_y = marginal_law_Y(m)
    y = law_y.sample(np.random.default_rng(99), 2_000_000)
    masses = np.array([mass for _, mass in m.marginal.atoms])
    S = np.array([1 - conditional_law(m, pt).cdf_left(y) for pt, _ in m.marginal.atoms])
    mean = masses @ S
    var = masses @ (S * S) - mean**2
    s = 1 - law_y.cdf_left(y)
    mc = var.mean() / (s * (1 - s)).mean()
    assert mc == pytest.approx(6 / 49, abs=3e-3)


def test_degenerate_response():
    const = _atoms_model([{"atoms": [{"location": 1, "mass": 1}]}] * 2)
    for f in (xi_exact, xi_via_markov, r2_exact, r2_via_markov, lambda_exact, lambda_via_markov):
        with pytest.raises(DegenerateError):
            f(const)


def test_degenerate_predictor():
    single = _atoms_model([U01], [1.0])
    with pytest.raises(DegenerateError):
        lambda_exact(single)
    with pytest.raises(DegenerateError):
        lambda_via_markov(single)
    assert xi_exact(single).xi == pytest.approx(0, abs=1e-12)


# ---------------------------------------------------------------- R^2


def test_r2_examples():
    assert r2_exact(example_model("ex2_6")).r2 == pytest.approx(0, abs=1e-12)
    assert r2_exact(example_model("ex2_6_sq")).r2 == pytest.approx(1 / 16, abs=1e-3)
    assert r2_via_markov(example_model("ex2_4")).r2 == pytest.approx(0, abs=1e-12)
    assert r2_via_markov(example_model("ex3_4")).r2 == pytest.approx(1, abs=1e-12)


def test_r2_variance_decomposition_oracle():
    # ex3_3 by hand: means -1/2 and 3/2, variances 1/12 and 5/12
    between = (1 / 3) * (-1 / 2 - 5 / 6) ** 2 + (2 / 3) * (3 / 2 - 5 / 6) ** 2
    within = (1 / 3) * (1 / 12) + (2 / 3) * (5 / 12)
    oracle = between / (between + within)
    assert oracle == pytest.approx(32 / 43)
    m = example_model("ex3_3")
    assert r2_exact(m).r2 == pytest.approx(oracle, abs=1e-12)
    assert 0 < r2_exact(m).r2 < 1


def test_r2_squared_response_from_exact_moments():
    # with X ~ U[0,1] and Y = (1 +- X)/2 the response Y^2 has conditional
    # mean (1 + X^2)/4, so R^2 = Var(X^2)/16 / Var(Y^2) = 1/16 exactly
    var_mu = (1 / 5 - 1 / 9) / 16
    ey2 = (1 + 1 / 3) / 4
    ey4 = np.mean([((1 + s * x) / 2) ** 4 for s in (1, -1) for x in (np.arange(200_000) + 0.5) / 200_000])
    assert var_mu / (ey4 - ey2**2) == pytest.approx(1 / 16, abs=1e-9)


# ---------------------------------------------------------------- Lambda


def test_lambda_examples():
    assert lambda_exact(example_model("ex2_4")).lam == pytest.approx(0, abs=1e-12)
    assert lambda_via_markov(example_model("ex2_4")).lam == pytest.approx(0, abs=1e-12)
    assert lambda_exact(example_model("ex2_5")).lam == pytest.approx(1 / 9, abs=1e-12)
    assert lambda_exact(example_model("ex3_4")).lam == pytest.approx(4 / 9, abs=1e-10)
    assert lambda_via_markov(example_model("ex3_3")).lam == pytest.approx(1, abs=1e-12)


def test_lambda_atom_pair_monte_carlo():
    m = example_model("ex2_5")
    rng = np.random.default_rng(5)
    pts = [pt for pt, _ in m.marginal.atoms]
    masses = np.array([mass for _, mass in m.marginal.atoms])
    n = 400_000
    i1 = rng.choice(len(pts), size=n, p=masses)
    i2 = rng.choice(len(pts), size=n, p=masses)
    laws = [conditional_law(m, pt) for pt in pts]
    total = 0.0
    for a in range(len(pts)):
        for b in range(len(pts)):
            if a == b:
                continue
            sel = (i1 == a) & (i2 == b)
            z1, z2 = laws[a].sample(rng, 200_000), laws[b].sample(rng, 200_000)
            psi = np.mean(z1 < z2) + 0.5 * np.mean(z1 == z2)
            total += sel.mean() * (2 * psi - 1) ** 2
    mc = total / (1 - collision_probability(m))
    assert mc == pytest.approx(1 / 9, abs=1e-2)


def test_lambda_grid_oracle_continuous():
    """Midpoint rule over P^X x P^X with point conditionals compared directly."""
    m = example_model("ex3_4")
    k = 300
    xs, ws = [], []
    for a, b, mass in m.marginal.pieces:
        xs.append(a + (np.arange(k) + 0.5) * (b - a) / k)
        ws.append(np.full(k, mass / k))
    xs, ws = np.concatenate(xs), np.concatenate(ws)
    y = np.array([conditional_law(m, x).atoms[0][0] for x in xs])
    psi = (y[:, None] < y[None, :]) + 0.5 * (y[:, None] == y[None, :])
    oracle = ws @ ((2 * psi - 1) ** 2) @ ws
    assert oracle == pytest.approx(4 / 9, abs=1e-12)
    assert lambda_exact(m).lam == pytest.approx(oracle, abs=1e-10)


def test_lambda_grid_oracle_mixed_pieces():
    """ex2_6: Psi of two-point conditionals on a fine grid."""
    m = example_model("ex2_6")
    k = 400
    x = (np.arange(k) + 0.5) / k
    lo, hi = (1 - x) / 2, (1 + x) / 2
    a1, b1 = lo[:, None], hi[:, None]
    a2, b2 = lo[None, :], hi[None, :]

    def cmp(u, v):
        return (u < v) + 0.5 * (u == v)

    psi = 0.25 * (cmp(a1, a2) + cmp(a1, b2) + cmp(b1, a2) + cmp(b1, b2))
    oracle = np.mean((2 * psi - 1) ** 2)
    assert lambda_exact(m).lam == pytest.approx(oracle, abs=1e-3)


# ---------------------------------------------------------------- identities


@pytest.mark.parametrize("example_id", list(EXAMPLES))
def test_catalog_identities_and_range(example_id):
    m = example_model(example_id)
    d, k = exact_reports(m)
    assert d.path == "definition" and k.path == "markov"
    assert d.xi == pytest.approx(k.xi, abs=1e-10)
    assert d.r2 == pytest.approx(k.r2, abs=1e-10)
    assert d.lam == pytest.approx(k.lam, abs=1e-8)
    for r in (d, k):
        for v in (r.xi, r.r2, r.lam):
            assert -1e-9 <= v <= 1 + 1e-9


def test_suite_identities_and_zero_sets():
    for m in random_model_suite():
        xi = xi_exact(m).xi
        assert xi == pytest.approx(xi_via_markov(m).xi, abs=1e-8)
        r2 = r2_exact(m).r2
        assert r2 == pytest.approx(r2_via_markov(m).r2, abs=1e-8)
        try:
            lam = lambda_exact(m).lam
        except DegenerateError:
            lam = None
        if lam is not None:
            assert lam == pytest.approx(lambda_via_markov(m).lam, abs=1e-6)
        for v in (xi, r2, lam):
            assert v is None or -1e-9 <= v <= 1 + 1e-9
        if abs(xi) <= 1e-9:
            assert abs(r2) <= 1e-9
            assert lam is None or abs(lam) <= 1e-9


def test_suite_contains_independent_models():
    zeros = [m for m in random_model_suite() if abs(xi_exact(m).xi) <= 1e-9]
    assert zeros


@pytest.mark.parametrize("example_id", ["ex2_4", "ex2_5", "ex2_6", "ex2_6_sq"])
def test_transform_invariance_atom_free(example_id):
    m = example_model(example_id)
    assert not marginal_law_Y(m).atoms
    t = transform_model(m)
    assert lambda_exact(t).lam == pytest.approx(lambda_exact(m).lam, abs=1e-8)
    assert xi_exact(t).xi == pytest.approx(xi_exact(m).xi, abs=1e-8)


def test_r2_not_transform_invariant():
    # Y and Y^2 share the transformed model, yet R^2 differs (0 vs 1/16)
    a, b = example_model("ex2_6"), example_model("ex2_6_sq")
    assert r2_exact(a).r2 == pytest.approx(0, abs=1e-12)
    assert r2_exact(b).r2 > 0.06
    assert lambda_exact(transform_model(a)).lam == pytest.approx(lambda_exact(transform_model(b)).lam, abs=1e-8)
