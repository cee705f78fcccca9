import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from depmark.catalog import EXAMPLES, example_model, example_spec
from depmark.errors import (
    CountError,
    DimensionError,
    DomainError,
    GeometryError,
    MassError,
    SupportError,
    ValidationError,
)
from depmark.model import (
    MixedLaw1D,
    collision_probability,
    conditional_law,
    law_cdf,
    law_quantile,
    marginal_law_Y,
    parse_number,
    sample_joint,
    validate_model,
)

from strategies import mixed_laws


def _atom_model(masses, laws):
    return {
        "p": 1,
        "marginal": {"atoms": [{"point": [i], "mass": m} for i, m in enumerate(masses)]},
        "conditional": {"atom_laws": {str(i): law for i, law in enumerate(laws)}},
    }


U01 = {"pieces": [{"lower": 0, "upper": 1, "mass": 1}]}


def test_parse_number():
    assert parse_number("4/7") == 4 / 7
    assert parse_number("0.25") == 0.25
    assert parse_number(3) == 3.0


# ---------------------------------------------------------------- validation


def test_example_2_4_is_valid():
    m = validate_model(example_spec("ex2_4"))
    assert [mass for _, mass in m.marginal.atoms] == [4 / 7, 3 / 7]


def test_mass_error():
    with pytest.raises(MassError):
        validate_model(_atom_model([0.5, 0.4], [U01, U01]))


def test_geometry_errors():
    bad = {"pieces": [{"lower": 1, "upper": 1, "mass": 1}]}
    with pytest.raises(GeometryError):
        validate_model(_atom_model([1], [bad]))
    spec = _atom_model([0.5, 0.5], [U01, U01])
    spec["marginal"]["atoms"][1]["point"] = [0]
    with pytest.raises(GeometryError):
        validate_model(spec)


def test_dimension_error():
    spec = _atom_model([0.5, 0.5], [U01, U01])
    spec["marginal"]["atoms"][1]["point"] = [0, 1]
    with pytest.raises(DimensionError):
        validate_model(spec)


def test_malformed_is_validation_error():
    with pytest.raises(ValidationError):
        validate_model({"p": 1, "marginal": {"atoms": [{"mass": 1}]}})


def test_truncated_family():
    m = example_model("ex3_5")
    assert len(m.marginal.atoms) == 40
    assert m.truncation_tail_mass == pytest.approx(2.0**-40, rel=1e-9)
    assert sum(mass for _, mass in m.marginal.atoms) == pytest.approx(1.0, abs=1e-15)


def test_unknown_example():
    with pytest.raises(KeyError):
        example_model("ex9_9")


# ---------------------------------------------------------------- conditionals


def test_conditional_examples():
    law = conditional_law(example_model("ex2_4"), 1)
    assert law.pieces == ((-0.5, 0.5, 1.0),) and not law.atoms
    law = conditional_law(example_model("ex2_6"), 0.0)
    assert law.atoms == ((0.5, 1.0),) and not law.pieces
    law = conditional_law(example_model("ex2_5"), 1)
    assert sorted(law.pieces) == [(-1.5, -0.5, pytest.approx(2 / 3)), (1.0, 3.0, pytest.approx(1 / 3))]


def test_conditional_outside_support():
    with pytest.raises(SupportError):
        conditional_law(example_model("ex2_4"), 0.0)
    with pytest.raises(SupportError):
        conditional_law(example_model("ex2_6"), 1.5)


def test_marginal_examples():
    law = marginal_law_Y(example_model("ex2_4"))
    pieces = sorted(law.pieces)
    assert [p[:2] for p in pieces] == [(-1.5, -0.5), (-0.5, 0.5), (0.5, 1.5)]
    assert np.allclose([p[2] for p in pieces], [2 / 7, 3 / 7, 2 / 7], atol=1e-15)
    law = marginal_law_Y(example_model("ex3_4"))
    assert not law.pieces
    assert np.allclose(law.atoms, [(-1, 1 / 3), (2, 2 / 3)], atol=1e-15)
    indep = validate_model(_atom_model([0.5, 0.5], [U01, U01]))
    law = marginal_law_Y(indep)
    assert law_cdf(law, 0.3) == pytest.approx(0.3)


def test_cdf_examples():
    assert law_cdf(MixedLaw1D.uniform(0, 1), 0.3) == pytest.approx(0.3)
    assert law_cdf(marginal_law_Y(example_model("ex3_4")), -1) == pytest.approx(1 / 3)
    assert law_cdf(marginal_law_Y(example_model("ex2_4")), 0.5) == pytest.approx(5 / 7)


def test_quantile_domain():
    with pytest.raises(DomainError):
        law_quantile(MixedLaw1D.uniform(0, 1), 1.5)
    assert law_quantile(MixedLaw1D.uniform(0, 1), 0.25) == pytest.approx(0.25)
    law = marginal_law_Y(example_model("ex3_4"))
    assert law_quantile(law, 1 / 3) == -1.0
    assert law_quantile(law, 0.5) == 2.0


@pytest.mark.parametrize("example_id", list(EXAMPLES))
def test_cdf_shape(example_id):
    law = marginal_law_Y(example_model(example_id))
    lo, hi = law.support_bounds
    grid = np.linspace(lo - 1, hi + 1, 1000)
    F = law.cdf(grid)
    assert np.all(np.diff(F) >= -1e-15)
    assert F[0] == 0.0 and F[-1] == pytest.approx(1.0, abs=1e-12)
    # right continuity at every breakpoint
    b = law.breakpoints
    assert np.allclose(law.cdf(np.nextafter(b, np.inf)), law.cdf(b), atol=1e-9)
    total = sum(m for _, m in law.atoms) + sum(m for *_, m in law.pieces)
    assert total == pytest.approx(1.0, abs=1e-12)
    # quantile of the cdf never exceeds the point at continuity points
    # at levels in (0, 1]; level 0 maps to the lower support end by convention
    cont = grid[(law.point_mass(grid) == 0) & (law.cdf(grid) > 0)]
    assert np.all(law.quantile(np.clip(law.cdf(cont), 0, 1)) <= cont + 1e-9)


@settings(max_examples=60, deadline=None)
@given(mixed_laws(), st.floats(0, 1))
def test_quantile_is_generalized_inverse(law, u):
    q = law.quantile(u)
    assert law.cdf(q) >= u - 1e-9
    if u > 1e-9:
        # nothing strictly to the left reaches level u
        assert law.cdf(q - 1e-6) < u + 1e-9


def test_collision_probability():
    assert collision_probability(example_model("ex2_4")) == pytest.approx(25 / 49)
    assert collision_probability(example_model("ex2_6")) == 0.0
    assert collision_probability(example_model("ex3_5")) == pytest.approx(1 / 3, abs=1e-9)


# ---------------------------------------------------------------- sampling


def test_sample_examples():
    d = sample_joint(example_model("ex2_4"), 1000, 3)
    assert d.n == 1000
    assert abs(np.mean(d.x[:, 0] == -1) - 4 / 7) <= 0.05
    d = sample_joint(example_model("ex3_4"), 100, 3)
    assert set(np.unique(d.y)) <= {-1.0, 2.0}
    with pytest.raises(CountError):
        sample_joint(example_model("ex2_4"), 0, 1)


def test_sample_determinism():
    m = example_model("ex2_6")
    a, b = sample_joint(m, 500, 9), sample_joint(m, 500, 9)
    assert a.x.tobytes() == b.x.tobytes() and a.y.tobytes() == b.y.tobytes()
    c = sample_joint(m, 500, 10)
    assert c.y.tobytes() != a.y.tobytes()


@pytest.mark.slow
@pytest.mark.parametrize("example_id", ["ex2_4", "ex2_6", "ex3_4"])
def test_dkw_bound(example_id):
    m = example_model(example_id)
    law = marginal_law_Y(m)
    n, ok = 10_000, 0
    for seed in range(100):
        y = np.sort(sample_joint(m, n, seed).y)
        upper = np.searchsorted(y, y, side="right") / n
        lower = np.searchsorted(y, y, side="left") / n
        F = law.cdf(y)
        Fl = law.cdf_left(y)
        d = max(np.max(np.abs(upper - F)), np.max(np.abs(Fl - lower)))
        ok += d <= 1.95 / np.sqrt(n)
    assert ok >= 95
