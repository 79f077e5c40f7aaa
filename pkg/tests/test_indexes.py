from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdaclust import Grid, InvalidArgument, smooth, make_basis
from fdaclust.indexes import (ComboSpec, DataSource, IndexKind, admissibility, admissible,
                              assemble_features, compute_index, enumerate_combos)

from conftest import make_sample


def brute_force(values, kind):
    """Direct O(n^2 m) count with exact fractions."""
    n, m = values.shape
    out = []
    for i in range(n):
        if kind in ("EI", "HI"):
            if kind == "EI":
                c = sum(all(values[j, t] >= values[i, t] for t in range(m)) for j in range(n))
                out.append(1 - Fraction(c, n))
            else:
                c = sum(all(values[j, t] <= values[i, t] for t in range(m)) for j in range(n))
                out.append(Fraction(c, n))
        else:
            if kind == "MEI":
                c = sum(values[j, t] >= values[i, t] for j in range(n) for t in range(m))
                out.append(1 - Fraction(c, n * m))
            else:
                c = sum(values[j, t] <= values[i, t] for j in range(n) for t in range(m))
                out.append(Fraction(c, n * m))
    return np.array([float(f) for f in out])


def nested(n=3, m=10, seed=0):
    rng = np.random.default_rng(seed)
    base = rng.normal(size=m)
    return np.array([base + i for i in range(n)])


class TestClosedForms:
    def test_three_nested_curves(self):
        X = nested()
        np.testing.assert_array_equal(compute_index("EI", X), [0, 1 / 3, 2 / 3])
        np.testing.assert_array_equal(compute_index("HI", X), [1 / 3, 2 / 3, 1])
        np.testing.assert_array_equal(compute_index("MEI", X), [0, 1 / 3, 2 / 3])
        np.testing.assert_array_equal(compute_index("MHI", X), [1 / 3, 2 / 3, 1])

    @pytest.mark.parametrize("n", [2, 5, 11, 40])
    def test_rank_formula(self, n):
        X = nested(n, 17, seed=n)
        perm = np.random.default_rng(n).permutation(n)
        X = X[perm]
        rank = np.argsort(np.argsort(X[:, 0]))  # 0 = lowest
        for kind in ("EI", "MEI"):
            np.testing.assert_array_equal(compute_index(kind, X), rank / n)
        for kind in ("HI", "MHI"):
            np.testing.assert_array_equal(compute_index(kind, X), (rank + 1) / n)

    def test_pointwise_minimum_has_zero_ei(self, rng):
        X = rng.normal(size=(6, 12))
        X = np.vstack([X, X.min(axis=0)])
        assert compute_index("EI", X)[-1] == 0.0


class TestBruteForce:
    def test_random_5x7(self, rng):
        X = rng.normal(size=(5, 7))
        for kind in ("EI", "HI", "MEI", "MHI"):
            np.testing.assert_array_equal(compute_index(kind, X), brute_force(X, kind))

    def test_with_ties(self):
        X = np.array([[0, 1, 2, 3], [0, 2, 1, 3], [1, 1, 1, 1], [0, 1, 2, 3.0]])
        for kind in ("EI", "HI", "MEI", "MHI"):
            np.testing.assert_array_equal(compute_index(kind, X), brute_force(X, kind))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2 ** 32 - 1))
    def test_integer_samples(self, n, m, seed):
        X = np.random.default_rng(seed).integers(-2, 3, size=(n, m)).astype(float)
        for kind in ("EI", "HI", "MEI", "MHI"):
            np.testing.assert_array_equal(compute_index(kind, X), brute_force(X, kind))


class TestProperties:
    def test_mhi_minus_mei(self, rng):
        for _ in range(100):
            n, m = rng.integers(3, 31), rng.integers(5, 51)
            X = rng.normal(size=(n, m))
            d = compute_index("MHI", X) - compute_index("MEI", X)
            assert np.max(np.abs(d - 1 / n)) <= 1e-12

    def test_range(self, rng):
        X = rng.normal(size=(20, 15))
        for kind in IndexKind:
            v = compute_index(kind, X)
            assert v.min() >= 0 and v.max() <= 1

    def test_shift_invariance(self, rng):
        X = rng.normal(size=(12, 20))
        g = 5 * np.sin(np.linspace(0, 3, 20))
        for kind in IndexKind:
            np.testing.assert_array_equal(compute_index(kind, X), compute_index(kind, X + g))

    @pytest.mark.parametrize("f", [np.exp, np.arctan, lambda x: x ** 3 + x])
    def test_monotone_transform_invariance(self, rng, f):
        X = rng.normal(size=(10, 14))
        for kind in IndexKind:
            np.testing.assert_array_equal(compute_index(kind, X), compute_index(kind, f(X)))

    def test_rounding_level_ties_are_ties(self):
        # 0.1 + 0.2 and 0.3 differ by one ulp; the tolerance treats them as equal
        X = np.array([[0.1 + 0.2, 1.0, 2.0, 3.0], [0.3, 1.0, 2.0, 3.0]])
        np.testing.assert_array_equal(compute_index("EI", X), [0.0, 0.0])
        np.testing.assert_array_equal(compute_index("HI", X), [1.0, 1.0])

    def test_large_sample_blocks(self, rng):
        X = rng.normal(size=(300, 40))
        small = X[:30]
        full = compute_index("EI", X)
        assert full.shape == (300,)
        np.testing.assert_array_equal(compute_index("HI", small), brute_force(small, "HI"))

    def test_accepts_functional_sample(self, rng):
        X = rng.normal(size=(4, 6))
        np.testing.assert_array_equal(compute_index("MEI", make_sample(X)),
                                      compute_index(IndexKind.MEI, X))


class TestComboSpec:
    @pytest.mark.parametrize("text", ["_.EIHI", "d.EIHI", "_dd2.EIHIMEI", "dd2.MEI",
                                      "_d2.MEI", "d2.EIHIMEI"])
    def test_round_trip(self, text):
        assert str(ComboSpec.parse(text)) == text

    @pytest.mark.parametrize("text", ["d.MEI", "_.MEI", "x.EIHI", "_dd2", "_d.FOO", "", "d2d.EIHI"])
    def test_rejects(self, text):
        with pytest.raises(InvalidArgument):
            ComboSpec.parse(text)

    def test_column_order_full(self):
        names = [src.prefix + kind.value for kind, src in ComboSpec.parse("_dd2.EIHIMEI").columns]
        assert names == ["EI", "HI", "MEI", "dEI", "dHI", "dMEI", "d2EI", "d2HI", "d2MEI"]

    def test_column_order_mei(self):
        c = ComboSpec.parse("dd2.MEI")
        assert c.columns == [(IndexKind.MEI, DataSource.D1), (IndexKind.MEI, DataSource.D2)]
        assert c.num_columns == 2

    def test_sources_normalized(self):
        c = ComboSpec((DataSource.D2, DataSource.ORIGINAL), frozenset({"EIHI"}))
        assert str(c) == "_d2.EIHI"


class TestEnumerate:
    def test_count_and_members(self):
        combos = [str(c) for c in enumerate_combos()]
        assert len(combos) == 18 == len(set(combos))
        assert "_.EIHI" in combos and "dd2.MEI" in combos

    def test_no_single_source_mei(self):
        for c in enumerate_combos():
            if c.families == {"MEI"}:
                assert len(c.sources) >= 2

    def test_family_counts(self):
        fams = [c.family_label for c in enumerate_combos()]
        assert fams.count("EIHI") == 7 and fams.count("EIHIMEI") == 7 and fams.count("MEI") == 4

    def test_deterministic(self):
        assert [str(c) for c in enumerate_combos()] == [str(c) for c in enumerate_combos()]


class TestAssemble:
    @pytest.fixture
    def triple(self, rng):
        g = Grid.linspace(0, 1, 30)
        t = g.points
        X = np.sin(2 * np.pi * t)[None] * rng.uniform(0.5, 2, (25, 1)) + rng.normal(0, .1, (25, 30))
        return smooth(make_sample(X, g), make_basis(g, 10))

    def test_columns_equal_compute_index(self, triple):
        for combo in enumerate_combos():
            F = assemble_features(triple, combo)
            assert F.shape == (triple.n, combo.num_columns)
            for j, (kind, src) in enumerate(F.columns):
                np.testing.assert_array_equal(F.values[:, j],
                                              compute_index(kind, triple.source(src.value)))

    def test_nested_reproduces_compute_index(self):
        g = Grid.linspace(0, 1, 12)
        X = nested(4, 12)
        tr = smooth(make_sample(X, g), make_basis(g, 4))
        F = assemble_features(tr, "_dd2.EIHIMEI")
        np.testing.assert_array_equal(F.values[:, 0], [0, .25, .5, .75])
        np.testing.assert_array_equal(F.values[:, 1], [.25, .5, .75, 1])

    def test_string_combo_and_names(self, triple):
        F = assemble_features(triple, "dd2.MEI")
        assert F.column_names == ["dMEI", "d2MEI"]
        assert np.all((F.values >= 0) & (F.values <= 1))


class TestAdmissibility:
    def test_constant_column(self, rng):
        Y = np.c_[rng.normal(size=50), np.full(50, 0.3)]
        ok, reason = admissibility(Y)
        assert not ok and "ill-conditioned" in reason

    def test_orthogonal_unit_columns(self):
        # columns with exact unit variance and zero correlation
        Y = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], float) * np.sqrt(3 / 4)
        assert np.isclose(np.linalg.det(np.cov(Y, rowvar=False)), 1.0)
        assert admissible(Y)

    def test_duplicate_column(self, rng):
        y = rng.normal(size=40)
        assert not admissible(np.c_[y, y])

    def test_insufficient_rows(self, rng):
        ok, reason = admissibility(rng.normal(size=(3, 3)))
        assert not ok and reason == "insufficient rows"

    def test_threshold_unbiased(self):
        # variance (ddof=1) of [0, s] is s^2 / 2; choose s so det sits either side of 1e-5
        for s, expect in ((np.sqrt(2 * 1.01e-5), True), (np.sqrt(2 * 0.99e-5), False)):
            assert admissible(np.array([[0.0], [s]])) is expect
