import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from langtraj.errors import ConstantColumn, DomainError, SingularDesign
from langtraj.stats import bh_adjust, fisher_ci, ols, pearson_r, standardize


def test_standardize_examples():
    assert standardize([1, 2, 3]).tolist() == [-1.0, 0.0, 1.0]
    z = standardize([2, 4, 4, 4, 5, 5, 7, 9])
    assert z[0] == pytest.approx(-3 / 2.1380899, abs=1e-4)
    assert np.std([2, 4, 4, 4, 5, 5, 7, 9], ddof=1) == pytest.approx(2.1381, abs=1e-4)
    with pytest.raises(ConstantColumn):
        standardize([5, 5, 5])


def test_pearson_examples():
    assert pearson_r([1, 2, 3, 4], [2, 1, 4, 3]).r == pytest.approx(0.6, abs=1e-12)
    assert pearson_r([1, 2, 3, 4], [1, 2, 3, 4]).r == 1.0


@pytest.mark.parametrize("r, lo, hi", [(0.38, 0.16, 0.56), (0.26, 0.03, 0.46), (-0.36, -0.54, -0.14)])
def test_fisher_ci_published(r, lo, hi):
    got = fisher_ci(r, 75)
    assert got[0] == pytest.approx(lo, abs=0.02) and got[1] == pytest.approx(hi, abs=0.02)


def test_exact_fit():
    x = np.arange(10.0)
    fit = ols(x, 3 * x + 1, ["x"])
    assert np.allclose(fit.residuals, 0, atol=1e-12)
    assert fit.pvalues[1] < 1e-10


def test_singular_names_columns():
    x = np.random.default_rng(0).normal(size=(20, 2))
    X = np.column_stack([x, x[:, 0] + x[:, 1]])
    with pytest.raises(SingularDesign) as info:
        ols(X, x[:, 0], ["a", "b", "c"])
    assert len(info.value.columns) == 1 and info.value.columns[0] in {"a", "b", "c"}


def test_bh_examples():
    assert bh_adjust([0.01, 0.02, 0.04, 0.5]) == pytest.approx([0.04, 0.04, 0.04 * 4 / 3, 0.5])
    assert bh_adjust([0.2, 0.2, 0.2]).tolist() == [0.2, 0.2, 0.2]
    assert bh_adjust([0.03]).tolist() == [0.03]
    with pytest.raises(DomainError):
        bh_adjust([0.5, 1.2])


@given(arrays(float, st.integers(1, 30), elements=st.floats(0, 1)))
def test_bh_properties(p):
    adj = bh_adjust(p)
    assert np.all(adj >= p - 1e-15) and np.all(adj <= 1)
    order = np.argsort(p, kind="stable")
    assert np.all(np.diff(adj[order]) >= -1e-15)


@given(st.integers(4, 40), st.integers(0, 2**32 - 1))
def test_beta_equals_r(n, seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=n), rng.normal(size=n)
    fit = ols(standardize(x), standardize(y), ["x"])
    assert fit.coef[1] == pytest.approx(pearson_r(x, y).r, abs=1e-10)


@given(st.floats(-0.95, 0.95), st.integers(5, 500))
def test_fisher_ci_contains_r(r, n):
    lo, hi = fisher_ci(r, n)
    assert -1 < lo <= r <= hi < 1
