import numpy as np
import pytest

from src.decomposition import is_odeco, odeco_decompose
from src.errors import InputError
from src.generators import (
    EXAMPLE1_LAMBDAS,
    EXAMPLE1_V,
    almost_symmetric,
    example1,
    example1_projection,
    example2,
    generate,
    odeco,
)
from src.tensor_core import is_almost_symmetric


def test_example1_has_printed_lambdas():
    d = odeco_decompose(example1().A)
    np.testing.assert_allclose(
        np.sort(d.lambdas), np.sort(np.concatenate([EXAMPLE1_LAMBDAS, np.zeros(3)])), atol=1e-10
    )


def test_example1_projection_is_close_to_printed_factor():
    V = example1_projection()
    np.testing.assert_allclose(V.T @ V, np.eye(3), atol=1e-12)
    assert np.max(np.abs(V - EXAMPLE1_V)) <= 2e-3


def test_example1_decomposition_matches_printed_factor_up_to_sign_and_order():
    d = odeco_decompose(example1().A)
    for v in EXAMPLE1_V.T:
        v = v / np.linalg.norm(v)
        overlaps = np.abs(d.U[:, : d.rank].T @ v)
        assert np.max(overlaps) >= 1 - 2e-3


def test_small_odeco_generator_is_odeco():
    assert is_odeco(odeco(2, 4, r=2, seed=1).A)


def test_odeco_generator_lambda_range():
    model = odeco(4, 4, r=3, seed=9, lam_range=(1.0, 3.0), negative=True)
    lambdas = np.array(model.metadata["lambdas"])
    assert np.all(lambdas < 0)
    assert np.all((np.abs(lambdas) >= 1.0) & (np.abs(lambdas) <= 3.0))


def test_generators_are_deterministic():
    a, b = almost_symmetric(3, 4, seed=7, m=1, l=1), almost_symmetric(3, 4, seed=7, m=1, l=1)
    np.testing.assert_array_equal(a.A, b.A)
    np.testing.assert_array_equal(a.B, b.B)
    assert a.metadata == b.metadata
    assert "PCG64" in a.metadata["generator"]
    assert not np.array_equal(a.A, almost_symmetric(3, 4, seed=8, m=1, l=1).A)


def test_example2_shapes():
    model = example2(seed=3)
    assert (model.n, model.k, model.m, model.l) == (12, 4, 5, 0)
    assert is_almost_symmetric(model.A)


def test_generator_errors():
    with pytest.raises(InputError):
        odeco(2, 4, r=3, seed=1)
    with pytest.raises(InputError):
        odeco(2, 4, r=1)
    with pytest.raises(InputError):
        generate("almost_symmetric", n=3, k=3)
    with pytest.raises(InputError):
        generate("odeco", seed=1)
    with pytest.raises(InputError):
        generate("banded", n=2, k=3, seed=1)
