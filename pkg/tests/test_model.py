import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specgap import (
    build_exponential,
    build_identity,
    ensemble_from_config,
    from_matrices,
    hermitian_sqrt,
    validate,
)
from specgap.errors import AssumptionViolation, ConfigError, DimensionError, DomainError
from specgap.model import load_omegas, save_omegas

from helpers import random_psd


def test_identity_small():
    ens = build_identity(2, 4)
    assert ens.c == 0.5
    assert all(np.array_equal(om, np.eye(2)) for om in ens.omegas)
    assert ens.w_min == ens.w_max == 1.0


def test_identity_shape_64():
    ens = build_identity(64, 256)
    assert ens.c == 0.25
    assert ens.w_min == 1.0 and ens.w_max == 1.0


@pytest.mark.parametrize("N,n", [(4, 4), (5, 4), (0, 3)])
def test_identity_dimension_errors(N, n):
    with pytest.raises(DimensionError):
        build_identity(N, n)


def test_exponential_zero_rho_is_identity():
    ens = build_exponential(2, 3, [0.0, 0.0, 0.0])
    for om in ens.omegas:
        assert np.array_equal(om, np.eye(2))


def test_exponential_half_eigenvalues(exp_small):
    # 2x2 Toeplitz with rho has eigenvalues 1 +- rho
    assert exp_small.w_min == pytest.approx(0.5, abs=1e-12)
    assert exp_small.w_max == pytest.approx(1.5, abs=1e-12)
    assert np.allclose(exp_small.omegas[0], [[1.0, 0.5], [0.5, 1.0]])


def test_exponential_rho_domain():
    with pytest.raises(DomainError):
        build_exponential(2, 3, [1.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        build_exponential(2, 3, [0.3, -0.1, 0.0])


def test_exponential_equal_rho_all_columns_identical():
    ens = build_exponential(3, 7, [0.4] * 7)
    assert len(ens.group_mult) == 1
    assert ens.group_mult[0] == 7.0


def test_validate_identity_and_exponential(exp_small):
    assert validate(build_identity(3, 6)) == (1.0, 1.0)
    lo, hi = validate(exp_small)
    assert lo == pytest.approx(0.5, abs=1e-12)
    assert hi == pytest.approx(1.5, abs=1e-12)


def test_validate_flags_offending_column():
    omegas = np.stack([np.eye(2), np.zeros((2, 2)), np.eye(2)])
    with pytest.raises(AssumptionViolation) as err:
        from_matrices(omegas)
    assert err.value.index == 1


def test_validate_rejects_non_hermitian():
    omegas = np.stack([np.eye(2), np.array([[1.0, 0.5], [0.1, 1.0]])])
    with pytest.raises(AssumptionViolation):
        from_matrices(np.concatenate([omegas, [np.eye(2)]]))


def test_hermitian_sqrt_examples():
    assert np.allclose(hermitian_sqrt(np.eye(3)), np.eye(3))
    assert np.allclose(hermitian_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    om = np.array([[1.0, 0.5], [0.5, 1.0]])
    theta = hermitian_sqrt(om)
    assert np.linalg.norm(theta @ theta.conj().T - om) <= 1e-10 * np.linalg.norm(om)


def test_hermitian_sqrt_rejects_non_hermitian():
    with pytest.raises((AssumptionViolation, DomainError)):
        hermitian_sqrt(np.array([[1.0, 1.0], [0.0, 1.0]]))


def test_hermitian_sqrt_rejects_indefinite():
    with pytest.raises(DomainError):
        hermitian_sqrt(np.diag([1.0, -0.5]))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_hermitian_sqrt_roundtrip_random_psd(N, seed):
    rng = np.random.default_rng(seed)
    om = random_psd(rng, N)
    theta = hermitian_sqrt(om)
    scale = np.linalg.norm(om)
    assert np.linalg.norm(theta @ theta.conj().T - om) <= 1e-10 * scale
    assert np.abs(theta - theta.conj().T).max() < 1e-10 * scale


def test_ensemble_immutable_and_cached(exp_small):
    with pytest.raises(ValueError):
        exp_small.omegas[0, 0, 0] = 2.0
    t1 = exp_small.thetas
    assert t1 is exp_small.thetas  # cached
    for i, om in enumerate(exp_small.omegas):
        rec = t1[i] @ t1[i].conj().T
        assert np.linalg.norm(rec - om) <= 1e-10 * np.linalg.norm(om)


def test_grouping_collapses_duplicates():
    ens = build_exponential(4, 9, [(0.1, 0.6, 0.6)[i % 3] for i in range(9)])
    assert len(ens.group_mult) == 2
    assert sorted(ens.group_mult.tolist()) == [3.0, 6.0]
    assert np.all(ens.expand(np.array([5.0, 7.0]))[ens.group_index == 0] == 5.0)


def test_config_identity_and_exponential_cycling():
    ens = ensemble_from_config({"N": 2, "n": 4, "model": {"type": "identity"}})
    assert ens.c == 0.5
    ens = ensemble_from_config(
        {"N": 2, "n": 5, "model": {"type": "exponential", "rho": [0.1, 0.2]}}
    )
    assert ens.omegas[2][0, 1] == pytest.approx(0.1)  # pattern cycles
    assert ens.omegas[3][0, 1] == pytest.approx(0.2)


def test_config_file_roundtrip(tmp_path):
    rng = np.random.default_rng(3)
    omegas = np.stack([random_psd(rng, 3) for _ in range(5)])
    path = tmp_path / "omegas.bin"
    save_omegas(path, omegas)
    back = load_omegas(path, 3, 5)
    assert np.allclose(back, omegas)
    ens = ensemble_from_config(
        {"N": 3, "n": 5, "model": {"type": "file", "path": str(path)}}
    )
    assert np.allclose(ens.omegas, omegas)


def test_config_file_size_mismatch(tmp_path):
    path = tmp_path / "short.bin"
    np.zeros(7).tofile(path)
    with pytest.raises(ConfigError):
        load_omegas(path, 2, 2)


def test_config_strictness():
    with pytest.raises(ConfigError):
        ensemble_from_config({"N": 2, "n": 4, "model": {"type": "identity"}, "extra": 1})
    with pytest.raises(ConfigError):
        ensemble_from_config({"N": 2, "n": 4, "model": {"type": "identity", "rho": [0.1]}})
    with pytest.raises(ConfigError):
        ensemble_from_config({"N": 2, "n": 4, "model": {"type": "warp"}})
    with pytest.raises(ConfigError):
        ensemble_from_config({"n": 4, "model": {"type": "identity"}})
