import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specgap import (
    PositiveSystemWitness,
    build_identity,
    hadamard_dominance,
    positive_system_bound,
    solve_at_zero,
    spectral_radius,
    trace_jensen_gap,
)
from specgap.algebra import (
    power_norm_estimates,
    random_dominance_triple,
    random_positive_witness,
)
from specgap.errors import DomainError, DominanceError, WitnessError


def test_spectral_radius_examples():
    assert spectral_radius(np.eye(3)) == pytest.approx(1.0, abs=1e-12)
    assert spectral_radius(np.diag([0.2, 0.9])) == pytest.approx(0.9, abs=1e-12)
    assert spectral_radius(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(0.0, abs=1e-12)


def test_spectral_radius_rejects_nonfinite():
    with pytest.raises(DomainError):
        spectral_radius(np.array([[np.inf, 0.0], [0.0, 1.0]]))


def test_power_norm_agreement_for_gapped_matrices():
    rng = np.random.default_rng(2)
    for _ in range(25):
        M = rng.random((6, 6))
        rho = spectral_radius(M)
        # relative spectral gap >= 0.1 for positive random matrices (Perron)
        est = power_norm_estimates(M, (32,))[0]
        assert est == pytest.approx(rho, rel=0.05)


def test_positive_system_example():
    w = PositiveSystemWitness(A=0.5 * np.eye(2), u=np.array([2.0, 2.0]), v=np.array([1.0, 1.0]))
    rho, bound = positive_system_bound(w)
    assert rho == pytest.approx(0.5, abs=1e-12)
    assert bound == pytest.approx(0.5, abs=1e-12)


def test_positive_system_from_zero_jacobian():
    # the zero-point Jacobian satisfies u = J u + 1 with u = 1 + ell,
    # giving the radius certificate with equality for identity ensembles
    from specgap import jacobian_at_zero

    ens = build_identity(16, 64)
    ell = solve_at_zero(ens).ell
    J, rho, bound = jacobian_at_zero(ens, ell)
    w = PositiveSystemWitness(A=J, u=1.0 + ell, v=np.ones(ens.n))
    rho_w, bound_w = positive_system_bound(w)
    assert rho_w == pytest.approx(0.25, abs=1e-8)
    assert rho_w <= bound_w + 1e-10
    assert bound_w == pytest.approx(bound, abs=1e-10)


def test_positive_system_witness_errors():
    w = PositiveSystemWitness(A=0.5 * np.eye(2), u=np.array([2.0, 2.1]), v=np.array([1.0, 1.0]))
    with pytest.raises(WitnessError) as err:
        positive_system_bound(w)
    assert err.value.residual > 0
    w = PositiveSystemWitness(A=np.array([[0.5, -0.1], [0.0, 0.5]]),
                              u=np.array([2.0, 2.0]), v=np.array([1.0, 1.0]))
    with pytest.raises(WitnessError):
        positive_system_bound(w)


def test_positive_system_500_random_witnesses():
    rng = np.random.default_rng(2024)
    for _ in range(500):
        w = random_positive_witness(rng, int(rng.integers(2, 15)),
                                    target_rho=float(rng.uniform(0.05, 0.97)))
        rho, bound = positive_system_bound(w)
        assert rho <= bound < 1.0


def test_trace_jensen_examples():
    assert trace_jensen_gap(3.0 * np.eye(4)) == pytest.approx(0.0, abs=1e-12)
    assert trace_jensen_gap(np.diag([1.0, -1.0])) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        trace_jensen_gap(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_trace_jensen_zero_iff_identity_like():
    rng = np.random.default_rng(4)
    h = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    A = h + h.conj().T
    assert trace_jensen_gap(A) > 1e-10  # distinct eigenvalues almost surely
    assert trace_jensen_gap((2.0 + 0j) * np.eye(5)) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 10), st.integers(0, 2**32 - 1))
def test_trace_jensen_nonnegative(n, seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    assert trace_jensen_gap(h + h.conj().T) >= 0.0


def test_hadamard_equal_matrices():
    M = 0.3 * np.eye(2)
    rep = hadamard_dominance(M, M, M)
    assert rep.rho_a == pytest.approx(0.3, abs=1e-12)
    assert rep.norms is not None
    na, nb, nc = rep.norms
    assert na == pytest.approx(np.sqrt(nb * nc), abs=1e-8)


def test_hadamard_rotation_example():
    B = np.array([[0.0, 1.0], [1.0, 0.0]])
    A = np.array([[0.0, -1.0], [1.0, 0.0]])
    rep = hadamard_dominance(A, B, B)
    assert rep.rho_a == pytest.approx(1.0, abs=1e-12)
    assert rep.rho_b == pytest.approx(1.0, abs=1e-12)
    assert rep.norms is None  # radius-one comparison matrices


def test_hadamard_precondition_violation():
    B = np.full((2, 2), 0.04)
    with pytest.raises(DominanceError) as err:
        hadamard_dominance(np.full((2, 2), 0.5), B, B)
    assert err.value.location is not None


def test_hadamard_1000_random_triples():
    rng = np.random.default_rng(77)
    for _ in range(1000):
        A, B, C = random_dominance_triple(rng, int(rng.integers(2, 12)),
                                          target_rho=float(rng.uniform(0.2, 0.9)))
        rep = hadamard_dominance(A, B, C)
        assert rep.rho_a <= np.sqrt(rep.rho_b * rep.rho_c) + 1e-10
        assert rep.norms is not None
