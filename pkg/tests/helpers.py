"""Shared oracles and generators for the test suite."""

import numpy as np

from specgap import from_matrices


def mp_edges(c):
    return (1.0 - np.sqrt(c)) ** 2, (1.0 + np.sqrt(c)) ** 2


def mp_density(xs, c):
    """Closed-form limiting density for the uncorrelated case with ratio c < 1."""
    a, b = mp_edges(c)
    xs = np.asarray(xs, dtype=float)
    out = np.zeros_like(xs)
    inside = (xs > a) & (xs < b)
    x = xs[inside]
    out[inside] = np.sqrt((b - x) * (x - a)) / (2.0 * np.pi * c * x)
    return out


def mp_delta(c, z):
    """Fixed point of the scalar self-consistent equation for the identity ensemble.

    Root of z d^2 + (c + z - 1) d + c = 0 that is the Stieltjes branch
    (positive for real z < 0).
    """
    disc = np.sqrt(complex((c + z - 1.0) ** 2 - 4.0 * z * c))
    roots = [((1.0 - c - z) + s * disc) / (2.0 * z) for s in (+1, -1)]
    if np.real(z) < 0 and np.imag(z) == 0:
        return max(r.real for r in roots)
    return max(roots, key=lambda r: r.imag)


def random_psd(rng, N, floor=0.2):
    h = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    om = h @ h.conj().T / N + floor * np.eye(N)
    return om


def random_ensemble(rng, N=None, n=None, real=False):
    """Small random ensemble satisfying the boundedness assumptions."""
    if N is None:
        N = int(rng.integers(2, 9))
    if n is None:
        n = int(rng.integers(N + 1, 4 * N + 2))
    omegas = np.stack([random_psd(rng, N) for _ in range(n)])
    if real:
        omegas = omegas.real + np.stack([np.eye(N)] * n) * 0.0
        omegas = 0.5 * (omegas + omegas.transpose(0, 2, 1))
    return from_matrices(omegas)


def random_upper_z(rng):
    return complex(rng.uniform(-2.0, 3.0), rng.uniform(0.05, 3.0))
