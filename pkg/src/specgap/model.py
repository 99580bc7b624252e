"""Correlation ensembles for the generally correlated Gaussian column model.

An ensemble holds the per-column covariances Omega_i of an N x n random
matrix whose i-th column is Theta_i g_i with g_i standard complex Gaussian
and Omega_i = Theta_i Theta_i^*.  Admissible ensembles have 0 < N < n,
every Omega_i Hermitian positive definite, and eigenvalues bounded away
from 0 and infinity uniformly over columns.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import AssumptionViolation, ConfigError, DimensionError, DomainError

HERMITICITY_RTOL = 1e-12
SQRT_RECONSTRUCTION_RTOL = 1e-10
EIGENVALUE_CLAMP = -1e-12
WMIN_TOLERANCE = 1e-10


def hermitian_sqrt(omega: np.ndarray) -> np.ndarray:
    """Hermitian square root Theta with Theta @ Theta^* == omega.

    Computed by eigendecomposition; eigenvalues in (-1e-12, 0) are clamped
    to zero to absorb PSD drift, anything more negative is an error.
    """
    omega = np.asarray(omega)
    _check_hermitian(omega, what="hermitian_sqrt input")
    evals, vecs = np.linalg.eigh(omega)
    if evals[0] < EIGENVALUE_CLAMP:
        raise DomainError(
            f"matrix is not PSD: smallest eigenvalue {evals[0]:.3e} < {EIGENVALUE_CLAMP:.0e}"
        )
    evals = np.clip(evals, 0.0, None)
    theta = (vecs * np.sqrt(evals)) @ vecs.conj().T
    if np.isrealobj(omega):
        theta = theta.real
    scale = np.linalg.norm(omega)
    err = np.linalg.norm(theta @ theta.conj().T - omega)
    if scale > 0 and err > SQRT_RECONSTRUCTION_RTOL * scale:
        raise AssumptionViolation(
            f"square root reconstruction error {err / scale:.3e} exceeds "
            f"{SQRT_RECONSTRUCTION_RTOL:.0e}"
        )
    return theta


def _check_hermitian(omega, what="matrix", index=None):
    if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {omega.shape}")
    scale = max(1.0, float(np.abs(omega).max()))
    dev = float(np.abs(omega - omega.conj().T).max())
    if dev > HERMITICITY_RTOL * scale:
        where = "" if index is None else f" at column {index}"
        raise AssumptionViolation(
            f"{what}{where} is not Hermitian: max deviation {dev:.3e} "
            f"(tolerance {HERMITICITY_RTOL:.0e} relative)",
            index=index,
        )


@dataclass(frozen=True)
class CorrelationEnsemble:
    """Immutable bundle of per-column covariances.

    ``omegas`` is a read-only (n, N, N) array.  Square roots and the
    grouping of identical columns are computed lazily and cached, so a
    constructed ensemble is safe to share across workers.
    """

    N: int
    n: int
    omegas: np.ndarray
    w_min: float
    w_max: float
    c: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "c", self.N / self.n)

    @cached_property
    def group_thetas(self) -> np.ndarray:
        """(G, N, N) Hermitian square roots of the distinct covariances."""
        out = np.stack([hermitian_sqrt(om) for om in self.group_omegas])
        out.setflags(write=False)
        return out

    @cached_property
    def thetas(self) -> np.ndarray:
        """(n, N, N) stack of Hermitian square roots, one per column."""
        out = np.ascontiguousarray(self.group_thetas[self.group_index])
        out.setflags(write=False)
        return out

    # Columns with byte-identical covariances share one fixed-point unknown;
    # grouping them collapses the iteration from n coordinates to G <= n
    # without changing any result (the iteration preserves the symmetry).
    @cached_property
    def _grouping(self):
        index_of = {}
        group_index = np.empty(self.n, dtype=np.intp)
        reps = []
        for i in range(self.n):
            key = self.omegas[i].tobytes()
            g = index_of.get(key)
            if g is None:
                g = len(reps)
                index_of[key] = g
                reps.append(i)
            group_index[i] = g
        group_omegas = np.ascontiguousarray(self.omegas[reps])
        group_omegas.setflags(write=False)
        mult = np.bincount(group_index, minlength=len(reps)).astype(float)
        group_index.setflags(write=False)
        mult.setflags(write=False)
        return group_omegas, mult, group_index

    @property
    def group_omegas(self) -> np.ndarray:
        return self._grouping[0]

    @property
    def group_mult(self) -> np.ndarray:
        return self._grouping[1]

    @property
    def group_index(self) -> np.ndarray:
        return self._grouping[2]

    @cached_property
    def group_eigh(self):
        """Eigendecompositions of the distinct covariances (ascending)."""
        evals = np.empty((len(self.group_mult), self.N))
        evecs = np.empty((len(self.group_mult), self.N, self.N), dtype=self.omegas.dtype)
        for g, om in enumerate(self.group_omegas):
            evals[g], evecs[g] = np.linalg.eigh(om)
        evals.setflags(write=False)
        evecs.setflags(write=False)
        return evals, evecs

    @cached_property
    def group_columns(self) -> list:
        """Column indices belonging to each group, in column order."""
        return [np.flatnonzero(self.group_index == g)
                for g in range(len(self.group_mult))]

    @cached_property
    def group_omegas_flat(self) -> np.ndarray:
        """(G, N*N) row-major flattening used by the solver's trace sweeps."""
        flat = self.group_omegas.reshape(len(self.group_omegas), -1).copy()
        flat.setflags(write=False)
        return flat

    @cached_property
    def ensemble_id(self) -> str:
        h = hashlib.sha1()
        h.update(np.ascontiguousarray(self.omegas).tobytes())
        return h.hexdigest()[:12]

    def expand(self, group_values: np.ndarray) -> np.ndarray:
        """Broadcast per-group values back to per-column (length n)."""
        return np.asarray(group_values)[self.group_index]


def from_matrices(omegas, w_min_tol: float = WMIN_TOLERANCE) -> CorrelationEnsemble:
    """Build and validate an ensemble from n covariance matrices."""
    omegas = np.asarray(omegas)
    if omegas.ndim != 3 or omegas.shape[1] != omegas.shape[2]:
        raise DimensionError(f"expected (n, N, N) stack, got shape {omegas.shape}")
    n, N = omegas.shape[0], omegas.shape[1]
    if not 0 < N < n:
        raise DimensionError(f"require 0 < N < n, got N={N}, n={n}")
    if np.iscomplexobj(omegas) and not np.any(omegas.imag):
        omegas = omegas.real
    omegas = np.ascontiguousarray(omegas)
    omegas.setflags(write=False)
    ens = CorrelationEnsemble(N=N, n=n, omegas=omegas, w_min=np.nan, w_max=np.nan)
    w_min, w_max = validate(ens, w_min_tol=w_min_tol)
    object.__setattr__(ens, "w_min", w_min)
    object.__setattr__(ens, "w_max", w_max)
    return ens


def validate(ensemble: CorrelationEnsemble, w_min_tol: float = WMIN_TOLERANCE):
    """Check Hermiticity and eigenvalue bounds of every covariance.

    Returns (w_min, w_max) over all columns; raises AssumptionViolation
    naming the offending column if some Omega_i is non-Hermitian or has an
    eigenvalue at or below ``w_min_tol``.
    """
    if not 0 < ensemble.N < ensemble.n:
        raise DimensionError(
            f"require 0 < N < n, got N={ensemble.N}, n={ensemble.n}"
        )
    w_min = np.inf
    w_max = -np.inf
    # eigenvalues are shared within a group; validate per group but report
    # the first offending column index
    first_col = {}
    for i, g in enumerate(ensemble.group_index):
        first_col.setdefault(int(g), i)
    for g, om in enumerate(ensemble.group_omegas):
        _check_hermitian(om, what="covariance", index=first_col[g])
        evals = np.linalg.eigvalsh(om)
        if evals[0] <= w_min_tol:
            raise AssumptionViolation(
                f"covariance at column {first_col[g]} has smallest eigenvalue "
                f"{evals[0]:.3e} <= {w_min_tol:.0e}; w_min > 0 is required",
                index=first_col[g],
            )
        w_min = min(w_min, float(evals[0]))
        w_max = max(w_max, float(evals[-1]))
    return w_min, w_max


def build_identity(N: int, n: int) -> CorrelationEnsemble:
    """All covariances equal to I_N (the classical uncorrelated case)."""
    if not 0 < N < n:
        raise DimensionError(f"require 0 < N < n, got N={N}, n={n}")
    omegas = np.broadcast_to(np.eye(N), (n, N, N))
    return from_matrices(np.ascontiguousarray(omegas))


def build_exponential(N: int, n: int, rhos) -> CorrelationEnsemble:
    """Per-column Toeplitz covariances [Omega_i]_{jk} = rho_i ** |j-k|.

    Each rho_i must lie in [0, 1); rho_i = 0 gives the identity.
    """
    if not 0 < N < n:
        raise DimensionError(f"require 0 < N < n, got N={N}, n={n}")
    rhos = np.asarray(rhos, dtype=float)
    if rhos.shape != (n,):
        raise DimensionError(f"need exactly n={n} correlation coefficients, got {rhos.shape}")
    if np.any(rhos < 0.0) or np.any(rhos >= 1.0):
        bad = int(np.argmax((rhos < 0.0) | (rhos >= 1.0)))
        raise DomainError(f"rho[{bad}] = {rhos[bad]} outside [0, 1)")
    idx = np.arange(N)
    lag = np.abs(idx[:, None] - idx[None, :])
    omegas = rhos[:, None, None] ** lag[None, :, :]
    return from_matrices(omegas)


# -- binary matrix files ----------------------------------------------------
#
# n concatenated N x N matrices, row-major, each entry stored as an
# interleaved (real, imag) pair of little-endian float64.

def load_omegas(path, N: int, n: int) -> np.ndarray:
    raw = np.fromfile(path, dtype="<f8")
    expected = 2 * n * N * N
    if raw.size != expected:
        raise ConfigError(
            f"{path}: expected {expected} float64 values for n={n}, N={N}, "
            f"found {raw.size}"
        )
    pairs = raw.reshape(n, N, N, 2)
    return pairs[..., 0] + 1j * pairs[..., 1]


def save_omegas(path, omegas) -> None:
    omegas = np.asarray(omegas, dtype=complex)
    out = np.empty(omegas.shape + (2,))
    out[..., 0] = omegas.real
    out[..., 1] = omegas.imag
    out.astype("<f8").tofile(path)


def ensemble_from_config(config: dict) -> CorrelationEnsemble:
    """Build an ensemble from its JSON configuration.

    Schema: {"N": int, "n": int, "model": {"type": "identity" |
    "exponential" | "file", "rho": [floats], "path": "..."}}.  For the
    exponential model a rho list shorter than n is cycled.
    """
    allowed = {"N", "n", "model"}
    unknown = set(config) - allowed
    if unknown:
        raise ConfigError(f"unknown ensemble config keys: {sorted(unknown)}")
    try:
        N = int(config["N"])
        n = int(config["n"])
        model = config["model"]
    except KeyError as exc:
        raise ConfigError(f"ensemble config missing key {exc}") from None
    if not isinstance(model, dict) or "type" not in model:
        raise ConfigError("ensemble config needs model.type")
    kind = model["type"]
    if kind == "identity":
        _reject_unknown(model, {"type"})
        return build_identity(N, n)
    if kind == "exponential":
        _reject_unknown(model, {"type", "rho"})
        rho = model.get("rho")
        if rho is None:
            raise ConfigError("exponential model requires a rho list")
        rho = list(rho)
        if len(rho) == 0:
            raise ConfigError("rho list must be nonempty")
        rhos = [rho[i % len(rho)] for i in range(n)]
        return build_exponential(N, n, rhos)
    if kind == "file":
        _reject_unknown(model, {"type", "path"})
        path = model.get("path")
        if not path:
            raise ConfigError("file model requires a path")
        return from_matrices(load_omegas(path, N, n))
    raise ConfigError(f"unknown ensemble model type {kind!r}")


def _reject_unknown(mapping, allowed):
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown model config keys: {sorted(unknown)}")
