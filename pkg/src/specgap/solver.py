"""Fixed-point solvers for the deterministic-equivalent resolvent.

For a correlation ensemble {Omega_i} and spectral point z outside the
nonnegative real axis, the n scalars delta_i(z) solve

    delta_i = (1/n) tr Omega_i ( (1/n) sum_k Omega_k / (1 + delta_k) - z I )^{-1}

and define T(z), the deterministic equivalent of the resolvent of the
Gram matrix, and its normalized trace m(z).  The z = 0 system is solved
by the monotone interference-function construction along r_p = -1/p and
certified through the Jacobian spectral radius.

Columns with identical covariances share one unknown; all iterations run
on the collapsed group coordinates, which reproduces the full iteration
exactly while cutting the per-sweep cost from n to G traces.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .algebra import spectral_radius
from .errors import (
    ConvergenceError,
    DivergenceError,
    DomainError,
    InequalityViolation,
    InvalidSpectralPoint,
    JacobianIdentityError,
    SingularMatrixError,
)
from .model import CorrelationEnsemble

JACOBIAN_IDENTITY_TOL = 1e-8
RADIUS_SLACK = 1e-10


def validate_spectral_point(z) -> complex:
    """Reject z on [0, inf); the resolvent is defined on its complement."""
    z = complex(z)
    if not (cmath.isfinite(z)):
        raise InvalidSpectralPoint(f"z = {z} is not finite")
    if z.imag == 0.0 and z.real >= 0.0:
        raise InvalidSpectralPoint(
            f"z = {z} lies on the nonnegative real axis; need Im z != 0 or Re z < 0"
        )
    return z


@dataclass(frozen=True)
class FixedPointSolution:
    """Solved point: delta vector, deterministic-equivalent matrix and trace."""

    z: complex
    delta: np.ndarray  # length n, complex for complex z, real for z < 0
    T: np.ndarray  # N x N
    m: complex
    iterations: int
    residual: float


@dataclass(frozen=True)
class ZeroSolution:
    """Fixed point at z = 0 with its spectral-radius certificate."""

    ell: np.ndarray  # length n, strictly positive
    jacobian_radius: float
    radius_bound: float  # max(ell)/(1 + max(ell)), from the positive-system lemma
    p_sequence_used: list
    iterations: int
    residual: float


def _bulk_inverse(ensemble, weights, z):
    """Inverse of (1/n) sum_g mult_g w_g Omega_g - z I for group weights w."""
    A = np.tensordot(weights * ensemble.group_mult, ensemble.group_omegas, axes=1)
    A /= ensemble.n
    idx = np.arange(ensemble.N)
    A[idx, idx] -= z
    try:
        return np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"bulk matrix singular at z = {z}") from exc


def _group_traces(ensemble, inv):
    """(1/n) tr(Omega_g inv) for every group, via one flattened matvec."""
    return ensemble.group_omegas_flat @ np.ascontiguousarray(inv.T).ravel() / ensemble.n


def _phi_groups(ensemble, x_groups, z):
    out = _group_traces(ensemble, _bulk_inverse(ensemble, 1.0 / (1.0 + x_groups), z))
    if not np.iscomplexobj(x_groups) and not isinstance(z, complex):
        # real z <= 0 with Hermitian covariances: the traces are real
        out = out.real
    return out


def _iterate_groups(ensemble, x0_groups, z, tol, max_iter, damping, cap=None):
    """Damped Picard sweep on group coordinates until the update norm < tol."""
    if len(ensemble.group_mult) == 1:
        return _iterate_single_group(ensemble, x0_groups, z, tol, max_iter, damping, cap)
    x = np.array(x0_groups, copy=True)
    for it in range(1, max_iter + 1):
        fx = _phi_groups(ensemble, x, z)
        new = fx if damping == 1.0 else (1.0 - damping) * x + damping * fx
        residual = float(np.max(np.abs(new - x)))
        x = new
        if cap is not None and float(np.max(x.real)) > cap:
            raise DivergenceError(
                f"iterates exceeded cap {cap:.6g} at z = {z}; "
                "the ensemble likely violates the boundedness assumptions"
            )
        if residual < tol:
            return x, it, residual
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations at z = {z} "
        f"(last update {residual:.3e}, tol {tol:.0e})",
        residual=residual,
        iterations=max_iter,
    )


def _iterate_single_group(ensemble, x0_groups, z, tol, max_iter, damping, cap=None):
    # one distinct covariance: the bulk matrix diagonalizes in its eigenbasis,
    # so each sweep costs O(N) instead of a matrix inverse
    lam = ensemble.group_eigh[0][0]
    scale = ensemble.group_mult[0] / ensemble.n
    x = complex(x0_groups[0]) if np.iscomplexobj(x0_groups) or isinstance(z, complex) \
        else float(x0_groups[0].real)
    for it in range(1, max_iter + 1):
        fx = np.sum(lam / (scale / (1.0 + x) * lam - z)) / ensemble.n
        if not isinstance(x, complex):
            fx = fx.real
        new = fx if damping == 1.0 else (1.0 - damping) * x + damping * fx
        residual = abs(new - x)
        x = new
        if cap is not None and (x.real if isinstance(x, complex) else x) > cap:
            raise DivergenceError(
                f"iterates exceeded cap {cap:.6g} at z = {z}; "
                "the ensemble likely violates the boundedness assumptions"
            )
        if residual < tol:
            out = np.array([x])
            return out, it, float(residual)
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations at z = {z} "
        f"(last update {residual:.3e}, tol {tol:.0e})",
        residual=float(residual),
        iterations=max_iter,
    )


def _initial_groups(ensemble, x0, z):
    """Collapse a caller-supplied start onto group coordinates.

    Any start becomes group-constant after one full-resolution sweep, so a
    non-constant x0 costs a single pass over all n covariances.
    """
    G = len(ensemble.group_mult)
    dtype = complex if z.imag != 0.0 else float
    if x0 is None:
        return np.zeros(G, dtype=dtype)
    x0 = np.asarray(x0, dtype=dtype if np.iscomplexobj(x0) or dtype is complex else float)
    if x0.ndim == 0:
        return np.full(G, complex(x0) if dtype is complex else float(x0.real))
    if x0.shape != (ensemble.n,):
        raise DomainError(f"x0 must be a scalar or length-{ensemble.n} vector")
    if dtype is float:
        x0 = x0.real.astype(float)
    reduced = x0[_first_columns(ensemble)]
    if np.array_equal(ensemble.expand(reduced), x0):
        return reduced
    A = np.tensordot(1.0 / (1.0 + x0), ensemble.omegas, axes=1) / ensemble.n
    idx = np.arange(ensemble.N)
    A[idx, idx] -= z
    try:
        inv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"bulk matrix singular at z = {z}") from exc
    out = _group_traces(ensemble, inv)
    return out.real if dtype is float else out


def _first_columns(ensemble):
    G = len(ensemble.group_mult)
    first = np.full(G, -1, dtype=np.intp)
    for col, g in enumerate(ensemble.group_index):
        if first[g] < 0:
            first[g] = col
        if np.all(first >= 0):
            break
    return first


def phi(ensemble: CorrelationEnsemble, x, z: float) -> np.ndarray:
    """Interference map phi_i(x, z) for real z <= 0 and nonnegative x.

    Strictly positive and entrywise monotone in x.  Singularity of the bulk
    matrix (possible only at z = 0 with pathological inputs) is surfaced as
    SingularMatrixError, never regularized.
    """
    if z > 0:
        raise DomainError(f"phi requires z <= 0, got {z}")
    x = np.asarray(x, dtype=float)
    if x.shape != (ensemble.n,):
        raise DomainError(f"x must have length n = {ensemble.n}")
    if np.any(x < 0):
        raise DomainError("x must be entrywise nonnegative")
    A = np.tensordot(1.0 / (1.0 + x), ensemble.omegas, axes=1) / ensemble.n
    idx = np.arange(ensemble.N)
    A[idx, idx] -= z
    try:
        inv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"bulk matrix singular at z = {z}") from exc
    return ensemble.expand(_group_traces(ensemble, inv).real)


def solve_deltas(ensemble: CorrelationEnsemble, z, tol: float = 1e-12,
                 max_iter: int = 10000, damping: float | None = None,
                 x0=None) -> FixedPointSolution:
    """Solve the coupled delta system at z by damped Picard iteration.

    The default damping is 1 for real negative z (where the undamped map is
    monotone) and 0.5 off the real axis, where the map stiffens as Im z
    shrinks toward the support.  The solution does not depend on x0.
    """
    z = validate_spectral_point(z)
    if damping is None:
        damping = 1.0 if z.imag == 0.0 else 0.5
    if not 0.0 < damping <= 1.0:
        raise DomainError(f"damping must be in (0, 1], got {damping}")
    zz = z if z.imag != 0.0 else z.real
    x0g = _initial_groups(ensemble, x0, z)
    xg, iterations, residual = _iterate_groups(ensemble, x0g, zz, tol, max_iter, damping)
    inv = _bulk_inverse(ensemble, 1.0 / (1.0 + xg), zz)
    m = np.trace(inv) / ensemble.N
    return FixedPointSolution(
        z=z,
        delta=ensemble.expand(xg),
        T=inv,
        m=complex(m),
        iterations=iterations,
        residual=residual,
    )


def m_of_z(ensemble: CorrelationEnsemble, z, **kwargs) -> complex:
    """Normalized trace (1/N) tr T(z) of the deterministic equivalent."""
    return solve_deltas(ensemble, z, **kwargs).m


def solve_at_zero(ensemble: CorrelationEnsemble, tol: float = 1e-12,
                  max_iter: int = 10000, cap_factor: float = 10.0) -> ZeroSolution:
    """Fixed point ell of phi(., 0) via the monotone r_p = -1/p construction.

    Doubling p and warm-starting each stage keeps the iterates inside the
    monotone basin; once successive stage solutions differ by less than
    ``tol`` the system is polished at z = 0 directly.  Iterates beyond
    ``cap_factor * c/(1-c) * w_max/w_min`` raise DivergenceError, since
    finiteness is guaranteed under the model assumptions.
    """
    cap = cap_factor * ensemble.c / (1.0 - ensemble.c) * ensemble.w_max / ensemble.w_min
    x = np.zeros(len(ensemble.group_mult))
    p = 1
    p_used = []
    total_iters = 0
    prev = None
    while True:
        x, its, _ = _iterate_groups(ensemble, x, -1.0 / p, tol, max_iter, 1.0, cap=cap)
        total_iters += its
        p_used.append(p)
        if prev is not None and float(np.max(np.abs(x - prev))) < tol:
            break
        prev = x
        if p > 2**62:
            raise ConvergenceError(
                "r_p stages did not stabilize before p overflow", iterations=total_iters
            )
        p *= 2
    x, its, residual = _iterate_groups(ensemble, x, 0.0, tol, max_iter, 1.0, cap=cap)
    total_iters += its
    ell = ensemble.expand(x)
    _, rho, bound = jacobian_at_zero(ensemble, ell)
    return ZeroSolution(
        ell=ell,
        jacobian_radius=rho,
        radius_bound=bound,
        p_sequence_used=p_used,
        iterations=total_iters,
        residual=residual,
    )


def jacobian_at_zero(ensemble: CorrelationEnsemble, ell):
    """Jacobian of the z = 0 interference map at its fixed point.

    [J]_{i,m} = (1/n^2) tr( Omega_i A^{-1} Omega_m A^{-1} ) / (1 + ell_m)^2
    with A = (1/n) sum_k Omega_k / (1 + ell_k); both bulk factors carry the
    inverse, which is the only reading consistent with the linear identity
    J (1 + ell) = ell.  That identity is verified to 1e-8 in the inf-norm
    and doubles as the fixed-point precondition check (its left side equals
    phi(ell, 0)).  Returns (J, rho(J), max(ell)/(1 + max(ell))); the bound
    follows from the positive-system lemma applied to u = J u + 1.
    """
    ell = np.asarray(ell, dtype=float)
    if ell.shape != (ensemble.n,):
        raise DomainError(f"ell must have length n = {ensemble.n}")
    if np.any(ell <= 0):
        raise DomainError("ell must be strictly positive")
    n = ensemble.n
    A = np.tensordot(1.0 / (1.0 + ell), ensemble.omegas, axes=1) / n
    try:
        inv = np.linalg.inv(A)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("bulk matrix singular at z = 0") from exc
    prods = ensemble.group_omegas @ inv  # (G, N, N)
    G = len(prods)
    flat = prods.reshape(G, -1)
    flat_t = prods.transpose(0, 2, 1).reshape(G, -1)
    K = (flat @ flat_t.T).real  # K[g,h] = tr(Omega_g A^-1 Omega_h A^-1)
    gi = ensemble.group_index
    J = K[np.ix_(gi, gi)] / (n**2 * (1.0 + ell[None, :]) ** 2)
    u = 1.0 + ell
    identity_residual = float(np.max(np.abs(J @ u - ell)))
    if identity_residual > JACOBIAN_IDENTITY_TOL:
        raise JacobianIdentityError(
            f"J(1+ell) - ell deviates by {identity_residual:.3e} in the inf-norm; "
            "ell is not a fixed point or the assembly is wrong",
            residual=identity_residual,
        )
    rho = spectral_radius(J)
    ell_max = float(ell.max())
    bound = ell_max / (1.0 + ell_max)
    if rho >= 1.0 or rho > bound + RADIUS_SLACK:
        raise InequalityViolation(
            f"jacobian radius {rho:.12g} violates its certificate {bound:.12g}"
        )
    return J, rho, bound
