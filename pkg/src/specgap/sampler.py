"""Monte Carlo side: draw correlated Gaussian matrices and check the theory.

Randomness is counter-based: every column of every draw gets its own
Philox stream keyed by (seed, column), and per-trial seeds are derived
from (seed0, trial), so batches are bit-reproducible regardless of
evaluation order or thread count.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    InequalityViolation,
    SignalBelowNoise,
)
from .model import CorrelationEnsemble
from .solver import m_of_z, validate_spectral_point

_MASK64 = (1 << 64) - 1
EIG_CLAMP = -1e-10


@dataclass(frozen=True)
class TrialBatch:
    """Eigenvalue sets of (1/n) Sigma Sigma* across reproducible trials."""

    ensemble_id: str
    seeds: np.ndarray  # uint64, one per trial
    eigenvalue_sets: np.ndarray  # (trials, N), each row ascending
    lambda_min: np.ndarray  # (trials,)
    test_interval: tuple | None = None
    counts_in_interval: np.ndarray | None = None


@dataclass(frozen=True)
class ScalingReport:
    """Per-size measurements with their log-log least-squares fit."""

    Ns: list
    values: list
    stderrs: list
    slope: float
    intercept: float


@dataclass(frozen=True)
class VarianceCheck:
    """Measured trace-functional variance against the proven bound.

    For real negative z the |Im z| in the bound is replaced by the distance
    to the nonnegative axis; ``distance_proxy_used`` records that.
    """

    measured_var: float
    bound: float
    z: complex
    imag_distance: float
    distance_proxy_used: bool

    def __iter__(self):  # unpacks as (measured_var, bound)
        return iter((self.measured_var, self.bound))


def _column_generator(seed: int, col: int) -> np.random.Generator:
    key = np.array([seed & _MASK64, col & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def trial_seeds(seed0: int, trials: int) -> np.ndarray:
    """Derive one 64-bit seed per trial from the top-level seed."""
    out = np.empty(trials, dtype=np.uint64)
    for t in range(trials):
        ss = np.random.SeedSequence(entropy=(seed0 & _MASK64, t))
        out[t] = ss.generate_state(1, np.uint64)[0]
    return out


def sample_matrix(ensemble: CorrelationEnsemble, seed: int) -> np.ndarray:
    """One N x n draw: column i is Theta_i g_i, g_i circular standard Gaussian.

    Real and imaginary parts each carry variance 1/2, so E[g g*] = I and
    E[g g^T] = 0.  Deterministic in (ensemble, seed).
    """
    N, n = ensemble.N, ensemble.n
    g = np.empty((N, n), dtype=complex)
    for i in range(n):
        rn = _column_generator(int(seed), i).standard_normal(2 * N)
        g[:, i] = rn[:N] + 1j * rn[N:]
    g *= np.sqrt(0.5)
    sigma = np.empty((N, n), dtype=complex)
    for theta, cols in zip(ensemble.group_thetas, ensemble.group_columns):
        sigma[:, cols] = theta @ g[:, cols]
    return sigma


def gram_eigenvalues(sigma: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of (1/n) sigma sigma*.

    Checks the trace identity sum(lambda) = ||sigma||_F^2 / n to 1e-8
    relative; jitter in (-1e-10, 0) is clamped to zero, anything lower is
    surfaced as a solver failure.
    """
    sigma = np.asarray(sigma)
    N, n = sigma.shape
    if N > n:
        raise DimensionError(f"need N <= n, got {N} x {n}")
    gram = sigma @ sigma.conj().T / n
    evals = np.linalg.eigvalsh(gram)
    total = float(evals.sum())
    fro = float((np.abs(sigma) ** 2).sum()) / n
    if abs(total - fro) > 1e-8 * max(1.0, fro):
        raise InequalityViolation(
            f"eigenvalue sum {total:.12g} violates the Frobenius identity {fro:.12g}"
        )
    if evals[0] < EIG_CLAMP:
        raise InequalityViolation(
            f"Gram eigenvalue {evals[0]:.3e} below the PSD clamp {EIG_CLAMP:.0e}"
        )
    return np.clip(evals, 0.0, None)


def _run_trials(ensemble, seeds, worker, workers=1):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(worker, seeds))
    return [worker(s) for s in seeds]


def monte_carlo_gap(ensemble: CorrelationEnsemble, trials: int, seed0: int,
                    test_interval=None, workers: int = 1):
    """Independent spectrum draws with per-trial smallest eigenvalues.

    Returns (TrialBatch, min over trials of lambda_min).  When a test
    interval [a, b] is given, the batch also counts eigenvalues landing in
    it per trial (zero expected when [a, b] sits inside a spectral gap).
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    if test_interval is not None:
        a, b = float(test_interval[0]), float(test_interval[1])
        if not a <= b:
            raise DomainError(f"test interval must satisfy a <= b, got [{a}, {b}]")
        test_interval = (a, b)
    seeds = trial_seeds(seed0, trials)

    def one(seed):
        return gram_eigenvalues(sample_matrix(ensemble, int(seed)))

    eigs = np.array(_run_trials(ensemble, seeds, one, workers))
    lam_min = eigs[:, 0].copy()
    counts = None
    if test_interval is not None:
        a, b = test_interval
        counts = ((eigs >= a) & (eigs <= b)).sum(axis=1)
    batch = TrialBatch(
        ensemble_id=ensemble.ensemble_id,
        seeds=seeds,
        eigenvalue_sets=eigs,
        lambda_min=lam_min,
        test_interval=test_interval,
        counts_in_interval=counts,
    )
    return batch, float(lam_min.min())


def resolvent_trace_samples(ensemble: CorrelationEnsemble, z, trials: int,
                            seed0: int, workers: int = 1) -> np.ndarray:
    """(1/N) tr Q(z) across trials, from the Gram eigenvalues."""
    z = validate_spectral_point(z)
    seeds = trial_seeds(seed0, trials)

    def one(seed):
        evals = gram_eigenvalues(sample_matrix(ensemble, int(seed)))
        return np.sum(1.0 / (evals - z)) / ensemble.N

    return np.array(_run_trials(ensemble, seeds, one, workers))


def bias_scaling(ensemble_family, z, trials: int, seed0: int = 0,
                 workers: int = 1) -> ScalingReport:
    """Measure |E (1/N) tr Q(z) - m(z)| across sizes and fit its log-log slope.

    The family must hold the aspect ratio fixed; per-trial seeds are shared
    across sizes so draws reuse common random numbers as far as the shapes
    allow.  If any size's bias estimate is below three standard errors the
    experiment is inconclusive and raises SignalBelowNoise.
    """
    family = list(ensemble_family)
    if len(family) < 3:
        raise DomainError(f"need at least 3 sizes for a rate fit, got {len(family)}")
    Ns = [ens.N for ens in family]
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise DomainError(f"sizes must be strictly increasing, got {Ns}")
    cs = [ens.c for ens in family]
    if max(cs) - min(cs) > 1e-12:
        raise DomainError(f"family must share one aspect ratio, got {cs}")
    z = validate_spectral_point(z)
    values = []
    stderrs = []
    for ens in family:
        samples = resolvent_trace_samples(ens, z, trials, seed0, workers)
        m_ref = m_of_z(ens, z)
        mean = samples.mean()
        bias = abs(mean - m_ref)
        spread = float(np.mean(np.abs(samples - mean) ** 2))
        se = np.sqrt(spread / (len(samples) - 1))
        if bias < 3.0 * se:
            raise SignalBelowNoise(
                f"at N = {ens.N} the bias {bias:.3e} is below 3 standard errors "
                f"({3 * se:.3e}); increase trials"
            )
        values.append(float(bias))
        stderrs.append(float(se))
    slope, intercept = np.polyfit(np.log(Ns), np.log(values), 1)
    return ScalingReport(Ns=Ns, values=values, stderrs=stderrs,
                         slope=float(slope), intercept=float(intercept))


def variance_scaling(ensemble: CorrelationEnsemble, A, z, trials: int,
                     seed0: int = 0, workers: int = 1) -> VarianceCheck:
    """Sample variance of (1/n) tr A Q(z) against the proven O(1/n^2) bound.

    The bound is (2 w_max / n^2) ||A||^2 (|z| + 1)(d^-4 + d^-3) with d the
    distance from z to the nonnegative axis (equal to |Im z| off the real
    axis).  The measured value must stay below it.
    """
    z = validate_spectral_point(z)
    A = np.asarray(A)
    if A.shape != (ensemble.N, ensemble.N):
        raise DimensionError(f"A must be {ensemble.N} x {ensemble.N}, got {A.shape}")
    scale = float(np.abs(A).max()) if A.size else 0.0
    if scale and float(np.abs(A - A.conj().T).max()) > 1e-10 * scale:
        raise DomainError("A must be Hermitian")
    seeds = trial_seeds(seed0, trials)
    n = ensemble.n
    eye = np.eye(ensemble.N)

    def one(seed):
        sigma = sample_matrix(ensemble, int(seed))
        gram = sigma @ sigma.conj().T / n
        Q = np.linalg.inv(gram - z * eye)
        return np.trace(A @ Q) / n

    samples = np.array(_run_trials(ensemble, seeds, one, workers))
    mean = samples.mean()
    measured = float(np.sum(np.abs(samples - mean) ** 2) / max(len(samples) - 1, 1))
    proxy = z.imag == 0.0
    dist = abs(z.real) if proxy else abs(z.imag)
    norm_a = float(np.linalg.norm(A, 2)) if A.size else 0.0
    bound = (2.0 * ensemble.w_max / n**2 * norm_a**2 * (abs(z) + 1.0)
             * (dist**-4 + dist**-3))
    if measured > bound:
        raise InequalityViolation(
            f"measured variance {measured:.3e} exceeds the bound {bound:.3e}"
        )
    return VarianceCheck(measured_var=measured, bound=bound, z=z,
                         imag_distance=dist, distance_proxy_used=proxy)


# -- plain-text interfaces ---------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_trials_csv(batch: TrialBatch, path) -> None:
    counts = batch.counts_in_interval
    with open(path, "w") as fh:
        fh.write("trial,seed,lambda_min,count_in_test_interval\n")
        for t in range(len(batch.seeds)):
            cnt = "" if counts is None else str(int(counts[t]))
            fh.write(f"{t},{int(batch.seeds[t])},{_fmt(batch.lambda_min[t])},{cnt}\n")


def write_eigenvalues_txt(batch: TrialBatch, path) -> None:
    """Raw eigenvalues, one trial per line."""
    with open(path, "w") as fh:
        for row in batch.eigenvalue_sets:
            fh.write(" ".join(_fmt(v) for v in row) + "\n")


def batch_summary(batch: TrialBatch) -> dict:
    lam = batch.lambda_min
    qs = np.quantile(lam, [0.05, 0.25, 0.5, 0.75, 0.95])
    out = {
        "trials": int(len(batch.seeds)),
        "ensemble_id": batch.ensemble_id,
        "lambda_min": {
            "min": float(lam.min()),
            "mean": float(lam.mean()),
            "quantiles": {p: float(v) for p, v in zip(["p05", "p25", "p50", "p75", "p95"], qs)},
        },
    }
    if batch.counts_in_interval is not None:
        out["test_interval"] = list(batch.test_interval)
        out["violations_in_interval"] = int(batch.counts_in_interval.sum())
    return out


def write_batch_summary_json(batch: TrialBatch, path) -> None:
    with open(path, "w") as fh:
        json.dump(batch_summary(batch), fh, indent=2, sort_keys=True)
        fh.write("\n")
