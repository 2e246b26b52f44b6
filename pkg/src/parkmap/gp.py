"""Exact Gaussian process regression on 1-D road positions.

Matern covariance with smoothness 5/2, zero prior mean, Cholesky-factorized
posterior, and a bounded log-marginal-likelihood search for hyperparameters.
Everything here is a pure function of its inputs; fitted models are immutable
and safe to share across threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

_SQRT5 = math.sqrt(5.0)
_LOG_2PI = math.log(2.0 * math.pi)

# Diagonal stabilization, as a fraction of the signal variance. Escalates by
# tens on factorization failure, then gives up.
JITTER_INITIAL_FACTOR = 1e-10
JITTER_MAX_FACTOR = 1e-4

# Hard cap on marginal-likelihood evaluations per optimizer call; the online
# loop refits every iteration and cannot afford an unbounded search.
LML_BUDGET = 50

# Log-space search bounds: lengthscale in meters (road scale), variances for a
# map whose codomain is [0, 1].
LOG_BOUNDS = np.log(
    np.array(
        [
            [1.0, 1e4],
            [1e-4, 10.0],
            [1e-6, 1.0],
        ]
    )
)


class FactorizationError(RuntimeError):
    """Covariance factorization failed even at the maximum jitter level."""


@dataclass(frozen=True)
class GpHyperparams:
    """Kernel lengthscale and amplitude, plus the observation noise variance."""

    lengthscale_m: float
    signal_variance: float
    noise_variance: float

    def __post_init__(self) -> None:
        for name in ("lengthscale_m", "signal_variance", "noise_variance"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    def as_log_array(self) -> np.ndarray:
        return np.log([self.lengthscale_m, self.signal_variance, self.noise_variance])

    @staticmethod
    def from_log_array(theta: np.ndarray) -> "GpHyperparams":
        ell, sf, sn = np.exp(theta)
        return GpHyperparams(float(ell), float(sf), float(sn))


@dataclass(frozen=True)
class GpModel:
    """Fitted state: training data plus the Cholesky factor and solved weights.

    ``chol`` is the lower factor of K + (noise_variance + jitter) I and
    ``alpha`` solves that matrix against the labels (zero prior mean).
    """

    hyper: GpHyperparams
    train_x: np.ndarray
    train_y: np.ndarray
    chol: np.ndarray
    alpha: np.ndarray
    jitter: float

    @property
    def n_train(self) -> int:
        return int(self.train_x.size)


@dataclass(frozen=True)
class PosteriorSummary:
    """Marginal posterior mean and latent (noise-free) variance per query."""

    mean: np.ndarray
    variance: np.ndarray


def matern_kernel(x: float, x2: float, hyper: GpHyperparams) -> float:
    """Matern-5/2 covariance between two positions; symmetric in its arguments."""
    if not (np.isfinite(x) and np.isfinite(x2)):
        raise ValueError("kernel inputs must be finite")
    s = _SQRT5 * abs(x - x2) / hyper.lengthscale_m
    return hyper.signal_variance * (1.0 + s + s * s / 3.0) * math.exp(-s)


def kernel_matrix(xs, xs2, hyper: GpHyperparams) -> np.ndarray:
    """Cross-covariance matrix with entry (i, j) = matern_kernel(xs[i], xs2[j])."""
    xs = np.asarray(xs, dtype=float).ravel()
    xs2 = np.asarray(xs2, dtype=float).ravel()
    if xs.size == 0 or xs2.size == 0:
        raise ValueError("kernel_matrix needs non-empty position lists")
    if not (np.all(np.isfinite(xs)) and np.all(np.isfinite(xs2))):
        raise ValueError("kernel inputs must be finite")
    s = _SQRT5 * np.abs(xs[:, None] - xs2[None, :]) / hyper.lengthscale_m
    return hyper.signal_variance * (1.0 + s + s * s / 3.0) * np.exp(-s)


def _factorize(K: np.ndarray, hyper: GpHyperparams) -> tuple[np.ndarray, float]:
    n = K.shape[0]
    A = K + hyper.noise_variance * np.eye(n)
    jitter = JITTER_INITIAL_FACTOR * hyper.signal_variance
    limit = JITTER_MAX_FACTOR * hyper.signal_variance
    while True:
        try:
            return np.linalg.cholesky(A + jitter * np.eye(n)), jitter
        except np.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > limit * (1.0 + 1e-12):
                raise FactorizationError(
                    f"Cholesky failed for n={n} even at jitter={limit:g} "
                    f"(lengthscale={hyper.lengthscale_m:g}, "
                    f"signal={hyper.signal_variance:g}, noise={hyper.noise_variance:g})"
                ) from None


def fit(x, y, hyper: GpHyperparams) -> GpModel:
    """Factorize the noisy training covariance and solve for the weights.

    An empty dataset yields a prior-only model whose posterior is the prior
    everywhere.
    """
    x = np.array(x, dtype=float).ravel()
    y = np.array(y, dtype=float).ravel()
    if x.size != y.size:
        raise ValueError("positions and labels must have equal length")
    if x.size == 0:
        return GpModel(hyper, x, y, np.zeros((0, 0)), np.zeros(0), 0.0)
    K = kernel_matrix(x, x, hyper)
    chol, jitter = _factorize(K, hyper)
    alpha = solve_triangular(chol, y, lower=True)
    alpha = solve_triangular(chol.T, alpha, lower=False)
    for arr in (x, y, chol, alpha):
        arr.setflags(write=False)
    return GpModel(hyper, x, y, chol, alpha, jitter)


def posterior(model: GpModel, queries) -> PosteriorSummary:
    """Posterior mean and variance at the query positions.

    The variance is the latent one (observation noise not added) and is
    clipped at zero against round-off.
    """
    q = np.asarray(queries, dtype=float).ravel()
    if q.size == 0:
        raise ValueError("queries must be non-empty")
    sf = model.hyper.signal_variance
    if model.n_train == 0:
        return PosteriorSummary(np.zeros(q.size), np.full(q.size, sf))
    if model.chol.shape != (model.n_train, model.n_train) or model.alpha.size != model.n_train:
        raise RuntimeError("model factor state inconsistent with its training data")
    ks = kernel_matrix(q, model.train_x, model.hyper)
    mean = ks @ model.alpha
    v = solve_triangular(model.chol, ks.T, lower=True)
    variance = np.maximum(sf - np.einsum("ij,ij->j", v, v), 0.0)
    return PosteriorSummary(mean, variance)


def log_marginal_likelihood(x, y, hyper: GpHyperparams) -> float:
    """Log evidence of the labels under the noisy zero-mean prior.

    Shares the factorization path with fit: the quadratic term reuses alpha
    and the determinant comes off the factor's diagonal.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("log marginal likelihood needs at least one datapoint")
    model = fit(x, y, hyper)
    quad = float(y @ model.alpha)
    logdet = 2.0 * float(np.sum(np.log(np.diag(model.chol))))
    return -0.5 * (quad + logdet + x.size * _LOG_2PI)


def optimize_hyperparameters(
    x, y, init: GpHyperparams, budget: int = LML_BUDGET
) -> GpHyperparams:
    """Bounded compass search in log-parameter space; deterministic.

    Starts from ``init`` plus two lengthscale-shifted variants, then walks one
    log-coordinate at a time with a shrinking step, accepting only strict
    improvements. Never returns a point scoring below the (in-bounds) init.
    If every candidate evaluates non-finite the init is returned with a
    warning.
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("hyperparameter search needs a non-empty dataset")
    lo, hi = LOG_BOUNDS[:, 0], LOG_BOUNDS[:, 1]
    evals = 0

    def score(theta: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        try:
            value = log_marginal_likelihood(x, y, GpHyperparams.from_log_array(theta))
        except FactorizationError:
            return -np.inf
        return value if np.isfinite(value) else -np.inf

    best_theta = np.clip(init.as_log_array(), lo, hi)
    best = score(best_theta)
    for shift in (1.0, -1.0):
        if evals >= budget:
            break
        cand = np.clip(best_theta + np.array([shift, 0.0, 0.0]), lo, hi)
        if np.array_equal(cand, best_theta):
            continue
        v = score(cand)
        if v > best:
            best, best_theta = v, cand

    step = 0.5
    while evals < budget and step >= 0.01:
        moved = False
        for i in range(3):
            for sign in (1.0, -1.0):
                if evals >= budget:
                    break
                cand = best_theta.copy()
                cand[i] = float(np.clip(cand[i] + sign * step, lo[i], hi[i]))
                if cand[i] == best_theta[i]:
                    continue
                v = score(cand)
                if v > best:
                    best, best_theta, moved = v, cand, True
                    break
        if not moved:
            step *= 0.5

    if not np.isfinite(best):
        warnings.warn(
            "all hyperparameter candidates scored non-finite; keeping the init",
            RuntimeWarning,
        )
        return init
    return GpHyperparams.from_log_array(best_theta)
