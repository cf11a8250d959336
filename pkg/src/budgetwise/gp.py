"""Gaussian-process regression over the (c, s) allocation lattice.

The prior mean grows logarithmically in each annotation count and the
covariance is a product of two RBF kernels with separate length scales.
Hyperparameters are fitted by full-batch gradient ascent on the log
marginal likelihood, with positive parameters handled in log-space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .strategy import Strategy

# Hard floor added to the Gram diagonal regardless of the learned noise;
# keeps noiseless duplicate observations from making the matrix singular.
JITTER_FLOOR = 1e-8

_JITTER_LADDER = (0.0, 1e-8, 1e-6, 1e-4)

_FIELD_NAMES = ("gamma_c", "beta_c", "gamma_s", "beta_s", "ell_c", "ell_s", "sigma", "noise")


@dataclass(frozen=True)
class GPHyperparams:
    gamma_c: float
    beta_c: float
    gamma_s: float
    beta_s: float
    ell_c: float
    ell_s: float
    sigma: float
    noise: float

    def __post_init__(self) -> None:
        for name in ("beta_c", "beta_s", "ell_c", "ell_s", "sigma"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.noise < 0:
            raise ValueError(f"noise must be non-negative, got {self.noise}")

    def to_dict(self) -> dict[str, float]:
        return {name: float(getattr(self, name)) for name in _FIELD_NAMES}

    @classmethod
    def from_dict(cls, data: dict[str, float]) -> "GPHyperparams":
        return cls(**{name: float(data[name]) for name in _FIELD_NAMES})


@dataclass(frozen=True)
class UtilitySample:
    """A (strategy, observed score) pair used as a GP training datum."""

    strategy: Strategy
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score}")


def mean_prior(h: GPHyperparams, x: Strategy) -> float:
    """Prior mean gamma_c*log(beta_c*c + 1) + gamma_s*log(beta_s*s + 1)."""
    return h.gamma_c * math.log(h.beta_c * x.c + 1.0) + h.gamma_s * math.log(h.beta_s * x.s + 1.0)


def kernel(h: GPHyperparams, x1: Strategy, x2: Strategy) -> float:
    """Product-RBF covariance with per-axis length scales and amplitude sigma."""
    dc = (x1.c - x2.c) / h.ell_c
    ds = (x1.s - x2.s) / h.ell_s
    return h.sigma**2 * math.exp(-0.5 * (dc * dc + ds * ds))


def _mean_vec(h: GPHyperparams, c: np.ndarray, s: np.ndarray) -> np.ndarray:
    return h.gamma_c * np.log(h.beta_c * c + 1.0) + h.gamma_s * np.log(h.beta_s * s + 1.0)


def _corr_matrix(
    h: GPHyperparams, c1: np.ndarray, s1: np.ndarray, c2: np.ndarray, s2: np.ndarray
) -> np.ndarray:
    """Unit-amplitude correlation matrix between two point sets."""
    dc = (c1[:, None] - c2[None, :]) / h.ell_c
    ds = (s1[:, None] - s2[None, :]) / h.ell_s
    return np.exp(-0.5 * (dc * dc + ds * ds))


class GPFitError(RuntimeError):
    """Raised when the Gram matrix cannot be decomposed even after jitter."""


@dataclass(frozen=True)
class FittedGP:
    hyperparams: GPHyperparams
    training_samples: tuple[UtilitySample, ...]
    # Cached decomposition state.
    _chol: np.ndarray
    _alpha: np.ndarray
    _c: np.ndarray
    _s: np.ndarray
    _jitter: float


def _factorize(h: GPHyperparams, c: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, float]:
    """Cholesky factor of the Gram matrix, escalating jitter as needed."""
    base = h.sigma**2 * _corr_matrix(h, c, s, c, s)
    diag = h.noise + JITTER_FLOOR
    for jitter in _JITTER_LADDER:
        try:
            chol, _ = cho_factor(base + (diag + jitter) * np.eye(len(c)), lower=True)
            return np.tril(chol), jitter
        except np.linalg.LinAlgError:
            continue
    raise GPFitError(
        f"Gram matrix of {len(c)} samples is not positive definite even with "
        f"jitter up to {_JITTER_LADDER[-1]}"
    )


def _log_marginal_and_grad(
    u: np.ndarray, c: np.ndarray, s: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """Log marginal likelihood and its gradient in internal coordinates.

    Internal parameter vector u is
    [gamma_c, gamma_s, log beta_c, log beta_s, log ell_c, log ell_s,
     log sigma, log noise].
    """
    h = _unpack(u)
    n = len(c)
    corr = _corr_matrix(h, c, s, c, s)
    kf = h.sigma**2 * corr
    gram = kf + (h.noise + JITTER_FLOOR) * np.eye(n)
    try:
        chol, _ = cho_factor(gram, lower=True)
    except np.linalg.LinAlgError:
        chol, jitter = _factorize(h, c, s)
        gram = gram + jitter * np.eye(n)
    chol = np.tril(chol)
    r = y - _mean_vec(h, c, s)
    alpha = cho_solve((chol, True), r)
    lml = -0.5 * float(r @ alpha) - float(np.log(np.diag(chol)).sum()) - 0.5 * n * math.log(2 * math.pi)

    kinv = cho_solve((chol, True), np.eye(n))
    outer = np.outer(alpha, alpha) - kinv

    log_c = np.log(h.beta_c * c + 1.0)
    log_s = np.log(h.beta_s * s + 1.0)
    grad = np.empty(8)
    grad[0] = float(alpha @ log_c)                                   # gamma_c
    grad[1] = float(alpha @ log_s)                                   # gamma_s
    grad[2] = float(alpha @ (h.gamma_c * c / (h.beta_c * c + 1.0))) * h.beta_c   # log beta_c
    grad[3] = float(alpha @ (h.gamma_s * s / (h.beta_s * s + 1.0))) * h.beta_s   # log beta_s
    dc2 = ((c[:, None] - c[None, :]) / h.ell_c) ** 2
    ds2 = ((s[:, None] - s[None, :]) / h.ell_s) ** 2
    grad[4] = 0.5 * float(np.sum(outer * (kf * dc2)))                # log ell_c
    grad[5] = 0.5 * float(np.sum(outer * (kf * ds2)))                # log ell_s
    grad[6] = float(np.sum(outer * kf))                              # log sigma
    grad[7] = 0.5 * float(np.trace(outer)) * h.noise                 # log noise
    return lml, grad


def _pack(h: GPHyperparams) -> np.ndarray:
    noise = max(h.noise, 1e-12)  # log-space representation needs noise > 0
    return np.array(
        [
            h.gamma_c,
            h.gamma_s,
            math.log(h.beta_c),
            math.log(h.beta_s),
            math.log(h.ell_c),
            math.log(h.ell_s),
            math.log(h.sigma),
            math.log(noise),
        ]
    )


def _unpack(u: np.ndarray) -> GPHyperparams:
    return GPHyperparams(
        gamma_c=float(u[0]),
        gamma_s=float(u[1]),
        beta_c=float(np.exp(u[2])),
        beta_s=float(np.exp(u[3])),
        ell_c=float(np.exp(u[4])),
        ell_s=float(np.exp(u[5])),
        sigma=float(np.exp(u[6])),
        noise=float(np.exp(u[7])),
    )


def initial_hyperparams(samples: list[UtilitySample]) -> GPHyperparams:
    """Scale-aware default initialization from the observed samples."""
    c = np.array([s.strategy.c for s in samples], dtype=float)
    s_ = np.array([s.strategy.s for s in samples], dtype=float)
    y = np.array([s.score for s in samples], dtype=float)
    ell_c = max(float(c.max() - c.min()) / 4.0, 1.0)
    ell_s = max(float(s_.max() - s_.min()) / 4.0, 1.0)
    sigma = max(float(np.std(y)), 1e-3)
    return GPHyperparams(
        gamma_c=0.1,
        beta_c=0.01,
        gamma_s=0.1,
        beta_s=0.01,
        ell_c=ell_c,
        ell_s=ell_s,
        sigma=sigma,
        noise=1e-4,
    )


def fit(
    samples: list[UtilitySample],
    init: GPHyperparams,
    learning_rate: float = 0.1,
    iterations: int = 200,
    seed: int = 0,
) -> FittedGP:
    """Fit hyperparameters by gradient ascent on the log marginal likelihood.

    Positive parameters are optimized in log-space. The optimizer is
    deterministic; `seed` is accepted for interface stability but the
    ascent itself draws no random numbers.

    Raises:
        ValueError: with fewer than 2 samples.
        GPFitError: if the Gram matrix resists decomposition at every
            jitter level.
    """
    if len(samples) < 2:
        raise ValueError(f"fit requires at least 2 samples, got {len(samples)}")
    c = np.array([s.strategy.c for s in samples], dtype=float)
    s_ = np.array([s.strategy.s for s in samples], dtype=float)
    y = np.array([s.score for s in samples], dtype=float)

    u = _pack(init)
    # Adam keeps the step size near `learning_rate` regardless of the raw
    # gradient scale; plain ascent diverges at the default rate.
    m = np.zeros_like(u)
    v = np.zeros_like(u)
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    for k in range(1, iterations + 1):
        _, grad = _log_marginal_and_grad(u, c, s_, y)
        m = beta1 * m + (1 - beta1) * grad
        v = beta2 * v + (1 - beta2) * grad * grad
        m_hat = m / (1 - beta1**k)
        v_hat = v / (1 - beta2**k)
        u = u + learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        # Keep log-space parameters in a sane range to avoid overflow.
        u[2:] = np.clip(u[2:], -25.0, 25.0)

    h = _unpack(u)
    chol, jitter = _factorize(h, c, s_)
    r = y - _mean_vec(h, c, s_)
    alpha = cho_solve((chol, True), r)
    return FittedGP(
        hyperparams=h,
        training_samples=tuple(samples),
        _chol=chol,
        _alpha=alpha,
        _c=c,
        _s=s_,
        _jitter=jitter,
    )


def log_marginal_likelihood(h: GPHyperparams, samples: list[UtilitySample]) -> float:
    c = np.array([s.strategy.c for s in samples], dtype=float)
    s_ = np.array([s.strategy.s for s in samples], dtype=float)
    y = np.array([s.score for s in samples], dtype=float)
    lml, _ = _log_marginal_and_grad(_pack(h), c, s_, y)
    return lml


def posterior(gp: FittedGP, query: Strategy) -> tuple[float, float]:
    """Posterior (mean, variance) at a single strategy."""
    means, variances = posterior_grid(gp, [query])
    return means[0], variances[0]


def posterior_grid(gp: FittedGP, strategies: list[Strategy]) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and variances for a batch of strategies.

    Reuses the cached Cholesky factor; elementwise identical to repeated
    posterior() calls.
    """
    h = gp.hyperparams
    qc = np.array([q.c for q in strategies], dtype=float)
    qs = np.array([q.s for q in strategies], dtype=float)
    kstar = h.sigma**2 * _corr_matrix(h, qc, qs, gp._c, gp._s)  # (m, n)
    means = _mean_vec(h, qc, qs) + kstar @ gp._alpha
    v = solve_triangular(gp._chol, kstar.T, lower=True)  # (n, m)
    variances = np.maximum(h.sigma**2 - np.sum(v * v, axis=0), 0.0)
    return means, variances
