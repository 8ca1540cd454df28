"""Exact GP regression and Laplace-approximated GPs on strings."""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, solve_triangular

from .errors import CholeskyFailure
from .kernel import FeatureCache, KernelConfig, SpectrumIndex, kernel_diag
from .likelihoods import Bernoulli, Gaussian, Poisson

log = logging.getLogger(__name__)

_LOG2PI = np.log(2.0 * np.pi)


def cholesky(a, what="matrix"):
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise CholeskyFailure(f"{what} is not positive definite") from exc


@dataclass
class GaussianPosterior:
    """Marginal (and optionally joint) Gaussian over latent test values."""

    mean: np.ndarray
    var: np.ndarray
    cov: np.ndarray = None

    def __len__(self):
        return len(self.mean)


@dataclass
class LaplaceState:
    f_hat: np.ndarray
    W: np.ndarray
    log_evidence: float
    iterations: int
    converged: bool
    grad: np.ndarray = None  # d log p(y|f) / df at the mode
    grad_norm: float = np.inf


@dataclass
class FullGPModel:
    train: object
    kernel_cfg: KernelConfig
    likelihood: object
    chol: np.ndarray
    alpha: np.ndarray = None
    laplace: LaplaceState = None
    cache: FeatureCache = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.cache is None:
            self.cache = FeatureCache(self.kernel_cfg)
        self._index = None

    @property
    def index(self):
        if self._index is None:
            self._index = SpectrumIndex(self.train.inputs, self.kernel_cfg, self.cache)
        return self._index

    def cross(self, test):
        return self.index.cross(test)

    def prior_diag(self, test):
        return kernel_diag(test, self.kernel_cfg, self.cache)


def fit_full_gaussian(data, kcfg, noise_variance, cache=None, K=None):
    """Cholesky-factor ``K + noise * I`` and solve for the weight vector."""
    if not noise_variance > 0:
        raise ValueError("noise variance must be positive")
    lik = Gaussian(noise_variance)
    y = lik.check_targets(data.targets)
    model = FullGPModel(data, kcfg, lik, chol=None, cache=cache)
    if K is None:
        K = model.index.self_gram()
    n = data.n
    L = cholesky(K + noise_variance * np.eye(n), "K + noise*I")
    model.chol = L
    model.alpha = cho_solve((L, True), y) if n else np.zeros(0)
    return model


def predict_full(model, test, full_cov=False):
    """Posterior over latent values at ``test``.

    For Laplace-fitted models this dispatches to :func:`predict_latent_full`.
    """
    if model.laplace is not None:
        return predict_latent_full(model, test, full_cov)
    test = list(test)
    Ks = model.cross(test)
    mean = Ks @ model.alpha if model.train.n else np.zeros(len(test))
    V = solve_triangular(model.chol, Ks.T, lower=True) if model.train.n else np.zeros((0, len(test)))
    if full_cov:
        Kss = SpectrumIndex(test, model.kernel_cfg, model.cache).self_gram()
        cov = Kss - V.T @ V
        cov = 0.5 * (cov + cov.T)
        return GaussianPosterior(mean, np.diag(cov).copy(), cov)
    var = model.prior_diag(test) - np.sum(V * V, axis=0)
    return GaussianPosterior(mean, var)


def log_marginal_gaussian(model):
    y = np.asarray(model.train.targets, dtype=float)
    n = len(y)
    return float(-0.5 * y @ model.alpha - np.sum(np.log(np.diag(model.chol))) - 0.5 * n * _LOG2PI)


def _newton_full(K, y, lik, max_iter=100, tol=1e-6, max_halvings=20):
    """Mode of log p(y|f) - f'K^{-1}f/2 with f = K a, damped by step halving."""
    n = len(y)
    a = np.zeros(n)
    f = np.zeros(n)

    def objective(a_, f_):
        return float(np.sum(lik.log_prob(y, f_)) - 0.5 * a_ @ f_)

    psi = objective(a, f)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        _, d1, d2 = lik.terms(y, f)
        grad = d1 - a
        gnorm = np.max(np.abs(grad)) if n else 0.0
        # run past the contract tolerance; Newton is quadratic near the mode
        if gnorm < tol * 1e-3:
            converged = True
            break
        W = -d2
        sW = np.sqrt(W)
        L = cholesky(np.eye(n) + sW[:, None] * K * sW[None, :], "I + W^1/2 K W^1/2")
        b = W * f + d1
        c = solve_triangular(L, sW * (K @ b), lower=True)
        a_new = b - sW * solve_triangular(L.T, c, lower=False)
        step = a_new - a
        t = 1.0
        for _ in range(max_halvings + 1):
            a_try = a + t * step
            f_try = K @ a_try
            psi_try = objective(a_try, f_try)
            # tolerate rounding noise near the mode, where the gain of a
            # Newton step drops below the precision of psi
            if psi_try >= psi - 1e-12 * (1.0 + abs(psi)):
                break
            t *= 0.5
        else:
            converged = gnorm < tol
            break
        a, f, psi = a_try, f_try, psi_try
    _, d1, d2 = lik.terms(y, f)
    gnorm = float(np.max(np.abs(d1 - a))) if n else 0.0
    converged = gnorm < tol
    return a, f, psi, it, converged, gnorm


def laplace_fit_full(data, kcfg, lik, cache=None, K=None, max_iter=100, tol=1e-6):
    """Fit a full GP under a non-Gaussian likelihood by the Laplace method.

    Returns a :class:`FullGPModel` whose ``laplace`` attribute carries the
    mode, curvature and approximate log evidence.
    """
    if lik.gaussian:
        raise ValueError("use fit_full_gaussian for the Gaussian likelihood")
    y = lik.check_targets(data.targets)
    model = FullGPModel(data, kcfg, lik, chol=None, cache=cache)
    if K is None:
        K = model.index.self_gram()
    a, f, psi, it, converged, gnorm = _newton_full(K, y, lik, max_iter, tol)
    _, d1, d2 = lik.terms(y, f)
    W = -d2
    sW = np.sqrt(W)
    n = data.n
    L = cholesky(np.eye(n) + sW[:, None] * K * sW[None, :], "I + W^1/2 K W^1/2")
    log_ev = psi - float(np.sum(np.log(np.diag(L))))
    if not converged:
        log.warning("Laplace mode search stopped after %d iterations, |grad|=%.3g", it, gnorm)
    model.chol = L
    model.alpha = d1
    model.laplace = LaplaceState(f, W, log_ev, it, converged, d1, gnorm)
    return model


def fit_full(data, kcfg, lik, cache=None, K=None):
    if lik.gaussian:
        return fit_full_gaussian(data, kcfg, lik.noise_variance, cache, K)
    return laplace_fit_full(data, kcfg, lik, cache, K)


def log_evidence(model):
    if model.laplace is not None:
        return model.laplace.log_evidence
    return log_marginal_gaussian(model)


def predict_latent_full(model, test, full_cov=False):
    """Laplace predictive over latent values at ``test``."""
    state = model.laplace
    test = list(test)
    Ks = model.cross(test)
    mean = Ks @ state.grad
    sW = np.sqrt(state.W)
    V = solve_triangular(model.chol, sW[:, None] * Ks.T, lower=True)
    if full_cov:
        Kss = SpectrumIndex(test, model.kernel_cfg, model.cache).self_gram()
        cov = Kss - V.T @ V
        cov = 0.5 * (cov + cov.T)
        return GaussianPosterior(mean, np.diag(cov).copy(), cov)
    var = model.prior_diag(test) - np.sum(V * V, axis=0)
    return GaussianPosterior(mean, var)


def class_probability(post):
    """P(y* = 1) = E[sigmoid(f*)] under each Gaussian marginal."""
    return Bernoulli().predict_proba(post.mean, post.var)


def poisson_rate(post):
    return Poisson.rate_mean(post.mean, post.var)


def noise_grid(low=1e-4, high=1e1, num=10):
    return np.logspace(np.log10(low), np.log10(high), num)


def grid_search_full(data, lik_kind, orders=(1, 2, 3, 4, 5), noises=None, cache_for=None):
    """Pick kernel order (and noise variance) by maximal log evidence.

    Returns ``(order, noise_or_None, log_evidence)``; ties keep the first
    grid point.
    """
    from .likelihoods import make_likelihood

    if noises is None:
        noises = noise_grid()
    best = None
    for order in orders:
        kcfg = KernelConfig(order)
        cache = cache_for(kcfg) if cache_for else FeatureCache(kcfg)
        K = SpectrumIndex(data.inputs, kcfg, cache).self_gram()
        grid = noises if lik_kind == "gaussian" else [None]
        for s2 in grid:
            lik = make_likelihood(lik_kind, s2)
            try:
                ev = log_evidence(fit_full(data, kcfg, lik, cache, K))
            except CholeskyFailure:
                continue
            if best is None or ev > best[2]:
                best = (order, s2, ev)
    return best
