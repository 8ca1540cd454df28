"""Inducing-point (DTC) sparse GPs on strings.

The latent training values are tied deterministically to the inducing
outputs, ``f = K_xz K_zz^+ u``.  Everything is computed in whitened
coordinates ``u = R v`` with ``R R^T = K_zz``, so the prior on ``v`` is
standard normal and every training-side operation costs O(n m^2).
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import CholeskyFailure
from .gp import GaussianPosterior, LaplaceState, cholesky
from .kernel import FeatureCache, KernelConfig, SpectrumIndex, default_jitter, kernel_diag, kernel_fast
from .likelihoods import Gaussian

log = logging.getLogger(__name__)

_LOG2PI = np.log(2.0 * np.pi)

JITTER = 1e-6
MAX_JITTER_DOUBLINGS = 8


def dedupe(z):
    """Drop repeated inducing strings, keeping first occurrences in order."""
    return list(dict.fromkeys(z))


def jittered_cholesky(Kzz, factor=JITTER):
    """Cholesky of ``Kzz + eps I``, doubling eps on failure.

    Returns ``(L, eps)``.
    """
    eps = default_jitter(Kzz, factor)
    m = Kzz.shape[0]
    for _ in range(MAX_JITTER_DOUBLINGS + 1):
        try:
            return np.linalg.cholesky(Kzz + eps * np.eye(m)), eps
        except np.linalg.LinAlgError:
            eps *= 2.0
    raise CholeskyFailure(f"K_zz not factorizable with jitter up to {eps / 2:.3g}")


def inducing_gram(z, cache):
    """Square Gram of the inducing strings via pairwise sparse dot products."""
    m = len(z)
    feats = [cache(s) for s in z]
    K = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            K[i, j] = K[j, i] = kernel_fast(feats[i], feats[j])
    if cache.cfg.normalize:
        d = np.sqrt(np.diag(K).copy())
        with np.errstate(divide="ignore", invalid="ignore"):
            K = np.where(np.outer(d, d) > 0, K / np.outer(d, d), 0.0)
    return K


class SparseBasis:
    """Whitened cross-covariance ``V`` with ``V^T V = K_xz K_zz^+ K_zx``.

    By default ``K_zz`` is factored as ``R R^T`` on its numerical range
    (eigenvalues above ``rtol * max``), which is exact for the singular
    Gram matrices that spectrum kernels routinely produce.  Passing a
    ``jitter`` factor instead uses a Cholesky factor of ``K_zz + eps I``.
    """

    def __init__(self, Kxz, Kzz, jitter=None, rtol=1e-10):
        self.Kzz = Kzz
        self.jitter = jitter
        if jitter is None:
            lam, U = np.linalg.eigh(0.5 * (Kzz + Kzz.T))
            top = lam[-1] if lam.size else 0.0
            keep = lam > rtol * top if top > 0 else np.zeros(lam.shape, bool)
            self._U = U[:, keep]
            self._sqrt_lam = np.sqrt(lam[keep])
            self.root = self._U * self._sqrt_lam
            self._chol = None
        else:
            self._chol, self.jitter = jittered_cholesky(Kzz, jitter)
            self.root = self._chol
        self.V = self.whiten(Kxz.T)

    @classmethod
    def from_strings(cls, x, z, kcfg, cache=None, jitter=None, train_index=None):
        cache = cache if cache is not None else FeatureCache(kcfg)
        index = train_index if train_index is not None else SpectrumIndex(x, kcfg, cache)
        Kxz = index.cross(z).T
        return cls(Kxz, inducing_gram(z, cache), jitter)

    @property
    def rank(self):
        return self.root.shape[1]

    def whiten(self, Kzs):
        """Map kernel columns against ``z`` to whitened coordinates."""
        if self._chol is not None:
            return solve_triangular(self._chol, Kzs, lower=True)
        return (self._U.T @ Kzs) / self._sqrt_lam[:, None]

    def unwhiten_gradient(self, g):
        """Pull a whitened-space gradient back to inducing-output space."""
        if self._chol is not None:
            return solve_triangular(self._chol.T, g, lower=False)
        return self._U @ (g / self._sqrt_lam)


def _gaussian_terms(V, y, noise):
    """Factor ``B = I + V V^T / noise`` and return ``(LB, c)`` with c = LB^{-1} V y / noise."""
    m = V.shape[0]
    LB = cholesky(np.eye(m) + (V @ V.T) / noise, "I + V V^T / noise")
    c = solve_triangular(LB, V @ y, lower=True) / noise
    return LB, c


def dtc_evidence_from_basis(basis, y, noise):
    n = len(y)
    LB, c = _gaussian_terms(basis.V, y, noise)
    quad = y @ y / noise - c @ c
    logdet = n * np.log(noise) + 2.0 * np.sum(np.log(np.diag(LB)))
    return float(-0.5 * quad - 0.5 * logdet - 0.5 * n * _LOG2PI)


def sparse_evidence_gaussian(data, z, kcfg, noise_variance, cache=None, jitter=None):
    """``log N(y; 0, Q_nn + noise I)`` without forming any n-by-n matrix."""
    if not noise_variance > 0:
        raise ValueError("noise variance must be positive")
    basis = SparseBasis.from_strings(data.inputs, dedupe(z), kcfg, cache, jitter)
    y = np.asarray(data.targets, dtype=float)
    return dtc_evidence_from_basis(basis, y, noise_variance)


@dataclass
class SparseGPModel:
    inducing: list
    kernel_cfg: KernelConfig
    likelihood: object
    basis: SparseBasis
    mean_v: np.ndarray  # posterior mean of the whitened inducing outputs
    chol_prec: np.ndarray  # Cholesky of the whitened posterior precision
    laplace: LaplaceState = None
    cache: FeatureCache = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.cache is None:
            self.cache = FeatureCache(self.kernel_cfg)

    @property
    def mean_u(self):
        return self.basis.root @ self.mean_v

    @property
    def cov_u(self):
        """Posterior covariance ``A`` of the inducing outputs."""
        R = solve_triangular(self.chol_prec, self.basis.root.T, lower=True)
        return R.T @ R

    @property
    def log_evidence(self):
        return self._log_evidence

    def cross(self, test):
        return SpectrumIndex(self.inducing, self.kernel_cfg, self.cache).cross(test)


def fit_sparse_gaussian(data, z, kcfg, noise_variance, cache=None, jitter=None):
    """DTC posterior ``q(u) = N(mu_u, A)`` under Gaussian noise."""
    lik = Gaussian(noise_variance)
    y = lik.check_targets(data.targets)
    z = dedupe(z)
    cache = cache if cache is not None else FeatureCache(kcfg)
    basis = SparseBasis.from_strings(data.inputs, z, kcfg, cache, jitter)
    LB, c = _gaussian_terms(basis.V, y, noise_variance)
    mean_v = solve_triangular(LB.T, c, lower=False)
    model = SparseGPModel(z, kcfg, lik, basis, mean_v, LB, cache=cache)
    n = len(y)
    model._log_evidence = float(
        -0.5 * (y @ y / noise_variance - c @ c)
        - 0.5 * (n * np.log(noise_variance) + 2.0 * np.sum(np.log(np.diag(LB))))
        - 0.5 * n * _LOG2PI
    )
    return model


def sparse_predict(model, test, full_cov=False):
    """Inducing conditional plus propagated uncertainty of ``u``."""
    test = list(test)
    Vs = model.basis.whiten(model.cross(test).T)
    mean = Vs.T @ model.mean_v
    R = solve_triangular(model.chol_prec, Vs, lower=True)
    if full_cov:
        Kss = SpectrumIndex(test, model.kernel_cfg, model.cache).self_gram()
        cov = Kss - Vs.T @ Vs + R.T @ R
        cov = 0.5 * (cov + cov.T)
        return GaussianPosterior(mean, np.diag(cov).copy(), cov)
    prior = kernel_diag(test, model.kernel_cfg, model.cache)
    var = prior - np.sum(Vs * Vs, axis=0) + np.sum(R * R, axis=0)
    return GaussianPosterior(mean, var)


def _newton_whitened(V, y, lik, max_iter=100, tol=1e-6, max_halvings=20, v0=None):
    """Maximize ``log p(y | V^T v) - |v|^2 / 2`` by damped Newton steps."""
    m = V.shape[0]
    v = np.zeros(m) if v0 is None else np.array(v0, dtype=float)

    def objective(v_):
        return float(np.sum(lik.log_prob(y, V.T @ v_)) - 0.5 * v_ @ v_)

    psi = objective(v)
    it = 0
    for it in range(1, max_iter + 1):
        _, d1, d2 = lik.terms(y, V.T @ v)
        grad = V @ d1 - v
        gnorm = float(np.max(np.abs(grad))) if m else 0.0
        if gnorm < tol * 1e-3:
            break
        W = -d2
        H = np.eye(m) + (V * W) @ V.T
        LH = cholesky(H, "I + V W V^T")
        step = solve_triangular(LH.T, solve_triangular(LH, grad, lower=True), lower=False)
        t = 1.0
        for _ in range(max_halvings + 1):
            v_try = v + t * step
            psi_try = objective(v_try)
            # tolerate rounding noise near the mode, where the gain of a
            # Newton step drops below the precision of psi
            if psi_try >= psi - 1e-12 * (1.0 + abs(psi)):
                break
            t *= 0.5
        else:
            break
        v, psi = v_try, psi_try
    f = V.T @ v
    _, d1, d2 = lik.terms(y, f)
    gnorm = float(np.max(np.abs(V @ d1 - v))) if m else 0.0
    return v, f, psi, it, gnorm < tol, gnorm


def laplace_from_basis(basis, y, lik, max_iter=100, tol=1e-6, v0=None):
    """Laplace state over the whitened inducing outputs.

    Returns ``(v_hat, LH, state)`` where ``LH`` factors ``I + V W V^T``.
    """
    V = basis.V
    v, f, psi, it, converged, gnorm = _newton_whitened(V, y, lik, max_iter, tol, v0=v0)
    _, d1, d2 = lik.terms(y, f)
    W = -d2
    LH = cholesky(np.eye(V.shape[0]) + (V * W) @ V.T, "I + V W V^T")
    log_ev = psi - float(np.sum(np.log(np.diag(LH))))
    if not converged:
        log.warning("sparse Laplace stopped after %d iterations, |grad|=%.3g", it, gnorm)
    return v, LH, LaplaceState(f, W, log_ev, it, converged, d1, gnorm)


def sparse_laplace_fit(data, z, kcfg, lik, cache=None, jitter=None, max_iter=100, tol=1e-6):
    """Laplace approximation over the inducing outputs for a non-Gaussian likelihood.

    The returned model's ``laplace.f_hat`` holds the implied training
    latents ``P u_hat``; ``mean_u`` holds the inducing-space mode.
    """
    if lik.gaussian:
        raise ValueError("use fit_sparse_gaussian for the Gaussian likelihood")
    y = lik.check_targets(data.targets)
    z = dedupe(z)
    cache = cache if cache is not None else FeatureCache(kcfg)
    basis = SparseBasis.from_strings(data.inputs, z, kcfg, cache, jitter)
    v, LH, state = laplace_from_basis(basis, y, lik, max_iter, tol)
    model = SparseGPModel(z, kcfg, lik, basis, v, LH, laplace=state, cache=cache)
    model._log_evidence = state.log_evidence
    return model


def inducing_gradient(model):
    """Gradient of the unnormalized log posterior in u-space at the mode."""
    V = model.basis.V
    g_white = V @ model.laplace.grad - model.mean_v
    return model.basis.unwhiten_gradient(g_white)


def sparse_predict_latent(model, test, full_cov=False):
    """Laplace predictive over latent values; same algebra as the Gaussian case."""
    return sparse_predict(model, test, full_cov)


def fit_sparse(data, z, kcfg, lik, cache=None, jitter=None):
    if lik.gaussian:
        return fit_sparse_gaussian(data, z, kcfg, lik.noise_variance, cache, jitter)
    return sparse_laplace_fit(data, z, kcfg, lik, cache, jitter)


class EvidenceObjective:
    """Sparse log evidence as a function of the inducing strings.

    Kernel columns between each candidate inducing string and the training
    inputs are memoized, so annealing and greedy search only pay for the
    strings they have not seen before.
    """

    def __init__(self, data, kcfg, lik, cache=None, jitter=None, max_columns=200_000):
        self.data = data
        self.kcfg = kcfg
        self.lik = lik
        self.cache = cache if cache is not None else FeatureCache(kcfg)
        self.jitter = jitter
        self.index = SpectrumIndex(data.inputs, kcfg, self.cache)
        self.y = lik.check_targets(data.targets)
        self._columns = {}
        self._max_columns = max_columns
        self.calls = 0

    def columns(self, z):
        missing = [s for s in dict.fromkeys(z) if s not in self._columns]
        if missing:
            if len(self._columns) + len(missing) > self._max_columns:
                self._columns.clear()
                missing = list(dict.fromkeys(z))
            block = self.index.cross(missing)
            for s, row in zip(missing, block):
                self._columns[s] = row
        return np.stack([self._columns[s] for s in z], axis=1)

    def basis(self, z):
        z = dedupe(z)
        return SparseBasis(self.columns(z), inducing_gram(z, self.cache), self.jitter)

    def __call__(self, z):
        self.calls += 1
        basis = self.basis(z)
        if self.lik.gaussian:
            return dtc_evidence_from_basis(basis, self.y, self.lik.noise_variance)
        return laplace_from_basis(basis, self.y, self.lik)[2].log_evidence
