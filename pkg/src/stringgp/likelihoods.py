"""Observation models and their derivatives with respect to the latent value."""

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln, logsumexp

from .errors import UnsupportedTarget

_GH_NODES, _GH_WEIGHTS = np.polynomial.hermite.hermgauss(32)
_LOG2PI = np.log(2.0 * np.pi)


def _gh_points(mean, var):
    """Quadrature abscissae of shape (n, 32) for N(mean, var) marginals."""
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    var = np.clip(np.atleast_1d(np.asarray(var, dtype=float)), 0.0, None)
    return mean[:, None] + np.sqrt(2.0 * var)[:, None] * _GH_NODES[None, :]


def gauss_hermite_expectation(fn, mean, var):
    """E[fn(f)] for f ~ N(mean, var), elementwise, 32-point Gauss-Hermite."""
    return (fn(_gh_points(mean, var)) @ _GH_WEIGHTS) / np.sqrt(np.pi)


class Likelihood:
    name = None
    gaussian = False

    def check_targets(self, y):
        return np.asarray(y)

    def terms(self, y, f):
        """Return ``(log p(y|f), d/df, d2/df2)`` elementwise."""
        raise NotImplementedError

    def log_prob(self, y, f):
        return self.terms(y, f)[0]

    def predictive_log_density(self, y, mean, var):
        """Elementwise log p(y*) with the latent integrated under N(mean, var)."""
        raise NotImplementedError

    def to_dict(self):
        return {"kind": self.name}


@dataclass(frozen=True)
class Gaussian(Likelihood):
    noise_variance: float = 1.0
    name = "gaussian"
    gaussian = True

    def __post_init__(self):
        if not self.noise_variance > 0:
            raise ValueError("noise variance must be positive")

    def check_targets(self, y):
        y = np.asarray(y, dtype=float)
        if not np.all(np.isfinite(y)):
            raise UnsupportedTarget("Gaussian targets must be finite")
        return y

    def terms(self, y, f):
        s2 = self.noise_variance
        r = np.asarray(y, dtype=float) - f
        logp = -0.5 * r * r / s2 - 0.5 * (_LOG2PI + np.log(s2))
        return logp, r / s2, np.full_like(r, -1.0 / s2)

    def predictive_log_density(self, y, mean, var):
        v = np.asarray(var, dtype=float) + self.noise_variance
        r = np.asarray(y, dtype=float) - mean
        return -0.5 * (r * r / v + np.log(v) + _LOG2PI)

    def to_dict(self):
        return {"kind": self.name, "noise_variance": self.noise_variance}


@dataclass(frozen=True)
class Bernoulli(Likelihood):
    """Logistic link, labels in {0, 1}."""

    name = "bernoulli"

    def check_targets(self, y):
        y = np.asarray(y)
        if not np.all((y == 0) | (y == 1)):
            raise UnsupportedTarget("Bernoulli targets must be 0 or 1")
        return y.astype(float)

    def terms(self, y, f):
        y = np.asarray(y, dtype=float)
        f = np.asarray(f, dtype=float)
        sign = 2.0 * y - 1.0
        logp = -np.logaddexp(0.0, -sign * f)
        p = expit(f)
        return logp, y - p, -p * (1.0 - p)

    def predict_proba(self, mean, var):
        return gauss_hermite_expectation(expit, mean, var)

    def predictive_log_density(self, y, mean, var):
        p = np.clip(self.predict_proba(mean, var), 1e-300, 1.0 - 1e-16)
        y = np.asarray(y, dtype=float)
        return np.where(y == 1, np.log(p), np.log1p(-p))


@dataclass(frozen=True)
class Poisson(Likelihood):
    """Log link: rate = exp(f)."""

    name = "poisson"

    def check_targets(self, y):
        y = np.asarray(y)
        if np.any(y < 0) or not np.all(np.equal(np.mod(y, 1), 0)):
            raise UnsupportedTarget("Poisson targets must be non-negative integers")
        return y.astype(float)

    def terms(self, y, f):
        y = np.asarray(y, dtype=float)
        f = np.asarray(f, dtype=float)
        # overshooting trial steps may overflow; the line search rejects them
        with np.errstate(over="ignore"):
            ef = np.exp(f)
        logp = y * f - ef - gammaln(y + 1.0)
        return logp, y - ef, -ef

    def predictive_log_density(self, y, mean, var):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        pts = _gh_points(mean, var)
        logp = y[:, None] * pts - np.exp(pts) - gammaln(y + 1.0)[:, None]
        return logsumexp(logp, b=_GH_WEIGHTS[None, :], axis=1) - 0.5 * np.log(np.pi)

    @staticmethod
    def rate_mean(mean, var):
        """Log-normal mean ``E[exp(f)] = exp(mean + var / 2)``."""
        return np.exp(np.asarray(mean) + 0.5 * np.asarray(var))


def likelihood_terms(lik, y, f):
    lik.check_targets(np.atleast_1d(y))
    return lik.terms(y, f)


def make_likelihood(kind, noise_variance=None):
    kind = kind.lower()
    if kind == "gaussian":
        return Gaussian(1.0 if noise_variance is None else noise_variance)
    if kind in ("bernoulli", "logistic"):
        return Bernoulli()
    if kind == "poisson":
        return Poisson()
    raise ValueError(f"unknown likelihood {kind!r}")


def likelihood_from_dict(d):
    return make_likelihood(d["kind"], d.get("noise_variance"))
