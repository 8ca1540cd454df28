"""Independent dense reference implementations used by the tests.

Everything here works with explicit matrix inverses on small problems
and shares no code with the package beyond the Gram construction.
"""

import mpmath
import numpy as np

from stringgp.domain import DNA, Dataset
from stringgp.kernel import KernelConfig, gram


def random_problem(rng, n, kind, length=10, order=2):
    """Random DNA strings with targets suited to ``kind``."""
    xs = ["".join(rng.choice(list("ACGT"), length)) for _ in range(n)]
    if kind == "gaussian":
        y = rng.normal(size=n)
    elif kind == "bernoulli":
        y = rng.integers(0, 2, n)
    else:
        y = rng.poisson(2.0, n)
    return Dataset(xs, y, DNA), KernelConfig(order)


def gaussian_logpdf(y, cov):
    n = len(y)
    sign, logdet = np.linalg.slogdet(cov)
    assert sign > 0
    return float(-0.5 * y @ np.linalg.inv(cov) @ y - 0.5 * logdet - 0.5 * n * np.log(2 * np.pi))


def dense_gaussian_predict(data, kcfg, noise, test):
    x = list(data.inputs)
    y = np.asarray(data.targets, float)
    Ky = gram(x, x, kcfg) + noise * np.eye(len(x))
    inv = np.linalg.inv(Ky)
    Ks = gram(test, x, kcfg)
    mean = Ks @ inv @ y
    cov = gram(test, test, kcfg) - Ks @ inv @ Ks.T
    return mean, cov, gaussian_logpdf(y, Ky)


def precise_gaussian_predict(data, kcfg, noise, test, dps=30):
    """Explicit-inverse predictive and evidence carried out in ``dps``-digit arithmetic.

    Float64 explicit inverses lose several digits in ``K_ss - K_sx K^{-1} K_xs`` when
    ``K + noise I`` is ill conditioned; extended precision keeps the oracle exact
    to float64 resolution.
    """
    x = list(data.inputs)
    n = len(x)
    with mpmath.workdps(dps):
        A = mpmath.matrix(gram(x, x, kcfg).tolist()) + mpmath.mpf(noise) * mpmath.eye(n)
        Ai = mpmath.inverse(A)
        Ks = mpmath.matrix(gram(test, x, kcfg).tolist())
        y = mpmath.matrix(np.asarray(data.targets, float).tolist())
        mean = np.array((Ks * Ai * y).tolist(), dtype=float).ravel()
        cov = np.array((mpmath.matrix(gram(test, test, kcfg).tolist()) - Ks * Ai * Ks.T)
                       .tolist(), dtype=float)
        ev = float(-(y.T * Ai * y)[0] / 2 - mpmath.log(mpmath.det(A)) / 2
                   - n * mpmath.log(2 * mpmath.pi) / 2)
    return mean, cov, ev


def dense_newton(K, y, lik, iters=200):
    """Undamped Newton on log p(y|f) - f'K^{-1}f/2 with explicit inverses."""
    Kinv = np.linalg.inv(K)
    f = np.zeros(len(y))
    for _ in range(iters):
        _, d1, d2 = lik.terms(y, f)
        H = Kinv + np.diag(-d2)
        f_new = f + np.linalg.solve(H, d1 - Kinv @ f)
        if np.max(np.abs(f_new - f)) < 1e-14:
            f = f_new
            break
        f = f_new
    return f


def dense_laplace(K, y, lik, Ks, Kss):
    """Mode, Laplace evidence and latent predictive by direct formulas."""
    f = dense_newton(K, y, lik)
    logp, d1, d2 = lik.terms(y, f)
    W = -d2
    Kinv = np.linalg.inv(K)
    n = len(y)
    _, logdet = np.linalg.slogdet(np.eye(n) + np.sqrt(W)[:, None] * K * np.sqrt(W)[None, :])
    ev = float(np.sum(logp) - 0.5 * f @ Kinv @ f - 0.5 * logdet)
    mean = Ks @ Kinv @ f
    cov = Kss - Ks @ np.linalg.inv(K + np.diag(1.0 / W)) @ Ks.T
    return f, ev, mean, cov


def dense_dtc(x, z, y, kcfg, noise, test=None):
    """DTC evidence and predictive from an explicit n-by-n Q_nn + noise I."""
    Kxz = gram(x, z, kcfg)
    Kzz = gram(z, z, kcfg)
    Kzz_pinv = np.linalg.pinv(Kzz, rcond=1e-10, hermitian=True)
    Q = Kxz @ Kzz_pinv @ Kxz.T
    cov_y = Q + noise * np.eye(len(x))
    ev = gaussian_logpdf(y, cov_y)
    if test is None:
        return ev
    Ksz = gram(test, z, kcfg)
    Qsx = Ksz @ Kzz_pinv @ Kxz.T
    Qss = Ksz @ Kzz_pinv @ Ksz.T
    inv = np.linalg.inv(cov_y)
    mean = Qsx @ inv @ y
    cov = gram(test, test, kcfg) - Qss + (Qss - Qsx @ inv @ Qsx.T)
    return ev, mean, cov


def dense_sparse_laplace(x, z, y, kcfg, lik, test):
    """Laplace over u with P = K_xz K_zz^{-1}, by explicit inverses."""
    Kxz = gram(x, z, kcfg)
    Kzz = gram(z, z, kcfg)
    Kzz_inv = np.linalg.inv(Kzz)
    P = Kxz @ Kzz_inv
    u = np.zeros(len(z))
    for _ in range(200):
        _, d1, d2 = lik.terms(y, P @ u)
        g = P.T @ d1 - Kzz_inv @ u
        H = Kzz_inv + P.T @ np.diag(-d2) @ P
        step = np.linalg.solve(H, g)
        u = u + step
        if np.max(np.abs(step)) < 1e-14:
            break
    logp, d1, d2 = lik.terms(y, P @ u)
    H = Kzz_inv + P.T @ np.diag(-d2) @ P
    _, logdet_prior = np.linalg.slogdet(Kzz)
    _, logdet_H = np.linalg.slogdet(H)
    ev = float(np.sum(logp) - 0.5 * u @ Kzz_inv @ u - 0.5 * (logdet_prior + logdet_H))
    A = np.linalg.inv(H)
    Ksz = gram(test, z, kcfg)
    Ps = Ksz @ Kzz_inv
    mean = Ps @ u
    cov = gram(test, test, kcfg) - Ksz @ Kzz_inv @ Ksz.T + Ps @ A @ Ps.T
    return u, ev, mean, cov
