"""Spectrum (n-gram count) string kernel.

``k(x, x') = <phi(x), phi(x')>`` where ``phi(x)[a]`` counts the
occurrences of the n-gram ``a`` in ``x``, overlaps included.  Feature
maps are hash-counted in O(order * len(x)); Gram matrices are sparse
count-matrix products, which are exact because every entry is an integer
well below 2**53.
"""

import csv
from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import NotSquare, OrderMismatch


@dataclass(frozen=True)
class KernelConfig:
    order: int = 3
    normalize: bool = False

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"kernel order must be a positive integer, got {self.order!r}")


@dataclass(frozen=True)
class SpectrumFeatures:
    """Sparse n-gram count map of one string; zero counts are omitted."""

    counts: dict
    order: int

    def __len__(self):
        return len(self.counts)

    def sqnorm(self):
        return sum(v * v for v in self.counts.values())


def _order(cfg):
    return cfg.order if isinstance(cfg, KernelConfig) else int(cfg)


def features(x, cfg):
    k = _order(cfg)
    return SpectrumFeatures(dict(Counter(x[i:i + k] for i in range(len(x) - k + 1))), k)


def kernel_naive(x, x2, cfg):
    """Double loop over all pairs of length-``order`` windows.

    Quadratic in the string lengths; kept as an independent reference for
    :func:`kernel_fast`.
    """
    k = _order(cfg)
    total = 0
    for i in range(len(x) - k + 1):
        for j in range(len(x2) - k + 1):
            if x[i:i + k] == x2[j:j + k]:
                total += 1
    return float(total)


def kernel_fast(f1, f2):
    if f1.order != f2.order:
        raise OrderMismatch(f"feature orders {f1.order} and {f2.order} differ")
    a, b = f1.counts, f2.counts
    if len(a) > len(b):
        a, b = b, a
    return float(sum(v * b.get(key, 0) for key, v in a.items()))


class FeatureCache:
    """Memoized feature maps keyed by string value.

    Populate from one thread; concurrent reads afterwards are safe.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self._store = {}

    def __call__(self, x):
        f = self._store.get(x)
        if f is None:
            f = features(x, self.cfg)
            self._store[x] = f
        return f

    def __len__(self):
        return len(self._store)

    def clear(self):
        self._store.clear()


def _windows(seqs, k):
    """All length-``k`` windows of ``seqs`` as fixed-width byte keys.

    Returns ``(keys, owner)`` where ``owner[w]`` is the index of the string
    window ``w`` came from.  Strings are encoded as UTF-32 so every
    character occupies four bytes.
    """
    lengths = np.fromiter(map(len, seqs), dtype=np.int64, count=len(seqs))
    n_win = np.maximum(lengths - k + 1, 0)
    total = int(n_win.sum())
    key_dtype = np.dtype((np.void, 4 * k))
    if total == 0:
        return np.empty(0, dtype=key_dtype), np.empty(0, dtype=np.int64)
    codes = np.frombuffer("".join(seqs).encode("utf-32-le"), dtype=np.uint32)
    starts = np.cumsum(lengths) - lengths
    first = np.cumsum(n_win) - n_win
    owner = np.repeat(np.arange(len(seqs)), n_win)
    pos = starts[owner] + np.arange(total) - first[owner]
    win = np.ascontiguousarray(codes[pos[:, None] + np.arange(k)])
    return win.view(key_dtype).ravel(), owner


class SpectrumIndex:
    """Count matrix of a fixed list of strings over a shared n-gram vocabulary.

    ``cross(others)`` returns the kernel block between ``others`` and the
    indexed strings; n-grams absent from the vocabulary contribute zero.
    ``cache`` is accepted for interface symmetry with :func:`gram`; the
    count matrix is built directly from the strings.
    """

    def __init__(self, seqs, cfg, cache=None):
        self.cfg = cfg
        self.cache = cache
        self.seqs = tuple(seqs)
        keys, owner = _windows(self.seqs, _order(cfg))
        self.vocab, col = np.unique(keys, return_inverse=True)
        self.matrix = self._counts(owner, col.ravel(), len(self.seqs))
        self.sqnorms = np.asarray(self.matrix.multiply(self.matrix).sum(axis=1)).ravel()

    def _counts(self, rows, cols, n_rows):
        # duplicate (row, col) pairs are summed on conversion
        return sp.coo_matrix(
            (np.ones(len(rows)), (rows, cols)),
            shape=(n_rows, max(len(self.vocab), 1)),
        ).tocsr()

    def _project(self, seqs):
        keys, owner = _windows(seqs, _order(self.cfg))
        if len(self.vocab) == 0 or len(keys) == 0:
            return self._counts([], [], len(seqs)), keys, owner
        j = np.minimum(np.searchsorted(self.vocab, keys), len(self.vocab) - 1)
        hit = self.vocab[j] == keys
        return self._counts(owner[hit], j[hit], len(seqs)), keys, owner

    def cross(self, others):
        """Kernel matrix of shape (len(others), len(indexed))."""
        others = list(others)
        if not others or not self.seqs:
            return np.zeros((len(others), len(self.seqs)))
        proj, keys, owner = self._project(others)
        out = (proj @ self.matrix.T).toarray()
        if self.cfg.normalize:
            out = _normalize(out, _sqnorms(keys, owner, len(others)), self.sqnorms)
        return out

    def self_gram(self):
        if not self.seqs:
            return np.zeros((0, 0))
        out = (self.matrix @ self.matrix.T).toarray()
        if self.cfg.normalize:
            out = _normalize(out, self.sqnorms, self.sqnorms)
        return out

    def diag(self):
        if self.cfg.normalize:
            return (self.sqnorms > 0).astype(float)
        return self.sqnorms.copy()


def _sqnorms(keys, owner, n):
    """Squared feature norms from window keys, including n-grams of any vocabulary."""
    if len(keys) == 0:
        return np.zeros(n)
    _, col = np.unique(keys, return_inverse=True)
    pairs, counts = np.unique(np.stack([owner, col.ravel()]), axis=1, return_counts=True)
    return np.bincount(pairs[0], weights=counts.astype(float) ** 2, minlength=n)


def _normalize(block, left, right):
    scale = np.sqrt(np.outer(left, right))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(scale > 0, block / scale, 0.0)
    return out


def gram(rows, cols, cfg, cache=None):
    """Kernel matrix ``K[i, j] = k(rows[i], cols[j])``.

    Feature maps are computed once per distinct string.  Passing the same
    list for ``rows`` and ``cols`` yields an exactly symmetric matrix.
    """
    rows = list(rows)
    cols = list(cols)
    index = SpectrumIndex(cols, cfg, cache)
    if rows == cols:
        return index.self_gram()
    return index.cross(rows)


def kernel_diag(seqs, cfg, cache=None):
    """``k(x, x)`` for each string without forming the full matrix."""
    cache = cache if cache is not None else FeatureCache(cfg)
    d = np.array([cache(x).sqnorm() for x in seqs], dtype=float)
    if cfg.normalize:
        return (d > 0).astype(float)
    return d


def add_jitter(g, eps):
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {g.shape}")
    return g + eps * np.eye(g.shape[0])


def default_jitter(g, factor=1e-6):
    d = np.diag(g)
    scale = float(np.mean(d)) if d.size else 0.0
    return factor * (scale if scale > 0 else 1.0)


def export_gram_csv(g, path):
    """Write ``g`` row-major with a header row of column indices."""
    g = np.asarray(g)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(range(g.shape[1]))
        for row in g:
            w.writerow(repr(float(v)) for v in row)
