"""Sparse Gaussian processes over strings with a spectrum kernel."""

from .domain import BINARY, DNA, Alphabet, Dataset
from .errors import StringGPError
from .gp import fit_full, fit_full_gaussian, log_evidence, predict_full
from .kernel import KernelConfig, gram, kernel_fast, kernel_naive
from .likelihoods import Bernoulli, Gaussian, Poisson, make_likelihood
from .select import SelectionConfig, select
from .sparse import EvidenceObjective, fit_sparse, sparse_predict

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "BINARY", "DNA", "Dataset", "StringGPError", "KernelConfig", "gram",
    "kernel_fast", "kernel_naive", "Gaussian", "Bernoulli", "Poisson", "make_likelihood",
    "fit_full", "fit_full_gaussian", "predict_full", "log_evidence", "fit_sparse",
    "sparse_predict", "EvidenceObjective", "SelectionConfig", "select",
]
