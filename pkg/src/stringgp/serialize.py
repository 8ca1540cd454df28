"""Save and load fitted models as ``.npz`` archives.

Layout: a ``header`` entry holding UTF-8 JSON (format version, model
kind, kernel config, likelihood, alphabet), the training and inducing
strings as UTF-8 text with one string per line, and every factor matrix
as a float64 array.  Arrays round-trip bit-exactly.
"""

import json

import numpy as np

from .domain import Alphabet, Dataset
from .gp import FullGPModel, LaplaceState
from .kernel import KernelConfig
from .likelihoods import likelihood_from_dict
from .sparse import SparseBasis, SparseGPModel

FORMAT_VERSION = 1


def _text(lines):
    return np.frombuffer("\n".join(lines).encode("utf-8"), dtype=np.uint8)


def _lines(arr, count):
    if count == 0:
        return []
    return bytes(arr).decode("utf-8").split("\n")


def _laplace_arrays(state):
    if state is None:
        return {}
    return {
        "lap_f_hat": state.f_hat, "lap_W": state.W, "lap_grad": state.grad,
        "lap_scalars": np.array([state.log_evidence, state.iterations,
                                 float(state.converged), state.grad_norm]),
    }


def _laplace_state(arrs):
    if "lap_f_hat" not in arrs:
        return None
    ev, it, conv, gnorm = arrs["lap_scalars"]
    return LaplaceState(arrs["lap_f_hat"], arrs["lap_W"], float(ev), int(it), bool(conv),
                        arrs["lap_grad"], float(gnorm))


def save_model(model, path):
    train = getattr(model, "train", None)
    header = {
        "format": "stringgp-model",
        "version": FORMAT_VERSION,
        "kind": "full" if isinstance(model, FullGPModel) else "sparse",
        "kernel": {"order": model.kernel_cfg.order, "normalize": model.kernel_cfg.normalize},
        "likelihood": model.likelihood.to_dict(),
    }
    arrays = _laplace_arrays(model.laplace)
    if isinstance(model, FullGPModel):
        header["alphabet"] = list(train.alphabet.symbols)
        header["n_train"] = train.n
        header["target_dtype"] = train.targets.dtype.str
        arrays.update(train_seqs=_text(train.inputs), targets=train.targets,
                      chol=model.chol, alpha=model.alpha)
    else:
        b = model.basis
        header["n_inducing"] = len(model.inducing)
        header["basis"] = "cholesky" if b._chol is not None else "eigen"
        header["jitter"] = b.jitter
        arrays.update(inducing=_text(model.inducing), Kzz=b.Kzz, V=b.V, root=b.root,
                      mean_v=model.mean_v, chol_prec=model.chol_prec,
                      log_evidence=np.array([model.log_evidence]))
        if b._chol is None:
            arrays.update(eig_U=b._U, eig_sqrt=b._sqrt_lam)
    header_bytes = np.frombuffer(json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    with open(path, "wb") as fh:
        np.savez(fh, header=header_bytes, **arrays)


def load_model(path):
    with np.load(path, allow_pickle=False) as npz:
        arrs = {k: npz[k] for k in npz.files}
    header = json.loads(bytes(arrs.pop("header")).decode("utf-8"))
    if header.get("format") != "stringgp-model" or header.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model file {path}")
    kcfg = KernelConfig(header["kernel"]["order"], header["kernel"]["normalize"])
    lik = likelihood_from_dict(header["likelihood"])
    laplace = _laplace_state(arrs)
    if header["kind"] == "full":
        train = Dataset(_lines(arrs["train_seqs"], header["n_train"]), arrs["targets"],
                        Alphabet(tuple(header["alphabet"])))
        return FullGPModel(train, kcfg, lik, arrs["chol"], arrs["alpha"], laplace)
    basis = SparseBasis.__new__(SparseBasis)
    basis.Kzz = arrs["Kzz"]
    basis.V = arrs["V"]
    basis.root = arrs["root"]
    basis.jitter = header["jitter"]
    if header["basis"] == "cholesky":
        basis._chol = arrs["root"]
    else:
        basis._chol = None
        basis._U = arrs["eig_U"]
        basis._sqrt_lam = arrs["eig_sqrt"]
    model = SparseGPModel(_lines(arrs["inducing"], header["n_inducing"]), kcfg, lik, basis,
                          arrs["mean_v"], arrs["chol_prec"], laplace)
    model._log_evidence = float(arrs["log_evidence"][0])
    return model
