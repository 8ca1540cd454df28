"""Synthetic generators, UCI DNA parsers, train/test splits and CSV I/O."""

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .domain import BINARY, DNA, Alphabet, Dataset, char_count, validate
from .errors import EmptyDataset, InvalidSpec, MalformedLine, UnexpectedLength

AT = Alphabet(("A", "T"))
SPLICE_ALPHABET = Alphabet(("A", "C", "G", "T", "D", "N", "S", "R"))


def _draw_strings(rng, n, length, alphabet, distinct):
    k = len(alphabet)
    symbols = np.array(alphabet.symbols)
    space = k ** length
    if distinct and n <= space and space <= 1 << 20:
        codes = rng.choice(space, size=n, replace=False)
        digits = (codes[:, None] // k ** np.arange(length - 1, -1, -1)[None, :]) % k
        return ["".join(row) for row in symbols[digits]]
    out, seen = [], set()
    while len(out) < n:
        s = "".join(symbols[rng.integers(k, size=length)])
        if distinct and n <= space:
            if s in seen:
                continue
            seen.add(s)
        out.append(s)
    return out


def gen_binary_toy(n=100, length=10, seed=0):
    """Random binary strings; returns ``(regression, classification)`` datasets.

    Regression targets count the ones; the class label is 1 only for a
    strict majority of ones.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    xs = _draw_strings(rng, n, length, BINARY, distinct=True)
    ones = np.array([char_count(x, "1") for x in xs])
    return (
        Dataset(xs, ones.astype(float), BINARY),
        Dataset(xs, (2 * ones > length).astype(int), BINARY),
    )


def gen_poisson_tf(n=100, length=10, rate=1.0, seed=0):
    """Strings over {A, T} with Poisson counts at rate ``rate * #A``.

    Returns ``(dataset, true_rates)``.
    """
    if not rate > 0:
        raise ValueError("rate must be positive")
    rng = np.random.default_rng(seed)
    xs = _draw_strings(rng, n, length, AT, distinct=False)
    rates = rate * np.array([char_count(x, "A") for x in xs], dtype=float)
    counts = rng.poisson(rates)
    return Dataset(xs, counts.astype(int), AT), rates


def _lines(source):
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text()
    if isinstance(text, bytes):
        text = text.decode()
    return text.splitlines()


def parse_uci(source, classes, length, alphabet):
    """Parse ``<class>,<name>,<sequence>`` lines.

    ``classes`` maps class tokens to integer labels.  Whitespace inside
    the sequence field is dropped and letters are uppercased.
    """
    inputs, labels, names = [], [], []
    for lineno, line in enumerate(_lines(source), start=1):
        if not line.strip():
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 3 or not all(fields):
            raise MalformedLine(lineno, f"expected 3 non-empty fields, got {len(fields)}")
        label, name, seq = fields
        if label not in classes:
            raise MalformedLine(lineno, f"unknown class {label!r}")
        seq = "".join(seq.split()).upper()
        if len(seq) != length:
            raise UnexpectedLength(lineno, len(seq), length)
        inputs.append(validate(seq, alphabet, lineno))
        labels.append(classes[label])
        names.append(name)
    return Dataset(inputs, np.array(labels, dtype=int), alphabet, names)


def parse_promoters(source):
    """UCI promoter gene sequences: 57 nt, '+' is the positive class."""
    return parse_uci(source, {"+": 1, "-": 0}, 57, DNA)


def parse_splice(source):
    """UCI splice junctions: 60 nt, EI and IE (splice sites) vs N.

    Ambiguity codes D, N, S and R are kept as extra symbols.
    """
    return parse_uci(source, {"EI": 1, "IE": 1, "N": 0}, 60, SPLICE_ALPHABET)


@dataclass(frozen=True)
class SplitSpec:
    kind: str = "fraction"
    train_fraction: float = 0.6
    folds: int = 10
    train_n: int = None
    test_n: int = None

    def __post_init__(self):
        if self.kind == "fraction":
            if not 0 < self.train_fraction < 1:
                raise InvalidSpec("train_fraction must lie in (0, 1)")
        elif self.kind == "kfold":
            if self.folds < 2:
                raise InvalidSpec("kfold needs at least 2 folds")
        elif self.kind == "fixed":
            if self.train_n is None or self.test_n is None or self.train_n < 1 or self.test_n < 0:
                raise InvalidSpec("fixed split needs train_n >= 1 and test_n >= 0")
        else:
            raise InvalidSpec(f"unknown split kind {self.kind!r}")


def split_indices(n, spec, seed=0):
    """Index partitions; a list of ``(train, test)`` pairs for k-fold."""
    perm = np.random.default_rng(seed).permutation(n)
    if spec.kind == "fraction":
        n_train = int(round(spec.train_fraction * n))
        return perm[:n_train], perm[n_train:]
    if spec.kind == "fixed":
        if spec.train_n + spec.test_n > n:
            raise InvalidSpec(f"fixed split {spec.train_n}+{spec.test_n} exceeds n={n}")
        return perm[:spec.train_n], perm[spec.train_n:spec.train_n + spec.test_n]
    if spec.folds > n:
        raise InvalidSpec(f"{spec.folds} folds for only {n} points")
    folds = np.array_split(perm, spec.folds)
    return [(np.concatenate(folds[:i] + folds[i + 1:]), folds[i]) for i in range(spec.folds)]


def split(data, spec, seed=0):
    parts = split_indices(data.n, spec, seed)
    if spec.kind == "kfold":
        return [(data.subset(tr), data.subset(te)) for tr, te in parts]
    tr, te = parts
    return data.subset(tr), data.subset(te)


def _format_target(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_dataset(data, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sequence", "target"])
        for x, y in zip(data.inputs, data.targets.tolist()):
            w.writerow([x, _format_target(y)])


def read_dataset(path, alphabet=None):
    """Read a ``sequence,target`` CSV.

    Integer-looking targets give an integer array.  Without ``alphabet``
    the symbols seen in the file are used, sorted.
    """
    text = Path(path).read_text(encoding="utf-8")
    if not text.strip():
        raise EmptyDataset(f"{path} is empty")
    rows = list(csv.reader(io.StringIO(text)))
    if [h.strip() for h in rows[0]] != ["sequence", "target"]:
        raise MalformedLine(1, "header must be 'sequence,target'")
    inputs, raw = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise MalformedLine(lineno, f"expected 2 fields, got {len(row)}")
        inputs.append(row[0])
        raw.append(row[1])
    try:
        targets = np.array([int(v) for v in raw], dtype=int)
    except ValueError:
        targets = np.empty(len(raw))
        for i, v in enumerate(raw):
            try:
                targets[i] = float(v)
            except ValueError:
                raise MalformedLine(i + 2, f"target {v!r} is not a number") from None
    if alphabet is None and not inputs:
        alphabet = BINARY
    elif alphabet is None:
        symbols = sorted(set("".join(inputs)))
        if len(symbols) < 2:
            raise InvalidSpec("cannot infer an alphabet of at least two symbols; pass one")
        alphabet = Alphabet(tuple(symbols))
    for lineno, x in enumerate(inputs, start=2):
        validate(x, alphabet, lineno)
    return Dataset(inputs, targets, alphabet)
