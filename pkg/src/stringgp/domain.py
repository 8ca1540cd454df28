"""Alphabets, validated strings, datasets and the annealing perturbation.

Sequences are plain ``str`` values that have passed :func:`validate`
against an :class:`Alphabet`; strings are immutable, hashable, and fast
to slice, which is all the kernel code needs.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidCharacter, LengthMismatch, SequenceTooShort


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct symbols, at least two of them."""

    symbols: tuple

    def __post_init__(self):
        symbols = tuple(self.symbols)
        if any(len(s) != 1 for s in symbols):
            raise ValueError("alphabet symbols must be single characters")
        if len(set(symbols)) != len(symbols):
            raise ValueError(f"duplicate symbols in alphabet {symbols!r}")
        if len(symbols) < 2:
            raise ValueError("alphabet needs at least two symbols")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(symbols)})

    @classmethod
    def from_string(cls, text):
        return cls(tuple(text))

    def __contains__(self, char):
        return char in self._index

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __str__(self):
        return "".join(self.symbols)


BINARY = Alphabet(("0", "1"))
DNA = Alphabet(("A", "C", "G", "T"))


def validate(seq, alphabet, lineno=None):
    """Return ``seq`` if every character belongs to ``alphabet``.

    Raises InvalidCharacter with the first offending position.
    """
    if set(seq) <= alphabet._index.keys():
        return str(seq)
    for i, c in enumerate(seq):
        if c not in alphabet:
            raise InvalidCharacter(i, c, lineno)
    return str(seq)


def char_count(seq, c):
    return seq.count(c)


def hamming(a, b):
    if len(a) != len(b):
        raise LengthMismatch(f"lengths {len(a)} and {len(b)} differ")
    return sum(1 for x, y in zip(a, b) if x != y)


def perturb(seq, alphabet, rng, n_chars=1):
    """Change exactly ``n_chars`` characters of ``seq``.

    Positions are drawn uniformly without replacement and each new
    character uniformly from the alphabet minus the current one, so the
    result is always at Hamming distance ``n_chars`` from the input.
    """
    if n_chars < 1:
        raise ValueError("n_chars must be >= 1")
    if len(seq) < n_chars:
        raise SequenceTooShort(f"cannot perturb {n_chars} characters of a length-{len(seq)} string")
    chars = list(seq)
    positions = rng.choice(len(chars), size=n_chars, replace=False)
    k = len(alphabet)
    for pos in positions:
        current = alphabet._index[chars[pos]]
        # draw from the k-1 other symbols by skipping over the current index
        j = int(rng.integers(k - 1))
        if j >= current:
            j += 1
        chars[pos] = alphabet.symbols[j]
    return "".join(chars)


@dataclass(frozen=True)
class Dataset:
    """Input strings over one alphabet with aligned targets."""

    inputs: tuple
    targets: np.ndarray
    alphabet: Alphabet
    names: tuple = field(default=None, compare=False)

    def __post_init__(self):
        inputs = tuple(self.inputs)
        targets = np.asarray(self.targets)
        if targets.ndim != 1 or len(targets) != len(inputs):
            raise LengthMismatch(f"{len(inputs)} inputs but targets of shape {targets.shape}")
        for x in inputs:
            validate(x, self.alphabet)
        targets = targets.copy()
        targets.setflags(write=False)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))

    @property
    def n(self):
        return len(self.inputs)

    def __len__(self):
        return len(self.inputs)

    def subset(self, indices):
        indices = list(indices)
        names = None if self.names is None else [self.names[i] for i in indices]
        return Dataset(
            tuple(self.inputs[i] for i in indices),
            self.targets[indices] if indices else self.targets[:0],
            self.alphabet,
            names,
        )

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.inputs == other.inputs
            and self.alphabet == other.alphabet
            and self.targets.dtype.kind == other.targets.dtype.kind
            and np.array_equal(self.targets, other.targets)
        )

    __hash__ = None
