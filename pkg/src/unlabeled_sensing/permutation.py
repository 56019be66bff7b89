"""Permutations of ``{0..n-1}`` stored as index mappings.

``Permutation(mapping)`` sends index ``i`` to ``mapping[i]``.  Its matrix
form ``Π`` has ``Π[mapping[i], i] = 1``, so ``Π @ M`` moves row ``i`` of
``M`` to row ``mapping[i]``.  Indices are 0-based in memory and 1-based in
the text format.
"""
from __future__ import annotations

import numpy as np

from .errors import InfeasibleHamming, SizeMismatch


class Permutation:
    __slots__ = ("_map",)

    def __init__(self, mapping):
        m = np.array(mapping, dtype=np.int64).ravel()
        n = m.size
        if n == 0:
            raise ValueError("empty permutation")
        seen = np.zeros(n, dtype=bool)
        if m.min() < 0 or m.max() >= n:
            raise ValueError("mapping entries must lie in 0..n-1")
        seen[m] = True
        if not seen.all():
            raise ValueError("mapping is not a bijection")
        m.setflags(write=False)
        self._map = m

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))

    @property
    def mapping(self) -> np.ndarray:
        return self._map

    @property
    def size(self) -> int:
        return self._map.size

    def __len__(self) -> int:
        return self._map.size

    def __call__(self, i: int) -> int:
        return int(self._map[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.size == other.size and bool(np.array_equal(self._map, other._map))

    def __hash__(self) -> int:
        return hash(self._map.tobytes())

    def __repr__(self) -> str:
        return f"Permutation({self._map.tolist()})"

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self._map)
        inv[self._map] = np.arange(self.size)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """``self ∘ other``: apply ``other`` first."""
        _check_sizes(self, other)
        return Permutation(self._map[other._map])

    def matrix(self) -> np.ndarray:
        """Dense 0/1 matrix; for tests and small examples only."""
        n = self.size
        P = np.zeros((n, n))
        P[self._map, np.arange(n)] = 1.0
        return P

    def to_text(self) -> str:
        return " ".join(str(int(v) + 1) for v in self._map)

    @classmethod
    def from_text(cls, line: str) -> "Permutation":
        return cls(np.array([int(tok) for tok in line.split()]) - 1)


def _check_sizes(p1: Permutation, p2: Permutation) -> None:
    if p1.size != p2.size:
        raise SizeMismatch(f"permutation sizes differ: {p1.size} vs {p2.size}")


def hamming(p1: Permutation, p2: Permutation) -> int:
    """Number of indices where the two mappings disagree."""
    _check_sizes(p1, p2)
    return int(np.count_nonzero(p1.mapping != p2.mapping))


def apply_rows(p: Permutation, M) -> np.ndarray:
    """Return ``Π @ M``: row ``i`` of ``M`` lands in row ``p(i)``."""
    M = np.asarray(M)
    if M.shape[0] != p.size:
        raise SizeMismatch(f"permutation of size {p.size} applied to {M.shape[0]} rows")
    out = np.empty_like(M)
    out[p.mapping] = M
    return out


def random_derangement(k: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform fixed-point-free permutation of ``range(k)`` (``k >= 2``), by rejection."""
    idx = np.arange(k)
    while True:
        s = rng.permutation(k)
        if not np.any(s == idx):
            return s


def sample_with_hamming(n: int, h: int, rng: np.random.Generator) -> Permutation:
    """Permutation at Hamming distance exactly ``h`` from the identity.

    The displaced set is a uniform ``h``-subset of ``range(n)`` and the
    permutation restricted to it is a uniform derangement.
    """
    if h == 1 or h < 0 or h > n:
        raise InfeasibleHamming(f"no permutation of size {n} is at Hamming distance {h}")
    mapping = np.arange(n)
    if h == 0:
        return Permutation(mapping)
    moved = np.sort(rng.choice(n, size=h, replace=False))
    mapping[moved] = moved[random_derangement(h, rng)]
    return Permutation(mapping)
