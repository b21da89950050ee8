"""
Symmetric group S_n in one-line notation.

Permutations are 1-indexed: ``Permutation((2, 1, 3))`` sends 1 -> 2, 2 -> 1,
3 -> 3.  Composition is right-to-left, ``(p * r)(i) = p(r(i))``, and the
adjacent transposition (j, j+1) is written ``transposition(n, j)``.

A tuple ``t = (t_1, ..., t_n)`` acted on by ``p`` is ``t_p = (t_{p(1)}, ...,
t_{p(n)})``.  Weighted products over inversion pairs,

    Q_p(t) = prod_{i<j, p(i)>p(j)} Q(t_i, t_j),

are the scalar factors appearing in the deformed permutation operators.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MAX_DEGREE = 8


class PermutationError(ValueError):
    pass


class SizeLimitError(ValueError):
    """A requested object exceeds a configured size cap."""


@dataclass(frozen=True)
class Permutation:
    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.images)
        if len(images) == 0:
            raise PermutationError("permutation degree must be positive")
        if sorted(images) != list(range(1, len(images) + 1)):
            raise PermutationError(f"{images} is not a bijection of 1..{len(images)}")
        object.__setattr__(self, "images", images)

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: Permutation) -> Permutation:
        return compose(self, other)

    def __repr__(self):
        return f"Permutation({self.images})"

    @functools.cached_property
    def offsets(self) -> np.ndarray:
        """0-indexed images, for fancy indexing of tuple arrays."""
        arr = np.array(self.images, dtype=np.intp) - 1
        arr.flags.writeable = False
        return arr

    @functools.cached_property
    def inversion_pairs(self) -> tuple[tuple[int, int], ...]:
        im = self.images
        n = len(im)
        return tuple(
            (i + 1, j + 1) for i in range(n) for j in range(i + 1, n) if im[i] > im[j]
        )

    def inverse(self) -> Permutation:
        return inverse(self)

    def is_identity(self) -> bool:
        return all(v == i + 1 for i, v in enumerate(self.images))


def identity(n: int) -> Permutation:
    return Permutation(tuple(range(1, n + 1)))


def transposition(n: int, j: int) -> Permutation:
    """The adjacent transposition (j, j+1) in S_n."""
    if not 1 <= j <= n - 1:
        raise PermutationError(f"adjacent transposition index {j} out of range 1..{n - 1}")
    im = list(range(1, n + 1))
    im[j - 1], im[j] = im[j], im[j - 1]
    return Permutation(tuple(im))


@functools.lru_cache(maxsize=None)
def all_permutations(n: int) -> tuple[Permutation, ...]:
    """
    All n! elements of S_n, lexicographically ordered on their images.

    >>> [p.images for p in all_permutations(2)]
    [(1, 2), (2, 1)]
    """
    if not 1 <= n <= MAX_DEGREE:
        raise SizeLimitError(f"degree {n} outside 1..{MAX_DEGREE}")
    return tuple(Permutation(p) for p in itertools.permutations(range(1, n + 1)))


def inversions(p: Permutation) -> frozenset[tuple[int, int]]:
    """The set {(i, j) : i < j, p(i) > p(j)}."""
    return frozenset(p.inversion_pairs)


def length(p: Permutation) -> int:
    return len(p.inversion_pairs)


def compose(p: Permutation, r: Permutation) -> Permutation:
    if p.n != r.n:
        raise PermutationError(f"degree mismatch: {p.n} vs {r.n}")
    return Permutation(tuple(p.images[r.images[i] - 1] for i in range(p.n)))


def inverse(p: Permutation) -> Permutation:
    inv = [0] * p.n
    for i, v in enumerate(p.images):
        inv[v - 1] = i + 1
    return Permutation(tuple(inv))


def from_word(n: int, word: Sequence[int]) -> Permutation:
    """Compose adjacent transpositions left to right: pi_{j1} pi_{j2} ... pi_{jm}."""
    result = identity(n)
    for j in word:
        result = compose(result, transposition(n, j))
    return result


def reduced_word(p: Permutation) -> list[int]:
    """
    A reduced word for ``p``, found by repeatedly stripping the leftmost
    descent (bubble sort).

    Multiplying by pi_j on the right swaps positions j, j+1 of the images, so
    each step removes one inversion; the stripped letters read in reverse
    form the word.

    >>> reduced_word(Permutation((2, 1, 3)))
    [1]
    >>> reduced_word(Permutation((3, 2, 1)))
    [1, 2, 1]
    """
    im = list(p.images)
    stripped = []
    while True:
        for j in range(len(im) - 1):
            if im[j] > im[j + 1]:
                im[j], im[j + 1] = im[j + 1], im[j]
                stripped.append(j + 1)
                break
        else:
            break
    return stripped[::-1]


def permute_tuple(p: Permutation, t: Sequence[int]) -> tuple[int, ...]:
    """Return t_p = (t_{p(1)}, ..., t_{p(n)})."""
    if len(t) != p.n:
        raise PermutationError(f"tuple length {len(t)} != degree {p.n}")
    return tuple(t[v - 1] for v in p.images)


def q_pi_weight(K, p: Permutation, t: Sequence[int]) -> complex:
    """
    Q_p(t), the product of K.Q[t_i, t_j] over inversion pairs (i, j) of ``p``.

    ``K`` may be any kernel object with a ``Q`` matrix (or a bare square
    array).  The empty product is 1.
    """
    Q = getattr(K, "Q", K)
    Q = np.asarray(Q)
    d = Q.shape[0]
    if len(t) != p.n:
        raise PermutationError(f"tuple length {len(t)} != degree {p.n}")
    for x in t:
        if not 0 <= x < d:
            raise IndexError(f"tuple entry {x} outside 0..{d - 1}")
    w = complex(1.0)
    for i, j in p.inversion_pairs:
        w *= complex(Q[t[i - 1], t[j - 1]])
    return w


def inversion_weights(M: np.ndarray, p: Permutation, tuples: np.ndarray) -> np.ndarray:
    """Vectorised Q_p over the rows of ``tuples`` (shape (m, n), 0-indexed entries)."""
    w = np.ones(tuples.shape[0], dtype=complex)
    for i, j in p.inversion_pairs:
        w *= M[tuples[:, i - 1], tuples[:, j - 1]]
    return w


def factorial(n: int) -> int:
    return math.factorial(n)
