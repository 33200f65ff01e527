"""Words of the free monoid on signed generators.

A word is a tuple of nonzero ints: letter ``+i`` is the generator x_i,
letter ``-i`` the formal inverse symbol x_i^-1 (an independent letter, not
a group inverse).  The empty tuple is the identity.

A word is *reduced* when it splits as B_1 B_2 ... B_m where every block
B_k is a descending consecutive run x_i^± x_{i-1}^± ... x_j^± and the top
indices of the blocks strictly increase.  Reduced words of the rank-n
monoid form the canonical module basis; their enumeration order here is
the basis indexing used everywhere else.

Text format: whitespace-separated signed integers, e.g. ``2 -1 3`` for
x_2 x_1^-1 x_3; an empty string is the identity.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from .errors import BadRangeError, NotReducedError

Word = tuple  # tuple[int, ...]

#: Generator indices are capped to catch runaway shifts.
MAX_INDEX = 16


def weight(w: Word) -> int:
    """Sum of generator indices, signs ignored."""
    return sum(abs(l) for l in w)


def aux_weight(w: Word) -> int:
    """Sum of (1-based position) * index; grows under far-commutation swaps."""
    return sum(j * abs(l) for j, l in enumerate(w, start=1))


def measure(w: Word) -> tuple:
    """Termination measure: lexicographic (weight, weight^2 - aux_weight).

    Every rewrite step strictly decreases it on each produced word: rules
    that shorten drop the weight, the commutation rule keeps the weight
    and raises the auxiliary weight, which is bounded by weight^2.
    """
    wt = weight(w)
    return (wt, wt * wt - aux_weight(w))


def _runs(w: Word) -> list:
    """Split into maximal descending consecutive runs."""
    runs = []
    start = 0
    for k in range(1, len(w) + 1):
        if k == len(w) or abs(w[k]) != abs(w[k - 1]) - 1:
            runs.append(w[start:k])
            start = k
    return runs


def block_decomposition(w: Word) -> tuple:
    """The unique block form of a reduced word.

    Raises NotReducedError when the word has no block form.  Block
    boundaries of a valid decomposition are forced to sit exactly at the
    non-descent points, so maximal runs are the only candidate.
    """
    runs = _runs(w)
    tops = [abs(r[0]) for r in runs]
    if any(t2 <= t1 for t1, t2 in zip(tops, tops[1:])):
        raise NotReducedError(f"word {w} is not in block form")
    return tuple(runs)


def is_reduced(w: Word) -> bool:
    try:
        block_decomposition(w)
    except NotReducedError:
        return False
    return True


def enumerate_S(i: int, j: int) -> list:
    """All sign choices of the descending run x_i x_{i-1} ... x_j.

    Sign tuples are lexicographic with +1 before -1, so the all-positive
    run comes first.
    """
    if not 1 <= j <= i:
        raise BadRangeError(f"need i >= j >= 1, got ({i}, {j})")
    indices = range(i, j - 1, -1)
    out = []
    for signs in itertools.product((1, -1), repeat=i - j + 1):
        out.append(tuple(s * k for s, k in zip(signs, indices)))
    return out


def enumerate_S_full(i: int) -> list:
    """The block alphabet: identity, then the runs ending at i, i-1, ..., 1."""
    if i < 1:
        raise BadRangeError(f"need i >= 1, got {i}")
    out = [()]
    for j in range(i, 0, -1):
        out.extend(enumerate_S(i, j))
    return out


@lru_cache(maxsize=None)
def enumerate_reduced(n: int) -> tuple:
    """All reduced words of the rank-n monoid, in canonical basis order.

    Blocks are drawn as the product S_1 x S_2 x ... x S_{n-1} with the
    last block varying fastest; the position of a word in this tuple is
    its module basis index.
    """
    if n < 1:
        raise BadRangeError(f"need n >= 1, got {n}")
    alphabets = [enumerate_S_full(i) for i in range(1, n)]
    out = []
    for combo in itertools.product(*alphabets):
        out.append(tuple(itertools.chain.from_iterable(combo)))
    return tuple(out)


@lru_cache(maxsize=None)
def reduced_index(n: int) -> dict:
    """Word -> basis index over the rank-n reduced words."""
    return {w: k for k, w in enumerate(enumerate_reduced(n))}


def shift(w: Word, n: int):
    """Shift every index by n; None when a letter is annihilated (index <= 0)."""
    out = []
    for l in w:
        i = abs(l) + n
        if i <= 0:
            return None
        if i > MAX_INDEX:
            raise BadRangeError(f"shift past strand limit {MAX_INDEX}: {w} by {n}")
        out.append(i if l > 0 else -i)
    return tuple(out)


def parse_word(text: str) -> Word:
    w = tuple(int(tok) for tok in text.split())
    for l in w:
        if l == 0:
            raise BadRangeError("0 is not a letter")
        if abs(l) > MAX_INDEX:
            raise BadRangeError(f"letter {l} beyond strand limit {MAX_INDEX}")
    return w


def format_word(w: Word) -> str:
    return " ".join(str(l) for l in w)


def word_display(w: Word) -> str:
    """Human-readable form: x2.x1^-1, or 1 for the identity."""
    if not w:
        return "1"
    return ".".join(f"x{l}" if l > 0 else f"x{-l}^-1" for l in w)
