"""Markov reductions and the trace.

The strand-elimination map tau_n sends a reduced rank-n word containing
x_{n-1}^{±1} (at most one occurrence, always heading the last block) to
u (resp. v) times the reduced product of the flanks; words without the
top generator pass through.  Composing the eliminations down to one
strand gives the full trace, a linear functional into the coefficient
ring A = k[u, v].

On top of these sit the two operator families driving the module
saturations:

* insertion operators, indexed by the 31 block-alphabet words of level 4:
  y -> tau_5(x . shift(y)), acting on the rank-315 module spanned by the
  level-4 reduced words;
* tensor operators, indexed by pairs (d1, d2) in {-1,0,1}^2, acting on the
  rank-9 module spanned by pairs of level-2 reduced words.

Both are realized as sparse column matrices so that saturation rounds are
plain exact matrix-vector products.
"""

from __future__ import annotations

import itertools

from .algebra import Poly, Ring
from .errors import BasisEscapeError, NotInDomainError
from .rewrite import LinComb, ReductionEngine, lc_add_scaled
from .words import (
    Word,
    enumerate_reduced,
    enumerate_S_full,
    reduced_index,
    shift,
)

Vec = dict  # basis index -> Poly

#: basis of the rank-9 tensor module: pairs of level-2 reduced words
TENSOR_WORDS = ((), (1,), (-1,))


def tensor_index(w1: Word, w2: Word) -> int:
    return TENSOR_WORDS.index(w1) * 3 + TENSOR_WORDS.index(w2)


def tensor_pair(k: int) -> tuple:
    return TENSOR_WORDS[k // 3], TENSOR_WORDS[k % 3]


def markov_step(eng: ReductionEngine, n: int, x: LinComb) -> LinComb:
    """Eliminate strand n: x_{n-1} picks up u, its inverse picks up v.

    The input is reduced first, so any combination over the rank-n monoid
    is accepted; a reduced word can hold at most one x_{n-1}^{±1}.
    """
    if n < 2:
        raise NotInDomainError(f"no strand to eliminate at n={n}")
    ring = eng.ring
    u, v = ring.var("u"), ring.var("v")
    out: LinComb = {}
    for w, coeff in eng.reduce(x).items():
        if any(abs(l) >= n for l in w):
            raise NotInDomainError(f"word {w} not in the rank-{n} monoid")
        hits = [k for k, l in enumerate(w) if abs(l) == n - 1]
        if not hits:
            lc_add_scaled(ring, out, {w: ring.one}, coeff)
            continue
        if len(hits) > 1:
            raise NotInDomainError(f"{w}: several top letters in a reduced word")
        k = hits[0]
        factor = u if w[k] > 0 else v
        rest = eng.reduce_word(w[:k] + w[k + 1:])
        lc_add_scaled(ring, out, rest, ring.mul(coeff, factor))
    return out


def trace_word(eng: ReductionEngine, w: Word) -> Poly:
    """Full trace of a single word (memoized on the engine)."""
    memo = getattr(eng, "_trace_memo", None)
    if memo is None:
        memo = eng._trace_memo = {}
    hit = memo.get(w)
    if hit is not None:
        return hit
    lc = eng.reduce_word(w)
    n = 1 + max((abs(l) for word in lc for l in word), default=0)
    while n >= 2:
        lc = markov_step(eng, n, lc)
        n -= 1
    value = lc.get((), {})
    memo[w] = value
    return value


def full_trace(eng: ReductionEngine, x) -> Poly:
    """Linear extension of the trace to combinations (and bare words)."""
    if isinstance(x, tuple):
        return dict(trace_word(eng, x))
    ring = eng.ring
    out: Poly = {}
    for w, coeff in x.items():
        t = trace_word(eng, w)
        for m, c in ring.mul(t, coeff).items():
            s = ring.base.add(out.get(m, 0), c)
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


# ---------------------------------------------------------------------------
# tensor module (rank 9)

def tensor_trace(eng: ReductionEngine, y: Vec) -> Poly:
    """Trace of a tensor element: the pair concatenates before tracing."""
    ring = eng.ring
    out: Poly = {}
    for k, coeff in y.items():
        w1, w2 = tensor_pair(k)
        t = trace_word(eng, w1 + w2)
        for m, c in ring.mul(t, coeff).items():
            s = ring.base.add(out.get(m, 0), c)
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def _exp_word(index: int, e: int) -> Word:
    return () if e == 0 else (index * e,) if e in (1, -1) else None


def tensor_operator(eng: ReductionEngine, delta) -> dict:
    """Column matrix of the tensor operator for delta = (d1, d2).

    Column (e1, e2) maps to x_1^{d1} (x) tau_3(x_2^{e1} x_1^{d2} x_2^{e2}),
    the elimination distributed over the second slot.
    """
    d1, d2 = delta
    cache = getattr(eng, "_tensor_ops", None)
    if cache is None:
        cache = eng._tensor_ops = {}
    hit = cache.get((d1, d2))
    if hit is not None:
        return hit
    ring = eng.ring
    first = _exp_word(1, d1)
    mat: dict = {}
    for k in range(9):
        w1, w2 = tensor_pair(k)
        e1 = 0 if not w1 else (1 if w1[0] > 0 else -1)
        e2 = 0 if not w2 else (1 if w2[0] > 0 else -1)
        word = _exp_word(2, e1) + _exp_word(1, d2) + _exp_word(2, e2)
        second = markov_step(eng, 3, {word: ring.one})
        col: Vec = {}
        for w, c in second.items():
            col[tensor_index(first, w)] = c
        if col:
            mat[k] = col
    cache[(d1, d2)] = mat
    return mat


def tensor_operator_family(eng: ReductionEngine) -> list:
    """All nine tensor operators, in the fixed (d1, d2) product order."""
    return [
        tensor_operator(eng, d)
        for d in itertools.product((-1, 0, 1), repeat=2)
    ]


# ---------------------------------------------------------------------------
# insertion operators on the rank-315 module

def rho_word(eng: ReductionEngine, x: Word, y) -> Vec:
    """y -> tau_5(x . shift(y)) expressed in the level-4 reduced basis.

    `y` may be a basis vector (dict index -> Poly) or a bare word of the
    level-4 basis.  `x` is normally one of the 31 block-alphabet words of
    level 4, but any rank-5 word is accepted for experimentation.
    """
    mat = insertion_operator(eng, x)
    if isinstance(y, tuple):
        y = {reduced_index(4)[y]: eng.ring.one}
    return apply_operator(eng.ring, mat, y)


def insertion_operator(eng: ReductionEngine, x: Word) -> dict:
    """Sparse column matrix of y -> tau_5(x . shift(y)) (memoized)."""
    cache = getattr(eng, "_insertion_ops", None)
    if cache is None:
        cache = eng._insertion_ops = {}
    hit = cache.get(x)
    if hit is not None:
        return hit
    ring = eng.ring
    basis = enumerate_reduced(4)
    index = reduced_index(4)
    mat: dict = {}
    for k, b in enumerate(basis):
        image = markov_step(eng, 5, {x + shift(b, 1): ring.one})
        col: Vec = {}
        for w, c in image.items():
            j = index.get(w)
            if j is None:
                raise BasisEscapeError(f"tau_5 image {w} escaped the level-4 basis")
            col[j] = c
        if col:
            mat[k] = col
    cache[x] = mat
    return mat


def insertion_operator_family(eng: ReductionEngine) -> list:
    """The 31 insertion operators, in block-alphabet order."""
    return [insertion_operator(eng, x) for x in enumerate_S_full(4)]


def apply_operator(ring: Ring, mat: dict, vec: Vec) -> Vec:
    """Exact sparse matrix-vector product."""
    out: Vec = {}
    for k, coeff in vec.items():
        col = mat.get(k)
        if not col:
            continue
        for j, c in col.items():
            s = ring.add(out.get(j, {}), ring.mul(c, coeff))
            if s:
                out[j] = s
            else:
                out.pop(j, None)
    return out
