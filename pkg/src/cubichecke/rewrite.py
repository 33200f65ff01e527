"""Word reduction for the cubic quotient algebra.

Eight rule families rewrite any word into an exact linear combination of
block-form reduced words (a and b are the cubic parameters):

  1  x_i x_i^-1 -> 1,  x_i^-1 x_i -> 1
  2  x_i^2      -> a x_i - b + x_i^-1
  3  x_i^-2     -> b x_i^-1 - a + x_i
  4  x_{i+1}^e1 x_i^e2 x_{i+1}^e3 -> x_i^e3 x_{i+1}^e2 x_i^e1   (e2 in {e1, e3})
  5  x_{i+1} x_i^-1 x_{i+1}       -> 20-term cubic-defect combination
  6  x_{i+1}^-1 x_i x_{i+1}^-1    -> the rule-5 table under bar + a<->b swap
  7  x_{i+1}^e1 x_i^e2 W x_{i+1}^e3 -> V W,  where W is a descending run
     headed by x_{i-1} (a block-alphabet element below i) and V is the
     rule 4/5/6 right-hand side of x_{i+1}^e1 x_i^e2 x_{i+1}^e3
  8  x_j^e1 x_i^e2 -> x_i^e2 x_j^e1   (j > i+1, far commutation)

Rules 1-7 strictly drop the weight of every produced word; rule 8 keeps
the weight and strictly raises the auxiliary weight, so the measure
(weight, weight^2 - aux_weight) proves termination and is asserted on
every applied step.

The normal-form map depends on the redex-selection strategy; an engine
pins one strategy (leftmost position by default) so that every derived
object -- module seeds, saturation operators, the trace ideal -- is
reproducible.  Linear combinations are plain dicts Word -> Poly.
"""

from __future__ import annotations

from .algebra import Poly, Ring
from .errors import BadRangeError
from .words import Word, is_reduced, measure, weight

LinComb = dict  # Word -> Poly

RULE_NAMES = {
    1: "cancel",
    2: "square",
    3: "inverse-square",
    4: "braid-flip",
    5: "cubic-defect",
    6: "cubic-defect-bar",
    7: "separated-flip",
    8: "far-commute",
}


def lc_add_scaled(ring: Ring, acc: LinComb, lc: LinComb, coeff: Poly) -> None:
    """acc += coeff * lc, destructively; drops cancelled words."""
    for w, p in lc.items():
        cur = acc.get(w)
        s = ring.mul(p, coeff) if cur is None else ring.add(cur, ring.mul(p, coeff))
        if s:
            acc[w] = s
        else:
            acc.pop(w, None)


def lc_scale(ring: Ring, lc: LinComb, coeff: Poly) -> LinComb:
    out: LinComb = {}
    lc_add_scaled(ring, out, lc, coeff)
    return out


def lc_sub(ring: Ring, lc1: LinComb, lc2: LinComb) -> LinComb:
    out = {w: dict(p) for w, p in lc1.items()}
    lc_add_scaled(ring, out, lc2, ring.const(-1))
    return out


def lc_weight(lc: LinComb) -> int:
    """max word weight over the support (0 for the zero combination)."""
    return max((weight(w) for w in lc), default=0)


def _sign(l: int) -> int:
    return 1 if l > 0 else -1


def find_redex(w: Word, leftmost: bool = True):
    """Locate the redex the strategy fires on.

    Returns (position, rule, i, length) -- `i` the lower generator index
    of the matched pattern, `length` the number of letters consumed -- or
    None when the word is reduced.  At any single position at most one
    rule can match, so the rule-number tie-break never actually fires;
    the strategy is the position scan direction.
    """
    positions = range(len(w)) if leftmost else range(len(w) - 1, -1, -1)
    for p in positions:
        m = _match_at(w, p)
        if m is not None:
            return m
    return None


def _match_at(w: Word, p: int):
    if p + 1 >= len(w):
        return None
    l0, l1 = w[p], w[p + 1]
    i0, i1 = abs(l0), abs(l1)
    if i1 == i0:
        if l0 == -l1:
            return (p, 1, i0, 2)
        return (p, 2, i0, 2) if l0 > 0 else (p, 3, i0, 2)
    if i1 == i0 - 1:
        i = i1
        if p + 2 < len(w) and abs(w[p + 2]) == i0:
            rule = _three_letter_rule(_sign(l0), _sign(l1), _sign(w[p + 2]))
            return (p, rule, i, 3)
        # rule 7: a descending run headed by x_{i-1}, then the closing x_{i+1}
        q = p + 2
        if i >= 2 and q < len(w) and abs(w[q]) == i - 1:
            expect = i - 1
            while q < len(w) and abs(w[q]) == expect:
                q += 1
                expect -= 1
            if q < len(w) and abs(w[q]) == i0:
                return (p, 7, i, q - p + 1)
        return None
    if i1 <= i0 - 2:
        return (p, 8, i1, 2)
    return None


def _three_letter_rule(e1: int, e2: int, e3: int) -> int:
    if e2 == e1 or e2 == e3:
        return 4
    return 5 if e1 > 0 else 6


class ReductionEngine:
    """Memoized normal-form map over one coefficient ring and one strategy."""

    def __init__(self, ring: Ring, strategy: str = "leftmost", check_measure: bool = True):
        if strategy not in ("leftmost", "rightmost"):
            raise BadRangeError(f"unknown strategy {strategy!r}")
        self.ring = ring
        self.strategy = strategy
        self.leftmost = strategy == "leftmost"
        self.check_measure = check_measure
        self._memo: dict = {}
        self._cubic: dict = {}
        self._minus_one = ring.const(-1)

    # -- rule tables ----------------------------------------------------------

    def cubic_table(self, i: int, barred: bool) -> LinComb:
        """Right-hand side of rule 5 (barred=False) or rule 6 (barred=True)."""
        key = (i, barred)
        tbl = self._cubic.get(key)
        if tbl is None:
            tbl = _cubic_rhs(self.ring, i, barred)
            self._cubic[key] = tbl
        return tbl

    def rule_rhs(self, rule: int, i: int, signs=(), inner_word=()) -> LinComb:
        """The exact replacement for one rule instance at lower index i.

        `signs` carries (e1, e2, e3) for rules 4 and 7; `inner_word` the
        separating run W for rule 7.
        """
        ring = self.ring
        one = ring.one
        if rule == 1:
            return {(): one}
        if rule == 2:
            return {(i,): ring.alpha_poly(), (): ring.neg(ring.beta_poly()), (-i,): one}
        if rule == 3:
            return {(-i,): ring.beta_poly(), (): ring.neg(ring.alpha_poly()), (i,): one}
        if rule == 4:
            e1, e2, e3 = signs
            return {(e3 * i, e2 * (i + 1), e1 * i): one}
        if rule == 5:
            return dict(self.cubic_table(i, False))
        if rule == 6:
            return dict(self.cubic_table(i, True))
        if rule == 7:
            e1, e2, e3 = signs
            inner_rule = _three_letter_rule(e1, e2, e3)
            if inner_rule == 4:
                v = self.rule_rhs(4, i, signs)
            else:
                v = self.rule_rhs(inner_rule, i)
            return {word + inner_word: p for word, p in v.items()}
        if rule == 8:
            raise BadRangeError("rule 8 is positional; use step()")
        raise BadRangeError(f"unknown rule {rule}")

    # -- single step ------------------------------------------------------------

    def step(self, w: Word, redex) -> list:
        """Apply one redex; returns [(word, coefficient poly), ...]."""
        p, rule, i, length = redex
        pre, suf = w[:p], w[p + length:]
        if rule == 8:
            out = [(pre + (w[p + 1], w[p]) + suf, self.ring.one)]
        else:
            if rule in (4, 7):
                signs = (_sign(w[p]), _sign(w[p + 1]), _sign(w[p + length - 1]))
                inner = w[p + 2: p + length - 1] if rule == 7 else ()
                rhs = self.rule_rhs(rule, i, signs, inner)
            else:
                rhs = self.rule_rhs(rule, i)
            out = [(pre + word + suf, c) for word, c in rhs.items()]
        if self.check_measure:
            m0 = measure(w)
            for word, _ in out:
                m1 = measure(word)
                assert m1 < m0, f"measure did not drop: {w} -> {word}"
        return out

    # -- normal form --------------------------------------------------------------

    def reduce_word(self, w: Word) -> LinComb:
        """Normal form of a single word (memoized; treat the result as frozen)."""
        memo = self._memo
        hit = memo.get(w)
        if hit is not None:
            return hit
        ring = self.ring
        steps: dict = {}
        stack = [w]
        while stack:
            cur = stack[-1]
            if cur in memo:
                stack.pop()
                continue
            children = steps.get(cur)
            if children is None:
                redex = find_redex(cur, self.leftmost)
                if redex is None:
                    memo[cur] = {cur: ring.one}
                    stack.pop()
                    continue
                children = self.step(cur, redex)
                steps[cur] = children
            pending = [word for word, _ in children if word not in memo]
            if pending:
                stack.extend(pending)
                continue
            acc: LinComb = {}
            for word, coeff in children:
                lc_add_scaled(ring, acc, memo[word], coeff)
            memo[cur] = acc
            del steps[cur]
            stack.pop()
        return memo[w]

    def reduce(self, x) -> LinComb:
        """Normal form of a word or linear combination; the image is supported
        on reduced words and the map is linear and idempotent."""
        if isinstance(x, tuple):
            return dict(self.reduce_word(x))
        out: LinComb = {}
        for w, coeff in x.items():
            lc_add_scaled(self.ring, out, self.reduce_word(w), coeff)
        return out


def _cubic_rhs(ring: Ring, i: int, barred: bool) -> LinComb:
    """The 20-term table replacing x_{i+1} x_i^-1 x_{i+1} (or its barred twin).

    The barred table is the plain one under letter inversion plus the
    parameter swap a <-> b.
    """
    a, b = ring.alpha_poly(), ring.beta_poly()
    x, X, y, Y = (i,), (-i,), (i + 1,), (-(i + 1),)
    if barred:
        a, b = b, a
        x, X = X, x
        y, Y = Y, y
    one = ring.one
    m_one = ring.const(-1)
    terms: LinComb = {}

    def put(word, poly):
        if poly:
            cur = terms.get(word)
            terms[word] = ring.add(cur, poly) if cur else poly

    put((), ring.sub(ring.scale(a, 2), ring.mul(b, b)))          # 2a - b^2
    put(x, m_one)
    put(y, m_one)
    c = ring.neg(ring.sub(ring.mul(a, a), b))                    # -(a^2 - b)
    put(X, c)
    put(Y, c)
    put(x + y, b)
    put(y + x, b)
    for word in (x + Y, y + X, X + y, Y + x):
        put(word, a)
    c = ring.sub(ring.mul(a, b), one)                            # ab - 1
    put(X + Y, c)
    put(Y + X, c)
    put(x + y + x, ring.neg(a))
    put(X + y + x, m_one)
    put(x + Y + x, m_one)
    put(x + y + X, m_one)
    put(X + Y + x, ring.neg(b))
    put(x + Y + X, ring.neg(b))
    put(X + Y + X, ring.sub(a, ring.mul(b, b)))                  # a - b^2
    return terms


def reduced_support(lc: LinComb) -> bool:
    return all(is_reduced(w) for w in lc)
