"""Exact coefficient arithmetic.

Base rings: the integers, the rationals, and prime fields.  On top of the
base ring sits the trace coefficient ring A = k[u, v], extended by the two
cubic-relation parameters as extra variables whenever they are kept
symbolic instead of being specialized to constants.

Polynomials are sparse and exact: a plain dict mapping exponent tuples to
nonzero base-ring coefficients.  The variable universe is fixed to

    v > u > b > a

in that precedence order (``a`` and ``b`` are the cubic parameters); a
:class:`Ring` activates the subset it needs and all its exponent tuples
have exactly that many slots.  An auxiliary variable ``t`` with highest
precedence can be prepended for elimination (colon-ideal) computations.

Text format: ``+``/``-`` separated terms, ``^`` powers, ``*`` optional,
e.g. ``4u^2+4v`` or ``2au-b^2+1``.  :func:`Ring.parse` and
:func:`Ring.format` are mutually inverse on canonical forms.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from .errors import BadRangeError, RingMismatchError

Mono = tuple  # exponent tuple over the ring's active variables
Poly = dict   # Mono -> nonzero base-ring coefficient


# ---------------------------------------------------------------------------
# base domains

class Integers:
    is_field = False
    char = 0

    def norm(self, c):
        return int(c)

    def add(self, x, y):
        return x + y

    def mul(self, x, y):
        return x * y

    def neg(self, x):
        return -x

    def is_unit(self, c):
        return c in (1, -1)

    def inv(self, c):
        if not self.is_unit(c):
            raise ZeroDivisionError(f"{c} is not a unit in ZZ")
        return c

    def quo_rem(self, c, a):
        """Euclidean division by a positive leading coefficient.

        Remainders are the canonical non-negative representatives [0, a).
        """
        return divmod(c, a)

    def gcd_bezout(self, x, y):
        """Return (g, s, t) with g = gcd(x, y) = s*x + t*y, g > 0."""
        old_r, r = x, y
        old_s, s = 1, 0
        old_t, t = 0, 1
        while r:
            q = old_r // r
            old_r, r = r, old_r - q * r
            old_s, s = s, old_s - q * s
            old_t, t = t, old_t - q * t
        if old_r < 0:
            old_r, old_s, old_t = -old_r, -old_s, -old_t
        return old_r, old_s, old_t

    def parse(self, s):
        return int(s)

    def __repr__(self):
        return "ZZ"


class Rationals:
    is_field = True
    char = 0

    def norm(self, c):
        return Fraction(c)

    def add(self, x, y):
        return x + y

    def mul(self, x, y):
        return x * y

    def neg(self, x):
        return -x

    def is_unit(self, c):
        return c != 0

    def inv(self, c):
        return Fraction(1) / c

    def quo_rem(self, c, a):
        return c / a, Fraction(0)

    def parse(self, s):
        return Fraction(s)

    def __repr__(self):
        return "QQ"


class PrimeField:
    is_field = True

    def __init__(self, p):
        if p < 2 or any(p % q == 0 for q in range(2, int(math.isqrt(p)) + 1)):
            raise BadRangeError(f"{p} is not prime")
        self.char = p

    def norm(self, c):
        return int(c) % self.char

    def add(self, x, y):
        return (x + y) % self.char

    def mul(self, x, y):
        return (x * y) % self.char

    def neg(self, x):
        return (-x) % self.char

    def is_unit(self, c):
        return c % self.char != 0

    def inv(self, c):
        return pow(c, -1, self.char)

    def quo_rem(self, c, a):
        return self.mul(c, self.inv(a)), 0

    def parse(self, s):
        return int(s) % self.char

    def __repr__(self):
        return f"GF({self.char})"


ZZ = Integers()
QQ = Rationals()

_gf_cache: dict[int, PrimeField] = {}


def GF(p):
    if p not in _gf_cache:
        _gf_cache[p] = PrimeField(p)
    return _gf_cache[p]


# ---------------------------------------------------------------------------
# monomial orders

def mono_mul(m1, m2):
    return tuple(x + y for x, y in zip(m1, m2))


def mono_div(m1, m2):
    """m1 / m2, or None when m2 does not divide m1."""
    out = []
    for x, y in zip(m1, m2):
        if x < y:
            return None
        out.append(x - y)
    return tuple(out)


def mono_lcm(m1, m2):
    return tuple(max(x, y) for x, y in zip(m1, m2))


def mono_deg(m):
    return sum(m)


class Lex:
    """Lexicographic order over the ring's variable precedence."""

    kind = "lex"

    def __init__(self, perm=None):
        self.perm = perm

    def key(self, m):
        if self.perm is None:
            return m
        return tuple(m[i] for i in self.perm)


class DegRevLex:
    """Total degree first, ties by reverse lexicographic comparison."""

    kind = "degrevlex"

    def __init__(self, perm=None):
        self.perm = perm

    def key(self, m):
        if self.perm is not None:
            m = tuple(m[i] for i in self.perm)
        return (sum(m), tuple(-e for e in reversed(m)))


class EliminationOrder:
    """First variable dominates; ties broken by an inner order on the rest."""

    kind = "elimination"

    def __init__(self, inner):
        self.inner = inner

    def key(self, m):
        return (m[0], self.inner.key(m[1:]))


def compare_monomials(order, m1, m2):
    """-1, 0 or 1 comparing m1 against m2 under the given order."""
    k1, k2 = order.key(m1), order.key(m2)
    if k1 < k2:
        return -1
    if k1 > k2:
        return 1
    return 0


def order_from_names(order, ring, names):
    """Build `order` with an explicit variable precedence list.

    `names` must be a permutation of the ring's active variables.
    """
    if sorted(names) != sorted(ring.vars):
        raise BadRangeError(f"{names} is not a permutation of {ring.vars}")
    perm = tuple(ring.vars.index(n) for n in names)
    return order(perm=perm)


# ---------------------------------------------------------------------------
# the coefficient ring

_TERM_RE = re.compile(
    r"([+-]?)\s*(\d+(?:/\d+)?)?\s*((?:[a-z](?:\^\d+)?\s*\*?\s*)*)", re.ASCII
)
_VAR_RE = re.compile(r"([a-z])(?:\^(\d+))?")


class Ring:
    """Polynomial ring over a base domain in a subset of (v, u, b, a).

    ``alpha`` / ``beta`` are either ``None`` (kept as the variables ``a`` /
    ``b``) or constants of the base domain.  Polynomials belonging to
    different Ring instances must never be mixed; ``compatible`` checks
    guard the public entry points.
    """

    def __init__(self, base, alpha=None, beta=None, _extra=()):
        self.base = base
        self.alpha = None if alpha is None else base.norm(alpha)
        self.beta = None if beta is None else base.norm(beta)
        varlist = list(_extra) + ["v", "u"]
        if beta is None:
            varlist.append("b")
        if alpha is None:
            varlist.append("a")
        self.vars = tuple(varlist)
        self.nvars = len(self.vars)
        self.zero_mono = (0,) * self.nvars
        self.one = {self.zero_mono: base.norm(1)}

    # -- construction -------------------------------------------------------

    def const(self, c) -> Poly:
        c = self.base.norm(c)
        return {self.zero_mono: c} if c else {}

    def var(self, name) -> Poly:
        i = self.vars.index(name)
        mono = tuple(1 if j == i else 0 for j in range(self.nvars))
        return {mono: self.base.norm(1)}

    def alpha_poly(self) -> Poly:
        return self.var("a") if self.alpha is None else self.const(self.alpha)

    def beta_poly(self) -> Poly:
        return self.var("b") if self.beta is None else self.const(self.beta)

    def compatible(self, other) -> bool:
        return (
            self.base is other.base
            and self.vars == other.vars
            and self.alpha == other.alpha
            and self.beta == other.beta
        )

    def check_compatible(self, other):
        if not self.compatible(other):
            raise RingMismatchError(f"{self!r} vs {other!r}")

    # -- arithmetic ----------------------------------------------------------

    def add(self, p, q) -> Poly:
        if len(p) < len(q):
            p, q = q, p
        out = dict(p)
        base = self.base
        for m, c in q.items():
            s = base.add(out.get(m, 0), c)
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return out

    def neg(self, p) -> Poly:
        neg = self.base.neg
        return {m: neg(c) for m, c in p.items()}

    def sub(self, p, q) -> Poly:
        return self.add(p, self.neg(q))

    def mul(self, p, q) -> Poly:
        out: Poly = {}
        base = self.base
        for m1, c1 in p.items():
            for m2, c2 in q.items():
                m = mono_mul(m1, m2)
                s = base.add(out.get(m, 0), base.mul(c1, c2))
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return out

    def scale(self, p, c) -> Poly:
        c = self.base.norm(c)
        if not c:
            return {}
        base = self.base
        out = {}
        for m, c0 in p.items():
            s = base.mul(c0, c)
            if s:
                out[m] = s
        return out

    def mul_term(self, p, mono, c) -> Poly:
        """p * (c * x^mono); c must be nonzero."""
        base = self.base
        out = {}
        for m, c0 in p.items():
            s = base.mul(c0, c)
            if s:
                out[mono_mul(m, mono)] = s
        return out

    def add_scaled_inplace(self, acc, p, c):
        """acc += c * p, destructively on the plain-dict acc."""
        base = self.base
        for m, c0 in p.items():
            s = base.add(acc.get(m, 0), base.mul(c0, c))
            if s:
                acc[m] = s
            else:
                acc.pop(m, None)

    # -- specialization ------------------------------------------------------

    def specialize_ring(self, assignments) -> "Ring":
        for name in assignments:
            if name not in self.vars:
                raise BadRangeError(f"variable {name!r} not active in {self!r}")
            if name not in ("a", "b"):
                raise BadRangeError("only the cubic parameters can be specialized")
        alpha = self.alpha if "a" not in assignments else assignments["a"]
        beta = self.beta if "b" not in assignments else assignments["b"]
        return Ring(self.base, alpha=alpha, beta=beta)

    def specialize(self, p, assignments) -> tuple["Ring", Poly]:
        """Substitute constants for some parameters; returns (new ring, image)."""
        target = self.specialize_ring(assignments)
        keep = [i for i, n in enumerate(self.vars) if n not in assignments]
        vals = {self.vars.index(n): self.base.norm(v) for n, v in assignments.items()}
        base = self.base
        out: Poly = {}
        for m, c in p.items():
            for i, v in vals.items():
                if m[i]:
                    c = base.mul(c, v ** m[i]) if v else 0
                if not c:
                    break
            if not c:
                continue
            mono = tuple(m[i] for i in keep)
            s = base.add(out.get(mono, 0), c)
            if s:
                out[mono] = s
            else:
                out.pop(mono, None)
        return target, out

    def swap_vars(self, p, n1, n2) -> Poly:
        """Image of p under the variable exchange n1 <-> n2."""
        i, j = self.vars.index(n1), self.vars.index(n2)
        out = {}
        for m, c in p.items():
            mm = list(m)
            mm[i], mm[j] = mm[j], mm[i]
            out[tuple(mm)] = c
        return out

    def lift(self, p, source: "Ring") -> Poly:
        """Re-index a polynomial of `source` into this ring (a superset of vars)."""
        idx = [self.vars.index(n) for n in source.vars]
        out = {}
        for m, c in p.items():
            mono = [0] * self.nvars
            for j, e in zip(idx, m):
                mono[j] = e
            out[tuple(mono)] = c
        return out

    def with_elimination_var(self) -> "Ring":
        return Ring(self.base, alpha=self.alpha, beta=self.beta, _extra=("t",))

    # -- text ------------------------------------------------------------------

    def format(self, p, order=None) -> str:
        """Canonical text: terms descending in `order` (default Lex),
        variables alphabetically inside a term."""
        if not p:
            return "0"
        if order is None:
            order = Lex()
        parts = []
        for m in sorted(p, key=order.key, reverse=True):
            c = p[m]
            body = ""
            for name, e in sorted(zip(self.vars, m)):
                if e == 1:
                    body += name
                elif e > 1:
                    body += f"{name}^{e}"
            neg = c < 0
            mag = -c if neg else c
            coeff = "" if (mag == 1 and body) else str(mag)
            term = coeff + body
            if not parts:
                parts.append(("-" if neg else "") + term)
            else:
                parts.append(("-" if neg else "+") + term)
        return "".join(parts)

    def parse(self, s) -> Poly:
        s = s.strip()
        if s in ("", "0"):
            return {}
        out: Poly = {}
        pos = 0
        while pos < len(s):
            m = _TERM_RE.match(s, pos)
            if m is None or m.end() == pos:
                raise BadRangeError(f"cannot parse polynomial at ...{s[pos:]!r}")
            sign, num, varpart = m.groups()
            c = self.base.parse(num) if num else self.base.norm(1)
            if sign == "-":
                c = self.base.neg(c)
            mono = [0] * self.nvars
            for name, exp in _VAR_RE.findall(varpart or ""):
                if name not in self.vars:
                    raise BadRangeError(f"unknown variable {name!r} in {s!r}")
                mono[self.vars.index(name)] += int(exp) if exp else 1
            self.add_scaled_inplace(out, {tuple(mono): self.base.norm(1)}, c)
            pos = m.end()
        return out

    def __repr__(self):
        spec = []
        spec.append(repr(self.base))
        spec.append("a" if self.alpha is None else f"a={self.alpha}")
        spec.append("b" if self.beta is None else f"b={self.beta}")
        return f"Ring({', '.join(spec)})"


def ring_from_flags(ring_name: str, alpha: str, beta: str) -> Ring:
    """Build a Ring from CLI-style flags: ring z|q|f<p>, parameters sym|<const>."""
    name = ring_name.lower()
    if name == "z":
        base = ZZ
    elif name == "q":
        base = QQ
    elif name.startswith("f") and name[1:].isdigit():
        base = GF(int(name[1:]))
    else:
        raise BadRangeError(f"unknown ring {ring_name!r}")
    def param(text):
        return None if text == "sym" else base.parse(text)
    return Ring(base, alpha=param(alpha), beta=param(beta))
