"""Gröbner engine for exact ideals and submodules of free A-modules.

Vectors are sparse dicts ``position -> Poly`` with the position-over-term
order: position 0 carries the highest precedence, monomials inside a
position are compared by a configurable monomial order (DegRevLex for
computation, Lex for final presentation).

Over field base rings this is plain Buchberger.  Over the integers strong
bases are computed.  The working structure is a pivot table with one
vector per leading (position, monomial) slot: admitting a vector fully
reduces it, then merges it into its slot by a Bézout exchange, so leading
coefficients fall to gcds eagerly and tails stay reduced -- without this
the ℤ-coefficient growth along reduction chains is catastrophic.
Critical pairs comprise S-pairs (lcm of leading terms) and GCD pairs
(Bézout combination of the leading coefficients); leading coefficients
are kept positive, remainders canonical non-negative.  Content is never
removed (dividing a generator by its content changes the module over ℤ).

Serialization: one generator per line, entries ``index: poly`` separated
by ``;``; rank-1 ideals omit the index.  Interreduced bases serialize
canonically, which is the fixed-point test used by the saturation loops.
"""

from __future__ import annotations

import heapq
import itertools

from .algebra import (
    DegRevLex,
    EliminationOrder,
    Lex,
    Poly,
    Ring,
    mono_deg,
    mono_div,
    mono_lcm,
    mono_mul,
)
from .errors import IncompatibleError

Vec = dict  # position -> Poly


def vec_leading(vec: Vec, okey):
    """(position, monomial, coefficient) of the leading term."""
    pos = min(vec)
    poly = vec[pos]
    mono = max(poly, key=okey)
    return pos, mono, poly[mono]


def vec_scale(ring: Ring, vec: Vec, c) -> Vec:
    out = {}
    for pos, p in vec.items():
        q = ring.scale(p, c)
        if q:
            out[pos] = q
    return out


def vec_copy(vec: Vec) -> Vec:
    return {pos: dict(p) for pos, p in vec.items()}


def _vec_axpy(ring: Ring, work: Vec, g: Vec, c, shift_mono=None) -> None:
    """work += c * x^shift_mono * g, destructively."""
    base = ring.base
    for pos, p in g.items():
        target = work.get(pos)
        if target is None:
            target = work[pos] = {}
        for m, c0 in p.items():
            mono = m if shift_mono is None else mono_mul(m, shift_mono)
            s = base.add(target.get(mono, 0), base.mul(c0, c))
            if s:
                target[mono] = s
            else:
                target.pop(mono, None)
        if not target:
            del work[pos]


def _normalize(ring: Ring, vec: Vec, okey) -> Vec:
    """Positive leading coefficient over ℤ; monic over fields."""
    if not vec:
        return vec
    _, _, lc = vec_leading(vec, okey)
    base = ring.base
    if base.is_field:
        if lc != base.norm(1):
            return vec_scale(ring, vec, base.inv(lc))
    elif lc < 0:
        return vec_scale(ring, vec, -1)
    return vec


def _freeze(vec: Vec):
    return tuple((pos, tuple(sorted(vec[pos].items()))) for pos in sorted(vec))


class PivotTable:
    """Working reduction structure: one pivot per leading (pos, mono) slot.

    ``nf`` is a read-only full normal form; zero result certifies
    membership in the module generated by the pivots.  ``admit`` merges a
    vector in, performing Euclidean exchanges at its slot so that the
    slot's leading coefficient drops to the gcd; displaced remainders are
    reprocessed.  ``on_event(pos, mono)`` fires for every installed or
    replaced slot (pair bookkeeping hooks into it).
    """

    def __init__(self, ring: Ring, okey, on_event=None):
        self.ring = ring
        self.okey = okey
        self.slots: dict = {}      # pos -> {mono: vec}
        self.version: dict = {}    # (pos, mono) -> int
        self.on_event = on_event
        self._index: dict = {}     # pos -> sorted [(mono, lc, vec)]
        self._dirty: set = set()

    def _candidates(self, pos):
        if pos in self._dirty or pos not in self._index:
            lst = []
            for mono, vec in self.slots.get(pos, {}).items():
                lst.append((mono, vec[pos][mono], vec))
            if self.ring.base.is_field:
                lst.sort(key=lambda e: self.okey(e[0]))
            else:
                lst.sort(key=lambda e: (e[1], self.okey(e[0])))
            self._index[pos] = lst
            self._dirty.discard(pos)
        return self._index[pos]

    def nf(self, vec: Vec) -> Vec:
        """Full normal form: no term reducible by any pivot's leading term."""
        ring = self.ring
        okey = self.okey
        base = ring.base
        work: Vec = {pos: dict(p) for pos, p in vec.items() if p}
        out: Vec = {}
        while work:
            pos = min(work)
            poly = work[pos]
            mono = max(poly, key=okey)
            coeff = poly[mono]
            hit = None
            for lm, lc, g in self._candidates(pos):
                shift_mono = mono_div(mono, lm)
                if shift_mono is None:
                    continue
                q, _r = base.quo_rem(coeff, lc)
                if not q:
                    continue
                hit = (shift_mono, q, g)
                break
            if hit is None:
                out.setdefault(pos, {})[mono] = coeff
                del poly[mono]
                if not poly:
                    del work[pos]
                continue
            shift_mono, q, g = hit
            _vec_axpy(ring, work, g, base.neg(q), shift_mono)
        return {pos: p for pos, p in out.items() if p}

    def _tail_reduce(self, vec: Vec) -> Vec:
        """Reduce everything below the leading term (which is kept intact)."""
        pos, mono, coeff = vec_leading(vec, self.okey)
        rest = vec_copy(vec)
        del rest[pos][mono]
        if not rest[pos]:
            del rest[pos]
        out = self.nf(rest)
        out.setdefault(pos, {})[mono] = coeff
        return out

    def _set(self, pos, mono, vec):
        self.slots.setdefault(pos, {})[mono] = vec
        self.version[(pos, mono)] = self.version.get((pos, mono), 0) + 1
        self._dirty.add(pos)
        if self.on_event:
            self.on_event(pos, mono)

    def admit(self, vec: Vec) -> bool:
        """Merge a vector into the table; True when the module grew."""
        ring = self.ring
        base = ring.base
        changed = False
        work = [vec]
        while work:
            v = self.nf(work.pop())
            if not v:
                continue
            v = _normalize(ring, v, self.okey)
            pos, mono, c = vec_leading(v, self.okey)
            slot = self.slots.get(pos, {}).get(mono)
            if slot is None:
                self._set(pos, mono, self._tail_reduce(v))
                changed = True
                continue
            lc = slot[pos][mono]
            # nf left 0 < c < lc (and over a field full reduction kills the
            # slot monomial entirely), so a Bézout exchange must fire
            g, s, t = base.gcd_bezout(lc, c)
            new: Vec = {}
            if s:
                _vec_axpy(ring, new, slot, s)
            if t:
                _vec_axpy(ring, new, v, t)
            old_res = vec_copy(slot)
            _vec_axpy(ring, old_res, new, base.neg(lc // g))
            v_res = v
            _vec_axpy(ring, v_res, new, base.neg(c // g))
            self._set(pos, mono, self._tail_reduce(_normalize(ring, new, self.okey)))
            changed = True
            if old_res:
                work.append(old_res)
            if v_res:
                work.append(v_res)
        return changed

    def reduce_all_tails(self) -> None:
        """Re-reduce every pivot tail against the whole table.

        Keeps coefficients small once the table has grown richer than when
        a pivot was installed; iterates to a fixed point.
        """
        changed = True
        while changed:
            changed = False
            for pos in sorted(self.slots):
                for mono in sorted(self.slots[pos], key=self.okey):
                    vec = self.slots[pos][mono]
                    red = self._tail_reduce(vec)
                    if red != vec:
                        self.slots[pos][mono] = red
                        self._dirty.add(pos)
                        changed = True

    def max_bits(self) -> int:
        bits = 0
        for slot in self.slots.values():
            for vec in slot.values():
                for p in vec.values():
                    for c in p.values():
                        b = abs(int(c)).bit_length() if isinstance(c, int) else 0
                        if b > bits:
                            bits = b
        return bits

    def pivots(self) -> list:
        out = []
        for pos in sorted(self.slots):
            for mono, vec in self.slots[pos].items():
                out.append(vec)
        return out


class GroebnerBasis:
    """An interreduced generating set with normal-form and membership queries."""

    def __init__(self, ring: Ring, order, rank: int, generators, reduced=True):
        self.ring = ring
        self.order = order
        self.rank = rank
        self.generators = tuple(generators)
        self.reduced = reduced
        self._table = PivotTable(ring, order.key)
        for g in self.generators:
            pos, mono, coeff = vec_leading(g, order.key)
            self._table.slots.setdefault(pos, {})[mono] = g
            self._table._dirty.add(pos)

    def check_compatible(self, vec_rank, ring):
        if vec_rank > self.rank:
            raise IncompatibleError(f"vector rank {vec_rank} exceeds basis rank {self.rank}")
        self.ring.check_compatible(ring)

    def normal_form(self, vec: Vec) -> Vec:
        """Fully reduced representative: no term reducible by any leading term."""
        if vec:
            self.check_compatible(max(vec) + 1, self.ring)
        return self._table.nf(vec)

    def contains(self, vec: Vec) -> bool:
        return not self.normal_form(vec)

    def serialize(self) -> str:
        lines = []
        for g in self.generators:
            entries = []
            for pos in sorted(g):
                text = self.ring.format(g[pos], self.order)
                entries.append(text if self.rank == 1 else f"{pos}: {text}")
            lines.append("; ".join(entries))
        return "\n".join(lines)

    def polys(self):
        """Rank-1 convenience: the generators as plain polynomials."""
        if self.rank != 1:
            raise IncompatibleError("polys() is for ideals (rank 1)")
        return [g.get(0, {}) for g in self.generators]

    def __eq__(self, other):
        return (
            isinstance(other, GroebnerBasis)
            and self.rank == other.rank
            and self.ring.compatible(other.ring)
            and self.serialize() == other.serialize()
        )

    def __len__(self):
        return len(self.generators)


def buchberger(gens, ring: Ring, order=None, rank: int = 1, progress=None) -> GroebnerBasis:
    """Interreduced (strong, over ℤ) Gröbner basis of the generated submodule."""
    if order is None:
        order = DegRevLex()
    okey = order.key
    is_field = ring.base.is_field

    queue: list = []
    seen_pairs: set = set()
    counter = itertools.count()
    table = PivotTable(ring, okey)

    def push_pairs(pos, mono):
        vec = table.slots[pos][mono]
        lc = vec[pos][mono]
        ver = table.version[(pos, mono)]
        for other_mono, other in table.slots[pos].items():
            if other_mono == mono:
                continue
            olc = other[pos][other_mono]
            over = table.version[(pos, other_mono)]
            key = (pos,) + tuple(sorted([(mono, ver), (other_mono, over)]))
            if key in seen_pairs:
                continue
            seen_pairs.add(key)
            m = mono_lcm(mono, other_mono)
            deg = mono_deg(m)
            if not (is_field and rank == 1 and m == mono_mul(mono, other_mono)):
                heapq.heappush(
                    queue, (deg, pos, 1, mono, other_mono, ver, over, next(counter))
                )
            if not is_field and lc % olc and olc % lc:
                heapq.heappush(
                    queue, (deg, pos, 0, mono, other_mono, ver, over, next(counter))
                )

    events: list = []
    table.on_event = lambda pos, mono: events.append((pos, mono))

    def drain_events():
        while events:
            pos, mono = events.pop()
            if mono in table.slots.get(pos, {}):
                push_pairs(pos, mono)

    for g in gens:
        if g:
            table.admit(vec_copy(g))
    drain_events()

    processed = 0
    while queue:
        _deg, pos, kind, mono_a, mono_b, ver_a, ver_b, _n = heapq.heappop(queue)
        slot_pos = table.slots.get(pos, {})
        f, g = slot_pos.get(mono_a), slot_pos.get(mono_b)
        if f is None or g is None:
            continue
        if table.version[(pos, mono_a)] != ver_a or table.version[(pos, mono_b)] != ver_b:
            continue  # superseded; fresh pairs were pushed at replacement time
        s = _gpair(ring, okey, f, g) if kind == 0 else _spair(ring, okey, f, g)
        if s:
            table.admit(s)
            drain_events()
        processed += 1
        if progress and processed % 2000 == 0:
            progress(f"  gb: {processed} pairs, {len(queue)} queued, "
                     f"{sum(len(v) for v in table.slots.values())} pivots")

    reduced = _interreduce(ring, okey, table.pivots())
    reduced.sort(key=lambda v: _leading_sort_key(v, okey))
    return GroebnerBasis(ring, order, rank, reduced)


def _spair(ring: Ring, okey, f: Vec, g: Vec):
    pos, mf, cf = vec_leading(f, okey)
    _, mg, cg = vec_leading(g, okey)
    m = mono_lcm(mf, mg)
    base = ring.base
    if base.is_field:
        qf, qg = base.inv(cf), base.inv(cg)
    else:
        gcd, _, _ = base.gcd_bezout(cf, cg)
        cl = cf * cg // gcd
        qf, qg = cl // cf, cl // cg
    s: Vec = {}
    _vec_axpy(ring, s, f, qf, mono_div(m, mf))
    _vec_axpy(ring, s, g, base.neg(qg), mono_div(m, mg))
    return s


def _gpair(ring: Ring, okey, f: Vec, g: Vec):
    """Bézout combination exposing gcd(lc_f, lc_g) at the lcm monomial."""
    pos, mf, cf = vec_leading(f, okey)
    _, mg, cg = vec_leading(g, okey)
    m = mono_lcm(mf, mg)
    base = ring.base
    _gcd, s, t = base.gcd_bezout(cf, cg)
    v: Vec = {}
    if s:
        _vec_axpy(ring, v, f, s, mono_div(m, mf))
    if t:
        _vec_axpy(ring, v, g, t, mono_div(m, mg))
    return v


def _leading_sort_key(vec: Vec, okey):
    pos, mono, coeff = vec_leading(vec, okey)
    return (-pos, okey(mono), coeff)


def _interreduce(ring: Ring, okey, basis) -> list:
    gens = [g for g in basis if g]
    while True:
        gens.sort(key=lambda v: _leading_sort_key(v, okey))
        changed = False
        out: list = []
        for k, g in enumerate(gens):
            table = PivotTable(ring, okey)
            for h in out + gens[k + 1:]:
                pos, mono, _c = vec_leading(h, okey)
                table.slots.setdefault(pos, {})[mono] = h
                table._dirty.add(pos)
            nf = _normalize(ring, table.nf(g), okey)
            if nf != g:
                changed = True
            if nf:
                out.append(nf)
        gens = out
        if not changed:
            return gens


# ---------------------------------------------------------------------------
# rank-1 conveniences

def ideal(polys, ring: Ring, order=None) -> GroebnerBasis:
    return buchberger([{0: p} for p in polys if p], ring, order=order, rank=1)


def ideal_sum(g1: GroebnerBasis, g2: GroebnerBasis) -> GroebnerBasis:
    if g1.rank != 1 or g2.rank != 1:
        raise IncompatibleError("ideal_sum needs rank-1 bases")
    g1.ring.check_compatible(g2.ring)
    return buchberger(list(g1.generators) + list(g2.generators), g1.ring, g1.order, rank=1)


def is_member(vec: Vec, gb: GroebnerBasis) -> bool:
    return gb.contains(vec)


def member_poly(p: Poly, gb: GroebnerBasis) -> bool:
    return gb.contains({0: p} if p else {})


def represent(gb: GroebnerBasis, order) -> GroebnerBasis:
    """Recompute the canonical basis under a different monomial order."""
    return buchberger(list(gb.generators), gb.ring, order, rank=gb.rank)


# ---------------------------------------------------------------------------
# elimination, intersections, colon ideals

def poly_divexact(ring: Ring, f: Poly, g: Poly, okey=None) -> Poly:
    """f / g when g divides f exactly (domain coefficients)."""
    if okey is None:
        okey = Lex().key
    base = ring.base
    lm = max(g, key=okey)
    lc = g[lm]
    rest = dict(f)
    quot: Poly = {}
    while rest:
        m = max(rest, key=okey)
        c = rest[m]
        shift_mono = mono_div(m, lm)
        if shift_mono is None:
            raise IncompatibleError("inexact polynomial division")
        if base.is_field:
            q = base.mul(c, base.inv(lc))
        else:
            q, r = divmod(c, lc)
            if r:
                raise IncompatibleError("inexact polynomial division")
        quot[shift_mono] = q
        ring.add_scaled_inplace(rest, ring.mul_term(g, shift_mono, q), base.norm(-1))
    return quot


def intersect_with_principal(I: GroebnerBasis, f: Poly) -> list:
    """Generators of I ∩ (f), via the elimination variable t."""
    ring = I.ring
    ring_t = ring.with_elimination_var()
    t = ring_t.var("t")
    one_minus_t = ring_t.sub(ring_t.one, t)
    gens = [{0: ring_t.mul(t, ring_t.lift(p, ring))} for p in I.polys()]
    gens.append({0: ring_t.mul(one_minus_t, ring_t.lift(f, ring))})
    order_t = EliminationOrder(DegRevLex())
    gbt = buchberger(gens, ring_t, order_t, rank=1)
    out = []
    for p in gbt.polys():
        if all(m[0] == 0 for m in p):
            out.append({m[1:]: c for m, c in p.items()})
    return out


def colon_ideal(I: GroebnerBasis, f: Poly) -> GroebnerBasis:
    """(I : f) = {g : f*g ∈ I}, over a domain: (I ∩ (f)) / f."""
    ring = I.ring
    inter = intersect_with_principal(I, f)
    quotients = [poly_divexact(ring, p, f, I.order.key) for p in inter]
    return buchberger([{0: p} for p in quotients], ring, I.order, rank=1)


def is_regular_element(I: GroebnerBasis, f: Poly) -> bool:
    """True when multiplication by f is injective on A/I."""
    if not f or member_poly(f, I):
        return member_poly(I.ring.one, I)  # f ≡ 0: regular only in the zero ring
    return colon_ideal(I, f) == I
