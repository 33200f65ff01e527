"""Flat-coordinate kernel for the big module saturations (internal).

The rank-315 saturation is too hot for nested dict vectors, so vectors
here are single dicts mapping a packed integer key to a coefficient:

    key = (position << 6*nvars) | packed exponent tuple (6 bits per slot)

Monomial multiplication is then a plain integer addition of packed keys,
which is what makes reduction and operator application cheap.  Exponents
are capped at 63 per variable; the saturation driver checks the cap.

Three coefficient kinds are supported: exact integers ("zz"), prime
fields ("gf"), and the chain ring ℤ/2^K ("z2k", used as a warm-start
heuristic for the integer case; every odd is a unit there, so pivots
normalize to power-of-two leading coefficients and arithmetic never
grows).  Reduction is head-first: a vector is reduced until its leading
term has no reducer, which preserves sparsity; a reduction that reaches
zero is a full membership certificate, which is all the saturation loop
needs.
"""

from __future__ import annotations

from .algebra import Ring
from .errors import BadRangeError, IterationCapError

DEG_BITS = 6
DEG_MASK = (1 << DEG_BITS) - 1


class FlatModule:
    """Packing/unpacking and operator conversion for one ring and rank."""

    def __init__(self, ring: Ring, rank: int):
        self.ring = ring
        self.rank = rank
        self.nvars = ring.nvars
        self.monobits = DEG_BITS * self.nvars
        self.monomask = (1 << self.monobits) - 1
        self._unpack_memo: dict = {}
        self._rank_memo: dict = {}

    def pack_mono(self, mono) -> int:
        out = 0
        for e in mono:
            if e > DEG_MASK:
                raise BadRangeError(f"exponent {e} exceeds the packing cap")
            out = (out << DEG_BITS) | e
        return out

    def unpack_mono(self, pm: int):
        hit = self._unpack_memo.get(pm)
        if hit is None:
            out = []
            x = pm
            for _ in range(self.nvars):
                out.append(x & DEG_MASK)
                x >>= DEG_BITS
            hit = tuple(reversed(out))
            self._unpack_memo[pm] = hit
        return hit

    def mono_rank(self, pm: int) -> int:
        """Packed DegRevLex rank: higher rank = larger monomial."""
        hit = self._rank_memo.get(pm)
        if hit is None:
            unp = self.unpack_mono(pm)
            code = 0
            for e in unp:  # reversed exponents, negated, scanned last-first
                code = (code << DEG_BITS) | (DEG_MASK - e)
            hit = (sum(unp) << self.monobits) | code
            self._rank_memo[pm] = hit
        return hit

    def sort_key(self, key: int) -> int:
        """Position-over-term: lower position dominates, then DegRevLex."""
        pos = key >> self.monobits
        return ((self.rank - pos) << (self.monobits + DEG_BITS * self.nvars + 4)) | self.mono_rank(
            key & self.monomask
        )

    # -- conversions ---------------------------------------------------------

    def from_vec(self, vec, mod_kind=None, mod_param=None) -> dict:
        """Nested (pos -> poly) vector to a flat dict."""
        out = {}
        mb = self.monobits
        for pos, poly in vec.items():
            base = pos << mb
            for mono, c in poly.items():
                c = int(c)
                if mod_kind == "gf":
                    c %= mod_param
                elif mod_kind == "z2k":
                    c &= mod_param
                if c:
                    out[base | self.pack_mono(mono)] = c
        return out

    def to_vec(self, flat: dict) -> dict:
        out: dict = {}
        mb = self.monobits
        for key, c in flat.items():
            out.setdefault(key >> mb, {})[self.unpack_mono(key & self.monomask)] = c
        return out

    def convert_operator(self, mat: dict) -> dict:
        """Column matrix (pos -> pos -> poly) to flat form:
        source pos -> list of (target key base, int coefficient)."""
        mb = self.monobits
        out = {}
        for src, col in mat.items():
            entries = []
            for tpos, poly in col.items():
                tbase = tpos << mb
                for mono, c in poly.items():
                    entries.append((tbase | self.pack_mono(mono), int(c)))
            out[src] = entries
        return out


class FlatTable:
    """Pivot table over flat vectors; one pivot per leading key."""

    def __init__(self, module: FlatModule, kind: str, param=0):
        if kind not in ("zz", "gf", "z2k"):
            raise BadRangeError(f"unknown coefficient kind {kind!r}")
        self.m = module
        self.kind = kind
        self.param = param  # p for "gf", mask 2^K - 1 for "z2k"
        self.slots: dict = {}      # pos -> {packed_mono: flat vec}
        self._cands: dict = {}     # pos -> sorted [(pmono, unpacked, lc, vec)]
        self._dirty: set = set()
        self._div_memo: dict = {}

    # -- coefficient helpers --------------------------------------------------

    def _quo(self, c, lc):
        """Reduction quotient of c by a normalized leading coefficient."""
        if self.kind == "gf":
            return (c * pow(lc, -1, self.param)) % self.param
        if self.kind == "z2k":
            return c >> (lc.bit_length() - 1)  # lc is a power of two
        return c // lc

    def _normalize(self, lead_key, vec):
        """Positive lead (zz), monic (gf), power-of-two lead (z2k)."""
        c = vec[lead_key]
        if self.kind == "zz":
            if c < 0:
                return {k: -v for k, v in vec.items()}
            return vec
        if self.kind == "gf":
            if c == 1:
                return vec
            p = self.param
            inv = pow(c, -1, p)
            return {k: (v * inv) % p for k, v in vec.items()}
        odd = c >> _v2(c)
        if odd == 1:
            return vec
        mask = self.param
        inv = pow(odd, -1, mask + 1)
        return {k: (v * inv) & mask for k, v in vec.items()}

    # -- reduction -------------------------------------------------------------

    def _candidates(self, pos):
        if pos in self._dirty or pos not in self._cands:
            m = self.m
            lst = []
            for pm, vec in self.slots.get(pos, {}).items():
                lst.append((pm, m.unpack_mono(pm), vec[(pos << m.monobits) | pm], vec))
            if self.kind == "gf":
                lst.sort(key=lambda e: m.mono_rank(e[0]))
            else:
                lst.sort(key=lambda e: (abs(e[2]), m.mono_rank(e[0])))
            self._cands[pos] = lst
            self._dirty.discard(pos)
        return self._cands[pos]

    def _divides(self, pm_small, pm_big):
        key = (pm_small, pm_big)
        hit = self._div_memo.get(key, -1)
        if hit != -1:
            return hit
        a = self.m.unpack_mono(pm_small)
        b = self.m.unpack_mono(pm_big)
        ok = all(x <= y for x, y in zip(a, b))
        res = (pm_big - pm_small) if ok else None
        self._div_memo[key] = res
        return res

    def head_reduce(self, v: dict):
        """Reduce the leading term until irreducible; returns (lead, v).

        A zero result certifies membership in the pivot span.  Only heads
        are rewritten, so sparsity survives.
        """
        m = self.m
        sk = m.sort_key
        mb = m.monobits
        mask = m.monomask
        kind = self.kind
        param = self.param
        while v:
            k = max(v, key=sk)
            pos = k >> mb
            pm = k & mask
            c = v[k]
            hit = None
            for pmono, _unp, lc, g in self._candidates(pos):
                if pmono == pm:
                    sh = 0
                else:
                    sh = self._divides(pmono, pm)
                    if sh is None:
                        continue
                q = self._quo(c, lc)
                if q:
                    hit = (sh, q, g)
                    break
            if hit is None:
                return k, v
            sh, q, g = hit
            if kind == "gf":
                for gk, gc in g.items():
                    kk = gk + sh
                    nc = (v.get(kk, 0) - q * gc) % param
                    if nc:
                        v[kk] = nc
                    else:
                        v.pop(kk, None)
            elif kind == "z2k":
                for gk, gc in g.items():
                    kk = gk + sh
                    nc = (v.get(kk, 0) - q * gc) & param
                    if nc:
                        v[kk] = nc
                    else:
                        v.pop(kk, None)
            else:
                for gk, gc in g.items():
                    kk = gk + sh
                    nc = v.get(kk, 0) - q * gc
                    if nc:
                        v[kk] = nc
                    else:
                        v.pop(kk, None)
        return None, v

    def reduces_to_zero(self, v: dict) -> bool:
        lead, _ = self.head_reduce(dict(v))
        return lead is None

    # -- admission ----------------------------------------------------------------

    def _set(self, pos, pm, vec):
        self.slots.setdefault(pos, {})[pm] = vec
        self._dirty.add(pos)

    def admit(self, v: dict) -> bool:
        """Merge a vector; True when a pivot was installed or replaced."""
        m = self.m
        mb = m.monobits
        mask = m.monomask
        changed = False
        work = [v]
        while work:
            lead, v = self.head_reduce(work.pop())
            if lead is None:
                continue
            v = self._normalize(lead, v)
            pos = lead >> mb
            pm = lead & mask
            slot = self.slots.get(pos, {}).get(pm)
            if slot is None:
                self._set(pos, pm, v)
                changed = True
                continue
            # head_reduce leaves 0 < c < lc at an occupied slot (never over
            # a field), so a Euclidean exchange must fire
            c = v[lead]
            lc = slot[lead]
            if self.kind == "z2k":
                # both leads are powers of two and c < lc, so c's lead wins
                new, old = v, slot
                self._set(pos, pm, new)
                res = _axpy_new(self.kind, self.param, old, new, -(lc >> (c.bit_length() - 1)))
                if res:
                    work.append(res)
                changed = True
                continue
            g, s, t = _bezout(lc, c)
            new = {}
            if s:
                _axpy(self.kind, self.param, new, slot, s)
            if t:
                _axpy(self.kind, self.param, new, v, t)
            new = self._normalize(lead, new)
            old_res = _axpy_new(self.kind, self.param, slot, new, -(lc // g))
            v_res = _axpy_new(self.kind, self.param, v, new, -(c // g))
            self._set(pos, pm, new)
            changed = True
            if old_res:
                work.append(old_res)
            if v_res:
                work.append(v_res)
        return changed

    # -- inspection ------------------------------------------------------------------

    def pivot_items(self):
        for pos in sorted(self.slots):
            for pm in sorted(self.slots[pos]):
                yield self.slots[pos][pm]

    def pivot_count(self) -> int:
        return sum(len(s) for s in self.slots.values())

    def max_bits(self) -> int:
        return max(
            (abs(c).bit_length() for v in self.pivot_items() for c in v.values()),
            default=0,
        )

    def max_degree(self) -> int:
        m = self.m
        deg = 0
        for v in self.pivot_items():
            for k in v:
                d = sum(m.unpack_mono(k & m.monomask))
                if d > deg:
                    deg = d
        return deg


def _v2(c: int) -> int:
    return (c & -c).bit_length() - 1


def _bezout(x, y):
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


def _axpy(kind, param, acc: dict, g: dict, c) -> None:
    if kind == "gf":
        for k, gc in g.items():
            nc = (acc.get(k, 0) + c * gc) % param
            if nc:
                acc[k] = nc
            else:
                acc.pop(k, None)
    elif kind == "z2k":
        for k, gc in g.items():
            nc = (acc.get(k, 0) + c * gc) & param
            if nc:
                acc[k] = nc
            else:
                acc.pop(k, None)
    else:
        for k, gc in g.items():
            nc = acc.get(k, 0) + c * gc
            if nc:
                acc[k] = nc
            else:
                acc.pop(k, None)


def _axpy_new(kind, param, base: dict, g: dict, c) -> dict:
    out = dict(base)
    _axpy(kind, param, out, g, c)
    return out


def apply_flat_operator(kind, param, module: FlatModule, flat_op: dict, v: dict) -> dict:
    out: dict = {}
    mb = module.monobits
    mask = module.monomask
    if kind == "gf":
        for k, c in v.items():
            col = flat_op.get(k >> mb)
            if not col:
                continue
            pm = k & mask
            for tbase, tc in col:
                kk = tbase + pm
                nc = (out.get(kk, 0) + tc * c) % param
                if nc:
                    out[kk] = nc
                else:
                    out.pop(kk, None)
    elif kind == "z2k":
        for k, c in v.items():
            col = flat_op.get(k >> mb)
            if not col:
                continue
            pm = k & mask
            for tbase, tc in col:
                kk = tbase + pm
                nc = (out.get(kk, 0) + tc * c) & param
                if nc:
                    out[kk] = nc
                else:
                    out.pop(kk, None)
    else:
        for k, c in v.items():
            col = flat_op.get(k >> mb)
            if not col:
                continue
            pm = k & mask
            for tbase, tc in col:
                kk = tbase + pm
                nc = out.get(kk, 0) + tc * c
                if nc:
                    out[kk] = nc
                else:
                    out.pop(kk, None)
    return out


def flat_saturation(
    module: FlatModule,
    seeds,
    operators,
    *,
    kind: str,
    param=0,
    preload=None,
    max_rounds: int = 48,
    progress=None,
    tag: str = "module",
    on_round=None,
):
    """Reduction-closure saturation: admit operator images until a full
    sweep admits nothing.  Returns (table, rounds).

    `preload` vectors are admitted before the seeds (warm start).  A zero
    admission count in a round is an exact closure certificate for the
    current pivot span, since every image head-reduced to zero.
    """
    import time as _time

    table = FlatTable(module, kind, param)
    flat_ops = [module.convert_operator(op) for op in operators]
    for v in preload or ():
        table.admit(module.from_vec(v, kind, param))
    for v in seeds:
        fv = module.from_vec(v, kind, param)
        if fv:
            table.admit(fv)
    for rounds in range(1, max_rounds + 1):
        t0 = _time.monotonic()
        snapshot = list(table.pivot_items())
        admitted = 0
        for op in flat_ops:
            for g in snapshot:
                img = apply_flat_operator(kind, param, module, op, g)
                if img:
                    lead, red = table.head_reduce(img)
                    if lead is not None:
                        table.admit(red)
                        admitted += 1
        if table.max_degree() > DEG_MASK - 4:
            raise BadRangeError("degree approaching the packing cap")
        if progress:
            progress(
                f"[{tag}:{kind}] round {rounds}: pivots {table.pivot_count()}, "
                f"admitted {admitted}, bits {table.max_bits()}, "
                f"{_time.monotonic() - t0:.1f}s"
            )
        if on_round:
            on_round(table, rounds, admitted)
        if not admitted:
            return table, rounds
    raise IterationCapError(f"flat saturation [{tag}] exceeded {max_rounds} rounds")
