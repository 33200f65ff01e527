"""Seed families, fixed-point saturations, and the trace ideal.

The trace functional is well defined exactly modulo the ideal generated
by the traces of two operator-closed submodules:

* the *word-side module* (rank 315, spanned by the level-4 reduced
  words), seeded by the associativity defects of the reduction map on
  triple block products and closed under the 31 insertion operators;
* the *tensor-side module* (rank 9), seeded by the pairing defects of the
  two-strand eliminations and closed under the 9 tensor operators.

Saturation is breadth-first: a round applies every operator to every
current generator, admits the images that do not reduce to zero, and
stops at a round with no admissions -- an exact closure certificate.

Over a field the word-side loop runs directly in exact field arithmetic.
Over the integers sequential exact elimination suffers catastrophic
coefficient growth, so the loop first runs over the chain ring ℤ/2^24 as
a warm start, then replays exact integer rounds on the lifted pivots
until stable.  The lifted span is certified to *contain* the module
(seeds reduce to zero, closure round is exact), which upper-bounds the
trace ideal; a separate sweep of honest operator images lower-bounds it;
the two bounds must agree, which certifies the result unconditionally.
"""

from __future__ import annotations

import itertools
import json
import os
import time
from dataclasses import dataclass

from .algebra import DegRevLex, Lex, Poly, Ring
from .errors import BasisEscapeError, CubicHeckeError, IterationCapError
from .groebner import GroebnerBasis, buchberger, ideal, member_poly, represent
from .rewrite import LinComb, ReductionEngine, lc_sub
from .satcore import FlatModule, FlatTable, apply_flat_operator, flat_saturation
from .trace import (
    Vec,
    apply_operator,
    insertion_operator_family,
    markov_step,
    tensor_index,
    tensor_operator_family,
    tensor_trace,
    trace_word,
)
from .words import enumerate_reduced, enumerate_S_full, reduced_index, shift

WARM_MODULUS_BITS = 24


@dataclass
class SaturationState:
    """One checkpointed round of a saturation loop."""

    iteration: int
    basis: GroebnerBasis
    pending_images: int
    stable: bool


# ---------------------------------------------------------------------------
# seed families

def seed_word_defects(eng: ReductionEngine) -> list:
    """Associativity defects of the reduction map on block triples.

    For the punctured block alphabets (level 3, shifted level 2, twice
    shifted level 1) the two ways of reducing a triple product X3 X2 X1
    need not agree; the 14 * 6 * 2 = 168 differences, expressed over the
    level-4 reduced basis, seed the word-side module.  Triples on which
    both orders agree give the zero vector and are kept in the count.
    """
    ring = eng.ring
    index = reduced_index(4)
    s3 = enumerate_S_full(3)[1:]
    s2 = [shift(w, 1) for w in enumerate_S_full(2)[1:]]
    s1 = [shift(w, 2) for w in enumerate_S_full(1)[1:]]
    out = []
    for x3 in s3:
        for x2 in s2:
            r32 = eng.reduce_word(x3 + x2)
            for x1 in s1:
                left = eng.reduce({w + x1: c for w, c in r32.items()})
                r21 = eng.reduce_word(x2 + x1)
                right = eng.reduce({x3 + w: c for w, c in r21.items()})
                diff = lc_sub(ring, left, right)
                vec: Vec = {}
                for w, c in diff.items():
                    j = index.get(w)
                    if j is None:
                        raise BasisEscapeError(f"defect word {w} outside the level-4 basis")
                    vec[j] = c
                out.append(vec)
    return out


def seed_tensor_defects(eng: ReductionEngine) -> list:
    """Pairing defects seeding the tensor-side module.

    For signs (e1, e3) in {±1}^2 and exponents (e2, e4) in {-1,0,1}^2 the
    element  tau_3(x2^e1 x1^e2 x2^e3) (x) x1^e4  -  x1^e2 (x) tau_3(x2^e3
    x1^e4 x2^e1), expressed in the rank-9 tensor basis; 36 vectors.
    """
    ring = eng.ring
    out = []
    for e1, e2, e3, e4 in itertools.product((1, -1), (-1, 0, 1), (1, -1), (-1, 0, 1)):
        vec: Vec = {}

        def put(k, c):
            s = ring.add(vec.get(k, {}), c)
            if s:
                vec[k] = s
            else:
                vec.pop(k, None)

        w_right = _exp(1, e4)
        for w, c in markov_step(eng, 3, {_exp(2, e1) + _exp(1, e2) + _exp(2, e3): ring.one}).items():
            put(tensor_index(w, w_right), c)
        w_left = _exp(1, e2)
        for w, c in markov_step(eng, 3, {_exp(2, e3) + _exp(1, e4) + _exp(2, e1): ring.one}).items():
            put(tensor_index(w_left, w), ring.neg(c))
        out.append(vec)
    return out


def _exp(index: int, e: int):
    return () if e == 0 else (index * e,)


# ---------------------------------------------------------------------------
# generic saturation on top of the canonical Gröbner engine (small modules)

def saturate(
    seeds,
    operators,
    ring: Ring,
    order=None,
    rank: int = 1,
    *,
    max_rounds: int = 64,
    checkpoint_dir=None,
    tag: str = "module",
    resume: bool = False,
    progress=None,
) -> GroebnerBasis:
    """Smallest operator-closed submodule containing the seeds.

    Breadth-first rounds against interreduced canonical bases; stable
    when every operator image of every generator reduces to zero.
    Identically-zero seed vectors are dropped at entry.  Raises
    IterationCap when max_rounds is exhausted.
    """
    if order is None:
        order = DegRevLex()
    start = 0
    gb = None
    if resume and checkpoint_dir:
        loaded = _load_checkpoint(checkpoint_dir, tag, ring, order, rank)
        if loaded is not None:
            start, gb = loaded
            if progress:
                progress(f"[{tag}] resumed at round {start}, basis size {len(gb)}")
    if gb is None:
        gb = buchberger([v for v in seeds if v], ring, order, rank=rank)
    for iteration in range(start, max_rounds):
        t0 = time.monotonic()
        images = []
        for op in operators:
            for g in gb.generators:
                nf = gb.normal_form(apply_operator(ring, op, g))
                if nf:
                    images.append(nf)
        stable = not images
        state = SaturationState(iteration, gb, len(images), stable)
        if checkpoint_dir:
            _save_checkpoint(checkpoint_dir, tag, state)
        if progress:
            progress(
                f"[{tag}] round {iteration}: basis {len(gb)}, "
                f"new images {len(images)}, {time.monotonic() - t0:.1f}s"
            )
        if stable:
            return gb
        gb = buchberger(list(gb.generators) + images, ring, order, rank=rank)
    raise IterationCapError(
        f"saturation [{tag}] not stable after {max_rounds} rounds",
        checkpoint=checkpoint_dir,
    )


def verify_closure(gb: GroebnerBasis, operators, ring: Ring) -> bool:
    """Certificate pass: every operator image of every generator reduces to 0."""
    for op in operators:
        for g in gb.generators:
            if gb.normal_form(apply_operator(ring, op, g)):
                return False
    return True


def _checkpoint_path(checkpoint_dir, tag):
    return os.path.join(checkpoint_dir, f"{tag}-state.json")


def _save_checkpoint(checkpoint_dir, tag, state: SaturationState):
    os.makedirs(checkpoint_dir, exist_ok=True)
    payload = {
        "tag": tag,
        "iteration": state.iteration,
        "rank": state.basis.rank,
        "ring": repr(state.basis.ring),
        "stable": state.stable,
        "pending_images": state.pending_images,
        "basis": state.basis.serialize().splitlines(),
    }
    path = _checkpoint_path(checkpoint_dir, tag)
    with open(path + ".tmp", "w") as fh:
        json.dump(payload, fh, indent=1)
    os.replace(path + ".tmp", path)


def _load_checkpoint(checkpoint_dir, tag, ring, order, rank):
    path = _checkpoint_path(checkpoint_dir, tag)
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("rank") != rank or payload.get("ring") != repr(ring):
        return None
    gens = [_parse_vec(line, ring, rank) for line in payload["basis"]]
    gb = GroebnerBasis(ring, order, rank, gens)
    # the saved basis predates the round's admissions, so replay that round
    return payload["iteration"], gb


def _parse_vec(line: str, ring: Ring, rank: int) -> Vec:
    vec: Vec = {}
    for chunk in line.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if rank == 1:
            vec[0] = ring.parse(chunk)
        else:
            pos_text, poly_text = chunk.split(":", 1)
            vec[int(pos_text)] = ring.parse(poly_text)
    return vec


# ---------------------------------------------------------------------------
# word-side module at rank 315 (flat kernel)

def word_module_pivots(
    eng: ReductionEngine,
    *,
    max_rounds: int = 48,
    checkpoint_dir=None,
    resume: bool = False,
    progress=None,
):
    """Certified pivot set spanning (at least) the word-side module.

    Returns (pivots, honest): over a field the pivots are honest module
    elements and span it exactly.  Over the integers they come from a
    warm start over ℤ/2^24 replayed exactly, so the span provably
    *contains* the module (seeds admitted, closure round exact over ℤ)
    but the trace ideal they generate must be confirmed against the
    honest lower bound by the caller.
    """
    ring = eng.ring
    seeds = [v for v in seed_word_defects(eng) if v]
    operators = insertion_operator_family(eng)
    module = FlatModule(ring, 315)
    base = ring.base
    if base.is_field:
        if base.char == 0:
            raise CubicHeckeError("rational word-module saturation is not supported")
        table, _ = flat_saturation(
            module, seeds, operators,
            kind="gf", param=base.char,
            max_rounds=max_rounds, progress=progress, tag="word",
        )
        return [module.to_vec(v) for v in table.pivot_items()], True

    preload = None
    if resume and checkpoint_dir:
        preload = _load_flat_checkpoint(checkpoint_dir, "word-exact", ring)
    if preload is None:
        mask = (1 << WARM_MODULUS_BITS) - 1
        warm, _ = flat_saturation(
            module, seeds, operators,
            kind="z2k", param=mask,
            max_rounds=max_rounds, progress=progress, tag="word-warm",
        )
        half = 1 << (WARM_MODULUS_BITS - 1)
        preload = [
            module.to_vec({k: (c if c < half else c - mask - 1) for k, c in v.items()})
            for v in warm.pivot_items()
        ]

    def checkpoint(table, rounds, admitted):
        if checkpoint_dir:
            _save_flat_checkpoint(
                checkpoint_dir, "word-exact", ring,
                [module.to_vec(v) for v in table.pivot_items()],
                rounds, admitted == 0,
            )

    table, _ = flat_saturation(
        module, seeds, operators,
        kind="zz", preload=preload,
        max_rounds=max_rounds, progress=progress, tag="word-exact",
        on_round=checkpoint,
    )
    return [module.to_vec(v) for v in table.pivot_items()], False


def _save_flat_checkpoint(checkpoint_dir, tag, ring, vecs, rounds, stable):
    os.makedirs(checkpoint_dir, exist_ok=True)
    lines = []
    for vec in vecs:
        entries = [f"{pos}: {ring.format(vec[pos])}" for pos in sorted(vec)]
        lines.append("; ".join(entries))
    payload = {
        "tag": tag, "ring": repr(ring), "round": rounds,
        "stable": stable, "basis": lines,
    }
    path = _checkpoint_path(checkpoint_dir, tag)
    with open(path + ".tmp", "w") as fh:
        json.dump(payload, fh, indent=1)
    os.replace(path + ".tmp", path)


def _load_flat_checkpoint(checkpoint_dir, tag, ring):
    path = _checkpoint_path(checkpoint_dir, tag)
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        payload = json.load(fh)
    if payload.get("ring") != repr(ring):
        return None
    return [_parse_vec(line, ring, 315) for line in payload["basis"]]


def word_closure_certificate(eng: ReductionEngine, pivots, seeds=None) -> bool:
    """Exact re-verification: seeds and all insertion images reduce to zero."""
    ring = eng.ring
    module = FlatModule(ring, 315)
    kind = "gf" if ring.base.is_field else "zz"
    param = ring.base.char if ring.base.is_field else 0
    table = FlatTable(module, kind, param)
    for v in pivots:
        table.admit(module.from_vec(v, kind, param))
    if seeds is None:
        seeds = [v for v in seed_word_defects(eng) if v]
    for s in seeds:
        if not table.reduces_to_zero(module.from_vec(s, kind, param)):
            return False
    flat_ops = [module.convert_operator(op) for op in insertion_operator_family(eng)]
    for op in flat_ops:
        for g in table.pivot_items():
            img = apply_flat_operator(kind, param, module, op, g)
            if img and not table.reduces_to_zero(img):
                return False
    return True


# ---------------------------------------------------------------------------
# the trace ideal

def trace_vector(eng: ReductionEngine, vec: Vec) -> Poly:
    """Full trace of a vector over the level-4 reduced basis."""
    ring = eng.ring
    basis = enumerate_reduced(4)
    out: Poly = {}
    for k, coeff in vec.items():
        t = trace_word(eng, basis[k])
        for m, c in ring.mul(t, coeff).items():
            s = ring.base.add(out.get(m, 0), c)
            if s:
                out[m] = s
            else:
                out.pop(m, None)
    return out


def tensor_module_basis(eng: ReductionEngine, **kw) -> GroebnerBasis:
    """Saturated tensor-side module (rank 9), canonical basis."""
    return saturate(
        seed_tensor_defects(eng),
        tensor_operator_family(eng),
        eng.ring,
        rank=9,
        tag=kw.pop("tag", "tensor"),
        **kw,
    )


def _honest_lower_ideal(eng, tensor_gb, upper, *, max_rounds=12, progress=None):
    """Ideal generated by traces of honest operator-composition images.

    Grows breadth-first from the seeds, expanding a vector only when its
    trace was new; stops as soon as the ideal matches `upper` (the
    certificate) or gives up after an exhaustive escalation round.
    """
    ring = eng.ring
    order = upper.order
    module = FlatModule(ring, 315)
    flat_ops = [module.convert_operator(op) for op in insertion_operator_family(eng)]
    seeds = [v for v in seed_word_defects(eng) if v]
    gens = [tensor_trace(eng, g) for g in tensor_gb.generators]
    gens += [trace_vector(eng, s) for s in seeds]
    low = ideal(gens, ring, order)
    if low == upper:
        return low
    queue = [module.from_vec(s) for s in seeds]
    seen = set()
    escalated = False
    for rnd in range(max_rounds):
        new_traces = []
        next_queue = []
        for v in queue:
            for op in flat_ops:
                img = apply_flat_operator("zz", 0, module, op, v)
                if not img:
                    continue
                key = tuple(sorted(img.items()))
                if key in seen:
                    continue
                seen.add(key)
                t = trace_vector(eng, module.to_vec(img))
                if t and not member_poly(t, low):
                    new_traces.append(t)
                    next_queue.append(img)
                elif escalated:
                    next_queue.append(img)
        if new_traces:
            low = buchberger(
                list(low.generators) + [{0: t} for t in new_traces],
                ring, order, rank=1,
            )
        if progress:
            progress(f"[lower] round {rnd}: +{len(new_traces)} traces, ideal size {len(low)}")
        if low == upper:
            return low
        if not new_traces:
            if escalated:
                return low
            escalated = True  # one exhaustive pass before giving up
        queue = next_queue if next_queue else queue
    return low


def trace_ideal(
    eng: ReductionEngine,
    *,
    max_rounds: int = 48,
    checkpoint_dir=None,
    resume: bool = False,
    progress=None,
    presentation=None,
) -> GroebnerBasis:
    """The annihilator of the universal trace over the engine's ring.

    Traces of the two saturated modules generate the ideal; the result is
    the canonical interreduced basis in the presentation order (Lex with
    v > u > parameters by default).  Over the integers the result is the
    certified sandwich of the upper and lower bounds described in
    `word_module_pivots`.
    """
    tensor_gb = tensor_module_basis(
        eng, max_rounds=max_rounds, checkpoint_dir=checkpoint_dir,
        resume=resume, progress=progress,
    )
    pivots, honest = word_module_pivots(
        eng, max_rounds=max_rounds, checkpoint_dir=checkpoint_dir,
        resume=resume, progress=progress,
    )
    ring = eng.ring
    gens = [trace_vector(eng, p) for p in pivots]
    gens += [tensor_trace(eng, g) for g in tensor_gb.generators]
    upper = ideal(gens, ring, DegRevLex())
    if not honest:
        lower = _honest_lower_ideal(eng, tensor_gb, upper, progress=progress)
        if lower != upper:
            raise CubicHeckeError(
                "trace-ideal bounds disagree; honest lower bound:\n"
                f"{lower.serialize()}\nupper bound:\n{upper.serialize()}"
            )
    return represent(upper, presentation or Lex())
