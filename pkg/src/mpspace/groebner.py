"""Buchberger's algorithm for ideals and submodules of free modules.

Terms are packed into single Python integers: the high bits hold the values
of the order matrix rows (so integer comparison is the monomial order) and
the low bits hold the exponent vector in guarded 16-bit fields plus the
module position.  Multiplying a term by a monomial is then integer addition.
"""

from __future__ import annotations

import heapq
from typing import Sequence

from .poly import ONE, ZERO, MonomialOrder, Polynomial, Ring, to_rational

EW = 16
FIELD = (1 << EW) - 1
MAX_EXP = (1 << (EW - 1)) - 1
KW = 32


class UnluckyPrime(Exception):
    """The modular trace does not describe the rational computation."""


class Codec:
    """Packing of (exponent, position) pairs into order-comparable ints.

    ``rows`` is a list of ``(linear, positional)`` pairs; the key of a term
    ``x^e * e_p`` in row k is ``linear_k . e + positional_k[p]``.  All entries
    must be non-negative and the rows must separate distinct terms.
    """

    def __init__(self, nvars: int, rank: int, rows: Sequence[tuple[Sequence[int], Sequence[int]]]):
        self.n = nvars
        self.rank = rank
        self.rows = [(tuple(a), tuple(b)) for a, b in rows]
        nrows = len(self.rows)
        self.E_total = EW * (nvars + 1)
        self.pos_shift = EW * nvars
        var_t = []
        for i in range(nvars):
            key = 0
            for k, (lin, _) in enumerate(self.rows):
                if lin[i] < 0:
                    raise ValueError("order rows must be non-negative")
                key |= lin[i] << (KW * (nrows - 1 - k))
            var_t.append((key << self.E_total) + (1 << (EW * i)))
        pos_t = []
        for p in range(rank):
            key = 0
            for k, (_, pv) in enumerate(self.rows):
                val = pv[p] if pv else 0
                if val < 0:
                    raise ValueError("order rows must be non-negative")
                key |= val << (KW * (nrows - 1 - k))
            pos_t.append((key << self.E_total) + (p << self.pos_shift))
        self.VAR_T = var_t
        self.POS_T = pos_t
        self.GUARD = sum(1 << (EW * i + EW - 1) for i in range(nvars))
        self.PMASK = FIELD << self.pos_shift
        self.LOWMASK = (1 << self.E_total) - 1

    def encode(self, exp: Sequence[int], pos: int = 0) -> int:
        t = self.POS_T[pos]
        for i, x in enumerate(exp):
            if x:
                if x > MAX_EXP:
                    raise OverflowError("exponent too large for the packed representation")
                t += x * self.VAR_T[i]
        return t

    def decode(self, t: int) -> tuple[tuple[int, ...], int]:
        exp = tuple((t >> (EW * i)) & FIELD for i in range(self.n))
        return exp, (t >> self.pos_shift) & FIELD

    def position(self, t: int) -> int:
        return (t >> self.pos_shift) & FIELD

    def divides(self, a: int, b: int) -> bool:
        """Does term a divide term b (same position, componentwise <=)?"""
        ae = a & self.LOWMASK & ~self.PMASK
        g = self.GUARD
        return ((b | g) - ae) & g == g and (a ^ b) & self.PMASK == 0

    def lcm(self, a: int, b: int) -> int:
        r = self.POS_T[(a >> self.pos_shift) & FIELD]
        for i in range(self.n):
            sh = EW * i
            x = (a >> sh) & FIELD
            y = (b >> sh) & FIELD
            m = x if x > y else y
            if m:
                r += m * self.VAR_T[i]
        return r

    def coprime(self, a: int, b: int) -> bool:
        for i in range(self.n):
            sh = EW * i
            if (a >> sh) & FIELD and (b >> sh) & FIELD:
                return False
        return True

    def degree(self, t: int, weights: Sequence[int]) -> int:
        return sum(w * ((t >> (EW * i)) & FIELD) for i, w in enumerate(weights))


def ring_rows(ring: Ring) -> list[tuple[int, ...]]:
    return ring.order.matrix(ring.nvars)


def module_rows(ring: Ring, rank: int, order: str = "top"):
    """Order rows for R^rank: 'top' (term first) or 'pot' (position first).

    Lower component indices are larger in both.
    """
    rows = ring_rows(ring)
    zero_pos = (0,) * rank
    posrow = tuple(rank - 1 - p for p in range(rank))
    zero_lin = (0,) * ring.nvars
    body = [(r, zero_pos) for r in rows]
    if order == "top":
        return body + [(zero_lin, posrow)]
    if order == "pot":
        return [(zero_lin, posrow)] + body
    raise ValueError(f"unknown module order {order!r}")


class _Basis:
    """Mutable Groebner basis state used by the engine."""

    def __init__(self, codec: Codec, weights: Sequence[int]):
        self.codec = codec
        self.weights = tuple(weights)
        self.polys: list[dict] = []
        self.leads: list[int] = []
        self.sugar: list[int] = []
        self.active: list[int] = []

    # reducer records: (lead exponent part, lead position part, lead, tail items)
    def reducers(self):
        codec = self.codec
        mask = codec.LOWMASK & ~codec.PMASK
        recs = []
        for i in self.active:
            lt = self.leads[i]
            tail = [(t, c) for t, c in self.polys[i].items() if t != lt]
            recs.append((lt & mask, lt & codec.PMASK, lt, tail))
        return recs


def reduce_terms(p: dict, recs, codec: Codec, full: bool = True) -> dict:
    """Reduce a term dict (consumed) by monic reducer records."""
    if not p:
        return {}
    g = codec.GUARD
    pmask = codec.PMASK
    heap = [-t for t in p]
    heapq.heapify(heap)
    rem: dict = {}
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        t = -pop(heap)
        c = p.pop(t, None)
        if c is None:
            continue
        tg = t | g
        tp = t & pmask
        for ae, ap, lt, tail in recs:
            if ap == tp and (tg - ae) & g == g:
                q = t - lt
                for s, cs in tail:
                    k = s + q
                    v = p.get(k)
                    if v is None:
                        p[k] = -c * cs
                        push(heap, -k)
                    else:
                        v -= c * cs
                        if v:
                            p[k] = v
                        else:
                            del p[k]
                break
        else:
            rem[t] = c
            if not full:
                rem.update(p)
                return rem
    return rem


def reduce_terms_mod(p: dict, recs, codec: Codec, m: int, full: bool = True) -> dict:
    """reduce_terms with integer coefficients modulo the prime m."""
    if not p:
        return {}
    g = codec.GUARD
    pmask = codec.PMASK
    heap = [-t for t in p]
    heapq.heapify(heap)
    rem: dict = {}
    pop, push = heapq.heappop, heapq.heappush
    while heap:
        t = -pop(heap)
        c = p.pop(t, None)
        if c is None:
            continue
        tg = t | g
        tp = t & pmask
        for ae, ap, lt, tail in recs:
            if ap == tp and (tg - ae) & g == g:
                q = t - lt
                for s, cs in tail:
                    k = s + q
                    v = p.get(k)
                    if v is None:
                        p[k] = (-c * cs) % m
                        push(heap, -k)
                    else:
                        v = (v - c * cs) % m
                        if v:
                            p[k] = v
                        else:
                            del p[k]
                break
        else:
            rem[t] = c
            if not full:
                rem.update(p)
                return rem
    return rem


def _monic(p: dict, m: int | None = None) -> tuple[int, dict]:
    lt = max(p)
    lc = p[lt]
    if lc != 1:
        if m is None:
            inv = 1 / lc
            p = {t: c * inv for t, c in p.items()}
        else:
            inv = pow(int(lc), -1, m)
            p = {t: c * inv % m for t, c in p.items()}
    return lt, p


class Trace:
    """Pair statistics of one run; ``zero`` holds pairs that reduced to zero."""

    def __init__(self):
        self.zero: set = set()
        self.leads: list[int] = []
        self.pairs = 0

    def __repr__(self):
        return f"Trace(pairs={self.pairs}, zero={len(self.zero)}, basis={len(self.leads)})"


FILTER_PRIME = (1 << 62) - 57
_settings = {"modular_filter": False}
FILTER_STATS = {"runs": 0, "skipped": 0, "fallbacks": 0}


def set_modular_filter(on: bool) -> None:
    """Switch the modular pre-filter on or off for subsequent bases."""
    _settings["modular_filter"] = bool(on)


def modular_filter_enabled() -> bool:
    return _settings["modular_filter"]


def _to_modular(f: dict, m: int) -> dict:
    out = {}
    for t, c in f.items():
        den = int(c.denominator)
        if den % m == 0:
            raise UnluckyPrime("a denominator vanishes modulo the prime")
        v = int(c.numerator) * pow(den, -1, m) % m
        if v:
            out[t] = v
    return out


def groebner_engine(codec: Codec, inputs: list[dict], weights: Sequence[int],
                    rank_one: bool | None = None) -> list[dict]:
    """Reduced basis over the rationals, through the modular pre-filter when enabled.

    The filtered run skips the pairs that reduced to zero modulo a prime and
    is then completed by a plain run seeded with its output, which checks all
    remaining pairs over the rationals; the reduced basis is unique, so the
    result is the same with or without the filter.
    """
    if not modular_filter_enabled():
        return buchberger(codec, inputs, weights, rank_one)
    FILTER_STATS["runs"] += 1
    try:
        tr = Trace()
        buchberger(codec, inputs, weights, rank_one, modulus=FILTER_PRIME, trace=tr)
        draft = buchberger(codec, inputs, weights, rank_one, skip=tr)
        FILTER_STATS["skipped"] += len(tr.zero)
    except UnluckyPrime:
        FILTER_STATS["fallbacks"] += 1
        return buchberger(codec, inputs, weights, rank_one)
    return buchberger(codec, draft, weights, rank_one)


def buchberger(codec: Codec, inputs: list[dict], weights: Sequence[int],
               rank_one: bool | None = None, modulus: int | None = None,
               trace: Trace | None = None, skip: Trace | None = None) -> list[dict]:
    """Reduced Groebner basis of the given term dicts (monic, sorted by lead).

    With ``modulus`` the coefficients are integers modulo that prime.  A
    ``trace`` records the run; ``skip`` (the trace of an earlier run) lets the
    loop pass over pairs that reduced to zero there.  Skipping is only safe
    when the caller verifies the output afterwards.
    """
    if rank_one is None:
        rank_one = codec.rank == 1
    m = modulus
    B = _Basis(codec, weights)
    pairs: dict[tuple[int, int], tuple[int, int]] = {}
    heap: list = []

    def reduce(p, recs, full=True):
        if m is None:
            return reduce_terms(p, recs, codec, full)
        return reduce_terms_mod(p, recs, codec, m, full)

    def add(p: dict, sug: int | None = None):
        lt, p = _monic(p, m)
        if sug is None:
            sug = max(codec.degree(t, weights) for t in p)
        idx = len(B.polys)
        if skip is not None and (idx >= len(skip.leads) or skip.leads[idx] != lt):
            raise UnluckyPrime("leading terms diverged from the modular trace")
        B.polys.append(p)
        B.leads.append(lt)
        B.sugar.append(sug)
        if trace is not None:
            trace.leads.append(lt)
        _update(B, idx, pairs, heap, rank_one)

    if m is not None:
        inputs = [_to_modular(f, m) for f in inputs]
    for f in sorted((dict(f) for f in inputs if f), key=max):
        r = reduce(dict(f), B.reducers())
        if r:
            add(r)

    recs = B.reducers()
    recs_version = list(B.active)
    while heap:
        sug, L, i, j = heapq.heappop(heap)
        if pairs.get((i, j)) is None:
            continue
        del pairs[(i, j)]
        if trace is not None:
            trace.pairs += 1
        if skip is not None and (i, j) in skip.zero:
            continue
        li, lj = B.leads[i], B.leads[j]
        qi, qj = L - li, L - lj
        s: dict = {}
        for t, c in B.polys[i].items():
            if t != li:
                s[t + qi] = c
        for t, c in B.polys[j].items():
            if t != lj:
                k = t + qj
                v = s.get(k)
                if v is None:
                    s[k] = -c if m is None else m - c
                else:
                    v = v - c if m is None else (v - c) % m
                    if v:
                        s[k] = v
                    else:
                        del s[k]
        if s:
            if recs_version != B.active:
                recs = B.reducers()
                recs_version = list(B.active)
            s = reduce(s, recs, full=False)
        if s:
            add(s, sug)
        elif trace is not None:
            trace.zero.add((i, j))
    if skip is not None and len(B.leads) != len(skip.leads):
        raise UnluckyPrime("basis size differs from the modular trace")
    return _interreduce(B, codec, m)


def _update(B: _Basis, h: int, pairs: dict, heap: list, rank_one: bool):
    codec = B.codec
    lh = B.leads[h]
    pmask = codec.PMASK
    hp = lh & pmask
    cand = []
    for g in B.active:
        lg = B.leads[g]
        if lg & pmask != hp:
            continue
        cand.append((g, codec.lcm(lh, lg), rank_one and codec.coprime(lh, lg)))
    done: list = []
    while cand:
        g, L, cop = cand.pop(0)
        if cop or not any(codec.divides(L2, L) for _, L2, _ in cand + done):
            done.append((g, L, cop))
    new_pairs = [(g, L) for g, L, cop in done if not cop]
    # chain criterion on old pairs
    for key, (sug, L) in list(pairs.items()):
        if L & pmask != hp or not codec.divides(lh, L):
            continue
        a, b = key
        if codec.lcm(B.leads[a], lh) != L and codec.lcm(B.leads[b], lh) != L:
            del pairs[key]
    w = B.weights
    for g, L in new_pairs:
        dl = codec.degree(L, w)
        sug = max(B.sugar[h] + dl - codec.degree(lh, w), B.sugar[g] + dl - codec.degree(B.leads[g], w))
        key = (g, h)
        pairs[key] = (sug, L)
        heapq.heappush(heap, (sug, L, g, h))
    B.active = [g for g in B.active if not codec.divides(lh, B.leads[g])] + [h]


def _interreduce(B: _Basis, codec: Codec, m: int | None = None) -> list[dict]:
    items = sorted(((B.leads[i], B.polys[i]) for i in B.active), key=lambda x: x[0])
    minimal = []
    for lt, p in items:
        if not any(codec.divides(m, lt) for m, _ in minimal):
            minimal.append((lt, p))
    mask = codec.LOWMASK & ~codec.PMASK
    out = []
    for k, (lt, p) in enumerate(minimal):
        recs = [(l2 & mask, l2 & codec.PMASK, l2, [(t, c) for t, c in p2.items() if t != l2])
                for j, (l2, p2) in enumerate(minimal) if j != k]
        tail = {t: c for t, c in p.items() if t != lt}
        if m is None:
            r = reduce_terms(tail, recs, codec)
            r[lt] = ONE
        else:
            r = reduce_terms_mod(tail, recs, codec, m)
            r[lt] = 1
        out.append(r)
    out.sort(key=max)
    return out


# --------------------------------------------------------------------------
# conversion helpers


def poly_to_terms(p: Polynomial, codec: Codec, pos: int = 0) -> dict:
    enc = codec.encode
    return {enc(e, pos): c for e, c in p.items()}


def vector_to_terms(v: Sequence[Polynomial], codec: Codec) -> dict:
    out = {}
    for pos, p in enumerate(v):
        for e, c in p.items():
            out[codec.encode(e, pos)] = c
    return out


def terms_to_poly(d: dict, codec: Codec, ring: Ring) -> Polynomial:
    dec = codec.decode
    return Polynomial(ring, {dec(t)[0]: c for t, c in d.items()}, True)


def terms_to_vector(d: dict, codec: Codec, ring: Ring, rank: int) -> tuple[Polynomial, ...]:
    parts: list[dict] = [{} for _ in range(rank)]
    for t, c in d.items():
        e, pos = codec.decode(t)
        parts[pos][e] = c
    return tuple(Polynomial(ring, p, True) for p in parts)


# --------------------------------------------------------------------------
# public API


def selection_weights(ring: Ring) -> tuple[int, ...]:
    """Weights for the sugar degree that orders the pair queue.

    Under pure lex the sugar degree says little about the order, and it can
    drive long remainder sequences with huge rational coefficients; zero
    weights fall back to picking the pair with the smallest lcm.
    """
    if ring.order.kind == "lex":
        return (0,) * ring.nvars
    return ring.weights


class GroebnerBasis:
    """Reduced Groebner basis of an ideal under the ring's order."""

    def __init__(self, ring: Ring, polys: Sequence[Polynomial]):
        self.ring = ring
        self.codec = Codec(ring.nvars, 1, [(r, (0,)) for r in ring_rows(ring)])
        terms = [poly_to_terms(p.change_ring(ring), self.codec) for p in polys if p]
        self._terms = groebner_engine(self.codec, terms, selection_weights(ring))
        self.polys = [terms_to_poly(d, self.codec, ring) for d in self._terms]
        self._recs = None

    def __iter__(self):
        return iter(self.polys)

    def __len__(self):
        return len(self.polys)

    def _reducers(self):
        if self._recs is None:
            mask = self.codec.LOWMASK & ~self.codec.PMASK
            recs = []
            for d in self._terms:
                lt = max(d)
                recs.append((lt & mask, lt & self.codec.PMASK, lt,
                             [(t, c) for t, c in d.items() if t != lt]))
            self._recs = recs
        return self._recs

    def reduce(self, p: Polynomial) -> Polynomial:
        d = poly_to_terms(p.change_ring(self.ring), self.codec)
        return terms_to_poly(reduce_terms(d, self._reducers(), self.codec), self.codec, self.ring)

    def contains(self, p: Polynomial) -> bool:
        return self.reduce(p).is_zero()

    def is_unit(self) -> bool:
        return any(p.is_constant() and not p.is_zero() for p in self.polys)

    def leading_monomials(self) -> list[tuple[int, ...]]:
        return [self.codec.decode(max(d))[0] for d in self._terms]


def groebner_basis(polys: Sequence[Polynomial], ring: Ring | None = None) -> list[Polynomial]:
    if ring is None:
        if not polys:
            raise ValueError("need a ring for an empty generator list")
        ring = polys[0].ring
    return GroebnerBasis(ring, polys).polys


def normal_form(p: Polynomial, polys: Sequence[Polynomial]) -> Polynomial:
    return GroebnerBasis(p.ring, polys).reduce(p)


class ModuleGB:
    """Groebner basis of a submodule of R^rank.

    ``order`` is 'top', 'pot' or an explicit list of (linear, positional)
    rows for a custom module order.
    """

    def __init__(self, ring: Ring, rank: int, vectors: Sequence[Sequence[Polynomial]],
                 order="top", weights: Sequence[int] | None = None):
        self.ring = ring
        self.rank = rank
        rows = module_rows(ring, rank, order) if isinstance(order, str) else order
        self.codec = Codec(ring.nvars, rank, rows)
        terms = []
        for v in vectors:
            if len(v) != rank:
                raise ValueError(f"vector of length {len(v)} in a module of rank {rank}")
            d = vector_to_terms([p.change_ring(ring) for p in v], self.codec)
            if d:
                terms.append(d)
        self._terms = groebner_engine(self.codec, terms, weights or ring.weights, rank_one=False)
        self.vectors = [terms_to_vector(d, self.codec, ring, rank) for d in self._terms]
        self._recs = None

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return len(self.vectors)

    def leads(self) -> list[tuple[tuple[int, ...], int]]:
        return [self.codec.decode(max(d)) for d in self._terms]

    def _reducers(self):
        if self._recs is None:
            mask = self.codec.LOWMASK & ~self.codec.PMASK
            self._recs = [(max(d) & mask, max(d) & self.codec.PMASK, max(d),
                           [(t, c) for t, c in d.items() if t != max(d)]) for d in self._terms]
        return self._recs

    def reduce(self, v: Sequence[Polynomial]) -> tuple[Polynomial, ...]:
        d = vector_to_terms([p.change_ring(self.ring) for p in v], self.codec)
        r = reduce_terms(d, self._reducers(), self.codec)
        return terms_to_vector(r, self.codec, self.ring, self.rank)

    def contains(self, v: Sequence[Polynomial]) -> bool:
        return all(p.is_zero() for p in self.reduce(v))


def module_groebner(vectors, ring: Ring, rank: int | None = None, order="top"):
    if rank is None:
        if not vectors:
            raise ValueError("need the rank for an empty generator list")
        rank = len(vectors[0])
    return ModuleGB(ring, rank, vectors, order).vectors


def syzygies(vectors: Sequence[Sequence[Polynomial]], ring: Ring) -> list[tuple[Polynomial, ...]]:
    """Generators of the relations sum a_j v_j = 0 among the given vectors.

    Elements of R^r may be passed as Polynomials (r = 1).
    """
    vecs = [(v,) if isinstance(v, Polynomial) else tuple(v) for v in vectors]
    k = len(vecs)
    if k == 0:
        return []
    r = len(vecs[0])
    if any(len(v) != r for v in vecs):
        raise ValueError("all vectors must have the same length")
    rank = r + k
    order = _elim_rows(ring, r, rank)
    aug = _augment(vecs, ring)
    gb = ModuleGB(ring, rank, aug, order)
    out = []
    for vec, (_, pos) in zip(gb.vectors, gb.leads()):
        if pos >= r:
            out.append(vec[r:])
    return out


def lift(target, vectors: Sequence, ring: Ring):
    """Coefficients a with target = sum a_j vectors[j], or None if not in the span."""
    vecs = [(v,) if isinstance(v, Polynomial) else tuple(v) for v in vectors]
    tgt = (target,) if isinstance(target, Polynomial) else tuple(target)
    k = len(vecs)
    r = len(tgt)
    gb = ModuleGB(ring, r + k, _augment(vecs, ring), _elim_rows(ring, r, r + k))
    red = gb.reduce(tuple(tgt) + (ring.zero(),) * k)
    if any(not p.is_zero() for p in red[:r]):
        return None
    return [-p for p in red[r:]]


def _augment(vecs, ring):
    k = len(vecs)
    zero = ring.zero()
    out = []
    for j, v in enumerate(vecs):
        unit = [zero] * k
        unit[j] = ring.one()
        out.append(tuple(v) + tuple(unit))
    return out


def _elim_rows(ring: Ring, r: int, rank: int):
    """Module order on R^rank in which the first r positions dominate."""
    flag = tuple(1 if p < r else 0 for p in range(rank))
    posrow = tuple(rank - 1 - p for p in range(rank))
    zero_lin = (0,) * ring.nvars
    zero_pos = (0,) * rank
    return [(zero_lin, flag)] + [(row, zero_pos) for row in ring_rows(ring)] + [(zero_lin, posrow)]


__all__ = [
    "Codec", "GroebnerBasis", "ModuleGB", "Trace", "UnluckyPrime", "buchberger", "groebner_basis",
    "groebner_engine", "lift", "set_modular_filter", "modular_filter_enabled",
    "module_groebner", "module_rows", "normal_form", "syzygies", "MonomialOrder",
    "to_rational", "ZERO",
]
