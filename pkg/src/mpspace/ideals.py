"""Ideals with cached Groebner bases and the ideal-level constructions built on them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import IncompleteOverRationals, NotFinite, NotZeroDimensional, RingMismatchError
from .groebner import GroebnerBasis, syzygies
from .poly import (INHOMOGENEOUS, ZERO, MonomialOrder, Polynomial, Ring, to_rational,
                   weighted_degree)

DEFAULT_CAP_N = 64


class Ideal:
    """Ideal of a polynomial ring, given by generators; the basis is computed lazily."""

    def __init__(self, ring: Ring, gens: Iterable[Polynomial | str | int] = ()):
        self.ring = ring
        out = []
        for g in gens:
            p = ring(g)
            if p:
                out.append(p)
        self.gens: tuple[Polynomial, ...] = tuple(out)
        self._gb: GroebnerBasis | None = None

    @classmethod
    def unit(cls, ring: Ring) -> "Ideal":
        return cls(ring, [ring.one()])

    @classmethod
    def maximal(cls, ring: Ring) -> "Ideal":
        return cls(ring, ring.gens())

    # ---- Groebner basis
    def gb(self) -> GroebnerBasis:
        if self._gb is None:
            self._gb = GroebnerBasis(self.ring, self.gens)
        return self._gb

    def groebner_basis(self) -> list[Polynomial]:
        return list(self.gb().polys)

    def reduce(self, p) -> Polynomial:
        return self.gb().reduce(self.ring(p))

    def contains(self, p) -> bool:
        return self.reduce(p).is_zero()

    def __contains__(self, p) -> bool:
        return self.contains(p)

    def is_unit(self) -> bool:
        return self.gb().is_unit()

    def is_zero(self) -> bool:
        return not self.gens

    def issubset(self, other: "Ideal") -> bool:
        _check(self, other)
        return all(other.contains(g) for g in self.gens)

    def __eq__(self, other):
        if not isinstance(other, Ideal):
            return NotImplemented
        if self.ring.variables != other.ring.variables:
            return False
        other = other.change_ring(self.ring)
        return self.issubset(other) and other.issubset(self)

    def __hash__(self):
        return hash((self.ring.variables, tuple(str(p) for p in self.groebner_basis())))

    # ---- algebra
    def __add__(self, other: "Ideal") -> "Ideal":
        if isinstance(other, Polynomial):
            return Ideal(self.ring, self.gens + (other,))
        _check(self, other)
        return Ideal(self.ring, self.gens + other.gens)

    def __mul__(self, other: "Ideal") -> "Ideal":
        if isinstance(other, Polynomial):
            return Ideal(self.ring, [g * other for g in self.gens])
        _check(self, other)
        return Ideal(self.ring, [a * b for a in self.gens for b in other.gens])

    def power(self, k: int) -> "Ideal":
        if k == 0:
            return Ideal.unit(self.ring)
        result = self
        for _ in range(k - 1):
            result = Ideal(self.ring, {a * b for a in result.gens for b in self.gens})
        return result

    def change_ring(self, ring: Ring) -> "Ideal":
        if ring == self.ring:
            return self
        return Ideal(ring, [g.change_ring(ring) for g in self.gens])

    def is_homogeneous(self, weights: Sequence[int] | None = None) -> bool:
        return all(weighted_degree(g, weights) is not INHOMOGENEOUS for g in self.gens)

    def substitute(self, mapping, ring: Ring) -> "Ideal":
        return Ideal(ring, [g.substitute(mapping, ring) for g in self.gens])

    def __str__(self):
        return "(" + ", ".join(str(g) for g in self.gens) + ")"

    def __repr__(self):
        return f"Ideal({self.ring.variables}, {str(self)})"

    # convenience wrappers
    def colon(self, g) -> "Ideal":
        return colon(self, g)

    def saturate(self, g) -> tuple["Ideal", int]:
        return saturate(self, g)

    def eliminate(self, variables) -> "Ideal":
        return eliminate(self, variables)

    def krull_dim(self) -> int:
        return krull_dim(self)


def _check(a: Ideal, b: Ideal):
    if a.ring != b.ring:
        raise RingMismatchError(f"{a.ring!r} vs {b.ring!r}")


# --------------------------------------------------------------------------
# rings built on the fly


def fresh_name(ring: Ring, base: str) -> str:
    name = base
    k = 0
    while name in ring.variables:
        k += 1
        name = f"{base}{k}"
    return name


def _restricted_order(ring: Ring, keep: Sequence[str]) -> tuple[MonomialOrder, tuple[int, ...]]:
    w = tuple(ring.weights[ring.index(v)] for v in keep)
    if ring.order.kind == "lex":
        return MonomialOrder("lex"), w
    if all(x == 1 for x in w):
        return MonomialOrder("grevlex"), w
    return MonomialOrder("weighted", w), w


def elimination_ring(ring: Ring, elim: Sequence[str]) -> tuple[Ring, Ring]:
    """(ring ordered to eliminate ``elim``, subring of the remaining variables)."""
    elim = [v for v in ring.variables if v in set(elim)]
    keep = [v for v in ring.variables if v not in set(elim)]
    w = [ring.weights[ring.index(v)] for v in elim + keep]
    big = Ring(elim + keep, MonomialOrder("block", w, block=len(elim)), w)
    order, wk = _restricted_order(ring, keep)
    return big, Ring(keep, order, wk)


# --------------------------------------------------------------------------
# constructions


def eliminate(I: Ideal, variables: Iterable[str], target: Ring | None = None) -> Ideal:
    """I intersected with the subring not involving ``variables``."""
    variables = list(variables)
    for v in variables:
        I.ring.index(v)
    if not variables:
        return I
    big, small = elimination_ring(I.ring, variables)
    gb = GroebnerBasis(big, [g.change_ring(big) for g in I.gens])
    drop = set(variables)
    kept = [p for p in gb.polys if not (p.support_variables() & drop)]
    result = Ideal(small, [p.change_ring(small) for p in kept])
    if target is not None:
        result = result.change_ring(target)
    return result


def intersect(I: Ideal, J: Ideal) -> Ideal:
    _check(I, J)
    if I.is_zero() or J.is_zero():
        return Ideal(I.ring, [])
    t = fresh_name(I.ring, "t_")
    R = Ring((t,) + I.ring.variables, "grevlex", (1,) + I.ring.weights)
    tv = R.var(t)
    gens = [tv * g.change_ring(R) for g in I.gens] + [(1 - tv) * g.change_ring(R) for g in J.gens]
    return eliminate(Ideal(R, gens), [t]).change_ring(I.ring)


def _exact_quotient(p: Polynomial, g: Polynomial) -> Polynomial:
    """p / g for p known to be divisible by g."""
    q = p.ring.zero()
    r = p
    lm, lc = g.leading_term()
    while r:
        e, c = r.leading_term()
        d = tuple(a - b for a, b in zip(e, lm))
        if any(x < 0 for x in d):
            raise ValueError("polynomial is not divisible")
        m = p.ring.monomial(d, c / lc)
        q = q + m
        r = r - m * g
    return q


def colon(I: Ideal, g) -> Ideal:
    """(I : g) = {h : h g in I}."""
    g = I.ring(g)
    if g.is_zero():
        raise ValueError("colon by the zero polynomial")
    if g.is_constant():
        return I
    if I.is_zero():
        return I
    meet = intersect(I, Ideal(I.ring, [g]))
    return Ideal(I.ring, [_exact_quotient(h, g) for h in meet.groebner_basis()])


def colon_ideal(I: Ideal, J: Ideal) -> Ideal:
    result = None
    for g in J.gens:
        c = colon(I, g)
        result = c if result is None else intersect(result, c)
    return result if result is not None else Ideal.unit(I.ring)


def _homogeneous_weights(I: Ideal, g: Polynomial):
    for w in (I.ring.weights, (1,) * I.ring.nvars):
        if I.is_homogeneous(w) and weighted_degree(g, w) is not INHOMOGENEOUS:
            return w
    return None


def saturate(I: Ideal, g, method: str = "auto", exponent: bool = True) -> tuple[Ideal, int | None]:
    """(I : g^infinity) together with the least k with I : g^k equal to it.

    The exponent needs a basis of I itself; ``exponent=False`` skips it and
    reports None.
    """
    g = I.ring(g)
    if g.is_zero():
        raise ValueError("saturation by the zero polynomial")
    if g.is_constant() or I.is_zero():
        return I, 0
    w = _homogeneous_weights(I, g) if method in ("auto", "homogeneous") else None
    if w is not None:
        J = _saturate_homogeneous(I, g, w)
    else:
        J = _saturate_tag(I, g)
    return J, (_saturation_exponent(I, J, g) if exponent else None)


def _saturate_tag(I: Ideal, g: Polynomial) -> Ideal:
    z = fresh_name(I.ring, "z_")
    R = Ring((z,) + I.ring.variables, "grevlex")
    zv = R.var(z)
    gens = [h.change_ring(R) for h in I.gens] + [1 - zv * g.change_ring(R)]
    return eliminate(Ideal(R, gens), [z]).change_ring(I.ring)


def _saturate_homogeneous(I: Ideal, g: Polynomial, w) -> Ideal:
    # s stands for g; graded revlex with s last lets us divide s out of the basis
    s = fresh_name(I.ring, "s_")
    dg = weighted_degree(g, w)
    wt = tuple(w) + (dg,)
    R = Ring(I.ring.variables + (s,), MonomialOrder("weighted", wt))
    sv = R.var(s)
    gens = [h.change_ring(R) for h in I.gens] + [sv - g.change_ring(R)]
    gb = GroebnerBasis(R, gens)
    si = R.nvars - 1
    sub = {v: I.ring.var(v) for v in I.ring.variables}
    sub[s] = g
    out = []
    for p in gb.polys:
        k = min(e[si] for e, _ in p.items())
        if k:
            p = Polynomial(R, {e[:si] + (e[si] - k,): c for e, c in p.items()}, True)
        out.append(p.substitute(sub, I.ring))
    return Ideal(I.ring, out)


def _saturation_exponent(I: Ideal, J: Ideal, g: Polynomial) -> int:
    pending = list(J.gens)
    k = 0
    while True:
        pending = [h for h in pending if not I.contains(h)]
        if not pending:
            return k
        pending = [h * g for h in pending]
        k += 1


def saturate_ideal(I: Ideal, J: Ideal) -> Ideal:
    """(I : J^infinity) as the intersection of the saturations by generators."""
    result = None
    for g in J.gens:
        s, _ = saturate(I, g)
        result = s if result is None else intersect(result, s)
    return result if result is not None else Ideal.unit(I.ring)


def krull_dim(I: Ideal) -> int:
    """Dimension of V(I) from maximal independent sets of the leading-term ideal; -1 if empty."""
    if I.is_unit():
        return -1
    n = I.ring.nvars
    leads = I.gb().leading_monomials()
    supports = [frozenset(i for i, x in enumerate(e) if x) for e in leads]
    for size in range(n, -1, -1):
        for S in itertools.combinations(range(n), size):
            s = set(S)
            if not any(sup <= s for sup in supports):
                return size
    return 0


@dataclass
class QuotientBasis:
    ideal: Ideal
    monomials: list[tuple[int, ...]]

    def __len__(self):
        return len(self.monomials)

    def polynomials(self) -> list[Polynomial]:
        return [self.ideal.ring.monomial(e) for e in self.monomials]


def _standard_monomials(ring: Ring, leads: list[tuple[int, ...]], limit: int | None = None):
    n = ring.nvars
    if not leads:
        raise NotZeroDimensional("zero ideal has an infinite quotient" if n else "")
    for i in range(n):
        if not any(e[i] > 0 and all(e[j] == 0 for j in range(n) if j != i) for e in leads):
            raise NotZeroDimensional(f"no pure power of {ring.variables[i]} among leading terms")

    def standard(m):
        return not any(all(a <= b for a, b in zip(e, m)) for e in leads)

    start = (0,) * n
    if not standard(start):
        return []
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for m in frontier:
            for i in range(n):
                c = m[:i] + (m[i] + 1,) + m[i + 1:]
                if c not in seen and standard(c):
                    seen.add(c)
                    nxt.append(c)
        frontier = nxt
        if limit is not None and len(seen) > limit:
            raise NotFinite("quotient larger than the configured limit")
    return sorted(seen, key=ring.sort_key)


def quotient_basis(I: Ideal) -> QuotientBasis:
    if I.is_unit():
        return QuotientBasis(I, [])
    leads = I.gb().leading_monomials()
    return QuotientBasis(I, _standard_monomials(I.ring, leads))


def colength(I: Ideal) -> int:
    """dim_Q of R/I (global)."""
    return len(quotient_basis(I))


def _powers(ring: Ring, N: int) -> list[Polynomial]:
    return [v ** N for v in ring.gens()]


def local_colength(I: Ideal, cap_N: int = DEFAULT_CAP_N) -> int:
    """Length of the localisation of R/I at the origin.

    Uses d_N = dim R/(I + (x_1^N, ..., x_n^N)); once d_N = d_{N+1} the
    powers already lie in the local ideal (Nakayama), so d_N is the answer.
    """
    ring = I.ring
    if I.is_unit() or any(g.constant_term() != 0 for g in I.gens):
        return 0
    if ring.nvars == 0:
        return 1
    if krull_dim(I) == 0:
        D = colength(I)
        if all(I.contains(p) for p in _powers(ring, D)):
            return D
        return colength(I + Ideal(ring, _powers(ring, D)))
    N = 1
    checked_isolated = False
    while N <= cap_N:
        d1 = colength(I + Ideal(ring, _powers(ring, N)))
        d2 = colength(I + Ideal(ring, _powers(ring, N + 1)))
        if d1 == d2:
            return d1
        if N >= 4 and not checked_isolated:
            checked_isolated = True
            if not origin_isolated(I):
                raise NotFinite("the origin is not an isolated point of V(I)")
        N *= 2
    raise NotFinite(f"local length did not stabilise for N <= {cap_N}")


# --------------------------------------------------------------------------
# Hilbert series of graded quotients


def _tpoly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return {k: v for k, v in out.items() if v}


def _tpoly_add(a: dict, b: dict, shift: int = 0, sign: int = 1) -> dict:
    out = dict(a)
    for k, v in b.items():
        out[k + shift] = out.get(k + shift, 0) + sign * v
    return {k: v for k, v in out.items() if v}


def _minimal_monomials(gens):
    gens = sorted(set(gens), key=sum)
    out = []
    for g in gens:
        if not any(all(a <= b for a, b in zip(m, g)) for m in out):
            out.append(g)
    return out


def _mdeg(e, w) -> int:
    return sum(a * b for a, b in zip(e, w))


def hilbert_numerator(leads: Sequence[tuple[int, ...]], weights: Sequence[int]) -> dict:
    """Numerator N(t) of the Hilbert series N(t) / prod(1 - t^w_i) of R/(leads).

    Pivot recursion: N(L) = N(L + p) + t^deg(p) N(L : p) for a pure power p.
    """
    L = _minimal_monomials(leads)
    if not L:
        return {0: 1}
    n = len(L[0])
    counts = [sum(1 for g in L if g[i]) for i in range(n)]
    i = max(range(n), key=lambda k: counts[k])
    if counts[i] <= 1:
        # pairwise coprime generators
        out = {0: 1}
        for g in L:
            out = _tpoly_mul(out, {0: 1, _mdeg(g, weights): -1})
        return out
    exps = sorted(g[i] for g in L if g[i] and any(g[j] for j in range(n) if j != i))
    e = exps[len(exps) // 2]
    p = tuple(e if k == i else 0 for k in range(n))
    plus = hilbert_numerator(L + [p], weights)
    quot = hilbert_numerator([tuple(max(a - b, 0) for a, b in zip(g, p)) for g in L], weights)
    return _tpoly_add(plus, quot, _mdeg(p, weights))


def _grading(I: Ideal):
    for w in (I.ring.weights, (1,) * I.ring.nvars):
        if all(x > 0 for x in w) and I.is_homogeneous(w):
            return tuple(w)
    return None


def _divide_cyclotomic(num: dict, d: int) -> dict:
    """Exact quotient of num by (1 - t^d); NotFinite if it is not a polynomial."""
    if not num:
        return {}
    top = max(num)
    q: dict = {}
    for k in range(min(num), top + 1):
        v = num.get(k, 0) + q.get(k - d, 0)
        if v:
            q[k] = v
    if any(k > top - d for k in q):
        raise NotFinite("Hilbert series quotient is not a polynomial")
    return q


def hilbert_series(I: Ideal, w: Sequence[int] | None = None) -> tuple[dict, tuple[int, ...]]:
    """(numerator, weights) of the Hilbert series of R/I for a positive grading."""
    w = w or _grading(I)
    if w is None:
        raise ValueError("ideal is not homogeneous for a positive grading")
    if I.is_unit():
        return {}, tuple(w)
    return hilbert_numerator(I.gb().leading_monomials(), w), tuple(w)


def koszul_euler_characteristic(I: Ideal, seq: Sequence[Polynomial]) -> int | None:
    """Alternating sum of the Koszul homology lengths of seq on R/I, read from
    the Hilbert series; None when I or seq is not graded or the sum diverges."""
    w = _grading(I)
    if w is None:
        return None
    degs = [weighted_degree(I.ring(s), w) for s in seq]
    if any(d is INHOMOGENEOUS or d == 0 for d in degs):
        return None
    num, _ = hilbert_series(I, w)
    for d in degs:
        num = _tpoly_mul(num, {0: 1, d: -1})
    try:
        for x in w:
            num = _divide_cyclotomic(num, x)
    except NotFinite:
        return None
    return sum(num.values())


def quotient_length(A: Ideal, B: Ideal, w: Sequence[int] | None = None) -> int:
    """dim A/B for homogeneous B inside A with finite-dimensional quotient."""
    w = w or _grading(B) or _grading(A)
    na, _ = hilbert_series(A, w)
    nb, _ = hilbert_series(B, w)
    diff = _tpoly_add(nb, na, 0, -1)
    for x in w:
        diff = _divide_cyclotomic(diff, x) if diff else diff
    return sum(diff.values())


def origin_isolated(I: Ideal) -> bool:
    """Is the origin an isolated point of V(I) (or not on it)?"""
    if any(g.constant_term() != 0 for g in I.gens) or I.is_unit():
        return True
    sat = saturate_ideal(I, Ideal.maximal(I.ring))
    return any(p.constant_term() != 0 for p in sat.groebner_basis())


def global_or_local_colength(I: Ideal) -> int:
    return local_colength(I)


def radical_contains(I: Ideal, g) -> bool:
    """Does g vanish on V(I)?"""
    g = I.ring(g)
    if g.is_zero():
        return True
    z = fresh_name(I.ring, "z_")
    R = Ring((z,) + I.ring.variables, "grevlex")
    gens = [h.change_ring(R) for h in I.gens] + [1 - R.var(z) * g.change_ring(R)]
    return Ideal(R, gens).is_unit()


def radical_membership(g: Polynomial, I: Ideal) -> bool:
    return radical_contains(I, g)


def same_zero_set(I: Ideal, J: Ideal) -> bool:
    J = J.change_ring(I.ring)
    return all(radical_contains(J, g) for g in I.gens) and all(radical_contains(I, g) for g in J.gens)


def translate(I: Ideal, point: Sequence) -> Ideal:
    """The ideal moved so that ``point`` becomes the origin."""
    ring = I.ring
    mapping = {v: ring.var(v) + to_rational(c) for v, c in zip(ring.variables, point)}
    return Ideal(ring, [g.substitute(mapping, ring) for g in I.gens])


@dataclass
class RationalPointSet:
    points: list[tuple]
    multiplicities: list[int] = field(default_factory=list)
    complete: bool = True
    colength: int = 0

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


def rational_roots(p: Polynomial) -> list:
    """Rational roots of a univariate polynomial (any ring, one variable used)."""
    import sympy

    used = p.support_variables()
    if not used:
        return []
    (v,) = used
    i = p.ring.index(v)
    x = sympy.Symbol("x")
    coeffs = {}
    for e, c in p.items():
        coeffs[e[i]] = sympy.Rational(int(c.numerator), int(c.denominator))
    poly = sympy.Poly(sum(c * x ** k for k, c in coeffs.items()), x, domain="QQ")
    roots = poly.ground_roots()
    return sorted(to_rational(f"{r.p}/{r.q}") for r in roots)


def rational_points(I: Ideal, strict: bool = True) -> RationalPointSet:
    """All rational points of a zero-dimensional V(I), with local multiplicities."""
    if I.is_unit():
        return RationalPointSet([], [], True, 0)
    if krull_dim(I) != 0:
        raise NotZeroDimensional("rational points need a zero-dimensional ideal")
    ring = I.ring
    total = colength(I)
    lex = Ring(ring.variables, "lex")
    pts = _solve_lex(Ideal(lex, [g.change_ring(lex) for g in I.gens]), {})
    pts = sorted(set(pts))
    mults = [local_colength(translate(I, p)) for p in pts]
    complete = sum(mults) == total
    result = RationalPointSet(pts, mults, complete, total)
    if strict and not complete:
        raise IncompleteOverRationals(
            f"rational points account for {sum(mults)} of colength {total}", result)
    return result


def _solve_lex(I: Ideal, fixed: dict) -> list[tuple]:
    ring = I.ring
    if I.is_unit():
        return []
    gb = I.groebner_basis()
    free = [v for v in ring.variables if v not in fixed]
    if not free:
        return [tuple(fixed[v] for v in ring.variables)]
    last = free[-1]
    uni = [p for p in gb if p.support_variables() == {last}]
    if not uni:
        raise NotZeroDimensional("missing univariate eliminant")
    out = []
    for r in rational_roots(uni[0]):
        sub = dict(fixed)
        sub[last] = r
        J = Ideal(ring, list(gb) + [ring.var(last) - r])
        out.extend(_solve_lex(J, sub))
    return out
