"""Map-germs and their multiple point ideals."""

from __future__ import annotations

import itertools
from math import gcd
from dataclasses import dataclass, field
from typing import Sequence

from .errors import CertificateError, MpspaceError
from .ideals import (Ideal, RationalPointSet, colength, eliminate, rational_points, same_zero_set,
                     saturate_ideal)
from .modules import (PolyMatrix, PresentedModule, fitting_ideal, jacobian_matrix, matrix_concat,
                      minor_list, pushforward_presentation)
from .linalg import nullspace
from .poly import INHOMOGENEOUS, MonomialOrder, Polynomial, Ring, to_rational, weighted_degree


def find_weights(polys: Sequence[Polynomial], bound: int = 12) -> tuple[int, ...] | None:
    """Positive integer weights making every polynomial weighted homogeneous, if any.

    The weights solve the linear equations equating the degrees of the terms
    of each polynomial; a one-dimensional solution space is scaled directly,
    otherwise small positive integer points are searched.
    """
    ring = polys[0].ring
    n = ring.nvars
    rows = []
    for p in polys:
        exps = [e for e, _ in p.items()]
        for e in exps[1:]:
            rows.append([a - b for a, b in zip(e, exps[0])])
    kernel = nullspace(rows, n) if rows else [[1 if i == j else 0 for i in range(n)] for j in range(n)]
    if not kernel:
        return None
    if len(kernel) == 1:
        v = kernel[0]
        if not (all(x > 0 for x in v) or all(x < 0 for x in v)):
            return None
        den = 1
        for x in v:
            den = den * int(x.denominator) // gcd(den, int(x.denominator))
        ints = [abs(int(x * den)) for x in v]
        g = 0
        for x in ints:
            g = gcd(g, x)
        return tuple(x // g for x in ints)
    while bound > 1 and bound ** n > 200000:
        bound -= 1
    best = None
    for w in itertools.product(range(1, bound + 1), repeat=n):
        if all(sum(a * b for a, b in zip(r, w)) == 0 for r in rows):
            if best is None or sum(w) < sum(best):
                best = w
    return best


class MapGerm:
    """A polynomial map germ from the source ring to the target ring.

    ``params`` are unfolding parameters: names present in both rings whose
    component is the identity.  ``distinguished`` marks the kernel variable
    of a corank-1 germ in adapted form.
    """

    def __init__(self, source: Ring, target: Ring, components: Sequence, params: Sequence[str] = (),
                 distinguished: str | None = None, name: str = "", unfolding: Sequence[str] | None = None):
        self.source = source
        self.target = target
        self.components = tuple(source(c) for c in components)
        if len(self.components) != target.nvars:
            raise ValueError(f"{len(self.components)} components for {target.nvars} target variables")
        self.params = tuple(params)
        for p in self.params:
            source.index(p)
            target.index(p)
            if self.components[target.index(p)] != source.var(p):
                raise ValueError(f"parameter {p} must map to itself")
        if distinguished is not None:
            source.index(distinguished)
        self.distinguished = distinguished
        self.name = name
        # the deformation parameters proper; other params are shared coordinates
        self.unfolding = tuple(unfolding) if unfolding is not None else self.params
        if not set(self.unfolding) <= set(self.params):
            raise ValueError("unfolding parameters must be among the params")

    @classmethod
    def build(cls, source_vars, target_vars, components, params=(), source_weights=None,
              distinguished=None, name="", unfolding=None) -> "MapGerm":
        """Construct from names and strings; weights are searched for when omitted."""
        if isinstance(source_vars, str):
            source_vars = source_vars.replace(",", " ").split()
        if isinstance(target_vars, str):
            target_vars = target_vars.replace(",", " ").split()
        probe = Ring(source_vars)
        comps = [probe.parse(c) if isinstance(c, str) else c.change_ring(probe) for c in components]
        if source_weights is None:
            source_weights = find_weights(comps) or (1,) * len(source_vars)
        source = Ring(source_vars, "grevlex", source_weights)
        comps = [c.change_ring(source) for c in comps]
        tw = []
        for c in comps:
            d = weighted_degree(c, source_weights)
            tw.append(d if isinstance(d, int) and d > 0 else 1)
        target = Ring(target_vars, "grevlex", tw)
        if isinstance(params, str):
            params = params.replace(",", " ").split()
        if isinstance(unfolding, str):
            unfolding = unfolding.replace(",", " ").split()
        return cls(source, target, comps, params, distinguished, name, unfolding)

    # ---- properties
    @property
    def n(self) -> int:
        return self.source.nvars

    def free_variables(self) -> list[str]:
        return [v for v in self.source.variables if v not in self.params]

    def free_components(self) -> list[tuple[str, Polynomial]]:
        return [(t, c) for t, c in zip(self.target.variables, self.components) if t not in self.params]

    def is_homogeneous(self) -> bool:
        w = self.source.weights
        return all(isinstance(weighted_degree(c, w), int) and weighted_degree(c, w) > 0
                   for c in self.components)

    def target_weights(self) -> tuple[int, ...]:
        return self.target.weights

    def identified_variables(self) -> dict[str, str]:
        """Source variables equal to some target component (source name -> target name)."""
        out: dict[str, str] = {}
        for t, c in zip(self.target.variables, self.components):
            if len(c) == 1:
                (e, coeff), = c.items()
                if coeff == 1 and sum(e) == 1:
                    v = self.source.variables[e.index(1)]
                    if v not in out:
                        out[v] = t
        return out

    def pullback(self, p: Polynomial) -> Polynomial:
        mapping = dict(zip(self.target.variables, self.components))
        return p.change_ring(self.target).substitute(mapping, self.source)

    def pullback_ideal(self, I: Ideal) -> Ideal:
        return Ideal(self.source, [self.pullback(g) for g in I.gens])

    def jacobian(self) -> PolyMatrix:
        return jacobian_matrix(self.components, self.source.variables, self.source)

    def specialise(self, values: dict) -> "MapGerm":
        """Fix some parameters to rational values (those names leave both rings)."""
        values = {k: to_rational(v) for k, v in values.items()}
        sv = [v for v in self.source.variables if v not in values]
        tv = [v for v in self.target.variables if v not in values]
        sw = [self.source.weights[self.source.index(v)] for v in sv]
        src = Ring(sv, "grevlex", sw)
        mapping = {v: src.var(v) for v in sv}
        mapping.update(values)
        comps = [c.substitute(mapping, src) for t, c in zip(self.target.variables, self.components)
                 if t not in values]
        tw = [self.target.weights[self.target.index(v)] for v in tv]
        tgt = Ring(tv, "grevlex", tw)
        params = [p for p in self.params if p not in values]
        unfolding = [p for p in self.unfolding if p not in values]
        return MapGerm(src, tgt, comps, params, self.distinguished if self.distinguished in sv else None,
                       self.name, unfolding)

    def __repr__(self):
        comps = ", ".join(str(c) for c in self.components)
        return f"MapGerm(({', '.join(self.source.variables)}) -> ({comps}))"


@dataclass
class MultiGerm:
    """Several germs sharing one target (a multi-germ)."""

    branches: list[MapGerm]

    def __post_init__(self):
        if not self.branches:
            raise ValueError("a multi-germ needs at least one branch")
        t = self.branches[0].target.variables
        if any(b.target.variables != t for b in self.branches):
            raise ValueError("branches must share the target ring")

    @property
    def target(self) -> Ring:
        return self.branches[0].target


# --------------------------------------------------------------------------
# double points


def _slot_names(f: MapGerm, slots: int, style: str = "underscore") -> list[dict[str, str]]:
    taken = set(f.params)
    out = []
    for k in range(1, slots + 1):
        names = {}
        for v in f.free_variables():
            name = f"{v}_{k}" if style == "underscore" else f"{v}{k}"
            names[v] = name
        out.append(names)
    allnames = [n for d in out for n in d.values()]
    if len(set(allnames)) != len(allnames) or taken & set(allnames) or \
            set(allnames) & set(f.source.variables):
        if style != "underscore":
            return _slot_names(f, slots, "underscore")
        raise ValueError("cannot name the copies of the source variables")
    return out


def divided_difference(p: Polynomial, var: str, a: str, b: str, ring: Ring,
                       mapping: dict) -> Polynomial:
    """(p|var=a - p|var=b) / (a - b), other variables sent through ``mapping``."""
    i = p.ring.index(var)
    A, B = ring.var(a), ring.var(b)
    total = ring.zero()
    powA = [ring.one()]
    powB = [ring.one()]
    cache: dict = {}
    for e, c in p.items():
        k = e[i]
        if k == 0:
            continue
        while len(powA) < k:
            powA.append(powA[-1] * A)
            powB.append(powB[-1] * B)
        h = cache.get(k)
        if h is None:
            h = ring.zero()
            for m in range(k):
                h = h + powA[m] * powB[k - 1 - m]
            cache[k] = h
        rest = p.ring.monomial(e[:i] + (0,) + e[i + 1:], c)
        total = total + rest.substitute(mapping, ring) * h
    return total


def alpha_matrix(f: MapGerm, ring: Ring | None = None):
    """The matrix of telescoping divided differences for f x f.

    Row i, column j holds the difference quotient of f_i in x_j, evaluated at
    (x2_1, ..., x2_{j-1}, *, x1_{j+1}, ..., x1_n).  Returns (matrix, ring, slots).
    """
    slots = _slot_names(f, 2)
    if ring is None:
        ring = Ring([slots[0][v] for v in f.free_variables()] + [slots[1][v] for v in f.free_variables()]
                    + list(f.params), "grevlex",
                    [f.source.weights[f.source.index(v)] for v in f.free_variables()] * 2
                    + [f.source.weights[f.source.index(p)] for p in f.params])
    free = f.free_variables()
    rows = []
    for _, comp in f.free_components():
        row = []
        for j, v in enumerate(free):
            mapping = {p: ring.var(p) for p in f.params}
            for k, u in enumerate(free):
                if k < j:
                    mapping[u] = ring.var(slots[1][u])
                elif k > j:
                    mapping[u] = ring.var(slots[0][u])
            row.append(divided_difference(comp, v, slots[0][v], slots[1][v], ring, mapping))
        rows.append(row)
    return PolyMatrix(ring, rows), ring, slots


def double_point_ideal(f: MapGerm) -> Ideal:
    """I_2(f): pulled-back diagonal plus maximal minors of the alpha matrix."""
    alpha, ring, slots = alpha_matrix(f)
    gens = []
    for _, comp in f.free_components():
        m1 = {v: ring.var(slots[0][v]) for v in f.free_variables()}
        m2 = {v: ring.var(slots[1][v]) for v in f.free_variables()}
        for p in f.params:
            m1[p] = m2[p] = ring.var(p)
        d = comp.substitute(m1, ring) - comp.substitute(m2, ring)
        if d:
            gens.append(d)
    n = len(f.free_variables())
    gens += minor_list(alpha, n) if n <= alpha.nrows else []
    return Ideal(ring, gens)


def swap_slots(I: Ideal, f: MapGerm) -> Ideal:
    """Image of a double point ideal under exchanging the two copies."""
    slots = _slot_names(f, 2)
    ring = I.ring
    mapping = {v: ring.var(v) for v in ring.variables}
    for v in f.free_variables():
        mapping[slots[0][v]] = ring.var(slots[1][v])
        mapping[slots[1][v]] = ring.var(slots[0][v])
    return Ideal(ring, [g.substitute(mapping, ring) for g in I.gens])


def complete_homogeneous(ring: Ring, names: Sequence[str], degree: int) -> Polynomial:
    """Sum of all monomials of the given degree in the listed variables."""
    if degree < 0:
        return ring.zero()
    idx = [ring.index(v) for v in names]
    total = {}
    n = ring.nvars
    for combo in itertools.combinations_with_replacement(idx, degree):
        e = [0] * n
        for i in combo:
            e[i] += 1
        total[tuple(e)] = 1
    return Polynomial(ring, total)


def corank1_dk_ideal(f: MapGerm, k: int) -> Ideal:
    """Ideal of D^k for a corank-1 germ in adapted form, by iterated divided differences."""
    y = f.distinguished
    if y is None:
        raise MpspaceError("corank-1 construction needs a distinguished variable")
    others = [v for v in f.source.variables if v != y]
    comps = list(f.components)
    bare = []
    for v in others:
        if f.source.var(v) not in comps:
            raise MpspaceError(f"germ is not in adapted corank-1 form: {v} is not a component")
        bare.append(comps.index(f.source.var(v)))
    ynames = [f"{y}{i}" for i in range(1, k + 1)]
    if set(ynames) & set(others):
        ynames = [f"{y}_{i}" for i in range(1, k + 1)]
    wy = f.source.weights[f.source.index(y)]
    ring = Ring(others + ynames, "grevlex",
                [f.source.weights[f.source.index(v)] for v in others] + [wy] * k)
    yi = f.source.index(y)
    gens = []
    for j, c in enumerate(comps):
        if j in bare:
            continue
        # split c = sum_d c_d(others) y^d
        by_deg: dict[int, dict] = {}
        for e, coeff in c.items():
            by_deg.setdefault(e[yi], {})[e[:yi] + (0,) + e[yi + 1:]] = coeff
        for order in range(1, k):
            total = ring.zero()
            for d, terms in by_deg.items():
                if d < order:
                    continue
                coeff = Polynomial(f.source, terms, True)
                cpoly = coeff.substitute({v: ring.var(v) for v in others}, ring)
                total = total + cpoly * complete_homogeneous(ring, ynames[:order + 1], d - order)
            if total:
                gens.append(total)
    return Ideal(ring, gens)


# --------------------------------------------------------------------------
# target loci via Fitting ideals


def target_multiple_locus(f: MapGerm, k: int, basis, presentation: PresentedModule | None = None) -> Ideal:
    P = presentation or pushforward_presentation(f, basis)
    return fitting_ideal(P, k - 1)


def source_multiple_locus(f: MapGerm, k: int, basis, presentation: PresentedModule | None = None) -> Ideal:
    return f.pullback_ideal(target_multiple_locus(f, k, basis, presentation))


def source_triple_locus(f: MapGerm, basis, presentation: PresentedModule | None = None) -> Ideal:
    return source_multiple_locus(f, 3, basis, presentation)


def ramification_ideal(f: MapGerm) -> Ideal:
    J = f.jacobian()
    return Ideal(f.source, minor_list(J, min(J.nrows, J.ncols)))


def sigma11_ideal(f: MapGerm) -> Ideal:
    """Maximal minors of the jacobian stacked with the jacobian of R_f's generators."""
    J = f.jacobian()
    R = ramification_ideal(f)
    gens = R.groebner_basis()
    if any(g.is_constant() for g in gens):
        return Ideal.unit(f.source)
    dR = jacobian_matrix(gens, f.source.variables, f.source)
    M = matrix_concat(J, dR, "vertical")
    return Ideal(f.source, minor_list(M, J.ncols))


def image_of_locus(f: MapGerm, J: Ideal) -> Ideal:
    """Kernel of O_target -> O_source / J, i.e. the ideal of f(V(J))'s closure."""
    src, tgt = f.source, f.target
    names = list(src.variables) + [v for v in tgt.variables if v not in src.variables]
    if len(set(names)) != len(names):
        raise ValueError("source and target names clash")
    # target names equal to source names are parameters; they stay shared
    big = Ring(names, "grevlex", [src.weights[src.index(v)] for v in src.variables]
               + [tgt.weights[tgt.index(v)] for v in tgt.variables if v not in src.variables])
    gens = [g.change_ring(big) for g in J.gens]
    for t, c in zip(tgt.variables, f.components):
        if t in src.variables:
            continue
        gens.append(big.var(t) - c.change_ring(big))
    elim = [v for v in src.variables if v not in tgt.variables]
    return eliminate(Ideal(big, gens), elim).change_ring(tgt)


def pushforward_quotient_fitting0(f: MapGerm, J: Ideal, basis) -> Ideal:
    """Fitt_0 of f_*(O/J) with the given generators."""
    from .groebner import ModuleGB
    src, tgt = f.source, f.target
    basis = [src(b) for b in basis]
    names = list(src.variables) + [v for v in tgt.variables if v not in src.variables]
    big = Ring(names, "grevlex", [src.weights[src.index(v)] for v in src.variables]
               + [tgt.weights[tgt.index(v)] for v in tgt.variables if v not in src.variables])
    m = len(basis)
    rank = m + 1
    zero = big.zero()
    gens = []
    for i, b in enumerate(basis):
        v = [zero] * rank
        v[0] = b.change_ring(big)
        v[i + 1] = big.one()
        gens.append(tuple(v))
    rel = [big.var(t) - c.change_ring(big) for t, c in zip(tgt.variables, f.components)
           if t not in src.variables]
    for g in rel + [g.change_ring(big) for g in J.gens]:
        v = [zero] * rank
        v[0] = g
        gens.append(tuple(v))
    elim = [v for v in src.variables if v not in tgt.variables]
    ne = len(elim)
    order_vars = elim + [v for v in names if v not in elim]
    big2 = Ring(order_vars, "grevlex", [big.weights[big.index(v)] for v in order_vars])
    gens = [tuple(p.change_ring(big2) for p in g) for g in gens]
    nt = big2.nvars - ne
    w = big2.weights
    xrows = [tuple(w[j] if j < stop else 0 for j in range(ne)) + (0,) * nt for stop in range(ne, 0, -1)]
    yrows = [(0,) * ne + tuple(w[ne + j] if j < stop else 0 for j in range(nt)) for stop in range(nt, 0, -1)]
    zp = (0,) * rank
    rows = [(r, zp) for r in xrows]
    rows.append(((0,) * big2.nvars, tuple(1 if p == 0 else 0 for p in range(rank))))
    rows += [(r, zp) for r in yrows]
    rows.append(((0,) * big2.nvars, tuple(rank - 1 - p for p in range(rank))))
    gb = ModuleGB(big2, rank, gens, rows)
    es = set(elim)
    rels = []
    for vec in gb.vectors:
        if vec[0] or any(p.support_variables() & es for p in vec):
            continue
        rels.append([p.change_ring(tgt) for p in vec[1:]])
    if len(rels) < m:
        return Ideal(tgt, [])
    M = PolyMatrix.from_columns(tgt, rels, m)
    return Ideal(tgt, minor_list(M, m))


@dataclass
class ShadowResult:
    ideal: Ideal
    candidate: Ideal
    certified: bool
    saturation_exponent: int | None = None


def shadow_ideal(f: MapGerm, radical_candidate: Ideal | None = None, basis=None,
                 certify: bool = True) -> ShadowResult:
    """I_2 = f^*(I_0) : R_f^infinity, I_0 a certified radical of Fitt_0(f_*(O/R_f)).

    Without a candidate the image ideal of Sigma f is used: it is the kernel
    of a map to a reduced ring whenever R_f is radical, and it is checked
    against the Fitting ideal by a zero-set comparison either way.
    """
    R = ramification_ideal(f)
    if R.is_unit():
        return ShadowResult(Ideal.unit(f.source), Ideal.unit(f.target), True, 0)
    cand = radical_candidate if radical_candidate is not None else image_of_locus(f, R)
    certified = False
    if certify and basis is not None:
        fitt0 = pushforward_quotient_fitting0(f, R, basis)
        certified = same_zero_set(cand, fitt0)
        if not certified:
            raise CertificateError("radical candidate does not cut out the support of f_*(O/R_f)")
    I1 = f.pullback_ideal(cand)
    I2 = saturate_ideal(I1, Ideal(f.source, R.groebner_basis()))
    return ShadowResult(I2, cand, certified)


# --------------------------------------------------------------------------
# multi-germ points


@dataclass
class LabelledPoints:
    """Points of D^k of a multi-germ; each point is a tuple of (branch, coordinates)."""

    k: int
    points: list[tuple]
    complete: bool = True

    def __len__(self):
        return len(self.points)


def multigerm_dk_points(g: MultiGerm, k: int, params: dict | None = None) -> LabelledPoints:
    """Rational points of D^k across all ordered branch combinations.

    Slots sharing a branch are tied by divided differences (corank-1 curve
    branches); slots on different branches must have equal images.
    """
    params = params or {}
    branches = [b.specialise({p: v for p, v in params.items() if p in b.source.variables})
                if params else b for b in g.branches]
    out = []
    complete = True
    nb = len(branches)
    for combo in itertools.product(range(nb), repeat=k):
        pts, ok = _combo_points(branches, combo, params)
        complete = complete and ok
        out.extend(pts)
    out = sorted(set(out))
    return LabelledPoints(k, out, complete)


def _combo_points(branches, combo, params):
    k = len(combo)
    names = []
    slot_vars = []
    for s, b in enumerate(combo):
        br = branches[b]
        vs = [f"{v}_s{s}" for v in br.source.variables if v not in params]
        slot_vars.append(vs)
        names += vs
    tgt = branches[0].target
    tvars = [v for v in tgt.variables if v not in params]
    ring = Ring(names, "grevlex")
    gens = []
    images = []
    for s, b in enumerate(combo):
        br = branches[b]
        mapping = {v: ring.var(n) for v, n in zip([v for v in br.source.variables if v not in params],
                                                   slot_vars[s])}
        for p, val in params.items():
            if p in br.source.variables:
                mapping[p] = val
        images.append([br.components[br.target.index(t)].substitute(mapping, ring)
                       if t in br.target.variables else ring.zero() for t in tvars])
    groups: dict[int, list[int]] = {}
    for s, b in enumerate(combo):
        groups.setdefault(b, []).append(s)
    # equal images across slots
    for s in range(1, k):
        for a, c in zip(images[0], images[s]):
            if a != c:
                gens.append(a - c)
    # slots on one branch: divided differences of every order
    for b, slots in groups.items():
        if len(slots) < 2:
            continue
        br = branches[b]
        free = [v for v in br.source.variables if v not in params]
        if len(free) != 1:
            raise MpspaceError("repeated slots need curve branches")
        (v,) = free
        yn = [slot_vars[s][0] for s in slots]
        for comp in br.components:
            vi = br.source.index(v)
            for order in range(1, len(yn)):
                total = ring.zero()
                for e, c in comp.items():
                    d = e[vi]
                    if d >= order:
                        total = total + ring.const(c) * complete_homogeneous(ring, yn[:order + 1], d - order)
                if total:
                    gens.append(total)
    I = Ideal(ring, gens)
    if I.is_unit():
        return [], True
    ps = rational_points(I, strict=False)
    labelled = []
    for p in ps.points:
        label = tuple((combo[s], tuple(p[names.index(n)] for n in slot_vars[s])) for s in range(k))
        labelled.append(label)
    # points with repeated source points inside one branch are kept: they carry no
    # alternating class and the orbit code drops them
    return labelled, ps.complete
