"""Numerical invariants: image Milnor number, delta, VD-infinity, isotypes, Euler bookkeeping."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .errors import CertificateError, MpspaceError, NotFinite, NotZeroDimensional
from .groebner import syzygies as _syz
from .ideals import Ideal, colon, colength, koszul_euler_characteristic, local_colength, quotient_basis, saturate
from .modules import (DEFAULT_CAP_N, PolyMatrix, PresentedModule, fitting_ideal, homology_presentation,
                      jacobian_matrix, koszul_tor, module_local_colength, pushforward_presentation,
                      quotient_module, syzygy_matrix)
from .multipoint import MapGerm
from .poly import MonomialOrder, Polynomial, Ring
from .series import (BranchParam, DeltaResult, LiftedModule, delta_invariant, lifted_module,
                     milnor_from_delta)

__all__ = [
    "ImageMilnorResult", "image_equation", "relative_critical_ideal", "cm_certificate", "mu_image",
    "siersma_count", "delta_invariant", "milnor_from_delta", "theta_h_lifted", "vd_infinity",
    "IsotypeVector", "isotype_dims", "branched_cover_euler", "lefschetz_solve", "t1_dimension",
]


# --------------------------------------------------------------------------
# image Milnor number


@dataclass
class ImageMilnorResult:
    value: int | None
    method: str
    cm_certified: bool
    colength_value: int | None = None
    tor: list | None = None
    saturation_exponent: int | None = None
    notes: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "cm_certified": self.cm_certified,
            "colength_value": self.colength_value,
            "tor": [t if isinstance(t, int) else "not finite" for t in self.tor] if self.tor is not None else None,
            "saturation_exponent": self.saturation_exponent,
            "notes": list(self.notes),
        }


def image_equation(F: MapGerm, basis) -> Polynomial:
    """Generator of Fitt_0 of the pushforward (the determinant of a square presentation)."""
    P = pushforward_presentation(F, basis)
    if P.matrix.nrows == P.matrix.ncols:
        return P.matrix.det()
    fitt = fitting_ideal(P, 0)
    gb = fitt.groebner_basis()
    if len(gb) != 1:
        raise CertificateError("Fitt_0 of the pushforward is not principal")
    return gb[0]


def relative_critical_ideal(G: Polynomial, variables: Sequence[str],
                            exponent: bool = True) -> tuple[Ideal, int | None]:
    """(J^rel : G^infinity) for the partials of G in the listed variables."""
    ring = G.ring
    J = Ideal(ring, [G.diff(v) for v in variables])
    return saturate(J, G, exponent=exponent)


def working_ring(ring: Ring, params: Sequence[str]) -> Ring:
    """Same variables reordered for the saturation: free variables before
    parameters, each group in reverse declaration order (a measured choice)."""
    w = dict(zip(ring.variables, ring.weights))
    free = [v for v in reversed(ring.variables) if v not in params]
    par = [v for v in reversed(ring.variables) if v in params]
    names = free + par
    ws = [w[v] for v in names]
    return Ring(names, MonomialOrder("weighted", ws), ws)


def cm_certificate(Q: Ideal, params: Sequence[Polynomial]) -> bool:
    """Whether params form a regular sequence on R/Q.

    Graded case with Q + (params) of finite colength: R/Q is then a finite
    graded module over the parameter ring, free exactly when its minimal
    number of generators (the colength) equals its rank (the Hilbert series
    multiplicity).  Otherwise successive colon ideals are compared.
    """
    ring = Q.ring
    chi = koszul_euler_characteristic(Q, params)
    if chi is not None:
        try:
            return colength(Q + Ideal(ring, [ring(u) for u in params])) == chi
        except (NotZeroDimensional, NotFinite):
            pass
    current = Q
    for u in params:
        u = ring(u)
        if current.is_unit():
            return True
        if colon(current, u) != current:
            return False
        current = current + Ideal(ring, [u])
    return True


def _critical_count(G: Polynomial, variables: Sequence[str], params: Sequence[str], method: str,
                    cap_N: int, exponent: bool = False) -> ImageMilnorResult:
    ring = working_ring(G.ring, params)
    G = G.change_ring(ring)
    Q, k = relative_critical_ideal(G, variables, exponent)
    us = [ring.var(p) for p in params]
    if Q.is_unit():
        return ImageMilnorResult(0, "empty", True, 0, None, k, ["saturation is the unit ideal"])
    cm = cm_certificate(Q, us)
    col_value = None
    notes = []
    if method in ("colength", "auto"):
        try:
            col_value = local_colength(Q + Ideal(ring, us), cap_N)
        except NotFinite:
            notes.append("colength route is not finite")
    if method == "colength":
        if not cm:
            notes.append("Cohen-Macaulay certificate failed; value is an upper bound only")
        return ImageMilnorResult(col_value if cm else None, "colength", cm, col_value, None, k, notes)
    if method == "auto" and cm and col_value is not None:
        return ImageMilnorResult(col_value, "colength", cm, col_value, None, k, notes)
    tor = koszul_tor(quotient_module(Q), us, cap_N)
    if any(not isinstance(t, int) for t in tor):
        notes.append("a Tor module has infinite length")
        return ImageMilnorResult(None, "serre", cm, col_value, tor, k, notes)
    value = sum((-1) ** j * t for j, t in enumerate(tor))
    if cm and col_value is not None and col_value != value:
        raise CertificateError("colength and Serre routes disagree")
    return ImageMilnorResult(value, "serre", cm, col_value, tor, k, notes)


def mu_image(F: MapGerm, basis, method: str = "auto", cap_N: int = DEFAULT_CAP_N,
             G: Polynomial | None = None, exponent: bool = False) -> ImageMilnorResult:
    """Image Milnor number from an unfolding F with declared parameters.

    ``method`` is 'colength' (needs the CM certificate), 'serre' (Koszul Tor
    alternating sum) or 'auto' (colength when certified, else Serre).
    """
    if method not in ("auto", "colength", "serre"):
        raise ValueError(f"unknown method {method!r}")
    if G is None:
        G = image_equation(F, basis)
    variables = [v for v in F.target.variables if v not in F.unfolding]
    return _critical_count(G, variables, F.unfolding, method, cap_N, exponent)


def siersma_count(G: Polynomial, variables: Sequence[str], params: Sequence[str], method: str = "serre",
                  cap_N: int = DEFAULT_CAP_N, exponent: bool = False) -> ImageMilnorResult:
    """Number of critical points leaving the zero level, for a family of hypersurfaces G."""
    return _critical_count(G, variables, params, method, cap_N, exponent)


# --------------------------------------------------------------------------
# curves and VD-infinity


def theta_h_lifted(h: Polynomial, sigma_ideal: Ideal | None, branches: BranchParam,
                   cap_N: int = 64) -> LiftedModule:
    """Lift the fields annihilating h to the normalisation of its singular curve."""
    ring = h.ring
    if sigma_ideal is not None:
        probe = max(8, 2 * len(ring.variables))
        if not branches.check_vanishing([g.change_ring(ring) for g in sigma_ideal.gens], probe):
            raise CertificateError("branches do not lie on the singular curve")
    M = PolyMatrix(ring, [[h.diff(v) for v in ring.variables]])
    S = syzygy_matrix(M)
    fields = [list(c) for c in S.columns()]
    return lifted_module(fields, branches, cap_N=cap_N)


def vd_infinity(h: Polynomial, sigma_ideal: Ideal | None, branches: BranchParam,
                delta: int | None = None, cap_N: int = 64) -> tuple[int, int, int]:
    """(VD-infinity, colength, delta) with VD = colength - 3 delta."""
    lifted = theta_h_lifted(h, sigma_ideal, branches, cap_N)
    if delta is None:
        delta = delta_invariant(branches, cap_N=cap_N).delta
    return lifted.colength - 3 * delta, lifted.colength, delta


# --------------------------------------------------------------------------
# symmetric group isotypes


CHARACTERS = {
    2: {"trivial": (1, {(1, 1): 1, (2,): 1}), "sign": (1, {(1, 1): 1, (2,): -1})},
    3: {
        "trivial": (1, {(1, 1, 1): 1, (2, 1): 1, (3,): 1}),
        "sign": (1, {(1, 1, 1): 1, (2, 1): -1, (3,): 1}),
        "rho": (2, {(1, 1, 1): 2, (2, 1): 0, (3,): -1}),
    },
}


def cycle_type(perm: Sequence[int]) -> tuple[int, ...]:
    seen = set()
    lengths = []
    for i in range(len(perm)):
        if i in seen:
            continue
        n = 0
        j = i
        while j not in seen:
            seen.add(j)
            j = perm[j]
            n += 1
        lengths.append(n)
    return tuple(sorted(lengths, reverse=True))


@dataclass
class IsotypeVector:
    group: str
    dims: dict[str, int]

    def total(self) -> int:
        return sum(self.dims.values())

    def to_json(self) -> dict:
        return {"group": self.group, "dims": dict(self.dims)}


def slot_action(ring: Ring, blocks: Sequence[Sequence[str]], perm: Sequence[int]) -> dict:
    """Variable substitution moving slot i to slot perm[i]."""
    mapping = {v: ring.var(v) for v in ring.variables}
    for i, block in enumerate(blocks):
        for j, v in enumerate(block):
            mapping[v] = ring.var(blocks[perm[i]][j])
    return mapping


def isotype_dims(I: Ideal, blocks: Sequence[Sequence[str]]) -> IsotypeVector:
    """Isotypic dimensions of R/I under S_k permuting the k variable blocks.

    Uses characters: dim = deg(chi)/|G| * sum chi(sigma) trace(sigma), with
    traces read off normal forms in the standard monomial basis.
    """
    k = len(blocks)
    if k not in CHARACTERS:
        raise ValueError("only S_2 and S_3 are supported")
    ring = I.ring
    basis = quotient_basis(I)
    monos = basis.polynomials()
    position = {m.leading_monomial(): i for i, m in enumerate(monos)}
    traces: dict[tuple, object] = {}
    perms = list(itertools.permutations(range(k)))
    for perm in perms:
        mapping = slot_action(ring, blocks, perm)
        for g in I.gens:
            if not I.contains(g.substitute(mapping, ring)):
                raise CertificateError("the action does not preserve the ideal")
        tr = 0
        for m in monos:
            nf = I.reduce(m.substitute(mapping, ring))
            tr += nf.coefficient(m.leading_monomial())
        traces[perm] = tr
    dims = {}
    for name, (deg, chi) in CHARACTERS[k].items():
        total = sum(chi[cycle_type(p)] * traces[p] for p in perms)
        val = total * deg / len(perms)
        if val != int(val) or val < 0:
            raise CertificateError(f"non-integral isotype multiplicity for {name}")
        dims[name] = int(val)
    if sum(dims.values()) != len(monos):
        raise CertificateError("isotype dimensions do not add up to the colength")
    return IsotypeVector(f"S{k}", dims)


# --------------------------------------------------------------------------
# Euler characteristic bookkeeping


def branched_cover_euler(chi_base: int, branch_term: int) -> int:
    """Euler characteristic of a double cover: 2 chi(base) minus the branch contribution."""
    return 2 * chi_base - branch_term


def lefschetz_solve(fixed_count: int, hT: int) -> int:
    """Alternating part from the Lefschetz number of the involution (homology in degrees 0, 1)."""
    h = fixed_count - 1 + hT
    if h < 0:
        raise CertificateError("inconsistent Lefschetz data")
    return h


# --------------------------------------------------------------------------
# T^1


def t1_dimension(I: Ideal, cap_N: int = DEFAULT_CAP_N) -> int:
    """Local length of T^1 = Hom(I/I^2, R/I) / image of the ambient vector fields."""
    ring = I.ring
    gens = [g for g in I.groebner_basis()]
    if not gens or any(g.is_constant() for g in gens):
        return 0
    m = len(gens)
    zero = ring.zero()
    R = syzygy_matrix(PolyMatrix(ring, [gens]))
    rel_cols = R.columns()
    # phi in R^m with sum_i phi_i r_i in I for each relation r
    cols = []
    for i in range(m):
        cols.append(tuple(r[i] for r in rel_cols))
    s = len(rel_cols)
    I_cols = []
    for j in range(s):
        for g in gens:
            v = [zero] * s
            v[j] = g
            I_cols.append(tuple(v))
    syz = _syz(cols + I_cols, ring) if s else []
    Z = [tuple(v[:m]) for v in syz if any(v[:m])] if s else \
        [tuple(ring.one() if a == b else zero for a in range(m)) for b in range(m)]
    B = []
    for v in ring.variables:
        B.append(tuple(g.diff(v) for g in gens))
    for i in range(m):
        for g in gens:
            w = [zero] * m
            w[i] = g
            B.append(tuple(w))
    H = homology_presentation(ring, Z, B, m)
    if H.ngens == 0:
        return 0
    return module_local_colength(H, cap_N)
