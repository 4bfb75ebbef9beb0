"""Polynomial matrices and finitely presented modules.

A ``PresentedModule`` is the cokernel of its presentation matrix acting on
column vectors: generators correspond to rows, relations to columns.
"""

from __future__ import annotations

import itertools
from typing import Sequence

from .errors import CertificateError, DimensionMismatchError, NotFinite, NotZeroDimensional, RingMismatchError
from .groebner import ModuleGB, syzygies as _syzygies
from .ideals import Ideal, _grading, _standard_monomials, colength, colon, quotient_length
from .ideals import intersect, koszul_euler_characteristic
from .poly import INHOMOGENEOUS, MonomialOrder, Polynomial, Ring, weighted_degree

DEFAULT_CAP_N = 64


class PolyMatrix:
    """Rectangular matrix of polynomials over one ring."""

    def __init__(self, ring: Ring, rows: Sequence[Sequence]):
        rows = [[ring(e) for e in row] for row in rows]
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise DimensionMismatchError("matrix rows have different lengths")
        self.ring = ring
        self.rows = rows

    @classmethod
    def from_columns(cls, ring: Ring, columns: Sequence[Sequence], nrows: int | None = None):
        columns = [list(c) for c in columns]
        if not columns:
            return cls(ring, [[] for _ in range(nrows or 0)])
        return cls(ring, [list(r) for r in zip(*columns)])

    @classmethod
    def identity(cls, ring: Ring, n: int) -> "PolyMatrix":
        return cls(ring, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def columns(self) -> list[tuple[Polynomial, ...]]:
        return [tuple(self.rows[i][j] for i in range(self.nrows)) for j in range(self.ncols)]

    def transpose(self) -> "PolyMatrix":
        return PolyMatrix(self.ring, [list(c) for c in self.columns()])

    def __mul__(self, other: "PolyMatrix") -> "PolyMatrix":
        if self.ncols != other.nrows:
            raise DimensionMismatchError(f"cannot multiply {self.shape} by {other.shape}")
        zero = self.ring.zero()
        out = []
        for row in self.rows:
            new = []
            for j in range(other.ncols):
                acc = zero
                for k, a in enumerate(row):
                    b = other.rows[k][j]
                    if a and b:
                        acc = acc + a * b
                new.append(acc)
            out.append(new)
        return PolyMatrix(self.ring, out)

    def __eq__(self, other):
        return isinstance(other, PolyMatrix) and self.ring == other.ring and self.rows == other.rows

    def is_zero(self) -> bool:
        return all(not e for row in self.rows for e in row)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "PolyMatrix":
        return PolyMatrix(self.ring, [[self.rows[i][j] for j in cols] for i in rows])

    def substitute(self, mapping, ring: Ring) -> "PolyMatrix":
        return PolyMatrix(ring, [[e.substitute(mapping, ring, keep_missing=True) for e in row]
                                 for row in self.rows])

    def change_ring(self, ring: Ring) -> "PolyMatrix":
        return PolyMatrix(ring, [[e.change_ring(ring) for e in row] for row in self.rows])

    def det(self) -> Polynomial:
        if self.nrows != self.ncols:
            raise DimensionMismatchError("determinant of a non-square matrix")
        return _det(self.rows, tuple(range(self.nrows)), tuple(range(self.ncols)), {}, self.ring)

    def to_json(self) -> list[list[str]]:
        return [[str(e) for e in row] for row in self.rows]

    @classmethod
    def from_json(cls, ring: Ring, data) -> "PolyMatrix":
        return cls(ring, [[ring.parse(str(e)) for e in row] for row in data])

    def __str__(self):
        return "\n".join("[" + ", ".join(str(e) for e in row) + "]" for row in self.rows)

    def __repr__(self):
        return f"PolyMatrix({self.to_json()})"


def _det(rows, ri: tuple, ci: tuple, memo: dict, ring: Ring) -> Polynomial:
    """Laplace expansion along the first listed column, memoised on row subsets."""
    if not ci:
        return ring.one()
    key = (ri, ci)
    hit = memo.get(key)
    if hit is not None:
        return hit
    c = ci[0]
    rest = ci[1:]
    total = ring.zero()
    for k, r in enumerate(ri):
        e = rows[r][c]
        if not e:
            continue
        sub = _det(rows, ri[:k] + ri[k + 1:], rest, memo, ring)
        if sub:
            term = e * sub
            total = total - term if k % 2 else total + term
    memo[key] = total
    return total


def minors(M: PolyMatrix, k: int) -> Ideal:
    """Ideal of all k x k minors."""
    if not 1 <= k <= min(M.nrows, M.ncols):
        raise ValueError(f"minor size {k} out of range for a {M.nrows}x{M.ncols} matrix")
    return Ideal(M.ring, minor_list(M, k))


def minor_list(M: PolyMatrix, k: int) -> list[Polynomial]:
    out = []
    seen = set()
    for cols in itertools.combinations(range(M.ncols), k):
        memo: dict = {}
        for rows in itertools.combinations(range(M.nrows), k):
            d = _det(M.rows, rows, cols, memo, M.ring)
            if d and d not in seen:
                seen.add(d)
                out.append(d)
    return out


def matrix_concat(A: PolyMatrix, B: PolyMatrix, axis: str = "horizontal") -> PolyMatrix:
    """Block concatenation: 'horizontal' puts B to the right, 'vertical' below."""
    if A.ring != B.ring:
        raise RingMismatchError("matrices over different rings")
    if axis in ("horizontal", 1, "columns"):
        if A.nrows != B.nrows:
            raise DimensionMismatchError("row counts differ")
        return PolyMatrix(A.ring, [ra + rb for ra, rb in zip(A.rows, B.rows)])
    if axis in ("vertical", 0, "rows"):
        if A.ncols != B.ncols:
            raise DimensionMismatchError("column counts differ")
        return PolyMatrix(A.ring, A.rows + B.rows)
    raise ValueError(f"unknown axis {axis!r}")


def jacobian_matrix(polys: Sequence[Polynomial], variables: Sequence[str], ring: Ring | None = None) -> PolyMatrix:
    ring = ring or polys[0].ring
    return PolyMatrix(ring, [[p.diff(v) for v in variables] for p in polys])


def syzygy_matrix(M: PolyMatrix) -> PolyMatrix:
    """Matrix whose columns generate the kernel of M acting on columns."""
    if M.ncols == 0:
        return PolyMatrix(M.ring, [])
    cols = M.columns()
    if M.nrows == 0:
        return PolyMatrix.identity(M.ring, M.ncols)
    syz = [s for s in _syzygies(cols, M.ring) if any(s)]
    return PolyMatrix.from_columns(M.ring, syz, M.ncols) if syz else \
        PolyMatrix(M.ring, [[] for _ in range(M.ncols)])


class PresentedModule:
    """Cokernel of ``matrix`` (generators = rows, relations = columns)."""

    def __init__(self, matrix: PolyMatrix, labels: Sequence[str] | None = None,
                 weights: Sequence[int] | None = None):
        self.matrix = matrix
        self.ring = matrix.ring
        if labels is None:
            labels = [f"e{i}" for i in range(matrix.nrows)]
        if len(labels) != matrix.nrows:
            raise DimensionMismatchError("one label per generator required")
        self.labels = list(labels)
        # degree of each generator, when the module is graded
        self.weights = list(weights) if weights is not None else None

    @property
    def ngens(self) -> int:
        return self.matrix.nrows

    def fitting_ideal(self, k: int) -> Ideal:
        return fitting_ideal(self, k)

    def local_colength(self, cap_N: int = DEFAULT_CAP_N) -> int:
        return module_local_colength(self, cap_N)


def fitting_ideal(M: PresentedModule, k: int) -> Ideal:
    """Fitt_k: ideal of minors of size (#generators - k) of the presentation."""
    if k < 0:
        raise ValueError("Fitting index must be non-negative")
    size = M.ngens - k
    if size <= 0:
        return Ideal.unit(M.ring)
    if size > M.matrix.ncols:
        return Ideal(M.ring, [])
    return minors(M.matrix, size)


# --------------------------------------------------------------------------
# module colength


def _module_weights_ok(M: PresentedModule, w) -> bool:
    """Is every column homogeneous for the generator degrees and weights w?"""
    if M.weights is None:
        return False
    for col in M.matrix.columns():
        degs = set()
        for shift, p in zip(M.weights, col):
            d = weighted_degree(p, w)
            if d is INHOMOGENEOUS:
                return False
            if isinstance(d, int):
                degs.add(d + shift)
        if len(degs) > 1:
            return False
    return True


def _module_standard_count(gb: ModuleGB, rank: int) -> int:
    ring = gb.ring
    leads = gb.leads()
    total = 0
    for pos in range(rank):
        lp = [e for e, p in leads if p == pos]
        if not lp:
            raise NotFinite("a free summand survives in the quotient")
        if any(not any(e) for e in lp):
            continue
        total += len(_standard_monomials(ring, lp))
    return total


def _power_columns(ring: Ring, rank: int, N: int):
    zero = ring.zero()
    cols = []
    for pos in range(rank):
        for v in ring.gens():
            col = [zero] * rank
            col[pos] = v ** N
            cols.append(tuple(col))
    return cols


def module_local_colength(M: PresentedModule, cap_N: int = DEFAULT_CAP_N) -> int:
    """Length at the origin of coker(matrix).

    If the global quotient is finite of dimension D, the local part is killed
    by m^D, so adding x_i^D e_j changes nothing at the origin and removes
    every other point of the support.  Otherwise fall back to stabilisation
    of the lengths after adding x_i^N e_j.
    """
    ring = M.ring
    rank = M.ngens
    if rank == 0:
        return 0
    cols = [c for c in M.matrix.columns() if any(c)]
    gb = ModuleGB(ring, rank, cols) if cols else None
    D = None
    if gb is not None:
        try:
            D = _module_standard_count(gb, rank)
        except (NotFinite, NotZeroDimensional):
            D = None
    if D is not None:
        if D == 0:
            return 0
        homog = _module_weights_ok(M, ring.weights) or _module_weights_ok(M, (1,) * ring.nvars)
        powers = _power_columns(ring, rank, D)
        if homog or all(gb.contains(c) for c in powers):
            return D
        return _module_standard_count(ModuleGB(ring, rank, cols + powers), rank)
    N = 1
    while N <= cap_N:
        d1 = _module_standard_count(ModuleGB(ring, rank, cols + _power_columns(ring, rank, N)), rank)
        d2 = _module_standard_count(ModuleGB(ring, rank, cols + _power_columns(ring, rank, N + 1)), rank)
        if d1 == d2:
            return d1
        N *= 2
    raise NotFinite(f"module length did not stabilise for N <= {cap_N}")


# --------------------------------------------------------------------------
# pushforward


def pushforward_presentation(f, basis: Sequence[str | Polynomial]) -> PresentedModule:
    """Presentation of f_* O_source over the target ring with the given generators.

    ``f`` is a MapGerm.  The relations are the elements of the graph module
    free of source variables, found with an elimination module order.
    """
    src, tgt = f.source, f.target
    basis = [src(b) for b in basis]
    m = len(basis)
    ident = f.identified_variables()
    kept = [v for v in src.variables if v not in ident]
    sw = [src.weights[src.index(v)] for v in kept]
    tw = list(f.target_weights())
    big = Ring(kept + list(tgt.variables), "grevlex", sw + tw)
    mapping = {v: big.var(v) for v in kept}
    for s, t in ident.items():
        mapping[s] = big.var(t)
    comps = [c.substitute(mapping, big) for c in f.components]
    graph = []
    for t, c in zip(tgt.variables, comps):
        if t in ident.values() and c == big.var(t):
            continue
        graph.append(big.var(t) - c)
    bvec = [b.substitute(mapping, big) for b in basis]
    rank = m + 1
    zero = big.zero()
    gens = []
    for i, b in enumerate(bvec):
        v = [zero] * rank
        v[0] = b
        v[i + 1] = big.one()
        gens.append(tuple(v))
    for g in graph:
        v = [zero] * rank
        v[0] = g
        gens.append(tuple(v))
    nk = len(kept)
    nt = len(tgt.variables)
    xrows = _wrevlex(sw, nk)
    yrows = _wrevlex(tw, nt)
    zero_pos = (0,) * rank
    rows = [(r + (0,) * nt, zero_pos) for r in xrows]
    rows.append(((0,) * (nk + nt), tuple(1 if p == 0 else 0 for p in range(rank))))
    rows += [((0,) * nk + r, zero_pos) for r in yrows]
    rows.append(((0,) * (nk + nt), tuple(rank - 1 - p for p in range(rank))))
    gb = ModuleGB(big, rank, gens, rows, weights=sw + tw)
    kset = set(kept)
    rels = []
    for vec in gb.vectors:
        if vec[0]:
            continue
        if any(p.support_variables() & kset for p in vec):
            continue
        rels.append(tuple(p.change_ring(tgt) for p in vec[1:]))
    # degree of generator i is the weighted degree of basis[i]
    gdeg = [weighted_degree(b, src.weights) for b in basis]
    if all(isinstance(d, int) for d in gdeg) and f.is_homogeneous():
        rels = _minimal_generators(tgt, m, rels, gdeg, tw)
    if len(rels) < m or not _spans_quotient(f, basis):
        raise CertificateError("basis does not generate the pushforward")
    matrix = PolyMatrix.from_columns(tgt, rels, m)
    return PresentedModule(matrix, [str(b) for b in basis], gdeg)


def _wrevlex(w, n):
    return [tuple(w[j] if j < stop else 0 for j in range(n)) for stop in range(n, 0, -1)]


def _vector_degree(v, gdeg, w):
    for p, d in zip(v, gdeg):
        if p:
            return weighted_degree(p, w) + d
    return 0


def _minimal_generators(ring: Ring, rank: int, vecs, gdeg, w):
    vecs = sorted(vecs, key=lambda v: _vector_degree(v, gdeg, w))
    kept = []
    gb = None
    for v in vecs:
        if gb is not None and gb.contains(v):
            continue
        kept.append(v)
        gb = ModuleGB(ring, rank, kept)
    return kept


def _spans_quotient(f, basis) -> bool:
    """Do the basis monomials span O_source / f^* m_target?"""
    from .ideals import quotient_basis
    src = f.source
    I = Ideal(src, f.components)
    try:
        qb = quotient_basis(I)
    except Exception:
        return True
    if len(qb) != len(basis):
        return False
    # normal forms of the basis must be linearly independent
    nfs = [I.reduce(b) for b in basis]
    return _rank_of_polys(nfs) == len(basis)


def _rank_of_polys(polys) -> int:
    from .linalg import rank
    monos = sorted({e for p in polys for e in p.terms})
    mat = [[p.terms.get(e, 0) for e in monos] for p in polys]
    return rank(mat)


# --------------------------------------------------------------------------
# Koszul homology


def _koszul_differential(seq, j: int, ring: Ring):
    """Matrix of d_j: K_j -> K_{j-1} for the Koszul complex of seq (basis: sorted subsets)."""
    s = len(seq)
    src = list(itertools.combinations(range(s), j))
    tgt = list(itertools.combinations(range(s), j - 1))
    index = {t: i for i, t in enumerate(tgt)}
    zero = ring.zero()
    rows = [[zero] * len(src) for _ in tgt]
    for c, S in enumerate(src):
        for k, i in enumerate(S):
            T = S[:k] + S[k + 1:]
            entry = seq[i] if k % 2 == 0 else -seq[i]
            rows[index[T]][c] = entry
    return rows, len(tgt), len(src)


def _kron_identity(rows, nr: int, nc: int, a: int, ring: Ring):
    """rows (nr x nc) tensor identity_a, acting blockwise."""
    zero = ring.zero()
    out = [[zero] * (nc * a) for _ in range(nr * a)]
    for i in range(nr):
        for j in range(nc):
            e = rows[i][j]
            if e:
                for k in range(a):
                    out[i * a + k][j * a + k] = e
    return out


def _block_diag(P: PolyMatrix, copies: int):
    ring = P.ring
    zero = ring.zero()
    a, c = P.shape
    cols = []
    for b in range(copies):
        for col in P.columns():
            v = [zero] * (a * copies)
            v[b * a:(b + 1) * a] = col
            cols.append(tuple(v))
    return cols


def homology_presentation(ring: Ring, Z: list, B: list, ambient: int) -> PresentedModule:
    """Presentation of (span Z + span B) / span B, given generators in R^ambient."""
    Z = [z for z in Z if any(z)]
    if not Z:
        return PresentedModule(PolyMatrix(ring, []), [])
    p = len(Z)
    syz = _syzygies(Z + [b for b in B if any(b)], ring)
    rels = [tuple(s[:p]) for s in syz if any(s[:p])]
    mat = PolyMatrix.from_columns(ring, rels, p) if rels else PolyMatrix(ring, [[] for _ in range(p)])
    return PresentedModule(mat)


def koszul_homology(M: PresentedModule, seq: Sequence[Polynomial]) -> list[PresentedModule]:
    """Presentations of H_j(seq; M) for j = 0..len(seq)."""
    ring = M.ring
    seq = [ring(s) for s in seq]
    s = len(seq)
    a = M.ngens
    P = M.matrix
    out = []
    for j in range(s + 1):
        nj = _binom(s, j)
        ambient = a * nj
        # cycles: v in R^{a nj} whose image lies in the relations of K_{j-1}
        if j == 0:
            Z = [tuple(ring.one() if i == k else ring.zero() for i in range(ambient))
                 for k in range(ambient)]
        else:
            rows, nr, nc = _koszul_differential(seq, j, ring)
            D = _kron_identity(rows, nr, nc, a, ring)
            Dcols = [tuple(D[i][k] for i in range(nr * a)) for k in range(nc * a)]
            rel_prev = _block_diag(P, nr) if P.ncols else []
            syz = _syzygies(Dcols + rel_prev, ring) if Dcols else []
            Z = [tuple(v[:ambient]) for v in syz if any(v[:ambient])]
            if not rel_prev and not Dcols:
                Z = []
        B = _block_diag(P, nj) if P.ncols else []
        if j < s:
            rows, nr, nc = _koszul_differential(seq, j + 1, ring)
            D = _kron_identity(rows, nr, nc, a, ring)
            B += [tuple(D[i][k] for i in range(nr * a)) for k in range(nc * a)]
        out.append(homology_presentation(ring, Z, B, ambient))
    return out


def koszul_tor(M: PresentedModule, seq: Sequence[Polynomial], cap_N: int = DEFAULT_CAP_N):
    """Local dimensions of Tor_j(M, R/(seq)) via Koszul homology.

    Entries are integers, or the NotFinite exception instance for an index
    whose homology has infinite length at the origin.
    """
    graded = _graded_cyclic_tor(M, seq)
    if graded is not None:
        return graded
    dims = []
    for H in koszul_homology(M, seq):
        try:
            dims.append(module_local_colength(H, cap_N) if H.ngens else 0)
        except NotFinite as exc:
            dims.append(exc)
    return dims


def _graded_cyclic_tor(M: PresentedModule, seq: Sequence[Polynomial]):
    """Tor dimensions for R/I with I graded and I + (seq) of finite colength.

    Regular elements of seq are split off by colon checks; at most two
    remaining elements are handled by the top Koszul homology (a colon) and
    the Euler characteristic read from the Hilbert series.  Returns None when
    these shortcuts do not apply.
    """
    ring = M.ring
    if M.ngens != 1:
        return None
    I = Ideal(ring, [g for g in M.matrix.rows[0] if g])
    seq = [ring(s) for s in seq]
    w = _grading(I)
    if w is None or any(weighted_degree(s, w) in (INHOMOGENEOUS, 0) for s in seq):
        return None
    if I.is_unit():
        return [0] * (len(seq) + 1)
    try:
        h0 = colength(I + Ideal(ring, seq))
    except (NotZeroDimensional, NotFinite):
        return None
    chi = koszul_euler_characteristic(I, seq)
    if chi is None:
        return None
    current = I
    rest = list(seq)
    progress = True
    while progress and rest:
        progress = False
        for k, s in enumerate(rest):
            if colon(current, s) == current:
                current = current + Ideal(ring, [s])
                del rest[k]
                progress = True
                break
    r = len(rest)
    if r > 2:
        return None
    dims = [h0] + [0] * len(seq)
    if r == 1:
        dims[1] = h0 - chi
    elif r == 2:
        top = intersect(colon(current, rest[0]), colon(current, rest[1]))
        dims[2] = quotient_length(top, current, w)
        dims[1] = h0 + dims[2] - chi
    elif r == 0 and h0 != chi:
        raise CertificateError("Euler characteristic disagrees with the regular-sequence case")
    return dims


def _binom(n, k):
    from math import comb
    return comb(n, k)


def quotient_module(I: Ideal) -> PresentedModule:
    """R/I as a presented module."""
    return PresentedModule(PolyMatrix(I.ring, [list(I.gens)]), ["1"], [0])
