"""Image-computing spectral sequence bookkeeping and the integer constraint ledger."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

from .errors import CertificateError, InconsistentSystem, UnderdeterminedPage
from .linalg import matmul, rank, rref
from .poly import QQ, format_rational, to_rational

# --------------------------------------------------------------------------
# spectral pages


@dataclass(frozen=True)
class SpectralPage:
    """Page E^r: ranks on the (p, q) grid and the differentials known on this page.

    ``differentials`` maps (r, p, q) to a matrix of d^r leaving (p, q), with
    rows indexed by the target cell's basis; the string 'zero' marks a
    differential known to vanish.
    """

    r: int
    cells: dict
    differentials: dict = field(default_factory=dict)
    flags: tuple = ()

    def rank(self, p: int, q: int) -> int:
        return self.cells.get((p, q), 0)

    def totals(self) -> list[int]:
        if not self.cells:
            return []
        n = max(p + q for p, q in self.cells)
        out = [0] * (n + 1)
        for (p, q), v in self.cells.items():
            out[p + q] += v
        while out and out[-1] == 0:
            out.pop()
        return out

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "cells": {f"{p},{q}": v for (p, q), v in sorted(self.cells.items()) if v},
            "flags": list(self.flags),
        }


def e1_from_ranks(ranks: dict, differentials: dict | None = None, assumptions: dict | None = None
                  ) -> SpectralPage:
    """E^1 page with E^1_{p,q} = rank of alternating H_q of D^{p+1}.

    ``differentials`` maps (p, q) to the matrix of d^1 leaving that cell (or
    (r, p, q) for later pages).  ``assumptions`` maps a flag name to the
    cells it forces to zero.
    """
    cells = {}
    for key, v in ranks.items():
        p, q = key
        if p < 0 or q < 0:
            raise ValueError("cells need p, q >= 0")
        if v < 0:
            raise ValueError(f"negative rank at {key}")
        if v:
            cells[(p, q)] = int(v)
    flags = []
    for name, zeroed in (assumptions or {}).items():
        flags.append(name)
        for cell in zeroed:
            cells.pop(tuple(cell), None)
    diffs = {}
    for key, mat in (differentials or {}).items():
        if len(key) == 2:
            key = (1,) + tuple(key)
        diffs[tuple(key)] = mat
    page = SpectralPage(1, cells, diffs, tuple(flags))
    _check_shapes(page)
    return page


def _check_shapes(page: SpectralPage):
    for (r, p, q), mat in page.differentials.items():
        if r != page.r or isinstance(mat, str):
            continue
        src = page.rank(p, q)
        tgt = page.rank(p - r, q + r - 1)
        nrows = len(mat)
        ncols = len(mat[0]) if mat else 0
        if (nrows, ncols) != (tgt, src) and not (src == 0 or tgt == 0):
            raise ValueError(f"d^{r} at ({p},{q}) has shape {nrows}x{ncols}, expected {tgt}x{src}")


def _target(r, p, q):
    return p - r, q + r - 1


def _max_r(page: SpectralPage) -> int:
    return max((p for p, _ in page.cells), default=0) + 1


def _turn_once(page: SpectralPage, chosen: dict | None = None) -> SpectralPage:
    """E^{r+1} from E^r; ``chosen`` supplies ranks for differentials given only by rank."""
    r = page.r
    out_rank = {}
    unknown = []
    for (p, q), v in page.cells.items():
        tp, tq = _target(r, p, q)
        if tp < 0 or page.rank(tp, tq) == 0:
            out_rank[(p, q)] = 0
            continue
        mat = page.differentials.get((r, p, q))
        if isinstance(mat, str) and mat == "zero":
            out_rank[(p, q)] = 0
        elif mat is not None:
            out_rank[(p, q)] = rank(mat)
        elif chosen is not None and (r, p, q) in chosen:
            out_rank[(p, q)] = chosen[(r, p, q)]
        else:
            unknown.append((r, p, q))
    if unknown:
        raise UnderdeterminedPage(f"unknown differentials {unknown}", {"unknown": unknown})
    # composites of consecutive known matrices must vanish
    for (rr, p, q), mat in page.differentials.items():
        if rr != r or isinstance(mat, str):
            continue
        tp, tq = _target(r, p, q)
        nxt = page.differentials.get((r, tp, tq))
        if nxt is not None and not isinstance(nxt, str) and mat and nxt:
            prod = matmul(nxt, mat)
            if any(x for row in prod for x in row):
                raise CertificateError(f"d^{r} o d^{r} is nonzero at ({p},{q})")
    cells = {}
    for (p, q), v in page.cells.items():
        incoming = 0
        sp, sq = p + r, q - r + 1
        if sq >= 0 and page.rank(sp, sq):
            incoming = out_rank.get((sp, sq), 0)
        nv = v - out_rank[(p, q)] - incoming
        if nv < 0:
            raise CertificateError(f"negative rank at ({p},{q}) on page {r + 1}")
        if nv:
            cells[(p, q)] = nv
    diffs = {k: m for k, m in page.differentials.items() if k[0] > r}
    return SpectralPage(r + 1, cells, diffs, page.flags)


@dataclass
class TurnResult:
    page: SpectralPage
    homology: list[int]
    pages: list[SpectralPage]


def turn_pages(page: SpectralPage) -> TurnResult:
    """Turn pages until no differential can be nonzero.

    Raises UnderdeterminedPage, carrying per-degree bounds, if some
    differential between nonzero cells was not supplied.
    """
    pages = [page]
    cur = page
    try:
        while cur.r <= _max_r(cur):
            cur = _turn_once(cur)
            pages.append(cur)
    except UnderdeterminedPage:
        bounds = _bounds(page)
        raise UnderdeterminedPage("page turning needs a differential that was not supplied", bounds)
    return TurnResult(cur, cur.totals(), pages)


def _bounds(page: SpectralPage) -> dict:
    """Per-degree [min, max] of the abutment over all admissible unknown ranks."""
    results = []

    def explore(cur: SpectralPage, chosen: dict):
        if cur.r > _max_r(cur):
            results.append(cur.totals())
            return
        try:
            nxt = _turn_once(cur, chosen)
        except UnderdeterminedPage as exc:
            (r, p, q) = exc.bounds["unknown"][0]
            tp, tq = _target(r, p, q)
            top = min(cur.rank(p, q), cur.rank(tp, tq))
            for k in range(top + 1):
                explore(cur, {**chosen, (r, p, q): k})
            return
        except CertificateError:
            return
        explore(nxt, chosen)

    explore(page, {})
    if not results:
        return {}
    n = max(len(t) for t in results)
    padded = [t + [0] * (n - len(t)) for t in results]
    return {i: (min(t[i] for t in padded), max(t[i] for t in padded)) for i in range(n)}


# --------------------------------------------------------------------------
# degree-0 alternating chains


def _sign(perm: Sequence[int]) -> int:
    s = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            s = -s
    return s


def _act(label: tuple, perm: Sequence[int]) -> tuple:
    """Slot i of the result holds slot perm^-1(i) of the label (slots are moved by perm)."""
    out = [None] * len(label)
    for i, a in enumerate(label):
        out[perm[i]] = a
    return tuple(out)


@dataclass
class AltChainComplex0:
    """Finite multiple point sets with their slot actions and forgetful projections.

    ``levels[k]`` lists the points of D^k as tuples of atoms; an atom is
    (branch, coordinates).  Level 1 is read through connected components,
    one per branch.
    """

    levels: dict[int, list[tuple]]
    branches: list = field(default_factory=list)

    def __post_init__(self):
        self.levels = {k: sorted(set(tuple(p) for p in pts)) for k, pts in self.levels.items()}
        if not self.branches:
            atoms = {a for pts in self.levels.values() for p in pts for a in p}
            self.branches = sorted({a[0] for a in atoms})
        for k, pts in self.levels.items():
            present = set(pts)
            for p in pts:
                if len(p) != k:
                    raise CertificateError(f"point {p} at level {k} has the wrong length")
                for perm in itertools.permutations(range(k)):
                    if _act(p, perm) not in present:
                        raise CertificateError(f"level {k} is not closed under the symmetric group")
            if k > 1 and k - 1 in self.levels:
                below = set(self.levels[k - 1])
                for p in pts:
                    if p[:-1] not in below:
                        raise CertificateError(f"{p} projects outside level {k - 1}")

    def alt_basis(self, k: int) -> list[tuple]:
        """Anchors of free orbits: lexicographically least labels with distinct atoms."""
        if k == 1:
            return [(b,) for b in self.branches]
        anchors = []
        seen = set()
        for p in self.levels.get(k, []):
            if p in seen:
                continue
            orbit = {_act(p, perm) for perm in itertools.permutations(range(k))}
            seen |= orbit
            if len(set(p)) < k:
                continue
            anchors.append(min(orbit))
        return sorted(anchors, key=lambda a: (tuple(atom[0] for atom in a), a))

    def basis_chain(self, k: int, anchor: tuple) -> dict:
        chain = {}
        for perm in itertools.permutations(range(k)):
            chain[_act(anchor, perm)] = _sign(perm)
        return chain

    def read(self, k: int, chain: dict) -> list:
        """Coordinates of an alternating chain in the anchored basis of level k."""
        if k == 1:
            coeff = {b: 0 for b in self.branches}
            for (atom,), c in chain.items():
                coeff[atom[0]] += c
            return [coeff[b] for b in self.branches]
        return [chain.get(a, 0) for a in self.alt_basis(k)]

    def pi(self, k: int) -> list[list]:
        """Matrix of the forgetful projection on degree-0 alternating homology, level k to k-1."""
        src = self.alt_basis(k)
        tgt_dim = len(self.alt_basis(k - 1))
        cols = []
        for a in src:
            image: dict = {}
            for p, c in self.basis_chain(k, a).items():
                q = p[:-1]
                image[q] = image.get(q, 0) + c
            cols.append(self.read(k - 1, image))
        return [[cols[j][i] for j in range(len(src))] for i in range(tgt_dim)]


def alt0_differentials(c: AltChainComplex0) -> dict[int, list[list]]:
    """Matrices of pi^k on degree-0 alternating homology; checks consecutive products vanish."""
    out = {}
    ks = sorted(k for k in c.levels if k >= 2)
    for k in ks:
        out[k] = c.pi(k)
    for k in ks:
        if k + 1 in out and out[k] and out[k + 1] and out[k + 1][0]:
            prod = matmul(out[k], out[k + 1])
            if any(x for row in prod for x in row):
                raise CertificateError(f"pi^{k} o pi^{k + 1} is nonzero")
    return out


def alt0_page(c: AltChainComplex0, max_level: int | None = None) -> SpectralPage:
    """E^1 page of a finite multiple point configuration (only the q = 0 row)."""
    top = max_level or max(c.levels, default=1)
    ranks = {(k - 1, 0): len(c.alt_basis(k)) for k in range(1, top + 1)}
    diffs = {(k - 1, 0): m for k, m in alt0_differentials(c).items() if k <= top}
    return e1_from_ranks(ranks, diffs)


def equal_up_to_signs(A: Sequence[Sequence], B: Sequence[Sequence]) -> bool:
    """Whether B = D1 A D2 for diagonal sign matrices D1, D2."""
    if len(A) != len(B) or (A and len(A[0]) != len(B[0])):
        return False
    if not A:
        return True
    n = len(A[0])
    for signs in itertools.product((1, -1), repeat=n):
        ok = True
        for ra, rb in zip(A, B):
            row = [a * s for a, s in zip(ra, signs)]
            if list(row) != list(rb) and [-x for x in row] != list(rb):
                ok = False
                break
        if ok:
            return True
    return False


# --------------------------------------------------------------------------
# constraint ledger


@dataclass
class Constraint:
    coeffs: dict
    rhs: object
    provenance: str


@dataclass
class LedgerSolution:
    values: dict
    free: list
    rank: int
    bounds: dict
    unique: bool

    def to_json(self) -> dict:
        return {
            "values": {k: _num(v) for k, v in self.values.items()},
            "free": list(self.free),
            "rank": self.rank,
            "bounds": {k: [_num(a), _num(b)] for k, (a, b) in self.bounds.items()},
            "unique": self.unique,
        }


def _num(v):
    v = to_rational(v)
    return int(v) if v.denominator == 1 else format_rational(v)


class ConstraintLedger:
    """Named non-negative integer unknowns tied by rational linear equations."""

    def __init__(self):
        self.unknowns: list[str] = []
        self.constraints: list[Constraint] = []
        self._seq = 0

    def unknown(self, name: str) -> str:
        if name not in self.unknowns:
            self.unknowns.append(name)
        return name

    def add(self, coeffs: dict, rhs, provenance: str = "") -> None:
        for k in coeffs:
            self.unknown(k)
        self.constraints.append(Constraint({k: to_rational(v) for k, v in coeffs.items() if v},
                                           to_rational(rhs), provenance))

    def fix(self, name: str, value, provenance: str = "") -> None:
        self.add({name: 1}, value, provenance)

    def add_exact_sequence(self, terms: Sequence, provenance: str = "") -> list[str]:
        """An exact sequence V_0 -> V_1 -> ... -> V_m, bounded by zeros at both ends.

        Terms are unknown names or known integer dimensions.  Each map gets a
        rank unknown and each term satisfies dim V_i = rank_in + rank_out.
        """
        self._seq += 1
        ranks = [self.unknown(f"rank[{self._seq}:{i}]") for i in range(len(terms) - 1)]
        for i, t in enumerate(terms):
            coeffs = {}
            rhs = 0
            if isinstance(t, str):
                coeffs[t] = 1
            else:
                rhs = -t
            if i > 0:
                coeffs[ranks[i - 1]] = coeffs.get(ranks[i - 1], 0) - 1
            if i < len(ranks):
                coeffs[ranks[i]] = coeffs.get(ranks[i], 0) - 1
            self.add(coeffs, rhs, f"{provenance} (term {i})")
        return ranks

    def matrix(self) -> tuple[list[list], list]:
        rows = [[c.coeffs.get(u, 0) for u in self.unknowns] for c in self.constraints]
        return rows, [c.rhs for c in self.constraints]

    def rank(self) -> int:
        rows, _ = self.matrix()
        return rank(rows) if rows else 0

    def without(self, index: int) -> "ConstraintLedger":
        other = ConstraintLedger()
        other.unknowns = list(self.unknowns)
        other.constraints = [c for i, c in enumerate(self.constraints) if i != index]
        return other


def ledger_solve(L: ConstraintLedger, bound_search: int = 64) -> LedgerSolution:
    """Exact solve; reports determined values, free unknowns and integer bounds.

    Raises InconsistentSystem for contradictory or non-integral/negative forced values.
    """
    rows, rhs = L.matrix()
    n = len(L.unknowns)
    if not rows:
        return LedgerSolution({}, list(L.unknowns), 0, {}, n == 0)
    aug = [r + [b] for r, b in zip(rows, rhs)]
    red, piv = rref(aug)
    if n in piv:
        raise InconsistentSystem("the constraints are inconsistent")
    free = [j for j in range(n) if j not in piv]
    values = {}
    affine = {}
    for i, c in enumerate(piv):
        row = red[i]
        dep = {j: -row[j] for j in free if row[j]}
        affine[c] = (row[n], dep)
        if not dep:
            values[L.unknowns[c]] = row[n]
    for name, v in values.items():
        if v.denominator != 1 or v < 0:
            raise InconsistentSystem(f"{name} is forced to {format_rational(v)}")
    bounds = {}
    if free:
        bounds = _integer_bounds(L, affine, free, bound_search)
        if bounds is None:
            raise InconsistentSystem("no non-negative integer solution")
        for j in free:
            lo, hi = bounds[L.unknowns[j]]
            if lo == hi:
                values[L.unknowns[j]] = lo
        for c, (const, dep) in affine.items():
            name = L.unknowns[c]
            if name in bounds and bounds[name][0] == bounds[name][1]:
                values[name] = bounds[name][0]
    return LedgerSolution(values, [L.unknowns[j] for j in free], len(piv), bounds, not free)


def _integer_bounds(L, affine, free, limit):
    """Bounds of every unknown over non-negative integer points (free unknowns enumerated)."""
    lo = {j: 0 for j in free}
    hi = {j: limit for j in free}
    # interval propagation: every dependent const + sum dep_k x_k must stay >= 0
    changed = True
    while changed:
        changed = False
        for const, dep in affine.values():
            for j, a in dep.items():
                rest = const
                for k, b in dep.items():
                    if k != j:
                        rest += b * (hi[k] if b > 0 else lo[k])
                if a < 0:
                    cap = rest // -a
                    if cap < hi[j]:
                        hi[j] = int(cap)
                        changed = True
                else:
                    need = -(rest // a) if rest < 0 else 0
                    if need > lo[j]:
                        lo[j] = int(need)
                        changed = True
                if hi[j] < lo[j]:
                    return None
    caps = [(lo[j], hi[j]) for j in free]
    seen = {}
    for point in itertools.product(*[range(a, b + 1) for a, b in caps]):
        assign = dict(zip(free, point))
        vals = {}
        ok = True
        for c, (const, dep) in affine.items():
            v = const + sum(dep[k] * assign[k] for k in dep)
            if v < 0 or v.denominator != 1:
                ok = False
                break
            vals[c] = v
        if not ok:
            continue
        vals.update({j: QQ(v) for j, v in assign.items()})
        for j, v in vals.items():
            name = L.unknowns[j]
            a, b = seen.get(name, (v, v))
            seen[name] = (min(a, v), max(b, v))
    if not seen:
        return None
    return seen
