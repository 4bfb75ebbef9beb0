"""Truncated power series on curve branches over Q and Q(xi), xi^2 + xi + 1 = 0."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import CertificateError, MpspaceError, NotFinite
from .poly import QQ, Polynomial, Ring, format_rational, to_rational

XI_NAME = "xi"


class QXi:
    """a + b*xi with a, b rational and xi a primitive cube root of unity."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a = to_rational(a)
        self.b = to_rational(b)

    @staticmethod
    def coerce(x) -> "QXi":
        return x if isinstance(x, QXi) else QXi(x)

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __eq__(self, other):
        o = QXi.coerce(other)
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __add__(self, other):
        o = QXi.coerce(other)
        return QXi(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QXi(-self.a, -self.b)

    def __sub__(self, other):
        o = QXi.coerce(other)
        return QXi(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return QXi.coerce(other) - self

    def __mul__(self, other):
        o = QXi.coerce(other)
        bd = self.b * o.b
        return QXi(self.a * o.a - bd, self.a * o.b + self.b * o.a - bd)

    __rmul__ = __mul__

    def conjugate(self) -> "QXi":
        # xi -> xi^2 = -1 - xi
        return QXi(self.a - self.b, -self.b)

    def norm(self):
        return self.a * self.a - self.a * self.b + self.b * self.b

    def inverse(self) -> "QXi":
        n = self.norm()
        if not n:
            raise ZeroDivisionError("inverse of zero")
        c = self.conjugate()
        return QXi(c.a / n, c.b / n)

    def __truediv__(self, other):
        return self * QXi.coerce(other).inverse()

    def __rtruediv__(self, other):
        return QXi.coerce(other) * self.inverse()

    def __pow__(self, k: int):
        out = QXi(1)
        base = self
        if k < 0:
            base, k = base.inverse(), -k
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __repr__(self):
        if not self.b:
            return format_rational(self.a)
        return f"({format_rational(self.a)} + {format_rational(self.b)}*xi)"


ZERO_XI = QXi(0)
ONE_XI = QXi(1)
XI = QXi(0, 1)


def poly_to_series(p: Polynomial, param: str) -> dict[int, QXi]:
    """A polynomial in the branch parameter (and optionally xi) as {power: coefficient}."""
    ring = p.ring
    ti = ring.index(param)
    xi = ring.index(XI_NAME) if XI_NAME in ring.variables else None
    out: dict[int, QXi] = {}
    for e, c in p.items():
        if any(x for i, x in enumerate(e) if i not in (ti, xi)):
            raise MpspaceError(f"branch coordinate {p} involves variables other than {param}")
        k = e[ti]
        coeff = XI ** e[xi] * c if xi is not None else QXi(c)
        out[k] = out.get(k, ZERO_XI) + coeff
    return {k: v for k, v in out.items() if v}


def series_mul(a: dict, b: dict, N: int) -> dict:
    out: dict[int, QXi] = {}
    for i, x in a.items():
        for j, y in b.items():
            if i + j < N:
                out[i + j] = out.get(i + j, ZERO_XI) + x * y
    return {k: v for k, v in out.items() if v}


def series_pow(a: dict, k: int, N: int) -> dict:
    out = {0: ONE_XI}
    for _ in range(k):
        out = series_mul(out, a, N)
    return out


def valuation(a: dict) -> float:
    return min(a) if a else float("inf")


@dataclass
class BranchParam:
    """Parametrisations of the branches of a curve germ, one tuple of series per branch."""

    variables: tuple[str, ...]
    params: tuple[str, ...]
    coords: list[tuple[dict, ...]]

    @classmethod
    def from_strings(cls, variables: Sequence[str], branches: Sequence[tuple[str, Sequence[str]]]):
        """``branches`` holds (parameter name, coordinate strings); 'xi' may appear in coefficients."""
        if isinstance(variables, str):
            variables = variables.replace(",", " ").split()
        coords = []
        params = []
        for param, comps in branches:
            if len(comps) != len(variables):
                raise ValueError("each branch needs one series per ambient coordinate")
            ring = Ring([param, XI_NAME])
            coords.append(tuple(poly_to_series(ring.parse(c), param) for c in comps))
            params.append(param)
        for br in coords:
            if all(not s for s in br):
                raise MpspaceError("constant branch")
            if any(0 in s for s in br):
                raise MpspaceError("branches must pass through the origin")
        return cls(tuple(variables), tuple(params), coords)

    @property
    def r(self) -> int:
        return len(self.coords)

    def compose(self, p: Polynomial, branch: int, N: int) -> dict:
        """p pulled back along one branch, truncated at order N."""
        ring = p.ring
        comps = self.coords[branch]
        idx = [self.variables.index(v) if v in self.variables else None for v in ring.variables]
        total: dict[int, QXi] = {}
        cache: dict = {}
        for e, c in p.items():
            term = {0: QXi(c)}
            for i, k in enumerate(e):
                if not k:
                    continue
                if idx[i] is None:
                    raise MpspaceError(f"{ring.variables[i]} is not an ambient coordinate")
                key = (idx[i], k)
                if key not in cache:
                    cache[key] = series_pow(comps[idx[i]], k, N)
                term = series_mul(term, cache[key], N)
            for j, v in term.items():
                total[j] = total.get(j, ZERO_XI) + v
        return {k: v for k, v in total.items() if v}

    def check_vanishing(self, gens: Sequence[Polynomial], N: int) -> bool:
        return all(not self.compose(g, b, N) for g in gens for b in range(self.r))

    def general_function(self) -> tuple[list[int], list[int]]:
        """Coefficients of a linear form with finite positive valuation on every branch."""
        n = len(self.variables)
        for shift in range(1, 20):
            coeffs = [shift + i for i in range(n)]
            vals = []
            for br in self.coords:
                s: dict[int, QXi] = {}
                for c, comp in zip(coeffs, br):
                    for k, v in comp.items():
                        s[k] = s.get(k, ZERO_XI) + v * c
                s = {k: v for k, v in s.items() if v}
                vals.append(valuation(s))
            if all(v != float("inf") for v in vals):
                return coeffs, vals
        raise MpspaceError("no linear form separates the branches")


class EchelonSpace:
    """Incrementally grown subspace of a coordinate space over Q(xi)."""

    def __init__(self, dim: int):
        self.dim = dim
        self.rows: dict[int, list] = {}

    def reduce(self, v: list) -> list:
        v = list(v)
        for c in range(self.dim):
            if v[c] and c in self.rows:
                f = v[c]
                row = self.rows[c]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def add(self, v: list) -> bool:
        v = self.reduce(v)
        for c in range(self.dim):
            if v[c]:
                inv = v[c].inverse()
                v = [a * inv for a in v]
                for k, row in self.rows.items():
                    if row[c]:
                        f = row[c]
                        self.rows[k] = [a - f * b for a, b in zip(row, v)]
                self.rows[c] = v
                return True
        return False

    def __len__(self):
        return len(self.rows)

    def contains_unit(self, c: int) -> bool:
        e = [ZERO_XI] * self.dim
        e[c] = ONE_XI
        return not any(self.reduce(e))


def _flatten(parts: Sequence[dict], N: int) -> list:
    out = []
    for s in parts:
        out += [s.get(k, ZERO_XI) for k in range(N)]
    return out


def _conductor_certified(space: EchelonSpace, r: int, N: int, step: int) -> int | None:
    """Least c with all t^c-tails inside the space, if the Nakayama margin N >= c + step holds."""
    c = N
    while c > 0 and all(space.contains_unit(b * N + c - 1) for b in range(r)):
        c -= 1
    return c if c + step <= N else None


@dataclass
class DeltaResult:
    delta: int
    N: int
    conductor: int
    algebra_dimension: int


def delta_invariant(branches: BranchParam, generators: Sequence[Polynomial] | None = None,
                    start_N: int = 4, cap_N: int = 64) -> DeltaResult:
    """Codimension of the pulled-back coordinate ring in the normalisation.

    The truncation is accepted once the image contains every t^c-tail with
    N at least c plus the largest valuation of a general linear form, which
    lets Nakayama's lemma lift the truncated statement.
    """
    ring = Ring(branches.variables)
    gens = [ring(g) for g in generators] if generators is not None else list(ring.gens())
    _, vals = branches.general_function()
    step = max(vals)
    N = max(start_N, step + 1)
    r = branches.r
    while N <= cap_N:
        space = _algebra_span(branches, gens, N)
        c = _conductor_certified(space, r, N, step)
        if c is not None:
            return DeltaResult(r * N - len(space), N, c, len(space))
        N *= 2
    raise NotFinite(f"no conductor certificate up to truncation order {cap_N}")


def _algebra_span(branches: BranchParam, gens, N) -> EchelonSpace:
    r = branches.r
    space = EchelonSpace(r * N)
    pulled = [[branches.compose(g, b, N) for b in range(r)] for g in gens]
    frontier = [[{0: ONE_XI} for _ in range(r)]]
    space.add(_flatten(frontier[0], N))
    while frontier:
        nxt = []
        for elem in frontier:
            for g in pulled:
                prod = [series_mul(e, gb, N) for e, gb in zip(elem, g)]
                if space.add(_flatten(prod, N)):
                    nxt.append(prod)
        frontier = nxt
    return space


def milnor_from_delta(delta: int, r: int) -> int:
    if delta < 0 or r < 1:
        raise ValueError("need delta >= 0 and r >= 1")
    return 2 * delta - r + 1


# --------------------------------------------------------------------------
# lifting vector fields to the normalisation


@dataclass
class LiftedModule:
    """Submodule of the vector fields on the normalisation generated by lifted fields."""

    generators: list[list[dict]]
    N: int
    colength: int
    conductor: int


def lift_field(field_: Sequence[Polynomial], branches: BranchParam, N: int) -> list[dict]:
    """Lift an ambient vector field tangent to the curve, branch by branch.

    On each branch the coordinate whose derivative has the lowest order is
    divided out; the remaining coordinates are checked up to order N.
    """
    lifted = []
    for b in range(branches.r):
        comps = branches.coords[b]
        derivs = [{k - 1: v * k for k, v in s.items() if k} for s in comps]
        order = [valuation(d) for d in derivs]
        j = min(range(len(order)), key=lambda i: order[i])
        if order[j] == float("inf"):
            raise CertificateError("no liftable coordinate on a branch")
        vals = [branches.compose(a, b, N + order[j]) for a in field_]
        tau = _series_divide(vals[j], derivs[j], N)
        for k, (a, d) in enumerate(zip(vals, derivs)):
            check = series_mul(tau, d, N)
            diff = {e: v for e, v in a.items() if e < N}
            if any(check.get(e, ZERO_XI) != diff.get(e, ZERO_XI) for e in set(check) | set(diff)):
                raise CertificateError("vector field is not tangent to the branch within the truncation")
        lifted.append(tau)
    return lifted


def _series_divide(a: dict, d: dict, N: int) -> dict:
    v = valuation(d)
    if any(k < v for k in a):
        raise CertificateError("lift is not exact: quotient has a pole")
    lead = d[v].inverse()
    rem = dict(a)
    out: dict[int, QXi] = {}
    for k in range(v, N + v):
        c = rem.get(k)
        if not c:
            continue
        q = c * lead
        out[k - v] = q
        for e, dv in d.items():
            if k - v + e < N + v:
                rem[k - v + e] = rem.get(k - v + e, ZERO_XI) - q * dv
    return {k: x for k, x in out.items() if x and k < N}


def lifted_module(fields: Sequence[Sequence[Polynomial]], branches: BranchParam, start_N: int = 8,
                  cap_N: int = 64) -> LiftedModule:
    """Colength of the module generated over the ambient ring by the lifted fields."""
    _, vals = branches.general_function()
    step = max(vals)
    ring = Ring(branches.variables)
    coords = list(ring.gens())
    r = branches.r
    N = max(start_N, step + 1)
    while N <= cap_N:
        lifts = [lift_field(f, branches, N) for f in fields]
        space = EchelonSpace(r * N)
        pulled = [[branches.compose(g, b, N) for b in range(r)] for g in coords]
        frontier = []
        for lf in lifts:
            if space.add(_flatten(lf, N)):
                frontier.append(lf)
        while frontier:
            nxt = []
            for elem in frontier:
                for g in pulled:
                    prod = [series_mul(e, gb, N) for e, gb in zip(elem, g)]
                    if space.add(_flatten(prod, N)):
                        nxt.append(prod)
            frontier = nxt
        c = _conductor_certified(space, r, N, step)
        if c is not None:
            return LiftedModule(lifts, N, r * N - len(space), c)
        N *= 2
    raise NotFinite(f"lifted module has no finite colength certificate up to order {cap_N}")
