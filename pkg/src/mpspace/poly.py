"""Exact multivariate polynomials over the rationals.

Coefficients are ``gmpy2.mpq`` values; a polynomial is an immutable map from
exponent tuples to nonzero coefficients.  Monomial orders are matrix orders
(every row a non-negative integer vector), which lets the Groebner engine
encode a monomial and its sort key in a single integer.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import gmpy2

from .errors import ParseError, RingMismatchError, UnknownVariableError

QQ = gmpy2.mpq
_MPQ = type(QQ(0))
ZERO = QQ(0)
ONE = QQ(1)


def to_rational(value) -> _MPQ:
    """Convert ints, Fractions, strings like ``'3/4'`` and mpq to mpq."""
    if isinstance(value, _MPQ):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not coefficients")
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, Fraction):
        return QQ(value.numerator, value.denominator)
    if isinstance(value, str):
        s = value.strip()
        if "/" in s:
            num, den = s.split("/", 1)
            return QQ(int(num), int(den))
        return QQ(int(s))
    if type(value).__name__ == "mpz":
        return QQ(value)
    raise TypeError(f"cannot convert {value!r} to an exact rational")


def format_rational(c) -> str:
    c = to_rational(c)
    if c.denominator == 1:
        return str(int(c.numerator))
    return f"{int(c.numerator)}/{int(c.denominator)}"


# --------------------------------------------------------------------------
# monomial orders


class MonomialOrder:
    """A monomial order given by kind and optional parameters.

    ``lex``, ``grevlex``, ``weighted`` (weighted degree, then reverse
    lexicographic with the same weights) and ``block`` (the first ``k``
    variables are eliminated; each block is weighted-grevlex).
    """

    KINDS = ("lex", "grevlex", "weighted", "block")

    def __init__(self, kind: str = "grevlex", weights: Sequence[int] | None = None,
                 block: int | None = None):
        if kind not in self.KINDS:
            raise ValueError(f"unknown monomial order {kind!r}")
        if kind == "weighted" and weights is None:
            raise ValueError("weighted order needs a weight vector")
        if kind == "block" and block is None:
            raise ValueError("block order needs the size of the eliminated block")
        if weights is not None:
            weights = tuple(int(w) for w in weights)
            if any(w <= 0 for w in weights):
                raise ValueError("weights must be positive integers")
        self.kind = kind
        self.weights = weights
        self.block = block

    def __eq__(self, other):
        return (isinstance(other, MonomialOrder) and self.kind == other.kind
                and self.weights == other.weights and self.block == other.block)

    def __hash__(self):
        return hash((self.kind, self.weights, self.block))

    def __repr__(self):
        extra = ""
        if self.weights is not None:
            extra += f", weights={self.weights}"
        if self.block is not None:
            extra += f", block={self.block}"
        return f"MonomialOrder({self.kind!r}{extra})"

    def matrix(self, n: int) -> list[tuple[int, ...]]:
        """Rows of the (non-negative) matrix realising this order on n variables."""
        w = self.weights if self.weights is not None else (1,) * n
        if len(w) != n:
            raise ValueError(f"order has {len(w)} weights but ring has {n} variables")
        if self.kind == "lex":
            return [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
        if self.kind in ("grevlex", "weighted"):
            return _wrevlex_rows(w, 0, n, n)
        k = self.block
        if not 0 <= k <= n:
            raise ValueError("block size out of range")
        return _wrevlex_rows(w, 0, k, n) + _wrevlex_rows(w, k, n, n)

    def to_json(self):
        d = {"kind": self.kind}
        if self.weights is not None:
            d["weights"] = list(self.weights)
        if self.block is not None:
            d["block"] = self.block
        return d

    @classmethod
    def from_json(cls, d):
        if isinstance(d, str):
            return cls(d)
        return cls(d["kind"], d.get("weights"), d.get("block"))


def _wrevlex_rows(w, lo, hi, n):
    rows = []
    for stop in range(hi, lo, -1):
        rows.append(tuple(w[j] if lo <= j < stop else 0 for j in range(n)))
    return rows


LEX = MonomialOrder("lex")
GREVLEX = MonomialOrder("grevlex")


# --------------------------------------------------------------------------
# rings


class Ring:
    """Polynomial ring over Q with named variables and a monomial order."""

    def __init__(self, variables: Iterable[str] | str, order: MonomialOrder | str = "grevlex",
                 weights: Sequence[int] | None = None):
        if isinstance(variables, str):
            variables = variables.replace(",", " ").split()
        variables = tuple(variables)
        if len(set(variables)) != len(variables):
            raise ValueError("variable names must be unique")
        for v in variables:
            if not _IDENT.fullmatch(v):
                raise ValueError(f"invalid variable name {v!r}")
        if isinstance(order, str):
            order = MonomialOrder(order, weights if order == "weighted" else None)
        self.variables = variables
        self.order = order
        if weights is None:
            weights = order.weights if order.weights is not None else (1,) * len(variables)
        self.weights = tuple(int(w) for w in weights)
        if len(self.weights) != len(variables):
            raise ValueError("one weight per variable required")
        self._index = {v: i for i, v in enumerate(variables)}
        self._rows = order.matrix(len(variables))

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def __eq__(self, other):
        return (isinstance(other, Ring) and self.variables == other.variables
                and self.order == other.order)

    def __hash__(self):
        return hash((self.variables, self.order))

    def __repr__(self):
        return f"Ring({list(self.variables)}, {self.order!r})"

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariableError(name) from None

    def sort_key(self, exp: tuple) -> tuple:
        return tuple(sum(r * e for r, e in zip(row, exp)) for row in self._rows)

    def with_order(self, order: MonomialOrder | str, weights=None) -> "Ring":
        if isinstance(order, str):
            order = MonomialOrder(order, weights if order == "weighted" else None)
        return Ring(self.variables, order, weights if weights is not None else self.weights)

    def zero(self) -> "Polynomial":
        return Polynomial(self, {})

    def one(self) -> "Polynomial":
        return Polynomial(self, {(0,) * self.nvars: ONE})

    def const(self, c) -> "Polynomial":
        c = to_rational(c)
        return Polynomial(self, {(0,) * self.nvars: c} if c else {})

    def var(self, name: str) -> "Polynomial":
        i = self.index(name)
        return Polynomial(self, {tuple(1 if j == i else 0 for j in range(self.nvars)): ONE})

    def gens(self) -> list["Polynomial"]:
        return [self.var(v) for v in self.variables]

    def monomial(self, exp: Sequence[int], coeff=1) -> "Polynomial":
        c = to_rational(coeff)
        return Polynomial(self, {tuple(exp): c} if c else {})

    def parse(self, text: str) -> "Polynomial":
        return _Parser(self, text).parse()

    def __call__(self, obj) -> "Polynomial":
        if isinstance(obj, Polynomial):
            return obj.change_ring(self)
        if isinstance(obj, str):
            return self.parse(obj)
        return self.const(obj)


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


# --------------------------------------------------------------------------
# polynomials


class Polynomial:
    """Immutable polynomial; ``terms`` maps exponent tuples to nonzero mpq."""

    __slots__ = ("ring", "_terms", "_hash")

    def __init__(self, ring: Ring, terms: Mapping[tuple, object], _trusted=False):
        self.ring = ring
        if _trusted:
            self._terms = terms
        else:
            n = ring.nvars
            clean = {}
            for e, c in terms.items():
                e = tuple(int(x) for x in e)
                if len(e) != n or any(x < 0 for x in e):
                    raise ValueError(f"bad exponent vector {e} for {n} variables")
                c = to_rational(c)
                if c:
                    clean[e] = c
            self._terms = clean
        self._hash = None

    # ---- basic access
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def coefficient(self, exponent: tuple[int, ...]):
        return self._terms.get(tuple(exponent), ZERO)

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and not any(next(iter(self._terms))))

    def constant_term(self):
        return self._terms.get((0,) * self.ring.nvars, ZERO)

    def sorted_terms(self) -> list[tuple[tuple, object]]:
        key = self.ring.sort_key
        return sorted(self._terms.items(), key=lambda t: key(t[0]), reverse=True)

    def leading_term(self):
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        key = self.ring.sort_key
        e = max(self._terms, key=key)
        return e, self._terms[e]

    def leading_monomial(self) -> tuple:
        return self.leading_term()[0]

    def leading_coefficient(self):
        return self.leading_term()[1]

    def monic(self) -> "Polynomial":
        if not self._terms:
            return self
        lc = self.leading_coefficient()
        return Polynomial(self.ring, {e: c / lc for e, c in self._terms.items()}, True)

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree_in(self, var: str) -> int:
        i = self.ring.index(var)
        return max((e[i] for e in self._terms), default=-1)

    def support_variables(self) -> set[str]:
        used = set()
        for e in self._terms:
            for i, x in enumerate(e):
                if x:
                    used.add(self.ring.variables[i])
        return used

    # ---- arithmetic
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.ring != self.ring:
                raise RingMismatchError(f"{self.ring!r} vs {other.ring!r}")
            return other
        try:
            return self.ring.const(other)
        except TypeError:
            return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v += c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Polynomial(self.ring, out, True)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.ring, {e: -c for e, c in self._terms.items()}, True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                v = out.get(e)
                if v is None:
                    out[e] = ca * cb
                else:
                    v += ca * cb
                    if v:
                        out[e] = v
                    else:
                        del out[e]
        return Polynomial(self.ring, out, True)

    __rmul__ = __mul__

    def __truediv__(self, other):
        # division by nonzero constants only
        if isinstance(other, Polynomial):
            if not other.is_constant() or other.is_zero():
                raise ValueError("can only divide by nonzero constants")
            other = other.constant_term()
        c = to_rational(other)
        if not c:
            raise ZeroDivisionError("division by zero")
        return Polynomial(self.ring, {e: v / c for e, v in self._terms.items()}, True)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = self.ring.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale(self, c) -> "Polynomial":
        c = to_rational(c)
        if not c:
            return self.ring.zero()
        return Polynomial(self.ring, {e: v * c for e, v in self._terms.items()}, True)

    def mul_monomial(self, exp: tuple, c=ONE) -> "Polynomial":
        return Polynomial(self.ring, {tuple(x + y for x, y in zip(e, exp)): v * c
                                      for e, v in self._terms.items()}, True)

    # ---- comparison
    def __eq__(self, other):
        if isinstance(other, Polynomial):
            return self.ring == other.ring and self._terms == other._terms
        try:
            c = to_rational(other)
        except TypeError:
            return NotImplemented
        return self._terms == ({(0,) * self.ring.nvars: c} if c else {})

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._terms.items())))
        return self._hash

    # ---- calculus / substitution
    def diff(self, var: str) -> "Polynomial":
        i = self.ring.index(var)
        out = {}
        for e, c in self._terms.items():
            if e[i]:
                e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[e2] = c * e[i]
        return Polynomial(self.ring, out, True)

    def substitute(self, mapping: Mapping[str, object], ring: Ring | None = None,
                   keep_missing: bool = False) -> "Polynomial":
        """Replace variables by polynomials (all in one target ring).

        Variables of ``self`` absent from ``mapping`` are an error unless
        ``keep_missing`` is set, in which case they map to the same-named
        variable of the target ring.
        """
        targets = {}
        for name, val in mapping.items():
            self.ring.index(name)
            targets[name] = val
        target_ring = ring
        for val in targets.values():
            if isinstance(val, Polynomial):
                if target_ring is None:
                    target_ring = val.ring
                elif val.ring != target_ring:
                    raise RingMismatchError("substitution targets live in different rings")
        if target_ring is None:
            target_ring = self.ring
        images = []
        for i, name in enumerate(self.ring.variables):
            if name in targets:
                v = targets[name]
                images.append(v if isinstance(v, Polynomial) else target_ring.const(v))
            else:
                images.append(None)
        used = self.support_variables()
        for i, name in enumerate(self.ring.variables):
            if images[i] is None and name in used:
                if keep_missing:
                    images[i] = target_ring.var(name)
                else:
                    raise UnknownVariableError(f"no substitution given for {name!r}")
        return _compose(self, images, target_ring)

    def evaluate(self, point: Mapping[str, object] | Sequence):
        if not isinstance(point, Mapping):
            point = dict(zip(self.ring.variables, point))
        vals = [to_rational(point[v]) if v in point else None for v in self.ring.variables]
        total = ZERO
        for e, c in self._terms.items():
            t = c
            for i, x in enumerate(e):
                if x:
                    if vals[i] is None:
                        raise UnknownVariableError(self.ring.variables[i])
                    t *= vals[i] ** x
            total += t
        return total

    def change_ring(self, ring: Ring) -> "Polynomial":
        """Re-express in another ring by matching variable names."""
        if ring == self.ring:
            return self
        idx = []
        for i, name in enumerate(self.ring.variables):
            idx.append(ring._index.get(name))
        out = {}
        n = ring.nvars
        for e, c in self._terms.items():
            ne = [0] * n
            for i, x in enumerate(e):
                if x:
                    if idx[i] is None:
                        raise UnknownVariableError(self.ring.variables[i])
                    ne[idx[i]] = x
            out[tuple(ne)] = c
        return Polynomial(ring, out, True)

    # ---- gradings
    def weighted_degree(self, weights: Sequence[int] | None = None):
        return weighted_degree(self, weights)

    # ---- printing
    def __str__(self):
        return format_polynomial(self)

    def __repr__(self):
        return f"Polynomial({str(self)!r})"


def _compose(p: Polynomial, images: list, ring: Ring) -> Polynomial:
    cache: dict = {}

    def power(i, k):
        key = (i, k)
        if key not in cache:
            cache[key] = images[i] ** k
        return cache[key]

    total: dict = {}
    for e, c in p.items():
        term = ring.const(c)
        for i, x in enumerate(e):
            if x:
                term = term * power(i, x)
        for te, tc in term.items():
            v = total.get(te, ZERO) + tc
            if v:
                total[te] = v
            else:
                total.pop(te, None)
    return Polynomial(ring, total, True)


class _Sentinel:
    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


INHOMOGENEOUS = _Sentinel("INHOMOGENEOUS")
# weighted degree of the zero polynomial: compatible with every degree
ANY_DEGREE = _Sentinel("ANY_DEGREE")


def weighted_degree(p: Polynomial, weights: Sequence[int] | None = None):
    """Common weighted degree of all terms, INHOMOGENEOUS, or ANY_DEGREE for 0."""
    w = tuple(weights) if weights is not None else p.ring.weights
    if any(x <= 0 for x in w):
        raise ValueError("weights must be positive")
    if len(w) != p.ring.nvars:
        raise ValueError("one weight per variable required")
    degs = {sum(a * b for a, b in zip(e, w)) for e in p._terms}
    if not degs:
        return ANY_DEGREE
    if len(degs) > 1:
        return INHOMOGENEOUS
    return degs.pop()


def is_homogeneous(polys: Iterable[Polynomial], weights: Sequence[int] | None = None) -> bool:
    return all(weighted_degree(p, weights) is not INHOMOGENEOUS for p in polys)


# --------------------------------------------------------------------------
# text format


def format_monomial(ring: Ring, exp: tuple) -> str:
    parts = []
    for name, x in zip(ring.variables, exp):
        if x == 1:
            parts.append(name)
        elif x:
            parts.append(f"{name}^{x}")
    return "*".join(parts)


def format_polynomial(p: Polynomial) -> str:
    if not p._terms:
        return "0"
    out = []
    for i, (e, c) in enumerate(p.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        mono = format_monomial(p.ring, e)
        if not mono:
            body = format_rational(a)
        elif a == 1:
            body = mono
        else:
            body = f"{format_rational(a)}*{mono}"
        if i == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^()]))")


class _Parser:
    def __init__(self, ring: Ring, text: str):
        self.ring = ring
        self.text = text
        self.tokens = []
        pos = 0
        n = len(text)
        while pos < n:
            if text[pos].isspace():
                pos += 1
                continue
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
            start = m.start(m.lastindex)
            if m.group(1) is not None:
                self.tokens.append(("num", m.group(1), start))
            elif m.group(2) is not None:
                self.tokens.append(("id", m.group(2), start))
            else:
                op = m.group(3)
                self.tokens.append(("op", "^" if op == "**" else op, start))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def error(self, msg):
        raise ParseError(msg, self.text, self.peek()[2])

    def parse(self) -> Polynomial:
        if not self.tokens:
            self.error("empty polynomial")
        p = self.expr()
        if self.i != len(self.tokens):
            self.error(f"unexpected token {self.peek()[1]!r}")
        return p

    def expr(self):
        kind, val, _ = self.peek()
        sign = 1
        if kind == "op" and val in "+-":
            self.take()
            sign = -1 if val == "-" else 1
        p = self.term()
        if sign < 0:
            p = -p
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                q = self.term()
                p = p + q if val == "+" else p - q
            else:
                return p

    def term(self):
        p = self.factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val == "*":
                self.take()
                p = p * self.factor()
            elif kind == "op" and val == "/":
                self.take()
                pos = self.peek()[2]
                q = self.factor()
                if not q.is_constant() or q.is_zero():
                    raise ParseError("division only by nonzero constants", self.text, pos)
                p = p / q
            elif kind in ("num", "id") or (kind == "op" and val == "("):
                p = p * self.factor()
            else:
                return p

    def factor(self):
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            return -self.factor()
        base = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            k, v, pos = self.take()
            if k != "num":
                raise ParseError("exponent must be a non-negative integer", self.text, pos)
            base = base ** int(v)
        return base

    def atom(self):
        kind, val, pos = self.take()
        if kind == "num":
            return self.ring.const(int(val))
        if kind == "id":
            if val not in self.ring._index:
                raise ParseError(f"unknown variable {val!r}", self.text, pos)
            return self.ring.var(val)
        if kind == "op" and val == "(":
            p = self.expr()
            k, v, pos2 = self.take()
            if k != "op" or v != ")":
                raise ParseError("expected ')'", self.text, pos2)
            return p
        raise ParseError("unexpected end of input" if kind is None else f"unexpected token {val!r}",
                         self.text, pos)


def parse(ring: Ring, text: str) -> Polynomial:
    return ring.parse(text)


def arith(a: Polynomial, b: Polynomial, op: str) -> Polynomial:
    """Binary operation by name: ``add``, ``sub`` or ``mul``."""
    if a.ring != b.ring:
        raise RingMismatchError(f"{a.ring!r} vs {b.ring!r}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def differentiate(p: Polynomial, var: str) -> Polynomial:
    return p.diff(var)


def substitute(p: Polynomial, mapping: Mapping[str, object], ring: Ring | None = None,
               keep_missing: bool = False) -> Polynomial:
    return p.substitute(mapping, ring, keep_missing)


def jacobian(polys: Sequence[Polynomial], variables: Sequence[str]) -> list[list[Polynomial]]:
    return [[p.diff(v) for v in variables] for p in polys]
