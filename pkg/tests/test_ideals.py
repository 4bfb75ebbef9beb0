from __future__ import annotations

import itertools

import pytest
import sympy

from mpspace import (Ideal, NotFinite, NotZeroDimensional, Ring, colength, eliminate, intersect, local_colength,
                     rational_points, same_zero_set, saturate)
from mpspace.ideals import colon, hilbert_series, krull_dim, quotient_basis, radical_membership

from conftest import to_sympy


def sympy_colength(gens, variables, bound=30):
    """Count standard monomials of a sympy Groebner basis."""
    syms = sympy.symbols(variables)
    table = dict(zip(variables, syms))
    G = sympy.groebner([to_sympy(g, table) for g in gens], *syms, order="grevlex", domain="QQ")
    leads = [sympy.Poly(g, *syms).monoms(order="grevlex")[0] for g in G.exprs]
    count = 0
    for e in itertools.product(range(bound), repeat=len(syms)):
        if not any(all(a >= b for a, b in zip(e, lm)) for lm in leads):
            count += 1
    return count


def sympy_saturation(gens, g, variables):
    """Tag-variable elimination computed entirely in sympy."""
    syms = sympy.symbols(variables)
    z = sympy.Symbol("zz_tag")
    table = dict(zip(variables, syms))
    exprs = [to_sympy(p, table) for p in gens] + [1 - z * to_sympy(g, table)]
    G = sympy.groebner(exprs, z, *syms, order="lex", domain="QQ")
    return [e for e in G.exprs if z not in e.free_symbols]


@pytest.mark.parametrize("variables,gens", [
    ("x y", ["x^2", "y^3"]),
    ("x y", ["x^2 - y", "y^2 - x"]),
    ("x y z", ["x^2 + y*z", "y^2 + x*z", "z^2 + x*y"]),
    ("x y z", ["x*y", "y*z", "x*z", "x^2 + y^2 + z^2"]),
])
def test_colength_matches_independent_count(variables, gens):
    # [DERIVED] standard-monomial count from a sympy basis
    R = Ring(variables)
    assert colength(Ideal(R, gens)) == sympy_colength([R(g) for g in gens], variables.split())


def test_colength_rejects_positive_dimension():
    R = Ring("x y")
    with pytest.raises(NotZeroDimensional):
        colength(Ideal(R, ["x*y"]))


def test_local_colength_ignores_far_points():
    R = Ring("x y")
    I = Ideal(R, ["x^2*(x - 1)", "y - x"])
    assert colength(I) == 3
    assert local_colength(I) == 2


def test_local_colength_infinite_at_origin():
    R = Ring("x y")
    with pytest.raises(NotFinite):
        local_colength(Ideal(R, ["x*y"]), cap_N=8)


def test_saturation_matches_sympy():
    # [DERIVED] compare with tag elimination done in sympy
    R = Ring("x y z")
    gens = [R("x*z^2 - y*z^2"), R("x^2*z - x*y*z"), R("y^3*z")]
    g = R("z")
    S, _ = saturate(Ideal(R, gens), g)
    syms = dict(zip("xyz", sympy.symbols("x y z")))
    expect = Ideal(R, [R(str(sympy.expand(e)).replace("**", "^")) for e in sympy_saturation(gens, g, ["x", "y", "z"])])
    assert S == expect


def test_saturation_exponent():
    R = Ring("x y")
    I = Ideal(R, ["x^3*y", "x^3*y^2"])
    S, k = saturate(I, R("x"))
    assert S == Ideal(R, ["y"])
    assert k == 3


def test_homogeneous_and_tag_methods_agree():
    R = Ring("x y z", "grevlex", (1, 1, 1))
    I = Ideal(R, ["x^2*y - y^2*z", "x*y*z - z^3"])
    g = R("z")
    a, _ = saturate(I, g, method="tag")
    b, _ = saturate(I, g)
    assert a == b


def test_colon_and_intersection():
    R = Ring("x y")
    I = Ideal(R, ["x^2", "x*y"])
    assert colon(I, R("x")) == Ideal(R, ["x", "y"])
    J = intersect(Ideal(R, ["x"]), Ideal(R, ["y"]))
    assert J == Ideal(R, ["x*y"])


def test_elimination_gives_implicit_equation():
    R = Ring("t X Y")
    I = Ideal(R, ["X - t^2", "Y - t^3"])
    E = eliminate(I, ["t"])
    assert E.ring.variables == ("X", "Y")
    assert E == Ideal(E.ring, ["X^3 - Y^2"])


def test_krull_dimension():
    R = Ring("x y z")
    assert krull_dim(Ideal(R, ["x*y", "x*z"])) == 2
    assert krull_dim(Ideal(R, ["x", "y", "z"])) == 0


def test_quotient_basis_and_hilbert_series():
    R = Ring("x y")
    I = Ideal(R, ["x^2", "x*y", "y^3"])
    qb = quotient_basis(I)
    assert sorted(str(m) for m in qb.polynomials()) == sorted(["1", "x", "y", "y^2"])
    # 1 + 2t + t^2 over (1 - t)^2 has numerator (1 - t^2)^2
    num, den = hilbert_series(I)
    assert num == {0: 1, 2: -2, 4: 1} and den == (1, 1)


def test_radical_and_zero_sets():
    R = Ring("x y")
    I = Ideal(R, ["x^2", "y"])
    assert radical_membership(R("x"), I)
    assert not I.contains(R("x"))
    assert same_zero_set(I, Ideal(R, ["x", "y"]))
    assert not same_zero_set(I, Ideal(R, ["x"]))


def test_rational_points():
    R = Ring("x y")
    pts = rational_points(Ideal(R, ["x^2 - 1", "y - 2*x"]))
    assert sorted((int(a), int(b)) for a, b in pts.points) == [(-1, -2), (1, 2)]
    assert pts.complete


def test_rational_points_irrational_incomplete():
    R = Ring("x y")
    pts = rational_points(Ideal(R, ["x^2 - 2", "y"]), strict=False)
    assert pts.points == [] and not pts.complete
