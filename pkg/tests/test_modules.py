from __future__ import annotations

import pytest
import sympy

from mpspace import Ideal, MapGerm, PolyMatrix, PresentedModule, Ring, fitting_ideal, koszul_tor, pushforward_presentation
from mpspace.modules import minors, module_local_colength, quotient_module, syzygy_matrix


def sympy_image_equation(components, source, target):
    """Implicit equation by lex elimination in sympy."""
    s = sympy.symbols(source)
    t = sympy.symbols(target)
    table = {n: v for n, v in zip(source, s)}
    exprs = [T - sympy.sympify(c.replace("^", "**"), locals=table) for T, c in zip(t, components)]
    G = sympy.groebner(exprs, *s, *t, order="lex", domain="QQ")
    return [e for e in G.exprs if not (e.free_symbols & set(s))]


def test_minors_and_det():
    R = Ring("a b c d")
    M = PolyMatrix(R, [["a", "b"], ["c", "d"]])
    assert M.det() == R("a*d - b*c")
    assert minors(M, 1) == Ideal(R, ["a", "b", "c", "d"])


def test_fitting_of_cyclic_module_is_annihilator():
    R = Ring("x y")
    M = quotient_module(Ideal(R, ["x^2", "y"]))
    assert fitting_ideal(M, 0) == Ideal(R, ["x^2", "y"])
    assert fitting_ideal(M, 1).is_unit()


def test_fitting_of_diagonal_presentation():
    R = Ring("x y")
    M = PresentedModule(PolyMatrix(R, [["x", 0], [0, "y"]]))
    assert fitting_ideal(M, 0) == Ideal(R, ["x*y"])
    assert fitting_ideal(M, 1) == Ideal(R, ["x", "y"])
    assert fitting_ideal(M, 2).is_unit()


@pytest.mark.parametrize("components", [
    ["t^2", "t^3"],
    ["t^2", "t^5"],
    ["t^3", "t^4"],
])
def test_pushforward_fitt0_is_image_equation(components):
    # [DERIVED] image of a plane curve parametrisation via sympy elimination
    f = MapGerm.build("t", "X Y", components)
    deg = int(components[0].split("^")[1])
    M = pushforward_presentation(f, [f"t^{i}" for i in range(deg)])
    expect = sympy_image_equation(components, ["t"], ["X", "Y"])
    got = fitting_ideal(M, 0)
    ring = got.ring
    assert got == Ideal(ring, [str(sympy.expand(e)).replace("**", "^") for e in expect])


def test_cross_cap_pushforward():
    f = MapGerm.build("x y", "X Y Z", ["x", "y^2", "y^3 + x*y"])
    M = pushforward_presentation(f, ["1", "y"])
    T = f.target
    assert fitting_ideal(M, 0) == Ideal(T, ["Z^2 - Y*(X + Y)^2"])
    # y and -y share an image exactly when X + Y = 0 and Z = 0
    assert fitting_ideal(M, 1) == Ideal(T, ["Z", "X + Y"])


def test_koszul_tor_small():
    # [DERIVED] by hand: socle of R/(x^2, xy) is spanned by x, so Tor_2 = 1;
    # the module has dimension one, so the Euler characteristic is 0.
    R = Ring("x y")
    M = quotient_module(Ideal(R, ["x^2", "x*y"]))
    assert koszul_tor(M, [R("x"), R("y")]) == [1, 2, 1]


def test_koszul_tor_regular_sequence():
    R = Ring("x y z")
    M = quotient_module(Ideal(R, ["x*y - z^2"]))
    assert koszul_tor(M, [R("x"), R("y")])[1:] == [0, 0]


def test_module_local_colength():
    R = Ring("x y")
    M = PresentedModule(PolyMatrix(R, [["x", "y", 0], [0, "x", "y^2"]]))
    # [DERIVED] by hand: spanned by e1, y e1, y^2 e1, e2, y e2
    assert module_local_colength(M) == 5


def test_syzygy_matrix_composes_to_zero():
    R = Ring("x y z")
    M = PolyMatrix(R, [["x", "y", "z"]])
    S = syzygy_matrix(M)
    prod = [[sum((M.rows[i][k] * S.rows[k][j] for k in range(3)), R.zero()) for j in range(S.ncols)]
            for i in range(1)]
    assert all(e.is_zero() for row in prod for e in row)
    assert S.ncols == 3
