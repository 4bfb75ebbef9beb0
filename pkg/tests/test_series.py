from __future__ import annotations

from math import gcd

import pytest

from mpspace import BranchParam, MpspaceError, delta_invariant, milnor_from_delta
from mpspace.series import QXi


@pytest.mark.parametrize("p,q", [(2, 3), (2, 5), (3, 4), (3, 5), (4, 7)])
def test_delta_of_monomial_curve(p, q):
    # [DERIVED] semigroup <p, q> has (p-1)(q-1)/2 gaps
    assert gcd(p, q) == 1
    b = BranchParam.from_strings("x y", [("t", [f"t^{p}", f"t^{q}"])])
    assert delta_invariant(b).delta == (p - 1) * (q - 1) // 2


@pytest.mark.parametrize("r", [2, 3, 4])
def test_delta_of_line_arrangement(r):
    # [DERIVED] r distinct lines in a plane: delta = r(r-1)/2
    slopes = [str(k) for k in range(r)]
    b = BranchParam.from_strings("x y", [(f"t{k}", [f"t{k}", f"{s}*t{k}"]) for k, s in enumerate(slopes)])
    d = delta_invariant(b).delta
    assert d == r * (r - 1) // 2
    assert milnor_from_delta(d, r) == (r - 1) ** 2


def test_delta_of_space_curve():
    # [DERIVED] (t^3, t^4, t^5): semigroup <3, 4, 5> misses only 1 and 2
    b = BranchParam.from_strings("x y z", [("t", ["t^3", "t^4", "t^5"])])
    assert delta_invariant(b).delta == 2


def test_conjugate_branches_over_quadratic_extension():
    # two lines with slopes xi and -xi, where xi is a primitive cube root of unity
    b = BranchParam.from_strings("x y", [("t", ["t", "xi*t"]), ("s", ["s", "-xi*s"])])
    assert delta_invariant(b).delta == 1


def test_qxi_arithmetic():
    a = QXi.coerce(3)
    x = QXi(1, 2)
    assert x * x.inverse() == QXi.coerce(1)
    assert (x * x.conjugate()) == QXi.coerce(x.norm())
    assert a + x == QXi(4, 2)


def test_branch_validation():
    with pytest.raises(MpspaceError):
        BranchParam.from_strings("x y", [("t", ["1 + t", "t^2"])])
    with pytest.raises(ValueError):
        BranchParam.from_strings("x y", [("t", ["t"])])
    with pytest.raises(ValueError):
        milnor_from_delta(-1, 1)


def test_generators_restrict_the_ring():
    from mpspace import NotFinite
    b = BranchParam.from_strings("x y", [("t", ["t^2", "t^3"])])
    assert delta_invariant(b, generators=["x", "y"]).delta == 1
    # t^2 alone never reaches odd powers
    with pytest.raises(NotFinite):
        delta_invariant(b, generators=["x"], cap_N=16)
