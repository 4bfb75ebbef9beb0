from __future__ import annotations

import pytest

from mpspace import ConstraintLedger, InconsistentSystem, UnderdeterminedPage, ledger_solve, turn_pages
from mpspace.icss import AltChainComplex0, alt0_differentials, alt0_page, e1_from_ranks, equal_up_to_signs


def node_complex():
    # two lines meeting once: D^1 has two branches, D^2 one free orbit
    p, q = (0, (0,)), (1, (0,))
    return AltChainComplex0({1: [(p,), (q,)], 2: [(p, q), (q, p)]})


def test_node_alt_homology():
    c = node_complex()
    assert c.alt_basis(1) == [(0,), (1,)]
    assert len(c.alt_basis(2)) == 1
    pi = c.pi(2)
    assert equal_up_to_signs(pi, [[1], [-1]])
    res = turn_pages(alt0_page(c))
    # the image is a wedge of two lines: contractible
    assert res.homology == [1]


def test_triple_point_complex_pi_composites_vanish():
    atoms = [(0, (0,)), (1, (0,)), (2, (0,))]
    import itertools
    levels = {k: [tuple(t) for t in itertools.permutations(atoms, k)] for k in (1, 2, 3)}
    c = AltChainComplex0(levels)
    d = alt0_differentials(c)
    assert len(c.alt_basis(3)) == 1 and len(c.alt_basis(2)) == 3
    res = turn_pages(alt0_page(c))
    # three coordinate lines through a point are contractible
    assert res.homology == [1]
    assert set(d) == {2, 3}


def test_complex_must_be_symmetric():
    p, q = (0, (0,)), (1, (0,))
    from mpspace import CertificateError
    with pytest.raises(CertificateError):
        AltChainComplex0({1: [(p,), (q,)], 2: [(p, q)]})


def test_equal_up_to_signs():
    assert equal_up_to_signs([[1, -1], [0, 2]], [[-1, -1], [0, -2]])
    assert not equal_up_to_signs([[1, 1]], [[1, 2]])
    assert not equal_up_to_signs([[1]], [[1, 0]])


def test_page_turning_with_known_differential():
    page = e1_from_ranks({(0, 0): 2, (1, 0): 1}, {(1, 0): [[1], [-1]]})
    res = turn_pages(page)
    assert res.homology == [1]
    assert res.page.r == 2


def test_page_turning_needs_differentials():
    page = e1_from_ranks({(0, 1): 1, (2, 0): 1})
    with pytest.raises(UnderdeterminedPage) as err:
        turn_pages(page)
    assert err.value.args


def test_assumption_zeroes_cells():
    page = e1_from_ranks({(0, 1): 1, (2, 0): 1}, assumptions={"vanishing": [(0, 1)]})
    assert page.flags == ("vanishing",)
    assert turn_pages(page).homology == [0, 0, 1]


def test_e1_rejects_bad_shapes():
    with pytest.raises(ValueError):
        e1_from_ranks({(0, 0): 2, (1, 0): 1}, {(1, 0): [[1, 0]]})


def test_ledger_unique_solution():
    L = ConstraintLedger()
    L.add({"a": 1, "b": 1}, 5, "sum")
    L.add({"a": 1, "b": -1}, 1, "difference")
    sol = ledger_solve(L)
    assert sol.values == {"a": 3, "b": 2} and sol.unique and sol.rank == 2


def test_ledger_rejects_negative_or_fractional():
    L = ConstraintLedger()
    L.add({"a": 2}, 3)
    with pytest.raises(InconsistentSystem):
        ledger_solve(L)
    L = ConstraintLedger()
    L.add({"a": 1}, -1)
    with pytest.raises(InconsistentSystem):
        ledger_solve(L)


def test_ledger_inconsistent():
    L = ConstraintLedger()
    L.fix("a", 1)
    L.fix("a", 2)
    with pytest.raises(InconsistentSystem):
        ledger_solve(L)


def test_exact_sequence_bounds():
    # exactness of 1 -> A -> B -> 1 forces A = B
    L = ConstraintLedger()
    L.add_exact_sequence([1, "A", "B", 1], "sequence")
    L.fix("B", 1)
    sol = ledger_solve(L)
    assert sol.values["A"] == 1


def test_exact_sequence_leaves_bounds():
    L = ConstraintLedger()
    L.add_exact_sequence([0, "A", 1, "B", 0], "sequence")
    sol = ledger_solve(L)
    assert not sol.unique
    assert sol.bounds["A"] == (0, 1) and sol.bounds["B"] == (0, 1)
    assert sol.free == ["B"]


def test_ledger_without_row_drops_rank():
    L = ConstraintLedger()
    L.fix("a", 1)
    L.fix("b", 2)
    assert L.rank() == 2 and L.without(0).rank() == 1
