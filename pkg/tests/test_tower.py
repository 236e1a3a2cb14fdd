import pytest

from bockstein.errors import WindowTooSmall
from bockstein.exactla import ModuleShape, PrimeField
from bockstein.graded import (RegularSequenceData, Window, associated_graded, bp_ring,
                              default_ring)
from bockstein.tower import (annihilator_check, build_towers, check_ses, cofree_rank,
                             tower_homology, unrolled_couple)


@pytest.fixture(scope="module")
def moore():
    T = bp_ring(3, 1)
    S = RegularSequenceData.parse(T, ["p", "v1"])
    W = Window(-2, 12, 3)
    over, under = build_towers(T, S, W)
    return T, S, W, over, under


def test_all_short_exact_sequences_hold(moore):
    _, _, _, over, under = moore
    assert over.available
    assert all(r.ok for r in under.ses.values())
    assert all(r.ok for r in over.ses.values())


def test_p_adic_limit_does_not_stabilize():
    Z = default_ring(3, [])
    S = RegularSequenceData.parse(Z, ["p"])
    over, under = build_towers(Z, S, Window(0, 0, 4))
    assert [under.stages[s].shape(0) for s in (1, 2, 3)] == \
        [ModuleShape(3, 0, (1,)), ModuleShape(3, 0, (2,)), ModuleShape(3, 0, (3,))]
    assert under.limits[0] == "non-stabilizing, p-adic"


def test_first_extension_in_degree_zero(moore):
    _, _, _, _, under = moore
    assert under.cells[1].shape(0) == ModuleShape.elementary(3, 1)
    assert under.stages[2].shape(0) == ModuleShape(3, 0, (2,))
    assert under.stages[1].shape(0) == ModuleShape.elementary(3, 1)


def test_tower_cells_match_associated_graded():
    T = bp_ring(3, 1)
    S = RegularSequenceData.parse(T, ["p", "v1"])
    W = Window(0, 16, 4)
    _, under = build_towers(T, S, W)
    gr = associated_graded(T, S, W)
    for s in range(5):
        for d in W.degrees():
            assert under.cells[s].shape(d) == gr.shape(s, d), (s, d)


def test_check_ses_detects_failure():
    F = PrimeField(3)
    # 0 -> F -> F -> F -> 0 with both maps the identity is not exact
    one = ([[1]], [], 1)
    assert not check_ses(one, one, one, None, None, F).ok
    zero = ([], [], 1)
    assert check_ses(zero, one, one, None, None, F).ok


def test_homology_of_tower_over(moore):
    _, S, W, over, _ = moore
    rep = tower_homology(over, S, W, stages=2)
    assert rep.ok, rep.failures[:3]
    # stage 0: HL(T) is L in homological degree 0 only
    assert rep.shapes[0, 0, 0] == ModuleShape.elementary(3, 1)
    assert all(v for (s, k, d), v in rep.i_zero.items())


def test_cofree_rank_of_first_cell(moore):
    _, S, W, over, _ = moore
    assert cofree_rank(over, S, W, 1) == 2 ** 2 * 2


def test_unrolled_couple(moore):
    _, S, W, over, under = moore
    rep = unrolled_couple(under, S, W, over)
    assert rep.ok, rep.failures[:3]
    reduced_l = sum(sh.rank for (s, k, d), sh in rep.reduced.items() if s == 1)
    assert reduced_l == 2 ** 2 - 1
    assert all(rep.q_zero[1, k, d] for k in (1, 2) for d in W.degrees())
    assert rep.phi and all(rep.phi.values())


def test_stages_are_annihilated_by_the_ideal_power(moore):
    _, S, W, _, under = moore
    assert annihilator_check(under, S, Window(-2, 8, 2)) == []


def test_invertible_ring_has_no_tower_over():
    T = bp_ring(5, 2, invertible_top=True)
    S = RegularSequenceData.parse(T, ["p", "v1"])
    W = Window(-8, 56, 2)
    over, under = build_towers(T, S, W)
    assert not over.available and over.reason
    assert all(r.ok for r in under.ses.values())
    with pytest.raises(WindowTooSmall):
        tower_homology(over, S, W)
