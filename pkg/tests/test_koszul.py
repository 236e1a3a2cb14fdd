import pytest

from bockstein.errors import NotFreeError
from bockstein.exactla import ModuleShape, PrimeField
from bockstein.exterior import subsets
from bockstein.graded import (GradedModule, IdealQuotient, RegularSequenceData, Window, bp_ring,
                              default_ring, sequence_monomials)
from bockstein.koszul import (delta, ext_groups, extension_certificate, extension_certified,
                              format_delta, koszul_complex, koszul_homology,
                              relative_injective_resolution)


def _moore():
    T = bp_ring(3, 1)
    S = RegularSequenceData.parse(T, ["p", "v1"])
    return T, S, IdealQuotient(S, 0, 1, coeffs=PrimeField(3))


def test_single_element_complex_is_multiplication_by_p():
    Z = default_ring(3, [])
    S = RegularSequenceData.parse(Z, ["p"])
    K = koszul_complex(S, GradedModule.free(Z), Window(0, 0))
    assert K.size(0, 0) == K.size(1, 0) == 1
    assert K.differential(1, 0) == [[3]]


def test_two_element_complex_has_middle_rank_two():
    T = bp_ring(3, 1)
    S = RegularSequenceData.parse(T, ["p", "v1"])
    K = koszul_complex(S, GradedModule.free(T), Window(0, 12))
    for d in (4, 8, 12):
        assert K.size(1, d) == 2


def test_square_zero_entrywise_three_elements():
    T = bp_ring(2, 2)
    S = RegularSequenceData.parse(T, ["p", "v1", "v2"])
    K = koszul_complex(S, GradedModule.free(T), Window(0, 20))
    for d in range(0, 21):
        for k in range(2, 4):
            A, B = K.differential(k, d), K.differential(k - 1, d)
            if not A or not B or not B[0]:
                continue
            prod = [[sum(a * B[i][j] for i, a in enumerate(row)) for j in range(len(B[0]))]
                    for row in A]
            assert all(x == 0 for row in prod for x in row), (k, d)


def test_tor_of_residue_field_is_exterior():
    T, S, F = _moore()
    res = koszul_homology(S, F, Window(-2, 12))
    assert res.tor_ranks() == [1, 2, 1]
    assert res.bidegrees("tor", 1) == {"e0": (1, 0), "e1": (1, 4)}
    assert res.bidegrees("tor", 2) == {"e0∧e1": (2, 4)}


def test_tor_of_free_module_is_concentrated_in_degree_zero():
    T, S, _ = _moore()
    res = koszul_homology(S, GradedModule.free(T), Window(0, 16))
    assert res.tor_ranks()[1:] == [0, 0]
    assert all(cell.shape == ModuleShape.elementary(3, 1) for (k, _), cell in res.tor.items())


def test_repeated_element_has_first_homology():
    Z = default_ring(3, [])
    S = RegularSequenceData.parse(Z, ["p", "p"])
    res = koszul_homology(S, GradedModule.free(Z), Window(0, 0))
    assert res.tor_ranks()[1] > 0


def test_ext_single_element():
    Z = default_ring(3, [])
    S = RegularSequenceData.parse(Z, ["p"])
    L = IdealQuotient(S, 0, 1, coeffs=PrimeField(3))
    res = ext_groups(S, L, Window(0, 0))
    assert res.ext[1, 0].labels == ["f0"]
    assert res.ext[1, 0].shape == ModuleShape.elementary(3, 1)


def test_ext_two_elements_top_class_and_duality():
    T, S, F = _moore()
    res = ext_groups(S, F, Window(-2, 12))
    assert res.ext_ranks() == [1, 2, 1]
    assert res.bidegrees("ext", 1) == {"f0": (1, 0), "f1": (1, -4)}
    assert res.bidegrees("ext", 2) == {"f0∧f1": (2, -4)}
    for (k, t), cell in res.tor.items():
        assert res.ext[k, -t].shape.rank == cell.shape.rank


def test_dual_class_pairs_to_one():
    T, S, F = _moore()
    res = koszul_homology(S, F, Window(-2, 12))
    sq = res.pairings[1, 0]
    assert res.pairing(1, 0, 0, sq.generators[0]) == 1


def test_ext_requires_free_cells():
    Z = default_ring(3, [])
    S = RegularSequenceData.parse(Z, ["p"])
    with pytest.raises(NotFreeError):
        ext_groups(S, IdealQuotient(S, 0, 2), Window(0, 0))


def test_extension_class_is_certified():
    T, S, _ = _moore()
    cert = extension_certificate(S, Window(-2, 12))
    assert set(cert) == {(0, "e0"), (4, "e1")}
    assert extension_certified(cert, 3)


def test_delta_formulas():
    assert delta((0,), (0, 0)) == {((), (1, 0)): 1}
    assert delta((0,), (0, 0), "derivation") == {((), (1, 0)): -1}
    assert delta((0, 1), (0, 0)) == {((1,), (1, 0)): 1, ((0,), (0, 1)): -1}
    assert format_delta(delta((0, 1), (0, 0))) == "-e0⊗x1 +e1⊗x0"


def _compose(terms, convention):
    out = {}
    for (J, alpha), c in terms.items():
        for key, c2 in delta(J, alpha, convention).items():
            out[key] = out.get(key, 0) + c * c2
    return {k: v for k, v in out.items() if v}


@pytest.mark.parametrize("convention", ["alternating", "derivation"])
def test_delta_squares_to_zero_symbolically(convention):
    for s in range(5):
        for J in subsets(3):
            for alpha in sequence_monomials(3, s):
                assert _compose(delta(J, alpha, convention), convention) == {}


def test_resolution_is_exact():
    T, S, _ = _moore()
    R = relative_injective_resolution(T, S, length=3, W=Window(-2, 16, 2))
    assert R.square_zero
    assert R.is_exact()
    R = relative_injective_resolution(T, S, length=3, W=Window(-2, 16, 2), convention="derivation")
    assert R.is_exact() and R.sign == -1


def test_resolution_rejects_unknown_convention():
    T, S, _ = _moore()
    with pytest.raises(ValueError):
        relative_injective_resolution(T, S, length=1, W=Window(0, 4), convention="other")
