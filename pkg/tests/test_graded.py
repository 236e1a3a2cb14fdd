import pytest

from bockstein.errors import WindowTooSmall
from bockstein.exactla import ModuleShape, PLocalIntegers
from bockstein.graded import (GradedModule, GradedRingPresentation, Generator, IdealQuotient,
                              PolynomialSyntaxError, RegularSequenceData, Window,
                              associated_graded, bp_ring, default_ring, format_polynomial,
                              graded_pieces_oracle, ideal_power, monomial_count, parse_polynomial,
                              quotient_module, regularity_check, sequence_monomials)
from bockstein.exactla.linalg import contains


@pytest.fixture(scope="module")
def bp3():
    T = bp_ring(3, 1)
    return T, RegularSequenceData.parse(T, ["p", "v1"])


def test_ring_rejects_odd_degrees():
    with pytest.raises(ValueError, match="odd degree"):
        default_ring(3, [("v1", 3)])


def test_ring_rejects_two_invertible_generators():
    with pytest.raises(ValueError):
        GradedRingPresentation(PLocalIntegers(3), (Generator("a", 2, True), Generator("b", 4, True)))


def test_parse_and_format_round_trip():
    T = bp_ring(2, 2)
    poly = parse_polynomial("v2 + v1^3 - 2*p*v1^3", T)
    assert parse_polynomial(format_polynomial(poly, T), T) == poly
    assert T.is_homogeneous(poly) and T.degree(poly) == 6


def test_parse_errors_carry_position():
    T = bp_ring(3, 1)
    with pytest.raises(PolynomialSyntaxError):
        parse_polynomial("v1 +", T)
    with pytest.raises(PolynomialSyntaxError, match="unknown generator"):
        parse_polynomial("v7", T)
    with pytest.raises(PolynomialSyntaxError, match="invertible"):
        parse_polynomial("v1^-1", T)


def test_negative_power_of_invertible_generator():
    E = bp_ring(5, 2, invertible_top=True)
    assert E.degree(parse_polynomial("v2^-1*v1^6", E)) == 0


def test_regular_sequence_certified():
    T = bp_ring(3, 2)
    S = RegularSequenceData.parse(T, ["p", "v1"])
    assert regularity_check(GradedModule.free(T), S, Window(0, 40, 3)).regular


def test_prime_on_field_is_not_regular():
    Z = default_ring(3, [])
    Fp = GradedModule.cyclic(Z, [Z.constant(3)])
    cert = regularity_check(Fp, RegularSequenceData.parse(Z, ["p"]), Window(0, 0))
    assert not cert.regular and cert.failure[0] == 0


def test_repeated_prime_witness_is_one():
    Z = default_ring(3, [])
    cert = regularity_check(GradedModule.free(Z), RegularSequenceData.parse(Z, ["p", "p"]),
                            Window(0, 0))
    i, d, witness = cert.failure
    assert (i, d) == (1, 0)
    assert list(witness.values()) == [1]


def test_unit_in_sequence_kills_quotient():
    Z = default_ring(3, [])
    cert = regularity_check(GradedModule.free(Z), RegularSequenceData.parse(Z, ["2"]), Window(0, 0))
    assert not cert.regular and cert.failure[0] == "quotient-vanishes"


def test_window_too_small_is_reported():
    T = bp_ring(3, 1)
    with pytest.raises(WindowTooSmall):
        regularity_check(GradedModule.free(T), RegularSequenceData.parse(T, ["v1"]), Window(0, 2))


def test_ideal_powers(bp3):
    T, I = bp3
    fmt = sorted(format_polynomial(m, T) for m in ideal_power(I, 2))
    assert fmt == sorted(["9", "3*v1", "v1^2"])
    assert ideal_power(I, 0) == [T.constant(1)]
    T2 = bp_ring(2, 2)
    I3 = RegularSequenceData.parse(T2, ["p", "v1", "v2"])
    assert len(ideal_power(I3, 3)) == 10 == monomial_count(3, 3)


def test_ideal_power_product_containment(bp3):
    T, I = bp3
    for s in range(3):
        big = IdealQuotient(I, 0, None)
        for d in range(0, 13, 2):
            pc = big.piece(d)
            idx = pc.index()
            rows = []
            for g in ideal_power(I, s + 1):
                if T.degree(g) > d:
                    continue
                for m in T.monomials(d - T.degree(g)):
                    row = [0] * pc.n
                    for mono, c in g.items():
                        shifted = tuple(a + b for a, b in zip(mono, m))
                        row[idx[shifted]] += c
                    rows.append(row)
            prod = IdealQuotient(I, s, None)
            sI = []
            for x in I.elements:
                if T.degree(x) > d:
                    continue
                for r in prod.piece(d - T.degree(x)).num_rows():
                    labels = prod.piece(d - T.degree(x)).labels
                    row = [0] * pc.n
                    for k, c in enumerate(r):
                        if c:
                            for mono, cx in x.items():
                                row[idx[tuple(a + b for a, b in zip(labels[k], mono))]] += c * cx
                    sI.append(row)
            assert contains(sI, pc.n, rows, T.coefficients)


def test_associated_graded_cells(bp3):
    T, I = bp3
    W = Window(0, 12, 3)
    gr = associated_graded(T, I, W)
    assert gr.shape(1, 0) == ModuleShape.elementary(3, 1)
    assert gr.shape(1, 4) == ModuleShape.elementary(3, 1)
    assert gr.shape(2, 4) == ModuleShape.elementary(3, 1)
    assert sum(gr.shape(2, t).rank for t in (0, 4, 8)) == 3
    assert gr.shapes() == graded_pieces_oracle(T, I, W).shapes()


def test_gr_rank_identity():
    T = bp_ring(2, 2)
    I = RegularSequenceData.parse(T, ["p", "v1", "v2"])
    W = Window(0, 60, 3)
    gr = associated_graded(T, I, W)
    for s in range(4):
        assert gr.row_rank(s) == len(sequence_monomials(3, s))


def test_quotient_modules(bp3):
    Z = default_ring(3, [])
    P = RegularSequenceData.parse(Z, ["p"])
    assert quotient_module(GradedModule.free(Z), P, 2).shape(0) == ModuleShape(3, 0, (2,))
    T, I = bp3
    L = quotient_module(GradedModule.free(T), I, 1)
    assert L.shape(0) == ModuleShape.elementary(3, 1)
    assert all(L.shape(d).is_zero() for d in range(1, 20))
    Q2 = quotient_module(GradedModule.free(T), I, 2)
    assert Q2.shape(4) == ModuleShape.elementary(3, 1)
    assert Q2.shape(0) == ModuleShape(3, 0, (2,))


def test_same_ideal_same_quotients():
    T = bp_ring(2, 2)
    a = RegularSequenceData.parse(T, ["p", "v1", "v2"])
    b = RegularSequenceData.parse(T, ["p", "v1", "v2 + v1^3"])
    for s in (1, 2, 3):
        qa = quotient_module(GradedModule.free(T), a, s)
        qb = quotient_module(GradedModule.free(T), b, s)
        for d in range(0, 24, 2):
            assert qa.shape(d) == qb.shape(d)


def test_invertible_generator_needs_a_cap():
    E = bp_ring(5, 2, invertible_top=True)
    I = RegularSequenceData.parse(E, ["p", "v1"])
    with pytest.raises(WindowTooSmall):
        IdealQuotient(I, 1, None).piece(0)
    L = IdealQuotient(I, 0, 1)
    assert [L.shape(d).rank for d in (-48, 0, 8, 48)] == [1, 1, 0, 1]


def test_regularity_over_invertible_ring():
    E = bp_ring(5, 2, invertible_top=True)
    I = RegularSequenceData.parse(E, ["p", "v1"])
    assert regularity_check(GradedModule.free(E), I, Window(-2, 60, 3)).regular
