"""The I-adic towers over and under T and the structure of their Koszul homology.

Every stage is a subquotient of the same ambient T_d, so all tower maps are
induced by the identity; connecting maps are the Koszul differential.
"""
from dataclasses import dataclass, field

from .errors import WindowTooSmall
from .exactla import ModuleShape
from .exactla.linalg import contains, preimage, span_basis, vecmat
from .exterior import subsets
from .graded import IdealQuotient, ideal_power, sequence_monomials, truncated_coefficients
from .koszul import ChainComplexDW


def length(shape):
    """Composition length of the torsion part."""
    return sum(shape.torsion)


def same_size(a, b):
    return a.free_rank == b.free_rank and length(a) == length(b)


@dataclass
class SESReport:
    ok: bool
    failures: list = field(default_factory=list)


def check_ses(A, B, C, f, g, coeffs):
    """Short exactness of A --f--> B --g--> C for subquotients of ambients.

    ``A``, ``B``, ``C`` are ``(num, den, n)``; ``f``, ``g`` are ambient
    matrices or None for the identity.
    """
    (an, ad, na), (bn, bd, nb), (cn, cd, nc) = A, B, C

    def apply(M, rows, n_out):
        if M is None:
            return [list(r) for r in rows]
        return [vecmat(r, M, n_out, coeffs) for r in rows] if n_out else [[] for _ in rows]

    fails = []
    fa, fad = apply(f, an, nb), apply(f, ad, nb)
    gb, gbd = apply(g, bn, nc), apply(g, bd, nc)
    if not contains(bn, nb, fa, coeffs) or not contains(bd, nb, fad, coeffs):
        fails.append("first map not well defined")
    if not contains(cn, nc, gb, coeffs) or not contains(cd, nc, gbd, coeffs):
        fails.append("second map not well defined")
    if not contains(cd, nc, apply(g, fa, nc), coeffs):
        fails.append("composite is nonzero")
    if an and nb:
        killed = preimage(an, f if f is not None else _eye(na), bd, na, nb, coeffs)
        if not contains(ad, na, killed, coeffs):
            fails.append("first map not injective")
    if cn and not contains(gb + cd, nc, cn, coeffs):
        fails.append("second map not surjective")
    if bn:
        ker = preimage(bn, g if g is not None else _eye(nb), cd, nb, nc, coeffs) if nc \
            else span_basis(bn, nb, coeffs)
        if not contains(fa + bd, nb, ker, coeffs):
            fails.append("not exact in the middle")
    return SESReport(not fails, fails)


def _eye(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _piece_triple(pc):
    return (pc.num_rows(), pc.den, pc.n)


def _limit_label(shapes):
    """shapes[s - 1] is the shape of T/I^s for s = 1..N."""
    if all(s.is_zero() for s in shapes):
        return "zero"
    last = shapes[-1]
    s0 = len(shapes)
    while s0 > 1 and shapes[s0 - 2] == last:
        s0 -= 1
    if s0 < len(shapes):
        return f"stabilized at s={s0}"
    if shapes[-1].torsion and len(shapes) > 1 and max(shapes[-1].torsion) > max(shapes[-2].torsion or (0,)):
        return "non-stabilizing, p-adic"
    return "non-stabilizing"


@dataclass
class TowerOverT:
    I: object
    s_max: int
    stages: dict
    cells: dict
    ses: dict
    available: bool = True
    reason: str = ""


@dataclass
class TowerUnderT:
    I: object
    s_max: int
    stages: dict
    cells: dict
    ses: dict
    limits: dict
    cap: object = None


def build_towers(T, I, W, coeffs=None):
    """Both towers through s_max + 1 with every SES checked degreewise.

    Over rings with an invertible generator the powers I^s have infinite
    degree pieces, so the tower over T is reported as unavailable.
    """
    base = coeffs or T.coefficients
    N = W.s_max + 1
    cap = N if T.invertible_index is not None else None
    qc = truncated_coefficients(I, N, base)
    under_stages = {s: IdealQuotient(I, 0, s, coeffs=qc, cap=cap) for s in range(1, N + 1)}
    under_cells = {s: IdealQuotient(I, s, s + 1, coeffs=qc, cap=cap) for s in range(0, N)}
    under_ses = {}
    limits = {}
    for d in W.degrees():
        for s in range(1, N):
            under_ses[s, d] = check_ses(_piece_triple(under_cells[s].piece(d)),
                                        _piece_triple(under_stages[s + 1].piece(d)),
                                        _piece_triple(under_stages[s].piece(d)), None, None, qc)
        limits[d] = _limit_label([under_stages[s].shape(d) for s in range(1, N + 1)])
    under = TowerUnderT(I, W.s_max, under_stages, under_cells, under_ses, limits, cap)

    try:
        over_stages = {s: IdealQuotient(I, s, None, coeffs=base) for s in range(0, N + 1)}
        over_cells = {s: IdealQuotient(I, s, s + 1, coeffs=base) for s in range(0, N)}
        over_ses = {}
        for d in W.degrees():
            for s in range(0, N):
                over_ses[s, d] = check_ses(_piece_triple(over_stages[s + 1].piece(d)),
                                           _piece_triple(over_stages[s].piece(d)),
                                           _piece_triple(over_cells[s].piece(d)), None, None, base)
        over = TowerOverT(I, W.s_max, over_stages, over_cells, over_ses)
    except WindowTooSmall as exc:
        over = TowerOverT(I, W.s_max, {}, {}, {}, available=False, reason=str(exc))
    return over, under


# -- Koszul homology of the stages ----------------------------------------------

class _StageHomology:
    """Cached Koszul cycles/boundaries of one stage module."""

    def __init__(self, S, M):
        self.K = ChainComplexDW(S.elements, M, ring=S.ring)
        self._h = {}

    def H(self, k, d):
        if (k, d) not in self._h:
            self._h[k, d] = self.K.homology(k, d) if self.K.size(k, d) else None
        return self._h[k, d]

    def shape(self, k, d):
        h = self.H(k, d)
        return h.shape if h is not None else ModuleShape.zero(self.K.coeffs.p)

    def triple(self, k, d):
        n = self.K.size(k, d)
        if not n or k < 0 or k > self.K.n:
            return ([], [], n)
        return (self.K.cycles(k, d), self.K.boundaries(k, d), n)


def _zero_matrix_check(src, dst, coeffs):
    """Matrix of an identity-induced map between homology groups; True when zero."""
    if src is None or dst is None:
        return True, []
    M = [dst.coords(g) for g in src.generators]
    return all(not any(r) for r in M), M


@dataclass
class TowerHomologyReport:
    ok: bool
    i_zero: dict
    ses: dict
    cofree: dict
    shapes: dict
    failures: list


def tower_homology(tower, S, W, stages=None):
    """Check the structure of HL on the tower over T.

    (a) i_*: HL(I^{s+1}) -> HL(I^s) is the zero matrix, (b) 0 -> HL(I^s) ->
    HL(I^s/I^{s+1}) -> HL_{k-1}(I^{s+1}) -> 0 is short exact, (c) each
    HL(I^s/I^{s+1}) has the cofree shape HL(L) tensor I^s/I^{s+1}.
    """
    if not tower.available:
        raise WindowTooSmall(tower.reason)
    top = tower.s_max if stages is None else stages
    I = tower.I
    n = len(S)
    coeffs = tower.stages[0].coeffs
    L = IdealQuotient(I, 0, 1, coeffs=coeffs)
    hs = {s: _StageHomology(S, tower.stages[s]) for s in range(0, top + 2)}
    hc = {s: _StageHomology(S, tower.cells[s]) for s in range(0, top + 1)}
    i_zero, ses, cofree, shapes, failures = {}, {}, {}, {}, []
    xdeg = S.degrees
    for s in range(0, top + 1):
        for d in W.degrees():
            for k in range(0, n + 1):
                ok, M = _zero_matrix_check(hs[s + 1].H(k, d), hs[s].H(k, d), coeffs)
                i_zero[s, k, d] = ok
                if not ok:
                    failures.append(("i_* nonzero", s, k, d))
                D = hc[s].K.differential(k, d) if k > 0 and hc[s].K.size(k, d) else None
                rep = check_ses(hs[s].triple(k, d), hc[s].triple(k, d),
                                hs[s + 1].triple(k - 1, d), None, D, coeffs)
                ses[s, k, d] = rep
                if not rep.ok:
                    failures.append(("SES", s, k, d, rep.failures))
                predicted = ModuleShape.zero(coeffs.p)
                for J in subsets(n, k):
                    for alpha in sequence_monomials(n, s):
                        shift = sum(xdeg[j] for j in J) + sum(a * x for a, x in zip(alpha, xdeg))
                        predicted = predicted + L.shape(d - shift)
                got = hc[s].shape(k, d)
                cofree[s, k, d] = got == predicted
                if got != predicted:
                    failures.append(("cofree", s, k, d, str(got), str(predicted)))
                shapes[s, k, d] = got
    return TowerHomologyReport(not failures, i_zero, ses, cofree, shapes, failures)


def cofree_rank(tower, S, W, s):
    """Total rank of HL(I^s/I^{s+1}) over the window."""
    h = _StageHomology(S, tower.cells[s])
    return sum(h.shape(k, d).rank for d in W.degrees() for k in range(len(S) + 1))


@dataclass
class CoupleReport:
    ok: bool
    q_zero: dict
    ses: dict
    phi: dict
    reduced: dict
    failures: list


def unrolled_couple(tower, S, W, over=None):
    """Reduced HL of the stages T/I^s with q_* = 0 and the split triangles.

    For each s: q_*: HL~(T/I^{s+1}) -> HL~(T/I^s) is zero, and
    0 -> HL~_{k+1}(T/I^s) --theta--> HL_k(I^s/I^{s+1}) --j--> HL~_k(T/I^{s+1}) -> 0
    is short exact.  With ``over`` available, HL~_k(T/I^s) and
    HL_{k-1}(I^s) are compared by size.
    """
    n = len(S)
    N = tower.s_max + 1
    coeffs = tower.stages[1].coeffs
    hq = {s: _StageHomology(S, tower.stages[s]) for s in range(1, N + 1)}
    hc = {s: _StageHomology(S, tower.cells[s]) for s in range(1, N)}
    ho = {}
    if over is not None and over.available:
        ho = {s: _StageHomology(S, over.stages[s]) for s in range(1, N + 1)}
    q_zero, ses, phi, reduced, failures = {}, {}, {}, {}, []

    def red_triple(s, k, d):
        if k <= 0:
            # the unit L -> HL_0(T/I^s) is onto, so the reduced group is everything mod everything
            Z = hq[s].K.cycles(0, d) if hq[s].K.size(0, d) else []
            return (Z, Z, hq[s].K.size(0, d))
        return hq[s].triple(k, d)

    def red_shape(s, k, d):
        return hq[s].shape(k, d) if k > 0 else ModuleShape.zero(coeffs.p)

    for d in W.degrees():
        for s in range(1, N + 1):
            for k in range(0, n + 1):
                reduced[s, k, d] = red_shape(s, k, d)
                if ho and k >= 1:
                    other = ho[s].shape(k - 1, d)
                    phi[s, k, d] = same_size(reduced[s, k, d], other)
                    if not phi[s, k, d]:
                        failures.append(("phi", s, k, d))
        for s in range(1, N):
            for k in range(0, n + 1):
                if k >= 1:
                    ok, _ = _zero_matrix_check(hq[s + 1].H(k, d), hq[s].H(k, d), coeffs)
                    q_zero[s, k, d] = ok
                    if not ok:
                        failures.append(("q_* nonzero", s, k, d))
                theta = hq[s].K.differential(k + 1, d) if k + 1 <= n and hq[s].K.size(k + 1, d) else None
                rep = check_ses(red_triple(s, k + 1, d), hc[s].triple(k, d),
                                red_triple(s + 1, k, d), theta, None, coeffs)
                ses[s, k, d] = rep
                if not rep.ok:
                    failures.append(("triangle", s, k, d, rep.failures))
    return CoupleReport(not failures, q_zero, ses, phi, reduced, failures)


def annihilator_check(tower, S, W):
    """x * HL(T/I^s) = 0 for every generator x of I^s; returns failures."""
    n = len(S)
    failures = []
    for s, Q in tower.stages.items():
        h = _StageHomology(S, Q)
        gens = ideal_power(S, s)
        for d in W.degrees():
            for k in range(0, n + 1):
                Z = h.K.cycles(k, d) if h.K.size(k, d) else []
                if not Z:
                    continue
                for mu in gens:
                    e = S.ring.degree(mu)
                    X = _koszul_act(h.K, mu, k, d)
                    m = h.K.size(k, d + e)
                    images = [vecmat(z, X, m, Q.coeffs) for z in Z] if m else []
                    if images and not contains(h.K.boundaries(k, d + e), m, images, Q.coeffs):
                        failures.append((s, k, d, S.ring.format(mu)))
    return failures


def _koszul_act(K, poly, k, d):
    """Multiplication by a ring element on term k, blockwise over e_J."""
    e = K.ring.degree(poly)
    src, n_src, _, _ = K.term(k, d)
    dst, n_dst, _, _ = K.term(k, d + e)
    where = {J: o for J, _, o in dst}
    rows = [[0] * n_dst for _ in range(n_src)]
    for J, pc, off in src:
        X = K.M.act(poly, d - K.xdeg(J))
        toff = where[J]
        for a in range(pc.n):
            for b, v in enumerate(X[a]):
                if v:
                    rows[off + a][toff + b] = v
    return rows
