"""Koszul complexes, Tor/Ext over the coefficient ring, and the delta resolution."""
from dataclasses import dataclass, field

from .errors import NotFreeError
from .exactla import Subquotient
from .exactla.linalg import contains, preimage, solve_left, span_basis, vecmat
from .exterior import subsets
from .graded import (Cell, GradedModule, IdealQuotient, require_regular,
                     sequence_monomials, truncated_coefficients)


def e_label(J, letter="e"):
    return "∧".join(f"{letter}{j}" for j in J) if J else "1"


def koszul_sign(J, pos):
    """(-1)^(l+1) for the l-th entry, l counted from 1."""
    return -1 if pos % 2 else 1


class ChainComplexDW:
    """K(x) tensor M, degreewise: term k in internal degree d is the sum over
    |J| = k of M_{d - |x_J|}, with d(m e_J) = sum_l (-1)^(l+1) x_{j_l} m e_{J - j_l}.
    """

    def __init__(self, elements, M, W=None, ring=None):
        self.elements = [dict(e) for e in elements]
        self.M = M
        self.W = W
        self.ring = ring or M.ring
        self.coeffs = M.coeffs
        self.n = len(self.elements)
        self.degrees = [self.ring.degree(e) for e in self.elements]
        self._terms = {}
        self._diffs = {}

    def xdeg(self, J):
        return sum(self.degrees[j] for j in J)

    def term(self, k, d):
        """``(blocks, size, num, den)`` with blocks ``(J, piece, offset)``."""
        key = (k, d)
        if key not in self._terms:
            blocks, off = [], 0
            if 0 <= k <= self.n:
                for J in subsets(self.n, k):
                    pc = self.M.piece(d - self.xdeg(J))
                    blocks.append((J, pc, off))
                    off += pc.n
            num, den = [], []
            for _, pc, o in blocks:
                pad = off - o - pc.n
                num.extend([0] * o + list(r) + [0] * pad for r in pc.num_rows())
                den.extend([0] * o + list(r) + [0] * pad for r in pc.den)
            self._terms[key] = (blocks, off, num, den)
        return self._terms[key]

    def size(self, k, d):
        return self.term(k, d)[1]

    def labels(self, k, d):
        return [(J, lab) for J, pc, _ in self.term(k, d)[0] for lab in pc.labels]

    def differential(self, k, d):
        """Ambient matrix from term k to term k - 1 in internal degree d."""
        key = (k, d)
        if key not in self._diffs:
            src, n_src, _, _ = self.term(k, d)
            dst, n_dst, _, _ = self.term(k - 1, d)
            where = {J: o for J, _, o in dst}
            rows = [[0] * n_dst for _ in range(n_src)]
            c = self.coeffs
            for J, pc, off in src:
                for pos, j in enumerate(J):
                    K = J[:pos] + J[pos + 1:]
                    sign = koszul_sign(J, pos)
                    X = self.M.act(self.elements[j], d - self.xdeg(J))
                    toff = where[K]
                    for a in range(pc.n):
                        for b, v in enumerate(X[a]):
                            if v:
                                rows[off + a][toff + b] = c.reduce(rows[off + a][toff + b] + sign * v)
            self._diffs[key] = rows
        return self._diffs[key]

    def cycles(self, k, d):
        _, n, num, _ = self.term(k, d)
        _, m, _, den_t = self.term(k - 1, d)
        if not num:
            return []
        if m == 0:
            return span_basis(num, n, self.coeffs)
        return preimage(num, self.differential(k, d), den_t, n, m, self.coeffs)

    def boundaries(self, k, d):
        _, n, _, den = self.term(k, d)
        _, m, num_up, _ = self.term(k + 1, d)
        rows = list(den)
        if m:
            D = self.differential(k + 1, d)
            rows += [vecmat(v, D, n, self.coeffs) for v in num_up]
        return span_basis(rows, n, self.coeffs) if rows else []

    def homology(self, k, d):
        n = self.size(k, d)
        return Subquotient(self.cycles(k, d), self.boundaries(k, d), n, self.coeffs)

    def square_zero_violations(self, degrees):
        out = []
        c = self.coeffs
        for d in degrees:
            for k in range(2, self.n + 1):
                _, n, num, _ = self.term(k, d)
                _, m, _, den = self.term(k - 2, d)
                if not n or not m:
                    continue
                D1, D2 = self.differential(k, d), self.differential(k - 1, d)
                for v in num:
                    w = vecmat(vecmat(v, D1, self.size(k - 1, d), c), D2, m, c)
                    if any(w) and not contains(den, m, [w], c):
                        out.append((k, d, v))
                        break
        return out

    def leading_label(self, k, d, v):
        """``(J, module label)`` of the first nonzero ambient coordinate."""
        labels = self.labels(k, d)
        for i, x in enumerate(v):
            if x:
                return labels[i]
        return None


def koszul_complex(S, M, W):
    """The Koszul complex of S on M; d^2 = 0 is verified over the window."""
    K = ChainComplexDW(S.elements, M, W, S.ring)
    bad = K.square_zero_violations(W.degrees())
    if bad:
        raise ArithmeticError(f"Koszul differential does not square to zero: {bad[0]}")
    K.square_zero = True
    return K


@dataclass
class TorExtResult:
    """Tor_{k,t} cells (keyed by (k, t)) and, when dualizable, Ext^{k,-t}."""

    p: int
    n: int
    tor: dict
    ext: dict = field(default_factory=dict)
    complex: object = None
    pairings: dict = field(default_factory=dict)

    def tor_ranks(self):
        out = [0] * (self.n + 1)
        for (k, _), cell in self.tor.items():
            out[k] += cell.shape.rank
        return out

    def ext_ranks(self):
        out = [0] * (self.n + 1)
        for (k, _), cell in self.ext.items():
            out[k] += cell.shape.rank
        return out

    def bidegrees(self, side="tor", k=1):
        """``{label: (k, t)}`` for every generator of homological degree k."""
        cells = self.tor if side == "tor" else self.ext
        out = {}
        for (kk, t), cell in sorted(cells.items()):
            if kk == k:
                for lab in cell.labels:
                    out[lab] = (kk, t)
        return out

    def pairing(self, k, t, f_index, tor_vector):
        """Value of the dual class f (index ``f_index`` in Ext^{k,-t}) on a Tor cycle."""
        sq = self.pairings[(k, t)]
        return sq.coords(tor_vector)[f_index]


def koszul_homology(S, M, W):
    """H_k of K(S) tensor M over the window, generators labelled e_J."""
    K = ChainComplexDW(S.elements, M, W, S.ring)
    tor = {}
    pair = {}
    for d in W.degrees():
        for k in range(K.n + 1):
            if K.size(k, d) == 0:
                continue
            sq = K.homology(k, d)
            if sq.shape.is_zero():
                continue
            labels = []
            for g in sq.generators:
                J, lab = K.leading_label(k, d, g)
                labels.append(e_label(J))
            tor[k, d] = Cell(sq.shape, labels)
            pair[k, d] = sq
    return TorExtResult(M.coeffs.p, K.n, tor, complex=K, pairings=pair)


def _is_free_over_ground(shape, coeffs):
    if coeffs.kind == "plocal":
        return not shape.torsion
    return all(e == coeffs.exponent for e in shape.torsion) and not shape.free_rank


def ext_groups(S, M, W):
    """Ext as the ground-ring dual of Tor, generators labelled f_J in (k, -t)."""
    res = koszul_homology(S, M, W)
    for key, cell in res.tor.items():
        if not _is_free_over_ground(cell.shape, M.coeffs):
            raise NotFreeError(f"Tor cell {key} is {cell.shape}, not free over the ground ring")
    for (k, t), cell in res.tor.items():
        res.ext[k, -t] = Cell(cell.shape, [lab.replace("e", "f") for lab in cell.labels])
    return res


def extension_certificate(S, W, coeffs=None):
    """Connecting map of 0 -> J/J^2 -> R/J^2 -> L -> 0 on Tor_1 generators.

    Returns ``{(t, label): {j: coefficient}}`` expressing the image of each
    Tor_1 generator on the classes of the x_j; the extension is classified
    by sum_j f_j tensor x_j exactly when this is a unit diagonal.
    """
    base = coeffs or S.ring.coefficients
    L = IdealQuotient(S, 0, 1, coeffs=truncated_coefficients(S, 1, base))
    R2 = IdealQuotient(S, 0, 2, coeffs=truncated_coefficients(S, 2, base))
    J2 = IdealQuotient(S, 1, 2, coeffs=R2.coeffs)
    tor = koszul_homology(S, L, W)
    K2 = ChainComplexDW(S.elements, R2, W, S.ring)
    out = {}
    for (k, t), cell in tor.tor.items():
        if k != 1:
            continue
        sq = tor.pairings[k, t]
        KL = tor.complex
        src_labels = KL.labels(1, t)
        lift_idx = {lab: i for i, lab in enumerate(K2.labels(1, t))}
        D = K2.differential(1, t)
        target = J2.piece(t).subquotient()
        xs = {}
        for j, x in enumerate(S.elements):
            if S.degrees[j] == t:
                vec = [0] * R2.piece(t).n
                idx = R2.piece(t).index()
                for m, cf in x.items():
                    vec[idx[m]] += cf
                xs[j] = target.coords(vec)
        for g, lab in zip(sq.generators, cell.labels):
            lift = [0] * K2.size(1, t)
            for i, v in enumerate(g):
                if v:
                    lift[lift_idx[src_labels[i]]] = v
            image = vecmat(lift, D, K2.size(0, t), R2.coeffs)
            coords = target.coords(image)
            out[t, lab] = _express(coords, xs, R2.coeffs)
    return out


def _express(coords, xs, coeffs):
    """Write ``coords`` as a combination of the x_j coordinate vectors."""
    js = sorted(xs)
    if not js:
        return {}
    sol = solve_left([xs[j] for j in js], len(coords), coords, coeffs)
    if sol is None:
        return None
    return {j: coeffs.reduce(c) for j, c in zip(js, sol) if coeffs.reduce(c)}


def extension_certified(cert, p):
    """True when every Tor_1 generator maps to a unit multiple of one x_j, bijectively."""
    used = set()
    for combo in cert.values():
        if combo is None or len(combo) != 1:
            return False
        (j, c), = combo.items()
        if c % p == 0 or j in used:
            return False
        used.add(j)
    return True


# -- the delta resolution ------------------------------------------------------

CONVENTIONS = {"alternating": 1, "derivation": -1}


def delta(J, alpha, convention="alternating"):
    """delta(e_J tensor x^alpha) as ``{(J', alpha'): coefficient}``.

    ``alternating`` is sum_l (-1)^(l+1) e_{J - j_l} tensor x_{j_l} x^alpha;
    ``derivation`` is its negative, the one with delta(e_j) = -{x_j}.
    """
    sign = CONVENTIONS[convention]
    out = {}
    for pos, j in enumerate(J):
        K = J[:pos] + J[pos + 1:]
        beta = tuple(a + (i == j) for i, a in enumerate(alpha))
        out[K, beta] = out.get((K, beta), 0) + sign * koszul_sign(J, pos)
    return out


def format_delta(terms, names=None):
    parts = []
    for (K, beta), c in sorted(terms.items()):
        mono = "·".join(f"x{j}" if a == 1 else f"x{j}^{a}" for j, a in enumerate(beta) if a) or "1"
        s = f"{e_label(K)}⊗{mono}"
        parts.append(("-" if c < 0 else "+") + (f"{abs(c)}" if abs(c) != 1 else "") + s)
    return " ".join(parts) if parts else "0"


@dataclass
class ResolutionComplex:
    sequence: object
    L: object
    length: int
    convention: str
    terms: dict
    differentials: dict
    augmentation: dict
    exact: dict
    square_zero: bool
    violations: list

    @property
    def sign(self):
        return CONVENTIONS[self.convention]

    def is_exact(self):
        return all(self.exact.values()) and self.square_zero


def relative_injective_resolution(R, S, length=None, W=None, convention="alternating",
                                  check_regular=True):
    """0 -> L -> HL(L) -> HL(L) tensor J/J^2 -> ... through stage ``length``.

    Stage s in internal degree d is the sum over e_J and degree-s monomials
    x^alpha of L_{d - |x_J| - |alpha|}.  ``exact[(s, d)]`` records whether
    the complex is exact there (at s = 0: kernel equals the image of L).
    """
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown sign convention {convention!r}")
    if length is None:
        length = W.s_max + 1
    if check_regular:
        require_regular(GradedModule.free(R), S, W)
    L = IdealQuotient(S, 0, 1, coeffs=truncated_coefficients(S, 1, R.coefficients))
    c = L.coeffs
    n = len(S)
    xdeg = S.degrees

    def blocks(s, d):
        out, off = [], 0
        if s < 0:
            return out, 0
        for J in subsets(n):
            for alpha in sequence_monomials(n, s):
                shift = sum(xdeg[j] for j in J) + sum(a * x for a, x in zip(alpha, xdeg))
                pc = L.piece(d - shift)
                out.append((J, alpha, pc, off))
                off += pc.n
        return out, off

    terms, diffs = {}, {}

    def term(s, d):
        if (s, d) not in terms:
            bl, size = blocks(s, d)
            num, den = [], []
            for _, _, pc, o in bl:
                pad = size - o - pc.n
                num.extend([0] * o + list(r) + [0] * pad for r in pc.num_rows())
                den.extend([0] * o + list(r) + [0] * pad for r in pc.den)
            terms[s, d] = (bl, size, num, den)
        return terms[s, d]

    def differential(s, d):
        if (s, d) not in diffs:
            src, n_src, _, _ = term(s, d)
            dst, n_dst, _, _ = term(s + 1, d)
            where = {(J, alpha): o for J, alpha, _, o in dst}
            rows = [[0] * n_dst for _ in range(n_src)]
            for J, alpha, pc, off in src:
                for (K, beta), sgn in delta(J, alpha, convention).items():
                    toff = where[K, beta]
                    for a in range(pc.n):
                        rows[off + a][toff + a] = c.reduce(rows[off + a][toff + a] + sgn)
            diffs[s, d] = rows
        return diffs[s, d]

    augmentation = {}
    exact = {}
    violations = []
    square_zero = True
    for d in W.degrees():
        pcL = L.piece(d)
        bl0, n0, _, _ = term(0, d)
        aug = [[0] * n0 for _ in range(pcL.n)]
        for J, alpha, pc, off in bl0:
            if not J:
                for a in range(pc.n):
                    aug[a][off + a] = 1
        augmentation[d] = aug
        for s in range(length + 1):
            _, n_s, num_s, den_s = term(s, d)
            _, n_t, _, den_t = term(s + 1, d)
            D = differential(s, d)
            if s + 2 <= length + 1:
                _, n_u, _, den_u = term(s + 2, d)
                D2 = differential(s + 1, d)
                for v in num_s:
                    w = vecmat(vecmat(v, D, n_t, c), D2, n_u, c) if n_u else []
                    if any(w) and not contains(den_u, n_u, [w], c):
                        square_zero = False
                        violations.append(("square", s, d, v))
                        break
            if n_s == 0:
                exact[s, d] = True
                continue
            Z = preimage(num_s, D, den_t, n_s, n_t, c) if n_t else span_basis(num_s, n_s, c)
            if s == 0:
                B = [vecmat(v, aug, n0, c) for v in pcL.num_rows()] + list(den_s)
            else:
                _, n_p, num_p, _ = term(s - 1, d)
                Dp = differential(s - 1, d)
                B = [vecmat(v, Dp, n_s, c) for v in num_p] + list(den_s)
            ok = contains(B, n_s, Z, c)
            exact[s, d] = ok
            if not ok:
                violations.append(("homology", s, d, None))
    return ResolutionComplex(S, L, length, convention, terms, diffs, augmentation,
                             exact, square_zero, violations)

