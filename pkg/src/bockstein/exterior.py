"""Exterior algebras on Bockstein generators and comodules over them.

Basis elements are ascending index tuples.  A comodule over the exterior
coalgebra is stored dually as anticommuting square-zero operators Q_j of
degree -(|x_j| + 1) acting degreewise on a graded module.
"""
from dataclasses import dataclass, field
from itertools import combinations

from .exactla import ModuleShape, Subquotient
from .exactla.linalg import contains, matmul, preimage, span_basis, vecmat
from .graded import BigradedModule, Cell, DegreewiseModule, Piece, sequence_monomials


def merge_sign(u, v):
    """Sign of the shuffle putting u + v in ascending order (0 if they meet)."""
    if set(u) & set(v):
        return 0
    inversions = sum(1 for a in u for b in v if a > b)
    return -1 if inversions % 2 else 1


def wedge(u, v):
    """Product of basis subsets: ``(sign, subset)``, or ``(0, None)`` when zero."""
    sign = merge_sign(u, v)
    if not sign:
        return 0, None
    return sign, tuple(sorted(u + v))


def wedge_elements(a, b):
    """Product of exterior polynomials given as ``{subset: coefficient}``."""
    out = {}
    for u, cu in a.items():
        for v, cv in b.items():
            sign, w = wedge(u, v)
            if sign:
                out[w] = out.get(w, 0) + sign * cu * cv
    return {k: c for k, c in out.items() if c}


def partial_derivation(j, element):
    """The odd derivation with a_i -> delta_ij, applied to ``{subset: coeff}``.

    Removing a_j from position k of a monomial costs (-1)^k.
    """
    if isinstance(element, tuple):
        element = {element: 1}
    out = {}
    for u, c in element.items():
        if j in u:
            k = u.index(j)
            w = u[:k] + u[k + 1:]
            out[w] = out.get(w, 0) + (-1) ** k * c
    return {k: c for k, c in out.items() if c}


def subsets(n, k=None):
    """Ascending subsets of range(n), by size then lexicographically."""
    sizes = range(n + 1) if k is None else [k]
    return [c for size in sizes for c in combinations(range(n), size)]


@dataclass(frozen=True)
class ExteriorStructure:
    """Lambda(a_0..a_{n-1}) with |a_j| = |x_j| + 1."""

    sequence_degrees: tuple

    def __post_init__(self):
        object.__setattr__(self, "sequence_degrees", tuple(self.sequence_degrees))

    @property
    def n(self):
        return len(self.sequence_degrees)

    @property
    def degrees(self):
        return tuple(d + 1 for d in self.sequence_degrees)

    def degree(self, subset):
        return sum(self.degrees[j] for j in subset)

    def basis(self, k=None):
        return subsets(self.n, k)

    def derivation_matrix(self, j):
        """Matrix of d/da_j on the full basis (rows act on the left)."""
        basis = self.basis()
        idx = {b: i for i, b in enumerate(basis)}
        rows = []
        for b in basis:
            row = [0] * len(basis)
            for w, c in partial_derivation(j, b).items():
                row[idx[w]] = c
            rows.append(row)
        return rows


class BocksteinComodule:
    """A degreewise module with operators Q_j lowering degree by |x_j| + 1.

    ``operator(j, d)`` returns the ambient matrix from ``module.piece(d)``
    to ``module.piece(d - |a_j|)``.
    """

    def __init__(self, module, structure, operator, name=""):
        self.module = module
        self.structure = structure
        self._operator = operator
        self.coeffs = module.coeffs
        self.name = name
        self._cache = {}

    @property
    def n(self):
        return self.structure.n

    def piece(self, d):
        return self.module.piece(d)

    def operator(self, j, d):
        key = (j, d)
        if key not in self._cache:
            src = self.piece(d)
            dst = self.piece(d - self.structure.degrees[j])
            rows = self._operator(j, d)
            if len(rows) != src.n or any(len(r) != dst.n for r in rows):
                raise ValueError(f"operator Q_{j} in degree {d} has the wrong shape")
            self._cache[key] = [[self.coeffs.reduce(x) for x in r] for r in rows]
        return self._cache[key]


class _ExteriorPieces(DegreewiseModule):
    """Lambda(a) tensor F, blockwise over the ascending subsets."""

    def __init__(self, F, structure, present):
        super().__init__()
        self.F = F
        self.structure = structure
        self.present = tuple(sorted(present))
        self.ring = F.ring
        self.coeffs = F.coeffs

    def basis(self):
        return [tuple(self.present[i] for i in J) for J in subsets(len(self.present))]

    def _build_piece(self, d):
        labels, num, den = [], [], []
        blocks = []
        for J in self.basis():
            pc = self.F.piece(d - self.structure.degree(J))
            blocks.append((J, pc))
        n = sum(pc.n for _, pc in blocks)
        off = 0
        all_num = True
        for J, pc in blocks:
            labels.extend((J, lab) for lab in pc.labels)
            for r in pc.num_rows():
                num.append([0] * off + list(r) + [0] * (n - off - pc.n))
            for r in pc.den:
                den.append([0] * off + list(r) + [0] * (n - off - pc.n))
            all_num = all_num and pc.num is None
            off += pc.n
        return Piece(labels, None if all_num else num, den, self.coeffs)


def exterior_comodule(F, sequence_degrees, active=None, present=None, name=""):
    """Lambda(a_j : j in ``present``) tensor F with Q_j = d/da_j for j in ``active``.

    There is one operator per sequence element; operators outside ``active``
    are zero, so ``active=()`` is the trivial action.  ``present`` defaults to
    every generator, ``present=[0]`` is the pattern Lambda(a_0).
    """
    ext = ExteriorStructure(sequence_degrees)
    present = range(ext.n) if present is None else present
    active = set(range(ext.n) if active is None else active)
    pieces = _ExteriorPieces(F, ext, present)

    def op(j, d):
        src = pieces.piece(d)
        dst = pieces.piece(d - ext.degrees[j])
        idx = dst.index()
        rows = []
        for J, lab in src.labels:
            row = [0] * dst.n
            if j in active:
                for w, c in partial_derivation(j, J).items():
                    row[idx[(w, lab)]] = c
            rows.append(row)
        return rows

    return BocksteinComodule(pieces, ext, op, name or "exterior")


def trivial_comodule(F, sequence_degrees, name=""):
    """F itself with every Q_j zero."""
    ext = ExteriorStructure(sequence_degrees)

    def op(j, d):
        return [[0] * F.piece(d - ext.degrees[j]).n for _ in range(F.piece(d).n)]

    return BocksteinComodule(F, ext, op, name or "trivial")


class ExplicitModule(DegreewiseModule):
    """Finite free data: ``dims[d]`` basis vectors in degree d, zero elsewhere."""

    def __init__(self, coeffs, dims, labels=None, ring=None):
        super().__init__()
        self.coeffs = coeffs
        self.ring = ring
        self.dims = {d: n for d, n in dims.items() if n}
        self.labels = labels or {}

    def _build_piece(self, d):
        n = self.dims.get(d, 0)
        labels = list(self.labels.get(d, [f"b{d}_{i}" for i in range(n)]))
        return Piece(labels, None, [], self.coeffs)


def matrix_comodule(coeffs, sequence_degrees, dims, operators, labels=None, name=""):
    """Comodule from explicit matrices ``operators[(j, d)]`` (missing = zero)."""
    ext = ExteriorStructure(sequence_degrees)
    module = ExplicitModule(coeffs, dims, labels)

    def op(j, d):
        src = module.piece(d).n
        dst = module.piece(d - ext.degrees[j]).n
        rows = operators.get((j, d))
        if rows is None:
            return [[0] * dst for _ in range(src)]
        return [list(r) for r in rows]

    return BocksteinComodule(module, ext, op, name or "explicit")


# -- validation ----------------------------------------------------------------

@dataclass
class ComoduleCertificate:
    valid: bool
    degrees: list
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.valid


def _maps_into(rows, M, src_vectors, dst):
    """Do the images of ``src_vectors`` lie in span(rows of dst)?"""
    images = [vecmat(v, M, dst.n, dst.coeffs) for v in src_vectors]
    return [i for i, w in enumerate(images) if not contains(rows, dst.n, [w], dst.coeffs)]


def validate_comodule(M, W):
    """Check well-definedness, Q_j^2 = 0 and Q_iQ_j + Q_jQ_i = 0 in the window.

    Violations are ``(i, j, degree, vector)`` with ``i == j`` for squares and
    ``("well-defined", j, degree, vector)`` when Q_j does not respect the
    subquotient structure.
    """
    degs = M.structure.degrees
    c = M.coeffs
    violations = []
    checked = list(W.degrees())
    for d in checked:
        src = M.piece(d)
        if src.n == 0:
            continue
        for j in range(M.n):
            dst = M.piece(d - degs[j])
            Q = M.operator(j, d)
            for i in _maps_into(dst.num_rows(), Q, src.num_rows(), dst):
                violations.append(("well-defined", j, d, src.num_rows()[i]))
            for i in _maps_into(dst.den, Q, src.den, dst):
                violations.append(("well-defined", j, d, src.den[i]))
        for i in range(M.n):
            for j in range(i, M.n):
                mid_i = d - degs[i]
                tgt = M.piece(d - degs[i] - degs[j])
                Qi = M.operator(i, d)
                QjQi = matmul(Qi, M.operator(j, mid_i), tgt.n, c) if tgt.n else [[] for _ in Qi]
                if i == j:
                    total = QjQi
                else:
                    Qj = M.operator(j, d)
                    QiQj = matmul(Qj, M.operator(i, d - degs[j]), tgt.n, c) if tgt.n else [[] for _ in Qj]
                    total = [[c.reduce(a + b) for a, b in zip(r1, r2)] for r1, r2 in zip(QjQi, QiQj)]
                for v in src.num_rows():
                    w = vecmat(v, total, tgt.n, c)
                    if any(w) and not contains(tgt.den, tgt.n, [w], c):
                        violations.append((i, j, d, v))
                        break
    return ComoduleCertificate(not violations, checked, violations)


# -- Coext ---------------------------------------------------------------------

def coext(M, W, sequence_degrees=None):
    """Cohomology of M tensor Sym(y_0..y_{n-1}) with differential sum Q_j tensor y_j.

    The cell (s, t) holds m tensor y^alpha with |alpha| = s and
    |m| + sum alpha_j |x_j| = t.  Returns a BigradedModule over the window.
    """
    xdeg = tuple(sequence_degrees or M.structure.sequence_degrees)
    n = len(xdeg)
    c = M.coeffs

    def ydeg(alpha):
        return sum(a * x for a, x in zip(alpha, xdeg))

    def term(s, t):
        """Blocks (alpha, piece) and the block offsets."""
        if s < 0:
            return [], 0
        blocks = []
        off = 0
        for alpha in sequence_monomials(n, s):
            pc = M.piece(t - ydeg(alpha))
            blocks.append((alpha, pc, off))
            off += pc.n
        return blocks, off

    def differential(s, t):
        src, n_src = term(s, t)
        dst, n_dst = term(s + 1, t - 1)
        where = {alpha: (pc, off) for alpha, pc, off in dst}
        rows = [[0] * n_dst for _ in range(n_src)]
        for alpha, pc, off in src:
            m_deg = t - ydeg(alpha)
            for j in range(n):
                beta = tuple(a + (k == j) for k, a in enumerate(alpha))
                tpc, toff = where[beta]
                Q = M.operator(j, m_deg)
                for a in range(pc.n):
                    for b, v in enumerate(Q[a]):
                        if v:
                            rows[off + a][toff + b] = c.reduce(rows[off + a][toff + b] + v)
        return rows, n_src, n_dst

    def spans(s, t):
        blocks, size = term(s, t)
        num, den = [], []
        for _, pc, off in blocks:
            for r in pc.num_rows():
                num.append([0] * off + list(r) + [0] * (size - off - pc.n))
            for r in pc.den:
                den.append([0] * off + list(r) + [0] * (size - off - pc.n))
        return num, den, size

    cells = {}
    for s in range(W.s_max + 1):
        for t in W.degrees():
            num, den, size = spans(s, t)
            if size == 0:
                cells[s, t] = Cell(ModuleShape.zero(c.p))
                continue
            D, _, n_dst = differential(s, t)
            _, den_dst, _ = spans(s + 1, t - 1)
            Z = preimage(num, D, den_dst, size, n_dst, c) if num else []
            B = list(den)
            if s > 0:
                num_prev, _, size_prev = spans(s - 1, t + 1)
                if size_prev:
                    Dp, _, _ = differential(s - 1, t + 1)
                    B += [vecmat(v, Dp, size, c) for v in num_prev]
            B = span_basis(B, size, c) if B else []
            sq = Subquotient(Z, B, size, c)
            cells[s, t] = Cell(sq.shape, [tuple(g) for g in sq.generators])
    return BigradedModule(c.p, cells)


__all__ = [
    "BocksteinComodule", "ComoduleCertificate", "ExplicitModule", "ExteriorStructure",
    "coext", "exterior_comodule", "matrix_comodule", "merge_sign", "partial_derivation",
    "subsets", "trivial_comodule", "validate_comodule", "wedge", "wedge_elements",
]
