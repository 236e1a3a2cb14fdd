"""Graded coefficient rings, finitely presented graded modules and I-adic data.

Ring elements are polynomials stored as ``{exponent tuple: int}``; the prime
p is an integer coefficient and may appear as the degree-0 sequence element.
Modules are realized one internal degree at a time as subquotients of free
ground-ring modules on monomial bases (see :class:`Piece`).
"""
import ast
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb

from .errors import BocksteinError, NonRegular, WindowTooSmall
from .exactla import Coefficients, ModuleShape, PLocalIntegers, Subquotient
from .exactla.linalg import contains, preimage, identity_rows


# -- polynomials ------------------------------------------------------------

def poly_add(a, b):
    out = dict(a)
    for m, c in b.items():
        v = out.get(m, 0) + c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def poly_scale(a, c):
    return {m: c * v for m, v in a.items() if c * v}


def poly_mul(a, b):
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            v = out.get(m, 0) + ca * cb
            if v:
                out[m] = v
            else:
                out.pop(m)
    return out


def poly_pow(a, k, n):
    out = {(0,) * n: 1}
    for _ in range(k):
        out = poly_mul(out, a)
    return out


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int
    invertible: bool = False


class PolynomialSyntaxError(BocksteinError):
    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


@dataclass(frozen=True)
class GradedRingPresentation:
    """A graded commutative ring ``coefficients[generators]``.

    At most one generator may be invertible.  All degrees are even; the
    non-invertible generators have positive degree.
    """

    coefficients: Coefficients
    generators: tuple = ()

    def __post_init__(self):
        gens = tuple(g if isinstance(g, Generator) else Generator(*g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        names = [g.name for g in gens]
        if len(set(names)) != len(names):
            raise ValueError("duplicate generator names")
        if "p" in names:
            raise ValueError("'p' is reserved for the prime")
        for g in gens:
            if g.degree % 2:
                raise ValueError(f"generator {g.name} has odd degree {g.degree}; rings must be even")
            if g.degree <= 0:
                raise ValueError(f"generator {g.name} must have positive degree")
        if sum(g.invertible for g in gens) > 1:
            raise ValueError("at most one generator may be invertible")

    @property
    def p(self):
        return self.coefficients.p

    @property
    def ngens(self):
        return len(self.generators)

    @property
    def invertible_index(self):
        for i, g in enumerate(self.generators):
            if g.invertible:
                return i
        return None

    @property
    def degrees(self):
        return tuple(g.degree for g in self.generators)

    def cover(self):
        """The same ring with the invertible generator made polynomial."""
        return GradedRingPresentation(
            self.coefficients,
            tuple(Generator(g.name, g.degree) for g in self.generators))

    # elements
    def zero_exps(self):
        return (0,) * self.ngens

    def constant(self, c):
        return {self.zero_exps(): c} if c else {}

    def gen(self, name):
        i = [g.name for g in self.generators].index(name)
        e = [0] * self.ngens
        e[i] = 1
        return {tuple(e): 1}

    def mono_degree(self, exps):
        return sum(e * d for e, d in zip(exps, self.degrees))

    def weight(self, exps):
        """Total exponent in the non-invertible generators."""
        u = self.invertible_index
        return sum(e for i, e in enumerate(exps) if i != u)

    def degree(self, poly):
        """Degree of a homogeneous nonzero polynomial."""
        degs = {self.mono_degree(m) for m in poly}
        if len(degs) != 1:
            raise ValueError(f"{self.format(poly)} is not homogeneous")
        return degs.pop()

    def is_homogeneous(self, poly):
        return len({self.mono_degree(m) for m in poly}) <= 1

    def parse(self, text):
        return parse_polynomial(text, self)

    def format(self, poly):
        return format_polynomial(poly, self)

    def monomials(self, d, weight_cap=None):
        """Exponent tuples of degree d in graded-lex order.

        With an invertible generator the answer is infinite unless a weight
        cap bounds the exponents of the other generators.
        """
        return _monomials(self.degrees, self.invertible_index, d, weight_cap)


@lru_cache(maxsize=None)
def _monomials(degrees, inv, d, cap):
    n = len(degrees)
    free = [i for i in range(n) if i != inv]
    if inv is not None and free and cap is None:
        raise WindowTooSmall("degree pieces are infinite over a ring with an invertible "
                             "generator unless truncated by a power of the ideal")
    out = []

    def rec(k, remaining, exps, wt):
        if k == len(free):
            if inv is None:
                if remaining == 0:
                    out.append(tuple(exps))
            elif remaining % degrees[inv] == 0:
                e = list(exps)
                e[inv] = remaining // degrees[inv]
                out.append(tuple(e))
            return
        i = free[k]
        e = 0
        while True:
            if cap is not None and wt + e >= cap:
                break
            rem = remaining - e * degrees[i]
            if inv is None and rem < 0:
                break
            exps[i] = e
            rec(k + 1, rem, exps, wt + e)
            exps[i] = 0
            e += 1
            if inv is not None and cap is None:
                break

    rec(0, d, [0] * n, 0)
    out.sort(key=lambda m: (sum(m[i] for i in free), tuple(m[i] for i in free)))
    return tuple(out)


def parse_polynomial(text, ring):
    """Parse an integer-coefficient polynomial in the ring's generator names."""
    names = {g.name: i for i, g in enumerate(ring.generators)}
    n = ring.ngens
    try:
        tree = ast.parse(text.replace("^", "**").strip(), mode="eval")
    except SyntaxError as exc:
        raise PolynomialSyntaxError(f"cannot parse {text!r}", exc.offset) from None

    def ev(node):
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Add):
                return poly_add(ev(node.left), ev(node.right))
            if isinstance(node.op, ast.Sub):
                return poly_add(ev(node.left), poly_scale(ev(node.right), -1))
            if isinstance(node.op, ast.Mult):
                return poly_mul(ev(node.left), ev(node.right))
            if isinstance(node.op, ast.Pow):
                if not (isinstance(node.right, ast.Constant) or isinstance(node.right, ast.UnaryOp)):
                    raise PolynomialSyntaxError("exponents must be integers", node.col_offset)
                k = ev_int(node.right)
                base = ev(node.left)
                if k < 0:
                    if len(base) != 1:
                        raise PolynomialSyntaxError("only monomials can be inverted", node.col_offset)
                    (m, c), = base.items()
                    u = ring.invertible_index
                    if c != 1 or u is None or any(e for i, e in enumerate(m) if i != u):
                        raise PolynomialSyntaxError("negative powers need an invertible generator",
                                                    node.col_offset)
                    return {tuple(e * k for e in m): 1}
                return poly_pow(base, k, n)
        if isinstance(node, ast.UnaryOp):
            if isinstance(node.op, ast.USub):
                return poly_scale(ev(node.operand), -1)
            if isinstance(node.op, ast.UAdd):
                return ev(node.operand)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return ring.constant(node.value)
        if isinstance(node, ast.Name):
            if node.id in names:
                e = [0] * n
                e[names[node.id]] = 1
                return {tuple(e): 1}
            if node.id in ("p", "v0"):
                return ring.constant(ring.p)
            raise PolynomialSyntaxError(f"unknown generator {node.id!r}", node.col_offset)
        raise PolynomialSyntaxError(f"unsupported expression in {text!r}",
                                    getattr(node, "col_offset", None))

    def ev_int(node):
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return node.value
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -ev_int(node.operand)
        raise PolynomialSyntaxError("exponents must be integers", node.col_offset)

    return ev(tree.body)


def format_polynomial(poly, ring):
    if not poly:
        return "0"
    terms = []
    for m in sorted(poly, key=lambda m: (ring.weight(m), m)):
        c = poly[m]
        factors = []
        for g, e in zip(ring.generators, m):
            if e == 1:
                factors.append(g.name)
            elif e:
                factors.append(f"{g.name}^{e}")
        mono = "*".join(factors)
        if not mono:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        elif c == -1:
            terms.append("-" + mono)
        else:
            terms.append(f"{c}*{mono}")
    return " + ".join(terms).replace("+ -", "- ")


# -- sequences, windows -----------------------------------------------------

@dataclass(frozen=True)
class Window:
    dmin: int
    dmax: int
    s_max: int = 5
    r_max: int = 3

    def __post_init__(self):
        if self.dmin > self.dmax:
            raise ValueError("empty degree window")
        if self.s_max < 1 or self.r_max < 1:
            raise ValueError("s_max and r_max must be at least 1")

    def degrees(self):
        return range(self.dmin, self.dmax + 1)


class RegularSequenceData:
    """A finite sequence x_0..x_{n-1} of homogeneous ring elements."""

    def __init__(self, ring, elements, names=None):
        self.ring = ring
        self.elements = [dict(e) for e in elements]
        for e in self.elements:
            if not e:
                raise ValueError("sequence elements must be nonzero")
            ring.degree(e)
        self.names = list(names) if names else [ring.format(e) for e in self.elements]

    @classmethod
    def parse(cls, ring, texts):
        return cls(ring, [ring.parse(t) for t in texts], names=list(texts))

    def __len__(self):
        return len(self.elements)

    @property
    def degrees(self):
        return [self.ring.degree(e) for e in self.elements]

    def p_exponent(self):
        """a when some x_j is u*p^a with u a unit integer; otherwise None."""
        best = None
        z = self.ring.zero_exps()
        for e in self.elements:
            if list(e) == [z]:
                c = e[z]
                a = 0
                while c % self.ring.p == 0:
                    c //= self.ring.p
                    a += 1
                if a and (best is None or a < best):
                    best = a
        return best

    def bare_generators(self):
        """Indices of ring generators appearing (up to a unit) as sequence elements."""
        out = set()
        for e in self.elements:
            if len(e) == 1:
                (m, c), = e.items()
                if sum(m) == 1 and c % self.ring.p:
                    out.add(m.index(1))
        return out

    def truncation_ok(self):
        """Whether every non-invertible generator lies in I (needed for weight caps)."""
        u = self.ring.invertible_index
        need = {i for i in range(self.ring.ngens) if i != u}
        return need <= self.bare_generators()


def sequence_monomials(n, s):
    """Exponent vectors of degree s in n variables, x_0-heaviest first."""
    out = []
    for combo in combinations_with_replacement(range(n), s):
        a = [0] * n
        for j in combo:
            a[j] += 1
        out.append(tuple(a))
    return out


def ideal_power(I, s):
    """Generators of I^s: the degree-s monomials in the sequence elements."""
    if s < 0:
        raise ValueError("s must be nonnegative")
    n = I.ring.ngens
    out = []
    for alpha in sequence_monomials(len(I), s):
        poly = I.ring.constant(1)
        for x, a in zip(I.elements, alpha):
            poly = poly_mul(poly, poly_pow(x, a, n))
        out.append(poly)
    return out


# -- degreewise realization --------------------------------------------------

@dataclass
class Piece:
    """One internal degree of a module: span(num)/span(den) in R^len(labels)."""

    labels: list
    num: object  # None = whole ambient
    den: list
    coeffs: Coefficients
    _sq: object = field(default=None, repr=False)

    @property
    def n(self):
        return len(self.labels)

    def subquotient(self):
        if self._sq is None:
            self._sq = Subquotient(self.num, self.den, self.n, self.coeffs)
        return self._sq

    @property
    def shape(self):
        return self.subquotient().shape

    def num_rows(self):
        return identity_rows(self.n) if self.num is None else self.num

    def index(self):
        return {lab: i for i, lab in enumerate(self.labels)}


class DegreewiseModule:
    """Base class: a graded T-module realized degree by degree."""

    ring = None
    coeffs = None

    def __init__(self):
        self._pieces = {}

    def piece(self, d):
        if d not in self._pieces:
            self._pieces[d] = self._build_piece(d)
        return self._pieces[d]

    def shape(self, d):
        return self.piece(d).shape

    def act(self, poly, d):
        """Ambient matrix of multiplication by ``poly`` from degree d."""
        src = self.piece(d)
        dst = self.piece(d + self.ring.degree(poly))
        idx = dst.index()
        rows = []
        for lab in src.labels:
            row = [0] * dst.n
            for tgt, c in self._multiply_label(lab, poly):
                j = idx.get(tgt)
                if j is None:
                    if self._dropped(tgt):
                        continue
                    raise KeyError(f"{tgt} missing from degree {d + self.ring.degree(poly)}")
                row[j] += c
            rows.append([self.coeffs.reduce(x) for x in row])
        return rows


def _mono_mul(a, b):
    return tuple(x + y for x, y in zip(a, b))


class GradedModule(DegreewiseModule):
    """A finitely presented graded T-module.

    ``generators`` are ``(name, degree)`` pairs, ``relations`` are dicts
    ``{generator index: polynomial}``, each homogeneous.  ``truncation``
    ``(I, N)`` additionally kills I^N M; over rings with an invertible
    generator it is required and fixes the weight cap at N.
    """

    def __init__(self, ring, generators, relations=(), coeffs=None, truncation=None):
        super().__init__()
        self.ring = ring
        self.generators = [tuple(g) for g in generators]
        self.relations = [dict(r) for r in relations]
        self.coeffs = coeffs or ring.coefficients
        self.truncation = truncation
        self.weight_cap = None
        if truncation is not None:
            I, N = truncation
            if ring.invertible_index is not None:
                if not I.truncation_ok():
                    raise WindowTooSmall("with an invertible generator every other generator "
                                         "must appear in the sequence")
                self.weight_cap = N
            self._trunc_gens = ideal_power(I, N)
        self.relation_degrees = []
        for r in self.relations:
            degs = {ring.degree(poly) + self.generators[g][1] for g, poly in r.items() if poly}
            if len(degs) > 1:
                raise ValueError("relation is not homogeneous")
            self.relation_degrees.append(degs.pop() if degs else None)

    @classmethod
    def free(cls, ring, degree=0, **kw):
        return cls(ring, [("1", degree)], **kw)

    @classmethod
    def cyclic(cls, ring, elements, degree=0, **kw):
        """T/(elements) on one generator."""
        return cls(ring, [("1", degree)], [{0: e} for e in elements], **kw)

    def with_relations(self, extra, truncation=None, coeffs=None):
        return GradedModule(self.ring, self.generators, self.relations + [dict(r) for r in extra],
                            coeffs=coeffs or self.coeffs,
                            truncation=truncation if truncation is not None else self.truncation)

    def _dropped(self, label):
        return self.weight_cap is not None and self.ring.weight(label[1]) >= self.weight_cap

    def _multiply_label(self, lab, poly):
        g, m = lab
        for pm, c in poly.items():
            yield (g, _mono_mul(m, pm)), c

    def _expand(self, g_poly, m, idx, n):
        row = [0] * n
        for g, poly in g_poly.items():
            for pm, c in poly.items():
                j = idx.get((g, _mono_mul(m, pm)))
                if j is None:
                    if self._dropped((g, _mono_mul(m, pm))):
                        continue
                    raise KeyError((g, m, pm))
                row[j] += c
        return [self.coeffs.reduce(x) for x in row]

    def _build_piece(self, d):
        ring = self.ring
        labels = []
        for gi, (_, gd) in enumerate(self.generators):
            for m in ring.monomials(d - gd, self.weight_cap):
                labels.append((gi, m))
        idx = {lab: i for i, lab in enumerate(labels)}
        n = len(labels)
        den = []
        for r, rd in zip(self.relations, self.relation_degrees):
            if rd is None:
                continue
            for m in ring.monomials(d - rd, self.weight_cap):
                den.append(self._expand(r, m, idx, n))
        if self.truncation is not None:
            for mu in self._trunc_gens:
                md = ring.degree(mu)
                for gi, (_, gd) in enumerate(self.generators):
                    for m in ring.monomials(d - gd - md, self.weight_cap):
                        den.append(self._expand({gi: mu}, m, idx, n))
        den = [r for r in den if any(r)]
        return Piece(labels, None, den, self.coeffs)


class IdealQuotient(DegreewiseModule):
    """The subquotient I^a / I^b of T (``b=None`` means the zero submodule)."""

    def __init__(self, I, a, b=None, coeffs=None, cap=None):
        super().__init__()
        self.I = I
        self.ring = I.ring
        self.a = a
        self.b = b
        if b is not None and b < a:
            raise ValueError("need a <= b")
        self.coeffs = coeffs or self.ring.coefficients
        self.weight_cap = None
        if self.ring.invertible_index is not None:
            if b is None:
                raise WindowTooSmall("I^a has infinite degree pieces over a ring with an "
                                     "invertible generator; only quotient stages are finite")
            if not I.truncation_ok():
                raise WindowTooSmall("every non-invertible generator must lie in the sequence")
            # monomials of weight >= cap lie in I^b, so a common cap >= b is harmless
            self.weight_cap = b if cap is None else max(cap, b)
        self._num_gens = ideal_power(I, a) if a > 0 else None
        self._den_gens = ideal_power(I, b) if b is not None else []

    def _dropped(self, label):
        return self.weight_cap is not None and self.ring.weight(label) >= self.weight_cap

    def _multiply_label(self, m, poly):
        for pm, c in poly.items():
            yield _mono_mul(m, pm), c

    def _gens_rows(self, gens, d, idx, n):
        rows = []
        for mu in gens:
            md = self.ring.degree(mu)
            for m in self.ring.monomials(d - md, self.weight_cap):
                row = [0] * n
                for pm, c in mu.items():
                    t = _mono_mul(m, pm)
                    j = idx.get(t)
                    if j is None:
                        if self._dropped(t):
                            continue
                        raise KeyError(t)
                    row[j] += c
                row = [self.coeffs.reduce(x) for x in row]
                if any(row):
                    rows.append(row)
        return rows

    def _build_piece(self, d):
        labels = list(self.ring.monomials(d, self.weight_cap))
        idx = {m: i for i, m in enumerate(labels)}
        n = len(labels)
        num = None if self._num_gens is None else self._gens_rows(self._num_gens, d, idx, n)
        den = self._gens_rows(self._den_gens, d, idx, n)
        return Piece(labels, num, den, self.coeffs)


def quotient_module(M, I, s):
    """Presentation of M / I^s M."""
    if s < 1:
        raise ValueError("s must be at least 1")
    extra = []
    for mu in ideal_power(I, s):
        for gi in range(len(M.generators)):
            extra.append({gi: mu})
    return M.with_relations(extra)


def truncated_coefficients(I, N, base):
    """Ground ring for computations modulo I^N: Z/p^(aN) when p^a is in I."""
    a = I.p_exponent()
    if a is None or base.kind == "field":
        return base
    if base.kind == "prime_power":
        return base.as_prime_power(min(base.k, a * N))
    return base.as_prime_power(a * N)


# -- bigraded output ---------------------------------------------------------

@dataclass
class Cell:
    shape: ModuleShape
    labels: list = field(default_factory=list)


class BigradedModule:
    """Cells indexed by (filtration s, internal degree t)."""

    def __init__(self, p, cells=None, monomials=None):
        self.p = p
        self.cells = dict(cells or {})
        self.monomials = dict(monomials or {})

    def shape(self, s, t):
        c = self.cells.get((s, t))
        return c.shape if c else ModuleShape.zero(self.p)

    def nonzero(self):
        return {k: c for k, c in self.cells.items() if not c.shape.is_zero()}

    def row_rank(self, s):
        return sum(c.shape.rank for (a, _), c in self.cells.items() if a == s)

    def shapes(self):
        return {k: c.shape for k, c in self.cells.items()}


def associated_graded(T, I, W, coeffs=None):
    """gr_I(T) as free L_*-modules on Sym monomials in the classes {x_j}.

    Cell (s, t) is the sum over degree-s exponent vectors alpha of the
    degree t - |alpha| piece of L = T/I, labelled ``(alpha, L-label)``.
    """
    L = IdealQuotient(I, 0, 1, coeffs=coeffs)
    degs = I.degrees
    cells = {}
    monos = {}
    for s in range(W.s_max + 1):
        monos[s] = [(a, sum(x * y for x, y in zip(a, degs))) for a in sequence_monomials(len(I), s)]
        for t in W.degrees():
            shape = ModuleShape.zero(T.p)
            labels = []
            for alpha, ad in monos[s]:
                pc = L.piece(t - ad)
                sq = pc.subquotient()
                shape = shape + sq.shape
                labels.extend((alpha, tuple(g)) for g in sq.generators)
            cells[s, t] = Cell(shape, labels)
    return BigradedModule(T.p, cells, monos)


def graded_pieces_oracle(T, I, W, coeffs=None):
    """gr_I(T) computed directly as I^s/I^{s+1} degree by degree."""
    cells = {}
    for s in range(W.s_max + 1):
        q = IdealQuotient(I, s, s + 1, coeffs=coeffs)
        for t in W.degrees():
            cells[s, t] = Cell(q.shape(t))
    return BigradedModule(T.p, cells)


def graded_quotient_shapes(I, W, killers, coeffs=None):
    """Cells of gr_I(T) / (classes of ``killers``) computed inside T.

    ``killers`` are ``(element, f)`` with element in I^f; cell (s, t) is
    I^s / (I^{s+1} + sum element * I^{s-f}) in degree t.
    """
    T = I.ring
    coeffs = coeffs or truncated_coefficients(I, W.s_max + 2, T.coefficients)
    cap = W.s_max + 2 if T.invertible_index is not None else None
    amb = IdealQuotient(I, 0, W.s_max + 2, coeffs=coeffs, cap=cap)
    cells = {}
    for s in range(W.s_max + 1):
        num_gens = ideal_power(I, s)
        den_gens = ideal_power(I, s + 1) + ideal_power(I, W.s_max + 2)
        for y, f in killers:
            if s - f >= 0:
                den_gens += [poly_mul(y, mu) for mu in ideal_power(I, s - f)]
        for t in W.degrees():
            pc = amb.piece(t)
            idx = pc.index()
            num = amb._gens_rows(num_gens, t, idx, pc.n)
            den = amb._gens_rows(den_gens, t, idx, pc.n)
            cells[s, t] = Cell(Subquotient(num, den, pc.n, coeffs).shape)
    return BigradedModule(T.p, cells)


# -- regularity --------------------------------------------------------------

@dataclass
class RegularityCertificate:
    regular: bool
    checked_degrees: dict = field(default_factory=dict)
    failure: object = None
    note: str = ""

    def __bool__(self):
        return self.regular


def _injective_failure(Q, x, d):
    """A class in Q_d killed by x, or None."""
    src = Q.piece(d)
    dst = Q.piece(d + Q.ring.degree(x))
    if src.n == 0:
        return None
    X = Q.act(x, d)
    pre = preimage(identity_rows(src.n), X, dst.den, src.n, dst.n, Q.coeffs)
    sm_den = src.den
    for v in pre:
        if not contains(sm_den, src.n, [v], Q.coeffs):
            return v
    return None


def regularity_check(M, S, W):
    """Check that S is regular on M inside the window.

    Returns a certificate; on failure ``failure`` is ``(i, degree, vector)``
    or ``("quotient-vanishes", None, None)``.
    """
    ring = M.ring
    note = ""
    if ring.invertible_index is not None:
        cover = ring.cover()
        S = RegularSequenceData(cover, S.elements, S.names)
        M = GradedModule(cover, M.generators, M.relations, coeffs=M.coeffs)
        ring = cover
        note = "checked on the polynomial cover; the invertible generator is checked as a nonzerodivisor"
    checked = {}
    Q = M
    for i, x in enumerate(S.elements):
        dx = ring.degree(x)
        degrees = [d for d in W.degrees() if d + dx <= W.dmax]
        if not degrees:
            raise WindowTooSmall(f"window [{W.dmin}, {W.dmax}] cannot hold multiplication by "
                                 f"{S.names[i]} (degree {dx})")
        for d in degrees:
            v = _injective_failure(Q, x, d)
            if v is not None:
                labels = Q.piece(d).labels
                witness = {labels[k]: c for k, c in enumerate(v) if c}
                return RegularityCertificate(False, checked, (i, d, witness), note)
        checked[i] = degrees
        Q = Q.with_relations([{g: x} for g in range(len(Q.generators))])
    if not any(not Q.shape(d).is_zero() for d in W.degrees()):
        return RegularityCertificate(False, checked, ("quotient-vanishes", None, None), note)
    u = M.ring.invertible_index
    if u is not None:
        e = [0] * ring.ngens
        e[u] = 1
        uu = {tuple(e): 1}
        for d in W.degrees():
            if d + ring.degrees[u] > W.dmax:
                break
            v = _injective_failure(Q, uu, d)
            if v is not None:
                return RegularityCertificate(False, checked, ("invertible-torsion", d, v), note)
    return RegularityCertificate(True, checked, None, note)


def require_regular(M, S, W):
    cert = regularity_check(M, S, W)
    if not cert:
        raise NonRegular(f"sequence {S.names} is not regular: {cert.failure}", cert.failure)
    return cert


def monomial_count(n, s):
    return comb(n + s - 1, s)


def default_ring(p, names_degrees, coefficients=None, invertible=None):
    """Convenience: ``default_ring(3, [("v1", 4)])`` is Z_(3)[v1]."""
    coefficients = coefficients or PLocalIntegers(p)
    gens = [Generator(n, d, n == invertible) for n, d in names_degrees]
    return GradedRingPresentation(coefficients, tuple(gens))


def bp_ring(p, n, invertible_top=False, coefficients=None):
    """Z_(p)[v_1, ..., v_n] with |v_i| = 2(p^i - 1), optionally inverting v_n."""
    gens = [(f"v{i}", 2 * (p ** i - 1)) for i in range(1, n + 1)]
    return default_ring(p, gens, coefficients, f"v{n}" if invertible_top else None)
