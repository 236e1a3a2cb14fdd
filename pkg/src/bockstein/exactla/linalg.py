"""Row-space linear algebra over local ground rings.

Vectors are lists; generators of a submodule are lists of row vectors and a
linear map R^m -> R^n is the m x n list of rows, acting as ``x -> x @ A``.
"""
from dataclasses import dataclass, field
from fractions import Fraction

from ..errors import MembershipError
from .kernels import smith
from .matrix import ExactMatrix


@dataclass(frozen=True)
class ModuleShape:
    """Isomorphism type ``Z_(p)^free_rank + sum Z/p^e`` for e in ``torsion``."""

    p: int
    free_rank: int = 0
    torsion: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "torsion", tuple(sorted(self.torsion)))
        if any(e < 1 for e in self.torsion):
            raise ValueError("torsion exponents must be positive")

    @classmethod
    def zero(cls, p):
        return cls(p)

    @classmethod
    def elementary(cls, p, dim):
        """The F_p-vector space of dimension ``dim``."""
        return cls(p, 0, (1,) * dim)

    def __add__(self, other):
        if self.p != other.p:
            raise ValueError("different primes")
        return ModuleShape(self.p, self.free_rank + other.free_rank,
                           self.torsion + other.torsion)

    def is_zero(self):
        return self.free_rank == 0 and not self.torsion

    @property
    def rank(self):
        """Number of cyclic summands (dimension when elementary)."""
        return self.free_rank + len(self.torsion)

    def is_elementary(self):
        return self.free_rank == 0 and all(e == 1 for e in self.torsion)

    def torsion_orders(self):
        return [self.p ** e for e in self.torsion]

    def torsion_strings(self):
        return [f"{self.p}^{e}" for e in self.torsion]

    def __str__(self):
        parts = []
        if self.free_rank:
            parts.append(f"Z_({self.p})^{self.free_rank}" if self.free_rank > 1
                         else f"Z_({self.p})")
        counts = {}
        for e in self.torsion:
            counts[e] = counts.get(e, 0) + 1
        for e, c in sorted(counts.items()):
            base = f"Z/{self.p}" if e == 1 else f"Z/{self.p}^{e}"
            parts.append(base if c == 1 else f"({base})^{c}")
        return " + ".join(parts) if parts else "0"


def reduce_vec(v, coeffs):
    return [coeffs.reduce(x) for x in v]


def vecmat(v, rows, ncols, coeffs):
    out = [0] * ncols
    for i, a in enumerate(v):
        if a:
            row = rows[i]
            for j, b in enumerate(row):
                if b:
                    out[j] += a * b
    return [coeffs.reduce(x) for x in out]


def matmul(A, B, ncols, coeffs):
    return [vecmat(row, B, ncols, coeffs) for row in A]


def is_zero_vec(v):
    return not any(v)


class Smith:
    """Smith decomposition ``U A V = D`` of a list of rows."""

    def __init__(self, rows, ncols, coeffs):
        self.coeffs = coeffs
        self.nrows = len(rows)
        self.ncols = ncols
        rows = [reduce_vec(r, coeffs) for r in rows]
        if self.nrows == 0 or ncols == 0:
            self.exps = []
            self.U = [[int(i == j) for j in range(self.nrows)] for i in range(self.nrows)]
            self.V = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
            self.Vinv = [row[:] for row in self.V]
        else:
            self.exps, self.U, self.V, self.Vinv = smith(rows, ncols, coeffs)
        self.rank = len(self.exps)

    def kernel(self):
        """Generators of the left kernel {x : x A = 0}."""
        c = self.coeffs
        out = []
        K = c.exponent
        for i, e in enumerate(self.exps):
            if K is not None and e > 0:
                f = c.p ** (K - e)
                out.append([c.reduce(f * x) for x in self.U[i]])
        for i in range(self.rank, self.nrows):
            out.append(list(self.U[i]))
        return out

    def image(self):
        """A minimal generating set of the row space."""
        c = self.coeffs
        return [[c.reduce((c.p ** e) * x) for x in self.Vinv[i]]
                for i, e in enumerate(self.exps)]

    def solve(self, z):
        """Some x with x A = z, or None."""
        c = self.coeffs
        w = vecmat(z, self.V, self.ncols, c) if self.ncols else []
        for j in range(self.rank, self.ncols):
            if w[j]:
                return None
        y = [0] * self.nrows
        for i, e in enumerate(self.exps):
            wi = w[i]
            if not wi:
                continue
            if c.valuation(wi) < e:
                return None
            if c.kind == "plocal":
                y[i] = c.reduce(Fraction(wi) / c.p ** e)
            else:
                y[i] = wi // c.p ** e
        return vecmat(y, self.U, self.nrows, c)


def left_kernel(rows, ncols, coeffs):
    return Smith(rows, ncols, coeffs).kernel()


def span_basis(rows, ncols, coeffs):
    return Smith(rows, ncols, coeffs).image()


def solve_left(rows, ncols, z, coeffs):
    return Smith(rows, ncols, coeffs).solve(z)


def contains(rows, ncols, vectors, coeffs):
    """True when every vector lies in the span of ``rows``."""
    vectors = [v for v in vectors if not is_zero_vec(reduce_vec(v, coeffs))]
    if not vectors:
        return True
    sm = Smith(rows, ncols, coeffs)
    return all(sm.solve(v) is not None for v in vectors)


def same_span(A, B, ncols, coeffs):
    return contains(A, ncols, B, coeffs) and contains(B, ncols, A, coeffs)


def preimage(G, D, H, n_source, n_target, coeffs):
    """Generators of {x in span(G) : x D in span(H)}."""
    if not G:
        return []
    GD = [vecmat(g, D, n_target, coeffs) for g in G] if n_target else [[] for _ in G]
    K = left_kernel(GD + list(H), n_target, coeffs)
    m = len(G)
    pulled = [vecmat(k[:m], G, n_source, coeffs) for k in K]
    return span_basis(pulled, n_source, coeffs)


def identity_rows(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


class Subquotient:
    """The module span(num)/span(den) inside R^n, with chosen generators.

    ``num=None`` means the whole ambient module.  ``generators`` are ambient
    representatives of cyclic summands whose orders are ``exponents`` (None
    for a free Z_(p) summand).
    """

    def __init__(self, num, den, n, coeffs, check=True):
        self.coeffs = coeffs
        self.n = n
        num = identity_rows(n) if num is None else [reduce_vec(r, coeffs) for r in num]
        den = [reduce_vec(r, coeffs) for r in den]
        num = [r for r in num if not is_zero_vec(r)]
        den = [r for r in den if not is_zero_vec(r)]
        if check and den:
            sm_a = Smith(num, n, coeffs)
            for row in den:
                if sm_a.solve(row) is None:
                    raise MembershipError("denominator generator outside the numerator span")
        self.num = num
        self.den = den
        m = len(num)
        self._stack = Smith(num + den, n, coeffs)
        rel = [k[:m] for k in self._stack.kernel()]
        self._rel = Smith(rel, m, coeffs)
        K = coeffs.exponent
        self.generators = []
        self.exponents = []
        self._keep = []
        for i in range(m):
            if i < self._rel.rank:
                e = self._rel.exps[i]
                if e == 0:
                    continue
            else:
                e = K
            self._keep.append(i)
            self.exponents.append(e)
            self.generators.append(vecmat(self._rel.Vinv[i], num, n, coeffs))
        free = sum(1 for e in self.exponents if e is None)
        self.shape = ModuleShape(coeffs.p, free, [e for e in self.exponents if e is not None])

    def __len__(self):
        return len(self.generators)

    def contains(self, z):
        return self._stack.solve(reduce_vec(z, self.coeffs)) is not None

    def coords(self, z):
        """Coordinates of the class of ambient vector z on ``generators``."""
        c = self.coeffs
        x = self._stack.solve(reduce_vec(z, c))
        if x is None:
            raise MembershipError("vector is not in the numerator span")
        m = len(self.num)
        t = vecmat(x[:m], self._rel.V, m, c) if m else []
        out = []
        for i, e in zip(self._keep, self.exponents):
            out.append(_reduce_mod(t[i], e, c))
        return out

    def is_zero_class(self, z):
        return not any(self.coords(z))


def _reduce_mod(x, e, coeffs):
    if e is None:
        return x
    return coeffs.as_prime_power(e).reduce(x) if e > 0 else 0


def subquotient(A, B, coeffs, n=None):
    """Shape data for span(A)/span(B); raises MembershipError unless B lies in span(A)."""
    if n is None:
        rows = list(A) + list(B)
        if not rows:
            raise ValueError("ambient dimension needed for empty generator lists")
        n = len(rows[0])
    return Subquotient(list(A), list(B), n, coeffs)


def smith_normal_form(M):
    """Return ``(D, U, V)`` as ExactMatrix with ``U M V = D``."""
    c = M.coeffs
    sm = Smith(M.rows(), M.ncols, c)
    D = ExactMatrix(M.nrows, M.ncols, c, {(i, i): c.p ** e for i, e in enumerate(sm.exps)})
    U = ExactMatrix.from_rows(sm.U, c, M.nrows)
    V = ExactMatrix.from_rows(sm.V, c, M.ncols)
    return D, U, V


def kernel_image(M):
    """Kernel and image of the column action v -> M v.

    Returns two matrices whose rows generate ker(M) in R^ncols and
    im(M) in R^nrows; over F_p they are bases, otherwise minimal generating
    sets read off the Smith form.
    """
    c = M.coeffs
    sm = Smith(M.transpose().rows(), M.nrows, c)
    ker = sm.kernel()
    im = sm.image()
    return (ExactMatrix.from_rows(ker, c, M.ncols) if ker else ExactMatrix.zeros(0, M.ncols, c),
            ExactMatrix.from_rows(im, c, M.nrows) if im else ExactMatrix.zeros(0, M.nrows, c))
