"""Spectral sequence pages for the I-adic filtration.

Cells are indexed by (s, t) with d_r: E_r^{s,t} -> E_r^{s+r,t-1}.  Two
sources of pages:

* comodule mode: E_1 = gr_I(T) tensor M with d_1(x^a m) = sum_j x_j x^a Q_j m;
* filtered mode: the Koszul resolution P of N = sum_g T/(y_g) is reduced
  modulo I^N (N = s_max + 1), filtered by powers of I, and every page is
  computed directly from the filtered complex.

Truncation modulo I^N leaves E_r^s untouched whenever s + r <= N; all other
cells are masked.
"""
from dataclasses import dataclass, field

from .errors import NonRegular, NonSquareZero, WindowTooSmall
from .exactla import ModuleShape, Subquotient
from .exactla.linalg import (contains, identity_rows, preimage, solve_left, span_basis,
                             vecmat)
from .exterior import BocksteinComodule, ExteriorStructure
from .graded import (DegreewiseModule, GradedModule, IdealQuotient, Piece,
                     RegularSequenceData, Window, format_polynomial, regularity_check,
                     require_regular, sequence_monomials, truncated_coefficients)
from .koszul import ChainComplexDW, e_label


# -- pages -----------------------------------------------------------------------

@dataclass
class Block:
    """One summand of a cell: generators live in ``[offset, offset + size)``."""

    key: object
    offset: int
    size: int
    labels: list
    sq: object


@dataclass
class PageCell:
    shape: ModuleShape
    generators: list
    exponents: list
    labels: list
    size: int = 0
    blocks: list = field(default_factory=list)

    def coords(self, vector):
        """Coordinates of an ambient vector on ``generators``."""
        out = []
        for b in self.blocks:
            local = vector[b.offset:b.offset + b.size]
            out.extend(b.sq.coords(local))
        return out

    def element(self, terms):
        """Ambient vector from ``{(block key, label): coefficient}``."""
        v = [0] * self.size
        for (key, label), c in terms.items():
            for b in self.blocks:
                if b.key == key:
                    v[b.offset + b.labels.index(label)] += c
                    break
            else:
                raise KeyError(key)
        return v


class SpectralSequencePage:
    """Page E_r: cells, differentials d_r in generator coordinates, and a mask.

    ``halo`` cells sit just outside the reported region; they are kept only
    so that neighbouring differentials are known.
    """

    def __init__(self, r, p, coeffs, cells, differentials=None, mask=(), window=None,
                 halo=(), mode="", notes=None):
        self.r = r
        self.p = p
        self.coeffs = coeffs
        self.cells = dict(cells)
        self.differentials = dict(differentials or {})
        self.mask = set(mask)
        self.window = window
        self.halo = set(halo)
        self.mode = mode
        self.notes = list(notes or [])
        self.permanent = False

    def shape(self, s, t):
        c = self.cells.get((s, t))
        return c.shape if c else ModuleShape.zero(self.p)

    def nominal(self):
        """Cells in the reported region."""
        return {k: c for k, c in self.cells.items() if k not in self.halo}

    def nonzero(self):
        return {k: c for k, c in self.nominal().items() if not c.shape.is_zero()}

    def shapes(self):
        return {k: c.shape for k, c in self.nominal().items()}

    def is_masked(self, s, t):
        return (s, t) in self.mask

    def unmasked(self):
        return {k: c for k, c in self.nominal().items() if k not in self.mask}

    def target(self, s, t):
        return (s + self.r, t - 1)

    def differential(self, s, t):
        """d_r out of (s, t) as a matrix (rows: source generators)."""
        return self.differentials.get((s, t))

    def row_shapes(self, s):
        return {t: c.shape for (ss, t), c in self.nominal().items() if ss == s}


def _orders_den(exponents, coeffs):
    """Relation rows for a coordinate module with the given orders."""
    k = len(exponents)
    rows = []
    for i, e in enumerate(exponents):
        if e is not None and (coeffs.exponent is None or e < coeffs.exponent):
            rows.append([coeffs.p ** e if j == i else 0 for j in range(k)])
    return rows


def _check_square_zero(P, d):
    for (s, t), M in d.items():
        if (s, t) in P.mask:
            continue
        mid = (s + P.r, t - 1)
        end = (s + 2 * P.r, t - 2)
        if mid in P.mask or end in P.mask or mid not in d or end not in P.cells:
            continue
        N = d[mid]
        tgt = P.cells[end]
        den = _orders_den(tgt.exponents, P.coeffs)
        for i, row in enumerate(M):
            w = vecmat(row, N, len(tgt.generators), P.coeffs) if tgt.generators else []
            if any(w) and not contains(den, len(w), [w], P.coeffs):
                raise NonSquareZero(f"d_{P.r} o d_{P.r} is nonzero on generator {i} of {(s, t)}",
                                    (s, t, i, w))


def turn_page(P, differentials=None):
    """E_{r+1} = ker d_r / im d_r cellwise.

    A cell becomes masked when it, its source or its target is masked or
    missing (sources with s - r < 0 are genuinely zero).
    """
    d = P.differentials if differentials is None else differentials
    for (s, t), M in d.items():
        src = P.cells.get((s, t))
        tgt = P.cells.get((s + P.r, t - 1))
        if src is None or tgt is None or len(M) != len(src.generators) \
                or any(len(row) != len(tgt.generators) for row in M):
            raise ValueError(f"differential at {(s, t)} has the wrong shape")
    _check_square_zero(P, d)
    c = P.coeffs
    cells, mask = {}, set(P.mask)
    for (s, t), cell in P.cells.items():
        k = len(cell.generators)
        src_key = (s - P.r, t + 1)
        tgt_key = (s + P.r, t - 1)
        if src_key[0] >= 0 and (src_key not in P.cells or src_key in P.mask):
            mask.add((s, t))
        if tgt_key not in P.cells or tgt_key in P.mask:
            mask.add((s, t))
        if k == 0:
            cells[s, t] = PageCell(ModuleShape.zero(P.p), [], [], [], cell.size, [])
            continue
        den = _orders_den(cell.exponents, c)
        out = d.get((s, t))
        if out is not None and tgt_key in P.cells:
            tgt = P.cells[tgt_key]
            Z = preimage(identity_rows(k), out, _orders_den(tgt.exponents, c), k,
                         len(tgt.generators), c)
        else:
            Z = identity_rows(k)
        B = list(den)
        inc = d.get(src_key)
        if inc is not None:
            B += [list(row) for row in inc]
        sq = Subquotient(Z, B, k, c)
        gens = []
        for g in sq.generators:
            v = [0] * cell.size
            for coef, old in zip(g, cell.generators):
                if coef:
                    v = [c.reduce(a + coef * b) for a, b in zip(v, old)]
            gens.append(v)
        labels = [_leading(cell.labels, g) for g in sq.generators]
        cells[s, t] = PageCell(sq.shape, gens, list(sq.exponents), labels, cell.size,
                               [Block(("coords", s, t), 0, k, list(range(k)), sq)])
        cells[s, t].parent = cell
    page = SpectralSequencePage(P.r + 1, P.p, c, cells, {}, mask & set(cells), P.window,
                                P.halo, P.mode, P.notes)
    return page


def _leading(labels, coords):
    for lab, x in zip(labels, coords):
        if x:
            return lab
    return None


def page_coords(cell, vector):
    """Coordinates of an ambient vector on a cell, following turned pages back."""
    parent = getattr(cell, "parent", None)
    if parent is None:
        return cell.coords(vector)
    return cell.coords(page_coords(parent, vector))


# -- comodule mode ---------------------------------------------------------------

def _sequence_degrees(grT):
    ones = grT.monomials.get(1)
    if ones is None:
        raise ValueError("the associated graded must carry filtration 1")
    return [deg for _, deg in ones]


def e1_from_comodule(grT, M, W):
    """E_1 page gr_I(T) tensor M with the Bockstein d_1.

    A halo of one filtration and one degree on each side is computed so
    that E_2 obtained by turning this page is exact on the window.
    """
    xdeg = _sequence_degrees(grT)
    n = len(xdeg)
    if M.n != n:
        raise ValueError(f"comodule has {M.n} operators for a sequence of length {n}")
    if tuple(d + 1 for d in xdeg) != M.structure.degrees:
        raise ValueError("operator degrees must be |x_j| + 1")
    c = M.coeffs
    s_top = W.s_max + 1
    t_lo, t_hi = W.dmin - 1, W.dmax + 1

    def mdeg(alpha):
        return sum(a * x for a, x in zip(alpha, xdeg))

    cells, halo = {}, set()
    layout = {}
    for s in range(s_top + 1):
        for t in range(t_lo, t_hi + 1):
            blocks, off = [], 0
            gens_all, exps, labels = [], [], []
            parts = []
            for alpha in sequence_monomials(n, s):
                pc = M.piece(t - mdeg(alpha))
                parts.append((alpha, pc, off))
                off += pc.n
            for alpha, pc, o in parts:
                sq = pc.subquotient()
                blocks.append(Block(alpha, o, pc.n, list(pc.labels), sq))
                for g, e in zip(sq.generators, sq.exponents):
                    gens_all.append([0] * o + list(g) + [0] * (off - o - pc.n))
                    exps.append(e)
                    labels.append((alpha, _leading(pc.labels, g)))
            cells[s, t] = PageCell(_sum_shapes(c.p, [b.sq.shape for b in blocks]),
                                   gens_all, exps, labels, off, blocks)
            layout[s, t] = parts
            if s == s_top or t < W.dmin or t > W.dmax:
                halo.add((s, t))

    diffs = {}
    for (s, t), cell in cells.items():
        tgt = cells.get((s + 1, t - 1))
        if tgt is None:
            continue
        where = {alpha: o for alpha, _, o in layout[s + 1, t - 1]}
        D = [[0] * tgt.size for _ in range(cell.size)]
        for alpha, pc, off in layout[s, t]:
            m_deg = t - mdeg(alpha)
            for j in range(n):
                beta = tuple(a + (k == j) for k, a in enumerate(alpha))
                Q = M.operator(j, m_deg)
                toff = where[beta]
                for a in range(pc.n):
                    for b, v in enumerate(Q[a]):
                        if v:
                            D[off + a][toff + b] = c.reduce(D[off + a][toff + b] + v)
        diffs[s, t] = [tgt.coords(vecmat(g, D, tgt.size, c)) if tgt.size else []
                       for g in cell.generators]
    return SpectralSequencePage(1, c.p, c, cells, diffs, (), W, halo, "comodule",
                                ["E_1 = gr_I(T) tensor M, d_1 from the Bockstein operators"])


def _sum_shapes(p, shapes):
    out = ModuleShape.zero(p)
    for s in shapes:
        out = out + s
    return out


# -- filtered mode ---------------------------------------------------------------

def koszul_presentation(N, W=None):
    """Split N into cyclic summands T/(y_g) with regular y_g.

    Returns ``[(generator degree, [y_g...]), ...]``.
    """
    T = N.ring
    rels = {g: [] for g in range(len(N.generators))}
    for r in N.relations:
        support = [g for g, poly in r.items() if poly]
        if len(support) != 1:
            raise ValueError("filtered mode needs a direct sum of cyclic modules "
                             "(each relation on a single generator)")
        rels[support[0]].append(r[support[0]])
    out = []
    for g, (name, deg) in enumerate(N.generators):
        ys = rels[g]
        if ys and W is not None:
            cert = regularity_check(GradedModule.free(T), RegularSequenceData(T, ys), W)
            if not cert:
                raise NonRegular(f"relations of generator {name} are not a regular sequence; "
                                 "filtered mode needs a Koszul-resolvable input", cert.failure)
        out.append((deg, ys))
    return out


class _FilteredColumn:
    """The complex K(y) tensor T/I^N for one cyclic summand, with I-adic data."""

    def __init__(self, T, I, ys, Ntr, coeffs):
        self.Ntr = Ntr
        cap = Ntr if T.invertible_index is not None else None
        self.Q = IdealQuotient(I, 0, Ntr, coeffs=coeffs, cap=cap)
        self.F = {a: IdealQuotient(I, a, Ntr, coeffs=coeffs, cap=cap) for a in range(1, Ntr)}
        self.K = ChainComplexDW(ys, self.Q, ring=T)
        self.coeffs = coeffs
        self.m = len(ys)
        self._f = {}
        self._z = {}
        self._e = {}

    def filt(self, a, h, dd):
        """Generators of F^a in homological degree h, internal degree dd."""
        a = max(a, 0)
        if a >= self.Ntr:
            a = self.Ntr
        key = (a, h, dd)
        if key not in self._f:
            blocks, size, num, den = self.K.term(h, dd)
            if a == 0:
                rows = list(num)
            elif a == self.Ntr:
                rows = []
            else:
                rows = []
                for J, pc, o in blocks:
                    fp = self.F[a].piece(dd - self.K.xdeg(J))
                    rows.extend([0] * o + list(r) + [0] * (size - o - pc.n) for r in fp.num_rows())
            self._f[key] = rows + list(den)
        return self._f[key]

    def zgen(self, a, b, h, dd):
        """{y in F^a : Dy in F^b}."""
        a = max(a, 0)
        b = min(max(b, 0), self.Ntr)
        key = (a, b, h, dd)
        if key not in self._z:
            n = self.K.size(h, dd)
            Fa = self.filt(a, h, dd)
            if not n or not Fa:
                self._z[key] = []
            elif h == 0 or not self.K.size(h - 1, dd):
                self._z[key] = span_basis(Fa, n, self.coeffs)
            else:
                self._z[key] = preimage(Fa, self.K.differential(h, dd), self.filt(b, h - 1, dd),
                                        n, self.K.size(h - 1, dd), self.coeffs)
        return self._z[key]

    def boundary_of(self, rows, h, dd):
        """D applied to rows living in degree h + 1."""
        n = self.K.size(h, dd)
        if not rows or not n:
            return []
        D = self.K.differential(h + 1, dd)
        return [vecmat(v, D, n, self.coeffs) for v in rows]

    def page(self, r, s, h, dd):
        """E_r^s in (h, dd) as a Subquotient of the ambient."""
        key = (r, s, h, dd)
        if key not in self._e:
            n = self.K.size(h, dd)
            num = self.zgen(s, s + r, h, dd)
            den = list(self.zgen(s + 1, s + r, h, dd))
            if h + 1 <= self.m:
                den += self.boundary_of(self.zgen(s - r + 1, s, h + 1, dd), h, dd)
            den += self.K.term(h, dd)[3]
            self._e[key] = Subquotient(num, span_basis(den, n, self.coeffs) if den else [],
                                       n, self.coeffs)
        return self._e[key]

    def abutment(self, s, h, dd):
        """gr^s of H_h = (Z^s + B) / (Z^{s+1} + B)."""
        n = self.K.size(h, dd)
        B = list(self.K.term(h, dd)[3])
        if h + 1 <= self.m:
            B += self.boundary_of(self.K.term(h + 1, dd)[2], h, dd)
        num = self.zgen(s, self.Ntr, h, dd) + B
        den = self.zgen(s + 1, self.Ntr, h, dd) + B
        return Subquotient(span_basis(num, n, self.coeffs) if num else [],
                           span_basis(den, n, self.coeffs) if den else [], n, self.coeffs)

    def homology(self, h, dd):
        return self.K.homology(h, dd)

    def label(self, h, dd, v):
        J, mono = self.K.leading_label(h, dd, v)
        i = self.K.labels(h, dd).index((J, mono))
        coef = v[i]
        return f"{e_label(J)}⊗{format_polynomial({mono: coef}, self.K.ring)}"


@dataclass
class Abutment:
    """gr_I of H of the resolution reduced modulo I^N: the truncated completion."""

    p: int
    truncation: int
    gr: dict
    total: dict
    stable: dict
    label: str = "gr of truncated completion"

    def shape(self, s, t):
        return self.gr.get((s, t), ModuleShape.zero(self.p))


def _cell_from_blocks(p, parts):
    """Direct sum of (key, labels, sq, label function) parts."""
    blocks, gens, exps, labels = [], [], [], []
    off = 0
    sizes = [sq.n for _, _, sq, _ in parts]
    total = sum(sizes)
    for (key, labs, sq, labf), n in zip(parts, sizes):
        blocks.append(Block(key, off, n, labs, sq))
        for g, e in zip(sq.generators, sq.exponents):
            gens.append([0] * off + list(g) + [0] * (total - off - n))
            exps.append(e)
            labels.append(labf(g))
        off += n
    return PageCell(_sum_shapes(p, [sq.shape for _, _, sq, _ in parts]), gens, exps, labels,
                    total, blocks)


def filtered_ss(N, I, W, check_stability=True, verify_regular=True):
    """Pages E_1..E_{r_max} and the abutment for a Koszul-resolvable T-module N.

    Returns ``(pages, abutment)``.
    """
    T = N.ring
    if verify_regular:
        require_regular(GradedModule.free(T), I, W)
    summands = koszul_presentation(N, W)
    Ntr = W.s_max + 1
    coeffs = truncated_coefficients(I, Ntr, T.coefficients)
    p = T.p
    columns = [(deg, ys, _FilteredColumn(T, I, ys, Ntr, coeffs)) for deg, ys in summands]
    t_lo, t_hi = W.dmin - 1, W.dmax + 1

    def parts_for(kind, r, s, t):
        parts = []
        for g, (deg, ys, col) in enumerate(columns):
            for h in range(col.m + 1):
                dd = t - deg - h
                sq = col.page(r, s, h, dd) if kind == "page" else col.abutment(s, h, dd)
                labs = col.K.labels(h, dd)
                parts.append(((g, h), labs, sq,
                              lambda v, col=col, h=h, dd=dd: col.label(h, dd, v)))
        return parts

    pages = []
    for r in range(1, W.r_max + 1):
        cells, mask, halo = {}, set(), set()
        for s in range(W.s_max + 1):
            for t in range(t_lo, t_hi + 1):
                cells[s, t] = _cell_from_blocks(p, parts_for("page", r, s, t))
                if s + r > Ntr:
                    mask.add((s, t))
                if t < W.dmin or t > W.dmax:
                    halo.add((s, t))
        diffs = {}
        for (s, t), cell in cells.items():
            tgt = cells.get((s + r, t - 1))
            if tgt is None:
                continue
            rows = []
            for b in cell.blocks:
                g, h = b.key
                deg, ys, col = columns[g]
                dd = t - deg - h
                for gen in b.sq.generators:
                    row = []
                    for tb in tgt.blocks:
                        if tb.key == (g, h - 1) and h >= 1:
                            img = col.boundary_of([gen], h - 1, dd)[0]
                            row.extend(tb.sq.coords(img))
                        else:
                            row.extend([0] * len(tb.sq.generators))
                    rows.append(row)
            diffs[s, t] = rows
        pages.append(SpectralSequencePage(
            r, p, coeffs, cells, diffs, mask, W, halo, "presentation",
            [f"computed modulo I^{Ntr}; cells with s + r > {Ntr} are masked",
             "d_r for r >= 2 computed directly, linearity not assumed"]))

    for P in pages[1:]:
        P.linearity = _observe_linearity(P, columns, I)
        lin = P.linearity
        P.notes.append(f"d_{P.r} commutes with the x_j on {lin['checked']} unmasked classes, "
                       f"{len(lin['failures'])} exceptions")

    gr, total, stable = {}, {}, {}
    for t in W.degrees():
        tot = ModuleShape.zero(p)
        for g, (deg, ys, col) in enumerate(columns):
            for h in range(col.m + 1):
                dd = t - deg - h
                if col.K.size(h, dd):
                    tot = tot + col.homology(h, dd).shape
        total[t] = tot
        for s in range(W.s_max + 1):
            gr[s, t] = _cell_from_blocks(p, parts_for("abutment", None, s, t)).shape
    if check_stability:
        coeffs2 = truncated_coefficients(I, Ntr + 1, T.coefficients)
        bigger = [(deg, _FilteredColumn(T, I, ys, Ntr + 1, coeffs2)) for deg, ys in summands]
        for (s, t), shape in gr.items():
            other = ModuleShape.zero(p)
            for deg, col in bigger:
                for h in range(col.m + 1):
                    dd = t - deg - h
                    if col.K.size(h, dd):
                        other = other + col.abutment(s, h, dd).shape
            stable[s, t] = other == shape
    return pages, Abutment(p, Ntr, gr, total, stable)


def _block_vector(cell, key, local):
    v = [0] * cell.size
    for b in cell.blocks:
        if b.key == key:
            v[b.offset:b.offset + b.size] = local
            return v
    raise KeyError(key)


def _observe_linearity(P, columns, I):
    """Compare d_r(x_j z) with x_j d_r(z) using the stored matrices of page P.

    Classes whose source, product or target cells are masked or outside the
    computed region are skipped.
    """
    from .tower import _koszul_act
    c = P.coeffs
    checked, failures = 0, []
    for (s, t), cell in sorted(P.cells.items()):
        if (s, t) in P.mask or (s, t) in P.halo or cell.shape.is_zero():
            continue
        for b in cell.blocks:
            g, h = b.key
            if h < 1 or not b.sq.generators:
                continue
            deg, _, col = columns[g]
            dd = t - deg - h
            for j, x in enumerate(I.elements):
                e = I.degrees[j]
                up, tgt = (s + 1, t + e), (s + 1 + P.r, t + e - 1)
                if any(k not in P.cells or k in P.mask for k in (up, tgt)) \
                        or up not in P.differentials:
                    continue
                n_up = col.K.size(h, dd + e)
                n_low = col.K.size(h - 1, dd + e)
                if not n_up or not n_low:
                    continue
                X = _koszul_act(col.K, x, h, dd)
                X_low = _koszul_act(col.K, x, h - 1, dd)
                up_cell, tgt_cell = P.cells[up], P.cells[tgt]
                for z in b.sq.generators:
                    xz = vecmat(z, X, n_up, c)
                    coords = up_cell.coords(_block_vector(up_cell, (g, h), xz))
                    lhs = vecmat(coords, P.differentials[up], len(tgt_cell.generators), c) \
                        if coords else [0] * len(tgt_cell.generators)
                    dz = col.boundary_of([z], h - 1, dd)
                    x_dz = vecmat(dz[0], X_low, n_low, c) if dz else [0] * n_low
                    rhs = tgt_cell.coords(_block_vector(tgt_cell, (g, h - 1), x_dz))
                    diff = [c.reduce(a - b2) for a, b2 in zip(lhs, rhs)]
                    # a coordinate only matters modulo the order of its generator
                    if any(v % c.p ** k if k is not None else v
                           for v, k in zip(diff, tgt_cell.exponents)):
                        failures.append(((s, t), j))
                    checked += 1
    return {"checked": checked, "failures": failures}


# -- presentation -> comodule ----------------------------------------------------

class _CoordinateModule(DegreewiseModule):
    """Degree pieces given directly by their cyclic orders."""

    def __init__(self, coeffs, pieces):
        super().__init__()
        self.coeffs = coeffs
        self.ring = None
        self._given = pieces

    def _build_piece(self, d):
        labels, exps = self._given.get(d, ([], []))
        k = len(labels)
        den = []
        for i, e in enumerate(exps):
            if e is not None and (self.coeffs.exponent is None or e < self.coeffs.exponent):
                den.append([self.coeffs.p ** e if j == i else 0 for j in range(k)])
        return Piece(list(labels), None, den, self.coeffs)


def comodule_from_presentation(N, I, W, margin=None):
    """The Koszul-homology comodule H(P tensor T/I) of N with its Bockstein operators.

    Q_j is read off from the connecting map into H(P tensor I/I^2), written on
    the classes of the x_j.  Pieces are computed for total degrees in the
    window widened by ``margin`` (default: enough for s_max + 1 shifts).
    """
    T = N.ring
    summands = koszul_presentation(N, W)
    base = T.coefficients
    c2 = truncated_coefficients(I, 2, base)
    c1 = truncated_coefficients(I, 1, base)
    xdeg = I.degrees
    n = len(I)
    if margin is None:
        margin = (W.s_max + 2) * max(xdeg + [0]) + 2
    lo, hi = W.dmin - margin - 1, W.dmax + 1
    cols = [(deg, _FilteredColumn(T, I, ys, 2, c2)) for deg, ys in summands]

    def e1_zero(col, h, dd):
        return col.page(1, 0, h, dd)

    pieces = {}
    for t in range(lo, hi + 1):
        labels, exps = [], []
        for g, (deg, col) in enumerate(cols):
            for h in range(col.m + 1):
                dd = t - deg - h
                if not col.K.size(h, dd):
                    continue
                sq = e1_zero(col, h, dd)
                for i, (gen, e) in enumerate(zip(sq.generators, sq.exponents)):
                    labels.append((g, h, dd, i))
                    exps.append(e)
        pieces[t] = (labels, exps)
    module = _CoordinateModule(c1, pieces)
    structure = ExteriorStructure(xdeg)

    def op(j, t):
        src_labels = module.piece(t).labels
        dst_labels = module.piece(t - structure.degrees[j]).labels
        dst_index = {lab: i for i, lab in enumerate(dst_labels)}
        rows = []
        for (g, h, dd, i) in src_labels:
            row = [0] * len(dst_labels)
            deg, col = cols[g]
            if h >= 1:
                gen = e1_zero(col, h, dd).generators[i]
                image = col.boundary_of([gen], h - 1, dd)[0]
                coeffs_on = _bockstein_coords(col, I, h - 1, dd, image)
                for (jj, k), v in coeffs_on.items():
                    if jj == j:
                        row[dst_index[(g, h - 1, dd - xdeg[j], k)]] = c1.reduce(v)
            rows.append(row)
        return rows

    return BocksteinComodule(module, structure, op, "koszul homology of the presentation")


def _bockstein_coords(col, I, h, dd, image):
    """Write a class of F^1/F^2 as sum_j x_j * (E_1^0 generator k)."""
    n_amb = col.K.size(h, dd)
    combos, keys = [], []
    from .tower import _koszul_act
    for j, x in enumerate(I.elements):
        d0 = dd - I.degrees[j]
        if not col.K.size(h, d0):
            continue
        sq0 = col.page(1, 0, h, d0)
        X = _koszul_act(col.K, x, h, d0)
        for k, gen in enumerate(sq0.generators):
            combos.append(vecmat(gen, X, n_amb, col.coeffs))
            keys.append((j, k))
    den = list(col.zgen(2, 2, h, dd)) + list(col.K.term(h, dd)[3])
    if h + 1 <= col.m:
        den += col.boundary_of(col.zgen(1, 1, h + 1, dd), h, dd)
    sol = solve_left(combos + den, n_amb, image, col.coeffs)
    if sol is None:
        raise ArithmeticError("connecting map left the first filtration quotient")
    return {key: v for key, v in zip(keys, sol[:len(keys)]) if v}


# -- collapse and comparison -----------------------------------------------------

@dataclass
class ParityCertificate:
    collapsed: bool
    page: int
    odd_cell: object = None
    checked: int = 0

    def __bool__(self):
        return self.collapsed


def parity_collapse_check(P):
    """All nonzero cells in even total degree t forces every later d_r to vanish."""
    checked = 0
    for (s, t), cell in sorted(P.nominal().items()):
        if cell.shape.is_zero():
            continue
        checked += 1
        if t % 2:
            return ParityCertificate(False, P.r, (s, t), checked)
    P.permanent = True
    return ParityCertificate(True, P.r, None, checked)


@dataclass
class AbutmentReport:
    ok: bool
    matches: int
    discrepancies: list
    masked: int
    unstable: list


def abutment_compare(pages, A):
    """Compare the last page with gr of the abutment cell by cell."""
    P = pages[-1]
    matches, bad, masked, unstable = 0, [], 0, []
    for (s, t), cell in sorted(P.nominal().items()):
        if (s, t) in P.mask:
            masked += 1
            continue
        want = A.shape(s, t)
        if cell.shape == want:
            matches += 1
        else:
            bad.append(((s, t), str(cell.shape), str(want)))
        out = P.differentials.get((s, t))
        if out and any(any(x for x in row) for row in out):
            unstable.append((s, t))
    return AbutmentReport(not bad, matches, bad, masked, unstable)

