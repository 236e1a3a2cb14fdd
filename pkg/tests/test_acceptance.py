"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

All comparisons are exact (zero tolerance): shapes, ranks and matrix entries
are integers, and runtimes are checked against the stated bounds.
"""
import random
import time

import pytest

from bockstein.cli import parse_spec, preset_text, run
from bockstein.exactla import ModuleShape, PrimeField, PrimePowerRing
from bockstein.exactla.linalg import Smith
from bockstein.exactla import subquotient
from bockstein.exterior import coext, subsets
from bockstein.graded import (GradedModule, IdealQuotient, RegularSequenceData, Window,
                              associated_graded, bp_ring, default_ring, graded_quotient_shapes,
                              parse_polynomial, regularity_check)
from bockstein.hbss import (comodule_from_presentation, e1_from_comodule, filtered_ss,
                            turn_page)
from bockstein.koszul import ext_groups, koszul_homology, relative_injective_resolution
from bockstein.tower import build_towers, tower_homology

from oracles import cokernel_invariants, rank_mod_p, subquotient_invariants
from randoms import conjugated_exterior

INSTANCES = 200


@pytest.fixture
def verdict(capsys):
    def announce(number, ok, detail, seconds, limit):
        ok = ok and seconds < limit
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail} "
                  f"[tolerance: exact; {seconds:.2f} s of {limit} s]")
        assert ok, detail
    return announce


def _rank_or_zero(M, p):
    return rank_mod_p(M, p) if M and M[0] else 0


def test_criterion_1_moore_p(verdict):
    t0 = time.perf_counter()
    spec = parse_spec(preset_text("moore-p"))
    rep = run(spec)
    E2 = rep.page(2)
    # gr_I(T)/p = F_3[v1 bar]: one class in each cell (s, 4s)
    expected = {(s, t): ModuleShape.elementary(3, 1) if t == 4 * s else ModuleShape.zero(3)
                for (s, t) in E2.nominal()}
    unmasked = [k for k in E2.nominal() if k not in E2.mask]
    wrong = [k for k in unmasked if E2.shape(*k) != expected[k]]
    parity = rep.certificates["parity_collapse"]
    ok = (not wrong and len(unmasked) == len(expected) and rep.certificates["e2_quotient"]["ok"]
          and parity["ok"] and parity["page"] == 2)
    verdict(1, ok, f"Moore mod 3: E_2 equals gr/p on {len(unmasked)} cells, "
            f"{len(wrong)} mismatches, parity collapse at E_{parity['page']}",
            time.perf_counter() - t0, 5)


def test_criterion_2_moore_p_squared(verdict):
    t0 = time.perf_counter()
    spec = parse_spec(preset_text("moore-p2"))
    rep = run(spec)
    ring = spec.ring()
    E1, E2, E3 = rep.page(1), rep.page(2), rep.page(3)
    d1_nonzero = [k for k, M in E1.differentials.items() if any(any(r) for r in M)]
    identities, failures = 0, []
    for (s, t), cell in E2.nominal().items():
        if (s, t) in E2.mask or cell.shape.is_zero():
            continue
        tgt_key = E2.target(s, t)
        # targets past the top filtration are not computed (coefficients are cut at I^6)
        if tgt_key not in E2.cells or tgt_key in E2.mask:
            continue
        for i, lab in enumerate(cell.labels):
            if not lab.startswith("e0⊗"):
                continue
            source = parse_polynomial(lab.split("⊗")[1], ring)
            row = E2.differentials[s, t][i]
            hits = [(c, E2.cells[tgt_key].labels[j]) for j, c in enumerate(row) if c]
            want = {m: 9 * c for m, c in source.items()}
            if len(hits) != 1 or hits[0][0] != 1 or not hits[0][1].startswith("1⊗") \
                    or parse_polynomial(hits[0][1].split("⊗")[1], ring) != want:
                failures.append(((s, t), lab, hits))
            identities += 1
    # gr_I(T)/p^2 = F_3[p bar, v1 bar]/(p bar^2)
    wrong = []
    for (s, t) in E3.nominal():
        if (s, t) in E3.mask:
            continue
        rank = int(t == 4 * s) + int(s >= 1 and t == 4 * (s - 1))
        if E3.shape(s, t) != ModuleShape.elementary(3, rank) if rank else not E3.shape(s, t).is_zero():
            wrong.append((s, t))
    ok = (not d1_nonzero and not failures and identities > 0 and not wrong
          and rep.certificates["abutment"]["ok"] and rep.certificates["initial_form_quotient"]["ok"])
    verdict(2, ok, f"Moore mod 9: d_1 = 0, d_2(e0⊗m) = 1⊗9m on {identities} unmasked classes, "
            f"E_3 equals gr/p^2 with {len(wrong)} mismatches", time.perf_counter() - t0, 30)


def _koszul_over_gr(t, s, p, xdeg, period):
    """Basis (J, alpha, k) of gr tensor Lambda(a_j) in cell (s, t): L_d = F_p iff period | d."""
    adeg = [x + 1 for x in xdeg]
    out = []
    for J in subsets(len(xdeg)):
        rest = t - sum(adeg[j] for j in J)
        for a0 in range(s + 1):
            alpha = (a0, s - a0)
            u = rest - sum(a * x for a, x in zip(alpha, xdeg))
            if u % period == 0:
                out.append((J, alpha, u // period))
    return out


def _koszul_d1(src, dst, p):
    where = {b: i for i, b in enumerate(dst)}
    rows = []
    for J, alpha, k in src:
        row = [0] * len(dst)
        for pos, j in enumerate(J):
            beta = tuple(a + (i == j) for i, a in enumerate(alpha))
            key = (J[:pos] + J[pos + 1:], beta, k)
            row[where[key]] = (-1) ** pos % p
        rows.append(row)
    return rows


def test_criterion_3_smith_toda(verdict):
    t0 = time.perf_counter()
    base = parse_spec(preset_text("smith-toda-v"))
    checked, wrong = 0, []
    for spec in (base, base.replace(degrees=(-50, 50), s_max=3)):
        rep = run(spec)
        E1, E2 = rep.page(1), rep.page(2)
        xdeg = [0, 8]
        for (s, t) in E1.nominal():
            basis = _koszul_over_gr(t, s, 5, xdeg, 48)
            out = _koszul_d1(basis, _koszul_over_gr(t - 1, s + 1, 5, xdeg, 48), 5)
            inc = _koszul_d1(_koszul_over_gr(t + 1, s - 1, 5, xdeg, 48), basis, 5) if s else []
            e2_rank = len(basis) - _rank_or_zero(out, 5) - _rank_or_zero(inc, 5)
            lib_out = E1.differentials.get((s, t))
            if E1.shape(s, t).rank != len(basis) \
                    or _rank_or_zero(lib_out, 5) != _rank_or_zero(out, 5):
                wrong.append(("E1", s, t))
            if (s, t) not in E2.mask:
                quotient = int(s == 0 and t % 48 == 0)
                if E2.shape(s, t).rank != e2_rank or e2_rank != quotient:
                    wrong.append(("E2", s, t))
            checked += 1
        if not rep.certificates["e2_quotient"]["ok"]:
            wrong.append(("certificate", spec.degrees))
    verdict(3, not wrong and checked > 0,
            f"Lambda(a0, a1) at p = 5: (E_1, d_1) matches the Koszul complex of (x0, x1) on gr "
            f"and E_2 = gr/(x0, x1) on {checked} cells, {len(wrong)} mismatches",
            time.perf_counter() - t0, 10)


def test_criterion_4_tor_ext(verdict):
    t0 = time.perf_counter()
    T = bp_ring(3, 1)
    S = RegularSequenceData.parse(T, ["p", "v1"])
    L = IdealQuotient(S, 0, 1, coeffs=PrimeField(3))
    W = Window(-8, 16)
    tor = koszul_homology(S, L, W)
    ext = ext_groups(S, L, W)
    ok = (tor.tor_ranks() == [1, 2, 1]
          and tor.bidegrees("tor", 1) == {"e0": (1, 0), "e1": (1, 4)}
          and ext.ext_ranks() == [1, 2, 1]
          and ext.bidegrees("ext", 1) == {"f0": (1, 0), "f1": (1, -4)})
    verdict(4, ok, f"Tor ranks {tor.tor_ranks()}, e_j at {tor.bidegrees('tor', 1)}, "
            f"f_j at {dict(sorted(ext.bidegrees('ext', 1).items()))}", time.perf_counter() - t0, 2)


def test_criterion_5_tower_homology(verdict):
    t0 = time.perf_counter()
    cases = [(default_ring(3, []), ["p"], Window(0, 0, 4)),
             (bp_ring(3, 1), ["p", "v1"], Window(-2, 16, 4)),
             (bp_ring(2, 1), ["p", "v1"], Window(-2, 10, 4))]
    counts = {"i_* zero": 0, "SES": 0, "cofree": 0}
    failures = []
    for T, names, W in cases:
        S = RegularSequenceData.parse(T, names)
        over, under = build_towers(T, S, W)
        rep = tower_homology(over, S, W, stages=4)
        counts["i_* zero"] += sum(rep.i_zero.values())
        counts["SES"] += sum(r.ok for r in rep.ses.values())
        counts["cofree"] += sum(rep.cofree.values())
        failures += rep.failures
        failures += [k for k, r in list(over.ses.items()) + list(under.ses.items()) if not r.ok]
    verdict(5, not failures, f"n <= 2, s <= 4: {counts}, {len(failures)} failures",
            time.perf_counter() - t0, 30)


def test_criterion_6_resolution(verdict):
    t0 = time.perf_counter()
    T = bp_ring(2, 2)
    S = RegularSequenceData.parse(T, ["p", "v1", "v2"])
    W = Window(-2, 16, 4)
    R = relative_injective_resolution(T, S, length=4, W=W)
    entrywise = []
    for (s, d), D in R.differentials.items():
        nxt = R.differentials.get((s + 1, d))
        if nxt is None or not D or not nxt or not nxt[0]:
            continue
        for row in D:
            w = [sum(a * nxt[i][j] for i, a in enumerate(row)) % 2 for j in range(len(nxt[0]))]
            if any(w):
                entrywise.append((s, d))
                break
    stages = sorted({s for s, _ in R.exact})
    ok = R.is_exact() and not entrywise and stages == [0, 1, 2, 3, 4]
    verdict(6, ok, f"n = 3, p = 2: exact at {sum(R.exact.values())} of {len(R.exact)} "
            f"(stage, degree) pairs through stage 4, delta^2 = 0 entrywise "
            f"({len(entrywise)} violations)", time.perf_counter() - t0, 30)


# -- criterion 7: randomized property suites -----------------------------------------

def _random_element(rng, p, degree):
    """Homogeneous element of Z_(p)[a, b] with a, b in degree 2."""
    k = degree // 2
    poly = {}
    for i in range(k + 1):
        c = rng.choice([0, 0, 1, 2, p, p * p, 1 + p])
        if c:
            poly[i, k - i] = c
    return poly or {(k, 0): rng.choice([1, p])}


def _regularity_vs_acyclicity(rng):
    p = rng.choice([2, 3, 5])
    T = default_ring(p, [("a", 2), ("b", 2)])
    S = RegularSequenceData(T, [_random_element(rng, p, rng.choice([0, 2, 2, 4]))
                                for _ in range(rng.randint(1, 3))])
    W = Window(0, 10)
    regular = bool(regularity_check(GradedModule.free(T), S, W))
    ranks = koszul_homology(S, GradedModule.free(T), W).tor_ranks()
    acyclic = ranks[0] > 0 and not any(ranks[1:])
    return regular == acyclic, regular


def _random_presentation(rng):
    p = rng.choice([2, 3, 5])
    T = bp_ring(p, 1)
    S = RegularSequenceData.parse(T, ["p", "v1"])
    vd = 2 * (p - 1)
    choices = [f"p^{rng.randint(1, 3)}", f"v1^{rng.randint(1, 2)}",
               f"p^{rng.randint(1, 2)}, v1^{rng.randint(1, 2)}", "p*v1", "p^2*v1"]
    gens, rels = [], []
    for g in range(rng.randint(1, 2)):
        gens.append((f"g{g}", rng.choice([0, vd])))
        for e in rng.choice(choices).split(","):
            rels.append({g: parse_polynomial(e, T)})
    return p, T, S, GradedModule(T, gens, rels), vd


def _mode_equivalence(rng):
    p, T, S, N, vd = _random_presentation(rng)
    W = Window(-2, rng.randint(2, 4) * vd, rng.randint(2, 4), 2)
    pages, _ = filtered_ss(N, S, W, check_stability=False)
    gr = associated_graded(T, S, W)
    E1 = e1_from_comodule(gr, comodule_from_presentation(N, S, W), W)
    E2 = turn_page(E1)
    for mine, theirs in ((pages[0], E1), (pages[1], E2)):
        for k in mine.nominal():
            if k not in mine.mask and k not in theirs.mask and mine.shape(*k) != theirs.shape(*k):
                return False, None
    return True, None


def _e2_is_coext(rng):
    p = rng.choice([2, 3, 5])
    T = bp_ring(p, 1)
    S = RegularSequenceData.parse(T, ["p", "v1"])
    vd = 2 * (p - 1)
    W = Window(-2, rng.randint(2, 4) * vd, rng.randint(2, 3))
    active = [j for j in range(2) if rng.random() < 0.7]
    M = conjugated_exterior(p, tuple(S.degrees), rng, mult=rng.randint(1, 3), active=active)
    E2 = turn_page(e1_from_comodule(associated_graded(T, S, W), M, W))
    cx = coext(M, W)
    return all(E2.shape(*k) == cx.shape(*k) for k in E2.nominal()), None


def _masked_soundness(rng):
    p, T, S, N, vd = _random_presentation(rng)
    small = Window(-2, 2 * vd, 2, 3)
    big = Window(-2 - rng.randint(0, 2) * vd, rng.randint(3, 4) * vd, rng.randint(3, 4), 3)
    a, _ = filtered_ss(N, S, small, check_stability=False)
    b, _ = filtered_ss(N, S, big, check_stability=False)
    for P, Q in zip(a, b):
        for k in P.nominal():
            if k not in P.mask and P.shape(*k) != Q.shape(*k):
                return False, None
    return True, None


def _smith_vs_brute_force(rng):
    p = rng.choice([2, 3, 5])
    K = rng.randint(1, 4)
    q = p ** K
    c = PrimePowerRing(p, K)
    rows, cols = rng.randint(1, 5), rng.randint(1, 5)
    A = [[rng.randrange(q) for _ in range(cols)] for _ in range(rows)]
    sm = Smith(A, cols, c)
    got = sorted([e for e in sm.exps if e > 0] + [K] * (cols - sm.rank))
    if got != cokernel_invariants(A, cols, p, K=K)[1]:
        return False, None
    # subquotient span(A)/span(B) with B inside span(A); ambient small enough to count
    n = max(m for m in range(1, 6) if q ** m <= 5000)
    gens = [[rng.randrange(q) for _ in range(n)] for _ in range(rng.randint(1, 5))]
    sub = []
    for _ in range(rng.randint(0, 3)):
        f = [rng.randrange(q) for _ in gens]
        sub.append([sum(x * g for x, g in zip(f, col)) % q for col in zip(*gens)])
    shape = subquotient(gens, sub, c, n).shape
    return list(shape.torsion) == subquotient_invariants(gens, sub, p, K, n), None


SUITES = [
    ("regularity <=> Koszul acyclicity (n <= 3)", _regularity_vs_acyclicity, 11),
    ("comodule vs filtered E_1/E_2", _mode_equivalence, 12),
    ("E_2 = coext", _e2_is_coext, 13),
    ("masked-cell soundness under enlargement", _masked_soundness, 14),
    ("SNF and subquotients vs brute force (<= 5x5, Z/p^k, k <= 4)", _smith_vs_brute_force, 15),
]


def test_criterion_7_property_suites(verdict):
    t0 = time.perf_counter()
    lines, total_bad = [], 0
    for name, check, seed in SUITES:
        rng = random.Random(seed)
        bad, flags = 0, []
        for _ in range(INSTANCES):
            ok, flag = check(rng)
            bad += not ok
            flags.append(flag)
        extra = ""
        if flags[0] is not None:
            extra = f", {sum(flags)} regular / {len(flags) - sum(flags)} not"
        lines.append(f"{name}: {INSTANCES} instances, {bad} discrepancies{extra}")
        total_bad += bad
    verdict(7, total_bad == 0, "; ".join(lines), time.perf_counter() - t0, 300)
