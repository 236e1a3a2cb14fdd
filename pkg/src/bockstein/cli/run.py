"""Orchestration: regularity, towers, the chosen spectral sequence, comparisons."""
import time
from dataclasses import dataclass, field

from ..errors import BocksteinError, NonRegular
from ..exactla.linalg import contains
from ..exterior import coext, exterior_comodule, matrix_comodule, validate_comodule
from ..graded import (GradedModule, IdealQuotient, associated_graded, graded_quotient_shapes,
                      regularity_check, truncated_coefficients)
from ..hbss import (abutment_compare, e1_from_comodule, filtered_ss, parity_collapse_check,
                    turn_page)
from ..tower import build_towers
from .spec import linear_form


class PhaseError(BocksteinError):
    """An engine error, tagged with the phase that raised it."""

    def __init__(self, phase, cause):
        self.phase = phase
        self.cause = cause
        super().__init__(f"[{phase}] {type(cause).__name__}: {cause}")


class InvalidComodule(BocksteinError):
    def __init__(self, message, violations):
        super().__init__(message)
        self.violations = violations


@dataclass
class RunReport:
    spec: object
    mode: str
    pages: list
    abutment: object = None
    certificates: dict = field(default_factory=dict)
    mask_stats: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def page(self, r):
        for P in self.pages:
            if P.r == r:
                return P
        raise KeyError(r)


class _Phases:
    def __init__(self):
        self.timings = {}

    def __call__(self, name, fn, *args, **kw):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kw)
        except BocksteinError as exc:
            if isinstance(exc, PhaseError):
                raise
            raise PhaseError(name, exc) from exc
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - t0


def build_comodule(spec, ring, S):
    """The input comodule over L = T/I described by the [input] section."""
    coeffs = truncated_coefficients(S, 1, ring.coefficients)
    if spec.comodule == "exterior":
        F = IdealQuotient(S, 0, 1, coeffs=coeffs)
        present = [int(a[1:]) for a in spec.exterior]
        active = [int(q[1:]) for q in spec.derivations]
        return exterior_comodule(F, S.degrees, active=active, present=present,
                                 name="exterior " + ", ".join(spec.exterior))
    dims, labels = {}, {}
    degree_of = {}
    for lab, d in spec.basis:
        dims[d] = dims.get(d, 0) + 1
        labels.setdefault(d, []).append(lab)
        degree_of[lab] = d
    shift = [x + 1 for x in S.degrees]
    operators = {}
    for j, src, expr in spec.operators:
        d = degree_of[src]
        tgt_labels = labels.get(d - shift[j], [])
        form = linear_form(expr, set(degree_of))
        for lab in form:
            if lab not in tgt_labels:
                raise InvalidComodule(f"Q{j}({src}) must land in degree {d - shift[j]}; "
                                      f"{lab} has degree {degree_of[lab]}", [])
        rows = operators.setdefault((j, d), [[0] * len(tgt_labels) for _ in labels[d]])
        rows[labels[d].index(src)] = [form.get(lab, 0) for lab in tgt_labels]
    return matrix_comodule(coeffs, S.degrees, dims, operators, labels, name="explicit")


def adic_order(y, S, limit):
    """Largest f <= limit with y in I^f."""
    ring = S.ring
    d = ring.degree(y)
    cap = limit + 1 if ring.invertible_index is not None else None
    f = 0
    while f < limit:
        Q = IdealQuotient(S, 0, f + 1, coeffs=truncated_coefficients(S, f + 1, ring.coefficients),
                          cap=cap)
        pc = Q.piece(d)
        idx = pc.index()
        row = [0] * pc.n
        for mono, c in y.items():
            if mono in idx:
                row[idx[mono]] = Q.coeffs.reduce(c)
        if not contains(pc.den, pc.n, [row], Q.coeffs):
            break
        f += 1
    return f


def _shape_dict(shapes):
    return {f"{s},{t}": str(sh) for (s, t), sh in sorted(shapes.items()) if not sh.is_zero()}


def _compare(page, oracle, cells=None):
    keys = cells if cells is not None else [k for k in page.nominal() if k not in page.mask]
    bad = [(k, str(page.shape(*k)), str(oracle.shape(*k))) for k in sorted(keys)
           if page.shape(*k) != oracle.shape(*k)]
    return {"ok": not bad, "checked": len(keys), "discrepancies": bad}


def _mask_stats(P):
    nominal = P.nominal()
    masked = [k for k in nominal if k in P.mask]
    return {"r": P.r, "cells": len(nominal), "masked": len(masked),
            "masked_nonzero": sum(1 for k in masked if not nominal[k].shape.is_zero())}


def run(spec, mode=None):
    """Run the pipeline described by ``spec``; the same description always gives the same report."""
    mode = mode or spec.mode
    phase = _Phases()
    ring = spec.ring()
    S = spec.sequence(ring)
    W = spec.window()
    certs, notes = {}, []

    reg = phase("regularity", regularity_check, GradedModule.free(ring), S, W)
    certs["regularity"] = {"ok": bool(reg), "sequence": list(S.names),
                           "checked_degrees": {str(i): len(v) for i, v in reg.checked_degrees.items()},
                           "failure": None if reg else repr(reg.failure), "note": reg.note}
    if not reg:
        raise PhaseError("regularity", NonRegular(
            f"sequence ({', '.join(S.names)}) is not regular: {reg.failure}", reg.failure))

    over, under = phase("towers", build_towers, ring, S, W)
    bad_under = [f"{k}: {r.failures}" for k, r in sorted(under.ses.items()) if not r.ok]
    bad_over = [f"{k}: {r.failures}" for k, r in sorted(over.ses.items()) if not r.ok]
    certs["towers"] = {"ok": not bad_under and not bad_over,
                       "under_sequences": len(under.ses), "over_sequences": len(over.ses),
                       "over_available": over.available, "over_note": over.reason,
                       "failures": bad_under + bad_over,
                       "limits": {str(d): lab for d, lab in sorted(under.limits.items())}}

    abutment = None
    if mode == "comodule":
        M = phase("spectral sequence", build_comodule, spec, ring, S)
        valid = phase("spectral sequence", validate_comodule, M, W)
        certs["comodule"] = {"ok": bool(valid), "degrees": len(valid.degrees),
                             "violations": [repr(v) for v in valid.violations]}
        if not valid:
            raise PhaseError("spectral sequence", InvalidComodule(
                f"{M.name} is not a comodule: {valid.violations[0]}", valid.violations))
        gr = phase("spectral sequence", associated_graded, ring, S, W)
        E1 = phase("spectral sequence", e1_from_comodule, gr, M, W)
        E2 = phase("spectral sequence", turn_page, E1)
        pages = [E1, E2]
        t0 = time.perf_counter()
        if spec.comodule == "exterior" and set(spec.exterior) == {f"a{q[1:]}" for q in spec.derivations}:
            killers = [(S.elements[int(q[1:])], 1) for q in spec.derivations]
            oracle = graded_quotient_shapes(S, W, killers)
            res = _compare(E2, oracle)
            res["oracle"] = "gr_I(T)/(" + ", ".join(S.names[int(q[1:])] for q in spec.derivations) + ")"
            res["shapes"] = _shape_dict(oracle.shapes())
            certs["e2_quotient"] = res
        cx = coext(M, W)
        certs["coext"] = _compare(E2, cx, [k for k in E2.nominal()])
        phase.timings["comparison"] = time.perf_counter() - t0
        notes.append("comodule mode gives E_1 and d_1 only; later differentials are "
                     "certified zero by the parity check when it succeeds")
    elif mode == "presentation":
        N = phase("spectral sequence", spec.presentation, ring)
        pages, abutment = phase("spectral sequence", filtered_ss, N, S, W)
        t0 = time.perf_counter()
        ab = abutment_compare(pages, abutment)
        # comparing with the abutment only means something once the last page is stable
        settled = not ab.unstable
        inconclusive = None if settled else f"E_{pages[-1].r} still has nonzero differentials; raise r_max"
        certs["abutment"] = {"ok": ab.ok if settled else None, "note": inconclusive,
                             "matches": ab.matches, "masked": ab.masked,
                             "discrepancies": ab.discrepancies,
                             "nonzero_last_differentials": ab.unstable,
                             "stable_on_unmasked": all(v for k, v in abutment.stable.items()
                                                       if k not in pages[-1].mask),
                             "unstable_cells": sorted(k for k, v in abutment.stable.items() if not v)}
        observed = {str(P.r): P.linearity for P in pages[1:]}
        certs["linearity_observed"] = {
            "ok": all(not v["failures"] for v in observed.values()),
            "note": "d_r for r >= 2 is not assumed linear; this records what was observed",
            "checked": {r: v["checked"] for r, v in observed.items()},
            "failures": {r: v["failures"] for r, v in observed.items() if v["failures"]}}
        if len(N.generators) == 1 and len(N.relations) == 1:
            (_, y), = N.relations[0].items()
            f = adic_order(y, S, W.s_max + 1)
            oracle = graded_quotient_shapes(S, W, [(y, f)])
            res = _compare(pages[-1], oracle)
            if not settled:
                res["ok"], res["note"] = None, inconclusive
            res["oracle"] = f"gr_I(T)/initial form of {ring.format(y)} in filtration {f}"
            certs["initial_form_quotient"] = res
        phase.timings["comparison"] = time.perf_counter() - t0
    else:
        raise ValueError(f"unknown mode {mode!r}")

    par = None
    for P in pages[1:]:
        par = parity_collapse_check(P)
        if par:
            break
    if par is not None:
        certs["parity_collapse"] = {"ok": par.collapsed, "page": par.page,
                                    "odd_cell": list(par.odd_cell) if par.odd_cell else None,
                                    "checked": par.checked}
    return RunReport(spec, mode, pages, abutment, certs, [_mask_stats(P) for P in pages],
                     phase.timings, notes + [n for P in pages for n in P.notes[:1]])

