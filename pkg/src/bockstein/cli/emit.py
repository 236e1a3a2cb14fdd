"""Serialization of run reports: JSON, fixed-width tables and SVG charts.

JSON layout::

    {"pages": [{"r": int,
                "cells": [{"s": int, "t": int, "free_rank": int,
                           "torsion": ["p^k", ...], "masked": bool}],
                "differentials": [{"from": [s, t], "to": [s + r, t - 1],
                                   "matrix": [["int", ...], ...]}]}],
     "abutment": null | {...},
     "certificates": {...}}

Cells are listed when nonzero or masked; matrix entries are decimal strings.
"""
import json
import os
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

from ..exactla import ModuleShape


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, str) else k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set)):
        return [_jsonable(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (str, float)):
        return x
    if isinstance(x, int):
        return x if abs(x) < 2 ** 53 else str(x)
    return str(x)


def cell_record(s, t, shape, masked):
    return {"s": s, "t": t, "free_rank": shape.free_rank,
            "torsion": [f"p^{e}" for e in shape.torsion], "masked": masked}


def page_record(P):
    cells = []
    nominal = P.nominal()
    for (s, t), c in sorted(nominal.items()):
        masked = (s, t) in P.mask
        if masked or not c.shape.is_zero():
            cells.append(cell_record(s, t, c.shape, masked))
    diffs = []
    for (s, t), M in sorted(P.differentials.items()):
        if (s, t) not in nominal or not any(any(x for x in row) for row in M):
            continue
        diffs.append({"from": [s, t], "to": [s + P.r, t - 1],
                      "matrix": [[str(x) for x in row] for row in M]})
    return {"r": P.r, "cells": cells, "differentials": diffs}


def abutment_record(A):
    if A is None:
        return None
    cells = [{"s": s, "t": t, "free_rank": sh.free_rank,
              "torsion": [f"p^{e}" for e in sh.torsion], "stable": bool(A.stable.get((s, t), True))}
             for (s, t), sh in sorted(A.gr.items()) if not sh.is_zero()]
    return {"label": A.label, "truncation": A.truncation, "cells": cells}


def to_payload(report):
    return {"pages": [page_record(P) for P in report.pages],
            "abutment": _jsonable(report.abutment if isinstance(report.abutment, dict)
                                  else abutment_record(report.abutment)),
            "certificates": _jsonable(report.certificates)}


def to_json(report):
    return json.dumps(to_payload(report), indent=1, sort_keys=False, ensure_ascii=False) + "\n"


# -- re-ingestion ------------------------------------------------------------------

@dataclass
class IngestedCell:
    shape: ModuleShape


@dataclass
class IngestedPage:
    """A page rebuilt from JSON; exposes the attributes the emitters read."""

    r: int
    p: int
    cells: dict
    mask: set
    differentials: dict
    halo: set = field(default_factory=set)

    def nominal(self):
        return dict(self.cells)

    def nonzero(self):
        return {k: c for k, c in self.cells.items() if not c.shape.is_zero()}

    def shape(self, s, t):
        c = self.cells.get((s, t))
        return c.shape if c else ModuleShape.zero(self.p)


@dataclass
class IngestedReport:
    pages: list
    abutment: object
    certificates: dict


def _shape(rec, p):
    return ModuleShape(p, rec["free_rank"], tuple(int(x.split("^")[1]) for x in rec["torsion"]))


def ingest(text, p):
    """Rebuild pages from ``to_json`` output; ``p`` is the prime of the run."""
    data = json.loads(text)
    if set(data) != {"pages", "abutment", "certificates"}:
        raise ValueError("not a report: top-level keys must be pages, abutment, certificates")
    pages = []
    for rec in data["pages"]:
        cells, mask, diffs = {}, set(), {}
        for c in rec["cells"]:
            cells[c["s"], c["t"]] = IngestedCell(_shape(c, p))
            if c["masked"]:
                mask.add((c["s"], c["t"]))
        for d in rec["differentials"]:
            diffs[tuple(d["from"])] = [[int(x) for x in row] for row in d["matrix"]]
        pages.append(IngestedPage(rec["r"], p, cells, mask, diffs))
    return IngestedReport(pages, data["abutment"], data["certificates"])


# -- tables --------------------------------------------------------------------------

def _entry(shape, masked):
    if shape.is_zero():
        text = "."
    else:
        text = str(shape.rank)
        if not shape.is_elementary():
            text += "*"
    return text + ("?" if masked else "")


def page_table(P, degrees, filtrations):
    """Fixed-width ranks: rows are filtrations s, columns are degrees t."""
    entries = {(s, t): _entry(P.shape(s, t), (s, t) in P.mask)
               for s in filtrations for t in degrees}
    width = max([len(e) for e in entries.values()] + [len(str(t)) for t in degrees]) + 1
    head = "s\\t".rjust(4) + "".join(str(t).rjust(width) for t in degrees)
    lines = [f"E_{P.r}", head]
    for s in filtrations:
        lines.append(str(s).rjust(4) + "".join(entries[s, t].rjust(width) for t in degrees))
    return "\n".join(lines)


def row_ranks(table_text, s):
    """Parse one filtration row of ``page_table`` back into entries."""
    for line in table_text.splitlines()[2:]:
        parts = line.split()
        if parts and parts[0] == str(s):
            return parts[1:]
    raise KeyError(s)


def to_table(report):
    spec = report.spec
    degrees = list(range(spec.degrees[0], spec.degrees[1] + 1))
    filtrations = list(range(spec.s_max + 1))
    blocks = ["entries: number of cyclic summands; '.' zero; '*' not all of order p; "
              "'?' masked"]
    for P in report.pages:
        blocks.append(page_table(P, degrees, filtrations))
    cert = ["certificates:"]
    for name, c in report.certificates.items():
        ok = c.get("ok") if isinstance(c, dict) else c
        cert.append(f"  {name:<24}{ {True: 'ok', False: 'FAILED', None: 'inconclusive'}[ok]}")
    blocks.append("\n".join(cert))
    if report.mask_stats:
        blocks.append("masks:\n" + "\n".join(
            f"  E_{m['r']}: {m['masked']} of {m['cells']} cells masked "
            f"({m['masked_nonzero']} nonzero)" for m in report.mask_stats))
    if report.timings:
        blocks.append("timings:\n" + "\n".join(
            f"  {k:<24}{v:.3f} s" for k, v in report.timings.items()))
    return "\n\n".join(blocks) + "\n"


# -- SVG -----------------------------------------------------------------------------

def page_svg(P, degrees, filtrations):
    """Static chart: dots sized by rank, arrows for nonzero differentials, shaded masks."""
    step, margin = 28, 40
    tmin, tmax = min(degrees), max(degrees)
    smax = max(filtrations)
    width = margin * 2 + step * (tmax - tmin)
    height = margin * 2 + step * smax

    def xy(s, t):
        return margin + step * (t - tmin), height - margin - step * s

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" data-page="{P.r}">',
           '<defs><marker id="head" markerWidth="6" markerHeight="6" refX="5" refY="3" '
           'orient="auto"><path d="M0,0 L6,3 L0,6 z" fill="#b03030"/></marker></defs>',
           f'<text x="{margin}" y="{margin // 2}" font-size="14">E_{P.r}</text>']
    for (s, t) in sorted(P.mask):
        if tmin <= t <= tmax and s in filtrations:
            x, y = xy(s, t)
            out.append(f'<rect class="mask" x="{x - step / 2}" y="{y - step / 2}" '
                       f'width="{step}" height="{step}" fill="#dddddd"/>')
    for t in degrees:
        x, _ = xy(0, t)
        if t % 2 == 0:
            out.append(f'<text class="axis" x="{x}" y="{height - margin / 3}" font-size="9" '
                       f'text-anchor="middle">{t}</text>')
    for s in filtrations:
        _, y = xy(s, tmin)
        out.append(f'<text class="axis" x="{margin / 3}" y="{y + 3}" font-size="9">{s}</text>')
    for (s, t), M in sorted(P.differentials.items()):
        if (s, t) not in P.nominal() or not any(any(x for x in row) for row in M):
            continue
        x1, y1 = xy(s, t)
        x2, y2 = xy(s + P.r, t - 1)
        out.append(f'<line class="differential" data-from="{s},{t}" '
                   f'data-to="{s + P.r},{t - 1}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                   'stroke="#b03030" stroke-width="1.2" marker-end="url(#head)"/>')
    for (s, t), c in sorted(P.nominal().items()):
        masked = (s, t) in P.mask
        if c.shape.is_zero() and not masked:
            continue
        x, y = xy(s, t)
        rank = c.shape.rank
        radius = 2.5 + 2 * rank ** 0.5 if rank else 2
        fill = "none" if rank == 0 else "#203060"
        title = escape(str(c.shape))
        out.append(f'<circle class="cell" data-s="{s}" data-t="{t}" data-rank="{rank}" '
                   f'data-masked="{str(masked).lower()}" cx="{x}" cy="{y}" r="{radius:.2f}" '
                   f'fill="{fill}" stroke="#203060"><title>{title}</title></circle>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def count_svg_cells(svg_text):
    return svg_text.count('<circle class="cell"')


# -- files ---------------------------------------------------------------------------

def emit(report, formats, out_dir):
    """Write the requested formats into ``out_dir``; returns the written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    def write(name, text):
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        written.append(path)

    spec = report.spec
    degrees = list(range(spec.degrees[0], spec.degrees[1] + 1))
    filtrations = list(range(spec.s_max + 1))
    for fmt in formats:
        if fmt == "json":
            write("report.json", to_json(report))
        elif fmt == "table":
            write("pages.txt", to_table(report))
        elif fmt == "svg":
            for P in report.pages:
                write(f"E{P.r}.svg", page_svg(P, degrees, filtrations))
        else:
            raise ValueError(f"unknown format {fmt!r}")
    return written
