import json
import os

import pytest

from bockstein.cli import (main, parse_spec, preset_names, preset_text, print_spec, run,
                           SpecSyntaxError, SpecValidationError)
from bockstein.cli.emit import (count_svg_cells, ingest, page_svg, page_table, row_ranks,
                                to_json, to_payload)
from bockstein.cli.run import RunReport
from bockstein.exactla import PrimeField
from bockstein.graded import graded_quotient_shapes, parse_polynomial
from bockstein.hbss import SpectralSequencePage

EXPLICIT = """\
[ring]
prime = 3
generators = v1:4

[sequence]
elements = p, v1

[input]
mode = comodule
comodule = explicit
basis = x:0, y:1, z:2
operators = Q0(y) = x; Q0(z) = y

[window]
degrees = 0..8
s_max = 2
"""


@pytest.fixture(scope="module")
def reports():
    return {name: run(parse_spec(preset_text(name))) for name in preset_names()}


def test_presets_are_bundled():
    assert preset_names() == ["moore-p", "moore-p2", "smith-toda-v"]


def test_moore_preset_parses():
    spec = parse_spec(preset_text("moore-p"))
    assert spec.prime == 3 and spec.coefficients == "Z_(p)"
    assert spec.generators == (("v1", 4, False),)
    assert spec.elements == ("p", "v1")
    assert spec.mode == "comodule" and spec.exterior == ("a0",) and spec.derivations == ("Q0",)


@pytest.mark.parametrize("name", ["moore-p", "moore-p2", "smith-toda-v"])
def test_print_parse_round_trip(name):
    spec = parse_spec(preset_text(name))
    assert parse_spec(print_spec(spec)) == spec
    assert print_spec(parse_spec(print_spec(spec))) == print_spec(spec)


def test_empty_description_is_a_syntax_error():
    with pytest.raises(SpecSyntaxError) as info:
        parse_spec("")
    assert info.value.errors == [(1, 1, "empty problem description")]


def test_odd_degree_is_a_validation_error():
    text = preset_text("moore-p").replace("v1:4", "v1:3")
    with pytest.raises(SpecValidationError) as info:
        parse_spec(text)
    (line, col, msg), = info.value.errors
    assert line > 0 and "even" in msg


def test_unknown_key_is_located():
    with pytest.raises(SpecSyntaxError) as info:
        parse_spec("[ring]\nprime = 3\ncolour = red\n")
    assert info.value.errors[0][0] == 3


def test_moore_p_report(reports):
    rep = reports["moore-p"]
    c = rep.certificates
    assert c["regularity"]["ok"] and c["towers"]["ok"] and c["comodule"]["ok"]
    assert c["e2_quotient"]["ok"] and c["coext"]["ok"]
    assert c["parity_collapse"]["ok"] and c["parity_collapse"]["page"] == 2


def test_moore_p2_report(reports):
    rep = reports["moore-p2"]
    E2 = rep.page(2)
    assert E2.differentials[0, 1] == [[1]]
    c = rep.certificates
    assert c["abutment"]["ok"] and c["initial_form_quotient"]["ok"]
    assert c["abutment"]["stable_on_unmasked"]
    assert c["linearity_observed"]["ok"] and c["linearity_observed"]["checked"]["2"] > 0
    assert all(tuple(k) in rep.page(3).mask for k in c["abutment"]["unstable_cells"])


def test_smith_toda_report(reports):
    c = reports["smith-toda-v"].certificates
    assert c["e2_quotient"]["ok"] and c["parity_collapse"]["ok"]
    assert c["e2_quotient"]["oracle"] == "gr_I(T)/(p, v1)"
    assert not c["towers"]["over_available"]


def test_run_is_deterministic(reports):
    again = run(parse_spec(preset_text("moore-p2")))
    assert to_json(again) == to_json(reports["moore-p2"])


def _check_schema(data):
    assert set(data) == {"pages", "abutment", "certificates"}
    for page in data["pages"]:
        assert set(page) == {"r", "cells", "differentials"} and isinstance(page["r"], int)
        for c in page["cells"]:
            assert set(c) == {"s", "t", "free_rank", "torsion", "masked"}
            assert all(isinstance(c[k], int) for k in ("s", "t", "free_rank"))
            assert isinstance(c["masked"], bool)
            assert all(x.startswith("p^") and int(x[2:]) > 0 for x in c["torsion"])
        for d in page["differentials"]:
            assert set(d) == {"from", "to", "matrix"}
            assert d["to"] == [d["from"][0] + page["r"], d["from"][1] - 1]
            assert all(isinstance(x, str) and int(x) is not None for row in d["matrix"] for x in row)


def test_json_schema(reports):
    for rep in reports.values():
        _check_schema(json.loads(to_json(rep)))


def test_zero_page_json(reports):
    spec = reports["moore-p"].spec
    empty = SpectralSequencePage(1, 3, PrimeField(3), {})
    data = json.loads(to_json(RunReport(spec, "comodule", [empty])))
    _check_schema(data)
    assert data["pages"] == [{"r": 1, "cells": [], "differentials": []}]


def test_json_reingests_identically(reports):
    for rep in reports.values():
        text = to_json(rep)
        back = ingest(text, rep.spec.prime)
        assert to_json(back) == text
        for P, Q in zip(rep.pages, back.pages):
            assert {k: c.shape for k, c in P.nonzero().items()} == \
                {k: c.shape for k, c in Q.nonzero().items()}


def test_table_rows_match_quotient(reports):
    rep = reports["moore-p"]
    spec = rep.spec
    degrees = list(range(spec.degrees[0], spec.degrees[1] + 1))
    table = page_table(rep.page(2), degrees, list(range(spec.s_max + 1)))
    ring = spec.ring()
    S = spec.sequence(ring)
    oracle = graded_quotient_shapes(S, spec.window(), [(parse_polynomial("p", ring), 1)])
    for s in range(spec.s_max + 1):
        expected = [str(oracle.shape(s, t).rank) if oracle.shape(s, t).rank else "."
                    for t in degrees]
        assert row_ranks(table, s) == expected


def test_svg_cell_count_matches_json(reports):
    for rep in reports.values():
        spec = rep.spec
        degrees = list(range(spec.degrees[0], spec.degrees[1] + 1))
        payload = to_payload(rep)
        for P, rec in zip(rep.pages, payload["pages"]):
            svg = page_svg(P, degrees, list(range(spec.s_max + 1)))
            assert count_svg_cells(svg) == len(rec["cells"])


def _run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", ["moore-p", "moore-p2", "smith-toda-v"])
def test_presets_exit_zero(name, tmp_path, capsys):
    code, out, err = _run_cli(["run", "--preset", name, "--out", str(tmp_path)], capsys)
    assert code == 0, err
    assert sorted(os.listdir(tmp_path))[:2] == ["E1.svg", "E2.svg"]
    assert os.path.exists(tmp_path / "report.json") and os.path.exists(tmp_path / "pages.txt")


def test_overrides_are_applied(tmp_path, capsys):
    code, _, err = _run_cli(["run", "--preset", "moore-p2", "--window", "0..8", "--max-page", "2",
                             "--emit", "json", "--out", str(tmp_path)], capsys)
    assert code == 0, err
    data = json.loads((tmp_path / "report.json").read_text())
    assert [p["r"] for p in data["pages"]] == [1, 2]
    assert max(c["t"] for p in data["pages"] for c in p["cells"]) <= 8
    # E_2 still carries d_2, so the comparisons with E_infinity are not decided
    assert data["certificates"]["abutment"]["ok"] is None
    assert data["certificates"]["initial_form_quotient"]["ok"] is None


def test_bad_window_exits_two(capsys):
    code, _, err = _run_cli(["run", "--preset", "moore-p", "--window", "9..1"], capsys)
    assert code == 2 and "--window" in err


def test_bad_file_exits_two(tmp_path, capsys):
    f = tmp_path / "bad.spec"
    f.write_text("")
    code, _, err = _run_cli(["run", str(f)], capsys)
    assert code == 2 and "bad.spec:1:1: empty problem description" in err


def test_missing_file_exits_four(tmp_path, capsys):
    code, _, _ = _run_cli(["run", str(tmp_path / "nope.spec")], capsys)
    assert code == 4


def test_unwritable_output_exits_four(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, _, _ = _run_cli(["run", "--preset", "moore-p", "--out", str(blocker / "sub")], capsys)
    assert code == 4


def test_non_regular_sequence_exits_three(tmp_path, capsys):
    f = tmp_path / "nonreg.spec"
    f.write_text(preset_text("moore-p").replace("elements = p, v1", "elements = p, v1, v1"))
    code, _, err = _run_cli(["run", str(f), "--out", str(tmp_path)], capsys)
    assert code == 3 and "[regularity] NonRegular" in err


def test_invalid_comodule_exits_three(tmp_path, capsys):
    f = tmp_path / "chain.spec"
    f.write_text(EXPLICIT)
    code, _, err = _run_cli(["run", str(f), "--out", str(tmp_path)], capsys)
    assert code == 3 and "InvalidComodule" in err


def test_valid_explicit_comodule(tmp_path, capsys):
    f = tmp_path / "moore.spec"
    f.write_text(EXPLICIT.replace("basis = x:0, y:1, z:2", "basis = x:0, y:1")
                 .replace("; Q0(z) = y", ""))
    code, out, err = _run_cli(["run", str(f), "--out", str(tmp_path)], capsys)
    assert code == 0, err
    assert "coext" in out


def test_presets_subcommand(capsys):
    code, out, _ = _run_cli(["presets"], capsys)
    assert code == 0 and out.split() == ["moore-p", "moore-p2", "smith-toda-v"]
