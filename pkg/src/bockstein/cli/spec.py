"""Problem descriptions: ``[section]`` headers with ``key = value`` lines."""
import ast
import re
from dataclasses import dataclass, field, fields

from ..errors import BocksteinError
from ..exactla import PLocalIntegers, PrimeField, PrimePowerRing
from ..exactla.coefficients import is_prime
from ..graded import (Generator, GradedModule, GradedRingPresentation, PolynomialSyntaxError,
                      RegularSequenceData, Window, parse_polynomial)

SECTIONS = {
    "ring": ("prime", "coefficients", "generators"),
    "sequence": ("elements",),
    "input": ("mode", "comodule", "exterior", "derivations", "basis", "operators",
              "module", "relations"),
    "window": ("degrees", "s_max", "r_max"),
    "output": ("formats", "path"),
}
MODES = ("comodule", "presentation")
FORMATS = ("json", "table", "svg")


class SpecError(BocksteinError):
    """Carries ``errors``: a list of ``(line, column, message)``."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"line {l}:{c}: {m}" for l, c, m in self.errors))


class SpecSyntaxError(SpecError):
    pass


class SpecValidationError(SpecError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    prime: int
    coefficients: str
    generators: tuple
    elements: tuple
    mode: str
    degrees: tuple
    s_max: int = 5
    r_max: int = 3
    comodule: str = ""
    exterior: tuple = ()
    derivations: tuple = ()
    basis: tuple = ()
    operators: tuple = ()
    module: tuple = ()
    relations: tuple = ()
    formats: tuple = ("json", "table")
    path: str = "bockstein-out"
    locations: dict = field(default_factory=dict, compare=False, repr=False)

    # engine objects
    def coefficient_ring(self):
        if self.coefficients == "F_p":
            return PrimeField(self.prime)
        if self.coefficients == "Z_(p)":
            return PLocalIntegers(self.prime)
        k = int(self.coefficients.split("^")[1])
        return PrimePowerRing(self.prime, k)

    def ring(self):
        return GradedRingPresentation(
            self.coefficient_ring(), tuple(Generator(n, d, inv) for n, d, inv in self.generators))

    def sequence(self, ring=None):
        return RegularSequenceData.parse(ring or self.ring(), list(self.elements))

    def window(self):
        return Window(self.degrees[0], self.degrees[1], self.s_max, self.r_max)

    def presentation(self, ring=None):
        ring = ring or self.ring()
        names = [n for n, _ in self.module]
        rels = [{names.index(g): parse_polynomial(e, ring)} for g, e in self.relations]
        return GradedModule(ring, list(self.module), rels)

    def replace(self, **kw):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(kw)
        return ProblemSpec(**values)


# -- parsing -----------------------------------------------------------------------

_HEADER = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]$")
_PAIR = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")


def _split(value):
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_spec(text):
    """Parse and validate; raises SpecSyntaxError or SpecValidationError."""
    raw, where = _read_sections(text)
    return _validate(raw, where)


def _read_sections(text):
    errors = []
    raw, where = {}, {}
    section = None
    meaningful = 0
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        meaningful += 1
        col = len(line) - len(line.lstrip()) + 1
        m = _HEADER.match(stripped)
        if m:
            section = m.group(1).lower()
            if section not in SECTIONS:
                errors.append((lineno, col, f"unknown section [{section}]"))
                section = None
            elif section in raw:
                errors.append((lineno, col, f"duplicate section [{section}]"))
            else:
                raw[section] = {}
            continue
        m = _PAIR.match(stripped)
        if not m:
            errors.append((lineno, col, "expected 'key = value' or a [section] header"))
            continue
        if section is None:
            errors.append((lineno, col, "key outside of a known section"))
            continue
        key, value = m.group(1).lower(), m.group(2).strip()
        if key not in SECTIONS[section]:
            errors.append((lineno, col, f"unknown key '{key}' in [{section}]"))
            continue
        if key in raw[section]:
            errors.append((lineno, col, f"duplicate key '{key}'"))
            continue
        raw[section][key] = value
        where[section, key] = (lineno, col + stripped.index("=") + 2 if "=" in stripped else col)
    if not meaningful:
        errors.append((1, 1, "empty problem description"))
    if errors:
        raise SpecSyntaxError(errors)
    return raw, where


def _validate(raw, where):
    errors = []

    def loc(section, key):
        return where.get((section, key), (0, 0))

    def err(section, key, msg):
        line, col = loc(section, key)
        errors.append((line, col, msg))

    def need(section, key):
        if key not in raw.get(section, {}):
            errors.append((0, 0, f"missing '{key}' in [{section}]"))
            return None
        return raw[section][key]

    ring_raw = raw.get("ring", {})
    prime = None
    value = need("ring", "prime")
    if value is not None:
        try:
            prime = int(value)
            if not is_prime(prime):
                err("ring", "prime", f"{prime} is not prime")
                prime = None
        except ValueError:
            err("ring", "prime", f"prime must be an integer, got {value!r}")
    coefficients = _canonical_coefficients(ring_raw.get("coefficients", "Z_(p)"))
    if coefficients is None:
        err("ring", "coefficients", "coefficients must be Z_(p), F_p or Z/p^k")
    generators = []
    for item in _split(ring_raw.get("generators", "")):
        parts = [x.strip() for x in item.split(":")]
        if len(parts) not in (2, 3) or not parts[0].isidentifier():
            err("ring", "generators", f"bad generator {item!r}; use name:degree[:invertible]")
            continue
        try:
            degree = int(parts[1])
        except ValueError:
            err("ring", "generators", f"degree of {parts[0]} must be an integer")
            continue
        if degree % 2:
            err("ring", "generators",
                f"generator {parts[0]} has odd degree {degree}; generator degrees must be even")
            continue
        if degree <= 0:
            err("ring", "generators", f"generator {parts[0]} must have positive degree")
            continue
        inv = len(parts) == 3
        if inv and parts[2] != "invertible":
            err("ring", "generators", f"unknown flag {parts[2]!r} on {parts[0]}")
            continue
        generators.append((parts[0], degree, inv))
    if sum(g[2] for g in generators) > 1:
        err("ring", "generators", "at most one generator may be invertible")

    elements = tuple(_split(need("sequence", "elements") or ""))
    if not elements and "elements" in raw.get("sequence", {}):
        err("sequence", "elements", "the sequence is empty")

    inp = raw.get("input", {})
    mode = need("input", "mode")
    if mode is not None and mode not in MODES:
        err("input", "mode", f"mode must be one of {', '.join(MODES)}")
    comodule = inp.get("comodule", "")
    exterior = tuple(_split(inp.get("exterior", "")))
    derivations = tuple(_split(inp.get("derivations", "")))
    basis, operators, module, relations = [], [], [], []
    for item in _split(inp.get("basis", "")):
        parts = [x.strip() for x in item.split(":")]
        try:
            basis.append((parts[0], int(parts[1])))
        except (IndexError, ValueError):
            err("input", "basis", f"bad basis element {item!r}; use label:degree")
    for item in [x.strip() for x in inp.get("operators", "").split(";") if x.strip()]:
        m = re.match(r"^Q(\d+)\s*\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*\)\s*=\s*(.+)$", item)
        if not m:
            err("input", "operators", f"bad operator entry {item!r}; use Qj(label) = combination")
            continue
        operators.append((int(m.group(1)), m.group(2), m.group(3).strip()))
    for item in _split(inp.get("module", "")):
        parts = [x.strip() for x in item.split(":")]
        try:
            module.append((parts[0], int(parts[1])))
        except (IndexError, ValueError):
            err("input", "module", f"bad module generator {item!r}; use name:degree")
    for item in [x.strip() for x in inp.get("relations", "").split(";") if x.strip()]:
        if ":" not in item:
            err("input", "relations", f"bad relation {item!r}; use generator: polynomial")
            continue
        g, expr = item.split(":", 1)
        for e in _split(expr):
            relations.append((g.strip(), e))

    win = raw.get("window", {})
    degrees = (-2, 24)
    if "degrees" in win:
        m = re.match(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$", win["degrees"])
        if not m:
            err("window", "degrees", "degrees must look like a..b")
        else:
            degrees = (int(m.group(1)), int(m.group(2)))
            if degrees[0] > degrees[1]:
                err("window", "degrees", "empty degree range")
    s_max = _int_field(win, "s_max", 5, err, "window")
    r_max = _int_field(win, "r_max", 3, err, "window")
    if s_max is not None and s_max < 1:
        err("window", "s_max", "s_max must be at least 1")
    if r_max is not None and r_max < 1:
        err("window", "r_max", "r_max must be at least 1")

    out = raw.get("output", {})
    formats = tuple(_split(out.get("formats", "json, table")))
    for f in formats:
        if f not in FORMATS:
            err("output", "formats", f"unknown format {f!r}")
    path = out.get("path", "bockstein-out")

    if errors:
        raise SpecValidationError(errors)

    spec = ProblemSpec(prime, coefficients, tuple(generators), elements, mode, degrees,
                       s_max, r_max, comodule, exterior, derivations, tuple(basis),
                       tuple(operators), tuple(module), tuple(relations), formats, path,
                       dict(where))
    _semantic_checks(spec, err)
    if errors:
        raise SpecValidationError(errors)
    return spec


def _int_field(section, key, default, err, name):
    if key not in section:
        return default
    try:
        return int(section[key])
    except ValueError:
        err(name, key, f"{key} must be an integer")
        return None


def _canonical_coefficients(text):
    t = text.replace(" ", "")
    if t in ("Z_(p)", "Z_p", "plocal"):
        return "Z_(p)"
    if t in ("F_p", "field"):
        return "F_p"
    m = re.match(r"^Z/p\^(\d+)$", t)
    if m and int(m.group(1)) >= 1:
        return "F_p" if m.group(1) == "1" else f"Z/p^{int(m.group(1))}"
    return None


def _semantic_checks(spec, err):
    """Checks that need the ring: expressions, references, mode requirements."""
    try:
        ring = spec.ring()
    except ValueError as exc:
        err("ring", "generators", str(exc))
        return
    n = len(spec.elements)
    for e in spec.elements:
        try:
            poly = parse_polynomial(e, ring)
        except PolynomialSyntaxError as exc:
            err("sequence", "elements", str(exc))
            continue
        if not poly:
            err("sequence", "elements", f"sequence element {e!r} is zero")
        elif not ring.is_homogeneous(poly):
            err("sequence", "elements", f"sequence element {e!r} is not homogeneous")
    if spec.mode == "comodule":
        if spec.comodule not in ("exterior", "explicit"):
            err("input", "comodule", "comodule mode needs 'comodule = exterior' or 'explicit'")
        if spec.comodule == "exterior":
            for name in spec.exterior:
                if not re.fullmatch(r"a\d+", name) or int(name[1:]) >= n:
                    err("input", "exterior", f"{name} is not one of a0..a{n - 1}")
            for name in spec.derivations:
                if not re.fullmatch(r"Q\d+", name) or int(name[1:]) >= n:
                    err("input", "derivations", f"{name} is not one of Q0..Q{n - 1}")
        if spec.comodule == "explicit":
            labels = {b for b, _ in spec.basis}
            if not spec.basis:
                err("input", "basis", "explicit comodules need a basis")
            for j, src, expr in spec.operators:
                if j >= n:
                    err("input", "operators", f"Q{j} does not exist for a sequence of length {n}")
                if src not in labels:
                    err("input", "operators", f"unknown basis label {src!r}")
                try:
                    linear_form(expr, labels)
                except ValueError as exc:
                    err("input", "operators", str(exc))
    if spec.mode == "presentation" or spec.module:
        if spec.mode == "presentation" and not spec.module:
            err("input", "module", "presentation mode needs module generators")
        names = {m for m, _ in spec.module}
        for g, expr in spec.relations:
            if g not in names:
                err("input", "relations", f"relation refers to unknown generator {g!r}")
                continue
            try:
                poly = parse_polynomial(expr, ring)
            except PolynomialSyntaxError as exc:
                err("input", "relations", str(exc))
                continue
            if poly and not ring.is_homogeneous(poly):
                err("input", "relations", f"relation {expr!r} is not homogeneous")


def linear_form(text, labels):
    """Parse an integer combination of basis labels into ``{label: coefficient}``."""
    try:
        tree = ast.parse(text, mode="eval").body
    except SyntaxError:
        raise ValueError(f"cannot parse {text!r}") from None

    def ev(node):
        if isinstance(node, ast.Name):
            if node.id not in labels:
                raise ValueError(f"unknown basis label {node.id!r}")
            return {node.id: 1}
        if isinstance(node, ast.Constant) and node.value == 0:
            return {}
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return {k: -v for k, v in ev(node.operand).items()}
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub)):
            a, b = ev(node.left), ev(node.right)
            sign = 1 if isinstance(node.op, ast.Add) else -1
            for k, v in b.items():
                a[k] = a.get(k, 0) + sign * v
            return a
        if isinstance(node, ast.BinOp) and isinstance(node.op, ast.Mult) \
                and isinstance(node.left, ast.Constant) and isinstance(node.left.value, int):
            return {k: node.left.value * v for k, v in ev(node.right).items()}
        raise ValueError(f"{text!r} is not an integer combination of basis labels")

    return {k: v for k, v in ev(tree).items() if v}


# -- printing ------------------------------------------------------------------------

def print_spec(spec):
    """Canonical text; ``parse_spec(print_spec(s)) == s``."""
    gens = ", ".join(f"{n}:{d}" + (":invertible" if inv else "") for n, d, inv in spec.generators)
    lines = ["[ring]", f"prime = {spec.prime}", f"coefficients = {spec.coefficients}"]
    if gens:
        lines.append(f"generators = {gens}")
    lines += ["", "[sequence]", f"elements = {', '.join(spec.elements)}", "", "[input]",
              f"mode = {spec.mode}"]
    if spec.comodule:
        lines.append(f"comodule = {spec.comodule}")
    if spec.exterior:
        lines.append(f"exterior = {', '.join(spec.exterior)}")
    if spec.derivations:
        lines.append(f"derivations = {', '.join(spec.derivations)}")
    if spec.basis:
        lines.append("basis = " + ", ".join(f"{b}:{d}" for b, d in spec.basis))
    if spec.operators:
        lines.append("operators = " + "; ".join(f"Q{j}({s}) = {e}" for j, s, e in spec.operators))
    if spec.module:
        lines.append("module = " + ", ".join(f"{m}:{d}" for m, d in spec.module))
    if spec.relations:
        grouped = {}
        for g, e in spec.relations:
            grouped.setdefault(g, []).append(e)
        lines.append("relations = " + "; ".join(f"{g}: {', '.join(es)}" for g, es in grouped.items()))
    lines += ["", "[window]", f"degrees = {spec.degrees[0]}..{spec.degrees[1]}",
              f"s_max = {spec.s_max}", f"r_max = {spec.r_max}", "", "[output]",
              f"formats = {', '.join(spec.formats)}", f"path = {spec.path}", ""]
    return "\n".join(lines)
