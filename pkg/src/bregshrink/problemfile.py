"""Line-oriented problem files.

A problem file is UTF-8 text made of ``key = value`` lines grouped under
section headers::

    [geometry]
    kind = squared_norm
    dim = 2

    [demimetric.1]
    kind = box_projection
    weight = 1
    lower = (-1, -1)
    upper = (1, 1)

Vectors are written ``(1, 2.5, -3)``, matrices as rows separated by
semicolons ``(1, 0; 0, 1)``, schedules as a number or a vector whose last
entry repeats.  ``#`` starts a comment.  Sections are ``[geometry]``,
``[demimetric.j]``, ``[bism.i]``, ``[operator.A]``, ``[operator.G]``,
``[schedules]``, ``[init]`` and ``[oracle]``.  Unknown sections and keys
are rejected with the offending line number.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .geometry import Kind, LegendreGeometry
from .operators import (BismKind, BismOperatorSpec, DemimetricMappingSpec, MappingKind,
                        MonotoneKind, MonotoneOperatorSpec, OperatorFamilies)
from .solver import OmegaDescription, ProblemSpec, Schedules

__all__ = ["ProblemFileError", "parse_problem", "load_problem", "dump_problem",
           "save_problem"]


class ProblemFileError(ValueError):
    """A problem file failed to parse or validate; ``line`` is 1-based."""

    def __init__(self, message: str, line: int | None = None, source: str = "<problem>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.message = message


# value kinds: str, int, float, vec, mat, sched (float or vec)
_MONO_KEYS = {"kind": "str", "matrix": "mat", "weights": "vec", "lower": "vec", "upper": "vec"}
_SCHEMA = {
    "geometry": {"kind": "str", "dim": "int", "p": "float"},
    "demimetric": {"kind": "str", "weight": "float", "k": "float", "witness": "vec",
                   "lower": "vec", "upper": "vec", "normal": "vec", "offset": "float",
                   "operator": "str", "lam": "float", "matrix": "mat", "weights": "vec",
                   "center": "vec"},
    "bism": {"kind": "str", "weight": "float", "matrix": "mat", "shift": "vec"},
    "operator": _MONO_KEYS,
    "schedules": {"lambda": "sched", "eta": "sched", "r": "sched", "a": "float",
                  "c": "float", "b": "float"},
    "init": {"x1": "vec", "base_lower": "vec", "base_upper": "vec", "witness": "vec",
             "name": "str"},
    "oracle": {"lower": "vec", "upper": "vec", "ineq_normals": "mat", "ineq_offsets": "vec",
               "eq_normals": "mat", "eq_offsets": "vec"},
}

_HEADER = re.compile(r"^\[\s*([A-Za-z_]+)(?:\.([A-Za-z0-9_]+))?\s*\]$")


@dataclass
class _Section:
    name: str
    label: str | None
    line: int
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)

    @property
    def title(self) -> str:
        return f"[{self.name}.{self.label}]" if self.label else f"[{self.name}]"


def _number(tok: str, line: int, source: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise ProblemFileError(f"expected a number, got {tok!r}", line, source) from None


def _value(kind: str, raw: str, line: int, source: str):
    raw = raw.strip()
    if kind == "str":
        if not raw:
            raise ProblemFileError("empty value", line, source)
        return raw
    if kind == "int":
        v = _number(raw, line, source)
        if v != int(v):
            raise ProblemFileError(f"expected an integer, got {raw!r}", line, source)
        return int(v)
    if kind == "float":
        return _number(raw, line, source)
    if kind == "sched" and not raw.startswith("("):
        return _number(raw, line, source)
    if not (raw.startswith("(") and raw.endswith(")")):
        raise ProblemFileError(f"expected a parenthesized list, got {raw!r}", line, source)
    body = raw[1:-1].strip()
    rows = [r for r in body.split(";")] if body else []
    parsed = [[_number(t, line, source) for t in r.split(",") if t.strip()] for r in rows]
    if kind in ("vec", "sched"):
        if len(parsed) > 1:
            raise ProblemFileError("expected a vector, got a matrix", line, source)
        return np.array(parsed[0] if parsed else [], dtype=float)
    widths = {len(r) for r in parsed}
    if len(widths) > 1:
        raise ProblemFileError("matrix rows have different lengths", line, source)
    return np.array(parsed, dtype=float).reshape(len(parsed), widths.pop() if widths else 0)


def _sections(text: str, source: str) -> list:
    out: list = []
    cur = None
    seen = set()
    for ln, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            name, label = m.group(1), m.group(2)
            if name not in _SCHEMA:
                raise ProblemFileError(f"unknown section [{name}]", ln, source)
            labeled = name in ("demimetric", "bism", "operator")
            if labeled and label is None:
                raise ProblemFileError(f"section [{name}] needs a label, e.g. [{name}.1]",
                                       ln, source)
            if not labeled and label is not None:
                raise ProblemFileError(f"section [{name}] takes no label", ln, source)
            if name == "operator" and label not in ("A", "G"):
                raise ProblemFileError("operator sections are [operator.A] and [operator.G]",
                                       ln, source)
            key = (name, label)
            if key in seen:
                raise ProblemFileError(f"duplicate section {line}", ln, source)
            seen.add(key)
            cur = _Section(name, label, ln)
            out.append(cur)
            continue
        if "=" not in line:
            raise ProblemFileError(f"expected 'key = value', got {line!r}", ln, source)
        if cur is None:
            raise ProblemFileError("key outside of any section", ln, source)
        k, v = (s.strip() for s in line.split("=", 1))
        schema = _SCHEMA[cur.name]
        if k not in schema:
            raise ProblemFileError(f"unknown key {k!r} in {cur.title}", ln, source)
        if k in cur.values:
            raise ProblemFileError(f"duplicate key {k!r} in {cur.title}", ln, source)
        cur.values[k] = _value(schema[k], v, ln, source)
        cur.lines[k] = ln
    return out


class _Builder:
    def __init__(self, source: str):
        self.source = source

    def fail(self, msg, sec: _Section, key: str | None = None):
        line = sec.lines.get(key, sec.line) if key else sec.line
        raise ProblemFileError(f"{sec.title} {msg}", line, self.source)

    def need(self, sec: _Section, key: str):
        if key not in sec.values:
            self.fail(f"is missing {key!r}", sec)
        return sec.values[key]

    def guard(self, sec: _Section, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except ValueError as exc:
            if isinstance(exc, ProblemFileError):
                raise
            self.fail(str(exc), sec)

    def monotone(self, sec: _Section, dim: int, kind_key: str = "kind") -> MonotoneOperatorSpec:
        kind = self.need(sec, kind_key)
        try:
            kind = MonotoneKind(kind)
        except ValueError:
            self.fail(f"unknown operator kind {kind!r}", sec, kind_key)
        v = sec.values
        return self.guard(sec, MonotoneOperatorSpec, kind, dim, matrix=v.get("matrix"),
                          weights=v.get("weights"), lower=v.get("lower"),
                          upper=v.get("upper"))

    def mapping(self, sec: _Section, dim: int) -> DemimetricMappingSpec:
        v = sec.values
        kind = self.need(sec, "kind")
        try:
            kind = MappingKind(kind)
        except ValueError:
            self.fail(f"unknown mapping kind {kind!r}", sec, "kind")
        op = None
        if kind is MappingKind.RESOLVENT:
            op = self.monotone(sec, dim, kind_key="operator")
            lower = upper = matrix = None
        else:
            lower, upper, matrix = v.get("lower"), v.get("upper"), v.get("matrix")
        return self.guard(
            sec, DemimetricMappingSpec, kind, dim, k=v.get("k", 0.0),
            fixed_point_witness=v.get("witness"), lower=lower, upper=upper,
            normal=v.get("normal"), offset=v.get("offset"), operator=op,
            lam=v.get("lam", 1.0), matrix=matrix, center=v.get("center"))

    def bism(self, sec: _Section, dim: int) -> BismOperatorSpec:
        v = sec.values
        kind = self.need(sec, "kind")
        try:
            kind = BismKind(kind)
        except ValueError:
            self.fail(f"unknown bism kind {kind!r}", sec, "kind")
        return self.guard(sec, BismOperatorSpec, kind, dim, matrix=v.get("matrix"),
                          shift=v.get("shift"))


def parse_problem(text: str, source: str = "<problem>") -> ProblemSpec:
    """Parse and validate a problem file; raises :class:`ProblemFileError`."""
    secs = _sections(text, source)
    by = {}
    for s in secs:
        by.setdefault(s.name, []).append(s)
    b = _Builder(source)
    for required in ("geometry", "demimetric", "bism", "init"):
        if required not in by:
            raise ProblemFileError(f"missing section [{required}]", None, source)

    gs = by["geometry"][0]
    kind = b.need(gs, "kind")
    try:
        kind = Kind(kind)
    except ValueError:
        b.fail(f"unknown geometry kind {kind!r}", gs, "kind")
    if "p" in gs.values and kind is not Kind.PNORM:
        b.fail("p is only meaningful for pnorm", gs, "p")
    g = b.guard(gs, LegendreGeometry, kind, b.need(gs, "dim"), gs.values.get("p", 2.0))
    d = g.dim

    ops = {s.label: s for s in by.get("operator", [])}
    A = b.monotone(ops["A"], d) if "A" in ops else MonotoneOperatorSpec.zero(d)
    G = b.monotone(ops["G"], d) if "G" in ops else MonotoneOperatorSpec.zero(d)

    dem = [(b.mapping(s, d), s) for s in by["demimetric"]]
    bis = [(b.bism(s, d), s) for s in by["bism"]]
    fam_args = {}
    for label, items in (("demimetric", dem), ("bism", bis)):
        fam_args[label] = []
        for spec, sec in items:
            fam_args[label].append((spec, b.need(sec, "weight")))
    try:
        fam = OperatorFamilies(demimetric=fam_args["demimetric"], bism=fam_args["bism"],
                               A=A, G=G)
    except ValueError as exc:
        sec = by["bism"][0] if str(exc).startswith("[bism]") else by["demimetric"][0]
        raise ProblemFileError(str(exc), sec.line, source) from None

    sched = Schedules()
    if "schedules" in by:
        ss = by["schedules"][0]
        v = ss.values
        sched = b.guard(ss, Schedules, lambda_n=v.get("lambda", 0.5), eta_n=v.get("eta", 0.5),
                        r_n=v.get("r", 1.0), a=v.get("a"), c=v.get("c"), b=v.get("b"))

    ini = by["init"][0]
    iv = ini.values
    box = None
    if ("base_lower" in iv) != ("base_upper" in iv):
        b.fail("needs both base_lower and base_upper", ini)
    if "base_lower" in iv:
        box = (iv["base_lower"], iv["base_upper"])

    omega = None
    if "oracle" in by:
        os_ = by["oracle"][0]
        ov = os_.values
        omega = b.guard(os_, OmegaDescription, lower=ov.get("lower"), upper=ov.get("upper"),
                        ineq_normals=ov.get("ineq_normals"),
                        ineq_offsets=ov.get("ineq_offsets"),
                        eq_normals=ov.get("eq_normals"), eq_offsets=ov.get("eq_offsets"))
    return b.guard(ini, ProblemSpec, g, fam, sched, b.need(ini, "x1"), base_box=box,
                   witness=iv.get("witness"), omega=omega, name=iv.get("name", ""))


def load_problem(path) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read(), source=str(path))


# -- serialization --------------------------------------------------------------

def _num(x: float) -> str:
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def _vec(v) -> str:
    return "(" + ", ".join(_num(t) for t in np.asarray(v, dtype=float).ravel()) + ")"


def _mat(M) -> str:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return "(" + "; ".join(", ".join(_num(t) for t in row) for row in M) + ")"


def _sched(s) -> str:
    return _vec(s) if isinstance(s, tuple) else _num(s)


def _mono_lines(A: MonotoneOperatorSpec, kind_key: str = "kind") -> list:
    out = [f"{kind_key} = {A.kind.value}"]
    if A.kind is MonotoneKind.LINEAR_PSD:
        out.append(f"matrix = {_mat(A.matrix)}")
    elif A.kind is MonotoneKind.ABS_SUM:
        out.append(f"weights = {_vec(A.weights)}")
    elif A.kind is MonotoneKind.NORMAL_CONE_BOX:
        out += [f"lower = {_vec(A.lower)}", f"upper = {_vec(A.upper)}"]
    return out


def dump_problem(spec: ProblemSpec) -> str:
    """Serialize ``spec`` so that ``parse_problem(dump_problem(spec))`` rebuilds it."""
    g = spec.geometry
    out = ["[geometry]", f"kind = {g.kind.value}", f"dim = {g.dim}"]
    if g.kind is Kind.PNORM:
        out.append(f"p = {_num(g.p)}")
    for j, (T, w) in enumerate(spec.families.demimetric, start=1):
        out += ["", f"[demimetric.{j}]", f"kind = {T.kind.value}", f"weight = {_num(w)}",
                f"k = {_num(T.k)}"]
        if T.kind is MappingKind.BOX_PROJECTION:
            out += [f"lower = {_vec(T.lower)}", f"upper = {_vec(T.upper)}"]
        elif T.kind is MappingKind.HALFSPACE_PROJECTION:
            out += [f"normal = {_vec(T.normal)}", f"offset = {_num(T.offset)}"]
        elif T.kind is MappingKind.RESOLVENT:
            out += _mono_lines(T.operator, "operator") + [f"lam = {_num(T.lam)}"]
        elif T.kind is MappingKind.STRICT_PSEUDO_CONTRACTION:
            out += [f"matrix = {_mat(T.matrix)}", f"center = {_vec(T.center)}"]
        if T.kind is not MappingKind.IDENTITY:
            out.append(f"witness = {_vec(T.fixed_point_witness)}")
    for i, (B, w) in enumerate(spec.families.bism, start=1):
        out += ["", f"[bism.{i}]", f"kind = {B.kind.value}", f"weight = {_num(w)}"]
        if B.kind is BismKind.AFFINE_GRADIENT:
            out += [f"matrix = {_mat(B.matrix)}", f"shift = {_vec(B.shift)}"]
    for label, A in (("A", spec.families.A), ("G", spec.families.G)):
        out += ["", f"[operator.{label}]"] + _mono_lines(A)
    s = spec.schedules
    out += ["", "[schedules]", f"lambda = {_sched(s.lambda_n)}", f"eta = {_sched(s.eta_n)}",
            f"r = {_sched(s.r_n)}", f"a = {_num(s.a)}", f"c = {_num(s.c)}"]
    if s.b is not None:
        out.append(f"b = {_num(s.b)}")
    out += ["", "[init]", f"x1 = {_vec(spec.x1)}"]
    if spec.base_box is not None:
        out += [f"base_lower = {_vec(spec.base_box[0])}",
                f"base_upper = {_vec(spec.base_box[1])}"]
    if spec.witness is not None:
        out.append(f"witness = {_vec(spec.witness)}")
    if spec.name:
        out.append(f"name = {spec.name}")
    om = spec.omega
    if om is not None:
        out += ["", "[oracle]"]
        if om.lower is not None:
            out += [f"lower = {_vec(om.lower)}", f"upper = {_vec(om.upper)}"]
        if om.ineq_normals is not None:
            out += [f"ineq_normals = {_mat(om.ineq_normals)}",
                    f"ineq_offsets = {_vec(om.ineq_offsets)}"]
        if om.eq_normals is not None:
            out += [f"eq_normals = {_mat(om.eq_normals)}",
                    f"eq_offsets = {_vec(om.eq_offsets)}"]
    return "\n".join(out) + "\n"


def save_problem(spec: ProblemSpec, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_problem(spec))
