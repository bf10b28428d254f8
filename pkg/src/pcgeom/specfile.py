"""Plain-text manifold spec files (``.pcm``).

Example::

    # comments start with '#'
    name = sasakian-r3
    dim = 3
    coords = x, y, z
    eps0 = 1
    eps1 = -1
    d_eta = half
    sample_box = x:[-1, 1] y:[-1, 1] z:[-1, 1]

    [metric]
    g 1 1 = (y^2 + 1)/4
    g 3 1 = -y/4
    ...
    [phi]
    phi 1 2 = 1          # i-th component of phi(d_j)
    [xi]
    xi 3 = 2
    [eta]
    eta 1 = -y/2
    [exclude]
    sin(th)              # must be nonzero at sample points

Indices are 1-based integers or coordinate names. The metric may be given
by its lower triangle; when both ``g i j`` and ``g j i`` are present they
must be written identically. Missing components are zero.
"""

from __future__ import annotations

import re
from pathlib import Path

from .expr import ExprSyntaxError, Expression, constant, parse
from .geometry import ChartManifold, EndoField, OneForm, VectorField
from .structure import PCStructure

__all__ = ["SpecParseError", "loads", "load", "dumps"]

HEADER_KEYS = ("name", "dim", "coords", "eps0", "eps1", "d_eta", "sample_box", "notes")
SECTIONS = ("metric", "phi", "xi", "eta", "exclude")
_ARITY = {"metric": ("g", 2), "phi": ("phi", 2), "xi": ("xi", 1), "eta": ("eta", 1)}
_BOX_RE = re.compile(r"([A-Za-z_][A-Za-z_0-9]*)\s*:\s*\[([^,\]]+),([^\]]+)\]")


class SpecParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        self.line = line
        where = ""
        if path:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: " if path else f"line {line}: "
        elif path:
            where += " "
        super().__init__(where + message)


def _strip_comment(text: str) -> str:
    return text.split("#", 1)[0].strip()


def _const(text: str, lineno: int) -> float:
    try:
        e = parse(text.strip(), [])
        return e(())
    except (ExprSyntaxError, ArithmeticError) as exc:
        raise SpecParseError(f"bad constant {text.strip()!r}: {exc}", lineno) from None


def _index(token: str, coords: tuple[str, ...], lineno: int) -> int:
    if token in coords:
        return coords.index(token)
    try:
        k = int(token)
    except ValueError:
        raise SpecParseError(f"bad index {token!r} (use 1..{len(coords)} or a coordinate name)", lineno) from None
    if not 1 <= k <= len(coords):
        raise SpecParseError(f"index {k} out of range 1..{len(coords)}", lineno)
    return k - 1


def loads(text: str, path: str | None = None) -> PCStructure:
    """Parse spec-file text into a :class:`PCStructure` (no axiom checks)."""
    header: dict[str, tuple[str, int]] = {}
    entries: dict[str, list[tuple[list[str], str, int]]] = {s: [] for s in SECTIONS}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip() not in SECTIONS:
                raise SpecParseError(f"unknown section {line!r}", lineno, path)
            section = line[1:-1].strip()
            continue
        if section is None:
            if "=" not in line:
                raise SpecParseError(f"expected 'key = value', got {line!r}", lineno, path)
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in HEADER_KEYS:
                raise SpecParseError(f"unknown header key {key!r}", lineno, path)
            if key in header:
                raise SpecParseError(f"duplicate header key {key!r}", lineno, path)
            header[key] = (value, lineno)
        elif section == "exclude":
            entries["exclude"].append(([], line, lineno))
        else:
            if "=" not in line:
                raise SpecParseError(f"expected '<name> <indices> = <expr>', got {line!r}", lineno, path)
            lhs, rhs = (s.strip() for s in line.split("=", 1))
            parts = lhs.split()
            symbol, arity = _ARITY[section]
            if not parts or parts[0] != symbol or len(parts) != arity + 1:
                raise SpecParseError(f"entries in [{section}] look like '{symbol} {'i j' if arity == 2 else 'i'} = ...'", lineno, path)
            entries[section].append((parts[1:], rhs, lineno))

    try:
        return _build(header, entries, path)
    except SpecParseError as exc:
        if path and exc.line is not None and not str(exc).startswith(path):
            raise SpecParseError(str(exc).split(": ", 1)[-1], exc.line, path) from None
        raise


def _build(header, entries, path) -> PCStructure:
    for key in ("dim", "coords", "eps0", "eps1", "sample_box"):
        if key not in header:
            raise SpecParseError(f"missing header key {key!r}", None, path)
    dim_text, dim_line = header["dim"]
    try:
        dim = int(dim_text)
    except ValueError:
        raise SpecParseError(f"dim must be an integer, got {dim_text!r}", dim_line) from None
    coords_text, coords_line = header["coords"]
    coords = tuple(c.strip() for c in coords_text.split(",") if c.strip())
    if len(coords) != dim:
        raise SpecParseError(f"dim = {dim} but {len(coords)} coordinates listed", coords_line)
    if len(set(coords)) != dim:
        raise SpecParseError("duplicate coordinate names", coords_line)
    for c in coords:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z_0-9]*", c):
            raise SpecParseError(f"bad coordinate name {c!r}", coords_line)
    signs = {}
    for key in ("eps0", "eps1"):
        text, line = header[key]
        if text.strip() not in ("1", "+1", "-1"):
            raise SpecParseError(f"{key} must be 1 or -1, got {text!r}", line)
        signs[key] = int(text)
    d_eta = header.get("d_eta", ("half", 0))[0]
    if d_eta not in ("half", "one"):
        raise SpecParseError(f"d_eta must be 'half' or 'one', got {d_eta!r}", header["d_eta"][1])

    box_text, box_line = header["sample_box"]
    box = {}
    for m in _BOX_RE.finditer(box_text):
        name = m.group(1)
        if name not in coords:
            raise SpecParseError(f"sample_box names unknown coordinate {name!r}", box_line)
        box[name] = (_const(m.group(2), box_line), _const(m.group(3), box_line))
    leftover = _BOX_RE.sub("", box_text).strip()
    if leftover or set(box) != set(coords):
        raise SpecParseError("sample_box must give 'name:[lo, hi]' for every coordinate", box_line)
    for name, (lo, hi) in box.items():
        if not lo < hi:
            raise SpecParseError(f"empty sample interval for {name}: [{lo}, {hi}]", box_line)

    def expr(text: str, lineno: int) -> Expression:
        try:
            return parse(text, coords)
        except ExprSyntaxError as exc:
            raise SpecParseError(str(exc), lineno) from None

    zero = constant(0.0, coords)
    metric = [[None] * dim for _ in range(dim)]
    seen: dict[tuple[int, int], int] = {}
    for idx, rhs, lineno in entries["metric"]:
        i, j = (_index(t, coords, lineno) for t in idx)
        if (i, j) in seen:
            raise SpecParseError(f"duplicate metric entry g {idx[0]} {idx[1]}", lineno)
        seen[(i, j)] = lineno
        e = expr(rhs, lineno)
        other = metric[j][i]
        if i != j and other is not None and other != e:
            raise SpecParseError(
                f"metric is not symmetric: g {idx[0]} {idx[1]} = {e} but the transposed entry is {other}", lineno
            )
        metric[i][j] = metric[j][i] = e
    if not seen:
        raise SpecParseError("missing [metric] section", None)
    metric = tuple(tuple(zero if e is None else e for e in row) for row in metric)

    phi = [[zero] * dim for _ in range(dim)]
    for idx, rhs, lineno in entries["phi"]:
        i, j = (_index(t, coords, lineno) for t in idx)
        phi[i][j] = expr(rhs, lineno)
    vecs = {}
    for sec in ("xi", "eta"):
        comps = [zero] * dim
        for idx, rhs, lineno in entries[sec]:
            comps[_index(idx[0], coords, lineno)] = expr(rhs, lineno)
        vecs[sec] = tuple(comps)
    exclude = tuple(expr(rhs, lineno) for _, rhs, lineno in entries["exclude"])

    name = header.get("name", ("", 0))[0]
    chart = ChartManifold(
        coords=coords,
        metric=metric,
        sample_box=tuple(box[c] for c in coords),
        exclude=exclude,
        name=name,
    )
    try:
        return PCStructure(
            base=chart,
            phi=EndoField(tuple(tuple(r) for r in phi)),
            xi=VectorField(vecs["xi"]),
            eta=OneForm(vecs["eta"]),
            eps0=signs["eps0"],
            eps1=signs["eps1"],
            d_eta=d_eta,
            name=name,
            notes=header.get("notes", ("", 0))[0],
        )
    except ValueError as exc:
        raise SpecParseError(str(exc), None) from None


def load(path: str | Path) -> PCStructure:
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), str(path))


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def dumps(S: PCStructure) -> str:
    """Serialise a structure; ``loads(dumps(S))`` reproduces every component."""
    M = S.base
    n = M.dim
    lines = []
    if S.name:
        lines.append(f"name = {S.name}")
    if S.notes:
        lines.append(f"notes = {S.notes}")
    lines += [
        f"dim = {n}",
        f"coords = {', '.join(M.coords)}",
        f"eps0 = {S.eps0}",
        f"eps1 = {S.eps1}",
        f"d_eta = {S.d_eta}",
        "sample_box = " + " ".join(f"{c}:[{_num(lo)}, {_num(hi)}]" for c, (lo, hi) in zip(M.coords, M.sample_box)),
        "",
        "[metric]",
    ]
    for i in range(n):
        for j in range(i + 1):
            if not M.metric[i][j].is_zero():
                lines.append(f"g {i + 1} {j + 1} = {M.metric[i][j]}")
    lines.append("")
    lines.append("[phi]")
    for i in range(n):
        for j in range(n):
            if not S.phi.components[i][j].is_zero():
                lines.append(f"phi {i + 1} {j + 1} = {S.phi.components[i][j]}")
    for sec, comps in (("xi", S.xi.components), ("eta", S.eta.components)):
        lines.append("")
        lines.append(f"[{sec}]")
        for i, e in enumerate(comps):
            if not e.is_zero():
                lines.append(f"{sec} {i + 1} = {e}")
    if M.exclude:
        lines.append("")
        lines.append("[exclude]")
        lines.extend(str(e) for e in M.exclude)
    return "\n".join(lines) + "\n"
