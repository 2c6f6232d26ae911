"""Line-oriented system spec files.

    # comment
    [system]
    name = example1
    n = 3
    partition = 3
    description = free text

    [block 1]
    phi = 1                 # shared by all rows, or phi1 = ..., phi2 = ...

    [psi]
    psi = 1/8*m^2           # or psi1 = ..., psi2 = ...

    [chart flat]
    kind = point            # point: targets q1..qn; full: q1..qn, p1..pn
    sign = 1                # -1 for maps that reverse the symplectic form
    let s1 = l1 + l2 + l3   # intermediate definitions, in order
    q1 = s1

    [singular]
    l1*l2 + l1*l3 + l2*l3   # expressions in l1..ln, m1..mn kept away from 0

Expressions use the grammar of ``bistackel.expr``.  Chart inverses are not
serialized.
"""

from __future__ import annotations

import re
from pathlib import Path

from .errors import ExpressionSyntaxError, InputError, ParseError, UnknownVariable, ValidationError
from .expr import parse, to_text
from .phase import CoordinateChart, separation_names
from .stackel import SeparationSystem, check_partition

ROW = ("l", "m")
_SECTION = re.compile(r"^\[\s*([A-Za-z]+)(?:\s+([A-Za-z0-9_]+))?\s*\]$")
_KEY = re.compile(r"^(let\s+)?([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$")


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _expr(text: str, allowed, lineno: int, line: str):
    try:
        return parse(text, allowed)
    except ExpressionSyntaxError as exc:
        col = line.find(text) + 1 + exc.position
        raise ParseError(str(exc), lineno, col) from None
    except UnknownVariable as exc:
        raise ParseError(str(exc), lineno, line.find(text) + 1) from None


def parse_spec(text: str) -> SeparationSystem:
    sections: list[tuple[str, str | None, int, list]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip(raw)
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            sections.append((m.group(1).lower(), m.group(2), lineno, []))
            continue
        if not sections:
            raise ParseError("content before the first section", lineno, 1)
        sections[-1][3].append((lineno, raw, line))

    def one(kind):
        found = [s for s in sections if s[0] == kind]
        if len(found) > 1:
            raise ParseError(f"duplicate [{kind}] section", found[1][2])
        return found[0] if found else None

    known = {"system", "block", "psi", "chart", "singular"}
    for kind, _, lineno, _ in sections:
        if kind not in known:
            raise ParseError(f"unknown section [{kind}]", lineno, 1)

    head = one("system")
    if head is None:
        raise ValidationError("missing [system] section")
    meta = {}
    for lineno, raw, line in head[3]:
        m = _KEY.match(line)
        if not m or m.group(1):
            raise ParseError("expected key = value", lineno, 1)
        meta[m.group(2)] = (m.group(3).strip(), lineno)
    for key in ("name", "n", "partition"):
        if key not in meta:
            raise ValidationError(f"[system] needs {key}")
    try:
        n = int(meta["n"][0])
        partition = tuple(int(p) for p in re.split(r"[,\s]+", meta["partition"][0]) if p)
    except ValueError:
        raise ParseError("n and partition must be integers", meta["n"][1]) from None
    partition = check_partition(n, partition)

    blocks = {}
    for kind, label, lineno, body in sections:
        if kind != "block":
            continue
        if label is None or not label.isdigit():
            raise ParseError("block sections are written [block k]", lineno, 1)
        k = int(label)
        if k in blocks:
            raise ParseError(f"duplicate [block {k}]", lineno, 1)
        blocks[k] = _row_items(body, "phi", n, lineno)
    m = len(partition)
    if sorted(blocks) != list(range(1, len(blocks) + 1)):
        raise ValidationError(f"blocks must be numbered 1..{len(blocks)}")
    if len(blocks) != m:
        raise ValidationError(f"partition has {m} blocks but {len(blocks)} [block] sections are given")
    psi_sec = one("psi")
    if psi_sec is None:
        raise ValidationError("missing [psi] section")
    psi = _row_items(psi_sec[3], "psi", n, psi_sec[2])

    charts = []
    for kind, label, lineno, body in sections:
        if kind == "chart":
            if label is None:
                raise ParseError("chart sections are written [chart name]", lineno, 1)
            charts.append(_chart(label, n, body, lineno))
    singular = ()
    sing = one("singular")
    if sing is not None:
        singular = tuple(_expr(line, separation_names(n), lineno, raw) for lineno, raw, line in sing[3])

    return SeparationSystem(
        meta["name"][0], n, partition, tuple(blocks[k] for k in sorted(blocks)), psi,
        tuple(charts), singular, meta.get("description", ("", 0))[0],
    )


def _row_items(body, key, n, lineno):
    shared, rows = None, {}
    for ln, raw, line in body:
        m = _KEY.match(line)
        if not m or m.group(1):
            raise ParseError("expected key = value", ln, 1)
        name, text = m.group(2), m.group(3).strip()
        e = _expr(text, ROW, ln, raw)
        if name == key:
            shared = e
        elif name.startswith(key) and name[len(key):].isdigit():
            rows[int(name[len(key):])] = e
        else:
            raise ParseError(f"unexpected key {name!r}", ln, 1)
    if shared is not None and rows:
        raise ParseError(f"mix of shared {key} and per-row {key}i", lineno, 1)
    if shared is not None:
        return shared
    if sorted(rows) != list(range(1, n + 1)):
        raise ValidationError(f"{key}: give {key} or all of {key}1..{key}{n}")
    return tuple(rows[i] for i in range(1, n + 1))


def _chart(name, n, body, lineno):
    kind, sign = "point", 1
    steps, targets, forward = [], [], []
    for ln, raw, line in body:
        m = _KEY.match(line)
        if not m:
            raise ParseError("expected key = value", ln, 1)
        key, text = m.group(2), m.group(3).strip()
        if m.group(1) is None and key == "kind":
            kind = text
            continue
        if m.group(1) is None and key == "sign":
            sign = int(text)
            continue
        sources = separation_names(n) if kind == "full" else separation_names(n)[:n]
        allowed = list(sources) + [s for s, _ in steps]
        e = _expr(text, allowed, ln, raw)
        if m.group(1):
            steps.append((key, e))
        else:
            targets.append(key)
            forward.append(e)
    try:
        return CoordinateChart(name, n, kind, tuple(forward), tuple(steps), tuple(targets),
                               symplectic_sign=sign)
    except InputError as exc:
        raise ValidationError(f"chart {name!r} (line {lineno}): {exc}") from None


def load_spec(path) -> SeparationSystem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read spec {path}: {exc.strerror}") from None
    return parse_spec(text)


def _rows_text(key, item):
    if isinstance(item, tuple):
        return [f"{key}{i + 1} = {to_text(e)}" for i, e in enumerate(item)]
    return [f"{key} = {to_text(item)}"]


def dump_spec(sys: SeparationSystem) -> str:
    out = ["[system]", f"name = {sys.name}", f"n = {sys.n}",
           "partition = " + ", ".join(str(p) for p in sys.partition)]
    if sys.description:
        out.append(f"description = {sys.description}")
    for k, phi in enumerate(sys.phi, start=1):
        out += ["", f"[block {k}]"] + _rows_text("phi", phi)
    out += ["", "[psi]"] + _rows_text("psi", sys.psi)
    for c in sys.charts:
        out += ["", f"[chart {c.name}]", f"kind = {c.kind}"]
        if c.symplectic_sign != 1:
            out.append(f"sign = {c.symplectic_sign}")
        out += [f"let {s} = {to_text(e)}" for s, e in c.steps]
        out += [f"{t} = {to_text(e)}" for t, e in zip(c.targets, c.forward)]
    if sys.singular:
        out += ["", "[singular]"] + [to_text(e) for e in sys.singular]
    return "\n".join(out) + "\n"


def save_spec(sys: SeparationSystem, path) -> None:
    Path(path).write_text(dump_spec(sys))


__all__ = ["parse_spec", "load_spec", "dump_spec", "save_spec"]
