"""Text LP-format (CPLEX style) writer and a reader for the subset it writes.

Coefficients are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import TextIO

from .problem import Ilp01, IlpBuilder, Sense

_MAX_LINE = 240
_NAME_OK = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\[\]]*$")


def _fmt(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def _terms(pairs, names) -> list[str]:
    out = []
    for j, a in pairs:
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        coef = "" if mag == 1 else _fmt(mag) + " "
        out.append(f"{sign} {coef}{names[j]}")
    if not out:
        out.append(f"0 {names[0]}")
    return out


def _wrap(head: str, parts: list[str], tail: str = "") -> list[str]:
    lines, cur = [], head
    for p in parts + ([tail] if tail else []):
        if len(cur) + 1 + len(p) > _MAX_LINE:
            lines.append(cur)
            cur = "   " + p
        else:
            cur = f"{cur} {p}"
    lines.append(cur)
    return lines


def write_lp(p: Ilp01, out: "TextIO | str | Path", name: str = "ilp01") -> None:
    for nm in p.var_names + p.row_names:
        if not _NAME_OK.match(nm):
            raise ValueError(f"name {nm!r} is not valid in LP format")
    if p.num_vars == 0:
        raise ValueError("cannot write a problem with no variables")
    lines = [f"\\ {name}", "Maximize"]
    obj = [(j, float(c)) for j, c in enumerate(p.objective.tolist()) if c != 0]
    lines += _wrap(" obj:", _terms(obj, p.var_names))
    lines.append("Subject To")
    for row in p.rows():
        op = {Sense.LE: "<=", Sense.GE: ">=", Sense.EQ: "="}[row.sense]
        lines += _wrap(f" {row.name}:", _terms(row.coeffs, p.var_names), f"{op} {_fmt(row.rhs)}")
    lines.append("Binaries")
    lines += _wrap("", list(p.var_names))
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if isinstance(out, (str, Path)):
        Path(out).write_text(text)
    else:
        out.write(text)


_TOKEN = re.compile(
    r"<=|>=|=<|=>|[<>=]|[+-]"
    r"|(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
    r"|[^\s+\-<>=]+"
)


def _parse_expr(tokens: list[str]) -> list[tuple[str, float]]:
    terms: list[tuple[str, float]] = []
    sign = 1.0
    coef: float | None = None
    for tok in tokens:
        if tok in "+-":
            sign = -1.0 if tok == "-" else 1.0
            continue
        try:
            coef = float(tok) if coef is None else coef * float(tok)
            continue
        except ValueError:
            pass
        terms.append((tok, sign * (1.0 if coef is None else coef)))
        sign, coef = 1.0, None
    return terms


def read_lp(src: "TextIO | str | Path") -> Ilp01:
    """Parse an LP file with Maximize/Subject To/Binaries sections into an Ilp01."""
    if isinstance(src, Path) or (isinstance(src, str) and "\n" not in src):
        text = Path(src).read_text()
    elif isinstance(src, str):
        text = src
    else:
        text = src.read()
    section = None
    statements: dict[str, list[str]] = {"obj": [], "st": [], "bin": []}
    buf: list[str] = []
    for raw in text.splitlines():
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        low = line.lower()
        if low in ("maximize", "max", "maximum"):
            section = "obj"
            continue
        if low in ("subject to", "st", "s.t.", "such that"):
            if buf:
                statements[section].append(" ".join(buf))
                buf = []
            section = "st"
            continue
        if low in ("binaries", "binary", "bin", "bounds", "end"):
            if buf:
                statements[section].append(" ".join(buf))
                buf = []
            section = "bin" if low.startswith("bin") else ("bounds" if low == "bounds" else None)
            continue
        if section == "bin":
            statements["bin"].extend(line.split())
        elif section in ("obj", "st"):
            if raw.startswith(" ") and ":" in line.split()[0] and buf:
                statements[section].append(" ".join(buf))
                buf = []
            buf.append(line)
    names = statements["bin"]
    index = {nm: j for j, nm in enumerate(names)}
    b = IlpBuilder()
    for nm in names:
        b.add_var(nm)
    for stmt in statements["obj"]:
        body = stmt.split(":", 1)[1] if ":" in stmt else stmt
        for nm, c in _parse_expr(_TOKEN.findall(body)):
            b.set_objective(index[nm], c)
    for stmt in statements["st"]:
        label, body = stmt.split(":", 1) if ":" in stmt else ("", stmt)
        toks = _TOKEN.findall(body)
        k = next(i for i, t in enumerate(toks) if t in ("<=", ">=", "=", "=<", "=>", "<", ">"))
        rhs_toks = toks[k + 1:]
        rhs = float("".join(rhs_toks))
        coeffs = [(index[nm], c) for nm, c in _parse_expr(toks[:k]) if c != 0]
        b.add_row(coeffs, Sense.parse(toks[k]), rhs, label.strip())
    return b.build()
