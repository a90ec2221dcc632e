"""Fixed-format MPS export, a matching reader, and a layout checker.

Rows and columns get generated 7-character names (``R000000``, ``C000000``)
and the semantic names go to a two-column CSV sidecar.  Every COLUMNS, RHS
and BOUNDS record carries a single value so that a number never shifts a
following field; values are written with Python's shortest round-trip
representation, which makes write -> read bit-exact.
"""
from __future__ import annotations

import csv
import io
import os
from typing import IO, Dict, List, Tuple, Union

import numpy as np

from medea.lp import EQ, GE, LE, LpProblem

OBJ_ROW = "COST"
RHS_SET = "RHS"
BND_SET = "BND"
MPS_INFINITY = 1e30
SECTIONS = ("NAME", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA")


class MpsError(ValueError):
    pass


def _num(v: float, where: str) -> str:
    if not np.isfinite(v) or abs(v) >= MPS_INFINITY:
        raise MpsError(f"unencodable value {v!r} at {where}")
    if v == 0.0:
        return "0"
    s = repr(float(v))
    if s.endswith(".0"):
        s = s[:-2]
    return s


def _record(f1: str, f2: str, f3: str = "", f4: str = "") -> str:
    # fixed columns: field1 at 2, field2 at 5, field3 at 15, field4 at 25
    line = " " + f1.ljust(2) + " " + f2.ljust(8)
    if f3:
        line += "  " + f3.ljust(8)
    if f4:
        line += "  " + f4
    return line.rstrip()


def row_names(n: int) -> List[str]:
    return [f"R{i:06d}" for i in range(n)]


def col_names(n: int) -> List[str]:
    return [f"C{j:06d}" for j in range(n)]


def write_interchange(problem: LpProblem, destination: Union[str, os.PathLike, IO[str], None] = None,
                      name: str = "MEDEA") -> bytes:
    """Render ``problem`` as fixed-format MPS; write it to ``destination`` if given.

    A path destination also receives ``<path>.names.csv`` mapping generated
    to semantic names.  Returns the MPS text as bytes.
    """
    problem.check()
    if problem.n_rows > 1_000_000 or problem.n_cols > 1_000_000:
        raise MpsError("too many rows or columns for 7-character names")
    rn, cn = row_names(problem.n_rows), col_names(problem.n_cols)
    out: List[str] = [f"NAME          {name[:8]}", "ROWS", f" N  {OBJ_ROW}"]
    for i, s in enumerate(problem.senses):
        out.append(_record(str(s), rn[i]))
    out.append("COLUMNS")
    order = np.lexsort((problem.rows, problem.cols))
    rows, cols, vals = problem.rows[order], problem.cols[order], problem.vals[order]
    starts = np.searchsorted(cols, np.arange(problem.n_cols + 1))
    for j in range(problem.n_cols):
        lo, hi = starts[j], starts[j + 1]
        if problem.c[j] != 0.0 or lo == hi:
            out.append(_record("", cn[j], OBJ_ROW, _num(problem.c[j], f"cost of {problem.col_name(j)}")))
        for k in range(lo, hi):
            where = f"({problem.row_name(int(rows[k]))}, {problem.col_name(j)})"
            out.append(_record("", cn[j], rn[rows[k]], _num(vals[k], where)))
    out.append("RHS")
    if problem.objective_offset != 0.0:
        out.append(_record("", RHS_SET, OBJ_ROW, _num(-problem.objective_offset, "objective offset")))
    for i in range(problem.n_rows):
        if problem.rhs[i] != 0.0:
            out.append(_record("", RHS_SET, rn[i], _num(problem.rhs[i], f"rhs of {problem.row_name(i)}")))
    out.append("RANGES")
    out.append("BOUNDS")
    for j in range(problem.n_cols):
        lb, ub = problem.lb[j], problem.ub[j]
        where = f"bound of {problem.col_name(j)}"
        if lb == ub:
            out.append(_record("FX", BND_SET, cn[j], _num(lb, where)))
            continue
        if lb == -np.inf and ub == np.inf:
            out.append(_record("FR", BND_SET, cn[j]))
            continue
        if lb == -np.inf:
            out.append(_record("MI", BND_SET, cn[j]))
        elif lb != 0.0 or ub < 0.0:
            out.append(_record("LO", BND_SET, cn[j], _num(lb, where)))
        if ub != np.inf:
            out.append(_record("UP", BND_SET, cn[j], _num(ub, where)))
    out.append("ENDATA")
    text = "\n".join(out) + "\n"

    if destination is not None:
        if hasattr(destination, "write"):
            destination.write(text)  # type: ignore[union-attr]
        else:
            path = os.fspath(destination)
            with open(path, "w", encoding="ascii", newline="\n") as fh:
                fh.write(text)
            write_name_map(problem, path + ".names.csv")
    return text.encode("ascii")


def write_name_map(problem: LpProblem, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["generated_name", "semantic_name"])
        for i, nm in enumerate(row_names(problem.n_rows)):
            w.writerow([nm, problem.row_name(i)])
        for j, nm in enumerate(col_names(problem.n_cols)):
            w.writerow([nm, problem.col_name(j)])


def read_interchange(source: Union[str, bytes, os.PathLike, IO[str]]) -> LpProblem:
    """Parse MPS text produced by :func:`write_interchange` (or any fixed/free MPS
    without RANGES entries) back into an :class:`LpProblem`."""
    if isinstance(source, bytes):
        text = source.decode("ascii")
    elif hasattr(source, "read"):
        text = source.read()  # type: ignore[union-attr]
    elif isinstance(source, (str, os.PathLike)) and os.path.exists(source):
        with open(source, encoding="ascii") as fh:
            text = fh.read()
    else:
        text = str(source)

    section = None
    obj_name = None
    row_ids: Dict[str, int] = {}
    senses: List[str] = []
    col_ids: Dict[str, int] = {}
    cost: Dict[int, float] = {}
    trip: List[Tuple[int, int, float]] = []
    rhs: Dict[int, float] = {}
    offset = 0.0
    bounds: Dict[int, List[float]] = {}

    def col_id(nm: str) -> int:
        if nm not in col_ids:
            col_ids[nm] = len(col_ids)
        return col_ids[nm]

    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("*"):
            continue
        if not line.startswith(" "):
            section = line.split()[0]
            continue
        tok = line.split()
        if section == "ROWS":
            kind, nm = tok
            if kind == "N":
                if obj_name is None:
                    obj_name = nm
                continue
            row_ids[nm] = len(senses)
            senses.append(kind)
        elif section == "COLUMNS":
            j = col_id(tok[0])
            for rn, v in zip(tok[1::2], tok[2::2]):
                if rn == obj_name:
                    cost[j] = cost.get(j, 0.0) + float(v)
                else:
                    trip.append((row_ids[rn], j, float(v)))
        elif section == "RHS":
            for rn, v in zip(tok[1::2], tok[2::2]):
                if rn == obj_name:
                    offset = -float(v)
                else:
                    rhs[row_ids[rn]] = float(v)
        elif section == "RANGES":
            raise MpsError(f"line {lineno}: RANGES entries are not supported")
        elif section == "BOUNDS":
            kind, j = tok[0], col_id(tok[2])
            b = bounds.setdefault(j, [0.0, np.inf])
            v = float(tok[3]) if len(tok) > 3 else 0.0
            if kind == "FX":
                b[0] = b[1] = v
            elif kind == "FR":
                b[0], b[1] = -np.inf, np.inf
            elif kind == "MI":
                b[0] = -np.inf
            elif kind == "PL":
                b[1] = np.inf
            elif kind == "LO":
                b[0] = v
            elif kind == "UP":
                b[1] = v
            else:
                raise MpsError(f"line {lineno}: unsupported bound type {kind}")
        elif section == "NAME":
            continue
        else:
            raise MpsError(f"line {lineno}: data outside a known section")

    n, m = len(col_ids), len(senses)
    trip.sort(key=lambda t: (t[0], t[1]))
    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    for j, (a, b) in bounds.items():
        lb[j], ub[j] = a, b
    return LpProblem(
        rows=np.array([t[0] for t in trip], dtype=np.int64),
        cols=np.array([t[1] for t in trip], dtype=np.int64),
        vals=np.array([t[2] for t in trip], dtype=float),
        senses=np.array(senses, dtype="<U1"),
        rhs=np.array([rhs.get(i, 0.0) for i in range(m)]),
        c=np.array([cost.get(j, 0.0) for j in range(n)]),
        lb=lb,
        ub=ub,
        objective_offset=offset,
    )


def check_fixed_format(text: Union[str, bytes]) -> List[str]:
    """Return layout problems of fixed-format MPS text (empty list means conformant).

    Checks section order, record field positions, name lengths, known row and
    bound types, references to declared rows, and contiguous column blocks.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii")
    problems: List[str] = []
    seen: List[str] = []
    rows: Dict[str, str] = {}
    finished_cols = set()
    current_col = None
    for lineno, line in enumerate(text.splitlines(), 1):
        where = f"line {lineno}"
        if not line.strip():
            continue
        if any(ord(ch) > 126 for ch in line):
            problems.append(f"{where}: non-ASCII character")
        if line.startswith("*"):
            continue
        if not line.startswith(" "):
            head = line.split()[0]
            if head not in SECTIONS:
                problems.append(f"{where}: unknown section {head}")
                continue
            if seen and SECTIONS.index(head) <= SECTIONS.index(seen[-1]):
                problems.append(f"{where}: section {head} out of order")
            seen.append(head)
            continue
        sec = seen[-1] if seen else None
        f1, f2, f3 = line[1:3].strip(), line[4:12].strip(), line[14:22].strip()
        f4 = line[24:].strip()
        if sec == "ROWS":
            if f1 not in ("N", "E", "L", "G"):
                problems.append(f"{where}: bad row type {f1!r}")
            if not f2 or len(line[4:].strip()) > 8 or line[3] != " ":
                problems.append(f"{where}: row name outside columns 5-12")
            rows[f2] = f1
        elif sec in ("COLUMNS", "RHS"):
            if f1 or line[1:4].strip():
                problems.append(f"{where}: field 1 must be blank")
            if line[12:14].strip() or line[22:24].strip():
                problems.append(f"{where}: text in separator columns")
            if f3 not in rows:
                problems.append(f"{where}: unknown row {f3!r}")
            try:
                float(f4)
            except ValueError:
                problems.append(f"{where}: bad number {f4!r}")
            if sec == "COLUMNS" and f2 != current_col:
                if f2 in finished_cols:
                    problems.append(f"{where}: column {f2} not contiguous")
                if current_col is not None:
                    finished_cols.add(current_col)
                current_col = f2
        elif sec == "BOUNDS":
            if f1 not in ("UP", "LO", "FX", "FR", "MI", "PL"):
                problems.append(f"{where}: bad bound type {f1!r}")
            if f1 in ("UP", "LO", "FX"):
                try:
                    float(f4)
                except ValueError:
                    problems.append(f"{where}: bad number {f4!r}")
            if f3 not in finished_cols and f3 != current_col:
                problems.append(f"{where}: bound on undeclared column {f3!r}")
        elif sec == "RANGES":
            continue
        elif sec is None:
            problems.append(f"{where}: record before NAME")
    missing = [s for s in SECTIONS if s not in seen and s != "RANGES"]
    if missing:
        problems.append("missing sections: " + ", ".join(missing))
    if seen and seen[-1] != "ENDATA":
        problems.append("file does not end with ENDATA")
    return problems


def to_text(problem: LpProblem) -> str:
    buf = io.StringIO()
    write_interchange(problem, buf)
    return buf.getvalue()
