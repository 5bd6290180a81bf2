"""MPS reader/writer and the best-known-objective side file."""

from __future__ import annotations

import csv
import gzip
import io
import math
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .model import MipInstance, normalized

SECTIONS = ("NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA")
_ORDER = {s: k for k, s in enumerate(SECTIONS)}
# OBJSENSE is accepted anywhere before COLUMNS
_ORDER["OBJSENSE"] = _ORDER["NAME"]

# fixed-format field columns (1-based, inclusive)
_FIXED = ((2, 3), (5, 12), (15, 22), (25, 36), (40, 47), (50, 61))


class MpsError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


def _fixed_fields(line: str):
    out = []
    for lo, hi in _FIXED:
        tok = line[lo - 1:hi].strip()
        out.append(tok)
    while out and not out[-1]:
        out.pop()
    return out


def _is_num(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def _pairs_ok(toks) -> bool:
    """(name, value) pairs after an optional leading name: values must be numeric."""
    if len(toks) >= 2 and toks[1].strip("'\"").upper() == "MARKER":
        return True
    start = 2 if len(toks) % 2 else 1
    return all(_is_num(t) for t in toks[start::2])


def _fields(line: str, expected: tuple[int, ...], check=None):
    toks = line.split()
    if len(toks) in expected and (check is None or check(toks)):
        return toks
    # names with embedded blanks only make sense in fixed format
    fixed = _fixed_fields(line)
    if line[:1] == " " and fixed and fixed[0] == "":
        fixed = fixed[1:]
    return fixed if len(fixed) in expected else toks


def _num(tok: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise MpsError(f"expected a number, got {tok!r}", lineno) from None


def parse_mps(source, name: str | None = None) -> MipInstance:
    """Parse fixed- or free-format MPS text from a stream or string.

    >= rows are negated into <= rows, ranged rows are split into two <= rows
    and maximization problems are stored negated.
    """
    if isinstance(source, str):
        source = io.StringIO(source)

    section = None
    seen = set()
    prob_name = name
    maximize = False
    obj_row = None
    row_sense: dict[str, str] = {}
    row_order: list[str] = []
    cols: dict[str, int] = {}
    col_names: list[str] = []
    entries: dict[str, dict[int, float]] = {}
    obj = {}
    integer = set()
    in_int = False
    rhs: dict[str, float] = {}
    ranges: dict[str, float] = {}
    lb: dict[int, float] = {}
    ub: dict[int, float] = {}
    ended = False

    for lineno, raw in enumerate(source, 1):
        line = raw.rstrip("\n\r")
        if not line.strip() or line.lstrip().startswith("*"):
            continue
        if not line[0].isspace():
            head = line.split()
            key = head[0].upper()
            if key not in _ORDER:
                raise MpsError(f"unknown section {head[0]!r}", lineno)
            if key in seen:
                raise MpsError(f"duplicate section {key}", lineno)
            if section is not None and _ORDER[key] < _ORDER[section]:
                raise MpsError(f"section {key} out of order after {section}", lineno)
            if key == "OBJSENSE" and "ROWS" in seen:
                raise MpsError("OBJSENSE must precede ROWS", lineno)
            if key in ("COLUMNS", "RHS", "RANGES", "BOUNDS") and "ROWS" not in seen:
                raise MpsError(f"section {key} before ROWS", lineno)
            if key in ("RHS", "RANGES", "BOUNDS") and "COLUMNS" not in seen:
                raise MpsError(f"section {key} before COLUMNS", lineno)
            if key == "COLUMNS" and not row_sense and obj_row is None:
                raise MpsError("empty ROWS section", lineno)
            seen.add(key)
            section = key
            if key == "NAME":
                if prob_name is None and len(head) > 1:
                    prob_name = line[4:].strip() or head[1]
            elif key == "OBJSENSE" and len(head) > 1:
                maximize = _objsense(head[1], lineno)
            elif key == "ENDATA":
                ended = True
                break
            continue

        if section is None:
            raise MpsError("data line before any section", lineno)
        if section == "NAME":
            raise MpsError("unexpected data in NAME section", lineno)

        if section == "OBJSENSE":
            maximize = _objsense(line.strip(), lineno)

        elif section == "ROWS":
            toks = _fields(line, (2,))
            if len(toks) != 2:
                raise MpsError("ROWS entries need a sense and a name", lineno)
            sense, rname = toks[0].upper(), toks[1]
            if sense not in ("N", "L", "G", "E"):
                raise MpsError(f"unknown row sense {toks[0]!r}", lineno)
            if rname in row_sense or rname == obj_row:
                raise MpsError(f"duplicate row {rname!r}", lineno)
            if sense == "N":
                if obj_row is None:
                    obj_row = rname
                else:
                    row_sense[rname] = "N"  # extra free rows are dropped
                continue
            row_sense[rname] = sense
            row_order.append(rname)
            entries[rname] = {}

        elif section == "COLUMNS":
            toks = _fields(line, (3, 5), _pairs_ok)
            if len(toks) >= 3 and toks[1].strip("'\"").upper() == "MARKER":
                marker = toks[2].strip("'\"").upper()
                if marker == "INTORG":
                    in_int = True
                elif marker == "INTEND":
                    in_int = False
                else:
                    raise MpsError(f"unknown marker {toks[2]!r}", lineno)
                continue
            if len(toks) not in (3, 5):
                raise MpsError("COLUMNS entries need a column and 1 or 2 (row, value) pairs", lineno)
            cname = toks[0]
            if cname not in cols:
                cols[cname] = len(col_names)
                col_names.append(cname)
            j = cols[cname]
            if in_int:
                integer.add(j)
            for k in range(1, len(toks), 2):
                rname, val = toks[k], _num(toks[k + 1], lineno)
                if rname == obj_row:
                    if j in obj:
                        raise MpsError(f"duplicate entry for column {cname!r} in objective", lineno)
                    obj[j] = val
                elif rname in entries:
                    if j in entries[rname]:
                        raise MpsError(f"duplicate entry for column {cname!r} in row {rname!r}", lineno)
                    entries[rname][j] = val
                elif row_sense.get(rname) == "N":
                    continue
                else:
                    raise MpsError(f"unknown row {rname!r}", lineno)

        elif section in ("RHS", "RANGES"):
            toks = _fields(line, (2, 3, 4, 5), _pairs_ok)
            if len(toks) % 2 == 0:  # set name omitted
                toks = [""] + toks
            target = rhs if section == "RHS" else ranges
            for k in range(1, len(toks), 2):
                rname, val = toks[k], _num(toks[k + 1], lineno)
                if rname == obj_row and section == "RHS":
                    target[rname] = val
                elif rname in entries:
                    target[rname] = val
                elif row_sense.get(rname) == "N":
                    continue
                else:
                    raise MpsError(f"unknown row {rname!r}", lineno)

        elif section == "BOUNDS":
            toks = _fields(line, (3, 4))
            btype = toks[0].upper() if toks else ""
            if btype in ("FR", "MI", "PL", "BV") and len(toks) == 2:
                toks = [toks[0], "", toks[1]]
            elif len(toks) == 3 and btype not in ("FR", "MI", "PL", "BV"):
                toks = [toks[0], ""] + toks[1:]
            if len(toks) < 3:
                raise MpsError("malformed BOUNDS entry", lineno)
            cname = toks[2]
            if cname not in cols:
                raise MpsError(f"unknown column {cname!r}", lineno)
            j = cols[cname]
            val = _num(toks[3], lineno) if len(toks) > 3 else None
            if btype in ("UP", "LO", "FX", "LI", "UI") and val is None:
                raise MpsError(f"bound {btype} needs a value", lineno)
            if btype == "UP":
                ub[j] = val
                if val < 0 and j not in lb:
                    lb[j] = -math.inf
            elif btype == "LO":
                lb[j] = val
            elif btype == "FX":
                lb[j] = ub[j] = val
            elif btype == "FR":
                lb[j], ub[j] = -math.inf, math.inf
            elif btype == "MI":
                lb[j] = -math.inf
            elif btype == "PL":
                ub[j] = math.inf
            elif btype == "BV":
                lb[j], ub[j] = 0.0, 1.0
                integer.add(j)
            elif btype == "LI":
                lb[j] = val
                integer.add(j)
            elif btype == "UI":
                ub[j] = val
                integer.add(j)
            else:
                raise MpsError(f"unsupported bound type {toks[0]!r}", lineno)
            if lb.get(j, 0.0) > ub.get(j, math.inf):
                raise MpsError(f"lower bound exceeds upper bound for column {cname!r}", lineno)

    if not ended:
        raise MpsError("missing ENDATA")
    if "ROWS" not in seen:
        raise MpsError("missing ROWS section")
    if obj_row is None and not row_order:
        raise MpsError("empty ROWS section")

    n = len(col_names)
    c = np.zeros(n)
    for j, v in obj.items():
        c[j] = v
    lo = np.array([lb.get(j, 0.0) for j in range(n)])
    hi = np.array([ub.get(j, math.inf) for j in range(n)])

    ineq_rows, ineq_rhs, ineq_names = [], [], []
    eq_rows, eq_rhs, eq_names = [], [], []
    for rname in row_order:
        sense = row_sense[rname]
        coefs = entries[rname]
        r = rhs.get(rname, 0.0)
        if rname in ranges:
            R = ranges[rname]
            if sense == "E":
                lo_r, hi_r = (r, r + abs(R)) if R >= 0 else (r + R, r)
            elif sense == "L":
                lo_r, hi_r = r - abs(R), r
            else:
                lo_r, hi_r = r, r + abs(R)
            ineq_rows.append(coefs)
            ineq_rhs.append(hi_r)
            ineq_names.append(rname + "_hi")
            ineq_rows.append({j: -v for j, v in coefs.items()})
            ineq_rhs.append(-lo_r)
            ineq_names.append(rname + "_lo")
        elif sense == "L":
            ineq_rows.append(coefs)
            ineq_rhs.append(r)
            ineq_names.append(rname)
        elif sense == "G":
            ineq_rows.append({j: -v for j, v in coefs.items()})
            ineq_rhs.append(-r)
            ineq_names.append(rname)
        else:
            eq_rows.append(coefs)
            eq_rhs.append(r)
            eq_names.append(rname)

    const = -rhs.get(obj_row, 0.0) if obj_row is not None else 0.0
    return normalized(
        name=prob_name or "unnamed",
        c=-c if maximize else c,
        A=_csr(ineq_rows, n),
        b=np.array(ineq_rhs, dtype=float),
        D=_csr(eq_rows, n),
        f=np.array(eq_rhs, dtype=float),
        lb=lo,
        ub=hi,
        integer=np.array(sorted(integer), dtype=np.int64),
        maximize=maximize,
        obj_constant=const,
        var_names=tuple(col_names),
        row_names=tuple(ineq_names + eq_names),
    )


def _objsense(tok: str, lineno: int) -> bool:
    tok = tok.upper()
    if tok in ("MAX", "MAXIMIZE"):
        return True
    if tok in ("MIN", "MINIMIZE"):
        return False
    raise MpsError(f"unknown objective sense {tok!r}", lineno)


def _csr(rows, n) -> sp.csr_matrix:
    indptr, indices, data = [0], [], []
    for coefs in rows:
        for j in sorted(coefs):
            indices.append(j)
            data.append(coefs[j])
        indptr.append(len(indices))
    return sp.csr_matrix((np.array(data, dtype=float), np.array(indices, dtype=np.int64),
                          np.array(indptr, dtype=np.int64)), shape=(len(rows), n))


def read_mps(path) -> MipInstance:
    path = Path(path)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "rt", encoding="utf-8") as fh:
        inst = parse_mps(fh)
    if inst.name == "unnamed":
        inst = _renamed(inst, instance_stem(path))
    return inst


def instance_stem(path) -> str:
    name = Path(path).name
    for suffix in (".gz", ".mps"):
        if name.lower().endswith(suffix):
            name = name[: -len(suffix)]
    return name


def _renamed(inst: MipInstance, name: str) -> MipInstance:
    from dataclasses import replace
    return replace(inst, name=name)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_mps(inst: MipInstance, sink) -> None:
    """Write ``inst`` as free-format MPS (<= and = rows, original objective sense)."""
    n = inst.n
    names = list(inst.var_names) if inst.var_names else [f"x{j}" for j in range(n)]
    rnames = [f"r{i}" for i in range(inst.m)]
    c = -inst.c if inst.maximize else inst.c
    w = sink.write
    w(f"NAME {inst.name}\n")
    if inst.maximize:
        w("OBJSENSE\n    MAX\n")
    w("ROWS\n N obj\n")
    for i in range(inst.m):
        w(f" {'E' if inst.is_eq[i] else 'L'} {rnames[i]}\n")
    w("COLUMNS\n")
    in_int = False
    Mc = inst.Mc
    for j in range(n):
        if inst.is_integer[j] != in_int:
            in_int = not in_int
            w(f"    MARKER 'MARKER' '{'INTORG' if in_int else 'INTEND'}'\n")
        lo, hi = Mc.indptr[j], Mc.indptr[j + 1]
        wrote = False
        if c[j] != 0:
            w(f"    {names[j]} obj {_fmt(c[j])}\n")
            wrote = True
        for i, v in zip(Mc.indices[lo:hi], Mc.data[lo:hi]):
            w(f"    {names[j]} {rnames[i]} {_fmt(v)}\n")
            wrote = True
        if not wrote:
            w(f"    {names[j]} obj 0.0\n")
    if in_int:
        w("    MARKER 'MARKER' 'INTEND'\n")
    w("RHS\n")
    for i in range(inst.m):
        if inst.rhs[i] != 0:
            w(f"    RHS {rnames[i]} {_fmt(inst.rhs[i])}\n")
    if inst.obj_constant:
        w(f"    RHS obj {_fmt(-inst.obj_constant)}\n")
    w("BOUNDS\n")
    for j in range(n):
        lo, hi = inst.lb[j], inst.ub[j]
        if lo == hi:
            w(f" FX BND {names[j]} {_fmt(lo)}\n")
            continue
        if lo == -math.inf and hi == math.inf:
            w(f" FR BND {names[j]}\n")
            continue
        if lo == -math.inf:
            w(f" MI BND {names[j]}\n")
        elif lo != 0 or hi < 0:
            w(f" LO BND {names[j]} {_fmt(lo)}\n")
        if hi != math.inf:
            w(f" UP BND {names[j]} {_fmt(hi)}\n")
    w("ENDATA\n")


def read_best_known(path) -> dict[str, float]:
    """Load ``instance,best_objective`` rows into a name -> value map."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"instance", "best_objective"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: expected header 'instance,best_objective'")
        for row in reader:
            out[row["instance"].strip()] = float(row["best_objective"])
    return out
