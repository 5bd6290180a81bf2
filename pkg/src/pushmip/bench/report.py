"""Summaries (overall and by nonzero quartile) and CSV input/output."""

from __future__ import annotations

import csv
from decimal import ROUND_HALF_UP, Decimal
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..model import GapReport
from .harness import RunRecord

ABSENT = "-"

RECORD_COLUMNS = (
    "instance", "heuristic", "seed", "status", "time", "objective", "gap", "outlier",
    "best_known", "iterations", "n_vars", "n_int", "n_constrs", "n_nonzeros", "reason",
)


@dataclass(frozen=True)
class HeuristicSummary:
    heuristic: str
    n_total: int
    n_solved: int
    n_outlier: int
    avg_gap: Optional[float]
    avg_time: Optional[float]

    @property
    def success_rate(self) -> float:
        return self.n_solved / self.n_total if self.n_total else 0.0


@dataclass(frozen=True)
class QuartileRow:
    quartile: int
    n_instances: int
    mean_vars: float
    mean_constrs: float
    mean_nonzeros: float
    per_heuristic: tuple  # HeuristicSummary per heuristic


@dataclass(frozen=True)
class SummaryTable:
    rows: tuple
    quartiles: tuple = field(default=())

    def row(self, heuristic: str) -> HeuristicSummary:
        for r in self.rows:
            if r.heuristic == heuristic:
                return r
        raise KeyError(heuristic)


def _mean(values: Sequence[float]) -> Optional[float]:
    values = list(values)
    return sum(values) / len(values) if values else None


def _heuristic_order(records: Sequence[RunRecord]) -> list[str]:
    seen = []
    for r in records:
        if r.heuristic not in seen:
            seen.append(r.heuristic)
    return seen


def summarize_heuristic(heuristic: str, records: Sequence[RunRecord]) -> HeuristicSummary:
    recs = [r for r in records if r.heuristic == heuristic]
    solved = [r for r in recs if r.solved]
    outliers = [r for r in solved if r.gap is not None and r.gap.is_outlier]
    gaps = [r.gap.gap for r in solved if r.gap is not None and not r.gap.is_outlier]
    return HeuristicSummary(
        heuristic=heuristic,
        n_total=len(recs),
        n_solved=len(solved),
        n_outlier=len(outliers),
        avg_gap=_mean(gaps),
        avg_time=_mean(r.elapsed for r in recs),
    )


def quartile_groups(sizes: dict) -> list[list[str]]:
    """Split instance names into 4 groups by ascending nonzeros; remainder goes first."""
    names = sorted(sizes, key=lambda k: (sizes[k], k))
    q, r = divmod(len(names), 4)
    groups, start = [], 0
    for k in range(4):
        size = q + (1 if k < r else 0)
        groups.append(names[start:start + size])
        start += size
    return groups


def summarize(records: Sequence[RunRecord], quartiles: bool = False) -> SummaryTable:
    records = list(records)
    heuristics = _heuristic_order(records)
    rows = tuple(summarize_heuristic(h, records) for h in heuristics)
    if not quartiles:
        return SummaryTable(rows=rows)
    dims = {}
    for r in records:
        dims[r.instance] = (r.n_vars, r.n_constrs, r.n_nonzeros)
    groups = quartile_groups({k: v[2] for k, v in dims.items()})
    qrows = []
    for k, names in enumerate(groups, 1):
        member = set(names)
        sub = [r for r in records if r.instance in member]
        qrows.append(QuartileRow(
            quartile=k,
            n_instances=len(names),
            mean_vars=_mean([dims[n][0] for n in names]) or 0.0,
            mean_constrs=_mean([dims[n][1] for n in names]) or 0.0,
            mean_nonzeros=_mean([dims[n][2] for n in names]) or 0.0,
            per_heuristic=tuple(summarize_heuristic(h, sub) for h in heuristics),
        ))
    return SummaryTable(rows=rows, quartiles=tuple(qrows))


# ---------------------------------------------------------------------------
# CSV


def _cell(v) -> str:
    if v is None:
        return ABSENT
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_csv(records: Iterable[RunRecord], sink, timing: bool = True) -> None:
    """One row per record; ``-`` marks absent values. ``timing=False`` blanks the time column."""
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(RECORD_COLUMNS)
    for r in records:
        gap = r.gap
        w.writerow([
            r.instance, r.heuristic, r.seed, r.status,
            _cell(r.elapsed) if timing else ABSENT,
            _cell(r.objective),
            _cell(gap.gap if gap else None),
            _cell(gap.is_outlier if gap else None),
            _cell(gap.best_known if gap else None),
            r.iterations, r.n_vars, r.n_int, r.n_constrs, r.n_nonzeros,
            _cell(r.reason),
        ])


def _opt_float(s: str) -> Optional[float]:
    return None if s == ABSENT else float(s)


def read_records_csv(source) -> list[RunRecord]:
    out = []
    for row in csv.DictReader(source):
        gap = None
        if row["best_known"] != ABSENT:
            gap = GapReport(gap=_opt_float(row["gap"]), is_outlier=row["outlier"] == "1",
                            best_known=float(row["best_known"]))
        out.append(RunRecord(
            instance=row["instance"], heuristic=row["heuristic"], seed=int(row["seed"]),
            status=row["status"], elapsed=_opt_float(row["time"]) or 0.0,
            objective=_opt_float(row["objective"]), gap=gap,
            n_vars=int(row["n_vars"]), n_int=int(row["n_int"]),
            n_constrs=int(row["n_constrs"]), n_nonzeros=int(row["n_nonzeros"]),
            iterations=int(row["iterations"]),
            reason=None if row["reason"] == ABSENT else row["reason"],
        ))
    return out


def emit_summary_csv(table: SummaryTable, sink, percent: bool = False) -> None:
    w = csv.writer(sink, lineterminator="\n")
    w.writerow(["quartile", "heuristic", "n_total", "n_solved", "n_outlier", "avg_gap",
                "avg_time", "success"])
    blocks = [("all", table.rows)] + [(str(q.quartile), q.per_heuristic) for q in table.quartiles]
    for label, rows in blocks:
        for r in rows:
            w.writerow([label, r.heuristic, r.n_total, r.n_solved, r.n_outlier,
                        _cell(r.avg_gap), _cell(r.avg_time), format_rate(r.success_rate, percent)])


def format_rate(rate: float, percent: bool = True) -> str:
    """Percent with two decimals, halves rounded up (393/800 -> 49.13%)."""
    if not percent:
        return repr(rate)
    pct = (Decimal(repr(float(rate))) * 100).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    return f"{pct}%"


def format_summary(table: SummaryTable, percent_gap: bool = False) -> str:
    """Plain-text rendering in the layout of the overall comparison table."""
    names = [r.heuristic for r in table.rows]
    width = max([12] + [len(n) + 2 for n in names])

    def gap(v):
        if v is None:
            return ABSENT
        return f"{100 * v:.2f}%" if percent_gap else f"{v:.4f}"

    lines = ["".ljust(12) + "".join(n.rjust(width) for n in names)]
    lines.append("N_solved".ljust(12) + "".join(str(r.n_solved).rjust(width) for r in table.rows))
    lines.append("N_outlier".ljust(12) + "".join(str(r.n_outlier).rjust(width) for r in table.rows))
    lines.append("Avg Gap".ljust(12) + "".join(gap(r.avg_gap).rjust(width) for r in table.rows))
    lines.append("Success".ljust(12) + "".join(format_rate(r.success_rate).rjust(width) for r in table.rows))
    for q in table.quartiles:
        lines.append("")
        lines.append(f"Quartile {q.quartile}: {q.n_instances} instances, "
                     f"avg vars {q.mean_vars:.1f}, constrs {q.mean_constrs:.1f}, "
                     f"nonzeros {q.mean_nonzeros:.1f}")
        for r in q.per_heuristic:
            t = ABSENT if r.avg_time is None else f"{r.avg_time:.3f}s"
            lines.append(f"  {r.heuristic:<16} solved {r.n_solved:>3}  gap {gap(r.avg_gap):>8}  time {t:>9}")
    return "\n".join(lines)
