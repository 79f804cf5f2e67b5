"""Branch and region tables with deterministic CSV/JSON round-trips.

Floats are serialized with 17 significant digits, which round-trips IEEE
doubles exactly; failed rows keep their marker in the status column and
leave the value fields empty.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

__all__ = ["BranchRow", "BranchTable", "RegionRow", "RegionTable", "emit", "parse_table"]

BRANCH_COLUMNS = [
    "lambda",
    "branch",
    "energy",
    "linf_norm",
    "residual",
    "positive_on_plus",
    "dead_cores",
    "iterations",
    "status",
]

REGION_COLUMNS = ["p", "q", "classification", "picone_holds", "picone_min", "existence_p_gt_2q"]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _parse_float(text: str) -> float | None:
    return None if text == "" else float(text)


def _parse_int(text: str) -> int | None:
    return None if text == "" else int(text)


def _parse_bool(text: str) -> bool | None:
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    raise ConfigError(f"bad boolean field: {text!r}")


@dataclass(frozen=True)
class BranchRow:
    lam: float
    branch: str
    energy: float | None = None
    linf_norm: float | None = None
    residual: float | None = None
    positive_on_plus: bool | None = None
    dead_cores: int | None = None
    iterations: int | None = None
    status: str = "ok"

    def as_record(self) -> dict:
        return {
            "lambda": self.lam,
            "branch": self.branch,
            "energy": self.energy,
            "linf_norm": self.linf_norm,
            "residual": self.residual,
            "positive_on_plus": self.positive_on_plus,
            "dead_cores": self.dead_cores,
            "iterations": self.iterations,
            "status": self.status,
        }


@dataclass(frozen=True)
class BranchTable:
    rows: tuple[BranchRow, ...]

    def sorted(self) -> "BranchTable":
        return BranchTable(tuple(sorted(self.rows, key=lambda r: (r.branch, r.lam))))

    def ok_rows(self) -> tuple[BranchRow, ...]:
        return tuple(r for r in self.rows if r.status == "ok")

    def to_csv(self) -> str:
        lines = [",".join(BRANCH_COLUMNS)]
        for r in self.rows:
            rec = r.as_record()
            lines.append(",".join(_fmt(rec[c]) for c in BRANCH_COLUMNS))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        parts = []
        for r in self.rows:
            rec = r.as_record()
            fields_txt = []
            for c in BRANCH_COLUMNS:
                v = rec[c]
                if v is None:
                    rendered = "null"
                elif isinstance(v, bool):
                    rendered = "true" if v else "false"
                elif isinstance(v, float):
                    rendered = format(v, ".17g")
                elif isinstance(v, int):
                    rendered = str(v)
                else:
                    rendered = json.dumps(v)
                fields_txt.append(f'"{c}": {rendered}')
            parts.append("  {" + ", ".join(fields_txt) + "}")
        return "[\n" + ",\n".join(parts) + "\n]\n"


@dataclass(frozen=True)
class RegionRow:
    p: float
    q: float
    classification: str
    picone_holds: bool
    picone_min: float
    existence_p_gt_2q: bool


@dataclass(frozen=True)
class RegionTable:
    rows: tuple[RegionRow, ...]

    def to_csv(self) -> str:
        lines = [",".join(REGION_COLUMNS)]
        for r in self.rows:
            rec = {
                "p": r.p,
                "q": r.q,
                "classification": r.classification,
                "picone_holds": r.picone_holds,
                "picone_min": r.picone_min,
                "existence_p_gt_2q": r.existence_p_gt_2q,
            }
            lines.append(",".join(_fmt(rec[c]) for c in REGION_COLUMNS))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        parts = []
        for r in self.rows:
            parts.append(
                "  {"
                + ", ".join(
                    [
                        f'"p": {format(r.p, ".17g")}',
                        f'"q": {format(r.q, ".17g")}',
                        f'"classification": {json.dumps(r.classification)}',
                        f'"picone_holds": {"true" if r.picone_holds else "false"}',
                        f'"picone_min": {format(r.picone_min, ".17g")}',
                        f'"existence_p_gt_2q": {"true" if r.existence_p_gt_2q else "false"}',
                    ]
                )
                + "}"
            )
        return "[\n" + ",\n".join(parts) + "\n]\n"


def emit(table, path, format: str = "csv") -> None:
    """Write a table; format is csv or json."""
    if format == "csv":
        text = table.to_csv()
    elif format == "json":
        text = table.to_json()
    else:
        raise ConfigError(f"unknown output format: {format!r}")
    Path(path).write_text(text)


def _branch_row_from_record(rec: dict) -> BranchRow:
    return BranchRow(
        lam=float(rec["lambda"]),
        branch=rec["branch"],
        energy=rec["energy"] if rec["energy"] is None else float(rec["energy"]),
        linf_norm=rec["linf_norm"] if rec["linf_norm"] is None else float(rec["linf_norm"]),
        residual=rec["residual"] if rec["residual"] is None else float(rec["residual"]),
        positive_on_plus=rec["positive_on_plus"],
        dead_cores=rec["dead_cores"] if rec["dead_cores"] is None else int(rec["dead_cores"]),
        iterations=rec["iterations"] if rec["iterations"] is None else int(rec["iterations"]),
        status=rec["status"],
    )


def parse_table(path) -> BranchTable:
    """Read a branch table back from a csv or json file (field-exact)."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("["):
        records = json.loads(text)
        return BranchTable(tuple(_branch_row_from_record(r) for r in records))
    lines = [ln for ln in text.splitlines() if ln != ""]
    header = lines[0].split(",")
    if header != BRANCH_COLUMNS:
        raise ConfigError(f"unexpected CSV header: {header}")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        rec = dict(zip(BRANCH_COLUMNS, cells))
        rows.append(
            BranchRow(
                lam=float(rec["lambda"]),
                branch=rec["branch"],
                energy=_parse_float(rec["energy"]),
                linf_norm=_parse_float(rec["linf_norm"]),
                residual=_parse_float(rec["residual"]),
                positive_on_plus=_parse_bool(rec["positive_on_plus"]),
                dead_cores=_parse_int(rec["dead_cores"]),
                iterations=_parse_int(rec["iterations"]),
                status=rec["status"],
            )
        )
    return BranchTable(tuple(rows))
