"""Writing an experiment report to disk."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .harness import ExperimentReport


class ReportError(OSError):
    pass


def _atomic_write(path: Path, text: str) -> None:
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise ReportError(f"cannot write {path}: {exc.strerror or exc}") from exc


def report_json(report: ExperimentReport) -> str:
    return json.dumps(report.data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def grid_csv(grid: np.ndarray) -> str:
    lines = ["x,y,df"] + [f"{x!r},{y!r},{v!r}" for x, y, v in grid.tolist()]
    return "\n".join(lines) + "\n"


def roc_csv(points) -> str:
    return "\n".join(["fpr,tpr"] + [f"{a!r},{b!r}" for a, b in points]) + "\n"


def ga_log(history: list[dict]) -> str:
    return "".join(json.dumps(h, sort_keys=True) + "\n" for h in history)


def emit_report(report: ExperimentReport, out_dir) -> list[Path]:
    """Write ``report.json`` and the per-approach CSV/text artefacts."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ReportError(f"cannot create {out}: {exc.strerror or exc}") from exc
    files = {"report.json": report_json(report)}
    for aid, entry in report.data["approaches"].items():
        best = entry["best"]
        files[f"roc_{aid}.csv"] = roc_csv(best["roc"])
        files[f"circuit_{aid}.txt"] = best["circuit_text"] + "\n" + best["gate_list"]
        files[f"gatrace_{aid}.log"] = ga_log(report.ga_traces.get(str(entry["base"]), []))
        if aid in report.grids:
            files[f"decision_grid_{aid}.csv"] = grid_csv(report.grids[aid])
        if aid in report.refine_traces:
            files[f"refine_trace_{aid}.csv"] = report.refine_traces[aid].to_csv()
    written = []
    for name, text in files.items():
        path = out / name
        _atomic_write(path, text)
        written.append(path)
    return written


def load_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
