"""Result bundles and their CSV/JSON emission."""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

SIG_DIGITS = 12

GRID_FILE = "capital_grid.csv"
SERIES_FILE = "average_capital.csv"
BARS_FILE = "bars.csv"
JSON_FILE = "result.json"
PROVENANCE_FILE = "provenance.json"


@dataclass
class ResultBundle:
    grid: np.ndarray | None
    series: np.ndarray  # average capital after iterations 1..n
    bars: list[tuple[int, str, float]] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    provenance: dict[str, Any] = field(default_factory=dict)


def fmt(x: float) -> str:
    # adding 0.0 folds -0.0 into 0.0
    return format(float(x) + 0.0, f".{SIG_DIGITS}g")


def rounded(x: float) -> float:
    return float(fmt(x))


def grid_csv(grid: np.ndarray) -> str:
    return "\n".join(",".join(fmt(v) for v in row) for row in np.asarray(grid)) + "\n"


def series_csv(series: Sequence[float]) -> str:
    lines = ["iteration,average_capital"]
    lines += [f"{t + 1},{fmt(v)}" for t, v in enumerate(series)]
    return "\n".join(lines) + "\n"


def bars_csv(bars: Sequence[tuple[int, str, float]]) -> str:
    lines = ["K,game,value"]
    lines += [f"{k},{game},{fmt(v)}" for k, game, v in bars]
    return "\n".join(lines) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (float, np.floating)):
        return rounded(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def bundle_document(bundle: ResultBundle) -> dict:
    return _jsonable({
        "grid": bundle.grid if bundle.grid is not None else None,
        "series": [{"iteration": t + 1, "average_capital": v}
                   for t, v in enumerate(bundle.series)],
        "bars": [{"K": k, "game": g, "value": v} for k, g, v in bundle.bars],
        "summary": bundle.summary,
        "provenance": bundle.provenance,
    })


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(bundle: ResultBundle, out_dir: str | Path,
         formats: Sequence[str] = ("csv", "json")) -> list[Path]:
    """Write the bundle; CSV files get a provenance sidecar."""
    out_dir = Path(out_dir)
    written = []

    def put(name, text):
        path = out_dir / name
        write_atomic(path, text)
        written.append(path)

    if "csv" in formats:
        if bundle.grid is not None:
            put(GRID_FILE, grid_csv(bundle.grid))
        put(SERIES_FILE, series_csv(bundle.series))
        if bundle.bars:
            put(BARS_FILE, bars_csv(bundle.bars))
        put(PROVENANCE_FILE, dumps(_jsonable(bundle.provenance)))
    if "json" in formats:
        put(JSON_FILE, dumps(bundle_document(bundle)))
    return written


def load_json(path: str | Path) -> ResultBundle:
    doc = json.loads(Path(path).read_text())
    grid = None if doc["grid"] is None else np.array(doc["grid"], dtype=float)
    return ResultBundle(
        grid=grid,
        series=np.array([row["average_capital"] for row in doc["series"]], dtype=float),
        bars=[(row["K"], row["game"], row["value"]) for row in doc["bars"]],
        summary=doc["summary"],
        provenance=doc["provenance"],
    )
