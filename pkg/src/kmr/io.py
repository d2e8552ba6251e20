"""Reading and writing two-column series, warps and study outputs."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import FunctionalDataset
from .errors import DataError
from .warp import WarpFunction


@dataclass(frozen=True)
class SeriesFile:
    path: Path
    dataset: FunctionalDataset
    row_count: int
    span: tuple[float, float]
    header: tuple[str, ...] | None


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_series(path) -> SeriesFile:
    """Parse a ``time,value`` CSV file.

    Lines starting with ``#`` and blank lines are skipped.  The first
    remaining row is taken as a header when any of its cells is not
    numeric.  Rows are sorted by time; repeated times are an error.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot read {path}: {exc}") from None

    header = None
    times, values = [], []
    seen_data = False
    for lineno, row in enumerate(csv.reader(text.splitlines()), start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells) or cells[0].startswith("#"):
            continue
        if len(cells) != 2:
            raise DataError(f"parse-error: {path}:{lineno}: expected 2 columns, got {len(cells)}")
        if not seen_data and header is None and not all(_is_number(c) for c in cells):
            header = tuple(cells)
            continue
        for col, cell in enumerate(cells, start=1):
            if not _is_number(cell) or not math.isfinite(float(cell)):
                raise DataError(f"parse-error: {path}:{lineno}: column {col}: {cell!r} is not a finite number")
        seen_data = True
        times.append(float(cells[0]))
        values.append(float(cells[1]))

    if len(times) < 2:
        raise DataError(f"{path}: fewer than 2 data rows")
    t = np.array(times)
    order = np.argsort(t, kind="stable")
    t_sorted = t[order]
    dup = np.flatnonzero(np.diff(t_sorted) == 0)
    if dup.size:
        raise DataError(f"duplicate-time: {path}: time {t_sorted[dup[0]]!r} appears more than once")
    ds = FunctionalDataset(t_sorted, np.array(values)[order])
    return SeriesFile(path, ds, len(times), ds.span, header)


def load_csv(path) -> FunctionalDataset:
    return read_series(path).dataset


def _fmt(x) -> str:
    return repr(float(x))


def write_rows(path, header, columns) -> None:
    """Write equal-length numeric columns as CSV with round-trip decimals."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        if header:
            writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_fmt(v) for v in row])


def save_csv(path, dataset: FunctionalDataset, header=("time", "value")) -> None:
    write_rows(path, header, (dataset.times, dataset.values))


def save_warp(path, warp: WarpFunction) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(warp.to_json() + "\n", encoding="utf-8")


def load_warp(path) -> WarpFunction:
    try:
        text = Path(path).read_text(encoding="utf-8")
        return WarpFunction.from_json(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read warp from {path}: {exc}") from None


def save_study(outdir, metrics) -> dict:
    """Write ``metrics.csv``, ``criterion_pairs.csv`` and ``summary.json``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_rows(outdir / "metrics.csv", ("t", "bias", "sd", "mse"),
               (metrics.eval_grid, metrics.bias, metrics.sd, metrics.mse))
    pairs = np.asarray(metrics.criterion_pairs).reshape(-1, 2)
    write_rows(outdir / "criterion_pairs.csv", ("l_n_truth", "l_n_fitted"),
               (pairs[:, 0], pairs[:, 1]))
    summary = metrics.summary()
    (outdir / "summary.json").write_text(json.dumps(summary) + "\n", encoding="utf-8")
    return summary


def read_table(path) -> dict[str, np.ndarray]:
    """Read a headed numeric CSV written by :func:`write_rows`."""
    with Path(path).open(encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(c) for c in r] for r in body]).reshape(len(body), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def bundled_sample() -> tuple[FunctionalDataset, FunctionalDataset]:
    """Small synthetic target/source pair shipped with the package.

    Both series come from simulation scenario 1 (hinge warp on a shared
    equispaced grid) with ``n = 120`` and master seed 1, run 0; see
    :func:`kmr.simulation.gen_run`.
    """
    from importlib.resources import files

    root = files("kmr") / "data"
    return load_csv(root / "sample_target.csv"), load_csv(root / "sample_source.csv")
