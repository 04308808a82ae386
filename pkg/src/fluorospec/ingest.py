"""Dataset and report files.

Dataset: UTF-8 CSV, ``\\n`` line endings, header
``sample_id,repetition,label,i0,...,i1023`` and one row per spectrum with
intensities written as ``%.17g``. The wavelength grid lives in a JSON sidecar
``<path>.meta.json``.

Report: JSON ``{"format_version", "records": [{algorithm, params,
mean_accuracy, std_accuracy, n_splits}, ...]}`` or an aligned text table.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .core import (CHANNELS, LabeledSpectrum, QualityClass, RejectedInputError,
                   SpectraSet, Spectrum, WavelengthGrid)

FORMAT_VERSION = 1
HEADER_PREFIX = ("sample_id", "repetition", "label")


class ParseError(RejectedInputError):
    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def header_line(channels=CHANNELS):
    return ",".join(HEADER_PREFIX + tuple(f"i{k}" for k in range(channels)))


def meta_path(path):
    path = Path(path)
    return path.with_name(path.name + ".meta.json")


def save_dataset(d, path):
    path = Path(path)
    lines = [header_line(len(d.grid))]
    for rec in d.records:
        if "," in rec.sample_id or "\n" in rec.sample_id:
            raise RejectedInputError(f"sample_id {rec.sample_id!r} contains a delimiter")
        vals = ",".join("%.17g" % v for v in rec.spectrum.intensities)
        lines.append(f"{rec.sample_id},{rec.repetition_index},{rec.label.name},{vals}")
    meta = {
        "format_version": FORMAT_VERSION,
        "channel_count": len(d.grid),
        "grid_start_nm": float(d.grid.values[0]),
        "grid_end_nm": float(d.grid.values[-1]),
        "wavelengths_nm": d.grid.values.tolist(),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(meta_path(path), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=1)
        fh.write("\n")


def _load_grid(path):
    mp = meta_path(path)
    if not mp.exists():
        return WavelengthGrid.linear()
    with open(mp, encoding="utf-8") as fh:
        try:
            meta = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(mp, exc.lineno, f"invalid JSON: {exc.msg}") from None
    if meta.get("format_version") != FORMAT_VERSION:
        raise ParseError(mp, 1, f"unsupported format_version {meta.get('format_version')!r}")
    if meta.get("channel_count") != CHANNELS:
        raise ParseError(mp, 1, f"channel_count must be {CHANNELS}, got {meta.get('channel_count')!r}")
    if "wavelengths_nm" in meta:
        return WavelengthGrid(meta["wavelengths_nm"])
    return WavelengthGrid.linear(meta["grid_start_nm"], meta["grid_end_nm"])


def load_dataset(path):
    """Read a dataset written by :func:`save_dataset`.

    Raises ``FileNotFoundError``/``OSError`` for I/O problems and
    :class:`ParseError` (with the 1-based line number) for malformed content.
    """
    path = Path(path)
    grid = _load_grid(path)
    expected_header = header_line(len(grid))
    n_cols = 3 + len(grid)
    records = []
    seen = {}
    labels = {}
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n")
        if header != expected_header:
            raise ParseError(path, 1, "header does not match "
                             f"'sample_id,repetition,label,i0,...,i{len(grid) - 1}'")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                raise ParseError(path, lineno, "empty line")
            cells = line.split(",")
            if len(cells) != n_cols:
                raise ParseError(path, lineno, f"expected {n_cols} columns, got {len(cells)}")
            sid, rep, lab = cells[0], cells[1], cells[2]
            try:
                rep = int(rep)
            except ValueError:
                raise ParseError(path, lineno, f"repetition {rep!r} is not an integer") from None
            if rep < 0:
                raise ParseError(path, lineno, "repetition must be >= 0")
            if lab not in QualityClass.__members__:
                raise ParseError(path, lineno, f"unknown label {lab!r}")
            label = QualityClass[lab]
            try:
                values = np.array([float(c) for c in cells[3:]])
            except ValueError as exc:
                raise ParseError(path, lineno, f"non-numeric intensity: {exc}") from None
            if not np.all(np.isfinite(values)):
                raise ParseError(path, lineno, "non-finite intensity")
            if (sid, rep) in seen:
                raise ParseError(path, lineno, f"duplicate (sample_id, repetition) ({sid}, {rep}), "
                                 f"first seen on line {seen[(sid, rep)]}")
            seen[(sid, rep)] = lineno
            if labels.setdefault(sid, label) != label:
                raise ParseError(path, lineno, f"sample {sid!r} has conflicting labels")
            records.append(LabeledSpectrum(Spectrum(values, grid), sid, rep, label))
    return SpectraSet(grid, tuple(records))


def save_spectrum(s, path):
    """Write a single spectrum (e.g. a background) as one CSV line."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join("%.17g" % v for v in s.intensities) + "\n")


def load_spectrum(path, grid=None):
    grid = grid or WavelengthGrid.linear()
    with open(path, encoding="utf-8") as fh:
        text = fh.read().strip()
    try:
        values = [float(c) for c in text.split(",")]
    except ValueError as exc:
        raise ParseError(path, 1, f"non-numeric intensity: {exc}") from None
    if len(values) != len(grid):
        raise ParseError(path, 1, f"expected {len(grid)} values, got {len(values)}")
    return Spectrum(values, grid)


# -- reports -----------------------------------------------------------------

def report_records(report):
    return [
        {
            "algorithm": row.algorithm,
            "params": row.params,
            "mean_accuracy": row.mean_accuracy,
            "std_accuracy": row.std_accuracy,
            "n_splits": row.n_splits,
        }
        for row in report.rows
    ]


def format_table(report, digits=2):
    rows = [(row.label, f"{row.mean_accuracy:.{digits}f}", f"{row.std_accuracy:.{digits}f}")
            for row in report.rows]
    head = ("Algorithm", "mean", "std")
    w0 = max(len(head[0]), *(len(r[0]) for r in rows))
    w1 = max(len(head[1]), *(len(r[1]) for r in rows))
    w2 = max(len(head[2]), *(len(r[2]) for r in rows))
    lines = [f"{head[0]:<{w0}}  {head[1]:>{w1}}  {head[2]:>{w2}}"]
    lines += [f"{a:<{w0}}  {b:>{w1}}  {c:>{w2}}" for a, b, c in rows]
    return "\n".join(lines) + "\n"


def report_json(report):
    doc = {"format_version": FORMAT_VERSION, "plan": report.plan, "records": report_records(report)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def save_report(report, path, format="json"):
    if not report.rows:
        raise RejectedInputError("report is empty")
    if format == "json":
        text = report_json(report)
    elif format == "table":
        text = format_table(report)
    else:
        raise RejectedInputError(f"unknown report format {format!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def load_report(path):
    from .evaluation import EvalReport, EvalRow

    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
    try:
        rows = [EvalRow(r["algorithm"], r["params"], float(r["mean_accuracy"]),
                        float(r["std_accuracy"]), int(r["n_splits"]))
                for r in doc["records"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(path, 1, f"malformed report record: {exc}") from None
    for r in rows:
        if not (0.0 <= r.mean_accuracy <= 1.0 and r.std_accuracy >= 0 and math.isfinite(r.std_accuracy)):
            raise ParseError(path, 1, f"out-of-range statistics for {r.algorithm}")
    return EvalReport(rows, doc.get("plan", {}))
