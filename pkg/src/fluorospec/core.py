"""Spectrum data model and preprocessing."""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

CHANNELS = 1024
GRID_START_NM = 350.0
GRID_END_NM = 800.0
STD_EPS = 1e-12


class RejectedInputError(ValueError):
    """Input violates an operation's preconditions."""


class DegenerateInputError(RejectedInputError):
    """Input is well-formed but numerically degenerate (e.g. zero spread)."""


class NumericalError(RuntimeError):
    """A computation produced non-finite values (e.g. NaN training loss)."""


class QualityClass(enum.IntEnum):
    EVOO = 0
    VOO = 1
    LOO = 2

    @classmethod
    def parse(cls, name):
        try:
            return cls[name]
        except KeyError:
            raise RejectedInputError(
                f"unknown label {name!r}; expected one of {[c.name for c in cls]}"
            ) from None


N_CLASSES = len(QualityClass)


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WavelengthGrid:
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 1 or v.shape[0] != CHANNELS:
            raise RejectedInputError(f"grid must have {CHANNELS} channels, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or not np.all(np.diff(v) > 0):
            raise RejectedInputError("grid must be finite and strictly increasing")
        object.__setattr__(self, "values", v)

    @classmethod
    def linear(cls, start=GRID_START_NM, end=GRID_END_NM):
        return cls(np.linspace(start, end, CHANNELS))

    def __len__(self):
        return self.values.shape[0]

    def __eq__(self, other):
        if not isinstance(other, WavelengthGrid):
            return NotImplemented
        return self is other or np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())


DEFAULT_GRID = WavelengthGrid.linear()


@dataclass(frozen=True, eq=False)
class Spectrum:
    intensities: np.ndarray
    grid: WavelengthGrid = DEFAULT_GRID

    def __post_init__(self):
        x = _frozen(self.intensities)
        if x.shape != (len(self.grid),):
            raise RejectedInputError(
                f"spectrum has shape {x.shape}, grid has {len(self.grid)} channels"
            )
        if not np.all(np.isfinite(x)):
            raise RejectedInputError("spectrum contains non-finite values")
        object.__setattr__(self, "intensities", x)

    def __eq__(self, other):
        if not isinstance(other, Spectrum):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.intensities, other.intensities)

    __hash__ = None


@dataclass(frozen=True)
class LabeledSpectrum:
    spectrum: Spectrum
    sample_id: str
    repetition_index: int
    label: QualityClass

    def __post_init__(self):
        if int(self.repetition_index) < 0:
            raise RejectedInputError("repetition_index must be >= 0")
        object.__setattr__(self, "label", QualityClass(self.label))


@dataclass(frozen=True)
class SpectraSet:
    grid: WavelengthGrid
    records: tuple = ()

    def __post_init__(self):
        records = tuple(self.records)
        seen = set()
        labels = {}
        for rec in records:
            if rec.spectrum.grid != self.grid:
                raise RejectedInputError(f"record {rec.sample_id}/{rec.repetition_index} uses a different grid")
            key = (rec.sample_id, rec.repetition_index)
            if key in seen:
                raise RejectedInputError(f"duplicate (sample_id, repetition) {key}")
            seen.add(key)
            if labels.setdefault(rec.sample_id, rec.label) != rec.label:
                raise RejectedInputError(f"sample {rec.sample_id!r} carries more than one label")
        object.__setattr__(self, "records", records)

    def __len__(self):
        return len(self.records)

    def class_counts(self):
        """Number of spectra per class."""
        c = Counter(r.label for r in self.records)
        return {q: c.get(q, 0) for q in QualityClass}

    def sample_counts(self):
        """Number of distinct samples per class."""
        ids = {}
        for r in self.records:
            ids.setdefault(r.sample_id, r.label)
        c = Counter(ids.values())
        return {q: c.get(q, 0) for q in QualityClass}


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    """Rows of features with class indices and the sample id of each row."""

    rows: np.ndarray
    labels: np.ndarray
    sample_ids: tuple = field(default=None)

    def __post_init__(self):
        rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if rows.ndim != 2:
            raise RejectedInputError(f"rows must be 2-D, got shape {rows.shape}")
        ids = self.sample_ids
        if ids is None:
            ids = tuple(str(i) for i in range(rows.shape[0]))
        ids = tuple(ids)
        if not (rows.shape[0] == labels.shape[0] == len(ids)):
            raise RejectedInputError(
                f"row/label/id counts differ: {rows.shape[0]}/{labels.shape[0]}/{len(ids)}"
            )
        if labels.size and (labels.min() < 0 or labels.max() >= N_CLASSES):
            raise RejectedInputError("labels must be class indices in [0, 3)")
        rows.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sample_ids", ids)

    def __len__(self):
        return self.rows.shape[0]

    @property
    def n_features(self):
        return self.rows.shape[1]

    def subset(self, index):
        index = np.asarray(index, dtype=np.int64)
        return FeatureMatrix(self.rows[index], self.labels[index],
                             tuple(self.sample_ids[i] for i in index))


def subtract_background(s, background):
    """Channel-wise ``s - background``."""
    if s.grid != background.grid:
        raise RejectedInputError("spectrum and background use different wavelength grids")
    out = s.intensities - background.intensities
    if not np.all(np.isfinite(out)):
        raise RejectedInputError("background subtraction produced non-finite values")
    return Spectrum(out, s.grid)


def zscore(x):
    """Zero-mean, unit population-std rescaling of a 1-D array."""
    x = np.asarray(x, dtype=np.float64)
    centered = x - x.mean()
    # second pass removes the rounding error of the first mean, which matters
    # when the offset is large compared with the spread
    centered -= centered.mean()
    std = np.sqrt(np.mean(centered * centered))
    if not std > STD_EPS:
        raise DegenerateInputError(f"spectrum has no spread (std={std:.3g})")
    return centered / std


def zscore_normalize(s):
    return Spectrum(zscore(s.intensities), s.grid)


def build_feature_matrix(d, normalize=False):
    if len(d) == 0:
        raise RejectedInputError("dataset is empty")
    rows = np.empty((len(d), len(d.grid)))
    for i, rec in enumerate(d.records):
        if normalize:
            try:
                rows[i] = zscore(rec.spectrum.intensities)
            except DegenerateInputError as exc:
                raise DegenerateInputError(
                    f"record {i} (sample {rec.sample_id!r}, repetition {rec.repetition_index}): {exc}"
                ) from exc
        else:
            rows[i] = rec.spectrum.intensities
    labels = np.array([int(r.label) for r in d.records], dtype=np.int64)
    return FeatureMatrix(rows, labels, tuple(r.sample_id for r in d.records))


def records_from_matrix(fm, grid=DEFAULT_GRID):
    """Inverse of :func:`build_feature_matrix` (without normalization).

    Repetition indices are assigned by order of appearance of each sample id.
    """
    seen = Counter()
    records = []
    for row, label, sid in zip(fm.rows, fm.labels, fm.sample_ids):
        records.append(LabeledSpectrum(Spectrum(row, grid), sid, seen[sid], QualityClass(int(label))))
        seen[sid] += 1
    return SpectraSet(grid, tuple(records))
