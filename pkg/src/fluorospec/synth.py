"""Synthetic fluorescence spectra for the three olive-oil quality classes.

Each spectrum is ``baseline + sum of Gaussian bands + detector noise``. A
sample (one physical oil) draws its latent band positions, amplitudes and
overall gain once; its repetitions share them and differ only by noise.

The default numbers below are tuning choices for an emulated sensor, in
arbitrary intensity units: a strong chlorophyll band near 678 nm, a broad
weaker band near 720 nm, nothing of note below 650 nm. EVOO samples are tight
around the reference shape, VOO samples vary more (mostly in the 720 nm band),
LOO samples vary most and are dimmer.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import seeding
from .core import (DEFAULT_GRID, LabeledSpectrum, QualityClass, RejectedInputError,
                   SpectraSet, Spectrum, WavelengthGrid)


@dataclass(frozen=True)
class PeakSpec:
    center_nm: float
    center_jitter_nm: float
    width_nm: float
    amplitude_mean: float
    amplitude_std: float

    def __post_init__(self):
        if not self.width_nm > 0:
            raise RejectedInputError("width_nm must be > 0")
        if not self.amplitude_mean > 0:
            raise RejectedInputError("amplitude_mean must be > 0")
        if self.center_jitter_nm < 0 or self.amplitude_std < 0:
            raise RejectedInputError("jitter and amplitude_std must be >= 0")


@dataclass(frozen=True)
class ClassProfile:
    """Generative parameters for one quality class.

    ``sample_variability`` multiplies every between-sample draw (band
    position jitter, log-amplitude spread, log-gain spread); zero makes all
    samples of the class identical. ``noise_std`` is the per-channel
    detector noise of a single acquisition.
    """

    label: QualityClass
    peaks: tuple
    overall_scale: float = 1.0
    sample_variability: float = 1.0
    noise_std: float = 0.0
    baseline_level: float = 0.0
    gain_std: float = 0.15

    def __post_init__(self):
        object.__setattr__(self, "label", QualityClass(self.label))
        object.__setattr__(self, "peaks", tuple(
            p if isinstance(p, PeakSpec) else PeakSpec(**p) for p in self.peaks))
        if self.overall_scale <= 0:
            raise RejectedInputError("overall_scale must be > 0")
        for name in ("sample_variability", "noise_std", "baseline_level", "gain_std"):
            if getattr(self, name) < 0:
                raise RejectedInputError(f"{name} must be >= 0")


def default_profiles():
    return (
        ClassProfile(
            QualityClass.EVOO,
            peaks=(PeakSpec(678.0, 1.0, 8.5, 1.00, 0.06),
                   PeakSpec(720.0, 2.0, 20.0, 0.30, 0.10)),
            overall_scale=1.0, sample_variability=1.0,
            noise_std=0.001, baseline_level=0.02),
        ClassProfile(
            QualityClass.VOO,
            peaks=(PeakSpec(678.0, 1.0, 8.5, 1.00, 0.08),
                   PeakSpec(720.0, 2.5, 20.0, 0.34, 0.25)),
            overall_scale=0.95, sample_variability=1.5,
            noise_std=0.001, baseline_level=0.02),
        ClassProfile(
            QualityClass.LOO,
            peaks=(PeakSpec(678.0, 1.0, 8.5, 1.00, 0.10),
                   PeakSpec(720.0, 2.5, 20.0, 0.36, 0.25)),
            overall_scale=0.55, sample_variability=2.0,
            noise_std=0.001, baseline_level=0.02),
    )


@dataclass(frozen=True)
class SynthConfig:
    profiles: tuple = field(default_factory=default_profiles)
    samples_per_class: tuple = (12, 8, 7)
    repetitions_per_sample: int = 20
    seed: int = 0
    grid_start_nm: float = DEFAULT_GRID.values[0]
    grid_end_nm: float = DEFAULT_GRID.values[-1]

    def __post_init__(self):
        profiles = tuple(p if isinstance(p, ClassProfile) else _profile_from_dict(p)
                         for p in self.profiles)
        if [p.label for p in profiles] != list(QualityClass):
            raise RejectedInputError("profiles must list EVOO, VOO, LOO in that order")
        spc = tuple(int(n) for n in self.samples_per_class)
        if len(spc) != len(QualityClass) or min(spc) < 1:
            raise RejectedInputError("samples_per_class needs three counts >= 1")
        if int(self.repetitions_per_sample) < 1:
            raise RejectedInputError("repetitions_per_sample must be >= 1")
        object.__setattr__(self, "profiles", profiles)
        object.__setattr__(self, "samples_per_class", spc)
        object.__setattr__(self, "repetitions_per_sample", int(self.repetitions_per_sample))
        object.__setattr__(self, "seed", seeding.check_seed(self.seed))

    @property
    def grid(self):
        return WavelengthGrid.linear(self.grid_start_nm, self.grid_end_nm)

    def to_dict(self):
        d = asdict(self)
        for p in d["profiles"]:
            p["label"] = QualityClass(p["label"]).name
        d["samples_per_class"] = list(self.samples_per_class)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "profiles" in d:
            d["profiles"] = tuple(_profile_from_dict(p) for p in d["profiles"])
        if "samples_per_class" in d:
            d["samples_per_class"] = tuple(d["samples_per_class"])
        return cls(**d)

    def scaled(self, noise=1.0, variability=1.0):
        """Copy with every profile's noise and between-sample spread multiplied."""
        profiles = tuple(replace(p, noise_std=p.noise_std * noise,
                                 sample_variability=p.sample_variability * variability)
                         for p in self.profiles)
        return replace(self, profiles=profiles)


def _profile_from_dict(d):
    d = dict(d)
    label = d.pop("label")
    label = QualityClass.parse(label) if isinstance(label, str) else QualityClass(label)
    peaks = tuple(PeakSpec(**p) for p in d.pop("peaks"))
    return ClassProfile(label, peaks, **d)


@dataclass(frozen=True)
class SampleLatent:
    centers_nm: np.ndarray
    amplitudes: np.ndarray
    gain: float


def draw_latent(profile, rng):
    """Per-sample band centers, amplitudes and gain."""
    s = profile.sample_variability
    n = len(profile.peaks)
    z_center = rng.standard_normal(n)
    z_amp = rng.standard_normal(n)
    z_gain = rng.standard_normal()
    centers = np.array([p.center_nm + s * p.center_jitter_nm * z
                        for p, z in zip(profile.peaks, z_center)])
    amps = np.array([p.amplitude_mean * np.exp(s * p.amplitude_std * z)
                     for p, z in zip(profile.peaks, z_amp)])
    gain = profile.overall_scale * float(np.exp(s * profile.gain_std * z_gain))
    return SampleLatent(centers, amps, gain)


def peak_signal(profile, latent, grid=DEFAULT_GRID):
    """Noise-free band contribution of one sample."""
    lam = grid.values
    out = np.zeros_like(lam)
    for p, c, a in zip(profile.peaks, latent.centers_nm, latent.amplitudes):
        out += a * np.exp(-0.5 * ((lam - c) / p.width_nm) ** 2)
    return latent.gain * out


def baseline_spectrum(profile, grid=DEFAULT_GRID):
    """Instrument background: a gentle linear ramp at ``baseline_level``."""
    lam = grid.values
    ramp = 1.0 + 0.5 * (lam - lam[0]) / (lam[-1] - lam[0])
    return Spectrum(profile.baseline_level * ramp, grid)


def generate_sample_spectra(profile, sample_id, rng, repetitions=20, grid=DEFAULT_GRID):
    """``repetitions`` acquisitions of one sample, as a list of Spectrum."""
    latent = draw_latent(profile, rng)
    clean = baseline_spectrum(profile, grid).intensities + peak_signal(profile, latent, grid)
    np.maximum(clean, 0.0, out=clean)
    out = []
    for _ in range(repetitions):
        if profile.noise_std > 0:
            x = clean + profile.noise_std * rng.standard_normal(clean.shape[0])
        else:
            x = clean.copy()
        out.append(Spectrum(x, grid))
    return out


def sample_id_for(label, index):
    return f"{QualityClass(label).name}-{index + 1:02d}"


def generate_dataset(cfg=None):
    """Full labeled dataset; a pure function of ``cfg``.

    Sample ``i`` of class ``c`` draws from stream ``(seed, "synth", c, i)``,
    so resizing one class leaves the others untouched.
    """
    cfg = cfg or SynthConfig()
    grid = cfg.grid
    records = []
    for profile, n_samples in zip(cfg.profiles, cfg.samples_per_class):
        c = int(profile.label)
        for i in range(n_samples):
            sid = sample_id_for(c, i)
            rng = seeding.stream(cfg.seed, "synth", c, i)
            spectra = generate_sample_spectra(profile, sid, rng, cfg.repetitions_per_sample, grid)
            records.extend(LabeledSpectrum(s, sid, r, profile.label) for r, s in enumerate(spectra))
    return SpectraSet(grid, tuple(records))
