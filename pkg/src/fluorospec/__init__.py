"""Fluorescence-spectrum classification of olive-oil quality grades."""
from .core import (CHANNELS, DEFAULT_GRID, DegenerateInputError, FeatureMatrix, LabeledSpectrum,
                   NumericalError, QualityClass, RejectedInputError, SpectraSet, Spectrum,
                   WavelengthGrid, build_feature_matrix, subtract_background, zscore_normalize)
from .kernels import BACKEND

__version__ = "0.1.0"
