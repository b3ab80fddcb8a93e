from .fit import FitResult, fit_avoided_crossing, invert_magnon_frequency, usc_bound
from .ridges import extract_ridges
from .synth import RidgeSet, SpectralMap, synth_ridges, synth_s21_map

__all__ = [
    "FitResult",
    "RidgeSet",
    "SpectralMap",
    "extract_ridges",
    "fit_avoided_crossing",
    "invert_magnon_frequency",
    "synth_ridges",
    "synth_s21_map",
    "usc_bound",
]
