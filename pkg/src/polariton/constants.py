"""Physical constants shared by every module (CODATA 2018 via scipy)."""

from dataclasses import dataclass

from scipy import constants as _sc


@dataclass(frozen=True)
class PhysicalConstants:
    bohr_magneton_over_planck: float  # GHz/T
    mu0: float  # T m / A
    hbar: float  # J s
    speed_of_light: float  # m / s
    bohr_magneton: float  # J / T


CONSTANTS = PhysicalConstants(
    bohr_magneton_over_planck=_sc.physical_constants["Bohr magneton in Hz/T"][0] * 1e-9,
    mu0=_sc.mu_0,
    hbar=_sc.hbar,
    speed_of_light=_sc.c,
    bohr_magneton=_sc.physical_constants["Bohr magneton"][0],
)

MUB_H = CONSTANTS.bohr_magneton_over_planck
