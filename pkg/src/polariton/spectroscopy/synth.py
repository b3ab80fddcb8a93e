"""Forward model: transmission maps and ridge sets generated from a HybridModel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, ValidationError
from ..model import HybridModel, normal_modes

KAPPA_CAVITY = 0.005  # GHz
KAPPA_MAGNON = 0.020  # GHz
FLOOR = 1e-6  # linear |S21| background, -120 dB


@dataclass
class SpectralMap:
    """|S21| in dB on a (field, frequency) grid; rows follow ``b_grid``."""

    b_grid: np.ndarray
    f_grid: np.ndarray
    magnitude_db: np.ndarray

    def __post_init__(self):
        self.b_grid = np.asarray(self.b_grid, dtype=float)
        self.f_grid = np.asarray(self.f_grid, dtype=float)
        self.magnitude_db = np.asarray(self.magnitude_db, dtype=float)
        for name, g in (("b_grid", self.b_grid), ("f_grid", self.f_grid)):
            if g.ndim != 1 or g.size < 2 or np.any(np.diff(g) <= 0):
                raise ValidationError(f"{name} must be strictly ascending with >= 2 points")
        if self.magnitude_db.shape != (self.b_grid.size, self.f_grid.size):
            raise ValidationError(
                f"magnitude shape {self.magnitude_db.shape} does not match grids "
                f"({self.b_grid.size}, {self.f_grid.size})"
            )


@dataclass
class RidgeSet:
    """Ridge points; ``branch_id`` 0 is the lowest-frequency branch."""

    b: np.ndarray
    f: np.ndarray
    branch_id: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        self.branch_id = np.asarray(self.branch_id, dtype=int)
        self.weight = np.asarray(self.weight, dtype=float)
        n = self.b.size
        if not (self.f.size == self.branch_id.size == self.weight.size == n):
            raise ValidationError("ridge arrays must have equal length")
        for k in np.unique(self.branch_id):
            if np.any(np.diff(self.b[self.branch_id == k]) <= 0):
                raise ValidationError(f"branch {k}: field values must strictly increase")

    def __len__(self):
        return self.b.size

    @property
    def branches(self) -> list[int]:
        return [int(k) for k in np.unique(self.branch_id)]

    def branch(self, k: int):
        sel = self.branch_id == k
        return self.b[sel], self.f[sel]

    def select(self, mask) -> "RidgeSet":
        mask = np.asarray(mask, dtype=bool)
        return RidgeSet(self.b[mask], self.f[mask], self.branch_id[mask], self.weight[mask])

    @classmethod
    def empty(cls) -> "RidgeSet":
        return cls(np.zeros(0), np.zeros(0), np.zeros(0, dtype=int), np.zeros(0))


def cavity_fraction_upper(omega_c, omega_m, g):
    """Photon content of the upper polariton from the RWA mixing angle."""
    theta = 0.5 * np.arctan2(2.0 * np.asarray(g, dtype=float), np.asarray(omega_c) - omega_m)
    return np.cos(theta) ** 2


def synth_s21_map(
    m: HybridModel,
    b_grid,
    f_grid,
    linewidths=(KAPPA_CAVITY, KAPPA_MAGNON),
    noise_db: float = 0.0,
    seed: int = 0,
) -> SpectralMap:
    """Two Lorentzian polariton lines per field column, weighted by photon content.

    Each branch has amplitude equal to its photon fraction and a linewidth
    interpolated between the cavity and magnon values by the same fraction.
    Gaussian noise of standard deviation ``noise_db`` is added on the dB scale.
    """
    kc, km = map(float, linewidths)
    if not (kc > 0 and km > 0):
        raise ValidationError("linewidths must be positive")
    if noise_db < 0:
        raise ValidationError("noise_db must be >= 0")
    b = np.asarray(b_grid, dtype=float)
    f = np.asarray(f_grid, dtype=float)
    wm = m.dispersion.frequency(b)
    try:
        lo, hi = normal_modes(m.omega_c, wm, m.g_cm)
    except DomainError as exc:
        raise DomainError(f"normal modes undefined on b_grid: {exc}") from None
    frac_hi = cavity_fraction_upper(m.omega_c, wm, m.g_cm)
    s = np.zeros((b.size, f.size))
    for centre, frac in ((lo, 1.0 - frac_hi), (hi, frac_hi)):
        half = 0.5 * (frac * kc + (1.0 - frac) * km)
        s += frac[:, None] * half[:, None] ** 2 / ((f[None, :] - centre[:, None]) ** 2 + half[:, None] ** 2)
    db = 20.0 * np.log10(s + FLOOR)
    if noise_db > 0:
        db = db + np.random.default_rng(seed).normal(0.0, noise_db, size=db.shape)
    return SpectralMap(b, f, db)


def synth_ridges(m: HybridModel, b_grid, rel_noise: float = 0.0, seed: int = 0) -> RidgeSet:
    """Both normal-mode branches at every field, with multiplicative Gaussian noise."""
    b = np.asarray(b_grid, dtype=float)
    lo, hi = hybrid = normal_modes(m.omega_c, m.dispersion.frequency(b), m.g_cm)
    rng = np.random.default_rng(seed)
    freqs = np.concatenate(hybrid)
    if rel_noise > 0:
        freqs = freqs * (1.0 + rel_noise * rng.standard_normal(freqs.size))
    return RidgeSet(
        b=np.concatenate([b, b]),
        f=freqs,
        branch_id=np.repeat([0, 1], b.size),
        weight=np.ones(2 * b.size),
    )
