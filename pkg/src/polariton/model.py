"""
Closed-form cavity-magnon polariton model.

All frequencies are linear frequencies in GHz, fields in tesla. The two-mode
normal-mode formula is homogeneous in frequency, so the 2*pi factors cancel
everywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from numpy.polynomial import polynomial as P

from .constants import MUB_H
from .errors import DomainError, ValidationError

# ---------------------------------------------------------------------------
# magnon dispersions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Linear:
    """Zeeman line ``g_eff * muB/h * (B + B_off)``."""

    g_eff: float
    b_off: float

    @property
    def slope(self) -> float:
        return self.g_eff * MUB_H

    def frequency(self, b):
        return self.slope * (np.asarray(b, dtype=float) + self.b_off)

    def derivatives(self, b):
        b = np.asarray(b, dtype=float)
        return np.full_like(b, self.slope), np.zeros_like(b)


@dataclass(frozen=True)
class Polynomial:
    """Power series in B; ``coeffs[k]`` has units GHz/T**k."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValidationError("polynomial dispersion needs at least one coefficient")

    def frequency(self, b):
        return P.polyval(np.asarray(b, dtype=float), self.coeffs)

    def derivatives(self, b):
        b = np.asarray(b, dtype=float)
        c1 = P.polyder(self.coeffs, 1) if len(self.coeffs) > 1 else [0.0]
        c2 = P.polyder(self.coeffs, 2) if len(self.coeffs) > 2 else [0.0]
        return P.polyval(b, c1) + 0.0 * b, P.polyval(b, c2) + 0.0 * b


@dataclass(frozen=True)
class SmoothTurnover:
    """Soft minimum of two asymptotes, ``-w*ln(exp(-a/w) + exp(-b/w))``.

    ``rising`` and ``falling`` are the positive- and negative-slope limits;
    ``blend_width`` (GHz) sets how sharply the turnover is rounded.
    """

    rising: Linear
    falling: Linear
    blend_width: float

    def __post_init__(self):
        if not self.blend_width > 0:
            raise ValidationError("blend_width must be positive")

    def _weight(self, b):
        # weight on the rising asymptote; expit((fall - rise)/w) without overflow
        a = self.rising.frequency(b)
        f = self.falling.frequency(b)
        return 0.5 * (1.0 + np.tanh(0.5 * (f - a) / self.blend_width)), a, f

    def frequency(self, b):
        a = self.rising.frequency(b)
        f = self.falling.frequency(b)
        w = self.blend_width
        return -w * np.logaddexp(-a / w, -f / w)

    def derivatives(self, b):
        p, _, _ = self._weight(b)
        ra, raa = self.rising.derivatives(b)
        fa, faa = self.falling.derivatives(b)
        d1 = p * ra + (1.0 - p) * fa
        d2 = p * raa + (1.0 - p) * faa - p * (1.0 - p) * (ra - fa) ** 2 / self.blend_width
        return d1, d2

    def crossing_field(self) -> float:
        """Field where the two asymptotes intersect."""
        sr, sf = self.rising.slope, self.falling.slope
        if sr == sf:
            raise DomainError("asymptotes are parallel")
        return (sf * self.falling.b_off - sr * self.rising.b_off) / (sr - sf)


MagnonDispersion = Union[Linear, Polynomial, SmoothTurnover]


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def magnon_frequency(d: MagnonDispersion, b):
    """Magnon frequency (GHz) at bias field ``b`` (T); accepts arrays."""
    return _out(d.frequency(b))


def dispersion_derivatives(d: MagnonDispersion, b):
    """Analytic ``(d omega_m/dB, d2 omega_m/dB2)`` in GHz/T and GHz/T**2."""
    d1, d2 = d.derivatives(b)
    return _out(d1), _out(d2)


# ---------------------------------------------------------------------------
# coupled system
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HybridModel:
    omega_c: float
    g_cm: float
    dispersion: MagnonDispersion

    def __post_init__(self):
        if not self.omega_c > 0:
            raise ValidationError(f"omega_c must be > 0, got {self.omega_c}")
        if not self.g_cm >= 0:
            raise ValidationError(f"g_cm must be >= 0, got {self.g_cm}")

    def replace(self, **kw) -> "HybridModel":
        fields = dict(omega_c=self.omega_c, g_cm=self.g_cm, dispersion=self.dispersion)
        fields.update(kw)
        return HybridModel(**fields)


def normal_modes(omega_c, omega_m, g):
    """Lower and upper normal-mode frequencies including counter-rotating terms.

    Vectorised over any argument. Raises :class:`DomainError` where the lower
    mode has gone soft (``omega_c*omega_m <= 4 g**2``).
    """
    c, m, g = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (omega_c, omega_m, g)))
    a = 0.5 * (c * c + m * m)
    disc = (0.5 * (c * c - m * m)) ** 2 + 4.0 * c * m * g * g
    if np.any(disc < 0):
        raise DomainError("negative discriminant in normal-mode formula")
    y_plus = a + np.sqrt(disc)
    # product of roots is c m (c m - 4 g^2); avoids cancellation in a - sqrt(disc)
    prod = c * m * (c * m - 4.0 * g * g)
    if np.any(prod < 0) or np.any(y_plus <= 0):
        bad = np.flatnonzero(np.atleast_1d(prod < 0))
        raise DomainError(
            "lower normal mode is imaginary (omega_c*omega_m < 4 g^2)"
            + (f" at index {bad[0]}" if bad.size else "")
        )
    y_minus = prod / y_plus
    return np.sqrt(y_minus), np.sqrt(y_plus)


def normal_mode_partials(omega_c, omega_m, g):
    """Normal modes and their partial derivatives.

    Returns ``(w_minus, w_plus, dminus, dplus)`` where each ``d*`` is a tuple of
    partials with respect to ``(omega_c, omega_m, g)``.
    """
    c, m, g = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (omega_c, omega_m, g)))
    w_minus, w_plus = normal_modes(c, m, g)
    s = np.sqrt((0.5 * (c * c - m * m)) ** 2 + 4.0 * c * m * g * g)
    s = np.maximum(s, 1e-300)
    da = (c, m, np.zeros_like(g))
    dd = (
        (c * c - m * m) * c + 4.0 * m * g * g,
        -(c * c - m * m) * m + 4.0 * c * g * g,
        8.0 * c * m * g,
    )
    dplus = tuple((ai + di / (2 * s)) / (2 * w_plus) for ai, di in zip(da, dd))
    dminus = tuple((ai - di / (2 * s)) / (2 * np.maximum(w_minus, 1e-300)) for ai, di in zip(da, dd))
    return w_minus, w_plus, dminus, dplus


def hybrid_eigenfrequencies(m: HybridModel, b):
    """``(omega_minus, omega_plus)`` in GHz at field ``b``; full (non-RWA) result."""
    wm = m.dispersion.frequency(b)
    lo, hi = normal_modes(m.omega_c, wm, m.g_cm)
    return _out(lo), _out(hi)


def rwa_modes(omega_c, omega_m, g):
    c, mm, g = (np.asarray(v, dtype=float) for v in (omega_c, omega_m, g))
    mean = 0.5 * (c + mm)
    half = 0.5 * np.hypot(c - mm, 2.0 * g)
    return mean - half, mean + half


def hybrid_eigenfrequencies_rwa(m: HybridModel, b):
    lo, hi = rwa_modes(m.omega_c, m.dispersion.frequency(b), m.g_cm)
    return _out(lo), _out(hi)


def transition_frequency(omega_c, omega_m, g):
    return np.hypot(np.asarray(omega_c, dtype=float) - omega_m, 2.0 * np.asarray(g, dtype=float))


def cmp_transition(m: HybridModel, b):
    """RWA difference frequency ``omega_+ - omega_-`` (GHz)."""
    return _out(transition_frequency(m.omega_c, m.dispersion.frequency(b), m.g_cm))


def cmp_transition_full(m: HybridModel, b):
    """Difference frequency of the full (counter-rotating) normal modes (GHz)."""
    lo, hi = normal_modes(m.omega_c, m.dispersion.frequency(b), m.g_cm)
    return _out(hi - lo)


def hopfield_oracle(omega_c: float, omega_m: float, g: float, imag_tol: float = 1e-9):
    """Normal modes from direct diagonalisation of the bosonic equations of motion.

    Builds the 4x4 dynamical matrix acting on ``(c, b, c^dag, b^dag)`` for
    ``H = wc c^dag c + wm b^dag b + g (c + c^dag)(b + b^dag)`` and returns the
    two positive frequencies, sorted. Independent of :func:`normal_modes`.
    """
    if g < 0:
        raise ValidationError("g must be >= 0")
    c, mm = float(omega_c), float(omega_m)
    dyn = np.array(
        [
            [c, g, 0.0, g],
            [g, mm, g, 0.0],
            [0.0, -g, -c, -g],
            [-g, 0.0, -g, -mm],
        ]
    )
    ev = np.linalg.eigvals(dyn)
    scale = max(abs(c), abs(mm), g, 1e-300)
    if np.max(np.abs(ev.imag)) > imag_tol * scale:
        raise DomainError("dynamical matrix has complex eigenvalues (unstable)")
    pos = np.sort(ev.real[ev.real > 0])
    if pos.size != 2:
        # degenerate zero modes; fall back on magnitudes
        pos = np.sort(np.abs(ev.real))[[1, 3]]
    return float(pos[0]), float(pos[1])
