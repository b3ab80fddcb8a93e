"""
Bias-field sensitivity of the polariton transition frequency.

The transition frequency ``W = sqrt((wc - wm)**2 + 4 g**2)`` depends on B only
through the magnon dispersion. Its first two field derivatives are

    W'  = -(wc - wm) wm' / W
    W'' = -(wc - wm) wm'' / W + 4 g**2 wm'**2 / W**3

so ``W' = 0`` at full hybridisation and ``W'' = 0`` additionally requires a
turning point of the dispersion (``wm' = 0``) at the same field.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .model import HybridModel, MagnonDispersion, cmp_transition_full, transition_frequency

D1_THRESHOLD = 1e-3  # GHz/T
D2_THRESHOLD = 1.0  # GHz/T^2


def cmp_derivatives(m: HybridModel, b):
    """First and second field derivatives of the transition frequency."""
    wm = m.dispersion.frequency(b)
    d1m, d2m = m.dispersion.derivatives(b)
    det = m.omega_c - wm
    w = transition_frequency(m.omega_c, wm, m.g_cm)
    d1 = -det * d1m / w
    d2 = -det * d2m / w + 4.0 * m.g_cm**2 * d1m**2 / w**3
    if np.ndim(d1) == 0:
        return float(d1), float(d2)
    return d1, d2


def taylor_prediction(m: HybridModel, b: float, db: float) -> float:
    """Second-order prediction of ``W(b + db) - W(b)``."""
    d1, d2 = cmp_derivatives(m, b)
    return d1 * db + 0.5 * d2 * db**2


def magic_point_search(d: MagnonDispersion, bracket, tol: float = 1e-9, n_scan: int = 1000):
    """Locate the turnover field of ``d`` inside ``bracket``.

    Returns ``(B_star, omega_m(B_star))``; the second value is the cavity
    frequency that puts full hybridisation on the turnover.
    """
    lo, hi = map(float, bracket)
    if not hi > lo:
        raise ValidationError("bracket must be an increasing interval")
    grid = np.linspace(lo, hi, n_scan)
    slope = d.derivatives(grid)[0]
    sgn = np.sign(slope)
    nz = sgn[sgn != 0]
    changes = np.count_nonzero(np.diff(nz) != 0)
    if changes == 0:
        raise DomainError("dispersion has no turning point in bracket")
    if changes > 1:
        raise DomainError(f"dispersion slope changes sign {changes} times in bracket")
    i = int(np.flatnonzero(np.diff(np.sign(slope)) != 0)[0])
    a, c = grid[i], grid[i + 1]
    fa = float(d.derivatives(a)[0])
    if fa == 0.0:
        c = a
    while c - a > tol:
        mid = 0.5 * (a + c)
        fm = float(d.derivatives(mid)[0])
        if fm == 0.0:
            a = c = mid
            break
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            c = mid
    b_star = 0.5 * (a + c)
    return b_star, float(d.frequency(b_star))


@dataclass
class SensitivityReport:
    B_star: float
    omega_c_required: float
    g_cm: float
    d1: float
    d2: float
    d2_detuned: float
    detune_baseline: float
    suppression_ratio_d2: float
    omega_cmp_at_magic: float
    omega_cmp_full_at_magic: float = float("nan")
    d1_threshold: float = D1_THRESHOLD
    d2_threshold: float = D2_THRESHOLD
    scan: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))

    @property
    def is_double_magic(self) -> bool:
        return abs(self.d1) < self.d1_threshold and abs(self.d2) < self.d2_threshold

    def to_dict(self) -> dict:
        ratio = self.suppression_ratio_d2
        return {
            "B_star_tesla": self.B_star,
            "omega_c_required_ghz": self.omega_c_required,
            "g_cm_ghz": self.g_cm,
            "d1_ghz_per_t": self.d1,
            "d2_ghz_per_t2": self.d2,
            "d2_detuned_ghz_per_t2": self.d2_detuned,
            "detune_baseline_g": self.detune_baseline,
            "suppression_ratio_d2": ratio if np.isfinite(ratio) else "inf",
            "omega_cmp_at_magic_ghz": self.omega_cmp_at_magic,
            "omega_cmp_full_at_magic_ghz": self.omega_cmp_full_at_magic,
            "d1_threshold": self.d1_threshold,
            "d2_threshold": self.d2_threshold,
            "is_double_magic": self.is_double_magic,
        }


def sensitivity_report(
    m: HybridModel,
    bracket,
    detune_baseline: float = 5.0,
    n_scan: int = 201,
    d1_threshold: float = D1_THRESHOLD,
    d2_threshold: float = D2_THRESHOLD,
) -> SensitivityReport:
    """Tune the cavity onto the dispersion turnover and report the suppression.

    The cavity frequency of ``m`` is replaced by ``omega_m(B_star)``; the
    baseline puts it ``detune_baseline * g`` above that.
    """
    b_star, target = magic_point_search(m.dispersion, bracket)
    magic = m.replace(omega_c=target)
    d1, d2 = cmp_derivatives(magic, b_star)
    detuned = m.replace(omega_c=target + detune_baseline * m.g_cm)
    _, d2_det = cmp_derivatives(detuned, b_star)
    ratio = abs(d2_det) / abs(d2) if d2 != 0 else float("inf")

    bs = np.linspace(float(bracket[0]), float(bracket[1]), n_scan)
    w = transition_frequency(target, magic.dispersion.frequency(bs), magic.g_cm)
    s1, s2 = cmp_derivatives(magic, bs)
    return SensitivityReport(
        B_star=b_star,
        omega_c_required=target,
        g_cm=m.g_cm,
        d1=d1,
        d2=d2,
        d2_detuned=float(d2_det),
        detune_baseline=detune_baseline,
        suppression_ratio_d2=ratio,
        omega_cmp_at_magic=float(transition_frequency(target, magic.dispersion.frequency(b_star), m.g_cm)),
        # cross-check only: same quantity without the rotating-wave approximation
        omega_cmp_full_at_magic=float(cmp_transition_full(magic, b_star)),
        d1_threshold=d1_threshold,
        d2_threshold=d2_threshold,
        scan=np.column_stack([bs, w, s1, s2]),
    )
