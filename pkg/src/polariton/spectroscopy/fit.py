"""
Staged avoided-crossing fits.

Stage ``A``
    Normal-mode formula with a linear Zeeman dispersion, fitted by damped
    Gauss-Newton on the field range where both branches are seen.
Stage ``B``
    Cavity frequency and coupling held fixed; the magnon frequency at every
    ridge point is recovered by inverting the normal-mode formula and a
    polynomial in B is fitted to it.
Stage ``C``
    Two linear asymptotes (rising/falling) fitted jointly with the cavity
    frequency and coupling in user-chosen field windows, then the blend width
    of the smooth turnover fitted alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..constants import MUB_H
from ..errors import DomainError, FitError, ValidationError
from ..model import (
    HybridModel,
    Linear,
    Polynomial,
    SmoothTurnover,
    normal_mode_partials,
    normal_modes,
)
from .lm import covariance, levenberg_marquardt
from .synth import RidgeSet

STAGES = ("A", "B", "C")


@dataclass
class FitResult:
    stage: str
    model: HybridModel
    params: dict
    uncertainties: dict
    rms_residual: float
    fit_region: dict
    n_points: int
    iterations: int = 0
    valid: bool = True
    message: str = "ok"
    history: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.params = {k: float(v) for k, v in self.params.items()}

    def to_dict(self) -> dict:
        def num(v):
            return float(v) if np.isfinite(v) else None

        return {
            "stage": self.stage,
            "params": {k: float(v) for k, v in self.params.items()},
            "uncertainties": {k: num(v) for k, v in self.uncertainties.items()},
            "rms_residual_ghz": float(self.rms_residual),
            "fit_region_tesla": {k: [float(a), float(b)] for k, (a, b) in self.fit_region.items()},
            "n_points": int(self.n_points),
            "iterations": int(self.iterations),
            "valid": bool(self.valid),
            "message": self.message,
            "model": model_to_dict(self.model),
        }


# ---------------------------------------------------------------------------
# model (de)serialisation, shared with the CLI
# ---------------------------------------------------------------------------


def dispersion_to_dict(d) -> dict:
    if isinstance(d, Linear):
        return {"kind": "linear", "g_eff": d.g_eff, "b_off": d.b_off}
    if isinstance(d, Polynomial):
        return {"kind": "polynomial", "coeffs": list(d.coeffs)}
    if isinstance(d, SmoothTurnover):
        return {
            "kind": "smooth_turnover",
            "rising": dispersion_to_dict(d.rising),
            "falling": dispersion_to_dict(d.falling),
            "blend_width": d.blend_width,
        }
    raise TypeError(f"unknown dispersion {d!r}")


def dispersion_from_dict(raw: dict):
    kind = raw.get("kind")
    if kind == "linear":
        return Linear(float(raw["g_eff"]), float(raw["b_off"]))
    if kind == "polynomial":
        return Polynomial(tuple(raw["coeffs"]))
    if kind == "smooth_turnover":
        return SmoothTurnover(
            dispersion_from_dict(raw["rising"]),
            dispersion_from_dict(raw["falling"]),
            float(raw["blend_width"]),
        )
    raise ValidationError(f"unknown dispersion kind {kind!r}")


def model_to_dict(m: HybridModel) -> dict:
    return {"omega_c": m.omega_c, "g_cm": m.g_cm, "dispersion": dispersion_to_dict(m.dispersion)}


def model_from_dict(raw: dict) -> HybridModel:
    return HybridModel(float(raw["omega_c"]), float(raw["g_cm"]), dispersion_from_dict(raw["dispersion"]))


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def upper_branch_mask(r: RidgeSet) -> np.ndarray:
    """True for points on the upper polariton.

    Branches are ranked by median frequency; the lowest is the lower
    polariton, every other branch is treated as the upper one.
    """
    ids = r.branches
    if not ids:
        return np.zeros(0, dtype=bool)
    order = sorted(ids, key=lambda k: float(np.median(r.f[r.branch_id == k])))
    return r.branch_id != order[0]


def both_branch_region(r: RidgeSet) -> tuple[float, float]:
    up = upper_branch_mask(r)
    if up.all() or not up.any():
        return float(r.b.min()), float(r.b.max())
    lo = max(r.b[up].min(), r.b[~up].min())
    hi = min(r.b[up].max(), r.b[~up].max())
    if hi < lo:
        raise FitError("branches do not overlap in field")
    return float(lo), float(hi)


def _in_window(b, window) -> np.ndarray:
    lo, hi = window
    return (b >= lo) & (b <= hi)


def _branch_block(c, g, wm, dwm, f, upper, sw):
    """Weighted residuals and Jacobian columns ``[d/dc, d/dg, *d/dtheta]``."""
    lo, hi, dlo, dhi = normal_mode_partials(c, wm, g)
    pred = np.where(upper, hi, lo)
    dc = np.where(upper, dhi[0], dlo[0])
    dm = np.where(upper, dhi[1], dlo[1])
    dg = np.where(upper, dhi[2], dlo[2])
    cols = [dc, dg] + [dm * col for col in dwm]
    return sw * (pred - f), sw[:, None] * np.column_stack(cols), pred


def _linear_grad(b, lin_geff, lin_boff):
    return [MUB_H * (b + lin_boff), np.full_like(b, MUB_H * lin_geff)]


def _check_count(n, n_free, what):
    need = 4 * n_free
    if n < need:
        raise FitError(f"{what}: {n} ridge points, need at least {need} for {n_free} free parameters")


def _uncertainties(res, names):
    cov = covariance(res)
    if cov is None:
        return {k: float("nan") for k in names}
    return {k: float(np.sqrt(max(cov[i, i], 0.0))) for i, k in enumerate(names)}


def _status(res, n_free):
    if res.rank < n_free:
        return False, f"rank-deficient Jacobian (rank {res.rank} < {n_free})"
    if not res.converged:
        return False, f"did not converge: {res.message}"
    return True, res.message


# ---------------------------------------------------------------------------
# stage A
# ---------------------------------------------------------------------------


def _fit_linear(r: RidgeSet, init: HybridModel, window, max_iter):
    if not isinstance(init.dispersion, Linear):
        raise ValidationError("stage A needs a Linear initial dispersion")
    if window is None:
        window = both_branch_region(r)
    sel = _in_window(r.b, window)
    pts = r.select(sel)
    _check_count(len(pts), 4, "stage A")
    b, f, up = pts.b, pts.f, upper_branch_mask(r)[sel]
    sw = np.sqrt(pts.weight)

    def fun(x):
        c, g, ge, bo = x
        wm = ge * MUB_H * (b + bo)
        res, jac, _ = _branch_block(c, g, wm, _linear_grad(b, ge, bo), f, up, sw)
        return res, jac

    d = init.dispersion
    x0 = [init.omega_c, max(init.g_cm, 1e-6), d.g_eff, d.b_off]
    try:
        fun(np.asarray(x0))
    except DomainError as exc:
        raise FitError(f"initial model undefined on the fit points: {exc}") from None
    res = levenberg_marquardt(fun, x0, max_iter=max_iter)
    c, g, ge, bo = res.x
    g = abs(g)
    names = ["omega_c", "g_cm", "g_eff", "b_off"]
    ok, msg = _status(res, 4)
    model = HybridModel(c, g, Linear(ge, bo)) if c > 0 else init
    rms = float(np.sqrt(np.mean((res.residuals / sw) ** 2)))
    return FitResult(
        stage="A",
        model=model,
        params=dict(zip(names, [c, g, ge, bo])),
        uncertainties=_uncertainties(res, names),
        rms_residual=rms,
        fit_region={"A": tuple(window)},
        n_points=len(pts),
        iterations=res.iterations,
        valid=ok and c > 0,
        message=msg,
        history=res.history,
    )


# ---------------------------------------------------------------------------
# stage B
# ---------------------------------------------------------------------------


def invert_magnon_frequency(omega_c, g, f, upper):
    """Magnon frequency reproducing polariton frequency ``f`` on the given branch.

    Solves ``(c**2 - y) m**2 - 4 c g**2 m + y (y - c**2) = 0`` with ``y = f**2``.
    The roots have product ``-y`` so exactly one is positive; it belongs to the
    upper branch when ``y > c**2``. Points whose branch label contradicts that
    come back as NaN.
    """
    c = float(omega_c)
    f = np.asarray(f, dtype=float)
    upper = np.broadcast_to(np.asarray(upper, dtype=bool), f.shape)
    y = f * f
    a = c * c - y
    disc = 16 * c * c * g**4 + 4 * y * a * a
    q = 0.5 * (4 * c * g * g + np.sqrt(disc))
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.where(a > 0, q / a, y * (y - c * c) / q)
    consistent = np.where(upper, a < 0, a > 0) & (np.abs(a) > 1e-12 * c * c)
    out = np.where(consistent & (root > 0), root, np.nan)
    return float(out) if out.ndim == 0 else out


def _fit_polynomial(r: RidgeSet, init: HybridModel, window, order):
    if order < 0:
        raise ValidationError("polynomial order must be >= 0")
    if window is None:
        window = (float(r.b.min()), float(r.b.max()))
    sel = _in_window(r.b, window)
    pts = r.select(sel)
    up = upper_branch_mask(r)[sel]
    wm = invert_magnon_frequency(init.omega_c, init.g_cm, pts.f, up)
    good = np.isfinite(wm)
    _check_count(int(good.sum()), order + 1, "stage B")
    b, wm, w = pts.b[good], wm[good], pts.weight[good]
    sw = np.sqrt(w)
    V = np.vander(b, order + 1, increasing=True)
    coef, _, rank, _ = np.linalg.lstsq(sw[:, None] * V, sw * wm, rcond=None)
    names = [f"c{k}" for k in range(order + 1)]
    resid = sw * (V @ coef - wm)
    dof = max(b.size - (order + 1), 1)
    if rank < order + 1:
        unc = {k: float("nan") for k in names}
        ok, msg = False, f"rank-deficient design matrix (rank {rank} < {order + 1})"
    else:
        cov = (resid @ resid / dof) * np.linalg.inv((sw[:, None] * V).T @ (sw[:, None] * V))
        unc = {k: float(np.sqrt(cov[i, i])) for i, k in enumerate(names)}
        ok, msg = True, "ok"
    model = init.replace(dispersion=Polynomial(tuple(coef)))
    try:
        lo, hi = normal_modes(model.omega_c, model.dispersion.frequency(pts.b), model.g_cm)
        pred = np.where(up, hi, lo)
        rms = float(np.sqrt(np.mean((pred - pts.f) ** 2)))
    except DomainError:
        rms = float("nan")
        ok, msg = False, "fitted polynomial leaves the stable region at some ridge points"
    dropped = int((~good).sum())
    if dropped:
        msg += f"; {dropped} points inconsistent with branch identity dropped"
    return FitResult(
        stage="B",
        model=model,
        params={"omega_c": init.omega_c, "g_cm": init.g_cm, **dict(zip(names, coef))},
        uncertainties=unc,
        rms_residual=rms,
        fit_region={"B": tuple(window)},
        n_points=int(good.sum()),
        valid=ok,
        message=msg,
    )


# ---------------------------------------------------------------------------
# stage C
# ---------------------------------------------------------------------------


def _fit_turnover(r: RidgeSet, init: HybridModel, rising_window, falling_window, max_iter):
    d = init.dispersion
    if not isinstance(d, SmoothTurnover):
        raise ValidationError("stage C needs a SmoothTurnover initial dispersion")
    if rising_window is None or falling_window is None:
        raise ValidationError("stage C needs both rising and falling field windows")
    up_all = upper_branch_mask(r)
    in_r = _in_window(r.b, rising_window)
    in_f = _in_window(r.b, falling_window) & ~in_r
    sel = in_r | in_f
    _check_count(int(sel.sum()), 6, "stage C")
    b, f, up = r.b[sel], r.f[sel], up_all[sel]
    rising = in_r[sel]
    sw = np.sqrt(r.weight[sel])

    def fun(x):
        c, g, gp, bp, gm, bm = x
        wm = np.where(rising, gp * MUB_H * (b + bp), gm * MUB_H * (b + bm))
        zr = np.where(rising, 1.0, 0.0)
        gr = _linear_grad(b, gp, bp)
        gf = _linear_grad(b, gm, bm)
        grads = [gr[0] * zr, gr[1] * zr, gf[0] * (1 - zr), gf[1] * (1 - zr)]
        res, jac, _ = _branch_block(c, g, wm, grads, f, up, sw)
        return res, jac

    x0 = [init.omega_c, max(init.g_cm, 1e-6), d.rising.g_eff, d.rising.b_off, d.falling.g_eff, d.falling.b_off]
    try:
        fun(np.asarray(x0))
    except DomainError as exc:
        raise FitError(f"initial model undefined on the fit points: {exc}") from None
    res1 = levenberg_marquardt(fun, x0, max_iter=max_iter)
    c, g, gp, bp, gm, bm = res1.x
    g = abs(g)
    names1 = ["omega_c", "g_cm", "g_eff_p", "b_off_p", "g_eff_m", "b_off_m"]
    unc = _uncertainties(res1, names1)
    ok1, msg1 = _status(res1, 6)

    # blend width alone, over every ridge point
    rise, fall = Linear(gp, bp), Linear(gm, bm)
    _check_count(len(r), 1, "stage C blend width")
    sw_all = np.sqrt(r.weight)
    f_all = r.f

    def fun_w(x):
        w = math.exp(x[0])
        a = rise.frequency(r.b)
        fl = fall.frequency(r.b)
        wm = -w * np.logaddexp(-a / w, -fl / w)
        p = 0.5 * (1.0 + np.tanh(0.5 * (fl - a) / w))
        dwm_du = wm - (p * a + (1 - p) * fl)
        lo, hi, dlo, dhi = normal_mode_partials(c, wm, g)
        pred = np.where(up_all, hi, lo)
        dm = np.where(up_all, dhi[1], dlo[1])
        return sw_all * (pred - f_all), (sw_all * dm * dwm_du)[:, None]

    u0 = [math.log(d.blend_width)]
    try:
        fun_w(np.asarray(u0))
    except DomainError as exc:
        raise FitError(f"turnover model undefined on ridge points: {exc}") from None
    res2 = levenberg_marquardt(fun_w, u0, max_iter=max_iter)
    w = math.exp(res2.x[0])
    unc_u = _uncertainties(res2, ["u"])["u"]
    unc["blend_width"] = w * unc_u
    ok2, msg2 = _status(res2, 1)
    model = HybridModel(c, g, SmoothTurnover(rise, fall, w))
    rms = float(np.sqrt(np.mean((res2.residuals / sw_all) ** 2)))
    return FitResult(
        stage="C",
        model=model,
        params=dict(zip(names1 + ["blend_width"], [c, g, gp, bp, gm, bm, w])),
        uncertainties=unc,
        rms_residual=rms,
        fit_region={"C_rising": tuple(rising_window), "C_falling": tuple(falling_window)},
        n_points=len(r),
        iterations=res1.iterations + res2.iterations,
        valid=ok1 and ok2,
        message=f"asymptotes: {msg1}; blend width: {msg2}",
        history=res1.history + res2.history,
    )


def fit_avoided_crossing(
    r: RidgeSet,
    init: HybridModel,
    stage: str = "A",
    window=None,
    poly_order: int = 3,
    rising_window=None,
    falling_window=None,
    max_iter: int = 200,
) -> FitResult:
    """Fit ridge data with one of the staged procedures (see module docstring).

    Raises :class:`FitError` when there are fewer than four points per free
    parameter. Non-convergence and rank deficiency do not raise; the result
    comes back with ``valid=False`` and an explanatory ``message``.
    """
    stage = stage.upper()
    if stage not in STAGES:
        raise ValidationError(f"stage must be one of {STAGES}")
    if len(r) == 0:
        raise FitError("no ridge points")
    if stage == "A":
        return _fit_linear(r, init, window, max_iter)
    if stage == "B":
        return _fit_polynomial(r, init, window, poly_order)
    return _fit_turnover(r, init, rising_window, falling_window, max_iter)


def usc_bound(fit, ratio: float = 0.1) -> float:
    """Largest field (T) at which ``g / omega_m(B) >= ratio`` for a linear dispersion.

    Accepts a :class:`FitResult` or a bare :class:`HybridModel`.
    """
    model = fit.model if isinstance(fit, FitResult) else fit
    d = model.dispersion
    if not isinstance(d, Linear):
        raise ValidationError("usc_bound needs a Linear dispersion")
    if d.slope <= 0:
        raise DomainError("dispersion slope must be positive")
    return model.g_cm / (ratio * d.slope) - d.b_off
