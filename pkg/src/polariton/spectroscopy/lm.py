"""Levenberg-Marquardt (damped Gauss-Newton) least squares."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DomainError


@dataclass
class LMResult:
    x: np.ndarray
    cost: float  # 0.5 * sum(r**2)
    residuals: np.ndarray
    jac: np.ndarray
    iterations: int
    converged: bool
    message: str
    rank: int
    history: list = field(default_factory=list)


def levenberg_marquardt(
    fun: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    x0,
    max_iter: int = 200,
    gtol: float = 1e-10,
    xtol: float = 1e-14,
    ftol: float = 1e-15,
    lam0: float = 1e-3,
) -> LMResult:
    """Minimise ``0.5*|r(x)|**2``; ``fun`` returns ``(r, J)``.

    Uses Marquardt's diagonal scaling. A trial point where ``fun`` raises
    :class:`DomainError` is treated as an uphill step. Convergence is declared
    when every column of J is orthogonal to r to within ``gtol`` (cosine), or
    when an accepted step changes x or the cost by less than ``xtol``/``ftol``
    relative.
    """
    x = np.asarray(x0, dtype=float).copy()
    r, J = fun(x)
    cost = 0.5 * float(r @ r)
    lam = lam0
    history = [cost]
    message = "maximum iterations reached"
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = J.T @ r
        rnorm = np.sqrt(2 * cost)
        cnorm = np.linalg.norm(J, axis=0)
        scale = np.where(cnorm > 0, cnorm, 1.0) * max(rnorm, 1e-300)
        if rnorm == 0 or np.max(np.abs(g) / scale) <= gtol:
            converged, message = True, "gradient tolerance reached"
            break
        A = J.T @ J
        diag = np.diag(A).copy()
        diag[diag == 0] = 1.0
        accepted = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            xt = x + step
            try:
                rt, Jt = fun(xt)
                ct = 0.5 * float(rt @ rt)
            except DomainError:
                ct = np.inf
            if np.isfinite(ct) and ct <= cost:
                accepted = True
                break
            lam *= 10
        if not accepted:
            converged, message = True, "no further decrease possible"
            break
        assert ct <= cost, "objective increased on an accepted step"
        small_step = np.linalg.norm(step) <= xtol * (np.linalg.norm(x) + xtol)
        small_drop = (cost - ct) <= ftol * cost
        x, r, J, cost = xt, rt, Jt, ct
        history.append(cost)
        lam = max(lam / 10, 1e-12)
        if small_step or small_drop:
            converged, message = True, "relative change below tolerance"
            break
    sv = np.linalg.svd(J, compute_uv=False)
    rank = int(np.sum(sv > sv[0] * 1e-12)) if sv.size and sv[0] > 0 else 0
    return LMResult(x, cost, r, J, it, converged, message, rank, history)


def covariance(res: LMResult) -> np.ndarray | None:
    """Parameter covariance ``s**2 (J^T J)^-1``; None when J is rank deficient."""
    n, p = res.jac.shape
    if res.rank < p:
        return None
    dof = max(n - p, 1)
    s2 = 2 * res.cost / dof
    return s2 * np.linalg.inv(res.jac.T @ res.jac)
