"""Peak picking and branch linking on (field, frequency) transmission maps."""

from __future__ import annotations

import numpy as np
from scipy.signal import find_peaks

from ..errors import ValidationError
from .synth import RidgeSet, SpectralMap

MIN_BRANCH_LENGTH = 5


def _refine(col_db: np.ndarray, i: int, f: np.ndarray) -> float:
    """Sub-grid peak position.

    ``10**(-dB/20)`` is exactly quadratic in frequency for an isolated
    Lorentzian, so a three-point parabola recovers the centre. The shift is
    clamped to half a grid step and is invariant to a constant dB offset.
    """
    if i == 0 or i == len(f) - 1:
        return float(f[i])
    u = 10.0 ** (-(col_db[i - 1 : i + 2] - col_db[i]) / 20.0)
    denom = u[0] - 2.0 * u[1] + u[2]
    if not denom > 0:
        return float(f[i])
    shift = 0.5 * (u[0] - u[2]) / denom
    h = 0.5 * (f[i + 1] - f[i - 1])
    return float(f[i] + np.clip(shift, -0.5, 0.5) * h)


def column_peaks(col_db: np.ndarray, f: np.ndarray, prominence_db: float):
    idx, props = find_peaks(col_db, prominence=prominence_db)
    return [(_refine(col_db, int(i), f), float(p)) for i, p in zip(idx, props["prominences"])]


def extract_ridges(
    s: SpectralMap,
    prominence_db: float = 10.0,
    max_branches: int = 2,
    max_jump: float | None = None,
    max_gap: int = 3,
    weight_by_prominence: bool = False,
) -> RidgeSet:
    """Pick local maxima per field column and link them into branches.

    Peaks are linked to the branch whose last frequency is nearest (greedy over
    all branch/peak pairs, smallest ``|df|`` first). A branch may skip up to
    ``max_gap`` columns. Branches shorter than five points are dropped, the
    ``max_branches`` longest are kept and renumbered by ascending median
    frequency.
    """
    if not prominence_db > 0:
        raise ValidationError("prominence_db must be > 0")
    if max_branches < 1:
        raise ValidationError("max_branches must be >= 1")
    if max_jump is None:
        max_jump = 0.1 * (s.f_grid[-1] - s.f_grid[0])

    branches: list[dict] = []  # each: cols, f, w
    for col in range(s.b_grid.size):
        peaks = column_peaks(s.magnitude_db[col], s.f_grid, prominence_db)
        if not peaks:
            continue
        pairs = []
        for bi, br in enumerate(branches):
            if col - br["cols"][-1] > max_gap + 1:
                continue
            for pi, (fp, _) in enumerate(peaks):
                df = abs(fp - br["f"][-1])
                if df <= max_jump:
                    pairs.append((df, bi, pi))
        pairs.sort()
        used_b, used_p = set(), set()
        for _, bi, pi in pairs:
            if bi in used_b or pi in used_p:
                continue
            used_b.add(bi)
            used_p.add(pi)
            br = branches[bi]
            br["cols"].append(col)
            br["f"].append(peaks[pi][0])
            br["w"].append(peaks[pi][1])
        for pi, (fp, prom) in enumerate(peaks):
            if pi not in used_p:
                branches.append({"cols": [col], "f": [fp], "w": [prom]})

    kept = [br for br in branches if len(br["cols"]) >= MIN_BRANCH_LENGTH]
    if not kept:
        return RidgeSet.empty()
    # longest first; ties by first column for determinism
    kept.sort(key=lambda br: (-len(br["cols"]), br["cols"][0]))
    kept = kept[:max_branches]
    kept.sort(key=lambda br: float(np.median(br["f"])))

    b, f, ids, w = [], [], [], []
    for k, br in enumerate(kept):
        b.extend(s.b_grid[br["cols"]])
        f.extend(br["f"])
        ids.extend([k] * len(br["cols"]))
        if weight_by_prominence:
            pw = np.asarray(br["w"])
            w.extend(pw / pw.max())
        else:
            w.extend([1.0] * len(br["cols"]))
    return RidgeSet(np.array(b), np.array(f), np.array(ids), np.array(w))
