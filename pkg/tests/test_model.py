import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polariton import (
    CONSTANTS,
    DomainError,
    HybridModel,
    Linear,
    Polynomial,
    SmoothTurnover,
    ValidationError,
    cmp_transition,
    dispersion_derivatives,
    hopfield_oracle,
    hybrid_eigenfrequencies,
    hybrid_eigenfrequencies_rwa,
    magnon_frequency,
)
from polariton.model import normal_mode_partials, normal_modes


class Const:
    """Dispersion with a fixed magnon frequency, for feeding chosen omega_m."""

    def __init__(self, w):
        self.w = w

    def frequency(self, b):
        return np.full_like(np.asarray(b, dtype=float), self.w)

    def derivatives(self, b):
        z = np.zeros_like(np.asarray(b, dtype=float))
        return z, z


def at(omega_c, omega_m, g):
    return HybridModel(omega_c, g, Const(omega_m))


TURN = SmoothTurnover(Linear(2.03, 0.0078), Linear(-0.70, -0.751), 0.05)


def test_bohr_magneton_constant():
    assert CONSTANTS.bohr_magneton_over_planck == pytest.approx(13.996245, rel=1e-6)


# --- dispersions -----------------------------------------------------------


def test_linear_block_at_usc_bound():
    w = magnon_frequency(Linear(2.061, 0.1231), 0.81)
    assert w == pytest.approx(26.92, abs=0.01)
    assert w == pytest.approx(10 * 2.690, rel=1e-3)


def test_linear_disc_at_usc_bound():
    w = magnon_frequency(Linear(2.249, -0.083), 0.90)
    assert w == pytest.approx(25.72, abs=0.01)
    assert w == pytest.approx(10 * 2.574, rel=1e-3)


def test_linear_zero_crossing():
    assert magnon_frequency(Linear(2.061, 0.1231), -0.1231) == 0.0


def test_linear_derivatives():
    d1, d2 = dispersion_derivatives(Linear(2.0, 0.0), 0.37)
    assert d1 == pytest.approx(27.992, abs=1e-3)
    assert d2 == 0.0


def test_polynomial_evaluation():
    p = Polynomial((1.0, 2.0, 3.0))
    assert magnon_frequency(p, 2.0) == pytest.approx(1 + 4 + 12)
    assert dispersion_derivatives(p, 2.0) == pytest.approx((2 + 12, 6))


def test_polynomial_needs_coefficients():
    with pytest.raises(ValidationError):
        Polynomial(())


def test_smooth_turnover_below_asymptotes_and_converges():
    b = np.linspace(-0.5, 1.0, 301)
    w = TURN.frequency(b)
    lo = np.minimum(TURN.rising.frequency(b), TURN.falling.frequency(b))
    assert np.all(w <= lo + 1e-12)  # equal to rounding far from the turnover
    bx = TURN.crossing_field()
    gap = np.abs(TURN.rising.frequency(b) - TURN.falling.frequency(b))
    near = gap < 10 * TURN.blend_width
    assert near.sum() >= 3
    assert np.all(w[near] < lo[near])
    far = np.abs(b - bx) > 0.3
    assert np.allclose(w[far], lo[far], atol=1e-9)


def test_smooth_turnover_derivative_zero_at_turnover():
    # brute-force turnover from a fine scan of the soft minimum
    b = np.linspace(0.15, 0.25, 200001)
    b_star = b[np.argmax(TURN.frequency(b))]
    d1, d2 = dispersion_derivatives(TURN, b_star)
    assert abs(d1) < 1e-2
    assert d2 < 0


@pytest.mark.parametrize(
    "disp",
    [
        Linear(2.061, 0.1231),
        Polynomial((3.0, 25.0, -4.0, 1.5)),
        TURN,
        SmoothTurnover(Linear(2.0, 0.0), Linear(-1.5, -0.6), 0.2),
    ],
    ids=["linear", "poly", "turnover", "wide-turnover"],
)
@pytest.mark.parametrize("b", [0.12, 0.187, 0.3, 0.45])
def test_derivatives_match_finite_differences(disp, b):
    if magnon_frequency(disp, b) <= 1.0:
        pytest.skip("below 1 GHz")
    h = 1e-6
    f = lambda x: float(disp.frequency(x))
    fd1 = (f(b + h) - f(b - h)) / (2 * h)
    # second derivative from analytic first derivative, avoids h**2 cancellation
    fd2 = (float(disp.derivatives(b + h)[0]) - float(disp.derivatives(b - h)[0])) / (2 * h)
    d1, d2 = dispersion_derivatives(disp, b)
    assert d1 == pytest.approx(fd1, rel=1e-6, abs=1e-9)
    assert d2 == pytest.approx(fd2, rel=1e-6, abs=1e-6)


def test_turnover_width_must_be_positive():
    with pytest.raises(ValidationError):
        SmoothTurnover(Linear(2, 0), Linear(-1, -1), 0.0)


# --- hybrid modes ----------------------------------------------------------


def test_uncoupled_limit():
    assert hybrid_eigenfrequencies(at(5.0, 7.0, 0.0), 0.0) == pytest.approx((5.0, 7.0))
    assert hybrid_eigenfrequencies(at(7.0, 5.0, 0.0), 0.0) == pytest.approx((5.0, 7.0))


def test_degenerate_case_life_parameters():
    w, g = 5.56, 0.169
    lo, hi = hybrid_eigenfrequencies(at(w, w, g), 0.0)
    # degenerate case reduces to w*sqrt(1 -+ 2g/w)
    assert lo == pytest.approx(w * math.sqrt(1 - 2 * g / w), rel=1e-12)
    assert hi == pytest.approx(w * math.sqrt(1 + 2 * g / w), rel=1e-12)
    assert (lo, hi) == pytest.approx((5.388, 5.727), abs=1e-3)


def test_block_resonance_matches_oracle():
    lo, hi = hybrid_eigenfrequencies(at(5.870, 5.870, 2.690), 0.0)
    olo, ohi = hopfield_oracle(5.870, 5.870, 2.690)
    assert lo == pytest.approx(olo, rel=1e-10)
    assert hi == pytest.approx(ohi, rel=1e-10)


def test_unstable_regime_raises():
    with pytest.raises(DomainError):
        hybrid_eigenfrequencies(at(5.0, 5.0, 2.6), 0.0)
    with pytest.raises(DomainError):
        hopfield_oracle(5.0, 5.0, 2.6)


def test_vectorised_over_field():
    m = HybridModel(5.87, 2.69, Linear(2.061, 0.1231))
    b = np.linspace(0.1, 0.8, 11)
    lo, hi = hybrid_eigenfrequencies(m, b)
    assert lo.shape == hi.shape == b.shape
    for i, bi in enumerate(b):
        assert (lo[i], hi[i]) == hybrid_eigenfrequencies(m, bi)


def test_model_validation():
    with pytest.raises(ValidationError):
        HybridModel(0.0, 1.0, Linear(2, 0))
    with pytest.raises(ValidationError):
        HybridModel(1.0, -0.1, Linear(2, 0))


def test_partials_match_finite_differences():
    c, m, g = 5.9, 6.4, 1.3
    lo, hi, dlo, dhi = normal_mode_partials(c, m, g)
    h = 1e-6
    for k in range(3):
        args_p = [c, m, g]
        args_m = [c, m, g]
        args_p[k] += h
        args_m[k] -= h
        fp, fm = normal_modes(*args_p), normal_modes(*args_m)
        assert float(dlo[k]) == pytest.approx((fp[0] - fm[0]) / (2 * h), rel=1e-6)
        assert float(dhi[k]) == pytest.approx((fp[1] - fm[1]) / (2 * h), rel=1e-6)


@pytest.mark.parametrize("ratio", [0.01, 0.1, 0.46])
def test_oracle_sweep_zero_detuning(ratio):
    w = 5.87
    lo, hi = hybrid_eigenfrequencies(at(w, w, ratio * w), 0.0)
    olo, ohi = hopfield_oracle(w, w, ratio * w)
    assert max(abs(lo - olo) / olo, abs(hi - ohi) / ohi) < 1e-10


def test_oracle_sweep_zero_detuning_beyond_stability():
    # g/w = 0.9 on resonance is past the soft-mode threshold (g/w = 0.5);
    # both routes must refuse rather than disagree
    with pytest.raises(DomainError):
        hybrid_eigenfrequencies(at(5.87, 5.87, 0.9 * 5.87), 0.0)
    with pytest.raises(DomainError):
        hopfield_oracle(5.87, 5.87, 0.9 * 5.87)


def test_oracle_agrees_on_grid():
    worst = 0.0
    for det in np.linspace(-0.6, 3.0, 10):
        for r in np.linspace(0.01, 0.9, 10):
            c, m = 1.0, 1.0 + det
            if c * m <= 4 * r * r:
                continue
            lo, hi = normal_modes(c, m, r)
            olo, ohi = hopfield_oracle(c, m, r)
            worst = max(worst, abs(lo - olo) / olo, abs(hi - ohi) / ohi)
    assert worst < 1e-10


# --- RWA and transition frequency -----------------------------------------


def test_rwa_limits():
    assert hybrid_eigenfrequencies_rwa(at(5.0, 7.0, 0.0), 0.0) == pytest.approx((5.0, 7.0))
    lo, hi = hybrid_eigenfrequencies_rwa(at(6.0, 6.0, 0.3), 0.0)
    assert hi - lo == pytest.approx(0.6, abs=1e-14)


def test_cmp_transition_examples():
    assert cmp_transition(at(5.56, 5.56, 0.169), 0.0) == pytest.approx(0.338, abs=1e-15)
    assert cmp_transition(at(5.0, 7.5, 0.0), 0.0) == pytest.approx(2.5)


@given(
    c=st.floats(1.0, 20.0),
    m=st.floats(0.5, 30.0),
    g=st.floats(0.0, 5.0),
)
def test_cmp_transition_is_rwa_difference(c, m, g):
    lo, hi = hybrid_eigenfrequencies_rwa(at(c, m, g), 0.0)
    assert cmp_transition(at(c, m, g), 0.0) == pytest.approx(hi - lo, abs=1e-12 * max(c, m))


@settings(max_examples=200)
@given(
    c=st.floats(2.0, 20.0),
    rel_det=st.floats(-0.499, 0.499),
    ratio=st.floats(1e-4, 0.0499),
)
def test_rwa_close_to_full_formula_for_weak_coupling(c, rel_det, ratio):
    m, g = c * (1 + rel_det), ratio * c
    full = np.array(normal_modes(c, m, g))
    rwa = np.array(hybrid_eigenfrequencies_rwa(at(c, m, g), 0.0))
    rel = np.max(np.abs(full - rwa) / full)
    assert rel < ratio**2 * 10


def test_rwa_one_percent_coupling_moderate_detuning():
    # the counter-rotating shift g**2/(c+m) pushes the error past 1e-4 once the
    # magnon sits below ~0.75 c, so the check stops at |c - m| <= 1.5 GHz
    c = 6.0
    for m in np.linspace(4.5, 7.5, 25):
        full = np.array(normal_modes(c, m, 0.06))
        rwa = np.array(hybrid_eigenfrequencies_rwa(at(c, m, 0.06), 0.0))
        assert np.max(np.abs(full - rwa) / full) < 1e-4


@settings(max_examples=200)
@given(
    c=st.floats(1.0, 20.0),
    m=st.floats(1.0, 20.0),
    gr=st.floats(0.0, 0.999),
)
def test_level_repulsion(c, m, gr):
    g = gr * 0.5 * math.sqrt(c * m)  # stays inside the stable region
    lo, hi = normal_modes(c, m, g)
    tol = 1e-12 * max(c, m)
    assert lo <= min(c, m) + tol
    assert hi >= max(c, m) - tol


def test_transition_minimum_at_resonance():
    m = HybridModel(5.87, 0.4, Linear(2.061, 0.1231))
    b = np.linspace(0.0, 0.3, 30001)
    w = cmp_transition(m, b)
    i = int(np.argmin(w))
    b_res = 5.87 / (2.061 * CONSTANTS.bohr_magneton_over_planck) - 0.1231
    assert b[i] == pytest.approx(b_res, abs=2e-5)
    assert w[i] == pytest.approx(0.8, rel=1e-6)
    assert np.all(w >= 0.8 - 1e-12)
