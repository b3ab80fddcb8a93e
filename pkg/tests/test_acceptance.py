"""Acceptance criteria; each test prints one ``PASS``/``FAIL`` line.

Run ``python tests/test_acceptance.py`` for the lines alone, or ``pytest``,
where they also appear in the terminal summary.
"""

import math
import time

import numpy as np
import pytest

from polariton import DomainError, hopfield_oracle
from polariton import fieldmaps as fm
from polariton.metrology import cmp_derivatives, sensitivity_report
from polariton.model import HybridModel, Linear, cmp_transition, normal_modes
from polariton.presets import BLOCK, DISC, LIFE, LIFE_WINDOWS, SYNTH_GRIDS
from polariton.spectroscopy import extract_ridges, fit_avoided_crossing, synth_s21_map, usc_bound

from oracles import mp_derivatives, random_model

RESULTS: list[str] = []


def record(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


def test_criterion_1_normal_modes_match_oracle():
    t0 = time.perf_counter()
    c = 6.0
    worst, stable, refused = 0.0, 0, 0
    consistent = True
    for det in np.linspace(-0.5, 0.5, 10) * c:
        for ratio in np.linspace(0.01, 0.9, 10):
            m, g = c + det, ratio * c
            try:
                lo, hi = normal_modes(c, m, g)
            except DomainError:
                refused += 1
                try:
                    hopfield_oracle(c, m, g)
                    consistent = False
                except DomainError:
                    pass
                continue
            stable += 1
            olo, ohi = hopfield_oracle(c, m, g)
            worst = max(worst, abs(lo - olo) / olo, abs(hi - ohi) / ohi)
    dt = time.perf_counter() - t0
    ok = worst < 1e-10 and consistent and dt < 1.0
    record(1, ok, f"max rel dev {worst:.2e} on {stable} stable points, "
                  f"{refused} unstable points refused by both, {dt:.3f} s")


def test_criterion_2_sphere_form_factor():
    coarse = fm.form_factor(fm.sphere_in_cylinder(n=32))
    fine = fm.form_factor(fm.sphere_in_cylinder(n=64))
    change = abs(fine - coarse) / fine
    ok = abs(coarse - 0.8165) <= 0.002 and change < 2e-3
    record(2, ok, f"eta = {coarse:.5f} (n=32), {fine:.5f} (n=64), refinement change {100 * change:.3f}%")


def test_criterion_3_first_principles_coupling():
    yig = fm.material("yig")
    g1 = fm.first_principles_coupling(0.82, 7.599, yig)
    g2 = fm.first_principles_coupling(0.82, 5.9, yig)
    ok = abs(g1 / 6.7 - 1) < 0.03 and abs(g2 / 5.9 - 1) < 0.03 and abs(g2 / 5.9 - 1.00) <= 0.03
    record(3, ok, f"g = {g1:.3f} GHz at 7.599 GHz, g = {g2:.3f} GHz at 5.9 GHz (g/omega_c = {g2 / 5.9:.3f})")


def test_criterion_4_material_scaling():
    yig, life = fm.material("yig"), fm.material("life")
    k = fm.material_scale(1.0, yig, life)
    a, b = fm.material_scale(2.690, yig, life), fm.material_scale(2.574, yig, life)
    ok = (
        abs(k - math.sqrt(2.13)) <= 1e-3
        and abs(k - 1.4595) <= 1e-3
        and abs(a - 3.93) <= 0.01
        and abs(b - 3.76) <= 0.01
        and abs(a / 5.870 - 0.67) <= 0.01
        and abs(b / 7.599 - 0.50) <= 0.01
    )
    record(4, ok, f"factor {k:.4f}; 2.690 -> {a:.3f} GHz (ratio {a / 5.870:.3f}); "
                  f"2.574 -> {b:.3f} GHz (ratio {b / 7.599:.3f})")


def test_criterion_5_usc_ratios_and_bounds():
    rb, rd = BLOCK.g_cm / BLOCK.omega_c, DISC.g_cm / DISC.omega_c
    bb, bd = usc_bound(BLOCK), usc_bound(DISC)
    ok = abs(rb - 0.458) <= 0.005 and abs(rd - 0.339) <= 0.005 and abs(bb - 0.81) <= 0.01 and abs(bd - 0.90) <= 0.01
    record(5, ok, f"g/omega_c = {rb:.4f} (block), {rd:.4f} (disc); bound {bb:.4f} T (block), {bd:.4f} T (disc)")


def test_criterion_6_fit_recovery():
    # 0.5% of the 120 dB synthetic dynamic range
    noise_db = 0.005 * 120.0
    g = SYNTH_GRIDS["block"]
    b = np.linspace(g["b_min"], g["b_max"], g["n_b"])
    f = np.linspace(g["f_min"], g["f_max"], g["n_f"])
    init = HybridModel(6.0, 2.5, Linear(2.0, 0.1))
    truth = {"omega_c": 5.870, "g_cm": 2.690, "g_eff": 2.061}
    t0 = time.perf_counter()
    good, worst_rel, worst_boff = 0, 0.0, 0.0
    for seed in range(20):
        r = extract_ridges(synth_s21_map(BLOCK, b, f, noise_db=noise_db, seed=seed))
        res = fit_avoided_crossing(r, init)
        rel = max(abs(res.params[k] / v - 1) for k, v in truth.items())
        boff = abs(res.params["b_off"] - 0.1231)
        worst_rel, worst_boff = max(worst_rel, rel), max(worst_boff, boff)
        good += res.valid and rel < 0.01 and boff < 2e-3
    dt = time.perf_counter() - t0
    ok = good == 20 and dt < 60
    record(6, ok, f"{good}/20 redraws converged within tolerance; worst rel err {100 * worst_rel:.3f}%, "
                  f"worst B_off err {1e3 * worst_boff:.3f} mT; {dt:.1f} s")


def test_criterion_7_derivatives():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        m = random_model(rng)
        bb = rng.uniform(0.1, 0.4)
        d1, d2 = cmp_derivatives(m, bb)
        n1, n2 = mp_derivatives(m, bb)
        worst = max(worst, abs(d1 - n1) / abs(n1), abs(d2 - n2) / abs(n2))
    record(7, worst < 1e-6, f"max rel err {worst:.2e} over 100 draws")


def test_criterion_8_double_magic():
    rep = sensitivity_report(LIFE, LIFE_WINDOWS["bracket"], detune_baseline=5.0)
    m = LIFE.replace(omega_c=rep.omega_c_required)
    w = float(cmp_transition(m, rep.B_star))
    ok = (
        abs(rep.d1) < 1e-3
        and abs(rep.d2) < 1.0
        and rep.suppression_ratio_d2 >= 10
        and abs(w - 2 * LIFE.g_cm) < 1e-9
    )
    record(8, ok, f"B* = {rep.B_star:.5f} T, |d1| = {abs(rep.d1):.1e} GHz/T, |d2| = {abs(rep.d2):.1e} GHz/T^2, "
                  f"suppression {rep.suppression_ratio_d2:.2e}, |W(B*) - 2g| = {abs(w - 2 * LIFE.g_cm):.1e} GHz")


def test_criterion_9_determinism(tmp_path, monkeypatch):
    from polariton import io as pio
    from polariton.cli import main

    monkeypatch.delenv("POLARITON_SEED", raising=False)
    field = tmp_path / "field.csv"
    pio.atomic_write(field, pio.field_map_text(fm.sphere_in_cylinder(n=8)))
    m = tmp_path / "in_map.csv"
    main(["synth", "--noise-db", "0.6", "--seed", "4", "--out", str(m)])
    commands = {
        "synth": ["synth", "--noise-db", "0.6", "--seed", "11"],
        "extract": ["extract", "--map", str(m)],
        "fit": ["fit", "--map", str(m), "--omega-c", "6.0", "--g", "2.5"],
        "couple": ["couple", "--field-map", str(field), "--omega-c", "5.9"],
        "predict": ["predict", "--g", "2.69"],
        "magic": ["magic"],
        "report": ["report", "--preset", "block"],
    }
    same = []
    for name, argv in commands.items():
        outs = []
        for k in range(2):
            p = tmp_path / f"{name}{k}.out"
            assert main([*argv, "--out", str(p)]) == 0
            outs.append(p.read_bytes())
        same.append(outs[0] == outs[1])
    record(9, all(same), f"{sum(same)}/{len(same)} commands byte-identical across two runs")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
