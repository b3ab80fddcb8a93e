"""
Command-line interface.

Parameter precedence is: command-line flag > ``POLARITON_SEED`` (seed only) >
``--config`` JSON file > preset. Exit status 0 on success, 2 on invalid
usage or data, 3 on I/O failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import fieldmaps as fm
from . import io as pio
from .errors import FitError, PolaritonError
from .metrology import D1_THRESHOLD, D2_THRESHOLD, sensitivity_report
from .model import HybridModel, Linear, SmoothTurnover
from .presets import LIFE_WINDOWS, MODELS, SYNTH_GRIDS
from .spectroscopy import extract_ridges, fit_avoided_crossing, synth_s21_map, usc_bound
from .spectroscopy.fit import model_from_dict, model_to_dict
from .spectroscopy.synth import KAPPA_CAVITY, KAPPA_MAGNON

EXIT_USAGE, EXIT_IO = 2, 3
# destinations do not change results; keep them out of the digest
_UNRECORDED = {"out", "scan_out"}


class Settings:
    """Resolve parameters from flags, environment, config file and defaults."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file = {}
        if getattr(args, "config", None):
            with open(args.config) as fh:
                try:
                    self.file = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise PolaritonError(f"config file is not valid JSON: {exc}") from None
            if not isinstance(self.file, dict):
                raise PolaritonError("config file must hold a JSON object")
        self.effective = {"command": args.command}

    def get(self, key, default=None):
        val = getattr(self.args, key, None)
        if val is None and key == "seed" and os.environ.get("POLARITON_SEED"):
            try:
                val = int(os.environ["POLARITON_SEED"])
            except ValueError:
                raise PolaritonError("POLARITON_SEED must be an integer") from None
        if val is None:
            val = self.file.get(key)
        if val is None:
            val = default
        if isinstance(val, tuple):
            val = list(val)
        if key not in _UNRECORDED:
            self.effective[key] = val
        return val

    @property
    def digest(self) -> str:
        return pio.config_digest(self.effective)


def _require(st: Settings, key: str, flag: str):
    val = st.get(key)
    if val is None:
        raise PolaritonError(f"{flag} is required")
    return val


def _emit(text: str, out) -> None:
    if out:
        pio.atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _report(st: Settings, body: dict) -> str:
    return pio.json_text({"config": st.effective, "config_sha256": st.digest, **body})


def _model(st: Settings) -> HybridModel:
    preset = st.get("preset", "block")
    if preset not in MODELS:
        raise PolaritonError(f"unknown preset {preset!r}; choose from {sorted(MODELS)}")
    base = MODELS[preset]
    if st.get("init_fit"):
        with open(st.get("init_fit")) as fh:
            base = model_from_dict(json.load(fh)["model"])
    d = base.dispersion
    if isinstance(d, Linear):
        d = Linear(st.get("g_eff", d.g_eff), st.get("b_off", d.b_off))
    elif isinstance(d, SmoothTurnover):
        d = SmoothTurnover(
            Linear(st.get("g_eff", d.rising.g_eff), st.get("b_off", d.rising.b_off)),
            Linear(st.get("g_eff_m", d.falling.g_eff), st.get("b_off_m", d.falling.b_off)),
            st.get("blend_width", d.blend_width),
        )
    return HybridModel(st.get("omega_c", base.omega_c), st.get("g", base.g_cm), d)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    st = Settings(args)
    m = _model(st)
    grid = SYNTH_GRIDS.get(st.get("preset", "block"), SYNTH_GRIDS["block"])
    b = np.linspace(st.get("b_min", grid["b_min"]), st.get("b_max", grid["b_max"]), st.get("n_b", grid["n_b"]))
    f = np.linspace(st.get("f_min", grid["f_min"]), st.get("f_max", grid["f_max"]), st.get("n_f", grid["n_f"]))
    s = synth_s21_map(
        m, b, f,
        linewidths=(st.get("kappa_c", KAPPA_CAVITY), st.get("kappa_m", KAPPA_MAGNON)),
        noise_db=st.get("noise_db", 0.0),
        seed=st.get("seed", 0),
    )
    st.effective["model"] = model_to_dict(m)
    out = st.get("out")
    _emit(pio.spectral_map_text(s, st.digest), out)
    print(pio.json_text(st.effective), file=sys.stderr, end="")
    return 0


def cmd_extract(args) -> int:
    st = Settings(args)
    s = pio.read_spectral_map(_require(st, "map", "--map"))
    r = extract_ridges(s, prominence_db=st.get("prominence_db", 10.0), max_branches=st.get("max_branches", 2))
    _emit(pio.ridge_text(r, st.digest), st.get("out"))
    return 0


def cmd_fit(args) -> int:
    st = Settings(args)
    ridges_path, map_path = st.get("ridges"), st.get("map")
    if bool(ridges_path) == bool(map_path):
        raise PolaritonError("give exactly one of --ridges or --map")
    if map_path:
        r = extract_ridges(
            pio.read_spectral_map(map_path),
            prominence_db=st.get("prominence_db", 10.0),
            max_branches=st.get("max_branches", 2),
        )
    else:
        r = pio.read_ridges(ridges_path)
    init = _model(st)
    stage = st.get("stage", "A")
    preset = st.get("preset", "block")
    default_rise = LIFE_WINDOWS["rising"] if preset == "life" else None
    default_fall = LIFE_WINDOWS["falling"] if preset == "life" else None
    res = fit_avoided_crossing(
        r, init, stage=stage,
        window=st.get("window"),
        poly_order=st.get("poly_order", 3),
        rising_window=st.get("rising_window", default_rise),
        falling_window=st.get("falling_window", default_fall),
        max_iter=st.get("max_iter", 200),
    )
    _emit(_report(st, res.to_dict()), st.get("out"))
    return 0


def cmd_couple(args) -> int:
    st = Settings(args)
    omega_c = st.get("omega_c")
    if omega_c is None:
        raise PolaritonError("--omega-c is required (field maps carry no frequency)")
    fmap = pio.read_field_map(_require(st, "field_map", "--field-map"), omega_c)
    mats = fm.load_materials(st.get("materials_file"))
    name = st.get("material", "yig")
    if name not in mats:
        raise PolaritonError(f"unknown material {name!r}")
    mat = mats[name]
    eta, zeta_m = fm.check_invariants(fmap)
    try:
        zeta_e = fm.filling_factor_electric(fmap)
    except PolaritonError:
        zeta_e = None
    rates = fm.coupling_components(fmap, mat)
    g = fm.first_principles_coupling(eta, omega_c, mat)
    body = {
        "eta": eta,
        "zeta_m": zeta_m,
        "zeta_e": zeta_e,
        "g_x_ghz": rates.g_x,
        "g_y_ghz": rates.g_y,
        "g_z_ghz": rates.g_z,
        "omega_z_ghz": rates.omega_z,
        "g_cm_ghz": g,
        "g_over_omega_c": g / omega_c,
        "regime": fm.classify_regime(g, omega_c),
    }
    _emit(_report(st, body), st.get("out"))
    return 0


def cmd_predict(args) -> int:
    st = Settings(args)
    g = st.get("g")
    if g is None:
        raise PolaritonError("--g is required")
    mats = fm.load_materials(st.get("materials_file"))
    src, dst = st.get("from_material", "yig"), st.get("to_material", "life")
    for nm in (src, dst):
        if nm not in mats:
            raise PolaritonError(f"unknown material {nm!r}")
    scaled = fm.material_scale(g, mats[src], mats[dst])
    body = {"g_known_ghz": g, "g_scaled_ghz": scaled, "factor": scaled / g if g else None}
    omega_c = st.get("omega_c")
    if omega_c:
        body["g_over_omega_c"] = scaled / omega_c
        body["regime"] = fm.classify_regime(scaled, omega_c)
    _emit(_report(st, body), st.get("out"))
    return 0


def cmd_magic(args) -> int:
    st = Settings(args)
    if st.get("preset") is None:
        st.effective["preset"] = args.preset = "life"
    m = _model(st)
    bracket = st.get("bracket", list(LIFE_WINDOWS["bracket"]))
    rep = sensitivity_report(
        m, bracket,
        detune_baseline=st.get("detune", 5.0),
        n_scan=st.get("n_scan", 201),
        d1_threshold=st.get("d1_threshold", D1_THRESHOLD),
        d2_threshold=st.get("d2_threshold", D2_THRESHOLD),
    )
    scan_out = st.get("scan_out")
    if scan_out:
        pio.atomic_write(scan_out, pio.scan_text(rep.scan, st.digest))
    _emit(_report(st, rep.to_dict()), st.get("out"))
    return 0


def cmd_report(args) -> int:
    st = Settings(args)
    if st.get("fit"):
        with open(st.get("fit")) as fh:
            m = model_from_dict(json.load(fh)["model"])
    else:
        m = _model(st)
    mats = fm.load_materials(st.get("materials_file"))
    body = {
        "model": model_to_dict(m),
        "g_over_omega_c": m.g_cm / m.omega_c,
        "regime": fm.classify_regime(m.g_cm, m.omega_c),
        "g_scaled_to_life_ghz": fm.material_scale(m.g_cm, mats["yig"], mats["life"]),
    }
    if isinstance(m.dispersion, Linear) and m.dispersion.slope > 0:
        body["usc_bound_tesla"] = usc_bound(m)
    _emit(_report(st, body), st.get("out"))
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _model_flags(p):
    p.add_argument("--preset", choices=sorted(MODELS), default=None)
    p.add_argument("--omega-c", type=float, help="cavity frequency (GHz)")
    p.add_argument("--g", type=float, help="coupling rate (GHz)")
    p.add_argument("--g-eff", type=float, help="(rising) effective g-factor")
    p.add_argument("--b-off", type=float, help="(rising) offset field (T)")
    p.add_argument("--g-eff-m", type=float, help="falling-asymptote g-factor")
    p.add_argument("--b-off-m", type=float, help="falling-asymptote offset field (T)")
    p.add_argument("--blend-width", type=float, help="turnover blend width (GHz)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polariton", description="Cavity-magnon polariton modelling and analysis.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out_help="output file (default: stdout)"):
        p.add_argument("--config", help="JSON file with parameter values")
        p.add_argument("--out", help=out_help)

    p = sub.add_parser("synth", help="synthesise an S21 map")
    common(p)
    _model_flags(p)
    for name in ("b-min", "b-max", "f-min", "f-max", "kappa-c", "kappa-m", "noise-db"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("--n-b", type=int)
    p.add_argument("--n-f", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract ridges from an S21 map")
    common(p)
    p.add_argument("--map")
    p.add_argument("--prominence-db", type=float)
    p.add_argument("--max-branches", type=int)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("fit", help="fit an avoided crossing")
    common(p)
    _model_flags(p)
    p.add_argument("--ridges")
    p.add_argument("--map")
    p.add_argument("--init-fit", help="FitResult JSON whose model seeds the fit")
    p.add_argument("--stage", choices=["A", "B", "C"])
    p.add_argument("--window", type=float, nargs=2)
    p.add_argument("--rising-window", type=float, nargs=2)
    p.add_argument("--falling-window", type=float, nargs=2)
    p.add_argument("--poly-order", type=int)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--prominence-db", type=float)
    p.add_argument("--max-branches", type=int)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("couple", help="coupling rates from a field map")
    common(p)
    p.add_argument("--field-map")
    p.add_argument("--omega-c", type=float, help="mode frequency (GHz)")
    p.add_argument("--material")
    p.add_argument("--materials-file")
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("predict", help="rescale a coupling to another material")
    common(p)
    p.add_argument("--g", type=float)
    p.add_argument("--from", dest="from_material")
    p.add_argument("--to", dest="to_material")
    p.add_argument("--omega-c", type=float)
    p.add_argument("--materials-file")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("magic", help="double-magic sensitivity report")
    common(p)
    _model_flags(p)
    p.add_argument("--bracket", type=float, nargs=2)
    p.add_argument("--detune", type=float, help="baseline detuning in units of g")
    p.add_argument("--n-scan", type=int)
    p.add_argument("--d1-threshold", type=float)
    p.add_argument("--d2-threshold", type=float)
    p.add_argument("--scan-out", help="CSV scan table")
    p.set_defaults(func=cmd_magic)

    p = sub.add_parser("report", help="coupling-regime summary of a fit or preset")
    common(p)
    _model_flags(p)
    p.add_argument("--fit", help="FitResult JSON")
    p.add_argument("--materials-file")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PolaritonError, FitError, ValueError, KeyError) as exc:
        print(f"polariton {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"polariton {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
