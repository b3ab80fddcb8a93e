"""Fitted parameter sets for the three measured systems (GHz, T)."""

from .model import HybridModel, Linear, SmoothTurnover

# YIG block in a re-entrant cavity
BLOCK = HybridModel(omega_c=5.870, g_cm=2.690, dispersion=Linear(g_eff=2.061, b_off=0.1231))

# YIG disc in a loop-gap cavity (linear-region fit)
DISC = HybridModel(omega_c=7.599, g_cm=2.574, dispersion=Linear(g_eff=2.249, b_off=-0.083))

# LiFe sphere in a two-post re-entrant cavity; the blend width is not a
# measured quantity, 10 MHz keeps the turnover close to the asymptote crossing
LIFE = HybridModel(
    omega_c=5.56,
    g_cm=0.169,
    dispersion=SmoothTurnover(
        rising=Linear(g_eff=2.03, b_off=0.00780),
        falling=Linear(g_eff=-0.70, b_off=-0.751),
        blend_width=0.01,
    ),
)

MODELS = {"block": BLOCK, "disc": DISC, "life": LIFE}

# field windows used with the presets (T)
SYNTH_GRIDS = {
    "block": {"b_min": 0.1, "b_max": 0.8, "n_b": 200, "f_min": 1.0, "f_max": 30.0, "n_f": 400},
    "disc": {"b_min": 0.35, "b_max": 1.0, "n_b": 200, "f_min": 1.0, "f_max": 32.0, "n_f": 400},
    "life": {"b_min": 0.02, "b_max": 0.6, "n_b": 200, "f_min": 0.5, "f_max": 8.0, "n_f": 400},
}

LIFE_WINDOWS = {"rising": (0.02, 0.14), "falling": (0.26, 0.6), "bracket": (0.1, 0.3)}
