"""
Coupling rates and filling factors from a discretised cavity eigenmode.

Fields are real vectors sampled on cells with explicit volumes, so any
(non-uniform) solver export can be used directly. Only ratios of field
integrals enter, so the overall field normalisation is irrelevant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .constants import CONSTANTS
from .errors import ValidationError

SAMPLE, VACUUM, DIELECTRIC = "sample", "vacuum", "dielectric"


def _fsum(x) -> float:
    # compensated summation: result independent of cell ordering
    return math.fsum(np.asarray(x, dtype=float).ravel().tolist())


@dataclass(frozen=True)
class MaterialSpec:
    moment_ratio: float  # mu / mu_B
    spin_density: float  # m^-3
    g_factor: float = 2.0

    def __post_init__(self):
        if not (self.spin_density > 0 and self.moment_ratio > 0 and self.g_factor > 0):
            raise ValidationError("material constants must be positive")

    @property
    def spin_number_density(self) -> float:
        """Macrospin S per unit volume, ``(mu/(g muB)) n_s``."""
        return self.moment_ratio / self.g_factor * self.spin_density

    @property
    def gyromagnetic_ratio(self) -> float:
        """gamma in rad/(s T)."""
        return self.g_factor * CONSTANTS.bohr_magneton / CONSTANTS.hbar


def load_materials(path=None) -> dict[str, MaterialSpec]:
    if path is None:
        text = resources.files("polariton").joinpath("data/materials.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)
    return {name.lower(): MaterialSpec(**vals) for name, vals in raw.items()}


def material(name: str) -> MaterialSpec:
    presets = load_materials()
    try:
        return presets[name.lower()]
    except KeyError:
        raise ValidationError(f"unknown material {name!r}; known: {sorted(presets)}") from None


@dataclass(frozen=True)
class FieldMap:
    """Sampled eigenmode.

    ``positions``, ``E`` and ``H`` are (N, 3) arrays; ``volumes``, ``region``
    and ``eps_r`` have length N. ``omega_c`` is the mode frequency in GHz.
    """

    positions: np.ndarray
    volumes: np.ndarray
    region: np.ndarray
    eps_r: np.ndarray
    E: np.ndarray
    H: np.ndarray
    omega_c: float

    def __post_init__(self):
        n = len(self.volumes)
        for name in ("positions", "E", "H"):
            if np.shape(getattr(self, name)) != (n, 3):
                raise ValidationError(f"{name} must have shape ({n}, 3)")
        if len(self.region) != n or len(self.eps_r) != n:
            raise ValidationError("region/eps_r length mismatch")
        if n == 0 or np.any(~(np.asarray(self.volumes) > 0)):
            raise ValidationError("all cell volumes must be > 0")

    @property
    def sample(self) -> np.ndarray:
        return np.asarray(self.region) == SAMPLE

    @property
    def sample_volume(self) -> float:
        return _fsum(self.volumes[self.sample])

    def scaled(self, e_scale: float = 1.0, h_scale: float = 1.0) -> "FieldMap":
        return FieldMap(self.positions, self.volumes, self.region, self.eps_r,
                        self.E * e_scale, self.H * h_scale, self.omega_c)


def _require_sample(f: FieldMap) -> float:
    vm = f.sample_volume if np.any(f.sample) else 0.0
    if vm <= 0:
        raise ValidationError("field map has no sample cells (V_m = 0)")
    return vm


def _h_energy(f: FieldMap) -> float:
    total = _fsum((f.H**2).sum(axis=1) * f.volumes)
    if total <= 0:
        raise ValidationError("field map has zero magnetic field energy")
    return total


def _sample_projections(f: FieldMap) -> np.ndarray:
    s = f.sample
    return np.array([_fsum(f.H[s, k] * f.volumes[s]) for k in range(3)])


def form_factor(f: FieldMap) -> float:
    """Overlap of the transverse (x, y) cavity H field with the sample."""
    vm = _require_sample(f)
    hx, hy, _ = _sample_projections(f)
    return math.sqrt((hx * hx + hy * hy) / (vm * _h_energy(f)))


def filling_factor_magnetic(f: FieldMap) -> float:
    _require_sample(f)
    s = f.sample
    return _fsum((f.H[s] ** 2).sum(axis=1) * f.volumes[s]) / _h_energy(f)


def filling_factor_electric(f: FieldMap) -> float:
    _require_sample(f)
    dens = f.eps_r * (f.E**2).sum(axis=1) * f.volumes
    total = _fsum(dens)
    if total <= 0:
        raise ValidationError("field map has zero electric field energy")
    return _fsum(dens[f.sample]) / total


def check_invariants(f: FieldMap, tol: float = 1e-12) -> tuple[float, float]:
    """Return ``(eta, zeta_m)`` after asserting ``0 <= eta**2 <= zeta_m <= 1``."""
    eta = form_factor(f)
    zm = filling_factor_magnetic(f)
    if not (0 <= eta <= 1 + tol and eta**2 <= zm + tol and zm <= 1 + tol):
        raise ValidationError(f"field-map invariants violated: eta={eta}, zeta_m={zm}")
    return eta, zm


@dataclass(frozen=True)
class CouplingRates:
    """Interaction-Hamiltonian coefficients in GHz (linear frequency)."""

    g_x: float
    g_y: float
    g_z: float
    omega_z: float

    @property
    def g_cm(self) -> float:
        return math.hypot(self.g_x, self.g_y)


def coupling_components(f: FieldMap, mat: MaterialSpec) -> CouplingRates:
    """Transverse, parametric and static coupling terms of the Zeeman interaction.

    With the mode function normalised to the cavity magnetic energy, each
    component reduces to a field projection over the sample divided by
    ``sqrt(V_m * int |H|^2 dV)``. ``g_y`` is returned as a real number (its
    imaginary unit is absorbed into the magnon phase) and the overall sign of
    the transverse pair is chosen so that ``g_x > 0`` for ``H_x > 0``.
    """
    if not f.omega_c > 0:
        raise ValidationError("omega_c must be > 0")
    vm = _require_sample(f)
    norm = math.sqrt(vm * _h_energy(f))
    px, py, pz = _sample_projections(f) / norm
    w = 2 * math.pi * f.omega_c * 1e9
    gamma = mat.gyromagnetic_ratio
    sv = mat.spin_number_density
    to_ghz = 1.0 / (2 * math.pi * 1e9)
    transverse = 0.5 * gamma * math.sqrt(CONSTANTS.mu0 * sv * CONSTANTS.hbar * w) * to_ghz
    g_z = gamma * math.sqrt(CONSTANTS.mu0 * CONSTANTS.hbar * w / (2 * vm)) * pz * to_ghz
    return CouplingRates(
        g_x=transverse * px,
        g_y=transverse * py,
        g_z=g_z,
        omega_z=-sv * vm * g_z,
    )


def first_principles_coupling(eta: float, omega_c: float, mat: MaterialSpec) -> float:
    """Uniform-mode coupling rate (GHz) for form factor ``eta`` at cavity ``omega_c`` (GHz)."""
    if not 0 <= eta <= 1:
        raise ValidationError("eta must lie in [0, 1]")
    w = 2 * math.pi * omega_c * 1e9
    g = 0.5 * mat.gyromagnetic_ratio * eta * math.sqrt(
        CONSTANTS.mu0 * mat.spin_number_density * CONSTANTS.hbar * w
    )
    return g / (2 * math.pi * 1e9)


def coupling_from_filling_factor(zeta_m: float, omega_c: float, chi_eff: float) -> float:
    """``g = omega_c sqrt(chi_eff zeta_m)``; chi_eff must be supplied by the user."""
    if chi_eff < 0 or not 0 <= zeta_m <= 1:
        raise ValidationError("need chi_eff >= 0 and 0 <= zeta_m <= 1")
    return omega_c * math.sqrt(chi_eff * zeta_m)


def material_scale(g_known: float, source: MaterialSpec, target: MaterialSpec) -> float:
    """Rescale a measured coupling to another material in the same geometry."""
    return g_known * math.sqrt(
        (target.moment_ratio / target.g_factor * target.spin_density)
        / (source.moment_ratio / source.g_factor * source.spin_density)
    )


def rotate_transverse(f: FieldMap, theta: float) -> FieldMap:
    """Rotate positions and field vectors about the bias (z) axis."""
    c, s = math.cos(theta), math.sin(theta)
    rot = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return FieldMap(
        positions=f.positions @ rot.T,
        volumes=f.volumes,
        region=f.region,
        eps_r=f.eps_r,
        E=f.E @ rot.T,
        H=f.H @ rot.T,
        omega_c=f.omega_c,
    )


def align_transverse(f: FieldMap) -> tuple[FieldMap, float]:
    """Rotate about z so the sample-integrated transverse field lies along +x.

    Afterwards ``g_y = 0`` and ``g_x = g_cm``. Returns the rotated map and the angle used.
    """
    _require_sample(f)
    px, py, _ = _sample_projections(f)
    theta = -math.atan2(py, px)
    return rotate_transverse(f, theta), theta


def classify_regime(g: float, omega: float) -> str:
    if g == 0:
        return "no transverse coupling"
    r = g / omega
    if r >= 1:
        return "deep-strong"
    if r >= 0.1:
        return "ultra-strong"
    return "below ultra-strong"


# ---------------------------------------------------------------------------
# synthetic maps used for validation
# ---------------------------------------------------------------------------


def sphere_in_cylinder(radius: float = 1e-3, n: int = 32, omega_c: float = 5.9,
                       direction=(1.0, 0.0, 0.0), subsample: int = 4) -> FieldMap:
    """Uniform H confined to a cylinder (height = diameter) with an inscribed sphere.

    ``n`` cells span the diameter. Boundary cells are split into a sample part
    and a vacuum part whose volumes come from ``subsample**3`` sub-points, so
    the map is a non-uniform mesh rather than a staircase.
    """
    h = 2 * radius / n
    ax = (np.arange(n) + 0.5) * h - radius
    sub = ((np.arange(subsample) + 0.5) / subsample - 0.5) * h
    ox, oy, oz = (a.ravel() for a in np.meshgrid(sub, sub, sub, indexing="ij"))
    x, y, z = (a.ravel() for a in np.meshgrid(ax, ax, ax, indexing="ij"))
    px, py, pz = x[:, None] + ox, y[:, None] + oy, z[:, None] + oz
    rho2 = px**2 + py**2
    frac_cyl = (rho2 <= radius**2).mean(axis=1)
    frac_sph = (rho2 + pz**2 <= radius**2).mean(axis=1)
    cell = h**3
    centres = np.column_stack([x, y, z])
    s_idx = np.flatnonzero(frac_sph > 0)
    v_idx = np.flatnonzero(frac_cyl - frac_sph > 0)
    pos = np.vstack([centres[s_idx], centres[v_idx]])
    vols = np.concatenate([frac_sph[s_idx], (frac_cyl - frac_sph)[v_idx]]) * cell
    region = np.array([SAMPLE] * len(s_idx) + [VACUUM] * len(v_idx))
    m = len(vols)
    return FieldMap(
        positions=pos,
        volumes=vols,
        region=region,
        eps_r=np.ones(m),
        E=np.zeros((m, 3)),
        H=np.tile(np.asarray(direction, dtype=float), (m, 1)),
        omega_c=omega_c,
    )


def two_region_map(zeta_m: float, zeta_e: float = 0.0, n_cells: int = 10, omega_c: float = 5.0,
                   eps_sample: float = 1.0) -> FieldMap:
    """Half the cells are sample; field amplitudes set to the requested energy fractions."""
    if not (0 < zeta_m <= 1 and 0 <= zeta_e <= 1):
        raise ValidationError("fractions must be in (0, 1]")
    half = n_cells // 2
    region = np.array([SAMPLE] * half + [VACUUM] * (n_cells - half))
    vol = np.full(n_cells, 1e-9)
    vs, vv = half * 1e-9, (n_cells - half) * 1e-9
    # per-cell |H|^2 giving sample share zeta_m of the total
    hs = math.sqrt(zeta_m / vs)
    hv = math.sqrt((1 - zeta_m) / vv)
    es = math.sqrt(zeta_e / (vs * eps_sample))
    ev = math.sqrt((1 - zeta_e) / vv)
    H = np.zeros((n_cells, 3))
    H[:half, 0], H[half:, 0] = hs, hv
    E = np.zeros((n_cells, 3))
    E[:half, 2], E[half:, 2] = es, ev
    eps = np.where(region == SAMPLE, eps_sample, 1.0)
    pos = np.column_stack([np.arange(n_cells) * 1e-3, np.zeros(n_cells), np.zeros(n_cells)])
    return FieldMap(pos, vol, region, eps, E, H, omega_c)
