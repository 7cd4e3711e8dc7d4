"""Batch scenario pipelines behind the CLI subcommands.

Each scenario consumes a validated RunConfig, runs the physics pipeline, and
writes the frozen export schemas of :mod:`spdclayers.exports`. Angles are
written in degrees, matching the figure conventions; frequencies as the
normalized ratio 2 omega_s / omega_p0 where applicable.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import observables as obs
from .constants import CONSTANTS, wavelength_to_omega
from .designer import efficiency_sweep, select_best
from .errors import InvalidArgument
from .exports import config_hash, write_csv, write_json
from .geometry import detector_rotation_angle
from .linear_optics import transmission_spectrum
from .pump import PumpConfig, cw_spectral_weight
from .runconfig import RunConfig, build_pump, build_stack, pol_pair, resolved_dict
from .twophoton import (SignalGrid, IdlerGrid, TwoPhotonAmplitude,
                        _apply_detector_rotation, assemble_phi)

_C = CONSTANTS.c


def _grid_override(sec: dict, overrides: dict, key_w: str, key_h: str) -> tuple:
    if overrides.get("grid"):
        return overrides["grid"]
    return sec.get(key_w), sec.get(key_h)


def _uniaxial(cfg: RunConfig) -> bool:
    return bool(cfg.section("simulation").get("uniaxial", False))


# ---------------------------------------------------------------------------

def run_transmission(cfg: RunConfig, out_dir, overrides=None) -> list:
    overrides = overrides or {}
    sec = cfg.section("transmission")
    stack = build_stack(cfg)
    pump = build_pump(cfg)
    n_points = int(overrides.get("grid", (sec.get("n_points", 2048),))[0]
                   or sec.get("n_points", 2048))
    vs = sec.get("vs", "theta")
    cfg_hash = config_hash(resolved_dict(cfg, "transmission", overrides))
    uni = _uniaxial(cfg)
    if vs == "theta":
        lam = float(sec.get("wavelength_nm", 800.0)) * 1e-9
        omega = wavelength_to_omega(lam)
        theta = np.deg2rad(np.linspace(sec.get("theta_min_deg", 0.0),
                                       sec.get("theta_max_deg", 89.0), n_points))
        spec = transmission_spectrum(stack, ("TE", "TM"), omega=omega, theta=theta,
                                     uniaxial=uni)
        rows = [(math.degrees(x), te, tm) for x, te, tm
                in zip(spec.x, spec.values["TE"], spec.values["TM"])]
        cols = ("theta_deg", "T_TE", "T_TM")
        meta = [("fixed", f"wavelength_nm={lam * 1e9:.9g}")]
    elif vs == "omega":
        lo = float(sec.get("omega_ratio_min", 0.2))
        hi = float(sec.get("omega_ratio_max", 1.3))
        omega = np.linspace(lo, hi, n_points) * pump.omega_0
        theta = math.radians(float(sec.get("fixed_theta_deg", 0.0)))
        spec = transmission_spectrum(stack, ("TE", "TM"), omega=omega, theta=theta,
                                     uniaxial=uni)
        rows = [(x, te, tm) for x, te, tm
                in zip(spec.x, spec.values["TE"], spec.values["TM"])]
        cols = ("omega_rad_s", "T_TE", "T_TM")
        meta = [("fixed", f"theta_deg={math.degrees(theta):.9g}")]
    else:
        raise InvalidArgument(f"transmission.vs must be 'theta' or 'omega', got {vs!r}")
    path = write_csv(Path(out_dir) / "transmission.csv", "transmission", cols, rows,
                     cfg_hash, meta)
    return [path]


# ---------------------------------------------------------------------------

def _signal_window(sec: dict, pump: PumpConfig, n_omega: int, n_theta: int):
    lo = float(sec.get("omega_ratio_min", 0.7))
    hi = float(sec.get("omega_ratio_max", 1.3))
    omega = np.linspace(lo / 2.0, hi / 2.0, n_omega) * pump.omega_0
    theta = np.deg2rad(np.linspace(float(sec.get("theta_min_deg", 1.0)),
                                   float(sec.get("theta_max_deg", 80.0)), n_theta))
    return omega, theta


def run_spectrum(cfg: RunConfig, out_dir, overrides=None) -> list:
    """Relative density eta over (2 omega_s / omega_p0, theta_s) at fixed psi_s."""
    overrides = overrides or {}
    sec = cfg.section("spectrum")
    stack = build_stack(cfg)
    pump = build_pump(cfg)
    if not pump.collimated:
        raise InvalidArgument("the spectrum scenario requires a collimated pump (r_p = inf)")
    gw, gh = _grid_override(sec, overrides, "n_omega", "n_theta")
    n_omega = int(gw or 256)
    n_theta = int(gh or 256)
    omega, theta = _signal_window(sec, pump, n_omega, n_theta)
    psi0 = math.radians(float(sec.get("psi_s_deg", 0.0)))
    channel = sec.get("channel", "FF")
    pair = pol_pair(sec.get("polarization", "sum"))

    phi = assemble_phi(stack, pump, SignalGrid(omega, theta, np.array([psi0])),
                       channels=(channel,), uniaxial=_uniaxial(cfg))
    pd = obs.pair_density(phi)
    ref = obs.reference_density(stack, omega, pump)
    eta = obs.relative_density(pd, ref, pol_pair=pair)
    values = eta.values[channel][:, :, 0]

    cfg_hash = config_hash(resolved_dict(cfg, "spectrum", overrides))
    rows = []
    for i, w in enumerate(omega):
        ratio = 2.0 * w / pump.omega_0
        for j, th in enumerate(theta):
            rows.append((ratio, math.degrees(th), values[i, j]))
    path = write_csv(Path(out_dir) / "spectrum.csv", "spectrum",
                     ("omega_ratio", "theta_s_deg", "eta"), rows, cfg_hash,
                     [("channel", channel), ("psi_s_deg", f"{math.degrees(psi0):.9g}"),
                      ("n_omega", n_omega), ("n_theta", n_theta)])
    return [path]


# ---------------------------------------------------------------------------

def _z_rotation_invariant(d: np.ndarray, tol: float = 1e-12) -> bool:
    for ang in (0.5235987755982988, 1.2, 2.0):
        c, s = math.cos(ang), math.sin(ang)
        r = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        rd = np.einsum("ja,kb,mc,abc->jkm", r, r, r, d)
        if not np.allclose(rd, d, atol=tol * max(1.0, abs(d).max())):
            return False
    return True


def collimated_profile(stack, pump, omega, theta, psi, channel="FF",
                       uniaxial=False, psi_block=16):
    """Transverse profile for a collimated, normally incident pump.

    Uses the rotational decomposition phi(psi) = cos(psi - chi) phi_x -
    sin(psi - chi) phi_y, valid when every d tensor is invariant under
    rotations about the stack normal (checked; falls back to per-psi
    assembly otherwise). Returns (TransverseProfile, PairDensity-metadata).
    """
    rot_ok = (pump.theta_p == 0.0
              and all(_z_rotation_invariant(ly.material.d_tensor)
                      for ly in stack.layers if ly.material.is_nonlinear))
    grid0 = SignalGrid(omega, theta, np.array([0.0]))
    if not rot_ok:
        values = {channel: np.zeros((len(theta), len(psi), 2, 2))}
        for j, p in enumerate(psi):
            phi = assemble_phi(stack, pump, SignalGrid(omega, theta, np.array([p])),
                               channels=(channel,), uniaxial=uniaxial)
            pd = obs.pair_density(phi)
            prof = obs.transverse_profile(pd)
            values[channel][:, j] = prof.values[channel][:, 0]
        return obs.TransverseProfile(values, theta.reshape(-1, 1), psi,
                                     "arbitrary", {"path": "general"})

    phi_x = assemble_phi(stack, pump, grid0, channels=(channel,), uniaxial=uniaxial,
                         pump_jones=(1.0, 0.0))
    phi_y = assemble_phi(stack, pump, grid0, channels=(channel,), uniaxial=uniaxial,
                         pump_jones=(0.0, 1.0))
    ax = phi_x.channels[channel][:, :, 0]          # (Nw, Nt, 2, 2), TE/TM basis
    ay = phi_y.channels[channel][:, :, 0]
    theta_i = phi_x.theta_i[:, :, 0]
    omega_i = phi_x.omega_i[:, :, 0]
    evan = phi_x.evanescent[:, :, 0]
    jac = _C ** 2 / (omega_i ** 2 * np.clip(np.cos(theta_i), 1e-9, None))
    cw = cw_spectral_weight(pump)
    chi = pump.polarization

    out = np.zeros((len(theta), len(psi), 2, 2))
    for start in range(0, len(psi), psi_block):
        blk = psi[start:start + psi_block]
        cosd = np.cos(blk - chi)[None, None, :]
        sind = np.sin(blk - chi)[None, None, :]
        mix = (cosd[..., None, None] * ax[:, :, None]
               - sind[..., None, None] * ay[:, :, None])
        rot = _apply_detector_rotation(
            {channel: mix}, theta.reshape(1, -1, 1), blk.reshape(1, 1, -1),
            theta_i[:, :, None], blk.reshape(1, 1, -1), mix.shape[:-2])[channel]
        dens = cw * np.abs(rot) ** 2 * jac[:, :, None, None, None]
        dens[evan] = 0.0
        out[:, start:start + len(blk)] = obs._trapz(dens, omega, axis=0)
    return obs.TransverseProfile({channel: out}, theta.reshape(-1, 1), psi,
                                 "arbitrary", {"path": "rotational"})


def run_profile(cfg: RunConfig, out_dir, overrides=None) -> list:
    overrides = overrides or {}
    sec = cfg.section("profile")
    stack = build_stack(cfg)
    pump = build_pump(cfg)
    if not pump.collimated:
        raise InvalidArgument("the profile scenario requires a collimated pump (r_p = inf)")
    gw, gh = _grid_override(sec, overrides, "n_theta", "n_psi")
    n_theta = int(gw or 256)
    n_psi = int(gh or 128)
    n_omega = int(sec.get("n_omega", 128))
    omega, theta = _signal_window(
        {"omega_ratio_min": sec.get("omega_ratio_min", 0.7),
         "omega_ratio_max": sec.get("omega_ratio_max", 1.3),
         "theta_min_deg": sec.get("theta_min_deg", 1.0),
         "theta_max_deg": sec.get("theta_max_deg", 85.0)}, pump, n_omega, n_theta)
    psi = np.deg2rad(np.linspace(float(sec.get("psi_min_deg", -90.0)),
                                 float(sec.get("psi_max_deg", 90.0)), n_psi))
    channel = sec.get("channel", "FF")
    norm = sec.get("normalization", "quadrant")

    profile = collimated_profile(stack, pump, omega, theta, psi, channel,
                                 uniaxial=_uniaxial(cfg))
    values = profile.polarization_sum(channel)
    if norm == "quadrant":
        mu = np.abs(np.sin(theta))[:, None]
        inner = obs._trapz(values * mu, theta, axis=0)
        total = obs._trapz(inner, psi, axis=0)
        if total > 0:
            values = values * ((math.pi / 180.0) ** 2 / 4.0 / total)

    cfg_hash = config_hash(resolved_dict(cfg, "profile", overrides))
    rows = []
    for i, th in enumerate(theta):
        for j, p in enumerate(psi):
            rows.append((math.degrees(th), math.degrees(p), values[i, j]))
    path = write_csv(Path(out_dir) / "profile.csv", "profile",
                     ("theta_s_deg", "psi_s_deg", "n_tr"), rows, cfg_hash,
                     [("channel", channel), ("normalization", norm),
                      ("n_theta", n_theta), ("n_psi", n_psi), ("n_omega", n_omega),
                      ("rings", obs.count_rings(
                          obs.TransverseProfile({channel: values[..., None, None]},
                                                theta, psi), channel))])
    return [path]


# ---------------------------------------------------------------------------

def auto_psi_window(pump: PumpConfig, theta_s0: float) -> float:
    """Half-width (rad) capturing the pump-envelope spread along psi_i."""
    if pump.collimated:
        return 0.0
    k_half = pump.omega_0 / 2.0 / _C
    sin_t = max(abs(math.sin(theta_s0)), 0.05)
    return min(max(6.0 / (pump.r_p * k_half * sin_t), 5e-4), math.pi / 4)


def corr_area_kernel(stack, pump, theta_s0, psi_s0, *, omega, half_window_theta,
                     n_theta_i, psi_half=None, n_psi_i=33, channel="FF",
                     uniaxial=False) -> TwoPhotonAmplitude:
    """Kernel for a correlated-area map around the conjugate idler direction."""
    theta_i0 = -theta_s0
    psi_i0 = -psi_s0
    sig = SignalGrid(omega, np.array([theta_s0]), np.array([psi_s0]))
    if pump.collimated:
        return assemble_phi(stack, pump, sig, channels=(channel,), uniaxial=uniaxial)
    if psi_half is None:
        psi_half = auto_psi_window(pump, theta_s0)
    th_i = theta_i0 + np.linspace(-half_window_theta, half_window_theta, n_theta_i)
    ps_i = psi_i0 + np.linspace(-psi_half, psi_half, n_psi_i)
    th_i = np.clip(th_i, -math.pi / 2 + 1e-6, math.pi / 2 - 1e-6)
    return assemble_phi(stack, pump, sig, IdlerGrid(th_i, ps_i),
                        channels=(channel,), uniaxial=uniaxial)


def run_corr_area(cfg: RunConfig, out_dir, overrides=None) -> list:
    overrides = overrides or {}
    sec = cfg.section("corr_area")
    stack = build_stack(cfg)
    pump = build_pump(cfg)
    if "r_p_mm" in sec:   # scenario-local pump width (figures pair one structure
        r_p = sec["r_p_mm"]                       # with several pump settings)
        r_p_m = math.inf if r_p == "inf" else float(r_p) * 1e-3
        pump = PumpConfig(omega_0=pump.omega_0, r_p=r_p_m,
                          polarization=pump.polarization, theta_p=pump.theta_p,
                          psi_p=pump.psi_p,
                          detection_half_interval=pump.detection_half_interval,
                          amplitude=pump.amplitude)
    gw, gh = _grid_override(sec, overrides, "n_theta_i", "n_psi_i")
    n_ti = int(gw or 161)
    n_pi = int(gh or 33)
    n_omega = int(sec.get("n_omega", 96))
    theta_s0 = math.radians(float(sec.get("theta_s0_deg", 38.0)))
    psi_s0 = math.radians(float(sec.get("psi_s0_deg", 0.0)))
    lo = float(sec.get("omega_ratio_min", 0.7)) / 2.0
    hi = float(sec.get("omega_ratio_max", 1.3)) / 2.0
    omega = np.linspace(lo, hi, n_omega) * pump.omega_0
    half_t = math.radians(float(sec.get("half_window_theta_deg", 4.0)))
    psi_w = sec.get("psi_window_deg")
    psi_half = math.radians(float(psi_w)) if psi_w is not None else None
    channel = sec.get("channel", "FF")

    phi = corr_area_kernel(stack, pump, theta_s0, psi_s0, omega=omega,
                           half_window_theta=half_t, n_theta_i=n_ti,
                           psi_half=psi_half, n_psi_i=n_pi, channel=channel,
                           uniaxial=_uniaxial(cfg))
    pd = obs.pair_density(phi)
    area = obs.correlated_area(pd, theta_s0, psi_s0, channel=channel,
                               window_half_theta=half_t)

    cfg_hash = config_hash(resolved_dict(cfg, "corr-area", overrides))
    rows = []
    for i, dt in enumerate(area.dtheta_i):
        for j, dp in enumerate(area.dpsi_i):
            rows.append((math.degrees(dt), math.degrees(dp), area.values[i, j]))
    path = write_csv(Path(out_dir) / "corr_area.csv", "corr-area",
                     ("dtheta_i_deg", "dpsi_i_deg", "n_cor"), rows, cfg_hash,
                     [("theta_s0_deg", f"{math.degrees(theta_s0):.9g}"),
                      ("psi_s0_deg", f"{math.degrees(psi_s0):.9g}"),
                      ("mode", area.mode), ("channel", channel),
                      ("islands", len(area.islands))])
    return [path]


# ---------------------------------------------------------------------------

def run_design_sweep(cfg: RunConfig, out_dir, overrides=None) -> list:
    overrides = overrides or {}
    sec = cfg.section("design_sweep")
    pump = build_pump(cfg)
    struct = cfg.section("structure")
    db = cfg.materials
    mat_a = db[struct.get("material_a", "GaN")]
    mat_b = db[struct.get("material_b", "AlN")]
    n_layers = int(sec.get("layers", struct.get("layers", 11)))
    ratios = np.arange(float(sec.get("ratio_min", 0.1)),
                       float(sec.get("ratio_max", 2.0)) + 1e-12,
                       float(sec.get("ratio_step", 0.01)))
    gw, gh = _grid_override(sec, overrides, "n_omega", "n_theta")
    n_grid = (int(gw or 64), int(gh or 64))
    pair = pol_pair(sec.get("polarization", "perp-par"))
    sweep = efficiency_sweep(
        mat_a, mat_b, n_layers, ratios, sec.get("peak_side", "lower"), pump.omega_0,
        psi_s0=math.radians(float(sec.get("psi_s0_deg", 0.0))),
        channel=sec.get("channel", "FF"), pol_pair=pair,
        pump_polarization=pump.polarization,
        monitor=sec.get("monitor", "eta_max"), n_grid=n_grid)

    cfg_hash = config_hash(resolved_dict(cfg, "design-sweep", overrides))
    rows = []
    for p in sweep.points:
        rows.append((p.ratio, p.peak_side,
                     p.l_a * 1e9 if not p.gap else math.nan,
                     p.l_b * 1e9 if not p.gap else math.nan,
                     p.eta_max if not p.gap else math.nan,
                     1.0 if p.gap else 0.0))
    csv_path = write_csv(Path(out_dir) / "sweep.csv", "sweep",
                         ("L", "peak_side", "l_a_nm", "l_b_nm", "eta_max", "gap_flag"),
                         rows, cfg_hash,
                         [("layers", n_layers), ("monitor", sweep.monitor)])
    top = []
    try:
        for p in select_best(sweep, int(sec.get("top_k", 5))):
            top.append({"L": p.ratio, "peak_side": p.peak_side, "l_a_nm": p.l_a * 1e9,
                        "l_b_nm": p.l_b * 1e9, "eta_max": p.eta_max})
    except Exception:
        pass
    json_path = write_json(Path(out_dir) / "sweep_top.json", "sweep-top",
                           {"layers": n_layers, "peak_side": sweep.peak_side,
                            "monitor": sweep.monitor, "top": top}, cfg_hash)
    return [csv_path, json_path]


SCENARIO_RUNNERS = {
    "transmission": run_transmission,
    "spectrum": run_spectrum,
    "profile": run_profile,
    "corr-area": run_corr_area,
    "design-sweep": run_design_sweep,
}
