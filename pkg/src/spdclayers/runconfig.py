"""Run-configuration files: strict parsing, validation, and object builders.

Configs are TOML. Angles are degrees and lengths nanometres in files (SI and
radians internally). Unknown keys anywhere are rejected so that typos cannot
silently change a run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .constants import wavelength_to_omega
from .errors import InvalidArgument
from .materials import MaterialDB, default_material_db
from .pump import PumpConfig
from .stack import Layer, Stack, build_ab_stack


class ConfigError(InvalidArgument):
    def __init__(self, message: str, key: str = ""):
        super().__init__(message)
        self.key = key


_SCHEMA = {
    "structure": {"material_a", "material_b", "layers", "length_a_nm", "length_b_nm",
                  "layers_list"},
    "materials": {"path"},
    "pump": {"wavelength_nm", "r_p_mm", "polarization_deg", "incidence_theta_deg",
             "incidence_psi_deg", "detection_half_interval_s", "amplitude"},
    "output": {"directory"},
    "simulation": {"uniaxial"},
    "transmission": {"vs", "n_points", "wavelength_nm", "fixed_theta_deg",
                     "theta_min_deg", "theta_max_deg", "omega_ratio_min",
                     "omega_ratio_max"},
    "spectrum": {"omega_ratio_min", "omega_ratio_max", "n_omega", "theta_min_deg",
                 "theta_max_deg", "n_theta", "psi_s_deg", "channel", "polarization"},
    "profile": {"omega_ratio_min", "omega_ratio_max", "n_omega", "theta_min_deg",
                "theta_max_deg", "n_theta", "psi_min_deg", "psi_max_deg", "n_psi",
                "channel", "normalization"},
    "corr_area": {"theta_s0_deg", "psi_s0_deg", "half_window_theta_deg", "n_theta_i",
                  "psi_window_deg", "n_psi_i", "omega_ratio_min", "omega_ratio_max",
                  "n_omega", "channel", "r_p_mm"},
    "design_sweep": {"layers", "ratio_min", "ratio_max", "ratio_step", "peak_side",
                     "psi_s0_deg", "channel", "polarization", "monitor", "top_k",
                     "n_omega", "n_theta"},
}

_SCENARIOS = ("transmission", "spectrum", "profile", "corr-area", "design-sweep")

_POL_PAIRS = {"sum": None, "perp-perp": (0, 0), "perp-par": (0, 1),
              "par-perp": (1, 0), "par-par": (1, 1)}


@dataclass
class RunConfig:
    raw: dict
    path: str
    materials: MaterialDB = field(repr=False, default=None)

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})


def _check_keys(doc: dict, path: str = ""):
    for key, val in doc.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown config section {key!r}", key)
        if not isinstance(val, dict):
            raise ConfigError(f"section {key!r} must be a table", key)
        allowed = _SCHEMA[key]
        for sub in val:
            if sub not in allowed:
                raise ConfigError(f"unknown key {key}.{sub!r}", f"{key}.{sub}")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}", "path") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}", "syntax") from None
    _check_keys(doc)
    if "structure" not in doc:
        raise ConfigError("missing [structure] section", "structure")
    if "pump" not in doc:
        raise ConfigError("missing [pump] section", "pump")
    cfg = RunConfig(doc, str(path))
    mat_path = doc.get("materials", {}).get("path")
    if mat_path:
        p = Path(mat_path)
        if not p.is_absolute():
            p = path.parent / p
        cfg.materials = MaterialDB.from_file(p)
    else:
        cfg.materials = default_material_db()
    _ = build_stack(cfg)
    _ = build_pump(cfg)
    return cfg


def build_stack(cfg: RunConfig) -> Stack:
    sec = cfg.section("structure")
    db = cfg.materials
    if "layers_list" in sec:
        if {"material_a", "material_b", "layers"} & set(sec):
            raise ConfigError("give either layers_list or the a/b shorthand, not both",
                              "structure.layers_list")
        layers = []
        for i, entry in enumerate(sec["layers_list"]):
            if set(entry) != {"material", "length_nm"}:
                raise ConfigError(f"layers_list[{i}] needs exactly material, length_nm",
                                  "structure.layers_list")
            layers.append(Layer(db[entry["material"]], float(entry["length_nm"]) * 1e-9))
        return Stack(tuple(layers))
    for need in ("material_a", "material_b", "layers", "length_a_nm", "length_b_nm"):
        if need not in sec:
            raise ConfigError(f"structure.{need} is required", f"structure.{need}")
    return build_ab_stack(db[sec["material_a"]], db[sec["material_b"]],
                          int(sec["layers"]),
                          float(sec["length_a_nm"]) * 1e-9,
                          float(sec["length_b_nm"]) * 1e-9)


def build_pump(cfg: RunConfig) -> PumpConfig:
    sec = cfg.section("pump")
    if "wavelength_nm" not in sec:
        raise ConfigError("pump.wavelength_nm is required", "pump.wavelength_nm")
    r_p = sec.get("r_p_mm", "inf")
    if isinstance(r_p, str):
        if r_p != "inf":
            raise ConfigError("pump.r_p_mm must be a number (mm) or 'inf'", "pump.r_p_mm")
        r_p_m = math.inf
    else:
        r_p_m = float(r_p) * 1e-3
    return PumpConfig(
        omega_0=wavelength_to_omega(float(sec["wavelength_nm"]) * 1e-9),
        r_p=r_p_m,
        polarization=math.radians(float(sec.get("polarization_deg", 0.0))),
        theta_p=math.radians(float(sec.get("incidence_theta_deg", 0.0))),
        psi_p=math.radians(float(sec.get("incidence_psi_deg", 0.0))),
        detection_half_interval=float(sec.get("detection_half_interval_s", math.pi)),
        amplitude=float(sec.get("amplitude", 1.0)),
    )


def pol_pair(name: str):
    if name not in _POL_PAIRS:
        raise ConfigError(f"unknown polarization selector {name!r} "
                          f"(one of {sorted(_POL_PAIRS)})", "polarization")
    return _POL_PAIRS[name]


def resolved_dict(cfg: RunConfig, scenario: str, overrides: dict) -> dict:
    """Canonical dict feeding the config hash in output headers."""
    return {"config_file": Path(cfg.path).name, "scenario": scenario,
            "config": cfg.raw, "overrides": overrides}
