"""Material database: dispersion models and second-order nonlinear tensors.

All materials are uniaxial with the optic axis along the stack normal (z).
The default propagation mode is isotropic-per-polarization (TE and TM both
use the ordinary index); an opt-in uniaxial mode uses the angle-dependent
extraordinary index through :func:`effective_tm_index`.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .constants import CONSTANTS
from .errors import InvalidArgument, OutOfRange

_TWO_PI_C_UM = 2.0 * np.pi * CONSTANTS.c * 1e6  # omega = _TWO_PI_C_UM / lambda_um

# contracted index mu (0-based) -> pairs of cartesian indices (j, k)
_CONTRACTED = {0: [(0, 0)], 1: [(1, 1)], 2: [(2, 2)],
               3: [(1, 2), (2, 1)], 4: [(0, 2), (2, 0)], 5: [(0, 1), (1, 0)]}


@dataclass(frozen=True)
class DispersionModel:
    """Sellmeier (or constant) refractive-index model.

    coefficients: flat [A, B1, C1, B2, C2, ...] with C_i in um^2, or [n] for a
    constant model. Validity range is in vacuum wavelength (um); evaluation
    outside it raises OutOfRange rather than extrapolating.
    """

    kind: str                      # "sellmeier" | "constant"
    coefficients: tuple
    valid_range_um: tuple          # (min_um, max_um)

    def index(self, omega):
        """Refractive index at angular frequency omega (rad/s, scalar or array)."""
        omega = np.asarray(omega, dtype=float)
        lam_um = _TWO_PI_C_UM / omega
        lo, hi = self.valid_range_um
        if np.any(lam_um < lo) or np.any(lam_um > hi):
            raise OutOfRange(
                f"wavelength {float(np.min(lam_um)):.4g}-{float(np.max(lam_um)):.4g} um "
                f"outside validity range [{lo}, {hi}] um"
            )
        if self.kind == "constant":
            return np.broadcast_to(np.float64(self.coefficients[0]), omega.shape).copy()
        lam2 = lam_um * lam_um
        n2 = np.full_like(lam2, self.coefficients[0])
        for i in range(1, len(self.coefficients), 2):
            b, c = self.coefficients[i], self.coefficients[i + 1]
            n2 += b * lam2 / (lam2 - c)
        return np.sqrt(n2)


@dataclass(frozen=True)
class Material:
    """One stack material: name, ordinary/extraordinary dispersion, d tensor (pm/V)."""

    name: str
    n_ordinary: DispersionModel
    n_extraordinary: DispersionModel
    d_tensor: np.ndarray = field(repr=False)   # (3, 3, 3), pm/V
    is_nonlinear: bool = False

    def __post_init__(self):
        d = np.asarray(self.d_tensor, dtype=float)
        if d.shape != (3, 3, 3):
            raise InvalidArgument(f"d tensor of {self.name} must be 3x3x3, got {d.shape}")
        if not np.allclose(d, np.swapaxes(d, 1, 2), atol=0.0):
            raise InvalidArgument(f"d tensor of {self.name} breaks d_ijk = d_ikj symmetry")
        if self.is_nonlinear and not np.any(d):
            raise InvalidArgument(f"{self.name} flagged nonlinear but d tensor is zero")
        if not self.is_nonlinear and np.any(d):
            raise InvalidArgument(f"{self.name} flagged linear but has nonzero d tensor")
        object.__setattr__(self, "d_tensor", d)

    @property
    def d_max(self) -> float:
        """Largest element of the d tensor (pm/V); the reference-structure coefficient."""
        return float(self.d_tensor.max())


def refractive_index(material: Material, axis: str, omega):
    """Index along the ordinary or extraordinary axis at omega (rad/s)."""
    if axis == "ordinary":
        return material.n_ordinary.index(omega)
    if axis == "extraordinary":
        return material.n_extraordinary.index(omega)
    raise InvalidArgument(f"axis must be 'ordinary' or 'extraordinary', got {axis!r}")


def effective_tm_index(material: Material, omega, theta_internal):
    """Extraordinary-wave index at internal propagation angle theta (rad) from z.

    1/n_eff^2 = cos^2(theta)/n_o^2 + sin^2(theta)/n_e^2; reduces to n_o on axis.
    """
    theta = np.asarray(theta_internal, dtype=float)
    if np.any(np.abs(theta) >= np.pi / 2):
        raise OutOfRange("internal angle must satisfy |theta| < pi/2")
    n_o = material.n_ordinary.index(omega)
    n_e = material.n_extraordinary.index(omega)
    ct, st = np.cos(theta), np.sin(theta)
    return 1.0 / np.sqrt((ct / n_o) ** 2 + (st / n_e) ** 2)


def _expand_contracted(rows: dict) -> np.ndarray:
    d = np.zeros((3, 3, 3))
    for i, key in enumerate(("x", "y", "z")):
        row = rows.get(key, [0.0] * 6)
        if len(row) != 6:
            raise InvalidArgument(f"contracted d row {key!r} must have 6 entries")
        for mu, val in enumerate(row):
            for j, k in _CONTRACTED[mu]:
                d[i, j, k] = val
    return d


def _parse_dispersion(table: dict, range_um) -> DispersionModel:
    model = table.get("model")
    if model == "constant":
        return DispersionModel("constant", (float(table["n"]),), tuple(range_um))
    if model == "sellmeier":
        b, c = table["B"], table["C_um2"]
        if len(b) != len(c):
            raise InvalidArgument("Sellmeier B and C_um2 lists differ in length")
        coeffs = [float(table["A"])]
        for bi, ci in zip(b, c):
            coeffs += [float(bi), float(ci)]
        return DispersionModel("sellmeier", tuple(coeffs), tuple(range_um))
    raise InvalidArgument(f"unknown dispersion model {model!r}")


class MaterialDB:
    """Immutable registry of materials loaded from a structured-text file."""

    def __init__(self, materials: dict[str, Material]):
        self._materials = dict(materials)

    def __contains__(self, name: str) -> bool:
        return name in self._materials

    def __getitem__(self, name: str) -> Material:
        try:
            return self._materials[name]
        except KeyError:
            raise InvalidArgument(f"unknown material {name!r}") from None

    def names(self) -> list[str]:
        return sorted(self._materials)

    @classmethod
    def from_file(cls, path) -> "MaterialDB":
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
        schema = doc.pop("schema", None)
        if schema != "spdclayers-materials-v1":
            raise InvalidArgument(f"unsupported material file schema {schema!r}")
        materials = {}
        for name, entry in doc.items():
            rng = entry["range_um"]
            n_o = _parse_dispersion(entry["ordinary"], rng)
            n_e = _parse_dispersion(entry.get("extraordinary", entry["ordinary"]), rng)
            nonlinear = bool(entry.get("nonlinear", False))
            d = _expand_contracted(entry.get("d_pm_per_V", {}))
            materials[name] = Material(name, n_o, n_e, d, nonlinear)
        return cls(materials)


_default_db = None


def default_material_db() -> MaterialDB:
    """The packaged GaN/AlN/air database (loaded once)."""
    global _default_db
    if _default_db is None:
        ref = importlib.resources.files("spdclayers").joinpath("data/materials.toml")
        with importlib.resources.as_file(ref) as path:
            _default_db = MaterialDB.from_file(Path(path))
    return _default_db


def constant_index_material(name: str, n: float, d_tensor=None) -> Material:
    """Dispersion-free material, handy for tests and the designer's trial stacks."""
    model = DispersionModel("constant", (float(n),), (1e-6, 1e9))
    d = np.zeros((3, 3, 3)) if d_tensor is None else np.asarray(d_tensor, float)
    return Material(name, model, model, d, bool(np.any(d)))
