"""Reductions of the two-photon kernel to measurable densities.

Conventions (cw pump): the pair density is the cw-regularized squared kernel,
n = (2T/2pi) |phi|^2, kept per direction channel and per detector
polarization pair. For a collimated pump the idler is bound, and the signal
density per signal mode carries the kinematic factor c^2/(omega_i^2 cos
theta_i) from consuming the transverse delta functions; the matched reference
structure experiences the same kinematics, so the relative density is the
plain pointwise ratio of the pair density to the reference density

    ref(omega_s) = (2T/2pi) m(omega_s)^2 (sum_l max d^(l) L_l)^2

with m the frequency measure shared with the kernel. All quadratures are
composite trapezoids on the stored grids with |sin theta| Jacobians where the
emission measure requires them; reductions are fixed-order and deterministic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, signal

from .constants import CONSTANTS
from .errors import InvalidArgument, WindowMiss
from .pump import cw_spectral_weight
from .stack import Stack
from .twophoton import TwoPhotonAmplitude, _measure

_C = CONSTANTS.c

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


def _trapz(y, x, axis):
    return np.trapezoid(y, x=x, axis=axis) if hasattr(np, "trapezoid") else np.trapz(y, x=x, axis=axis)


@dataclass
class PairDensity:
    """(2T/2pi)|phi|^2 on the kernel grids, per channel and pol pair."""

    mode: str
    channels: dict                  # name -> real array grid_shape + (2, 2)
    omega_s: np.ndarray
    theta_s: np.ndarray
    psi_s: np.ndarray
    omega_i: np.ndarray
    theta_i: np.ndarray
    psi_i: np.ndarray
    cw_weight: float
    pump: object
    stack_fingerprint: str
    meta: dict = field(default_factory=dict)

    def polarization_sum(self, channel: str) -> np.ndarray:
        return self.channels[channel].sum(axis=(-2, -1))


def pair_density(phi: TwoPhotonAmplitude) -> PairDensity:
    w = cw_spectral_weight(phi.pump)
    channels = {ch: w * np.abs(arr) ** 2 for ch, arr in phi.channels.items()}
    return PairDensity(
        mode=phi.mode, channels=channels,
        omega_s=phi.omega_s, theta_s=phi.theta_s, psi_s=phi.psi_s,
        omega_i=phi.omega_i, theta_i=phi.theta_i, psi_i=phi.psi_i,
        cw_weight=w, pump=phi.pump, stack_fingerprint=phi.stack_fingerprint,
        meta=dict(phi.meta))


@dataclass
class SignalDensity:
    """Mean signal-photon density over signal modes, idler traced out."""

    values: dict                    # channel -> (n_omega, n_theta_s, n_psi_s, 2, 2)
    omega_s: np.ndarray
    theta_s: np.ndarray
    psi_s: np.ndarray
    meta: dict = field(default_factory=dict)

    def polarization_sum(self, channel: str) -> np.ndarray:
        return self.values[channel].sum(axis=(-2, -1))


def _collimated_jacobian(pd: PairDensity) -> np.ndarray:
    cos_i = np.cos(pd.theta_i)
    return _C ** 2 / (pd.omega_i ** 2 * np.where(cos_i <= 1e-9, 1e-9, cos_i))


def signal_density(pd: PairDensity) -> SignalDensity:
    """Trace out the idler: bound-kinematics factor (collimated) or angular
    quadrature with the |sin theta_i| Jacobian (focused)."""
    values = {}
    if pd.mode == "collimated":
        jac = _collimated_jacobian(pd)
        for ch, arr in pd.channels.items():
            values[ch] = arr * jac[..., None, None]
    else:
        mu = np.abs(np.sin(pd.theta_i))[..., None, None]
        for ch, arr in pd.channels.items():
            inner = _trapz(arr * mu, pd.psi_i.ravel(), axis=4)
            values[ch] = _trapz(inner, pd.theta_i.ravel(), axis=3)
    return SignalDensity(values, pd.omega_s, pd.theta_s, pd.psi_s, dict(pd.meta))


@dataclass
class TransverseProfile:
    """Frequency-integrated emission profile over (theta_s, psi_s)."""

    values: dict                    # channel -> (n_theta_s, n_psi_s, 2, 2)
    theta_s: np.ndarray
    psi_s: np.ndarray
    normalization: str = "arbitrary"
    meta: dict = field(default_factory=dict)

    def polarization_sum(self, channel: str) -> np.ndarray:
        return self.values[channel].sum(axis=(-2, -1))


def transverse_profile(pd: PairDensity, normalization: str = "arbitrary") -> TransverseProfile:
    """Frequency quadrature of the signal density.

    normalization="quadrant" rescales so that the quadrant integral
    int |sin theta| dtheta int dpsi n equals (pi/180)^2 / 4.
    """
    sd = signal_density(pd)
    omega = pd.omega_s.ravel()
    values = {ch: _trapz(arr, omega, axis=0) for ch, arr in sd.values.items()}
    if normalization == "quadrant":
        theta = sd.theta_s.ravel()
        psi = sd.psi_s.ravel()
        for ch, arr in values.items():
            tot = arr.sum(axis=(-2, -1))
            inner = _trapz(tot * np.abs(np.sin(theta))[:, None], theta, axis=0)
            norm = _trapz(inner, psi, axis=0) if psi.size > 1 else inner.sum()
            if norm > 0:
                values[ch] = arr * ((math.pi / 180.0) ** 2 / 4.0 / norm)
    elif normalization != "arbitrary":
        raise InvalidArgument(f"unknown normalization {normalization!r}")
    return TransverseProfile(values, sd.theta_s, sd.psi_s, normalization, dict(pd.meta))


def ring_profile(profile: TransverseProfile, channel: str = "FF") -> np.ndarray:
    """Azimuth-averaged radial curve of the polarization-summed profile."""
    tot = profile.polarization_sum(channel)
    return tot.mean(axis=1)


def count_rings(profile: TransverseProfile, channel: str = "FF",
                rel_height: float = 0.05, rel_prominence: float = 0.05) -> int:
    """Ring-counting rule: local maxima of the azimuth-averaged radial curve
    with height and prominence both >= 5% of the curve maximum."""
    radial = ring_profile(profile, channel)
    top = float(radial.max())
    if top <= 0:
        return 0
    peaks, _ = signal.find_peaks(radial, height=rel_height * top,
                                 prominence=rel_prominence * top)
    return int(len(peaks))


@dataclass(frozen=True)
class Island:
    weight: float
    centroid_dtheta: float          # offset from the window center (rad)
    centroid_dpsi: float
    n_cells: int


@dataclass
class CorrelatedArea:
    """Idler-angle distribution conditioned on one signal direction."""

    theta_s0: float
    psi_s0: float
    dtheta_i: np.ndarray            # offsets from theta_i0 = -theta_s0 (rad)
    dpsi_i: np.ndarray              # offsets from psi_i0 = -psi_s0 (rad)
    values: np.ndarray              # (n_dtheta, n_dpsi), polarization-summed
    islands: list
    mode: str
    threshold_rel: float
    meta: dict = field(default_factory=dict)

    def integral(self) -> float:
        v = _trapz(self.values, self.dpsi_i, axis=1) if self.dpsi_i.size > 1 \
            else self.values[:, 0]
        return float(_trapz(v, self.dtheta_i, axis=0))


def decompose_islands(values: np.ndarray, dtheta: np.ndarray, dpsi: np.ndarray,
                      threshold_rel: float = 0.05) -> list:
    """Connected components (4-connectivity) above threshold_rel x max,
    sorted by weight (descending), ties by centroid dtheta."""
    top = float(values.max())
    if top <= 0.0:
        return []
    mask = values >= threshold_rel * top
    labels, n = ndimage.label(mask, structure=_FOUR_CONN)
    islands = []
    for lab in range(1, n + 1):
        sel = labels == lab
        w = float(values[sel].sum())
        ti = dtheta[np.nonzero(sel)[0]]
        pi_ = dpsi[np.nonzero(sel)[1]]
        vv = values[sel]
        islands.append(Island(w, float((ti * vv).sum() / vv.sum()),
                              float((pi_ * vv).sum() / vv.sum()), int(sel.sum())))
    islands.sort(key=lambda a: (-a.weight, a.centroid_dtheta))
    return islands


def correlated_area(pd: PairDensity, theta_s0: float, psi_s0: float,
                    channel: str = "FF", threshold_rel: float = 0.05,
                    window_half_theta: float | None = None) -> CorrelatedArea:
    """Frequency-integrated joint density over the idler window.

    The signal direction must be on the pair-density grid. For a focused pump
    the stored idler window is used directly; for a collimated pump the
    distribution lives on the bound-idler curve and is resampled onto a
    uniform dtheta_i grid (restricted to +-window_half_theta around the
    conjugate direction when given) with the exact change-of-variables
    weight. Raises WindowMiss when the window captures a negligible share of
    the correlated weight (exact criterion for collimated kernels, boundary
    heuristic for focused ones).
    """
    it = int(np.argmin(np.abs(pd.theta_s.ravel() - theta_s0)))
    ip = int(np.argmin(np.abs(pd.psi_s.ravel() - psi_s0)))
    if not (math.isclose(pd.theta_s.ravel()[it], theta_s0, abs_tol=1e-12)
            and math.isclose(pd.psi_s.ravel()[ip], psi_s0, abs_tol=1e-12)):
        raise InvalidArgument("(theta_s0, psi_s0) must lie on the signal grid")

    if pd.mode == "focused":
        dens = pd.channels[channel].sum(axis=(-2, -1))[:, it, ip, :, :]
        omega = pd.omega_s.ravel()
        ncor = _trapz(dens, omega, axis=0) if omega.size > 1 else dens[0]
        dtheta = pd.theta_i.ravel() - (-theta_s0)
        dpsi = pd.psi_i.ravel() - (-psi_s0)
        top = float(ncor.max())
        if top <= 0.0:
            raise WindowMiss("correlated-area window holds no weight")
        edge = np.concatenate([ncor[0, :], ncor[-1, :], ncor[:, 0], ncor[:, -1]])
        if float(edge.max()) > 0.5 * top:
            warnings.warn("correlated weight reaches the window boundary; "
                          "the idler window may truncate the distribution",
                          UserWarning, stacklevel=2)
        islands = decompose_islands(ncor, dtheta, dpsi, threshold_rel)
        return CorrelatedArea(theta_s0, psi_s0, dtheta, dpsi, ncor, islands,
                              "focused", threshold_rel, dict(pd.meta))

    # collimated: distribution on the bound curve theta_i(omega_s)
    dens = pd.channels[channel].sum(axis=(-2, -1))[:, it, ip]
    omega = pd.omega_s.ravel()
    th_i = pd.theta_i[:, it, ip] if pd.theta_i.ndim == 3 else pd.theta_i.ravel()
    keep = np.abs(th_i) < math.pi / 2 - 1e-9   # drop evanescent-clipped points
    if keep.sum() < 4:
        raise WindowMiss("bound idler curve is almost entirely evanescent")
    dens, omega, th_i = dens[keep], omega[keep], th_i[keep]
    order = np.argsort(th_i)
    th_sorted = th_i[order]
    f_sorted = dens[order]
    # density per unit theta_i: n(omega) |d omega / d theta_i|
    dwdth = np.gradient(omega[order], th_sorted)
    curve = f_sorted * np.abs(dwdth)
    total = float(_trapz(curve, th_sorted, axis=0))
    lo, hi = th_sorted[0], th_sorted[-1]
    if window_half_theta is not None:
        lo = max(lo, -theta_s0 - window_half_theta)
        hi = min(hi, -theta_s0 + window_half_theta)
        if not lo < hi:
            raise WindowMiss("idler window does not intersect the bound curve")
    n_bins = max(64, 4 * omega.size)
    dtheta_grid = np.linspace(lo, hi, n_bins) - (-theta_s0)
    resampled = np.interp(dtheta_grid + (-theta_s0), th_sorted, curve)
    window = float(_trapz(resampled, dtheta_grid, axis=0))
    if total > 0.0 and window < 1e-6 * total:
        raise WindowMiss("idler window captures < 1e-6 of the correlated weight")
    values = resampled[:, None]
    islands = decompose_islands(values, dtheta_grid, np.array([0.0]), threshold_rel)
    return CorrelatedArea(theta_s0, psi_s0, dtheta_grid, np.array([0.0]), values,
                          islands, "collimated", threshold_rel, dict(pd.meta))


def count_theta_groups(area: CorrelatedArea, prominence_rel: float = 0.2,
                       height_rel: float = 0.1):
    """Major humps of the correlated area along dtheta_i.

    Groups fine zig-zag fragments into distinguishable maxima: peaks of the
    psi-integrated marginal with height >= height_rel and prominence >=
    prominence_rel of the marginal maximum. Returns their dtheta_i positions.
    """
    marg = area.values.sum(axis=1)
    top = float(marg.max())
    if top <= 0.0:
        return np.array([])
    peaks, _ = signal.find_peaks(marg, height=height_rel * top,
                                 prominence=prominence_rel * top)
    return area.dtheta_i[peaks]


def azimuthal_spread(area: CorrelatedArea) -> float:
    """RMS width of the correlated area along psi_i (rad)."""
    if area.dpsi_i.size < 2:
        return 0.0
    marg = _trapz(area.values, area.dtheta_i, axis=0)
    norm = _trapz(marg, area.dpsi_i, axis=0)
    if norm <= 0:
        return 0.0
    mean = _trapz(marg * area.dpsi_i, area.dpsi_i, axis=0) / norm
    var = _trapz(marg * (area.dpsi_i - mean) ** 2, area.dpsi_i, axis=0) / norm
    return float(np.sqrt(max(var, 0.0)))


def total_pairs(pd: PairDensity, channel: str = "FF", pol_pair=None) -> float:
    """Overall mean pair number: full quadrature with both emission Jacobians."""
    arr = pd.channels[channel]
    arr = arr.sum(axis=(-2, -1)) if pol_pair is None else arr[..., pol_pair[0], pol_pair[1]]
    if pd.mode == "collimated":
        arr = arr * _collimated_jacobian(pd)
    else:
        mu_i = np.abs(np.sin(pd.theta_i.ravel()))
        inner = _trapz(arr * mu_i[None, None, None, :, None], pd.psi_i.ravel(), axis=4)
        arr = _trapz(inner, pd.theta_i.ravel(), axis=3)
    theta = pd.theta_s.ravel()
    arr = arr * np.abs(np.sin(theta))[None, :, None]
    psi = pd.psi_s.ravel()
    arr = _trapz(arr, psi, axis=2) if psi.size > 1 else arr[:, :, 0]
    arr = _trapz(arr, theta, axis=1) if theta.size > 1 else arr[:, 0]
    omega = pd.omega_s.ravel()
    return float(_trapz(arr, omega, axis=0)) if omega.size > 1 else float(arr[0])


@dataclass
class ReferenceDensity:
    """Signal density of the matched fully-phase-matched reference structure."""

    omega_s: np.ndarray
    values: np.ndarray              # cw_weight * measure^2 * (sum max(d) L)^2
    d_length: float                 # sum_l max(d^(l)) L_l, pm/V x m

    def __post_init__(self):
        if np.any(self.values <= 0.0):
            raise InvalidArgument("reference density must be strictly positive")


def reference_density(stack: Stack, omega_s, pump) -> ReferenceDensity:
    """Reference structure of Eqs. (ideal pair source): same nonlinear lengths,
    largest tensor element, full phase matching, no back-scattering."""
    nl = stack.nonlinear_layers()
    if not nl:
        raise InvalidArgument("stack has no nonlinear layer; reference undefined")
    d_len = float(sum(stack.layers[i].material.d_max * stack.layers[i].length for i in nl))
    if d_len <= 0.0:
        raise InvalidArgument("largest nonlinear coefficient is not positive")
    omega_s = np.asarray(omega_s, dtype=float)
    meas = _measure(omega_s, pump.omega_0 - omega_s, pump.omega_0) * pump.amplitude
    values = cw_spectral_weight(pump) * meas ** 2 * d_len ** 2
    return ReferenceDensity(omega_s, values, d_len)


@dataclass
class RelativeDensity:
    values: dict                    # channel -> (n_omega, n_theta, n_psi) pol-summed
    omega_s: np.ndarray
    theta_s: np.ndarray
    psi_s: np.ndarray
    meta: dict = field(default_factory=dict)

    def max(self, channel: str = "FF") -> float:
        return float(self.values[channel].max())


def relative_density(pd: PairDensity, ref: ReferenceDensity, pol_pair=None) -> RelativeDensity:
    """eta = pair density / reference density, pointwise in the signal mode.

    Defined for collimated kernels, where both densities share the bound-idler
    kinematic factors, which therefore cancel in the ratio.
    """
    if pd.mode != "collimated":
        raise InvalidArgument("relative density is defined for collimated kernels")
    denom = ref.values.reshape(pd.omega_s.shape)
    values = {}
    for ch, arr in pd.channels.items():
        num = arr.sum(axis=(-2, -1)) if pol_pair is None else arr[..., pol_pair[0], pol_pair[1]]
        values[ch] = num / denom
    return RelativeDensity(values, pd.omega_s, pd.theta_s, pd.psi_s, dict(pd.meta))
