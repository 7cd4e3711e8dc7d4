"""Transfer-matrix propagation of monochromatic TE/TM plane waves.

Conventions (documented once, used everywhere):

* Field in layer l is ``A_F exp(+i K_l (z - z_{l-1})) + A_B exp(-i K_l (z - z_{l-1}))``
  with K_l = n_l(omega) * omega * cos(theta_l) / c >= 0; the left half-space is
  referenced at z_0, the right half-space at z_N.
* Interface matrices map amplitudes on the right of a boundary to amplitude
  values on its left, derived from continuity of tangential E and H for the
  polarization triads of :mod:`spdclayers.geometry`:

  - TE:  D = 1/2 [[1+g, 1-g], [1-g, 1+g]],            g  = n2 cos2 / (n1 cos1)
  - TM:  D = 1/2 [[gn+gc, gn-gc], [gn-gc, gn+gc]],    gn = n2/n1, gc = cos2/cos1

  With these, the single-boundary field reflection at normal incidence is
  r = (n1-n2)/(n1+n2) for TE and r = (n2-n1)/(n1+n2) for TM (the sign pair is
  fixed by the TM polarization-vector convention e_TM = k x e_TE).
* Intensity transmission through the air-surrounded stack is T = |t|^2 (the
  exterior flux factors cancel); R = |r|^2 and T + R = 1 for lossless stacks.

The chain is evaluated in order at double precision; stacks here are at most
a few hundred lossless layers, so no scattering-matrix reformulation is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import CONSTANTS
from .errors import InvalidArgument, NotFound, SingularMatrix
from .stack import Stack

_C = CONSTANTS.c


@dataclass(frozen=True)
class ModeCoordinates:
    """Emission-mode coordinates: angular frequency and exterior angles (rad).

    theta is the radial emission angle measured from +z outside the structure
    (signed, |theta| <= pi/2); psi is the azimuthal angle in the xy plane.
    """

    omega: float
    theta: float = 0.0
    psi: float = 0.0

    def __post_init__(self):
        if not (self.omega > 0.0):
            raise InvalidArgument("omega must be positive")
        if abs(self.theta) > math.pi / 2 or abs(self.psi) > math.pi / 2:
            raise InvalidArgument("angles must lie in [-pi/2, pi/2]")


@dataclass(frozen=True)
class SnellResult:
    sin_theta: float
    theta: float
    evanescent: bool


def snell_internal_angle(n_outside: float, theta_outside: float, n_layer: float) -> SnellResult:
    """Internal propagation angle from Snell's law (signed, evanescent-flagged)."""
    s = n_outside * math.sin(theta_outside) / n_layer
    if abs(s) > 1.0:
        return SnellResult(s, math.nan, True)
    return SnellResult(s, math.asin(s), False)


# ---------------------------------------------------------------------------
# vectorized 2x2 chain machinery (shared with the two-photon kernel)
# ---------------------------------------------------------------------------

def _mat_mul(a, b):
    a00, a01, a10, a11 = a
    b00, b01, b10, b11 = b
    return (a00 * b00 + a01 * b10, a00 * b01 + a01 * b11,
            a10 * b00 + a11 * b10, a10 * b01 + a11 * b11)


def _interface(n1, c1, n2, c2, pol):
    if pol == "TE":
        g = (n2 * c2) / (n1 * c1)
        p, m = 0.5 * (1.0 + g), 0.5 * (1.0 - g)
    elif pol == "TM":
        gn = n2 / n1
        gc = c2 / c1
        p, m = 0.5 * (gn + gc), 0.5 * (gn - gc)
    else:
        raise InvalidArgument(f"polarization must be 'TE' or 'TM', got {pol!r}")
    return (p, m, m, p)


class Chain:
    """Transfer chain of one stack for one polarization over broadcast grids.

    omega and sin_theta_out (exterior, signed) may be any mutually
    broadcastable arrays; every derived quantity keeps their broadcast shape.
    """

    def __init__(self, stack: Stack, omega, sin_theta_out, pol: str, uniaxial: bool = False):
        self.stack = stack
        self.pol = pol
        self.uniaxial = bool(uniaxial)
        self.omega = np.asarray(omega, dtype=float)
        self.sin_out = np.asarray(sin_theta_out, dtype=float)
        if pol not in ("TE", "TM"):
            raise InvalidArgument(f"polarization must be 'TE' or 'TM', got {pol!r}")
        self._index_cache: dict = {}
        self._medium_cache: dict = {}
        self._iface_cache: dict = {}
        self._m_total = None

    # -- per-medium optics ---------------------------------------------------

    def _indices(self, material):
        key = id(material)
        if key not in self._index_cache:
            n_o = np.asarray(material.n_ordinary.index(self.omega), dtype=float)
            if self.uniaxial and self.pol == "TM":
                n_e = np.asarray(material.n_extraordinary.index(self.omega), dtype=float)
            else:
                n_e = n_o
            self._index_cache[key] = (n_o, n_e)
        return self._index_cache[key]

    def medium(self, region: int):
        """(n_eff, cos_theta, K_forward, sin_theta) for region 0..N+1."""
        if region in self._medium_cache:
            return self._medium_cache[region]
        if region == 0 or region == self.stack.n_layers + 1:
            sin_t = self.sin_out + 0j
            cos_t = np.sqrt(1.0 - self.sin_out ** 2) + 0j
            n = np.ones_like(cos_t)
            k = self.omega * cos_t / _C
        else:
            mat = self.stack.layers[region - 1].material
            n_o, n_e = self._indices(mat)
            if self.uniaxial and self.pol == "TM" and n_e is not n_o:
                # extraordinary wave, optic axis along z:
                # K_z = n_o (omega/c) sqrt(1 - sin^2(theta_out)/n_e^2)
                cz2 = 1.0 - (self.sin_out / n_e) ** 2
                cz = np.sqrt(cz2.astype(complex))
                k = n_o * self.omega * cz / _C
                kt = self.omega * self.sin_out / _C
                n = np.sqrt((kt ** 2 + (n_o * self.omega / _C) ** 2 * cz2).astype(complex)) * _C / self.omega
                cos_t = k * _C / (n * self.omega)
                sin_t = kt * _C / (n * self.omega) + 0j
            else:
                sin_t = (self.sin_out / n_o) + 0j
                cos_t = np.sqrt((1.0 - (self.sin_out / n_o) ** 2).astype(complex))
                n = n_o + 0j
                k = n_o * self.omega * cos_t / _C
        out = (n, cos_t, k, sin_t)
        self._medium_cache[region] = out
        return out

    # -- chain passes ----------------------------------------------------------

    def _interface_matrix(self, left_region: int):
        if left_region in self._iface_cache:
            return self._iface_cache[left_region]
        n1, c1, _, _ = self.medium(left_region)
        n2, c2, _, _ = self.medium(left_region + 1)
        out = _interface(n1, c1, n2, c2, self.pol)
        self._iface_cache[left_region] = out
        return out

    def total_matrix(self):
        """M with (A_F, A_B)^(0) = M (A_F, A_B)^(N+1), as a 4-tuple of arrays."""
        if self._m_total is not None:
            return self._m_total
        n_lay = self.stack.n_layers
        acc = None
        for l in range(n_lay, 0, -1):
            d = self._interface_matrix(l)
            acc = d if acc is None else _mat_mul(d, acc)
            _, _, k, _ = self.medium(l)
            ph = np.exp(-1j * k * self.stack.layers[l - 1].length)
            acc = (acc[0] * ph, acc[1] * ph, acc[2] / ph, acc[3] / ph)
        d0 = self._interface_matrix(0)
        self._m_total = _mat_mul(d0, acc) if n_lay else d0
        return self._m_total

    def sweep(self, right_vectors):
        """Iterate layers l = N..1, propagating amplitude cases from region N+1.

        right_vectors: list of (A_F, A_B) pairs referenced at z_N. Yields
        (l, cases, K_l, sin_l, cos_l) with cases the left-referenced layer
        amplitudes; after the loop, region-0 values follow from
        :meth:`close_sweep`.
        """
        cases = [(np.asarray(af) + 0j, np.asarray(ab) + 0j) for af, ab in right_vectors]
        for l in range(self.stack.n_layers, 0, -1):
            d = self._interface_matrix(l)
            _, cos_l, k, sin_l = self.medium(l)
            ph = np.exp(1j * k * self.stack.layers[l - 1].length)
            new = []
            for af, ab in cases:
                vf = d[0] * af + d[1] * ab
                vb = d[2] * af + d[3] * ab
                new.append((vf / ph, vb * ph))
            cases = new
            yield l, cases, k, sin_l, cos_l

    def close_sweep(self, cases):
        """Region-0 amplitude values at z_0 from the layer-1 amplitudes."""
        d = self._interface_matrix(0)
        return [(d[0] * af + d[1] * ab, d[2] * af + d[3] * ab) for af, ab in cases]

    # -- boundary solutions ----------------------------------------------------

    def scattering(self):
        """(t, r, r', t'): left-input transmission/reflection and right-input ones.

        det(M) telescopes over the interface determinants to
        (n c)_{N+1} / (n c)_0 -- evaluated analytically, since forming
        m00 m11 - m01 m10 cancels catastrophically for long stacks.
        """
        m00, m01, m10, _ = self.total_matrix()
        bad = np.abs(m00) < 1e-300
        if np.any(bad):
            raise SingularMatrix("degenerate transfer chain (M00 ~ 0)")
        n0, c0, _, _ = self.medium(0)
        n1, c1, _, _ = self.medium(self.stack.n_layers + 1)
        det = (n1 * c1) / (n0 * c0)
        t = 1.0 / m00
        r = m10 * t
        r_rev = -m01 * t
        t_rev = det * t
        return t, r, r_rev, t_rev

    def outgoing_basis_right_vectors(self):
        """Right-boundary (A_F, A_B)^(N+1) pairs for outgoing bases (1,0) and (0,1).

        Basis vectors are unit outgoing amplitude in the forward (region N+1)
        and backward (region 0) exits; the in-layer amplitudes swept from them
        are the coefficients mapping outgoing modes to in-layer modes.
        """
        m00, m01, m10, m11 = self.total_matrix()
        bad = np.abs(m11) < 1e-300
        if np.any(bad):
            raise SingularMatrix("degenerate transfer chain (M11 ~ 0)")
        one = np.ones(np.broadcast(self.omega, self.sin_out).shape, dtype=complex)
        case_f = (one, -m10 / m11)        # outgoing (F, B) = (1, 0)
        case_b = (np.zeros_like(one), 1.0 / m11)   # outgoing (F, B) = (0, 1)
        return [case_f, case_b]


@dataclass
class LayerAmplitudes:
    """Forward/backward field coefficients in every region 0..N+1."""

    pol: str
    mode: ModeCoordinates
    a_f: np.ndarray          # (N+2,) complex
    a_b: np.ndarray          # (N+2,) complex
    k_forward: np.ndarray    # (N+2,) complex, K_z of the forward wave
    sin_internal: np.ndarray # (N+2,) complex


def layer_amplitudes(stack: Stack, mode: ModeCoordinates, pol: str,
                     boundary_in=(1.0, 0.0), uniaxial: bool = False) -> LayerAmplitudes:
    """Solve the stack for given incoming amplitudes (A_F^(0), A_B^(N+1))."""
    chain = Chain(stack, mode.omega, math.sin(mode.theta), pol, uniaxial)
    a_in, b_in = complex(boundary_in[0]), complex(boundary_in[1])
    m00, m01, m10, m11 = chain.total_matrix()
    if abs(m00) < 1e-300:
        raise SingularMatrix("degenerate transfer chain (M00 ~ 0)")
    af_right = (a_in - m01 * b_in) / m00
    ab_left = m10 * af_right + m11 * b_in

    n_reg = stack.n_layers + 2
    a_f = np.zeros(n_reg, dtype=complex)
    a_b = np.zeros(n_reg, dtype=complex)
    k_fwd = np.zeros(n_reg, dtype=complex)
    sin_int = np.zeros(n_reg, dtype=complex)

    a_f[-1], a_b[-1] = af_right, b_in
    _, _, k, s = chain.medium(stack.n_layers + 1)
    k_fwd[-1], sin_int[-1] = k, s
    last_cases = None
    for l, cases, k, sin_l, _ in chain.sweep([(af_right, b_in)]):
        a_f[l], a_b[l] = cases[0]
        k_fwd[l], sin_int[l] = k, sin_l
        last_cases = cases
    (vf0, vb0), = chain.close_sweep(last_cases)
    a_f[0], a_b[0] = vf0, vb0
    _, _, k0, s0 = chain.medium(0)
    k_fwd[0], sin_int[0] = k0, s0
    return LayerAmplitudes(pol, mode, a_f, a_b, k_fwd, sin_int)


@dataclass
class TransmissionSpectrum:
    """Intensity transmission sampled over a frequency or angle grid."""

    x: np.ndarray            # grid (rad/s when x_kind == "omega", rad otherwise)
    x_kind: str              # "omega" | "theta"
    values: dict             # pol -> T array
    fixed: dict = field(default_factory=dict)  # the held coordinate, e.g. {"theta": 0.0}

    def transmission(self, pol: str) -> np.ndarray:
        return self.values[pol]


def transmission_spectrum(stack: Stack, pols=("TE", "TM"), *, omega, theta,
                          uniaxial: bool = False) -> TransmissionSpectrum:
    """T for unit left input over an omega grid (fixed theta) or theta grid.

    Exactly one of omega/theta may be an array; the other is the held scalar.
    Includes the exterior flux factors, which are unity for air on both sides.
    """
    omega_arr = np.asarray(omega, dtype=float)
    theta_arr = np.asarray(theta, dtype=float)
    if omega_arr.ndim > 0 and theta_arr.ndim > 0:
        raise InvalidArgument("only one of omega/theta may be a grid")
    if omega_arr.ndim == 0 and theta_arr.ndim == 0:
        omega_arr = omega_arr.reshape(1)
    if omega_arr.size == 0 or theta_arr.size == 0:
        raise InvalidArgument("grid must be non-empty")
    if np.any(np.abs(theta_arr) >= np.pi / 2):
        raise InvalidArgument("theta must satisfy |theta| < pi/2")
    values = {}
    for pol in pols:
        chain = Chain(stack, omega_arr, np.sin(theta_arr), pol, uniaxial)
        t, _, _, _ = chain.scattering()
        values[pol] = np.abs(t) ** 2
    if theta_arr.ndim > 0:
        return TransmissionSpectrum(theta_arr, "theta", values, {"omega": float(omega_arr)})
    return TransmissionSpectrum(omega_arr, "omega", values, {"theta": float(theta_arr)})


# ---------------------------------------------------------------------------
# band and peak analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Band:
    index: int
    x_lo: float
    x_hi: float
    t_min: float
    truncated: bool

    @property
    def width(self) -> float:
        return self.x_hi - self.x_lo


@dataclass(frozen=True)
class Peak:
    band_index: int
    side: str      # "lower" | "upper"
    order: int     # 0 = nearest to the band edge
    x: float       # parabolic-refined position
    height: float


@dataclass
class BandsAndPeaks:
    bands: list
    peaks: list
    x: np.ndarray = field(repr=False)
    t: np.ndarray = field(repr=False)

    def peak(self, band_index: int, side: str, order: int = 0) -> Peak:
        for p in self.peaks:
            if p.band_index == band_index and p.side == side and p.order == order:
                return p
        raise NotFound(f"no {side} peak #{order} at band {band_index}")

    def peak_fwhm(self, peak: Peak) -> float:
        return peak_fwhm(self.x, self.t, peak.x, peak.height)


def peak_fwhm(x, t, x_peak, height) -> float:
    """Half-maximum width of a peak, confined between its adjacent minima.

    When the transmission does not fall to half height before the next local
    minimum (shallow comb peaks), the minima positions bound the width.
    """
    i = int(np.argmin(np.abs(x - x_peak)))
    half = height / 2.0
    j_lo = i
    while j_lo > 0 and t[j_lo - 1] <= t[j_lo]:
        j_lo -= 1
    j_hi = i
    while j_hi < len(t) - 1 and t[j_hi + 1] <= t[j_hi]:
        j_hi += 1
    lo = x[j_lo]
    for j in range(i, j_lo, -1):
        if min(t[j - 1], t[j]) <= half <= max(t[j - 1], t[j]):
            lo = x[j - 1] + (half - t[j - 1]) * (x[j] - x[j - 1]) / (t[j] - t[j - 1])
            break
    hi = x[j_hi]
    for j in range(i, j_hi):
        if min(t[j], t[j + 1]) <= half <= max(t[j], t[j + 1]):
            hi = x[j] + (half - t[j]) * (x[j + 1] - x[j]) / (t[j + 1] - t[j])
            break
    return hi - lo


def _local_maxima(t: np.ndarray) -> np.ndarray:
    """Indices of strict 3-point local maxima (plateau-tolerant on the right)."""
    idx = []
    n = len(t)
    i = 1
    while i < n - 1:
        if t[i] >= t[i - 1] and t[i] > t[i + 1]:
            idx.append(i)
        i += 1
    return np.array(idx, dtype=int)


def find_bands_and_peaks(x, t, gap_threshold: float = 0.5, min_gap_width: float | None = None,
                         peak_floor: float = 0.5) -> BandsAndPeaks:
    """Locate forbidden bands and the transmission peaks flanking them.

    Bands are maximal intervals with T below ``gap_threshold`` times the
    spectrum maximum; below-threshold runs narrower than ``min_gap_width``
    (default: 0.3x the widest run, since neighbor bands have comparable
    widths while inter-peak dips are far narrower) are dips, not bands.
    Peaks are 3-point local maxima with height at least ``peak_floor`` times
    the spectrum maximum, parabolic-refined, and labeled by (band, side,
    order) with order counted away from the band edge. Callers must sample
    finely enough that adjacent peaks are >= 3 grid points apart.
    """
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    if x.ndim != 1 or x.shape != t.shape or len(x) < 5:
        raise InvalidArgument("need matching 1D grids with at least 5 points")
    t_max = float(t.max())
    thr = gap_threshold * t_max
    below = t < thr
    if not np.any(below):
        raise NotFound("no forbidden band in the analyzed window")

    # maximal below-threshold runs
    edges = np.flatnonzero(np.diff(below.astype(int)))
    starts = [0] if below[0] else []
    starts += [int(e) + 1 for e in edges if not below[e]]
    ends = []
    ends += [int(e) for e in edges if below[e]]
    if below[-1]:
        ends.append(len(t) - 1)
    runs = list(zip(starts, ends))
    widths = np.array([x[b] - x[a] for a, b in runs])
    if min_gap_width is None:
        min_gap_width = 0.3 * float(widths.max()) if len(runs) > 1 else 0.0
    bands = []
    for a, b in runs:
        if x[b] - x[a] < min_gap_width:
            continue
        truncated = a == 0 or b == len(t) - 1
        bands.append((a, b, truncated))
    if not bands:
        raise NotFound("no forbidden band wider than the dip filter")
    band_objs = [Band(i + 1, float(x[a]), float(x[b]), float(t[a:b + 1].min()), tr)
                 for i, (a, b, tr) in enumerate(bands)]

    maxima = _local_maxima(t)
    maxima = maxima[t[maxima] >= peak_floor * t_max]

    peaks = []
    for i, (a, b, _) in enumerate(bands):
        lower = maxima[maxima < a][::-1]       # walk away from the lower edge
        upper = maxima[maxima > b]
        for side, idxs in (("lower", lower), ("upper", upper)):
            for order, j in enumerate(idxs):
                if 0 < j < len(t) - 1:
                    denom = t[j - 1] - 2.0 * t[j] + t[j + 1]
                    if denom != 0.0:
                        delta = 0.5 * (t[j - 1] - t[j + 1]) / denom
                        delta = float(np.clip(delta, -0.5, 0.5))
                    else:
                        delta = 0.0
                    xx = x[j] + delta * (x[min(j + 1, len(x) - 1)] - x[j] if delta >= 0
                                         else x[j] - x[j - 1])
                    peaks.append(Peak(i + 1, side, order, float(xx), float(t[j])))
    return BandsAndPeaks(band_objs, peaks, x, t)
