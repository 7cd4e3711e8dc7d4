"""Two-photon spectral amplitude of down-conversion in a layer stack.

The kernel accumulates, layer by layer, the overlap of the pump field with a
signal/idler mode pair:

    sum_l  d^(l) : e_p e_s* e_i*  x  int_0^{L_l} exp(i dK z) dz
           x  A_p^(l)  x  conj(U_s^(l))  x  conj(U_i^(l))

summed over forward/backward directions and TE/TM polarizations of all three
fields. A_p are the in-layer pump coefficients for the incident pump; U maps
in-layer signal/idler modes onto the outgoing exits (F: transmitted to +z,
B: to -z) and is obtained from the same transfer chain solved with unit
outgoing amplitudes. The z integral equals exp(i dK L/2) L sinc(dK L/2).

Frequencies enter through the dimensionless measure
m = (w_s w_i / w_p^2)^2 sqrt(w_s w_i) / w_p; for a focused pump every grid
pair is additionally weighted by the pump angular spectrum at k_s + k_i (and
1/cos theta_p); for a collimated pump the idler direction is bound by exact
transverse phase matching. Absolute prefactors (xi_p^2/(4 c^16), the cw
2T/(2 pi) weight, emission-angle Jacobians) are applied by the observables
reductions, so kernel magnitudes are in arbitrary units of pm/V x m.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._kernels import HAVE_NUMBA, layer_accumulate, materialize
from .constants import CONSTANTS
from .errors import GridTooCoarseWarning, InvalidArgument
from .geometry import (
    detector_rotation_angle,
    detector_rotation_matrix,
    direction_from_transverse_k,
    polarization_vector,
    transverse_k,
)
from .linear_optics import Chain
from .pump import PumpConfig, transverse_envelope
from .stack import Stack

_C = CONSTANTS.c
_CHANNELS = ("FF", "FB", "BF", "BB")
_DIR_SIGN = np.array([1.0, -1.0])        # F, B
_POLS = ("TE", "TM")


@dataclass(frozen=True)
class SignalGrid:
    """Tensor-product signal grid: frequencies (rad/s) and exterior angles (rad)."""

    omega: np.ndarray
    theta: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        for name in ("omega", "theta", "psi"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, arr)
        if np.any(self.omega <= 0.0):
            raise InvalidArgument("signal frequencies must be positive")
        if np.any(np.abs(self.theta) >= np.pi / 2) or np.any(np.abs(self.psi) > np.pi / 2):
            raise InvalidArgument("signal angles must lie inside (-pi/2, pi/2)")


@dataclass(frozen=True)
class IdlerGrid:
    """Idler angle grid for focused-pump kernels."""

    theta: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        for name in ("theta", "psi"):
            arr = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            object.__setattr__(self, name, arr)
        if np.any(np.abs(self.theta) >= np.pi / 2) or np.any(np.abs(self.psi) > np.pi / 2):
            raise InvalidArgument("idler angles must lie inside (-pi/2, pi/2)")


@dataclass
class TwoPhotonAmplitude:
    """Sampled kernel phi per direction channel, in the detector (perp, par) basis.

    channels maps 'FF'/'FB'/'BF'/'BB' to complex arrays of shape
    grid_shape + (2, 2); the trailing axes are (signal pol, idler pol) with
    index 0 = perp, 1 = par. Collimated kernels have grid_shape
    (n_omega, n_theta_s, n_psi_s) with the bound idler coordinates stored;
    focused kernels append (n_theta_i, n_psi_i).
    """

    mode: str
    channels: dict
    omega_s: np.ndarray
    theta_s: np.ndarray
    psi_s: np.ndarray
    omega_i: np.ndarray
    theta_i: np.ndarray
    psi_i: np.ndarray
    evanescent: np.ndarray
    pump: PumpConfig
    stack_fingerprint: str
    meta: dict = field(default_factory=dict)

    @property
    def grid_shape(self) -> tuple:
        return next(iter(self.channels.values())).shape[:-2]

    def density(self, channel: str, pol_pair=None) -> np.ndarray:
        """|phi|^2, either one (signal, idler) polarization pair or pol-summed."""
        phi = self.channels[channel]
        if pol_pair is None:
            return np.sum(np.abs(phi) ** 2, axis=(-2, -1))
        i, j = pol_pair
        return np.abs(phi[..., i, j]) ** 2


# ---------------------------------------------------------------------------

@dataclass
class _ModeData:
    omega: np.ndarray       # broadcastable to grid shape
    sin_out: np.ndarray     # exterior signed sin(theta)
    sin_psi: np.ndarray
    cos_psi: np.ndarray
    theta: np.ndarray       # exterior angle, for the detector rotation
    psi: np.ndarray


def _zint(dk, length):
    """int_0^L exp(i dk z) dz = exp(i dk L / 2) L sinc(dk L / 2), complex-safe."""
    w = 0.5 * dk * length
    small = np.abs(w) < 1e-5
    w_safe = np.where(small, 1.0, w)
    sinc = np.where(small, 1.0 - w * w / 6.0, np.sin(w_safe) / w_safe)
    return length * np.exp(1j * w) * sinc


def _pump_projection(config: PumpConfig, sin_tp, cos_tp, sin_pp, cos_pp):
    """Jones pair (c_TE, c_TM) of the fixed linear pump polarization."""
    px, py = config.polarization_xy()
    c_te = px * cos_pp + py * sin_pp
    c_tm = cos_tp * (py * cos_pp - px * sin_pp)
    return c_te, c_tm


def _slice_axis0(arr, sl):
    if arr.ndim == 0 or arr.shape[0] == 1:
        return arr
    return arr[sl]


def _bstack(arrays, axis):
    """Stack after broadcasting the pieces to their common shape."""
    shape = np.broadcast_shapes(*(a.shape for a in arrays))
    return np.stack([np.broadcast_to(a, shape) for a in arrays], axis=axis)


def _phi_sum(stack: Stack, sig: _ModeData, idl: _ModeData, pmp: _ModeData,
             pump_jones, channels, uniaxial):
    """Layer-summed kernel in the structure TE/TM basis (one grid chunk)."""
    n_lay = stack.n_layers
    shape = np.broadcast(sig.omega, sig.sin_out, sig.cos_psi,
                         idl.omega, idl.sin_out, idl.cos_psi,
                         pmp.omega, pmp.sin_out, pmp.cos_psi).shape

    chains = {}
    for name, md in (("p", pmp), ("s", sig), ("i", idl)):
        for pol in _POLS:
            chains[name, pol] = Chain(stack, md.omega, md.sin_out, pol, uniaxial)

    # boundary cases: pump driven by unit left input, signal/idler by unit exits
    t_p = {pol: chains["p", pol].scattering()[0] for pol in _POLS}
    pump_right = {pol: (t_p[pol], np.zeros_like(t_p[pol])) for pol in _POLS}
    sweeps = {("p", pol): chains["p", pol].sweep([pump_right[pol]]) for pol in _POLS}
    for name in ("s", "i"):
        for pol in _POLS:
            ch = chains[name, pol]
            sweeps[name, pol] = ch.sweep(ch.outgoing_basis_right_vectors())

    c_te, c_tm = pump_jones
    phi = {ch: np.zeros(shape + (2, 2), dtype=complex) for ch in channels}
    pol_resolved = bool(uniaxial)
    use_jit = HAVE_NUMBA and not pol_resolved
    phi_flat = {ch: phi[ch].reshape(-1, 2, 2) for ch in channels} if use_jit else None

    for l in range(n_lay, 0, -1):
        step = {key: next(sweeps[key]) for key in sweeps}
        mat = stack.layers[l - 1].material
        if not mat.is_nonlinear:
            continue
        d = mat.d_tensor
        length = stack.layers[l - 1].length
        half = 0.5 * length

        # pump vectors V[..., a, P, 3]; P is the pump polarization axis,
        # collapsed to one pre-summed entry in the isotropic mode where the
        # phase mismatch cannot distinguish TE from TM
        v_parts = {0: [], 1: []}
        ph_p, k_parts_p = [], []
        for ip, pol in enumerate(_POLS):
            _, cases, k, sin_l, cos_l = step["p", pol]
            coeff = c_te if pol == "TE" else c_tm
            a_f, a_b = cases[0]
            for a, amp, dirn in ((0, a_f, "F"), (1, a_b, "B")):
                e = polarization_vector(dirn, pol, sin_l, cos_l, pmp.sin_psi, pmp.cos_psi)
                v_parts[a].append(np.asarray(coeff * amp)[..., None] * e)
            ph_p.append(np.exp(1j * k * half))
            k_parts_p.append(k)
        if pol_resolved:
            v = _bstack([_bstack(v_parts[a], -2) for a in (0, 1)], -3)
        else:
            v = _bstack([v_parts[a][0] + v_parts[a][1] for a in (0, 1)], -2)[..., :, None, :]

        def mode_arrays(name, md):
            # vecs[(dir, pol, exit)] = conj(U) conj(e); phases exp(i K L / 2)
            vecs = {}
            phases, ks = [], []
            for ip, pol in enumerate(_POLS):
                _, cases, k, sin_l, cos_l = step[name, pol]
                for idir, dirn in ((0, "F"), (1, "B")):
                    e = np.conj(polarization_vector(dirn, pol, sin_l, cos_l,
                                                    md.sin_psi, md.cos_psi))
                    for ich in (0, 1):
                        u = np.conj(cases[ich][idir])
                        vecs[idir, ip, ich] = np.asarray(u)[..., None] * e
                phases.append(np.exp(1j * k * half))
                ks.append(k)
            return vecs, phases, ks

        s_vecs, ph_s, k_parts_s = mode_arrays("s", sig)
        i_vecs, ph_i, k_parts_i = mode_arrays("i", idl)

        if use_jit and not (np.any(k_parts_p[0].imag) or np.any(k_parts_s[0].imag)
                            or np.any(k_parts_i[0].imag)):
            v_flat = materialize(v[..., :, 0, :], shape, (2, 3))
            kp_flat = np.ascontiguousarray(
                np.broadcast_to(k_parts_p[0].real, shape)).ravel()
            ks_flat = np.ascontiguousarray(
                np.broadcast_to(k_parts_s[0].real, shape)).ravel()
            ki_flat = np.ascontiguousarray(
                np.broadcast_to(k_parts_i[0].real, shape)).ravel()
            for ch in channels:
                ich_s = 0 if ch[0] == "F" else 1
                ich_i = 0 if ch[1] == "F" else 1
                s_arr = _bstack([_bstack([s_vecs[b, ip, ich_s] for ip in range(2)], -2)
                                 for b in range(2)], -3)
                i_arr = _bstack([_bstack([i_vecs[g, ip, ich_i] for ip in range(2)], -2)
                                 for g in range(2)], -3)
                layer_accumulate(phi_flat[ch], v_flat,
                                 materialize(s_arr, shape, (2, 2, 3)),
                                 materialize(i_arr, shape, (2, 2, 3)),
                                 kp_flat, ks_flat, ki_flat, d, length)
            continue

        # half-phase factors per direction: F -> exp(+i K L/2), B -> exp(-i K L/2)
        def dir_phases(ph_list):
            sel = ph_list if pol_resolved else ph_list[:1]
            fwd = _bstack(sel, -1)
            return _bstack([fwd, 1.0 / fwd], -2)       # (..., dir, polaxis)

        php = dir_phases(ph_p)
        phs = dir_phases(ph_s)
        phi_ = dir_phases(ph_i)
        # E = exp(i dK L / 2) over (..., a, P, b, B, g, G)
        e_combo = (php[..., :, :, None, None, None, None]
                   / phs[..., None, None, :, :, None, None]
                   / phi_[..., None, None, None, None, :, :])

        def dir_k(k_list):
            sel = k_list if pol_resolved else k_list[:1]
            return _bstack(sel, -1)
        sgn = _DIR_SIGN
        w = half * (sgn[:, None, None, None, None, None] * dir_k(k_parts_p)[..., None, :, None, None, None, None]
                    - sgn[None, None, :, None, None, None] * dir_k(k_parts_s)[..., None, None, None, :, None, None]
                    - sgn[None, None, None, None, :, None] * dir_k(k_parts_i)[..., None, None, None, None, None, :])
        # sin(w) = (E - 1/E) / 2i holds for complex w as well
        small = np.abs(w) < 1e-5
        w_safe = np.where(small, 1.0, w)
        sinc = np.where(small, 1.0 - w * w / 6.0, (e_combo - 1.0 / e_combo) / (2j * w_safe))
        theta = length * e_combo * sinc

        d9 = d.reshape(3, 9)
        d1 = (v @ d9).reshape(v.shape[:-1] + (3, 3))            # (..., a, P, k, m)
        pump_cells = int(np.prod(d1.shape[:-4], dtype=np.int64))
        for ch in channels:
            ich_s = 0 if ch[0] == "F" else 1
            ich_i = 0 if ch[1] == "F" else 1
            s_arr = _bstack([_bstack([s_vecs[b, ip, ich_s] for ip in range(2)], -2)
                             for b in range(2)], -3)   # (..., b, B, 3)
            i_arr = _bstack([_bstack([i_vecs[g, ip, ich_i] for ip in range(2)], -2)
                             for g in range(2)], -3)
            small_shape = np.broadcast_shapes(s_arr.shape[:-3], i_arr.shape[:-3],
                                              theta.shape[:-6])
            small_cells = int(np.prod(small_shape, dtype=np.int64))
            if pump_cells > 4 * small_cells:
                # pump varies over far more grid cells than the other factors
                # (focused corr-area maps): contract the small tensors first
                # and touch the full-shape pump product only once
                kk = (s_arr[..., None, None, :, :, None, None, :, None]
                      * i_arr[..., None, None, None, None, :, :, None, :]
                      * theta[..., :, :, :, :, :, :, None, None]
                      ).sum(axis=(-6, -4))            # (..., a, P, B, G, k, m)
                phi[ch] += (d1[..., :, :, None, None, :, :] * kk).sum(axis=(-6, -5, -2, -1))
            else:
                g1 = (d1[..., :, :, None, None, :, :]
                      * s_arr[..., None, None, :, :, :, None]).sum(axis=-2)  # (...,a,P,b,B,m)
                c1 = (g1[..., :, :, :, :, None, None, :]
                      * i_arr[..., None, None, None, None, :, :, :]).sum(axis=-1)
                phi[ch] += (c1 * theta).sum(axis=(-6, -5, -4, -2))
    return phi


def _apply_detector_rotation(phi_tetm, theta_s, psi_s, theta_i, psi_i, shape):
    z_s = detector_rotation_angle(theta_s, psi_s)
    z_i = detector_rotation_angle(theta_i, psi_i)
    qs = detector_rotation_matrix(z_s)
    qi = detector_rotation_matrix(z_i)
    out = {}
    for ch, p in phi_tetm.items():
        te_te, te_tm = p[..., 0, 0], p[..., 0, 1]
        tm_te, tm_tm = p[..., 1, 0], p[..., 1, 1]
        # signal rotation, then idler rotation
        a00 = qs[0] * te_te + qs[1] * tm_te
        a01 = qs[0] * te_tm + qs[1] * tm_tm
        a10 = qs[2] * te_te + qs[3] * tm_te
        a11 = qs[2] * te_tm + qs[3] * tm_tm
        r = np.empty(np.broadcast_shapes(p.shape[:-2], shape) + (2, 2), dtype=complex)
        r[..., 0, 0] = qi[0] * a00 + qi[1] * a01
        r[..., 0, 1] = qi[2] * a00 + qi[3] * a01
        r[..., 1, 0] = qi[0] * a10 + qi[1] * a11
        r[..., 1, 1] = qi[2] * a10 + qi[3] * a11
        out[ch] = r
    return out


def _measure(omega_s, omega_i, omega_p):
    return ((omega_s * omega_i) / omega_p ** 2) ** 2 * np.sqrt(omega_s * omega_i) / omega_p


def _check_sampling(stack: Stack, pump: PumpConfig, omega_s: np.ndarray):
    """Warn when the layer-sum phase can wrap by > pi between omega nodes."""
    if omega_s.size < 2:
        return
    try:
        n_ref = max(float(np.max(ly.material.n_ordinary.index(pump.omega_0 / 2.0)))
                    for ly in stack.layers)
    except Exception:
        return
    d_omega = float(np.max(np.abs(np.diff(np.sort(omega_s.ravel())))))
    span = 2.0 * n_ref * d_omega * stack.total_length / _C
    if span > np.pi:
        warnings.warn(
            f"grid spacing may undersample the kernel phase (dK L_total step ~ {span:.2f} rad)",
            GridTooCoarseWarning, stacklevel=3)


def assemble_phi(stack: Stack, pump: PumpConfig, signal_grid: SignalGrid,
                 idler_grid: IdlerGrid | None = None, *,
                 channels=("FF",), uniaxial: bool = False,
                 pump_jones=None, max_chunk_points: int = 120_000) -> TwoPhotonAmplitude:
    """Assemble the two-photon kernel on tensor-product grids.

    With a collimated pump (pump.r_p = inf) the idler direction is bound by
    exact transverse phase matching and idler_grid must be None; with a
    focused pump an idler_grid is required and each grid pair is weighted by
    the pump angular spectrum. pump_jones overrides the (c_TE, c_TM)
    decomposition of the pump polarization (used by scenario fast paths).
    """
    for ch in channels:
        if ch not in _CHANNELS:
            raise InvalidArgument(f"unknown channel {ch!r}")
    if np.any(signal_grid.omega >= pump.omega_0):
        raise InvalidArgument("signal frequencies must stay below the pump carrier")
    _check_sampling(stack, pump, signal_grid.omega)

    if pump.collimated:
        if idler_grid is not None:
            raise InvalidArgument("collimated pump binds the idler; idler_grid must be None")
        return _assemble_collimated(stack, pump, signal_grid, channels, uniaxial,
                                    pump_jones, max_chunk_points)
    if idler_grid is None:
        raise InvalidArgument("focused pump requires an idler_grid")
    return _assemble_focused(stack, pump, signal_grid, idler_grid, channels, uniaxial,
                             pump_jones, max_chunk_points)


def _chunk_slices(n, size):
    step = max(1, size)
    for start in range(0, n, step):
        yield slice(start, min(start + step, n))


def _assemble_collimated(stack, pump, grid, channels, uniaxial, pump_jones, max_points):
    nw, nt, np_ = len(grid.omega), len(grid.theta), len(grid.psi)
    shape = (nw, nt, np_)
    w = grid.omega.reshape(nw, 1, 1)
    th_s = grid.theta.reshape(1, nt, 1)
    ps_s = grid.psi.reshape(1, 1, np_)

    omega_i = pump.omega_0 - w
    kpx, kpy = transverse_k(pump.omega_0, pump.theta_p, pump.psi_p)
    ksx, ksy = transverse_k(w, th_s, ps_s)
    sin_ti, sin_pi, cos_pi, evan = direction_from_transverse_k(omega_i, kpx - ksx, kpy - ksy)
    evan = np.broadcast_to(evan, shape)
    theta_i = np.arcsin(np.clip(sin_ti, -1.0, 1.0))
    psi_i = np.arctan2(sin_pi, cos_pi)
    sin_ti_safe = np.where(np.abs(sin_ti) > 1.0, 0.0, sin_ti)

    sin_tp = math.sin(pump.theta_p)
    cos_tp = math.cos(pump.theta_p)
    sin_pp, cos_pp = math.sin(pump.psi_p), math.cos(pump.psi_p)
    jones = pump_jones if pump_jones is not None else _pump_projection(
        pump, sin_tp, cos_tp, sin_pp, cos_pp)

    phi = {ch: np.zeros(shape + (2, 2), dtype=complex) for ch in channels}
    rows = max(1, max_points // max(1, nt * np_))
    for sl in _chunk_slices(nw, rows):
        sig = _ModeData(w[sl], np.sin(th_s), np.asarray(np.sin(ps_s)),
                        np.asarray(np.cos(ps_s)), th_s, ps_s)
        idl = _ModeData(np.where(omega_i[sl] > 0, omega_i[sl], pump.omega_0 / 2),
                        _slice_axis0(sin_ti_safe, sl),
                        _slice_axis0(np.asarray(sin_pi), sl),
                        _slice_axis0(np.asarray(cos_pi), sl),
                        theta_i[sl], psi_i[sl])
        pmp = _ModeData(np.float64(pump.omega_0), np.float64(sin_tp),
                        np.float64(sin_pp), np.float64(cos_pp),
                        np.float64(pump.theta_p), np.float64(pump.psi_p))
        jones_sl = tuple(_slice_axis0(np.asarray(j), sl) if np.ndim(j) else j for j in jones)
        part = _phi_sum(stack, sig, idl, pmp, jones_sl, channels, uniaxial)
        part = _apply_detector_rotation(part, th_s, ps_s, theta_i[sl], psi_i[sl],
                                        (min(sl.stop, nw) - sl.start, nt, np_))
        m = _measure(w[sl], omega_i[sl], pump.omega_0) * pump.amplitude
        for ch in channels:
            block = part[ch] * m[..., None, None]
            block[np.broadcast_to(evan[sl], block.shape[:-2])] = 0.0
            phi[ch][sl] = block

    return TwoPhotonAmplitude(
        mode="collimated", channels=phi,
        omega_s=w, theta_s=th_s, psi_s=ps_s,
        omega_i=omega_i, theta_i=theta_i, psi_i=psi_i,
        evanescent=evan, pump=pump, stack_fingerprint=stack.fingerprint(),
        meta={"uniaxial": uniaxial, "channels": tuple(channels)})


def _assemble_focused(stack, pump, grid, idler_grid, channels, uniaxial, pump_jones, max_points):
    nw, nts, nps = len(grid.omega), len(grid.theta), len(grid.psi)
    nti, npi = len(idler_grid.theta), len(idler_grid.psi)
    shape = (nw, nts, nps, nti, npi)
    w = grid.omega.reshape(nw, 1, 1, 1, 1)
    th_s = grid.theta.reshape(1, nts, 1, 1, 1)
    ps_s = grid.psi.reshape(1, 1, nps, 1, 1)
    th_i = idler_grid.theta.reshape(1, 1, 1, nti, 1)
    ps_i = idler_grid.psi.reshape(1, 1, 1, 1, npi)

    omega_i = pump.omega_0 - w
    if np.any(omega_i <= 0):
        raise InvalidArgument("signal grid reaches the pump carrier frequency")
    envelope = transverse_envelope(pump)

    ksx, ksy = transverse_k(w, th_s, ps_s)
    kix, kiy = transverse_k(omega_i, th_i, ps_i)
    kpx, kpy = ksx + kix, ksy + kiy
    sin_tp, sin_pp, cos_pp, evan_p = direction_from_transverse_k(pump.omega_0, kpx, kpy)
    cos_tp = np.sqrt(np.clip(1.0 - sin_tp ** 2, 0.0, None))
    theta_p = np.arcsin(np.clip(sin_tp, -1.0, 1.0))
    sin_tp_safe = np.where(evan_p, 0.0, sin_tp)
    weight = np.where(evan_p, 0.0, envelope(kpx, kpy) / np.where(evan_p, 1.0, cos_tp))

    jones0 = pump_jones if pump_jones is not None else _pump_projection(
        pump, sin_tp_safe, cos_tp, sin_pp, cos_pp)

    phi = {ch: np.zeros(shape + (2, 2), dtype=complex) for ch in channels}
    rows = max(1, max_points // max(1, nts * nps * nti * npi))
    for sl in _chunk_slices(nw, rows):
        sig = _ModeData(w[sl], np.sin(th_s), np.asarray(np.sin(ps_s)),
                        np.asarray(np.cos(ps_s)), th_s, ps_s)
        idl = _ModeData(omega_i[sl], np.sin(th_i), np.asarray(np.sin(ps_i)),
                        np.asarray(np.cos(ps_i)), th_i, ps_i)
        pmp = _ModeData(np.float64(pump.omega_0), _slice_axis0(sin_tp_safe, sl),
                        _slice_axis0(sin_pp, sl), _slice_axis0(cos_pp, sl),
                        _slice_axis0(theta_p, sl), np.float64(0.0))
        jones_sl = tuple(_slice_axis0(np.asarray(j), sl) if np.ndim(j) else j
                         for j in jones0)
        part = _phi_sum(stack, sig, idl, pmp, jones_sl, channels, uniaxial)
        nw_sl = min(sl.stop, nw) - sl.start
        part = _apply_detector_rotation(part, th_s, ps_s, th_i, ps_i,
                                        (nw_sl, nts, nps, nti, npi))
        m = (_measure(w[sl], omega_i[sl], pump.omega_0) * pump.amplitude
             * _slice_axis0(weight, sl))
        for ch in channels:
            phi[ch][sl] = part[ch] * m[..., None, None]

    return TwoPhotonAmplitude(
        mode="focused", channels=phi,
        omega_s=w, theta_s=th_s, psi_s=ps_s,
        omega_i=omega_i, theta_i=th_i, psi_i=ps_i,
        evanescent=np.broadcast_to(evan_p, shape), pump=pump,
        stack_fingerprint=stack.fingerprint(),
        meta={"uniaxial": uniaxial, "channels": tuple(channels), "r_p": pump.r_p})


# ---------------------------------------------------------------------------
# scalar reference path (readable, used for cross-checking the vector kernel)
# ---------------------------------------------------------------------------

def outgoing_maps(stack: Stack, omega: float, theta: float, pol: str,
                  uniaxial: bool = False) -> np.ndarray:
    """U[l, direction, exit] mapping in-layer modes to the outgoing exits.

    l is 0-based over the N layers; direction and exit are 0 = F, 1 = B.
    """
    chain = Chain(stack, float(omega), math.sin(theta), pol, uniaxial)
    u = np.zeros((stack.n_layers, 2, 2), dtype=complex)
    for l, cases, _, _, _ in chain.sweep(chain.outgoing_basis_right_vectors()):
        for ich in (0, 1):
            u[l - 1, 0, ich] = complex(cases[ich][0])
            u[l - 1, 1, ich] = complex(cases[ich][1])
    return u


def layer_contribution(stack: Stack, layer: int, dirs, pols,
                       mode_p, mode_s, mode_i,
                       pump_amps, u_signal: complex, u_idler: complex,
                       uniaxial: bool = False) -> complex:
    """Single-term contribution of one layer, directions (a, b, g), pols
    (alpha, beta, gamma); scalar and deliberately unoptimized.

    pump_amps is the LayerAmplitudes solution of the pump for polarization
    alpha; u_signal/u_idler are the in-layer-to-exit factors of the chosen
    output channel. Includes the frequency measure applied by assemble_phi.
    """
    a, b, g = dirs
    alpha, beta, gamma = pols
    omega_p, omega_s, omega_i = mode_p.omega, mode_s.omega, mode_i.omega
    mat = stack.layers[layer - 1].material
    length = stack.layers[layer - 1].length

    def internal(md, pol):
        ch = Chain(stack, md.omega, math.sin(md.theta), pol, uniaxial)
        n, cos_t, k, sin_t = ch.medium(layer)
        return sin_t, cos_t, k

    s_p, c_p, k_p = internal(mode_p, alpha)
    s_s, c_s, k_s = internal(mode_s, beta)
    s_i, c_i, k_i = internal(mode_i, gamma)

    e_p = polarization_vector(a, alpha, s_p, c_p, math.sin(mode_p.psi), math.cos(mode_p.psi))
    e_s = polarization_vector(b, beta, s_s, c_s, math.sin(mode_s.psi), math.cos(mode_s.psi))
    e_i = polarization_vector(g, gamma, s_i, c_i, math.sin(mode_i.psi), math.cos(mode_i.psi))
    contraction = np.einsum("jkm,j,k,m->", mat.d_tensor, e_p, np.conj(e_s), np.conj(e_i))

    sign = {"F": 1.0, "B": -1.0}
    dk = sign[a] * k_p - sign[b] * k_s - sign[g] * k_i
    amp = pump_amps.a_f[layer] if a == "F" else pump_amps.a_b[layer]
    meas = _measure(omega_s, omega_i, omega_p)
    return complex(contraction * _zint(dk, length) * amp
                   * np.conj(u_signal) * np.conj(u_idler) * meas)
