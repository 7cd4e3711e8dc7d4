"""Emission-direction kinematics and polarization geometry.

Frame (right-handed, stack normal along +z): a mode with radial angle theta
(signed, from +z) and azimuth psi (from +y towards -x) propagates along
``k_hat = t_hat sin(theta) + z_hat cos(theta)`` with the in-plane transverse
unit ``t_hat = (-sin psi, cos psi, 0)``. Its exterior transverse wave-vector
components are

    k_x = -omega sin(psi) sin(theta) / c,   k_y = omega cos(psi) sin(theta) / c.

Polarization triad per direction (F: +z, B: -z component):

    e_TE    = (cos psi, sin psi, 0)              (independent of theta and F/B)
    e_TM,F  = k_hat_F x e_TE = -z_hat sin(theta) + t_hat cos(theta)
    e_TM,B  = k_hat_B x e_TE = -z_hat sin(theta) - t_hat cos(theta)

Inside a layer the same formulas hold with the internal angle from Snell's
law. The detector basis (perp, par) is reached by the rotation zeta(theta,
psi); perp lies in the horizontal xz plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS

_C = CONSTANTS.c


def transverse_k(omega, theta, psi):
    """Exterior (k_x, k_y) of a mode; inputs broadcastable arrays."""
    omega = np.asarray(omega, dtype=float)
    st = np.sin(np.asarray(theta, dtype=float))
    psi = np.asarray(psi, dtype=float)
    kx = -omega * np.sin(psi) * st / _C
    ky = omega * np.cos(psi) * st / _C
    return kx, ky


def direction_from_transverse_k(omega, kx, ky):
    """Invert (k_x, k_y) to (sin_theta, sin_psi, cos_psi, evanescent).

    The branch with cos(psi) >= 0 is selected so psi stays in [-pi/2, pi/2];
    the sign of sin(theta) absorbs the remaining ambiguity. At zero transverse
    momentum psi is fixed to 0 by convention.
    """
    omega = np.asarray(omega, dtype=float)
    u = -np.asarray(kx, dtype=float) * _C / omega   # sin(theta) sin(psi)
    v = np.asarray(ky, dtype=float) * _C / omega    # sin(theta) cos(psi)
    s = np.hypot(u, v)
    evanescent = s > 1.0
    safe = np.where(s == 0.0, 1.0, s)
    flip = v < 0.0
    sin_t = np.where(flip, -s, s)
    sin_p = np.where(flip, -u, u) / safe
    cos_p = np.where(flip, -v, v) / safe
    sin_p = np.where(s == 0.0, 0.0, sin_p)
    cos_p = np.where(s == 0.0, 1.0, cos_p)
    return sin_t, sin_p, cos_p, evanescent


@dataclass(frozen=True)
class IdlerDirection:
    theta: np.ndarray
    psi: np.ndarray
    omega: np.ndarray
    evanescent: np.ndarray


def idler_direction(omega_p, theta_p, psi_p, omega_s, theta_s, psi_s) -> IdlerDirection:
    """Idler emission direction fixed by transverse phase matching.

    Solves k_p - k_s = k_i in the transverse plane with omega_i = omega_p -
    omega_s; flags the mode evanescent when no propagating direction exists
    (|sin theta_i| > 1 or omega_i <= 0). The symmetric degenerate case (pump
    on axis, psi_s = 0, omega_s = omega_i) returns exactly (-theta_s, -psi_s).
    """
    omega_p = np.asarray(omega_p, dtype=float)
    omega_s = np.asarray(omega_s, dtype=float)
    theta_s = np.asarray(theta_s, dtype=float)
    psi_s = np.asarray(psi_s, dtype=float)
    omega_i = omega_p - omega_s
    kpx, kpy = transverse_k(omega_p, theta_p, psi_p)
    ksx, ksy = transverse_k(omega_s, theta_s, psi_s)
    kix, kiy = kpx - ksx, kpy - ksy

    invalid = ~(omega_i > 0.0)
    omega_safe = np.where(invalid, 1.0, omega_i)
    sin_t, sin_p, cos_p, evan = direction_from_transverse_k(omega_safe, kix, kiy)
    theta_i = np.arcsin(np.clip(sin_t, -1.0, 1.0))
    psi_i = np.arctan2(sin_p, cos_p)

    # exact closed form for the symmetric degenerate configuration
    exact = ((kpx == 0.0) & (kpy == 0.0) & (omega_i == omega_s)
             & (np.sin(psi_s) * np.sin(theta_s) == 0.0))
    theta_i = np.where(exact, -theta_s, theta_i)
    psi_i = np.where(exact, -psi_s, psi_i)
    evan = evan | invalid
    return IdlerDirection(theta_i, psi_i, omega_i, evan)


def polarization_vector(direction: str, pol: str, sin_theta, cos_theta, sin_psi, cos_psi):
    """Unit polarization 3-vector; angles may be internal (complex-capable).

    direction: "F" | "B"; pol: "TE" | "TM". Returns an array with a trailing
    axis of length 3 broadcast over the inputs.
    """
    sin_theta = np.asarray(sin_theta)
    cos_theta = np.asarray(cos_theta)
    sin_psi = np.asarray(sin_psi)
    cos_psi = np.asarray(cos_psi)
    shape = np.broadcast(sin_theta, cos_theta, sin_psi, cos_psi).shape
    dtype = np.result_type(sin_theta, cos_theta, sin_psi, cos_psi, np.complex128)
    e = np.zeros(shape + (3,), dtype=dtype)
    if pol == "TE":
        e[..., 0] = cos_psi
        e[..., 1] = sin_psi
    elif pol == "TM":
        sgn = 1.0 if direction == "F" else -1.0
        e[..., 0] = -sin_psi * cos_theta * sgn
        e[..., 1] = cos_psi * cos_theta * sgn
        e[..., 2] = -sin_theta
    else:
        raise ValueError(f"pol must be 'TE' or 'TM', got {pol!r}")
    return e


def detector_rotation_angle(theta, psi):
    """Rotation zeta(theta, psi) from the TE/TM basis to the detector basis.

    zeta = arccos[cos(psi) / sqrt(1 + sin^2(psi) tan^2(theta))] * sign(psi);
    zeta(theta, 0) = 0 and zeta(0, psi) = psi.
    """
    theta = np.asarray(theta, dtype=float)
    psi = np.asarray(psi, dtype=float)
    tan2 = np.tan(theta) ** 2
    arg = np.cos(psi) / np.sqrt(1.0 + np.sin(psi) ** 2 * tan2)
    return np.arccos(np.clip(arg, -1.0, 1.0)) * np.sign(psi)


def detector_rotation_matrix(zeta):
    """Q with (c_perp, c_par)^T = Q (c_TE, c_TM)^T, as a 4-tuple of arrays."""
    c, s = np.cos(zeta), np.sin(zeta)
    return (c, -s, s, c)
