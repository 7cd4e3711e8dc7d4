"""Pump-field configuration: cw carrier, transverse envelope, regularization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class PumpConfig:
    """cw pump impinging on the stack.

    omega_0: carrier angular frequency (rad/s). r_p: 1/e^2-type width of the
    transverse amplitude profile (m); math.inf means collimated pumping, a
    distinct exact-kinematics code path rather than a numerical limit.
    polarization: angle (rad) of the linear polarization from +x towards +y
    in the transverse plane. detection_half_interval: T of the cw
    delta^2(omega) -> 2T/(2 pi) delta(omega) regularization (s). amplitude:
    the cw spectral weight xi_p; only an overall scale, defaults to 1.
    """

    omega_0: float
    r_p: float = math.inf
    polarization: float = 0.0
    theta_p: float = 0.0
    psi_p: float = 0.0
    detection_half_interval: float = math.pi
    amplitude: float = 1.0

    def __post_init__(self):
        if not (self.omega_0 > 0.0):
            raise InvalidArgument("pump carrier frequency must be positive")
        if not (self.r_p > 0.0):
            raise InvalidArgument("pump transverse width must be positive (inf = collimated)")
        if not (self.detection_half_interval > 0.0):
            raise InvalidArgument("detection half-interval must be positive")
        if abs(self.theta_p) >= math.pi / 2 or abs(self.psi_p) > math.pi / 2:
            raise InvalidArgument("pump incidence angles out of range")

    @property
    def collimated(self) -> bool:
        return math.isinf(self.r_p)

    def polarization_xy(self) -> tuple:
        """Unit transverse polarization vector (x, y)."""
        return (math.cos(self.polarization), math.sin(self.polarization))


@dataclass(frozen=True)
class TransverseEnvelope:
    """Normalized Gaussian angular spectrum of the pump transverse profile."""

    r_p: float

    def __call__(self, kx, ky):
        """Amplitude at transverse wave vector (kx, ky) (rad/m); unit L2 norm."""
        kx = np.asarray(kx, dtype=float)
        ky = np.asarray(ky, dtype=float)
        r = self.r_p
        return (r / math.sqrt(2.0 * math.pi)) * np.exp(-r * r * (kx * kx + ky * ky) / 4.0)


def transverse_envelope(config: PumpConfig) -> TransverseEnvelope:
    """Gaussian envelope for a focused pump; rejects the collimated sentinel.

    The printed envelope of the source model carries a positive exponent,
    which is not normalizable; the stated unit-norm condition forces the
    standard negative sign, which is what is implemented here.
    """
    if config.collimated:
        raise InvalidArgument("collimated pump has no finite transverse envelope; "
                              "use the exact-kinematics path")
    return TransverseEnvelope(config.r_p)


def cw_spectral_weight(config: PumpConfig) -> float:
    """Factor 2T/(2 pi) replacing one delta(0) in cw photon-pair densities."""
    return 2.0 * config.detection_half_interval / (2.0 * math.pi)
