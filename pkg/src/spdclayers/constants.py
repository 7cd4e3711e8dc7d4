"""Physical constants (CODATA 2018, exact SI values where defined)."""

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    c: float = 299_792_458.0          # speed of light, m/s (exact)
    hbar: float = 1.054_571_817e-34   # reduced Planck constant, J s
    eps0: float = 8.854_187_8128e-12  # vacuum permittivity, F/m


CONSTANTS = PhysicalConstants()


def wavelength_to_omega(lambda_m: float) -> float:
    """Vacuum wavelength (m) to angular frequency (rad/s)."""
    import math

    return 2.0 * math.pi * CONSTANTS.c / lambda_m


def omega_to_wavelength(omega: float) -> float:
    """Angular frequency (rad/s) to vacuum wavelength (m)."""
    import math

    return 2.0 * math.pi * CONSTANTS.c / omega
