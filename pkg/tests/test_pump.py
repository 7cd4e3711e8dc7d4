import math

import numpy as np
import pytest

from spdclayers.constants import wavelength_to_omega
from spdclayers.errors import InvalidArgument
from spdclayers.pump import PumpConfig, cw_spectral_weight, transverse_envelope

W400 = wavelength_to_omega(400e-9)


def test_envelope_peak_value():
    cfg = PumpConfig(omega_0=W400, r_p=1e-3)
    env = transverse_envelope(cfg)
    assert float(env(0.0, 0.0)) == pytest.approx(1e-3 / math.sqrt(2 * math.pi))


def test_envelope_normalization_quadrature():
    # 2D Gauss quadrature oracle: the squared envelope integrates to one
    r_p = 1e-3
    env = transverse_envelope(PumpConfig(omega_0=W400, r_p=r_p))
    k = np.linspace(-8 / r_p, 8 / r_p, 1501)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    vals = np.abs(env(kx, ky)) ** 2
    integral = np.trapezoid(np.trapezoid(vals, k, axis=1), k, axis=0)
    assert integral == pytest.approx(1.0, abs=1e-6)


def test_envelope_symmetry():
    env = transverse_envelope(PumpConfig(omega_0=W400, r_p=2e-4))
    a = float(env(1e3, -2e3))
    assert a == pytest.approx(float(env(-1e3, 2e3)))
    assert a == pytest.approx(float(env(math.hypot(1e3, 2e3), 0.0)))
    assert a > 0.0


def test_collimated_sentinel():
    cfg = PumpConfig(omega_0=W400)          # r_p defaults to inf
    assert cfg.collimated
    with pytest.raises(InvalidArgument):
        transverse_envelope(cfg)
    with pytest.raises(InvalidArgument):
        PumpConfig(omega_0=W400, r_p=0.0)
    with pytest.raises(InvalidArgument):
        PumpConfig(omega_0=W400, r_p=-1e-3)


def test_cw_weight_closed_forms():
    assert cw_spectral_weight(PumpConfig(omega_0=W400, detection_half_interval=math.pi)) \
        == pytest.approx(1.0)
    assert cw_spectral_weight(PumpConfig(omega_0=W400, detection_half_interval=2 * math.pi)) \
        == pytest.approx(2.0)


def test_polarization_vector_components():
    assert PumpConfig(omega_0=W400, polarization=0.0).polarization_xy() \
        == pytest.approx((1.0, 0.0))
    assert PumpConfig(omega_0=W400, polarization=math.pi / 2).polarization_xy() \
        == pytest.approx((0.0, 1.0), abs=1e-15)
