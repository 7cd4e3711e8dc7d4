import math

import numpy as np
import pytest

import spdclayers.twophoton as tp
from spdclayers.constants import CONSTANTS, wavelength_to_omega
from spdclayers.errors import GridTooCoarseWarning, InvalidArgument
from spdclayers.linear_optics import ModeCoordinates, layer_amplitudes
from spdclayers.materials import constant_index_material, default_material_db
from spdclayers.pump import PumpConfig
from spdclayers.stack import Layer, Stack, build_ab_stack
from spdclayers.twophoton import (
    IdlerGrid,
    SignalGrid,
    assemble_phi,
    layer_contribution,
    outgoing_maps,
)

C = CONSTANTS.c
W400 = wavelength_to_omega(400e-9)


def vacuum_nonlinear(d15=1.0, d31=1.0, d33=2.0):
    d = np.zeros((3, 3, 3))
    d[0, 0, 2] = d[0, 2, 0] = d15
    d[1, 1, 2] = d[1, 2, 1] = d15
    d[2, 0, 0] = d[2, 1, 1] = d31
    d[2, 2, 2] = d33
    return constant_index_material("vac_nl", 1.0, d)


@pytest.fixture(scope="module")
def gan_aln_11():
    db = default_material_db()
    return build_ab_stack(db["GaN"], db["AlN"], 11, 88.374e-9, 73.449e-9)


def test_zero_d_gives_zero_kernel():
    m = constant_index_material("lin", 1.8)
    stack = Stack((Layer(m, 200e-9),))
    pump = PumpConfig(omega_0=W400)
    grid = SignalGrid(np.linspace(0.4, 0.6, 5) * W400, np.array([0.3]), np.array([0.0]))
    phi = assemble_phi(stack, pump, grid, channels=("FF", "FB", "BF", "BB"))
    for arr in phi.channels.values():
        assert not np.any(arr)


def test_bulk_limit_matches_analytic_sinc():
    # index-matched single layer: no boundaries, so the kernel must equal the
    # textbook bulk amplitude d_eff * L * sinc(dK L / 2) (frequency measure off)
    length = 5e-6
    stack = Stack((Layer(vacuum_nonlinear(), length),))
    pump = PumpConfig(omega_0=W400, polarization=0.0)
    omega = np.linspace(0.40, 0.60, 61) * W400
    theta_s = math.radians(20.0)
    phi = assemble_phi(stack, pump, SignalGrid(omega, np.array([theta_s]), np.array([0.0])),
                       channels=("FF",))
    got = np.abs(phi.channels["FF"][:, 0, 0, 1, 0])     # (par, perp) = (TM_s, TE_i)
    omega_i = W400 - omega
    sin_i = -(omega / omega_i) * math.sin(theta_s)
    cos_i = np.sqrt(1.0 - sin_i**2)
    dk = (W400 - omega * math.cos(theta_s) - omega_i * cos_i) / C
    # geometric factor: pump x, signal TM (z-component -sin), idler TE via d_xzx
    d_eff = abs(1.0 * (-math.sin(theta_s)))
    meas = tp._measure(omega, omega_i, W400)
    x = dk * length / 2.0
    expected = meas * d_eff * length * np.abs(np.sinc(x / np.pi))
    assert np.max(np.abs(got - expected) / expected.max()) < 1e-6


def test_delta_k_zero_is_smooth_and_proportional_to_length():
    # degenerate collinear modes in an index-matched layer have dK = 0 exactly
    stack1 = Stack((Layer(vacuum_nonlinear(), 1e-6),))
    stack3 = Stack((Layer(vacuum_nonlinear(), 3e-6),))
    pump = PumpConfig(omega_0=W400, polarization=0.0)
    grid = SignalGrid(np.array([W400 / 2]), np.array([1e-8]), np.array([0.0]))
    a1 = assemble_phi(stack1, pump, grid, channels=("FF",)).channels["FF"]
    a3 = assemble_phi(stack3, pump, grid, channels=("FF",)).channels["FF"]
    assert np.all(np.isfinite(a1)) and np.all(np.isfinite(a3))
    m1, m3 = np.abs(a1).max(), np.abs(a3).max()
    assert m3 == pytest.approx(3.0 * m1, rel=1e-9)


def test_linearity_in_d15(gan_aln_11):
    db = default_material_db()
    gan = db["GaN"]
    d2 = gan.d_tensor.copy()
    d2[0, 0, 2] = d2[0, 2, 0] = 2 * d2[0, 0, 2]
    d2[1, 1, 2] = d2[1, 2, 1] = 2 * d2[1, 1, 2]
    from spdclayers.materials import Material
    gan2 = Material("GaN2", gan.n_ordinary, gan.n_extraordinary, d2, True)
    stack2 = build_ab_stack(gan2, db["AlN"], 11, 88.374e-9, 73.449e-9)
    pump = PumpConfig(omega_0=W400, polarization=0.0)
    grid = SignalGrid(np.linspace(0.45, 0.55, 7) * W400,
                      np.deg2rad([25.0, 40.0]), np.array([0.0]))
    a = assemble_phi(gan_aln_11, pump, grid, channels=("FF",)).channels["FF"]
    b = assemble_phi(stack2, pump, grid, channels=("FF",)).channels["FF"]
    # pump is TE at psi=0: every coupling there runs through d15, so phi doubles
    assert np.allclose(b, 2.0 * a, rtol=1e-10, atol=1e-30)


def test_symmetry_forced_zero(gan_aln_11):
    pump = PumpConfig(omega_0=W400, polarization=math.pi / 2)
    omega = np.linspace(0.4, 0.6, 21) * W400      # row 10 is exactly degenerate
    grid = SignalGrid(omega, np.deg2rad(np.linspace(5, 70, 12)), np.array([0.0]))
    phi = assemble_phi(gan_aln_11, pump, grid, channels=("FF", "BB"))
    for ch in ("FF", "BB"):
        arr = phi.channels[ch]
        gmax = np.abs(arr).max()
        assert np.abs(arr[10, :, 0, 0, 0]).max() < 1e-12 * gmax
        assert np.abs(arr[10, :, 0, 1, 1]).max() < 1e-12 * gmax


def test_exchange_symmetry(gan_aln_11):
    # phi(omega_s, theta_s; bound idler) equals phi at the swapped pair with
    # transposed polarizations, for every direction channel pairing
    pump = PumpConfig(omega_0=W400, polarization=0.4)
    rng = np.random.default_rng(7)
    for _ in range(6):
        w_s = float(rng.uniform(0.42, 0.58)) * W400
        th_s = float(rng.uniform(0.1, 1.0))
        grid_a = SignalGrid(np.array([w_s]), np.array([th_s]), np.array([0.0]))
        phi_a = assemble_phi(gan_aln_11, pump, grid_a, channels=("FF", "FB"))
        th_i = float(phi_a.theta_i[0, 0, 0])
        w_i = W400 - w_s
        grid_b = SignalGrid(np.array([w_i]), np.array([th_i]), np.array([0.0]))
        phi_b = assemble_phi(gan_aln_11, pump, grid_b, channels=("FF", "BF"))
        a = phi_a.channels["FF"][0, 0, 0]
        b = phi_b.channels["FF"][0, 0, 0]
        assert np.allclose(a, b.T, rtol=1e-9, atol=np.abs(a).max() * 1e-9)
        ab = phi_a.channels["FB"][0, 0, 0]
        ba = phi_b.channels["BF"][0, 0, 0]
        assert np.allclose(ab, ba.T, rtol=1e-9, atol=np.abs(ab).max() * 1e-9 + 1e-40)


def test_collimated_limit_of_focused_kernel(gan_aln_11):
    # r_p = 10 m: marginalizing the focused kernel over the idler window
    # reproduces the collimated signal density within 1%
    from spdclayers import observables as obs
    th_s = math.radians(35.0)
    omega = np.linspace(0.48, 0.52, 5) * W400
    pump_c = PumpConfig(omega_0=W400, polarization=0.0)
    phi_c = assemble_phi(gan_aln_11, pump_c, SignalGrid(omega, np.array([th_s]), np.array([0.0])))
    nsc = obs.signal_density(obs.pair_density(phi_c)).values["FF"][:, 0, 0]

    pump_f = PumpConfig(omega_0=W400, r_p=10.0, polarization=0.0)
    k_i = (W400 - omega.max()) / C
    sig = SignalGrid(omega, np.array([th_s]), np.array([0.0]))
    spread = 8.0 / (10.0 * k_i)     # +-8 sigma of the angular needle
    th_centers = np.arcsin((omega / (W400 - omega)) * math.sin(th_s))
    th_lo = -float(th_centers.max()) - spread * 3
    th_hi = -float(th_centers.min()) + spread * 3
    idl = IdlerGrid(np.linspace(th_lo, th_hi, 121), np.linspace(-spread, spread, 41))
    phi_f = assemble_phi(gan_aln_11, pump_f, sig, idl)
    nsf = obs.signal_density(obs.pair_density(phi_f)).values["FF"][:, 0, 0]
    assert np.allclose(nsf.sum(axis=(-2, -1)), nsc.sum(axis=(-2, -1)), rtol=0.01)


def test_scalar_reference_path_matches_vector_kernel(gan_aln_11):
    # independent slow path: explicit per-layer, per-direction contributions
    pump = PumpConfig(omega_0=W400, polarization=0.0)
    w_s = 0.52 * W400
    th_s = 0.45
    grid = SignalGrid(np.array([w_s]), np.array([th_s]), np.array([0.0]))
    phi = assemble_phi(gan_aln_11, pump, grid, channels=("FF",))
    th_i = float(phi.theta_i[0, 0, 0])
    w_i = W400 - w_s

    mode_p = ModeCoordinates(W400, 0.0, 0.0)
    mode_s = ModeCoordinates(w_s, th_s, 0.0)
    mode_i = ModeCoordinates(w_i, th_i, 0.0)
    total = np.zeros((2, 2), dtype=complex)
    pols = ("TE", "TM")
    u_s = {b: outgoing_maps(gan_aln_11, w_s, th_s, b) for b in pols}
    u_i = {g: outgoing_maps(gan_aln_11, w_i, th_i, g) for g in pols}
    amps = {a: layer_amplitudes(gan_aln_11, mode_p, a) for a in pols}
    jones = {"TE": 1.0, "TM": 0.0}   # x-polarized pump at normal incidence
    for l in range(1, gan_aln_11.n_layers + 1):
        if not gan_aln_11.layers[l - 1].material.is_nonlinear:
            continue
        for ia, alpha in enumerate(pols):
            if jones[alpha] == 0.0:
                continue
            for a in ("F", "B"):
                for ib, beta in enumerate(pols):
                    for b_dir in (0, 1):
                        for ig, gamma in enumerate(pols):
                            for g_dir in (0, 1):
                                term = layer_contribution(
                                    gan_aln_11, l, (a, "F" if b_dir == 0 else "B",
                                                    "F" if g_dir == 0 else "B"),
                                    (alpha, beta, gamma), mode_p, mode_s, mode_i,
                                    amps[alpha],
                                    u_s[beta][l - 1, b_dir, 0],
                                    u_i[gamma][l - 1, g_dir, 0])
                                total[ib, ig] += jones[alpha] * term
    fast = phi.channels["FF"][0, 0, 0]
    assert np.allclose(total, fast, rtol=1e-10, atol=np.abs(fast).max() * 1e-10)


def test_focused_needs_idler_grid_and_vice_versa(gan_aln_11):
    grid = SignalGrid(np.array([0.5 * W400]), np.array([0.3]), np.array([0.0]))
    with pytest.raises(InvalidArgument):
        assemble_phi(gan_aln_11, PumpConfig(omega_0=W400, r_p=1e-3), grid)
    with pytest.raises(InvalidArgument):
        assemble_phi(gan_aln_11, PumpConfig(omega_0=W400), grid,
                     IdlerGrid(np.array([0.3]), np.array([0.0])))


def test_grid_too_coarse_warning(gan_aln_11):
    grid = SignalGrid(np.array([0.4, 0.6]) * W400, np.array([0.3]), np.array([0.0]))
    with pytest.warns(GridTooCoarseWarning):
        assemble_phi(gan_aln_11, PumpConfig(omega_0=W400), grid)


def test_evanescent_bound_idler_masked(gan_aln_11):
    # high signal frequency at large angle drives the idler evanescent
    grid = SignalGrid(np.array([0.70 * W400]), np.array([math.radians(70.0)]),
                      np.array([0.0]))
    phi = assemble_phi(gan_aln_11, PumpConfig(omega_0=W400), grid)
    assert bool(phi.evanescent[0, 0, 0])
    assert not np.any(phi.channels["FF"][0, 0, 0])
