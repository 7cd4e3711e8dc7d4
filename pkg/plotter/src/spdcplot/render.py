"""The five figure styles for spdclayers exports."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .reader import ExportError, grid_from_triples, read_export


def _check_schema(meta, expected: str, path):
    if meta.get("schema") != f"{expected} v1":
        raise ExportError(f"{path}: schema {meta.get('schema')!r}, expected '{expected} v1'")


def render_polar_profile(path, out):
    """Quarter-hemisphere projection: radius = theta_s, rotation = psi_s."""
    meta, cols, data = read_export(path)
    _check_schema(meta, "profile", path)
    theta, psi, vals = grid_from_triples(data)
    th = np.deg2rad(theta)
    ps = np.deg2rad(psi)
    # psi rotates from the vertical (+y) towards -x
    x = -np.sin(ps)[None, :] * np.degrees(th)[:, None]
    y = np.cos(ps)[None, :] * np.degrees(th)[:, None]
    fig, ax = plt.subplots(figsize=(5.2, 5.0))
    pm = ax.pcolormesh(x, y, vals, shading="gouraud", cmap="inferno")
    fig.colorbar(pm, ax=ax, label="signal density (norm.)")
    ax.set_aspect("equal")
    ax.set_xlabel(r"$\vartheta_s \sin\psi_s$ (deg)")
    ax.set_ylabel(r"$\vartheta_s \cos\psi_s$ (deg)")
    ax.set_title("transverse emission profile")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)


def render_heatmap(path, out):
    meta, cols, data = read_export(path)
    _check_schema(meta, "spectrum", path)
    ratio, theta, eta = grid_from_triples(data)
    fig, ax = plt.subplots(figsize=(5.6, 4.2))
    pm = ax.pcolormesh(ratio, theta, eta.T, shading="auto", cmap="viridis")
    fig.colorbar(pm, ax=ax, label=r"$\eta_s$")
    ax.set_xlabel(r"$2\omega_s/\omega_p^0$")
    ax.set_ylabel(r"$\vartheta_s$ (deg)")
    ax.set_title("relative signal density")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)


def render_corr_area(path, out):
    meta, cols, data = read_export(path)
    _check_schema(meta, "corr-area", path)
    dth, dps, vals = grid_from_triples(data)
    fig, ax = plt.subplots(figsize=(5.2, 4.2))
    if len(dps) > 1:
        pm = ax.pcolormesh(dps, dth, vals, shading="auto", cmap="inferno")
        fig.colorbar(pm, ax=ax, label=r"$n^{\rm cor}$ (arb.)")
        ax.set_xlabel(r"$\delta\psi_i$ (deg)")
        ax.set_ylabel(r"$\delta\vartheta_i$ (deg)")
    else:
        ax.plot(dth, vals[:, 0])
        ax.set_xlabel(r"$\delta\vartheta_i$ (deg)")
        ax.set_ylabel(r"$n^{\rm cor}$ (arb.)")
    ax.set_title(f"correlated area around "
                 f"$\\vartheta_s^0$ = {meta.get('theta_s0_deg', '?')} deg")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)


def render_transmission(path, out):
    meta, cols, data = read_export(path)
    _check_schema(meta, "transmission", path)
    x = data[:, 0]
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(x, data[:, 1], label=r"$T_{\rm TE}$")
    ax.plot(x, data[:, 2], label=r"$T_{\rm TM}$", linestyle="--")
    ax.set_xlabel("emission angle (deg)" if cols[0] == "theta_deg"
                  else r"$\omega$ (rad/s)")
    ax.set_ylabel("intensity transmission")
    ax.set_ylim(0, 1.05)
    ax.legend()
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)


def render_sweep(path, out):
    meta, cols, data = read_export(path)
    _check_schema(meta, "sweep", path)
    ratio = data[:, 0]
    eta = data[:, 4].copy()
    eta[data[:, 5] > 0] = np.nan        # gap points break the curve
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    ax.plot(ratio, eta, marker=".", markersize=3)
    ax.set_xlabel(r"optical-length ratio $L$")
    ax.set_ylabel(r"$\eta_s^{\rm max}$")
    ax.set_title(f"design sweep (N = {meta.get('layers', '?')})")
    fig.savefig(out, dpi=150, bbox_inches="tight")
    plt.close(fig)


KINDS = {
    "polar-profile": render_polar_profile,
    "heatmap": render_heatmap,
    "corr-area": render_corr_area,
    "transmission": render_transmission,
    "sweep": render_sweep,
}


def render(kind: str, path, out):
    if kind not in KINDS:
        raise ExportError(f"unknown plot kind {kind!r} (one of {sorted(KINDS)})")
    KINDS[kind](Path(path), Path(out))
    return Path(out)
