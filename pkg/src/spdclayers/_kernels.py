"""Fused per-layer contraction kernel (numba), with a pure-numpy fallback.

The jitted path covers the common case of real per-layer wave numbers and a
polarization-independent phase mismatch (the isotropic propagation mode).
Each grid point is independent and its sums run in a fixed order, so the
parallel loop is bit-deterministic. The numpy implementation in
:mod:`spdclayers.twophoton` remains the reference; a regression test pins
both paths together.
"""

from __future__ import annotations

import warnings

import numpy as np

try:
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*TBB.*")
        import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False


if HAVE_NUMBA:

    @numba.njit(parallel=True, fastmath=False, cache=True)
    def layer_accumulate(phi, v, s_arr, i_arr, k_p, k_s, k_i, d, length):
        """Accumulate one layer's contribution into phi.

        phi:   (P, 2, 2) complex, signal/idler polarization pairs
        v:     (P, 2, 3)  pump vector per direction (polarizations pre-summed)
        s_arr: (P, 2, 2, 3) conj(U_s) conj(e_s) per (direction, polarization)
        i_arr: (P, 2, 2, 3) idler analogue
        k_p/k_s/k_i: (P,) real forward wave numbers in the layer
        d:     (3, 3, 3) nonlinear tensor, length: layer length
        """
        n_pts = phi.shape[0]
        half = 0.5 * length
        for p in numba.prange(n_pts):
            d1 = np.zeros((2, 3, 3), dtype=np.complex128)
            for a in range(2):
                for j in range(3):
                    vj = v[p, a, j]
                    if vj != 0.0:
                        for k in range(3):
                            for m in range(3):
                                d1[a, k, m] += d[j, k, m] * vj
            wp = k_p[p] * half
            ws = k_s[p] * half
            wi = k_i[p] * half
            for a in range(2):
                sa = 1.0 if a == 0 else -1.0
                for b in range(2):
                    sb = 1.0 if b == 0 else -1.0
                    for g in range(2):
                        sg = 1.0 if g == 0 else -1.0
                        w = sa * wp - sb * ws - sg * wi
                        if abs(w) < 1e-5:
                            sinc = 1.0 - w * w / 6.0
                        else:
                            sinc = np.sin(w) / w
                        theta = length * complex(np.cos(w), np.sin(w)) * sinc
                        for bb in range(2):
                            for gg in range(2):
                                acc = 0.0 + 0.0j
                                for k in range(3):
                                    sk = s_arr[p, b, bb, k]
                                    if sk != 0.0:
                                        t1 = (d1[a, k, 0] * i_arr[p, g, gg, 0]
                                              + d1[a, k, 1] * i_arr[p, g, gg, 1]
                                              + d1[a, k, 2] * i_arr[p, g, gg, 2])
                                        acc += sk * t1
                                phi[p, bb, gg] += theta * acc

else:  # pragma: no cover
    layer_accumulate = None


def materialize(arr, shape, tail):
    """Contiguous (P, *tail) view of a broadcastable array."""
    full = np.broadcast_to(arr, shape + tail)
    return np.ascontiguousarray(full).reshape((-1,) + tail)
