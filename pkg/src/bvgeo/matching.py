"""Kernel-weighted curve dissimilarity used as the relaxed endpoint term.

H(a, b) integrates the squared difference of unit normals between every
pair of points of the two curves, weighted by a two-scale Gaussian kernel
and by both arclength measures.  On piecewise-affine curves the normals are
constant per segment, so a single midpoint sample per segment pair makes
the normal factor exact and only the kernel factor is approximated:

    H = sum_ij |n_i - m_j|^2 k(c_i, d_j) l_i l_j

over segment midpoints c/d, unit normals n/m and chord lengths l.  The
double sum is O(n^2) and dominates the optimizer's cost.

Note that this discretization (like its continuous form) is positive even
for two identical curves: non-corresponding segment pairs contribute.  The
polarization-form ``currents_distance_sq`` vanishes at equal arguments and
is provided as a bridge to the currents-metric formulation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import PolyCurve, frenet_frames, rot90


@dataclass(frozen=True)
class KernelParams:
    """Widths of the two Gaussian kernels: shape scale and feature scale."""

    sigma: float = 0.5
    delta: float = 0.05

    def __post_init__(self):
        if self.sigma <= 0 or self.delta <= 0:
            raise ValueError("kernel widths must be positive")


def kernel(v, w, params: KernelParams) -> float:
    """Two-scale Gaussian kernel exp(-r^2/2s^2) + exp(-r^2/2d^2), in (0, 2]."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    r2 = np.sum((v - w) ** 2, axis=-1)
    return (np.exp(-r2 / (2.0 * params.sigma ** 2))
            + np.exp(-r2 / (2.0 * params.delta ** 2)))


def _segment_data(curve: PolyCurve):
    mids = 0.5 * (curve.nodes + np.roll(curve.nodes, -1, axis=0))
    _, normals = frenet_frames(curve)
    return mids, normals, curve.chord_lengths


def match_distance(a: PolyCurve, b: PolyCurve, params: KernelParams) -> float:
    """Midpoint-rule discretization of the normal-mismatch kernel integral."""
    ca, na, la = _segment_data(a)
    cb, nb, lb = _segment_data(b)
    diff_n = na[:, None, :] - nb[None, :, :]
    w = np.sum(diff_n * diff_n, axis=2)
    k = kernel(ca[:, None, :], cb[None, :, :], params)
    return float(np.sum(w * k * la[:, None] * lb[None, :]))


def match_gradient(a: PolyCurve, b: PolyCurve,
                   params: KernelParams) -> np.ndarray:
    """Exact gradient of match_distance with respect to a's node coordinates.

    Chains through segment midpoints, chord lengths, and the Jacobian of
    the normalized chord under the 90-degree rotation.
    """
    ca, na, la = _segment_data(a)
    cb, nb, lb = _segment_data(b)
    chords = a.chords
    tang = chords / la[:, None]

    diff_n = na[:, None, :] - nb[None, :, :]          # (n, m, 2)
    w = np.sum(diff_n * diff_n, axis=2)               # (n, m)
    diff_c = ca[:, None, :] - cb[None, :, :]          # (n, m, 2)
    r2 = np.sum(diff_c * diff_c, axis=2)
    e1 = np.exp(-r2 / (2.0 * params.sigma ** 2))
    e2 = np.exp(-r2 / (2.0 * params.delta ** 2))
    k = e1 + e2
    wl = lb[None, :]                                  # b-side measure

    # dH/dl_i
    alpha = np.sum(w * k * wl, axis=1)
    # dH/dc_i (kernel factor), already including l_i
    kprime = e1 / params.sigma ** 2 + e2 / params.delta ** 2
    beta = -np.sum((w * kprime * wl)[:, :, None] * diff_c, axis=1) \
        * la[:, None]
    # dH/dn_i
    g = 2.0 * np.sum((k * wl)[:, :, None] * diff_n, axis=1) * la[:, None]

    # map normal gradient through n_i = rot90(chord_i / l_i)
    rg = -rot90(g)                                    # rot90^T = -rot90
    h = (rg - np.sum(rg * tang, axis=1)[:, None] * tang) / la[:, None]

    D = alpha[:, None] * tang + h                     # d/d chord_i
    grad = np.roll(D, 1, axis=0) - D                  # chord adjoint
    grad += 0.5 * (np.roll(beta, 1, axis=0) + beta)   # midpoint term
    return grad


def currents_distance_sq(a: PolyCurve, b: PolyCurve,
                         params: KernelParams) -> float:
    """Polarization form <a,a> - 2<a,b> + <b,b> of the kernel inner product
    sum_ij <n_i, m_j> k(c_i, d_j) l_i l_j; zero for identical curves."""

    def inner(x, y):
        cx, nx, lx = _segment_data(x)
        cy, ny, ly = _segment_data(y)
        dots = nx @ ny.T
        k = kernel(cx[:, None, :], cy[None, :, :], params)
        return float(np.sum(dots * k * lx[:, None] * ly[None, :]))

    return inner(a, a) - 2.0 * inner(a, b) + inner(b, b)
