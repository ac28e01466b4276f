"""Discrete homotopies between closed curves and their path energy.

A homotopy is an N x n grid of plane points: N time slices, each slice a
closed piecewise-affine curve with n nodes.  Time uses N slices and N-1
steps spanning [0, 1]; the velocity of step i is the difference quotient
(slice[i+1] - slice[i]) / dt with dt = 1/(N-1).

The ``paper_literal_velocity`` flag divides by (N-1) instead of multiplying,
reproducing a formula variant whose energy scale depends on the time grid;
the difference-quotient convention is the default because it makes the
discrete energy a consistent quadrature of the continuous one (the
translation path then has its analytic energy value, independent of N).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import PolyCurve, TangentField, length, validate_immersion
from .metrics import BV2, H2, MetricSpec, bv2_tangent_norm, h2_tangent_norm_sq


@dataclass(frozen=True)
class Homotopy:
    """N x n grid of plane points; slice i is the curve at time i/(N-1)."""

    grid: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.grid, dtype=float)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise ValueError(f"grid must have shape (N, n, 2), got {arr.shape}")
        if arr.shape[0] < 2:
            raise ValueError(f"need at least 2 time slices, got {arr.shape[0]}")
        if arr.shape[1] < 3:
            raise ValueError(f"need at least 3 space nodes, got {arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("grid contains non-finite coordinates")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "grid", arr)

    @property
    def N(self) -> int:
        return self.grid.shape[0]

    @property
    def n(self) -> int:
        return self.grid.shape[1]

    def slice_curve(self, i: int) -> PolyCurve:
        return PolyCurve(self.grid[i])

    def validate_slices(self, min_speed: float | None = None):
        """First (slice, segment) failing the immersion test, or None."""
        for i in range(self.N):
            ok, idx = validate_immersion(self.slice_curve(i), min_speed)
            if not ok:
                return i, idx
        return None


@dataclass(frozen=True)
class PathDiagnostics:
    """Per-slice lengths and length-bound flags for a homotopy."""

    lengths: np.ndarray          # (N,)
    step_norms: np.ndarray       # (N-1,)
    energy: float                # path energy at exponent 2
    lower: float                 # len(slice 0) * exp(-energy)
    upper: float                 # len(slice 0) * exp(+energy)
    violations: np.ndarray       # (N,) bool mask

    @property
    def ok(self) -> bool:
        return not bool(np.any(self.violations))


def velocity(h: Homotopy, i: int, paper_literal: bool = False) -> TangentField:
    """Velocity field of time step i (0-based, 0 <= i <= N-2)."""
    if not 0 <= i <= h.N - 2:
        raise IndexError(f"step index {i} out of range [0, {h.N - 2}]")
    diff = h.grid[i + 1] - h.grid[i]
    scale = 1.0 / (h.N - 1) if paper_literal else float(h.N - 1)
    return TangentField(diff * scale)


def step_norms(h: Homotopy, spec: MetricSpec,
               paper_literal: bool = False) -> np.ndarray:
    """Tangent norm of each step's velocity, measured at the step's slice."""
    out = np.empty(h.N - 1)
    for i in range(h.N - 1):
        curve = h.slice_curve(i)
        v = velocity(h, i, paper_literal)
        if spec.family == BV2:
            out[i] = bv2_tangent_norm(curve, v, spec)
        else:
            out[i] = np.sqrt(h2_tangent_norm_sq(curve, v, spec))
    return out


def path_energy(h: Homotopy, spec: MetricSpec,
                paper_literal: bool = False) -> float:
    """Discrete path energy: mean over steps of the tangent norm^p."""
    T = step_norms(h, spec, paper_literal)
    return float(np.mean(T ** spec.exponent))


def make_translation_path(curve: PolyCurve, c, N: int) -> Homotopy:
    """Homotopy translating the curve linearly by the vector c."""
    if N < 2:
        raise ValueError(f"need at least 2 slices, got {N}")
    c = np.asarray(c, dtype=float)
    theta = np.arange(N) / (N - 1)
    grid = curve.nodes[None, :, :] + theta[:, None, None] * c[None, None, :]
    return Homotopy(grid)


def time_constant_speed_reparam(h: Homotopy, spec: MetricSpec,
                                rel_tol: float = 1e-3,
                                max_passes: int = 50) -> Homotopy:
    """Resample the time grid so that per-step tangent norms equalize.

    The cumulative tangent-norm profile is piecewise linear over the slice
    times; it is inverted at uniformly spaced profile values and intermediate
    slices are linear blends of adjacent slices (staying inside the
    piecewise-constant-in-time element family).  Endpoint slices are
    preserved exactly.  Passes repeat until the per-step norms agree within
    rel_tol or max_passes is reached.
    """
    grid = h.grid
    N = h.N
    for _ in range(max_passes):
        cur = Homotopy(grid)
        T = step_norms(cur, spec)
        total = float(np.sum(T))
        if total <= 0.0:
            raise ValueError("zero-energy path cannot be time-reparameterized")
        spread = (np.max(T) - np.min(T)) / np.mean(T)
        if spread <= rel_tol:
            return cur
        cum = np.concatenate([[0.0], np.cumsum(T)])
        targets = total * np.arange(N) / (N - 1)
        # fractional slice index at each target profile value
        pos = np.interp(targets, cum, np.arange(N, dtype=float))
        k = np.clip(np.floor(pos).astype(int), 0, N - 2)
        frac = pos - k
        new = (1.0 - frac)[:, None, None] * grid[k] + frac[:, None, None] * grid[k + 1]
        new[0] = grid[0]
        new[-1] = grid[-1]
        grid = new
    return Homotopy(grid)


def length_bound_check(h: Homotopy, spec: MetricSpec) -> PathDiagnostics:
    """Check every slice length against the exponential length bounds.

    The bounds use the squared-norm path energy regardless of the spec's
    exponent.  They are proved for continuous-time paths, so a discrete
    homotopy may violate them slightly; this is a diagnostic, not an error.
    """
    sq = MetricSpec(family=spec.family, weights=spec.weights,
                    eps=spec.eps, exponent=2)
    T = step_norms(h, sq)
    energy = float(np.mean(T ** 2))
    lengths = np.array([length(h.slice_curve(i)) for i in range(h.N)])
    lower = lengths[0] * np.exp(-energy)
    upper = lengths[0] * np.exp(energy)
    violations = (lengths < lower) | (lengths > upper)
    return PathDiagnostics(lengths=lengths, step_norms=T, energy=energy,
                           lower=float(lower), upper=float(upper),
                           violations=violations)
