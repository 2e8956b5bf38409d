"""Shared numeric settings and small deterministic solvers.

All tolerances and step-size rules used across the package live in one
frozen settings record so they can be overridden consistently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# numpy renamed trapz -> trapezoid; support both
trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class NumericSettings:
    """Default tolerances and discretization rules.

    degenerate_sin_tol: |sin(theta)| below this means the unit cell is
        degenerate and closed-form powers fall back to repeated multiplication.
    condition_limit: condition-number ceiling when inverting the lower-right
        transfer-matrix block during scattering extraction.
    resonance_xtol: golden-section bracket width for resonance refinement.
    resonance_scan_divisor: coarse-scan step is |analytic seed| / divisor.
    resonance_bracket_factor: coarse scan covers [0, factor * seed].
    resonance_retry_factor: one retry with a bracket this much wider.
    width_step_fraction: finite-difference step for the numeric resonance
        width, as a fraction of the analytic width.
    rk4_drive_fraction / rk4_decay_fraction / rk4_packet_fraction: the
        fixed RK4 step is min(a / Omega0, b / Gamma, c * sigma_in).
    packet_min_sigma_steps: a wave-packet grid must resolve sigma_in by at
        least this many steps.
    quadrature_nodes / quadrature_half_width: fixed-node grid for spectral
        averages over the scattered photon's lineshape (+- half_width sigma).
    kernel_asymptotic_min_x: Bessel argument above which the asymptotic
        kernel form is used instead of the exact scaled-Bessel form.
    discrete_atom_cap: the O(N^2) discrete storage model refuses larger N.
    """

    degenerate_sin_tol: float = 1e-8
    condition_limit: float = 1e12
    resonance_xtol: float = 1e-10
    resonance_scan_divisor: int = 50
    resonance_bracket_factor: float = 4.0
    resonance_retry_factor: float = 10.0
    width_step_fraction: float = 0.05
    rk4_drive_fraction: float = 0.05
    rk4_decay_fraction: float = 0.05
    rk4_packet_fraction: float = 0.02
    packet_min_sigma_steps: float = 4.0
    quadrature_nodes: int = 64
    quadrature_half_width: float = 5.0
    kernel_asymptotic_min_x: float = 10.0
    discrete_atom_cap: int = 4000


DEFAULT_SETTINGS = NumericSettings()

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section_min(func, lo: float, hi: float, xtol: float) -> float:
    """Minimize a unimodal scalar function on [lo, hi] to bracket width xtol."""
    a, b = float(lo), float(hi)
    if not b > a:
        raise ValueError("need lo < hi")
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    while (b - a) > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = func(d)
    return 0.5 * (a + b)


def rk4_integrate(deriv, y0, t_end: float, dt: float, observer=None):
    """Fixed-step 4th-order Runge-Kutta from t=0 to exactly t_end.

    The step count is ceil(t_end / dt) so the actual step never exceeds dt.
    observer(t, y), when given, is called at t=0 and after every step.
    Returns the final state vector.
    """
    if t_end < 0 or dt <= 0:
        raise ValueError("need t_end >= 0 and dt > 0")
    y = np.asarray(y0, dtype=complex).copy()
    if t_end == 0:
        if observer is not None:
            observer(0.0, y)
        return y
    n_steps = max(1, math.ceil(t_end / dt - 1e-12))
    h = t_end / n_steps
    t = 0.0
    if observer is not None:
        observer(t, y)
    for k in range(n_steps):
        k1 = deriv(t, y)
        k2 = deriv(t + 0.5 * h, y + (0.5 * h) * k1)
        k3 = deriv(t + 0.5 * h, y + (0.5 * h) * k2)
        k4 = deriv(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t = (k + 1) * h
        if observer is not None:
            observer(t, y)
    return y
