"""Sagnac interferometer around the ensemble: combined reflection gates.

The ensemble sits in a loop fed by a 50/50 (Hadamard) beam splitter; the
two arms have free phases k0*l1 and k0*l2.  A single effective reflection
coefficient R describes the loop: the ideal empty loop has R = +1 and a
perfectly reflecting ensemble gives R = -1, which is the conditional phase
flip used for the gate.

A compensation phase d_extra is applied as a pure coefficient correction
(the backward reflection acquires it twice, transmissions once) instead of
an explicit extra propagation segment; the balanced choice makes the total
single-pass phase around ensemble plus arms equal to pi, which aligns the
transmitted and reflected interferometer outputs.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .ensemble import (
    EnsembleSpec,
    ScatterResult,
    ensemble_length_phase,
    ensemble_matrix,
    stored_site_coeffs,
    _scatter_from_matrix,
    _without_stored,
)
from .numerics import DEFAULT_SETTINGS, NumericSettings

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
_TAU = 2.0 * math.pi


@dataclass(frozen=True)
class SagnacGeometry:
    """Arm phases and compensation phase, all stored modulo 2*pi."""

    k0_l1: float = 0.0
    k0_l2: float = 0.0
    d_extra_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "k0_l1", self.k0_l1 % _TAU)
        object.__setattr__(self, "k0_l2", self.k0_l2 % _TAU)
        object.__setattr__(self, "d_extra_phase", self.d_extra_phase % _TAU)


def balanced_geometry(spec: EnsembleSpec, k0_l1: float = 0.0, k0_l2: float = 0.0) -> SagnacGeometry:
    """Geometry whose compensation phase makes the round trip sum to pi."""
    d_extra = math.pi - ensemble_length_phase(spec) - k0_l1 - k0_l2
    return SagnacGeometry(k0_l1=k0_l1, k0_l2=k0_l2, d_extra_phase=d_extra)


def _corrected(r_plus, t_plus, r_minus, t_minus, geom: SagnacGeometry):
    """Fold the compensation phase into the raw coefficients."""
    once = cmath.exp(1j * geom.d_extra_phase)
    return r_plus, t_plus * once, r_minus * once * once, t_minus * once


def sagnac_matrix(scatter: ScatterResult, geom: SagnacGeometry) -> np.ndarray:
    """2x2 port-to-port matrix of the loop for one set of coefficients."""
    r_p, t_p, r_m, t_m = _corrected(
        scatter.r_plus, scatter.t_plus, scatter.r_minus, scatter.t_minus, geom
    )
    arms = np.diag([cmath.exp(1j * geom.k0_l1), cmath.exp(1j * geom.k0_l2)])
    inner = np.array([[r_p, t_p], [t_m, r_m]])
    return _HADAMARD @ arms @ inner @ arms @ _HADAMARD


def reflection_from_coeffs(r_plus, t_plus, r_minus, t_minus, geom: SagnacGeometry):
    """Loop reflection R for given coefficients; accepts numpy arrays."""
    r_p, t_p, r_m, t_m = _corrected(r_plus, t_plus, r_minus, t_minus, geom)
    e_l1 = cmath.exp(1j * geom.k0_l1)
    e_l2 = cmath.exp(1j * geom.k0_l2)
    return -0.5 * (r_p * e_l1 * e_l1 - (t_p + t_m) * e_l1 * e_l2 + r_m * e_l2 * e_l2)


def gate_reflections(
    spec: EnsembleSpec,
    geom: SagnacGeometry,
    delta: float,
    stored_sites=None,
    settings: NumericSettings = DEFAULT_SETTINGS,
):
    """Loop reflection without a stored photon, and per-site with one.

    Returns (r0, r1_values); r1_values is None when stored_sites is None,
    otherwise an array aligned with stored_sites (unit-cell indices for the
    lambda scheme, atom indices for dual-V).
    """
    base = _without_stored(spec)
    bare = _scatter_from_matrix(base, delta, ensemble_matrix(base, delta, settings), settings)
    r0 = reflection_from_coeffs(bare.r_plus, bare.t_plus, bare.r_minus, bare.t_minus, geom)
    if stored_sites is None:
        return complex(r0), None
    coeffs = stored_site_coeffs(spec, delta, stored_sites, settings)
    r1 = reflection_from_coeffs(coeffs.r_plus, coeffs.t_plus, coeffs.r_minus, coeffs.t_minus, geom)
    return complex(r0), np.asarray(r1)


def symmetrized_r1(r1_of_z, z_tilde: float) -> complex:
    """Average of the stored-photon reflection at mirror positions."""
    return 0.5 * (r1_of_z(z_tilde) + r1_of_z(1.0 - z_tilde))


def symmetrize_site_values(values) -> np.ndarray:
    """Site-array version of the mirror average."""
    values = np.asarray(values)
    return 0.5 * (values + values[::-1])
