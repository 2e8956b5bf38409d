"""Multi-mode transfer-matrix algebra for layered one-dimensional scattering.

A region is described by a 2*n_m x 2*n_m complex matrix T mapping the field
amplitudes on its left side to those on its right side,

    (E_plus(right), E_minus(right))^T = T (E_plus(left), E_minus(left))^T,

where E_plus / E_minus are the right- and left-moving amplitude blocks of
length n_m (n_m = 1 for a single guided polarization, 2 for two).

Conventions documented once here:
- The Bloch angle theta of a 2x2 unit cell satisfies cos(theta) = trace/2.
  The complex arccos uses the principal branch, then the sign of theta is
  fixed by requiring Im(theta) <= 0 (decaying Bloch mode).
- cell_power uses the closed form
      T^n = cos(n theta) I + (sin(n theta) / sin(theta)) (T - cos(theta) I)
  and falls back to repeated multiplication when |sin(theta)| is below
  settings.degenerate_sin_tol, emitting DegenerateCellWarning.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass

import numpy as np

from .numerics import DEFAULT_SETTINGS, NumericSettings


class DimensionError(ValueError):
    """Matrix or vector dimensions violate the transfer-matrix contract."""


class IllConditionedError(ArithmeticError):
    """A required inversion is numerically singular.

    The condition estimate of the offending block is stored in .condition.
    """

    def __init__(self, message: str, condition: float):
        super().__init__(f"{message} (condition estimate {condition:.3e})")
        self.condition = condition


class DegenerateCellWarning(UserWarning):
    """The closed-form cell power degenerated to repeated multiplication."""


@dataclass(frozen=True)
class FieldVec:
    """Right- and left-moving field amplitudes, one entry per guided mode."""

    plus: np.ndarray
    minus: np.ndarray

    def __post_init__(self):
        plus = np.atleast_1d(np.asarray(self.plus, dtype=complex))
        minus = np.atleast_1d(np.asarray(self.minus, dtype=complex))
        if plus.shape != minus.shape or plus.ndim != 1:
            raise DimensionError("plus and minus must be 1-d of equal length")
        object.__setattr__(self, "plus", plus)
        object.__setattr__(self, "minus", minus)

    @property
    def stacked(self) -> np.ndarray:
        return np.concatenate([self.plus, self.minus])


@dataclass(frozen=True)
class BlochAngle:
    """Complex per-cell propagation angle; cos(theta) = trace(cell)/2."""

    theta: complex


@dataclass(frozen=True)
class ScatterCoeffs:
    """Reflection/transmission for both incidence directions.

    Scalars for single-mode matrices, n_m x n_m arrays otherwise.
    r_plus/t_plus: incidence from the left; r_minus/t_minus: from the right.
    """

    r_plus: complex | np.ndarray
    t_plus: complex | np.ndarray
    r_minus: complex | np.ndarray
    t_minus: complex | np.ndarray


def _check_square(mat, name: str = "matrix") -> np.ndarray:
    m = np.asarray(mat, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {m.shape}")
    return m


def _check_transfer(mat, name: str = "matrix") -> np.ndarray:
    m = _check_square(mat, name)
    if m.shape[0] % 2 != 0 or m.shape[0] < 2:
        raise DimensionError(f"{name} must have even dimension >= 2")
    return m


def atom_matrix(beta) -> np.ndarray:
    """Transfer matrix of a point scatterer with coupling block beta.

    beta may be a scalar (single mode) or an n_m x n_m array.  Returns the
    2*n_m block matrix [[I - beta, -beta], [beta, I + beta]].
    """
    b = np.atleast_2d(np.asarray(beta, dtype=complex))
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise DimensionError(f"beta must be square, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise DimensionError("beta entries must be finite")
    eye = np.eye(b.shape[0], dtype=complex)
    return np.block([[eye - b, -b], [b, eye + b]])


def free_matrix(phase, n_m: int = 1) -> np.ndarray:
    """Free propagation by `phase` radians: diag(e^{i phase} I, e^{-i phase} I)."""
    if n_m < 1:
        raise DimensionError("n_m must be >= 1")
    eye = np.eye(n_m, dtype=complex)
    zero = np.zeros((n_m, n_m), dtype=complex)
    forward = cmath.exp(1j * phase) * eye
    backward = cmath.exp(-1j * phase) * eye
    return np.block([[forward, zero], [zero, backward]])


def compose(*regions) -> np.ndarray:
    """Product of transfer matrices; the rightmost region is traversed first."""
    if not regions:
        raise DimensionError("compose needs at least one matrix")
    mats = [_check_transfer(r, f"region {i}") for i, r in enumerate(regions)]
    out = mats[0]
    for m in mats[1:]:
        if m.shape != out.shape:
            raise DimensionError(f"dimension mismatch: {out.shape} vs {m.shape}")
        out = out @ m
    return out


def bloch_angle(cell) -> BlochAngle:
    """Bloch angle of a 2x2 unit cell with the Im(theta) <= 0 convention."""
    c = _check_square(cell, "cell")
    if c.shape != (2, 2):
        raise DimensionError("bloch_angle is defined for 2x2 cells")
    cos_theta = complex(0.5 * (c[0, 0] + c[1, 1]))
    theta = cmath.acos(cos_theta)
    if theta.imag > 0:
        theta = -theta
    return BlochAngle(theta=theta)


def cell_power(cell, n: int, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """n-th power of a 2x2 unit cell via its Bloch angle.

    Uses the closed form when |sin(theta)| is resolvable; otherwise falls
    back to repeated multiplication and emits DegenerateCellWarning.
    """
    c = _check_square(cell, "cell")
    if c.shape != (2, 2):
        raise DimensionError("cell_power is defined for 2x2 cells")
    if n < 0 or int(n) != n:
        raise DimensionError("n must be a non-negative integer")
    n = int(n)
    eye = np.eye(2, dtype=complex)
    if n == 0:
        return eye
    theta = bloch_angle(c).theta
    sin_theta = cmath.sin(theta)
    if abs(sin_theta) < settings.degenerate_sin_tol:
        warnings.warn(
            "unit cell is degenerate (|sin theta| ~ 0); using repeated multiplication",
            DegenerateCellWarning,
            stacklevel=2,
        )
        out = np.linalg.matrix_power(c, n)
    else:
        cos_theta = cmath.cos(theta)
        out = cmath.cos(n * theta) * eye + (cmath.sin(n * theta) / sin_theta) * (c - cos_theta * eye)
    if not np.all(np.isfinite(out)):
        raise IllConditionedError("cell power overflowed", condition=float("inf"))
    return out


def cell_power_batch(cell, powers, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Closed-form powers of one 2x2 cell for many exponents at once.

    Returns an array of shape (len(powers), 2, 2).  Falls back to repeated
    multiplication per exponent on a degenerate cell.
    """
    c = _check_square(cell, "cell")
    if c.shape != (2, 2):
        raise DimensionError("cell_power_batch is defined for 2x2 cells")
    ns = np.asarray(powers, dtype=int)
    if np.any(ns < 0):
        raise DimensionError("powers must be non-negative")
    theta = bloch_angle(c).theta
    sin_theta = cmath.sin(theta)
    if abs(sin_theta) < settings.degenerate_sin_tol:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateCellWarning)
            return np.stack([cell_power(c, int(n), settings) for n in ns])
    cos_theta = cmath.cos(theta)
    eye = np.eye(2, dtype=complex)
    cos_n = np.cos(ns * theta)
    sin_n = np.sin(ns * theta)
    out = cos_n[:, None, None] * eye + (sin_n / sin_theta)[:, None, None] * (c - cos_theta * eye)
    if not np.all(np.isfinite(out)):
        raise IllConditionedError("cell power overflowed", condition=float("inf"))
    return out


def extract_scattering(t_e, settings: NumericSettings = DEFAULT_SETTINGS) -> ScatterCoeffs:
    """Scattering coefficients of a transfer matrix.

    Left incidence:  r_plus = -T22^{-1} T21,  t_plus = T11 - T12 T22^{-1} T21.
    Right incidence: t_minus = T22^{-1},      r_minus = T12 T22^{-1}.
    Raises IllConditionedError when T22 is numerically singular.
    """
    t = _check_transfer(t_e, "T_e")
    m = t.shape[0] // 2
    t11, t12 = t[:m, :m], t[:m, m:]
    t21, t22 = t[m:, :m], t[m:, m:]
    if not np.all(np.isfinite(t)):
        raise IllConditionedError("transfer matrix has non-finite entries", condition=float("inf"))
    # conditioning of the T22 inversion relative to the overall matrix
    # scale; the plain condition number of a 1x1 block is always 1
    smallest = np.linalg.svd(t22, compute_uv=False)[-1]
    scale = np.linalg.norm(t, 2)
    cond = scale / smallest if smallest > 0 else float("inf")
    if not np.isfinite(cond) or cond > settings.condition_limit:
        raise IllConditionedError("lower-right transfer block is singular", condition=float(cond))
    inv22 = np.linalg.inv(t22)
    r_plus = -inv22 @ t21
    t_plus = t11 - t12 @ inv22 @ t21
    t_minus = inv22
    r_minus = t12 @ inv22
    if m == 1:
        return ScatterCoeffs(
            r_plus=complex(r_plus[0, 0]),
            t_plus=complex(t_plus[0, 0]),
            r_minus=complex(r_minus[0, 0]),
            t_minus=complex(t_minus[0, 0]),
        )
    return ScatterCoeffs(r_plus=r_plus, t_plus=t_plus, r_minus=r_minus, t_minus=t_minus)
