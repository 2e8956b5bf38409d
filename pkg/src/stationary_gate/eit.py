"""Slow-light storage and retrieval of photon wave packets.

Three independent models of the same storage process are implemented:

 - a dispersion model: Gaussian packets stay Gaussian, with a complex
   width set by the quadratic part of the polariton dispersion;
 - a discrete model: one amplitude per atom, integrated from the coupled
   excited-state/spin equations with the full photon-mediated coupling;
 - a kernel model: the continuum storage/retrieval kernels convolved with
   the input packet on a uniform grid.

Conventions shared by all three: total single-atom linewidth is the unit
of frequency, the ensemble length is the unit of distance (positions are
quoted as fractions z of the length), and the pump amplitude is taken
real and constant.  Spin waves are stored as 2N samples: entries 0..N-1
hold the forward component at z = j/N, entries N..2N-1 hold the backward
component at z = 1 - k/N (each component sampled from its own entrance
side).  The squared norm of a spin wave is (1/N) * sum |amplitude|^2 and
equals the storage efficiency for a unit-norm input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ive

from .ensemble import EnsembleSpec, atom_phases
from .numerics import DEFAULT_SETTINGS, NumericSettings, rk4_integrate, trapezoid

_SQRT2 = math.sqrt(2.0)
_KERNEL_FORMS = ("auto", "exact", "asymptotic")


class IntegrationError(RuntimeError):
    """Discrete-model integration produced non-finite amplitudes."""


class ResolutionError(ValueError):
    """A requested grid is too coarse to resolve the packet."""


@dataclass(frozen=True)
class EitParams:
    """Slow-light propagation constants for one ensemble configuration.

    v_g is the group velocity (ensemble lengths per unit time), alpha the
    purely imaginary quadratic dispersion coefficient, b half the total
    emission rate into the guide (n_atoms * gamma_1d / 2), sigma_tilde the
    target stored width as a fraction of the ensemble length.
    """

    v_g: float
    alpha: complex
    b: float
    sigma_tilde: float
    n_atoms: int

    def __post_init__(self):
        if self.v_g <= 0:
            raise ValueError("group velocity must be positive")
        if abs(self.alpha.real) > 1e-12 * abs(self.alpha.imag) + 1e-300:
            raise ValueError("dispersion coefficient must be purely imaginary")
        if self.b <= 0:
            raise ValueError("optical-depth parameter must be positive")
        if self.sigma_tilde <= 0:
            raise ValueError("target stored width must be positive")
        if self.n_atoms < 1:
            raise ValueError("need at least one atom")

    @property
    def gamma_1d(self) -> float:
        return 2.0 * self.b / self.n_atoms

    @property
    def gamma_prime(self) -> float:
        return abs(self.alpha) * self.b / self.v_g

    @property
    def omega0_sq(self) -> float:
        return self.v_g * self.b

    @property
    def omega0(self) -> float:
        return math.sqrt(self.omega0_sq)


def eit_params(n_atoms: int, gamma_1d: float, omega0: float, sigma_tilde: float) -> EitParams:
    """Propagation constants from ensemble size, guide coupling and pump."""
    if not 0.0 < gamma_1d <= 1.0:
        raise ValueError("guide coupling fraction must be in (0, 1]")
    if omega0 <= 0:
        raise ValueError("pump amplitude must be positive")
    gamma_prime = 1.0 - gamma_1d
    v_g = 2.0 * omega0**2 / (n_atoms * gamma_1d)
    alpha = -4j * omega0**2 * gamma_prime / (n_atoms * gamma_1d) ** 2
    return EitParams(
        v_g=v_g, alpha=alpha, b=0.5 * n_atoms * gamma_1d,
        sigma_tilde=sigma_tilde, n_atoms=n_atoms,
    )


@dataclass(frozen=True)
class WavePacket:
    """Field amplitude on a uniform time grid (times in inverse linewidths)."""

    times: np.ndarray
    amplitudes: np.ndarray
    sigma_in: float | None = None
    mu_in: float | None = None
    t_store: float | None = None

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if times.ndim != 1 or times.shape != amplitudes.shape:
            raise ValueError("times and amplitudes must be equal-length 1-d arrays")
        if times.size < 2:
            raise ValueError("need at least two grid points")
        steps = np.diff(times)
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
            raise ValueError("time grid must be uniform")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def norm_sq(self) -> float:
        return float(trapezoid(np.abs(self.amplitudes) ** 2, self.times))


@dataclass(frozen=True)
class SpinWave:
    """2N-sample spin wave; see the module docstring for the layout."""

    amplitudes: np.ndarray
    two_sided: bool = True

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.ndim != 1 or amplitudes.size % 2 or amplitudes.size == 0:
            raise ValueError("spin wave must be a 1-d array of even length")
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def n_atoms(self) -> int:
        return self.amplitudes.size // 2

    def norm_sq(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2)) / self.n_atoms


def eta_eit_analytic(params: EitParams, first_order: bool = False) -> float:
    """Transmission efficiency of a packet traversing the full ensemble."""
    loss = abs(params.alpha) / (2.0 * params.v_g * params.sigma_tilde**2)
    if first_order:
        return 1.0 - 0.5 * loss
    return 1.0 / math.sqrt(1.0 + loss)


def gaussian_input(params: EitParams, settings: NumericSettings = DEFAULT_SETTINGS) -> WavePacket:
    """Unit-norm Gaussian packet sized so the stored width is sigma_tilde."""
    broadening = 1.0 + abs(params.alpha) / (4.0 * params.v_g * params.sigma_tilde**2)
    sigma_in = params.sigma_tilde / (params.v_g * math.sqrt(broadening))
    mu_in = 4.0 * sigma_in
    t_store = mu_in + 0.5 / params.v_g
    dt = settings.rk4_packet_fraction * sigma_in
    if sigma_in < settings.packet_min_sigma_steps * dt:
        raise ResolutionError("time grid too coarse for the packet width")
    n_steps = max(2, math.ceil(t_store / dt))
    times = np.linspace(0.0, t_store, n_steps + 1)
    values = (2.0 * math.pi * sigma_in**2) ** -0.25 * np.exp(
        -((times - mu_in) ** 2) / (4.0 * sigma_in**2)
    )
    values = values.astype(complex)
    values /= math.sqrt(trapezoid(np.abs(values) ** 2, times))
    return WavePacket(times, values, sigma_in=sigma_in, mu_in=mu_in, t_store=t_store)


def _kernel_eval(v, t, params: EitParams, form: str, settings: NumericSettings) -> np.ndarray:
    """Shared storage/retrieval kernel body; v is b*(distance from entry)."""
    if form not in _KERNEL_FORMS:
        raise ValueError(f"unknown kernel form {form!r}")
    if params.gamma_prime <= 0:
        raise ValueError("kernels require a nonzero non-guided decay rate")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("kernel times must be non-negative")
    g = 0.5 * params.gamma_prime
    u = params.omega0_sq * t
    root_u = np.sqrt(u)
    root_v = np.sqrt(v)
    x = 2.0 * root_u * root_v / g
    gauss = np.exp(-((root_u - root_v) ** 2) / g)
    if form == "exact":
        use_asym = np.zeros(np.broadcast(u, v).shape, dtype=bool)
    elif form == "asymptotic":
        use_asym = np.ones(np.broadcast(u, v).shape, dtype=bool)
    else:
        use_asym = x >= settings.kernel_asymptotic_min_x
    exact = ive(0, x) / g * gauss
    uv_safe = np.where(use_asym, u * v + 0.0, 1.0)
    x_safe = np.where(use_asym, x, 1.0)
    series = 1.0 + 1.0 / (8.0 * x_safe) + 9.0 / (128.0 * x_safe**2)
    asym = uv_safe**-0.25 / (2.0 * math.sqrt(math.pi) * math.sqrt(g)) * series * gauss
    core = np.where(use_asym, asym, exact)
    return -math.sqrt(params.b) * params.omega0 * core


def storage_kernel(
    z_tilde, t, params: EitParams, form: str = "auto",
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> complex | np.ndarray:
    """Response of the spin wave at z to a unit field entering at z=0."""
    z = np.asarray(z_tilde, dtype=float)
    if np.any(z < 0) or np.any(z > 1):
        raise ValueError("positions must lie in [0, 1]")
    out = _kernel_eval(params.b * z, t, params, form, settings)
    return complex(out) if np.ndim(out) == 0 else out


def retrieval_kernel(
    z_tilde, t, params: EitParams, form: str = "auto",
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> complex | np.ndarray:
    """Field leaving at z=1 due to a unit spin amplitude stored at z."""
    z = np.asarray(z_tilde, dtype=float)
    if np.any(z < 0) or np.any(z > 1):
        raise ValueError("positions must lie in [0, 1]")
    out = _kernel_eval(params.b * (1.0 - z), t, params, form, settings)
    return complex(out) if np.ndim(out) == 0 else out


def _sample_grid(n_atoms: int) -> np.ndarray:
    return np.arange(n_atoms) / n_atoms


def store_dispersion(params: EitParams, two_sided: bool = True) -> SpinWave:
    """Analytic Gaussian spin wave after propagating to the ensemble center."""
    t_center = 0.5 / params.v_g
    c = 1j * params.alpha * t_center / (2.0 * params.sigma_tilde**2)
    width_sq = params.sigma_tilde**2 * (1.0 + c)
    grid = _sample_grid(params.n_atoms)
    profile = (
        (2.0 * math.pi * params.sigma_tilde**2) ** -0.25
        / np.sqrt(1.0 + c)
        * np.exp(-((grid - 0.5) ** 2) / (4.0 * width_sq))
    )
    if two_sided:
        half = profile / _SQRT2
        # mirrored second half: the profile is symmetric about the center,
        # so the samples at 1 - k/N coincide with those at k/N
        return SpinWave(np.concatenate([half, half]), two_sided=True)
    return SpinWave(np.concatenate([profile, np.zeros_like(profile)]), two_sided=False)


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    dt = times[1] - times[0]
    weights = np.full(times.size, dt)
    weights[0] = weights[-1] = 0.5 * dt
    return weights


def store_kernel_model(
    packet: WavePacket,
    params: EitParams,
    two_sided: bool = True,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> SpinWave:
    """Convolve the input packet with the storage kernel at each sample."""
    if packet.t_store is None:
        raise ValueError("input packet carries no storage time")
    grid = _sample_grid(params.n_atoms)
    lag = packet.t_store - packet.times
    lag = np.where(lag < 0, 0.0, lag)
    kernel = storage_kernel(grid[:, None], lag[None, :], params, settings=settings)
    weighted = _trapezoid_weights(packet.times) * packet.amplitudes
    if two_sided:
        half = kernel @ (weighted / _SQRT2)
        # symmetric drive: the backward component matches the forward one
        # sample for sample in the dual-sided layout
        return SpinWave(np.concatenate([half, half]), two_sided=True)
    forward = kernel @ weighted
    return SpinWave(np.concatenate([forward, np.zeros_like(forward)]), two_sided=False)


def retrieval_times(params: EitParams, settings: NumericSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Uniform output grid covering one full ensemble transit."""
    broadening = 1.0 + abs(params.alpha) / (4.0 * params.v_g * params.sigma_tilde**2)
    sigma_in = params.sigma_tilde / (params.v_g * math.sqrt(broadening))
    t_end = 1.0 / params.v_g
    dt = settings.rk4_packet_fraction * sigma_in
    n_steps = max(2, math.ceil(t_end / dt))
    return np.linspace(0.0, t_end, n_steps + 1)


def retrieval_matrix(
    params: EitParams,
    times: np.ndarray,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> np.ndarray:
    """Matrix taking one spin-wave half to its retrieved port field."""
    grid = _sample_grid(params.n_atoms)
    kernel = retrieval_kernel(grid[None, :], np.asarray(times)[:, None], params, settings=settings)
    return kernel / params.n_atoms


def retrieve_kernel_model(
    spin: SpinWave,
    params: EitParams,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> WavePacket:
    """Integrate the retrieval kernel against a stored spin wave."""
    n = params.n_atoms
    if spin.n_atoms != n:
        raise ValueError("spin wave size does not match the parameter set")
    times = retrieval_times(params, settings)
    matrix = retrieval_matrix(params, times, settings)
    out_plus = matrix @ spin.amplitudes[:n]
    out_minus = matrix @ spin.amplitudes[n:]
    if spin.two_sided:
        out = (out_plus + out_minus) / _SQRT2
    else:
        out = out_plus
    return WavePacket(times, out)


def _drive_function(packet: WavePacket | None, scale: float):
    if packet is None or scale == 0.0:
        return None
    times = packet.times
    re = np.real(packet.amplitudes) * scale
    im = np.imag(packet.amplitudes) * scale
    def drive(t: float) -> complex:
        return complex(np.interp(t, times, re, left=0.0, right=0.0),
                       np.interp(t, times, im, left=0.0, right=0.0))
    return drive


def _discrete_step(spec: EnsembleSpec, packet: WavePacket | None,
                   settings: NumericSettings) -> float:
    candidates = [settings.rk4_decay_fraction]
    if spec.omega0 > 0:
        candidates.append(settings.rk4_drive_fraction / spec.omega0)
    if packet is not None:
        candidates.append(packet.dt)
    return min(candidates)


def _run_discrete(
    spec: EnsembleSpec,
    drive_plus,
    drive_minus,
    spins0: np.ndarray,
    t_end: float,
    dt: float,
    settings: NumericSettings,
):
    """Integrate the coupled atom equations; returns final state and ports.

    State layout: first N entries excited-state amplitudes, last N spin
    amplitudes, one per atom in order of position.
    """
    n = spec.n_atoms
    if n > settings.discrete_atom_cap:
        raise ValueError(
            f"atom number {n} exceeds the discrete-model cap "
            f"{settings.discrete_atom_cap}"
        )
    z = atom_phases(spec)
    e_plus = np.exp(1j * z)
    e_minus = np.conj(e_plus)
    coupling = -0.5 * spec.gamma_1d * np.exp(1j * np.abs(z[:, None] - z[None, :]))
    decay = coupling - 0.5 * spec.gamma_prime * np.eye(n)
    in_coef = 1j * math.sqrt(0.5 * spec.gamma_1d)
    omega = spec.omega0

    def deriv(t: float, y: np.ndarray) -> np.ndarray:
        p = y[:n]
        s = y[n:]
        dp = decay @ p + 1j * omega * s
        if drive_plus is not None:
            dp += in_coef * drive_plus(t) * e_plus
        if drive_minus is not None:
            dp += in_coef * drive_minus(t) * e_minus
        ds = 1j * omega * p
        return np.concatenate([dp, ds])

    out_times: list[float] = []
    out_plus: list[complex] = []
    out_minus: list[complex] = []

    def observer(t: float, y: np.ndarray):
        p = y[:n]
        fwd = in_coef * (e_minus @ p)
        bwd = in_coef * (e_plus @ p)
        if drive_plus is not None:
            fwd += drive_plus(t)
        if drive_minus is not None:
            bwd += drive_minus(t)
        out_times.append(t)
        out_plus.append(fwd)
        out_minus.append(bwd)

    y0 = np.concatenate([np.zeros(n, dtype=complex), spins0])
    y_end = rk4_integrate(deriv, y0, t_end, dt, observer=observer)
    if not np.all(np.isfinite(y_end)):
        raise IntegrationError("discrete model produced non-finite amplitudes")
    ports = (np.array(out_times), np.array(out_plus), np.array(out_minus))
    return y_end, ports


def store_discrete(
    packet: WavePacket,
    spec: EnsembleSpec,
    two_sided: bool = True,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> SpinWave:
    """Store a packet by integrating the per-atom equations of motion."""
    if packet.t_store is None:
        raise ValueError("input packet carries no storage time")
    n = spec.n_atoms
    z = atom_phases(spec)
    zeros = np.zeros(n, dtype=complex)
    dt = _discrete_step(spec, packet, settings)
    scale = 1.0 / _SQRT2 if two_sided else 1.0
    y_fwd, _ = _run_discrete(
        spec, _drive_function(packet, scale), None, zeros, packet.t_store, dt, settings
    )
    forward = math.sqrt(n) * y_fwd[n:] * np.exp(-1j * z)
    if not two_sided:
        return SpinWave(np.concatenate([forward, zeros]), two_sided=False)
    y_bwd, _ = _run_discrete(
        spec, None, _drive_function(packet, scale), zeros, packet.t_store, dt, settings
    )
    backward = math.sqrt(n) * y_bwd[n:] * np.exp(1j * z)
    # re-order the backward component into the dual-sided layout: slot k
    # holds the sample at z = 1 - k/N, the edge slot reuses the last atom
    flipped = backward[::-1]
    second = np.concatenate([flipped[:1], flipped[:-1]])
    return SpinWave(np.concatenate([forward, second]), two_sided=True)


def retrieve_discrete(
    spin: SpinWave,
    spec: EnsembleSpec,
    settings: NumericSettings = DEFAULT_SETTINGS,
) -> WavePacket:
    """Release a stored spin wave and collect the port fields over time."""
    n = spec.n_atoms
    if spin.n_atoms != n:
        raise ValueError("spin wave size does not match the ensemble")
    if spec.omega0 <= 0:
        raise ValueError("retrieval requires a nonzero pump")
    z = atom_phases(spec)
    forward = spin.amplitudes[:n]
    flipped = spin.amplitudes[n:][::-1]
    backward_lab = np.concatenate([flipped[:1], flipped[:-1]])
    spins0 = (forward * np.exp(1j * z) + backward_lab * np.exp(-1j * z)) / math.sqrt(n)
    v_g = 2.0 * spec.omega0**2 / (n * spec.gamma_1d)
    t_end = 1.0 / v_g
    dt = _discrete_step(spec, None, settings)
    _, (times, out_plus, out_minus) = _run_discrete(
        spec, None, None, spins0, t_end, dt, settings
    )
    if spin.two_sided:
        out = (out_plus + out_minus) / _SQRT2
    else:
        out = out_plus
    return WavePacket(times, out)
