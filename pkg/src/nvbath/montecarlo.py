"""Monte Carlo oracle: exact-discretization OU fields and echo phase accumulation.

Random numbers come from a Philox counter-based generator keyed by
``(seed, trajectory index)``, so a trajectory is the same regardless of
block size, worker count or execution order. Ensemble means are reduced
with :func:`math.fsum`, which is exactly rounded and order independent.
"""

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import signal

from . import kernels
from .errors import ConfigError, StatisticsError
from .units import GAMMA_NV

_BLOCK = 512


@dataclass(frozen=True)
class TrajectoryConfig:
    """Parameters of an OU field ensemble (SI units)."""

    tau_c: float
    sigma_B: float
    dt: float
    n_steps: int
    n_trajectories: int
    seed: int = 0
    allow_coarse: bool = False

    def __post_init__(self):
        if not self.tau_c > 0 or not self.dt > 0:
            raise ConfigError("tau_c and dt must be positive")
        if self.sigma_B < 0:
            raise ConfigError("sigma_B must be non-negative")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1")
        if self.n_trajectories < 2:
            raise ConfigError("n_trajectories must be >= 2 for variance estimates")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not self.allow_coarse:
            if self.dt > self.tau_c / 2:
                raise ConfigError(f"dt = {self.dt:g} s exceeds tau_c/2 = {self.tau_c / 2:g} s")
            if self.dt > self.tau_c / 10:
                warnings.warn("dt > tau_c/10: phase quadrature loses accuracy", stacklevel=3)

    @property
    def decay(self):
        return math.exp(-self.dt / self.tau_c)

    @property
    def kick(self):
        # sigma * sqrt(1 - exp(-2 dt/tau_c)), computed without cancellation
        return self.sigma_B * math.sqrt(-math.expm1(-2.0 * self.dt / self.tau_c))

    @property
    def times(self):
        return np.arange(self.n_steps + 1) * self.dt


@dataclass
class EnsembleResult:
    times: np.ndarray
    mean_signal: np.ndarray
    stderr: np.ndarray
    n_used: int
    phase_var: np.ndarray = None

    def to_dict(self):
        out = {
            "times_s": self.times.tolist(),
            "mean_signal": self.mean_signal.tolist(),
            "stderr": self.stderr.tolist(),
            "n_used": self.n_used,
        }
        if self.phase_var is not None:
            out["phase_var"] = self.phase_var.tolist()
        return out


def trajectory_rng(seed, index):
    """Generator for trajectory ``index`` of the ensemble with ``seed``."""
    return np.random.Generator(np.random.Philox(key=(int(index) << 64) | int(seed)))


def _normals(cfg, start, stop):
    xi = np.empty((stop - start, cfg.n_steps + 1))
    for row, i in enumerate(range(start, stop)):
        trajectory_rng(cfg.seed, i).standard_normal(out=xi[row])
    return xi


def _blocks(n, size=_BLOCK):
    return [(a, min(a + size, n)) for a in range(0, n, size)]


def generate_ou_trajectory(cfg, start=0, stop=None):
    """Field trajectories ``B[i, k]`` (tesla) for trajectories ``start:stop``.

    ``B_0 ~ N(0, sigma^2)`` and ``B_{k+1} = B_k e^{-dt/tau_c} + sigma sqrt(1 - e^{-2dt/tau_c}) xi_k``,
    stationary for any ``dt``.
    """
    stop = cfg.n_trajectories if stop is None else stop
    if cfg.sigma_B == 0:
        return np.zeros((stop - start, cfg.n_steps + 1))
    xi = _normals(cfg, start, stop)
    return kernels.ou_paths(xi, cfg.decay, cfg.kick, cfg.sigma_B)


def dump_trajectory_csv(path, cfg, index=0):
    """Write one trajectory as CSV with columns ``t_s,B_T``."""
    B = generate_ou_trajectory(cfg, index, index + 1)[0]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_s", "B_T"])
        for t, b in zip(cfg.times, B):
            w.writerow([repr(float(t)), repr(float(b))])


@dataclass
class AutocorrelationEstimate:
    lags: np.ndarray
    A: np.ndarray
    stderr: np.ndarray
    samples: np.ndarray


def _lag_sums(x, max_lag):
    n = x.shape[-1]
    nfft = 1 << int(math.ceil(math.log2(2 * n)))
    fx = np.fft.rfft(x, nfft, axis=-1)
    return np.fft.irfft(fx * np.conj(fx), nfft, axis=-1)[..., : max_lag + 1]


def estimate_autocorrelation(trajectories, dt, max_lag, min_trajectories=100):
    """Unbiased lag-product estimate of ``<B(0) B(k dt)>`` with standard errors.

    ``trajectories`` is ``(n_traj, n)``. A single long trajectory is split into
    ``min_trajectories`` blocks, which act as the ensemble.
    """
    x = np.atleast_2d(np.asarray(trajectories, dtype=float))
    if x.shape[0] == 1:
        n_blk = x.shape[1] // min_trajectories
        if n_blk <= max_lag:
            raise StatisticsError("trajectory too short to split into blocks longer than max_lag")
        x = x[0, : n_blk * min_trajectories].reshape(min_trajectories, n_blk)
    if x.shape[0] < min_trajectories:
        raise StatisticsError(f"need >= {min_trajectories} trajectories, got {x.shape[0]}")
    n = x.shape[1]
    if max_lag >= n:
        raise StatisticsError("max_lag must be shorter than the trajectory")
    per_traj = _lag_sums(x, max_lag) / (n - np.arange(max_lag + 1))
    A = per_traj.mean(axis=0)
    se = per_traj.std(axis=0, ddof=1) / math.sqrt(x.shape[0])
    return AutocorrelationEstimate(np.arange(max_lag + 1) * dt, A, se, per_traj)


@dataclass
class PSDEstimate:
    omega: np.ndarray
    S: np.ndarray
    variance: float

    def normalized(self, sigma_sq=None):
        """Spectrum divided by ``sigma_sq`` (default: the sample variance)."""
        scale = self.variance if sigma_sq is None else sigma_sq
        return self.S / scale if scale > 0 else np.zeros_like(self.S)

    def integral(self):
        # rectangle rule on the uniform FFT grid
        return float(np.sum(self.S) * (self.omega[1] - self.omega[0]))


def estimate_psd(trajectories, dt, nperseg=1024):
    """Welch-averaged one-sided PSD in T^2 s/rad on ``omega >= 0``.

    Hann-windowed segments with 50% overlap, no detrending. The DC bin is
    doubled like every other bin so the spectrum follows the one-sided
    convention of the noise model, ``int_0^inf S dw = <B^2>``.
    """
    x = np.atleast_2d(np.asarray(trajectories, dtype=float))
    if x.shape[1] < nperseg:
        raise StatisticsError(f"trajectory length {x.shape[1]} shorter than nperseg = {nperseg}")
    f, p = signal.welch(x, fs=1.0 / dt, window="hann", nperseg=nperseg, detrend=False,
                        return_onesided=True, scaling="density", axis=-1)
    p = p.mean(axis=0)
    p[0] *= 2.0
    return PSDEstimate(2 * math.pi * f, p / (2 * math.pi), float(np.mean(x * x)))


def _phase_indices(cfg, tau_list, min_resolution):
    tau = np.asarray(tau_list, dtype=float)
    half = np.rint(tau / (2 * cfg.dt)).astype(np.intp)
    if np.any(half < 1) or np.any(np.abs(2 * half * cfg.dt - tau) > 1e-9 * tau):
        raise ConfigError("every tau must be an even multiple of dt")
    if np.any(tau / cfg.dt < min_resolution):
        raise ConfigError(f"tau/dt must be >= {min_resolution}")
    if np.any(2 * half > cfg.n_steps):
        raise ConfigError("n_steps too small for the longest tau")
    return tau, half


def _ensemble(cfg, idx, combine, workers):
    """Per-trajectory phases for all blocks, in trajectory order."""
    def run(block):
        a, b = block
        xi = _normals(cfg, a, b)
        ints = kernels.ou_integrals(xi, cfg.decay, cfg.kick, cfg.sigma_B, cfg.dt, idx)
        return combine(ints)

    blocks = _blocks(cfg.n_trajectories)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    return np.concatenate(parts, axis=0)


def _reduce(phases):
    c = np.cos(phases)
    n = phases.shape[0]
    mean = np.array([math.fsum(col) / n for col in c.T])
    var = np.array([math.fsum(col) / (n - 1) for col in ((c - mean) ** 2).T])
    phase_var = np.array([math.fsum(col) / n for col in (phases**2).T])
    return mean, np.sqrt(var / n), phase_var


def simulate_echo_decay(cfg, tau_list, gamma=GAMMA_NV, workers=None, min_resolution=100):
    """Hahn-echo coherence ``<cos phi>`` for each total evolution time in ``tau_list``.

    ``phi = gamma [int_0^{tau/2} B dt - int_{tau/2}^{tau} B dt]`` by the trapezoidal
    rule with an instantaneous pi pulse at ``tau/2``.
    """
    tau, half = _phase_indices(cfg, tau_list, min_resolution)
    if cfg.sigma_B == 0:
        ones = np.ones(tau.size)
        return EnsembleResult(tau, ones, np.zeros(tau.size), cfg.n_trajectories, np.zeros(tau.size))
    idx = np.unique(np.concatenate([half, 2 * half]))
    pos = {int(k): j for j, k in enumerate(idx)}
    first = np.array([pos[int(h)] for h in half])
    second = np.array([pos[int(2 * h)] for h in half])

    def combine(ints):
        return gamma * (2.0 * ints[:, first] - ints[:, second])

    phases = _ensemble(cfg, idx, combine, workers)
    mean, se, pv = _reduce(phases)
    return EnsembleResult(tau, mean, se, cfg.n_trajectories, pv)


def simulate_fid_decay(cfg, t_list, gamma=GAMMA_NV, workers=None, min_resolution=100):
    """Free-induction (Ramsey) coherence ``<cos(gamma int_0^t B)>``."""
    t = np.asarray(t_list, dtype=float)
    steps = np.rint(t / cfg.dt).astype(np.intp)
    if np.any(np.abs(steps * cfg.dt - t) > 1e-9 * t) or np.any(steps < min_resolution):
        raise ConfigError(f"every t must be a multiple of dt with t/dt >= {min_resolution}")
    if np.any(steps > cfg.n_steps):
        raise ConfigError("n_steps too small for the longest t")
    if cfg.sigma_B == 0:
        return EnsembleResult(t, np.ones(t.size), np.zeros(t.size), cfg.n_trajectories, np.zeros(t.size))
    idx = np.unique(steps)
    pos = np.searchsorted(idx, steps)
    phases = _ensemble(cfg, idx, lambda ints: gamma * ints[:, pos], workers)
    mean, se, pv = _reduce(phases)
    return EnsembleResult(t, mean, se, cfg.n_trajectories, pv)


def closed_form_ou_fid(Delta_sq, tau_c, t):
    """Ramsey decay exponent ``Delta^2 tau_c^2 (x - 1 + e^{-x})``, ``x = t/tau_c``."""
    x = np.asarray(t, dtype=float) / tau_c
    out = Delta_sq * tau_c**2 * (x + np.expm1(-x))
    return float(out) if out.ndim == 0 else out
