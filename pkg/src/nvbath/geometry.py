"""Spherical-cap deposit geometry, molecule counts and a dipolar <B^2> estimate.

Coordinates: the diamond surface is the plane z = 0, the deposit (a
spherical cap of sphere radius R and height h) sits on z >= 0, and the
sensor lies on the cap axis at depth ``nv_depth`` below the surface.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .units import MU_0, MU_BOHR, N_AVOGADRO

#: high-spin Co(II), g = 2, S = 3/2: g sqrt(S(S+1)) Bohr magnetons
DEFAULT_MOMENT_MUB = 2.0 * math.sqrt(1.5 * 2.5)


@dataclass(frozen=True)
class SensingGeometry:
    nv_depth: float
    sensing_radius: float
    cap_radius: float
    cap_height: float
    concentration: float  # mol/m^3

    def __post_init__(self):
        for name in ("sensing_radius", "cap_radius", "cap_height"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive")
        if self.cap_height > 2 * self.cap_radius:
            raise DomainError("cap height must not exceed the sphere diameter")
        if self.concentration < 0:
            raise DomainError("concentration must be non-negative")
        if not self.nv_depth > 0:
            raise DomainError("sensor must lie below the surface (nv_depth > 0), not inside the cap")

    @property
    def volume(self):
        return cap_volume(self.cap_radius, self.cap_height)

    @property
    def n_molecules(self):
        return molecule_count(self.volume, self.concentration)

    def scaled(self, s):
        """Geometry with every length multiplied by ``s`` and the molecule count unchanged."""
        return SensingGeometry(self.nv_depth * s, self.sensing_radius * s, self.cap_radius * s,
                               self.cap_height * s, self.concentration / s**3)


def cap_volume(R, h):
    """Volume ``pi h^2 (3R - h) / 3`` of a spherical cap."""
    if not R > 0:
        raise DomainError("sphere radius must be positive")
    if not 0 < h <= 2 * R:
        raise DomainError(f"cap height must lie in (0, 2R], got h = {h!r}")
    return math.pi * h * h * (3 * R - h) / 3.0


def molecule_count(volume, concentration):
    """Expected number of molecules, ``concentration * N_A * volume``."""
    if volume < 0 or concentration < 0:
        raise DomainError("volume and concentration must be non-negative")
    return concentration * N_AVOGADRO * volume


def implied_volume(count, concentration):
    """Volume that holds ``count`` molecules at ``concentration`` (inverse of :func:`molecule_count`)."""
    if not concentration > 0 or count < 0:
        raise DomainError("need concentration > 0 and count >= 0")
    return count / (concentration * N_AVOGADRO)


def dipole_field(moment, r):
    """Point-dipole field ``(mu0/4pi) (3 (m.r^) r^ - m) / |r|^3`` in tesla.

    ``moment`` in A m^2 and ``r`` (source to field point) in m; both broadcast
    over leading axes with the vector in the last axis.
    """
    m = np.asarray(moment, dtype=float)
    r = np.asarray(r, dtype=float)
    dist = np.linalg.norm(r, axis=-1, keepdims=True)
    rhat = r / dist
    mdotr = np.sum(m * rhat, axis=-1, keepdims=True)
    return MU_0 / (4 * math.pi) * (3 * mdotr * rhat - m) / dist**3


def _sample_cap(rng, R, h, n):
    # rejection sampling from the bounding box of the cap
    z0 = h - R
    half = R if h >= R else math.sqrt(h * (2 * R - h))
    out = np.empty((0, 3))
    while out.shape[0] < n:
        m = max(2 * (n - out.shape[0]), 1024)
        p = rng.random((m, 3))
        p[:, 0] = (2 * p[:, 0] - 1) * half
        p[:, 1] = (2 * p[:, 1] - 1) * half
        p[:, 2] = p[:, 2] * h
        keep = p[:, 0] ** 2 + p[:, 1] ** 2 + (p[:, 2] - z0) ** 2 <= R * R
        out = np.concatenate([out, p[keep]])
    return out[:n]


@dataclass
class DipolarEstimate:
    b_rms: float
    b_rms_stderr: float
    b_sq: float
    b_sq_stderr: float
    n_molecules_cap: float
    n_molecules_in_range: float
    n_samples: int
    assumptions: list = field(default_factory=list)


def dipolar_b_rms(geom, moment_muB=DEFAULT_MOMENT_MUB, n_samples=100_000, seed=0,
                  axis=(0.0, 0.0, 1.0)):
    """Monte Carlo RMS of the field projection along ``axis`` at the sensor.

    Molecules are uniform in the cap and isotropically oriented; those
    farther than ``sensing_radius`` from the sensor are excluded. The
    ensemble sum over molecules is ``N_cap * E[1(r < r_s) B_axis^2]``.
    """
    if not moment_muB > 0:
        raise DomainError("moment must be positive")
    if n_samples < 10_000:
        raise DomainError("n_samples must be >= 1e4")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    pts = _sample_cap(rng, geom.cap_radius, geom.cap_height, n_samples)
    u = rng.standard_normal((n_samples, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    ax = np.asarray(axis, dtype=float)
    ax = ax / np.linalg.norm(ax)

    r = np.array([0.0, 0.0, -geom.nv_depth]) - pts  # source -> sensor
    inside = np.linalg.norm(r, axis=1) <= geom.sensing_radius
    b = dipole_field(u * (moment_muB * MU_BOHR), r) @ ax
    contrib = np.where(inside, b * b, 0.0)

    n_cap = geom.n_molecules
    b_sq = n_cap * float(contrib.mean())
    b_sq_se = n_cap * float(contrib.std(ddof=1)) / math.sqrt(n_samples)
    b_rms = math.sqrt(b_sq)
    rms_se = b_sq_se / (2 * b_rms) if b_rms > 0 else 0.0
    assumptions = [
        "uniform spatial distribution of molecules within the cap",
        "isotropic, uncorrelated point-dipole orientations",
        f"effective moment {moment_muB:.3f} Bohr magnetons per molecule",
    ]
    if math.isclose(moment_muB, DEFAULT_MOMENT_MUB):
        assumptions.append("default moment assumes high-spin Co(II), g = 2, S = 3/2")
    return DipolarEstimate(b_rms, rms_se, b_sq, b_sq_se, n_cap, n_cap * float(inside.mean()),
                           n_samples, assumptions)
