"""Geometry-based multipath channels and channel correlation matrices (CCMs).

Users carry a single omni antenna. Ray powers are stored normalised to sum
to one per user; the channel draws each ray gain with variance
``n_rays * power`` so that the sqrt(M / n_rays) prefactor of the ray model
yields E||h||^2 = M per user.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DimensionError, InputError
from .numerics import herm_eig, hermitize

CCM_KINDS = ("ensemble", "sample", "signal-estimate")


@dataclass(frozen=True, eq=False)
class UserGeometry:
    aoas: np.ndarray
    powers: np.ndarray
    # directional-sine interval covered by the user's rays
    spread: tuple

    def __post_init__(self):
        aoas = np.atleast_1d(np.asarray(self.aoas, dtype=float))
        powers = np.atleast_1d(np.asarray(self.powers, dtype=float))
        if aoas.size == 0:
            raise InputError("a user needs at least one ray")
        if aoas.shape != powers.shape:
            raise DimensionError("aoas and powers differ in length")
        if np.any(np.abs(aoas) >= np.pi / 2):
            raise InputError("every AoA must lie in (-pi/2, pi/2)")
        if np.any(powers <= 0):
            raise InputError("ray powers must be positive")
        powers = powers / powers.sum()
        lo, hi = sorted(self.spread)
        s = np.sin(aoas)
        if s.min() < lo - 1e-12 or s.max() > hi + 1e-12:
            raise InputError("spread interval does not cover every ray")
        object.__setattr__(self, "aoas", aoas)
        object.__setattr__(self, "powers", powers)
        object.__setattr__(self, "spread", (float(lo), float(hi)))

    @classmethod
    def from_rays(cls, aoas, powers=None):
        aoas = np.atleast_1d(np.asarray(aoas, dtype=float))
        if powers is None:
            powers = np.full(aoas.size, 1.0 / max(aoas.size, 1))
        s = np.sin(aoas)
        return cls(aoas, powers, (float(s.min()), float(s.max())))

    @property
    def n_rays(self):
        return self.aoas.size


@dataclass(frozen=True, eq=False)
class MpcSet:
    users: tuple
    antennas: int
    spacing: float = 0.5

    def __post_init__(self):
        if self.antennas < 2:
            raise InputError(f"need at least 2 antennas, got {self.antennas}")
        if not self.users:
            raise InputError("need at least one user")
        if self.spacing <= 0:
            raise InputError("antenna spacing must be positive")
        object.__setattr__(self, "users", tuple(self.users))

    @property
    def n_rays(self):
        return sum(u.n_rays for u in self.users)

    def ray_table(self):
        """Flattened (user index, aoa, gain variance, sqrt(M/U) scale) per ray."""
        owner, aoa, var, scale = [], [], [], []
        for n, u in enumerate(self.users):
            owner.append(np.full(u.n_rays, n))
            aoa.append(u.aoas)
            var.append(u.n_rays * u.powers)
            scale.append(np.full(u.n_rays, np.sqrt(self.antennas / u.n_rays)))
        return (np.concatenate(owner), np.concatenate(aoa),
                np.concatenate(var), np.concatenate(scale))


@dataclass(frozen=True)
class ChannelConfig:
    antennas: int = 64
    users: int = 2
    rays: int = 6
    spread_deg: float = 45.0
    sector_deg: float = 120.0
    spacing: float = 0.5
    power_profile: str = "equal"
    decay: float = 1.0

    def validate(self):
        if self.users < 1 or self.rays < 1:
            raise ConfigError("users and rays must be >= 1")
        if self.antennas < 2:
            raise ConfigError("antennas must be >= 2")
        if self.spread_deg < 0 or self.sector_deg < 0:
            raise ConfigError("spread and sector must be non-negative")
        if self.rays > 1 and self.spread_deg == 0:
            raise ConfigError("several rays need a positive angular spread")
        if self.sector_deg / 2 + self.spread_deg / 2 >= 90:
            raise ConfigError("sector plus spread must stay inside (-90, 90) degrees")
        if self.power_profile not in ("equal", "exponential"):
            raise ConfigError(f"unknown power profile {self.power_profile!r}")
        return self


@dataclass(frozen=True, eq=False)
class Ccm:
    matrix: np.ndarray
    kind: str
    sample_count: int = 0
    noise_variance: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"CCM must be square, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InputError("CCM has non-finite entries")
        if self.kind not in CCM_KINDS:
            raise InputError(f"unknown CCM kind {self.kind!r}")
        if self.noise_variance < 0:
            raise InputError("noise variance must be non-negative")
        scale = max(np.linalg.norm(a), 1e-300)
        if np.linalg.norm(a - a.conj().T) > 1e-10 * scale:
            raise InputError("CCM is not Hermitian")
        object.__setattr__(self, "matrix", hermitize(a))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def trace(self):
        return float(np.trace(self.matrix).real)


def steering(theta, M, spacing=0.5):
    """Unit-norm ULA response for arrival angle ``theta`` (radians)."""
    if M < 1:
        raise InputError("M must be >= 1")
    if abs(theta) >= np.pi / 2:
        raise InputError("theta must lie in (-pi/2, pi/2)")
    return steering_from_sine(np.sin(theta), M, spacing)


def array_positions(M):
    """Element indices m = s - (M - 1)/2, symmetric about the array centre."""
    return np.arange(M) - (M - 1) / 2.0


def steering_from_sine(sines, M, spacing=0.5):
    """Steering vectors for directional sines; a vector in, an M x n matrix out."""
    s = np.asarray(sines, dtype=float)
    m = array_positions(M)
    phase = -2j * np.pi * spacing * np.multiply.outer(m, s)
    return np.exp(phase) / np.sqrt(M)


def sample_geometry(cfg: ChannelConfig, rng) -> MpcSet:
    """Draw user mean AoAs over the sector and ray AoAs within each user's spread."""
    cfg.validate()
    half_sector = np.deg2rad(cfg.sector_deg) / 2
    half_spread = np.deg2rad(cfg.spread_deg) / 2
    users = []
    for _ in range(cfg.users):
        mean = rng.uniform(-half_sector, half_sector)
        if cfg.rays == 1 and cfg.spread_deg == 0:
            aoas = np.array([mean])
        else:
            aoas = mean + rng.uniform(-half_spread, half_spread, size=cfg.rays)
        if cfg.power_profile == "exponential":
            powers = np.exp(-cfg.decay * np.arange(cfg.rays))
        else:
            powers = np.ones(cfg.rays)
        lo = np.sin(mean - half_spread)
        hi = np.sin(mean + half_spread)
        users.append(UserGeometry(aoas, powers, (lo, hi)))
    return MpcSet(tuple(users), cfg.antennas, cfg.spacing)


def _ray_matrix(geo: MpcSet):
    owner, aoa, var, scale = geo.ray_table()
    alpha = steering_from_sine(np.sin(aoa), geo.antennas, geo.spacing)
    return owner, alpha, var, scale


def realize_channel(geo: MpcSet, rng) -> np.ndarray:
    """One M x A channel draw with fresh circular Gaussian ray gains."""
    owner, alpha, var, scale = _ray_matrix(geo)
    beta = np.sqrt(var / 2) * (rng.standard_normal(var.size)
                               + 1j * rng.standard_normal(var.size))
    H = np.zeros((geo.antennas, len(geo.users)), dtype=np.complex128)
    for n in range(len(geo.users)):
        sel = owner == n
        H[:, n] = alpha[:, sel] @ (scale[sel] * beta[sel])
    return H


def ensemble_ccm(geo: MpcSet) -> Ccm:
    """Sum over all rays of (M/U) * gamma * a a^H."""
    _, alpha, var, scale = _ray_matrix(geo)
    weights = scale ** 2 * var
    R = (alpha * weights) @ alpha.conj().T
    return Ccm(hermitize(R), "ensemble")


def noise_variance_for(snr_db):
    """Noise power for a per-antenna, per-user received SNR in dB."""
    if np.isinf(snr_db) and snr_db > 0:
        return 0.0
    return float(10.0 ** (-snr_db / 10.0))


def sample_ccm(geo: MpcSet, n_samples, snr_db, rng) -> Ccm:
    """Time/frequency averaged receive covariance (1/S) sum y y^H.

    Every sample draws independent ray gains, unit-modulus QPSK symbols and
    complex Gaussian noise, in that order.
    """
    n_samples = int(n_samples)
    if n_samples < 1:
        raise InputError("need at least one sample")
    owner, alpha, var, scale = _ray_matrix(geo)
    n_users = len(geo.users)
    g = (rng.standard_normal((var.size, n_samples))
         + 1j * rng.standard_normal((var.size, n_samples)))
    g *= (np.sqrt(var / 2) * scale)[:, None]
    sym = np.exp(0.5j * np.pi * (rng.integers(0, 4, size=(n_users, n_samples)) + 0.5))
    g *= sym[owner]
    noise = (rng.standard_normal((geo.antennas, n_samples))
             + 1j * rng.standard_normal((geo.antennas, n_samples)))
    sigma2 = noise_variance_for(snr_db)
    Y = alpha @ g + np.sqrt(sigma2 / 2) * noise
    R = (Y @ Y.conj().T) / n_samples
    return Ccm(hermitize(R), "sample", sample_count=n_samples, noise_variance=sigma2)


def psd_clamp(a):
    eig = herm_eig(a)
    lam = np.clip(eig.eigenvalues, 0.0, None)
    V = eig.eigenvectors
    return hermitize((V * lam) @ V.conj().T)


def signal_ccm_estimate(rt: Ccm) -> Ccm:
    """Subtract the recorded noise floor and clamp to the PSD cone."""
    if rt.kind != "sample":
        raise InputError(f"expected a sample CCM, got kind {rt.kind!r}")
    if rt.noise_variance == 0.0:
        return Ccm(rt.matrix.copy(), "signal-estimate", rt.sample_count, 0.0)
    shifted = rt.matrix - rt.noise_variance * np.eye(rt.dim)
    return Ccm(psd_clamp(shifted), "signal-estimate", rt.sample_count, rt.noise_variance)
