"""Dense Hermitian linear algebra and the secular-equation root finder."""
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionError, InputError, NoRootError

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
POLE_CLUSTER_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class HermEig:
    """Eigenpairs of a Hermitian matrix, eigenvalues non-increasing."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0


@dataclass(frozen=True, eq=False)
class SecularProblem:
    """f(lam) = lam*d - r - sum_i weights_i / (lam - poles_i)."""

    poles: np.ndarray
    weights: np.ndarray
    d: float
    r: float

    def __post_init__(self):
        poles = np.asarray(self.poles, dtype=float).ravel()
        weights = np.asarray(self.weights, dtype=float).ravel()
        if poles.size == 0:
            raise InputError("secular problem needs at least one pole")
        if poles.shape != weights.shape:
            raise DimensionError(f"{poles.size} poles but {weights.size} weights")
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise InputError("weights must be finite and non-negative")
        if not np.all(np.isfinite(poles)):
            raise InputError("poles must be finite")
        if not self.d > 0:
            raise InputError(f"d must be positive, got {self.d}")
        if not self.r >= 0:
            raise InputError(f"r must be non-negative, got {self.r}")
        order = np.argsort(-poles, kind="stable")
        object.__setattr__(self, "poles", poles[order])
        object.__setattr__(self, "weights", weights[order])
        object.__setattr__(self, "d", float(self.d))
        object.__setattr__(self, "r", float(self.r))

    def f(self, lam):
        return lam * self.d - self.r - np.sum(self.weights / (lam - self.poles))

    def f_shifted(self, mu):
        """f at lam = poles[0] + mu, evaluated without forming lam - poles[0]."""
        lam1 = self.poles[0]
        gaps = lam1 - self.poles
        return (lam1 + mu) * self.d - self.r - np.sum(self.weights / (mu + gaps))

    def upper_bound(self):
        """Right end of the interval that must contain the root."""
        lam1, d, r = self.poles[0], self.d, self.r
        disc = (d * lam1 - r) ** 2 + 4.0 * d * self.weights.sum()
        return (d * lam1 + r + np.sqrt(disc)) / (2.0 * d)


def as_complex_matrix(a, name="matrix"):
    a = np.asarray(a)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    a = a.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(a)):
        raise InputError(f"{name} has non-finite entries")
    return a


def hermitize(a):
    return 0.5 * (a + a.conj().T)


def fix_phase(vecs, tiny=1e-12):
    """Rotate every column so that its first non-negligible entry is real positive."""
    if vecs.size == 0:
        return vecs.copy()
    mask = np.abs(vecs) > tiny
    first = np.argmax(mask, axis=0)
    cols = np.arange(vecs.shape[1])
    z = vecs[first, cols]
    rot = np.ones(vecs.shape[1], dtype=np.complex128)
    nz = mask[first, cols]
    rot[nz] = np.abs(z[nz]) / z[nz]
    out = vecs * rot
    out[first[nz], cols[nz]] = np.abs(z[nz])
    return out


def herm_eig(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    The input is symmetrised as (A + A^H)/2 before rotating. Eigenvalues come
    back sorted non-increasing; each eigenvector is scaled so its first
    non-negligible entry is real and positive, which makes the output
    reproducible across platforms.
    """
    a = as_complex_matrix(a, "A")
    n, m = a.shape
    if n != m:
        raise DimensionError(f"A must be square, got {a.shape}")
    if n == 0:
        return HermEig(np.zeros(0), np.zeros((0, 0), dtype=np.complex128))
    w, v, sweeps = _kernels.jacobi_hermitian(hermitize(a), tol, max_sweeps)
    order = np.argsort(-w, kind="stable")
    return HermEig(w[order], fix_phase(v[:, order]), int(sweeps))


def solve_secular(prob: SecularProblem) -> float:
    """Unique root of the secular function above the largest pole.

    Poles within ``POLE_CLUSTER_TOL`` (relative) of the largest one are
    merged into a single pole carrying their summed weight.

    Raises NoRootError when f does not change sign on the bracketing
    interval, which happens when the dominant weight vanishes and no root
    exists above the largest pole.
    """
    lam1, mu = solve_secular_shifted(prob)
    return float(lam1 + mu)


def solve_secular_shifted(prob: SecularProblem):
    """The root as a pair (largest pole, offset above it).

    Roots very close to the pole are not representable to the residual
    tolerance as a single double; the pair keeps the offset at full
    relative precision. See ``SecularProblem.f_shifted``.
    """
    lam = prob.poles
    lam1 = lam[0]
    ctol = POLE_CLUSTER_TOL * (1.0 + abs(lam1))
    gaps = np.where(lam >= lam1 - ctol, 0.0, lam1 - lam)
    mu_lo = 1e-12 * abs(lam1) + 1e-300
    mu_hi = max(prob.upper_bound() - lam1, mu_lo)
    mu, status = _kernels.secular_root(
        lam1, gaps, prob.weights, prob.d, prob.r, mu_lo, mu_hi
    )
    if status != _kernels.SECULAR_OK:
        raise NoRootError(
            f"secular function has no root in ({lam1}, {prob.upper_bound()}]"
        )
    return float(lam1), float(mu)
