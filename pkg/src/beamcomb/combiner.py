"""Spatial compression efficiency and the continuous/discrete beam-combination maths."""
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .channel import Ccm
from .errors import (DegenerateCombinerError, DimensionError, InputError,
                     NotApplicableError, ZeroSignalError)
from .numerics import POLE_CLUSTER_TOL, HermEig, herm_eig

TOL_Q = 1e-10
RANK_TOL = 1e-10

CASE_NAMES = {
    _kernels.CASE_SECULAR: "secular",
    _kernels.CASE_ZERO: "degenerate-C1",
    _kernels.CASE_DOMINANT: "degenerate-C1",
}


class PhaseAlphabet:
    """The 2**bits unit-modulus phases exp(2j*pi*n / 2**bits)."""

    def __init__(self, bits):
        bits = int(bits)
        if bits < 1:
            raise InputError("phase resolution needs at least one bit")
        self.bits = bits
        n = 1 << bits
        self.elements = np.array([_unit(Fraction(k, n)) for k in range(n)])

    def __len__(self):
        return self.elements.size

    def __repr__(self):
        return f"PhaseAlphabet(bits={self.bits})"

    def __eq__(self, other):
        return isinstance(other, PhaseAlphabet) and other.bits == self.bits

    def __hash__(self):
        return hash(("PhaseAlphabet", self.bits))

    def take(self, indices):
        return self.elements[np.asarray(indices, dtype=np.int64)]


def _unit(frac):
    # exact values on the axes, cos/sin elsewhere
    quarter = frac * 4
    if quarter.denominator == 1:
        return (1 + 0j, 1j, -1 + 0j, -1j)[int(quarter) % 4]
    angle = 2 * np.pi * float(frac)
    return complex(np.cos(angle), np.sin(angle))


@dataclass(frozen=True, eq=False)
class CombinerMatrix:
    """L x K matrix whose columns are combination vectors over the alphabet."""

    indices: np.ndarray
    alphabet: PhaseAlphabet

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 2:
            raise DimensionError("indices must be an L x K array")
        if idx.shape[1] > idx.shape[0]:
            raise DimensionError(f"K={idx.shape[1]} exceeds L={idx.shape[0]}")
        if idx.size and (idx.min() < 0 or idx.max() >= len(self.alphabet)):
            raise InputError("alphabet index out of range")
        object.__setattr__(self, "indices", idx)

    @property
    def entries(self):
        return self.alphabet.take(self.indices)

    @property
    def L(self):
        return self.indices.shape[0]

    @property
    def K(self):
        return self.indices.shape[1]

    def columns(self, k):
        return CombinerMatrix(self.indices[:, :k], self.alphabet)


@dataclass(frozen=True, eq=False)
class SubproblemInstance:
    """Partitioned quadratic form for a fixed leading block d_I."""

    R: np.ndarray
    d_I: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=np.complex128)
        d_I = np.atleast_1d(np.asarray(self.d_I, dtype=np.complex128))
        if R.ndim != 2 or R.shape[0] != R.shape[1]:
            raise DimensionError("R must be square")
        if not 1 <= d_I.size <= R.shape[0]:
            raise DimensionError(f"d_I length {d_I.size} not in [1, {R.shape[0]}]")
        if not np.vdot(d_I, d_I).real > 0:
            raise InputError("d_I must be non-zero")
        object.__setattr__(self, "R", 0.5 * (R + R.conj().T))
        object.__setattr__(self, "d_I", d_I)

    @property
    def l(self):
        return self.d_I.size

    @property
    def R_I(self):
        return self.R[:self.l, :self.l]

    @property
    def R_J(self):
        return self.R[self.l:, self.l:]

    @property
    def R_JI(self):
        return self.R[self.l:, :self.l]

    @property
    def p(self):
        return self.R_JI @ self.d_I

    @property
    def r(self):
        return float(np.vdot(self.d_I, self.R_I @ self.d_I).real)

    @property
    def d(self):
        return float(np.vdot(self.d_I, self.d_I).real)

    def objective(self, w_J):
        x = np.concatenate([self.d_I, np.asarray(w_J, dtype=np.complex128)])
        return rayleigh(self.R, x)


@dataclass(frozen=True, eq=False)
class SubproblemSolution:
    lambda_star: float
    # finite optimiser for the secular case; for the degenerate case either
    # zeros or the dominant eigenvector of R_J (the optimiser is beta * u, beta -> inf)
    w_J: np.ndarray
    case: str
    marker: str = None


def rayleigh(R, x):
    x = np.asarray(x, dtype=np.complex128)
    return float(np.vdot(x, R @ x).real / np.vdot(x, x).real)


def orthonormal_basis(vectors, rank_tol=RANK_TOL):
    """Orthonormal basis of the column span; raises if the columns are dependent."""
    V = np.asarray(vectors, dtype=np.complex128)
    if V.ndim == 1:
        V = V[:, None]
    if V.shape[1] == 0:
        return V
    U, s, _ = np.linalg.svd(V, full_matrices=False)
    if s[0] == 0 or s[-1] <= rank_tol * s[0]:
        raise DegenerateCombinerError(
            f"combination vectors are linearly dependent (singular values {s.min():.3g} / {s.max():.3g})"
        )
    return U


def efficiency(combiner, R_bs, total_power) -> float:
    """Fraction of ``total_power`` kept by projecting onto the combiners' span.

    ``combiner`` is a CombinerMatrix or an array whose columns are the
    combination vectors. For orthonormal vectors this is the plain trace ratio.
    """
    if isinstance(combiner, CombinerMatrix):
        vectors = combiner.entries
    else:
        vectors = np.asarray(combiner)
    R = R_bs.matrix if isinstance(R_bs, Ccm) else np.asarray(R_bs)
    if not total_power > 0:
        raise InputError(f"total power must be positive, got {total_power}")
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if vectors.shape[0] != R.shape[0]:
        raise DimensionError(f"combiner length {vectors.shape[0]} != CCM dimension {R.shape[0]}")
    Q = orthonormal_basis(vectors)
    return float(np.trace(Q.conj().T @ R @ Q).real / total_power)


def optimal_unconstrained(R_bar: Ccm, n_streams):
    """Best orthonormal N_s-row combiner and its noise-corrected efficiency.

    Returns (F, eta): F holds the N_s dominant eigenvectors of R_bar as rows;
    eta = sum_{i<=N_s}(lam_i - s2) / sum_i(lam_i - s2), terms clamped at zero.
    """
    N = R_bar.dim
    if not 1 <= n_streams <= N:
        raise InputError(f"N_s must be in [1, {N}], got {n_streams}")
    eig = herm_eig(R_bar.matrix)
    excess = np.clip(eig.eigenvalues - R_bar.noise_variance, 0.0, None)
    total = excess.sum()
    if total <= 0:
        raise ZeroSignalError("no eigenvalue exceeds the noise floor")
    F = eig.eigenvectors[:, :n_streams].conj().T
    return F, float(excess[:n_streams].sum() / total)


def solve_subproblem(inst: SubproblemInstance, eig: HermEig = None) -> SubproblemSolution:
    """Closed-form max over w_J of the Rayleigh quotient of [d_I; w_J].

    ``eig`` may carry a precomputed eigendecomposition of R_J.
    """
    if inst.l == inst.R.shape[0]:
        return SubproblemSolution(inst.r / inst.d, np.zeros(0, dtype=np.complex128), "secular")
    if eig is None:
        eig = herm_eig(inst.R_J)
    lam_star, case, w, _ = _kernels.subproblem_core(
        eig.eigenvalues, eig.eigenvectors, np.ascontiguousarray(inst.p),
        inst.r, inst.d, TOL_Q, POLE_CLUSTER_TOL,
    )
    marker = {_kernels.CASE_ZERO: "zero", _kernels.CASE_DOMINANT: "dominant-ray"}.get(case)
    return SubproblemSolution(float(lam_star), w, CASE_NAMES[case], marker)


def round_to_alphabet(w, alphabet: PhaseAlphabet):
    """Entry-wise nearest alphabet element by phase; zero entries map to element 0."""
    w = np.atleast_1d(np.asarray(w, dtype=np.complex128))
    return alphabet.take(_kernels.round_indices(w, len(alphabet)))


def approx_discrete_bound(sol: SubproblemSolution, inst: SubproblemInstance,
                          alphabet: PhaseAlphabet) -> float:
    """Rate-distortion estimate of the best value after quantising w_J to the alphabet."""
    if sol.case != "secular":
        raise NotApplicableError("approximation needs a finite (secular-case) optimiser")
    w = sol.w_J
    n_free = w.size
    if n_free == 0:
        return inst.r / inst.d
    R_J, p = inst.R_J, inst.p
    ww = np.vdot(w, w).real
    sigma_e2 = 2.0 ** (-alphabet.bits) * ww
    num = (inst.r + np.vdot(w, R_J @ w).real + 2 * np.vdot(p, w).real
           + sigma_e2 * np.trace(R_J).real / n_free)
    den = inst.d + ww + sigma_e2
    return float(num / den)
