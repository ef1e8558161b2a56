"""DFT beamspace transform, beam selection and leakage analysis."""
from dataclasses import dataclass, replace

import numpy as np

from .channel import Ccm, steering_from_sine
from .errors import DimensionError, InputError

MAX_2D_BEAMS = 4096

# "centered": sin(theta_i) = (i - (M+1)/2) / (M d), i = 1..M, symmetric grid.
# "broadside": shifted by half a beam when M is even so that theta = 0 is a beam.
GRIDS = ("centered", "broadside")


@dataclass(frozen=True, eq=False)
class BeamspaceOperator:
    matrix: np.ndarray
    sines: np.ndarray = None
    selected: tuple = None

    @property
    def M(self):
        return self.matrix.shape[1]

    @property
    def n_beams(self):
        return self.matrix.shape[0] if self.selected is None else len(self.selected)

    def with_selection(self, indices):
        indices = tuple(int(i) for i in indices)
        if any(i < 0 or i >= self.matrix.shape[0] for i in indices):
            raise InputError("beam index out of range")
        return replace(self, selected=indices)

    def rows(self):
        """Transform restricted to the selected beams (all beams if none selected)."""
        if self.selected is None:
            return self.matrix
        return self.matrix[list(self.selected)]


def grid_sines(M, spacing=0.5, grid="centered"):
    if grid not in GRIDS:
        raise InputError(f"unknown grid {grid!r}")
    i = np.arange(1, M + 1)
    offset = (M + 1) / 2.0 if grid == "centered" else float(M // 2 + 1)
    return (i - offset) / (spacing * M)


def dft_operator(M, spacing=0.5, grid="centered") -> BeamspaceOperator:
    """Rows are conjugated steering vectors at the DFT grid directions."""
    if M < 2:
        raise InputError("M must be >= 2")
    s = grid_sines(M, spacing, grid)
    A = steering_from_sine(s, M, spacing).conj().T
    return BeamspaceOperator(A, s)


def two_dim_operator(rows_op, cols_op, max_beams=MAX_2D_BEAMS) -> BeamspaceOperator:
    n = rows_op.matrix.shape[0] * cols_op.matrix.shape[0]
    if n > max_beams:
        raise DimensionError(f"2-D operator with {n} beams exceeds the limit {max_beams}")
    return BeamspaceOperator(np.kron(rows_op.matrix, cols_op.matrix))


def beamspace_ccm(op: BeamspaceOperator, R: Ccm) -> Ccm:
    """A R A^H, restricted to the operator's beam selection if it has one."""
    if R.dim != op.M:
        raise DimensionError(f"operator acts on {op.M} antennas, CCM has dimension {R.dim}")
    A = op.rows()
    out = A @ R.matrix @ A.conj().T
    return Ccm(0.5 * (out + out.conj().T), R.kind, R.sample_count, R.noise_variance,
               dict(R.meta, beams=op.selected))


def select_beams(R_bs: Ccm, L):
    """Indices of the L strongest beams by diagonal power, strongest first."""
    n = R_bs.dim
    if not 1 <= L <= n:
        raise InputError(f"L must be in [1, {n}], got {L}")
    power = np.diag(R_bs.matrix).real
    order = np.lexsort((np.arange(n), -power))
    return [int(i) for i in order[:L]]


def submatrix(R: Ccm, indices) -> Ccm:
    idx = np.asarray(indices)
    return Ccm(R.matrix[np.ix_(idx, idx)], R.kind, R.sample_count, R.noise_variance,
               dict(R.meta, beams=tuple(int(i) for i in idx)))


def leakage_profile(theta, M, spacing=0.5, grid="centered"):
    """Fraction of a single ray's power landing in each DFT beam."""
    if abs(theta) >= np.pi / 2:
        raise InputError("theta must lie in (-pi/2, pi/2)")
    op = dft_operator(M, spacing, grid)
    a = steering_from_sine(np.sin(theta), M, spacing)
    power = np.abs(op.matrix @ a) ** 2
    return power / power.sum()


def union_measure(intervals):
    """Lebesgue measure of a union of closed intervals (endpoints in any order)."""
    spans = sorted((min(a, b), max(a, b)) for a, b in intervals)
    total = 0.0
    cur_lo = cur_hi = None
    for lo, hi in spans:
        if lo < -1 - 1e-12 or hi > 1 + 1e-12:
            raise InputError("directional-sine intervals must lie in [-1, 1]")
        if cur_hi is None or lo > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = lo, hi
        else:
            cur_hi = max(cur_hi, hi)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def estimate_beam_count(spreads, M):
    """Large-array count of non-zero beams for half-wavelength spacing: (M/2)|union|."""
    return M / 2.0 * union_measure(spreads)


def beams_for_power(R_bs: Ccm, fraction=0.99):
    """Smallest number of beams whose diagonal power reaches ``fraction`` of the trace."""
    power = np.sort(np.diag(R_bs.matrix).real)[::-1]
    cum = np.cumsum(power)
    return int(np.searchsorted(cum, fraction * cum[-1]) + 1)
