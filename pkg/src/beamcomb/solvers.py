"""Column-sequential discrete beam combination: branch-and-bound, greedy, exhaustive.

Every solver designs one combination vector at a time over the phase
alphabet, fixing the first entry to alphabet element 0 (the objective is
invariant to a global phase), and deflates the working CCM before the next
column.
"""
import heapq
import time
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .channel import Ccm
from .combiner import (TOL_Q, CombinerMatrix, PhaseAlphabet, SubproblemInstance,
                       approx_discrete_bound, efficiency, solve_subproblem)
from .errors import DimensionError, InputError, SearchSpaceError
from .numerics import POLE_CLUSTER_TOL, HermEig, herm_eig, hermitize

DEFAULT_NODE_BUDGET = 1_000_000
MAX_EXHAUSTIVE_BITS = 24
TIE_TOL = 1e-12


@dataclass
class ColumnReport:
    trajectory: list = field(default_factory=list)
    nodes_expanded: int = 0
    nodes_pruned: int = 0
    wall_time: float = 0.0
    epsilon_used: float = 0.0
    exit_reason: str = "exhausted"
    certified: bool = True
    frontier_max: float = float("-inf")
    # ||R_b w|| / ||R_b||_F for each earlier column after this column's deflation
    deflation_residual: float = 0.0
    value: float = 0.0
    pruned_log: list = None


@dataclass
class SolverReport:
    columns: list = field(default_factory=list)
    efficiency: float = float("nan")

    @property
    def nodes_expanded(self):
        return sum(c.nodes_expanded for c in self.columns)

    @property
    def certified(self):
        return all(c.certified for c in self.columns)

    @property
    def wall_time(self):
        return sum(c.wall_time for c in self.columns)


def _matrix(R):
    a = R.matrix if isinstance(R, Ccm) else np.asarray(R, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"CCM must be square, got {a.shape}")
    return np.ascontiguousarray(hermitize(a.astype(np.complex128)))


def _check_k(K, L):
    if not 1 <= K <= L:
        raise InputError(f"K must be in [1, L={L}], got {K}")


def deflate(R_b, vectors):
    """(I - A A^H / L)^H R_b (I - A A^H / L) with A the combination vectors so far."""
    R = R_b.matrix if isinstance(R_b, Ccm) else np.asarray(R_b, dtype=np.complex128)
    A = vectors.entries if isinstance(vectors, CombinerMatrix) else np.asarray(vectors)
    if A.ndim == 1:
        A = A[:, None]
    L = R.shape[0]
    if A.size == 0:
        out = R.copy()
    else:
        if A.shape[0] != L:
            raise DimensionError(f"vectors of length {A.shape[0]} for a {L}x{L} CCM")
        P = np.eye(L) - (A @ A.conj().T) / L
        out = hermitize(P.conj().T @ R @ P)
    if isinstance(R_b, Ccm):
        return Ccm(out, R_b.kind, R_b.sample_count, R_b.noise_variance, R_b.meta)
    return out


class _TrailingEigs:
    """Eigenpairs of R[l:, l:] for every l, computed on first use."""

    def __init__(self, R):
        self.R = R
        self._cache = {}

    def __getitem__(self, l):
        if l not in self._cache:
            e = herm_eig(self.R[l:, l:])
            self._cache[l] = (e.eigenvalues, np.ascontiguousarray(e.eigenvectors))
        return self._cache[l]


def _phase_normalise(idx, n_alpha):
    return (idx - idx[0]) % n_alpha


_EXIT_NAMES = {_kernels.EXIT_EXHAUSTED: "exhausted", _kernels.EXIT_EPSILON: "epsilon",
               _kernels.EXIT_BUDGET: "budget"}


def _packed_eigs(R):
    L = R.shape[0]
    lam_all = np.zeros((L + 1, L))
    vecs_all = np.zeros((L + 1, L, L), dtype=np.complex128)
    sizes = np.arange(L, -1, -1, dtype=np.int64)
    eigs = _TrailingEigs(R)
    for l in range(1, L):
        lam, vecs = eigs[l]
        lam_all[l, :L - l] = lam
        vecs_all[l, :L - l, :L - l] = vecs
    return lam_all, vecs_all, sizes


def _bb_column_compiled(R, alphabet, epsilon, budget):
    L = R.shape[0]
    elems = alphabet.elements
    n_alpha = len(alphabet)
    rep = ColumnReport(epsilon_used=epsilon)
    t0 = time.perf_counter()
    u1 = herm_eig(R).eigenvectors[:, 0]
    init = _phase_normalise(_kernels.round_indices(u1, n_alpha), n_alpha)
    init_val = _kernels.rayleigh_indices(R, init, elems)
    if L == 1:
        rep.trajectory.append(init_val)
        rep.value = init_val
        rep.wall_time = time.perf_counter() - t0
        return init, rep
    lam_all, vecs_all, sizes = _packed_eigs(R)
    idx, best, expanded, pruned, code, frontier, traj = _kernels.bb_search(
        R, elems, lam_all, vecs_all, sizes, init, init_val, epsilon, budget,
        TOL_Q, POLE_CLUSTER_TOL)
    rep.trajectory = [float(v) for v in traj]
    rep.nodes_expanded = int(expanded)
    rep.nodes_pruned = int(pruned)
    rep.exit_reason = _EXIT_NAMES[int(code)]
    rep.frontier_max = float(frontier)
    rep.certified = code != _kernels.EXIT_BUDGET
    rep.value = float(best)
    rep.wall_time = time.perf_counter() - t0
    return idx, rep


def _bb_column(R, alphabet, epsilon, budget, approx_bound, trace_pruned):
    if not (approx_bound or trace_pruned):
        return _bb_column_compiled(R, alphabet, epsilon, budget)
    L = R.shape[0]
    elems = alphabet.elements
    n_alpha = len(alphabet)
    rep = ColumnReport(epsilon_used=epsilon, pruned_log=[] if trace_pruned else None)
    t0 = time.perf_counter()

    u1 = herm_eig(R).eigenvectors[:, 0]
    best_idx = _phase_normalise(_kernels.round_indices(u1, n_alpha), n_alpha)
    best = _kernels.rayleigh_indices(R, best_idx, elems)
    rep.trajectory.append(best)
    if L == 1:
        rep.value = best
        rep.wall_time = time.perf_counter() - t0
        return best_idx, rep

    eigs = _TrailingEigs(R)
    root = np.zeros(L, dtype=np.int64)
    lam, vecs = eigs[1]
    bound, _, cand, val = _kernels.evaluate_prefix(R, root, 1, elems, lam, vecs,
                                                   TOL_Q, POLE_CLUSTER_TOL)
    if val > best:
        best, best_idx = val, cand
        rep.trajectory.append(best)
    if approx_bound:
        bound = min(bound, _approx_bound(R, root, 1, alphabet, eigs))
    heap = [(-bound, 0, 1, root)]
    counter = 1

    def prune(prefix, l, b):
        rep.nodes_pruned += 1
        if rep.pruned_log is not None:
            rep.pruned_log.append((prefix[:l].copy(), b, best))

    while heap:
        neg_b, _, l, prefix = heap[0]
        b = -neg_b
        if b <= best:
            for nb, _, pl, pp in heap:
                prune(pp, pl, -nb)
            heap.clear()
            break
        if b - best < epsilon * best:
            rep.exit_reason = "epsilon"
            rep.frontier_max = b
            break
        if rep.nodes_expanded >= budget:
            rep.exit_reason = "budget"
            rep.frontier_max = b
            rep.certified = False
            break
        heapq.heappop(heap)
        rep.nodes_expanded += 1
        lam, vecs = eigs[l + 1] if l + 1 < L else (np.zeros(0), np.zeros((0, 0), np.complex128))
        bounds, values, cands = _kernels.expand_children(R, prefix, l, elems, lam, vecs,
                                                         TOL_Q, POLE_CLUSTER_TOL)
        for i in range(n_alpha):
            child = prefix.copy()
            child[l] = i
            if l + 1 == L:
                if bounds[i] > best:
                    best, best_idx = bounds[i], child
                    rep.trajectory.append(best)
                continue
            cb = bounds[i]
            if approx_bound:
                cb = min(cb, _approx_bound(R, child, l + 1, alphabet, eigs))
            if cb > best:
                heapq.heappush(heap, (-cb, counter, l + 1, child))
                counter += 1
                if values[i] > best:
                    best, best_idx = values[i], cands[i]
                    rep.trajectory.append(best)
            else:
                prune(child, l + 1, cb)

    if approx_bound:
        rep.certified = False
    rep.value = best
    rep.wall_time = time.perf_counter() - t0
    return best_idx, rep


def _approx_bound(R, idx, l, alphabet, eigs):
    inst = SubproblemInstance(R, alphabet.elements[idx[:l]])
    lam, vecs = eigs[l]
    sol = solve_subproblem(inst, HermEig(lam, vecs))
    if sol.case != "secular":
        return np.inf
    return approx_discrete_bound(sol, inst, alphabet)


def _run_columns(R, K, alphabet, column_fn):
    R = _matrix(R)
    L = R.shape[0]
    _check_k(K, L)
    R_b = R.copy()
    chosen = []
    report = SolverReport()
    for _ in range(K):
        idx, rep = column_fn(R_b)
        chosen.append(np.asarray(idx, dtype=np.int64))
        A = alphabet.take(np.stack(chosen, axis=1))
        R_b = np.ascontiguousarray(deflate(R_b, A))
        scale = max(np.linalg.norm(R_b), np.linalg.norm(R), 1e-300)
        rep.deflation_residual = float(max(np.linalg.norm(R_b @ A[:, j]) for j in range(A.shape[1])) / scale)
        report.columns.append(rep)
    combiner = CombinerMatrix(np.stack(chosen, axis=1), alphabet)
    trace = np.trace(R).real
    if trace > 0:
        try:
            report.efficiency = efficiency(combiner, R, trace)
        except ValueError:
            report.efficiency = float("nan")
    return combiner, report


def bb_bc(R, K, alphabet: PhaseAlphabet, epsilon=0.0, budget=DEFAULT_NODE_BUDGET,
          approx_bound=False, trace_pruned=False):
    """Best-first branch-and-bound over the phase alphabet, one column at a time.

    Each node fixes a prefix of the combination vector; its bound is the
    closed-form continuous optimum over the free entries. A column stops when
    the frontier is exhausted, when every remaining bound is within a factor
    (1 + epsilon) of the incumbent, or when ``budget`` nodes were expanded
    (then the column is reported as not certified).
    """
    if epsilon < 0:
        raise InputError("epsilon must be non-negative")
    return _run_columns(
        R, K, alphabet,
        lambda R_b: _bb_column(R_b, alphabet, float(epsilon), int(budget), approx_bound, trace_pruned),
    )


def _argmax_first(values):
    top = values.max()
    return int(np.flatnonzero(values >= top - TIE_TOL * max(abs(top), 1.0))[0])


def _sg_column(R, alphabet):
    L = R.shape[0]
    elems = alphabet.elements
    rep = ColumnReport()
    t0 = time.perf_counter()
    eigs = _TrailingEigs(R)
    idx = np.zeros(L, dtype=np.int64)
    for l in range(1, L):
        lam, vecs = eigs[l + 1] if l + 1 < L else (np.zeros(0), np.zeros((0, 0), np.complex128))
        bounds, _, _ = _kernels.expand_children(R, idx, l, elems, lam, vecs, TOL_Q, POLE_CLUSTER_TOL)
        idx[l] = _argmax_first(bounds)
        rep.nodes_expanded += 1
    rep.value = _kernels.rayleigh_indices(R, idx, elems)
    rep.trajectory.append(rep.value)
    rep.wall_time = time.perf_counter() - t0
    return idx, rep


def sg_bc(R, K, alphabet: PhaseAlphabet):
    """Sequential greedy combination: each entry maximises the relaxation bound."""
    return _run_columns(R, K, alphabet, lambda R_b: _sg_column(R_b, alphabet))


def _exhaustive_column(R, alphabet):
    rep = ColumnReport()
    t0 = time.perf_counter()
    idx, val = _kernels.exhaustive_search(R, alphabet.elements)
    rep.nodes_expanded = len(alphabet) ** (R.shape[0] - 1)
    rep.value = float(val)
    rep.trajectory.append(rep.value)
    rep.wall_time = time.perf_counter() - t0
    return idx, rep


def exhaustive(R, K, alphabet: PhaseAlphabet, max_bits=MAX_EXHAUSTIVE_BITS):
    """Enumerate every vector per column (first entry fixed); the ground truth."""
    L = _matrix(R).shape[0]
    if alphabet.bits * (L - 1) > max_bits:
        raise SearchSpaceError(
            f"2^{alphabet.bits * (L - 1)} candidates exceed the limit 2^{max_bits}"
        )
    return _run_columns(R, K, alphabet, lambda R_b: _exhaustive_column(R_b, alphabet))


def column_values(R, combiner: CombinerMatrix):
    """Rayleigh quotient of every column on its own deflated CCM."""
    R_b = _matrix(R)
    out = []
    for k in range(combiner.K):
        w = combiner.entries[:, k]
        out.append(float(np.vdot(w, R_b @ w).real / np.vdot(w, w).real))
        R_b = deflate(R_b, combiner.entries[:, :k + 1])
    return out
