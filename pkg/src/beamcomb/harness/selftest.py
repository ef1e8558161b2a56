"""Embedded invariant checks used as a release gate (``beamcomb selftest``)."""
import time
from dataclasses import dataclass

import numpy as np

from ..channel import Ccm
from ..combiner import (PhaseAlphabet, SubproblemInstance, efficiency, optimal_unconstrained,
                        solve_subproblem)
from ..numerics import SecularProblem, herm_eig, solve_secular_shifted
from .. import solvers

DEFAULT_TOLERANCES = {
    "eigen-reconstruction": 1e-10,
    "secular-residual": 1e-10,
    "subproblem-grid-oracle": 1e-9,
    "subproblem-self-consistency": 1e-8,
    "bb-vs-exhaustive": 1e-12,
    "efficiency-eigen-ratio": 1e-9,
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    seconds: float

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: worst={self.worst:.3e} tol={self.tolerance:.1e} ({self.seconds:.2f}s)"


def _random_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    X = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return X @ X.conj().T


def _eigen_reconstruction(rng):
    worst = 0.0
    for _ in range(30):
        n = int(rng.integers(1, 13))
        A = _random_psd(rng, n) - 2.0 * np.eye(n)
        e = herm_eig(A)
        V = e.eigenvectors
        rec = (V * e.eigenvalues) @ V.conj().T
        worst = max(worst, np.linalg.norm(rec - A) / np.linalg.norm(A))
    return worst


def _secular_residual(rng):
    worst = 0.0
    for _ in range(2000):
        n = int(rng.integers(1, 7))
        poles = rng.normal(size=n) * 3
        weights = rng.exponential(size=n) + 1e-6
        d = rng.uniform(0.2, 5.0)
        r = rng.exponential() * 3
        prob = SecularProblem(poles, weights, d, r)
        lam1, mu = solve_secular_shifted(prob)
        lam = lam1 + mu
        res = abs(prob.f_shifted(mu)) / max(1.0, d * abs(lam))
        if not (mu > 0 and lam <= prob.upper_bound() * (1 + 1e-12) + 1e-12):
            res = np.inf
        worst = max(worst, res)
    return worst


def _grid_oracle(rng, self_tol_out):
    """3-dim CCM, scalar d_I: lambda* must dominate a grid over the two free entries."""
    worst = 0.0
    worst_self = 0.0
    mags = np.concatenate([np.linspace(0, 4, 17), [10.0, 1e3, 1e6]])
    phases = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    grid = [a * np.exp(1j * p) for a in mags for p in phases]
    G = np.array(grid)
    W1, W2 = np.meshgrid(G, G, indexing="ij")
    W = np.stack([W1.ravel(), W2.ravel()], axis=1)
    for _ in range(20):
        R = _random_psd(rng, 3, rank=int(rng.integers(1, 4)))
        inst = SubproblemInstance(R, np.exp(1j * rng.uniform(0, 2 * np.pi, 1)))
        sol = solve_subproblem(inst)
        X = np.concatenate([np.broadcast_to(inst.d_I, (W.shape[0], 1)), W], axis=1)
        num = np.einsum("ni,ij,nj->n", X.conj(), inst.R, X).real
        den = np.einsum("ni,ni->n", X.conj(), X).real
        worst = max(worst, float(np.max(num / den - sol.lambda_star)))
        if sol.case == "secular":
            eta = inst.objective(sol.w_J)
            worst_self = max(worst_self, abs(eta - sol.lambda_star) / max(abs(sol.lambda_star), 1e-300))
    self_tol_out.append(worst_self)
    return max(worst, 0.0)


def _bb_vs_exhaustive(rng):
    worst = 0.0
    for L, bits, n in ((5, 1, 6), (5, 2, 4), (6, 1, 4)):
        alphabet = PhaseAlphabet(bits)
        for _ in range(n):
            R = _random_psd(rng, L, rank=int(rng.integers(1, L + 1)))
            bb, _ = solvers.bb_bc(R, 2, alphabet)
            ex, _ = solvers.exhaustive(R, 2, alphabet)
            a = solvers.column_values(R, bb)
            b = solvers.column_values(R, ex)
            scale = max(abs(b[0]), 1.0)
            worst = max(worst, max(abs(x - y) for x, y in zip(a, b)) / scale)
    return worst


def _efficiency_ratio(rng):
    worst = 0.0
    for _ in range(20):
        n = 8
        R = Ccm(_random_psd(rng, n), "signal-estimate")
        for ns in (1, 3, 8):
            F, eta = optimal_unconstrained(R, ns)
            worst = max(worst, abs(efficiency(F.conj().T, R, R.trace) - eta))
    return worst


def run_selftest(tolerances=None, seed=20240607, out=print):
    """Run every check; returns (all_passed, [CheckResult])."""
    tol = dict(DEFAULT_TOLERANCES)
    unknown = set(tolerances or {}) - set(tol)
    if unknown:
        raise KeyError(f"unknown check(s): {sorted(unknown)}")
    tol.update(tolerances or {})
    results = []

    def record(name, worst, seconds):
        res = CheckResult(name, bool(worst <= tol[name]), float(worst), tol[name], seconds)
        results.append(res)
        if out:
            out(res.line())

    for name, fn in (("eigen-reconstruction", _eigen_reconstruction),
                     ("secular-residual", _secular_residual)):
        t0 = time.perf_counter()
        record(name, fn(np.random.default_rng([seed, len(results)])), time.perf_counter() - t0)

    t0 = time.perf_counter()
    self_worst = []
    grid_worst = _grid_oracle(np.random.default_rng([seed, 2]), self_worst)
    dt = time.perf_counter() - t0
    record("subproblem-grid-oracle", grid_worst, dt)
    record("subproblem-self-consistency", self_worst[0], dt)

    for name, fn, k in (("bb-vs-exhaustive", _bb_vs_exhaustive, 3),
                        ("efficiency-eigen-ratio", _efficiency_ratio, 4)):
        t0 = time.perf_counter()
        record(name, fn(np.random.default_rng([seed, k])), time.perf_counter() - t0)
    return all(r.passed for r in results), results
