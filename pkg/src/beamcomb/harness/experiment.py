"""Seeded Monte Carlo runs of the compression-efficiency pipeline."""
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ..beamspace import beamspace_ccm, dft_operator, select_beams, submatrix
from ..channel import Ccm, sample_ccm, sample_geometry, signal_ccm_estimate
from ..combiner import PhaseAlphabet, efficiency, optimal_unconstrained
from ..errors import BeamcombError
from .. import solvers
from .config import ExperimentConfig


@dataclass
class TrialRecord:
    trial: int
    seed: int
    scheme: str
    M: int
    L: int
    K: int
    B: int
    snr_db: float
    eta: float
    eta_opt: float
    nodes: int
    ms: float
    certified: bool = True
    error: str = ""

    def as_dict(self):
        return asdict(self)


def trial_seed(master, trial):
    """64-bit per-trial seed derived from (master, trial)."""
    ss = np.random.SeedSequence([int(master), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _streams(seed):
    geo_ss, sample_ss = np.random.SeedSequence(seed).spawn(2)
    return geo_ss, sample_ss


def selected_ccm(cfg: ExperimentConfig, seed, snr_db):
    """(selected-beam CCM, antenna-domain signal power) for one trial and SNR."""
    geo_ss, sample_ss = _streams(seed)
    geo = sample_geometry(cfg.channel(), np.random.Generator(np.random.Philox(geo_ss)))
    # same stream at every SNR: common random numbers across the sweep
    rng = np.random.Generator(np.random.Philox(sample_ss))
    rs = signal_ccm_estimate(sample_ccm(geo, cfg.samples, snr_db, rng))
    op = dft_operator(cfg.antennas, grid=cfg.grid)
    r_bs = beamspace_ccm(op, rs)
    sel = select_beams(r_bs, cfg.beams)
    return submatrix(r_bs, sel), rs.trace


def _discrete(scheme, R, k_max, alphabet, cfg):
    if scheme == "sgbc":
        return solvers.sg_bc(R, k_max, alphabet)
    if scheme == "bbbc":
        return solvers.bb_bc(R, k_max, alphabet, epsilon=cfg.epsilon, budget=cfg.node_budget,
                             approx_bound=cfg.approx_bound)
    return solvers.exhaustive(R, k_max, alphabet)


def _eta_opt(R_sel, total, K):
    F, _ = optimal_unconstrained(Ccm(R_sel.matrix, "signal-estimate"), K)
    return efficiency(F.conj().T, R_sel, total)


def run_trial(cfg: ExperimentConfig, trial):
    seed = trial_seed(cfg.seed, trial)
    ks = sorted(set(cfg.rf_chains))
    k_order = list(cfg.rf_chains)
    out = []
    per_snr = []
    for snr in cfg.snr_db:
        R_sel, total = selected_ccm(cfg, seed, snr)
        eta_opt = {}
        for K in ks:
            try:
                eta_opt[K] = _eta_opt(R_sel, total, K) if total > 0 else math.nan
            except BeamcombError:
                eta_opt[K] = math.nan
        per_snr.append((snr, R_sel, total, eta_opt))

    def rec(scheme, snr, K, B, eta, eta_opt, nodes=0, ms=0.0, certified=True, error=""):
        return TrialRecord(trial, seed, scheme, cfg.antennas, cfg.beams, K, B, float(snr),
                           float(eta), float(eta_opt), int(nodes), float(ms), certified, error)

    for scheme in sorted(cfg.scheme):
        for snr, R_sel, total, eta_opt in per_snr:
            if scheme in ("none", "optimal"):
                for K in k_order:
                    try:
                        if not total > 0:
                            raise BeamcombError("zero signal power")
                        if scheme == "none":
                            # strongest-first selection, so the top K beams lead
                            eta = float(np.trace(R_sel.matrix[:K, :K]).real / total)
                        else:
                            eta = eta_opt[K]
                        out.append(rec(scheme, snr, K, 0, eta, eta_opt[K]))
                    except BeamcombError as exc:
                        out.append(rec(scheme, snr, K, 0, math.nan, eta_opt[K], error=str(exc)))
                continue
            for B in cfg.bits:
                try:
                    if not total > 0:
                        raise BeamcombError("zero signal power")
                    comb, report = _discrete(scheme, R_sel, ks[-1], PhaseAlphabet(B), cfg)
                except BeamcombError as exc:
                    out.extend(rec(scheme, snr, K, B, math.nan, eta_opt[K], error=str(exc))
                               for K in k_order)
                    continue
                for K in k_order:
                    cols = report.columns[:K]
                    nodes = sum(c.nodes_expanded for c in cols)
                    ms = 1e3 * sum(c.wall_time for c in cols) if cfg.timing else 0.0
                    certified = all(c.certified for c in cols)
                    try:
                        eta = efficiency(comb.columns(K), R_sel, total)
                        out.append(rec(scheme, snr, K, B, eta, eta_opt[K], nodes, ms, certified))
                    except BeamcombError as exc:
                        out.append(rec(scheme, snr, K, B, math.nan, eta_opt[K], nodes, ms,
                                       certified, str(exc)))
    return out


def _run_trial_star(args):
    return run_trial(*args)


def run_experiment(cfg: ExperimentConfig, progress=None):
    """Records ordered by trial, then scheme name, then (snr, B, K) sweep order."""
    cfg.validate()
    jobs = [(cfg, t) for t in range(cfg.trials)]
    records = []
    if cfg.jobs > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for t, recs in enumerate(pool.map(_run_trial_star, jobs)):
                records.extend(recs)
                if progress:
                    progress(t)
    else:
        for t, job in enumerate(jobs):
            records.extend(_run_trial_star(job))
            if progress:
                progress(t)
    return records
