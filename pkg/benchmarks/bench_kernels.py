"""Compare the numba-compiled kernels with the pure-numpy fallback.

Each workload runs in a fresh interpreter, once with JIT enabled and once with
BEAMCOMB_DISABLE_JIT=1, so the two paths never share compiled state. Compile
time is excluded by a warm-up call.

    python3 benchmarks/bench_kernels.py [--repeat N] [--json]
"""
import argparse
import json
import os
import subprocess
import sys
import time


def _workloads():
    import numpy as np

    from beamcomb import PhaseAlphabet, SecularProblem, bb_bc, herm_eig, sg_bc, solve_secular
    from beamcomb.harness.config import ExperimentConfig
    from beamcomb.harness.experiment import selected_ccm, trial_seed

    rng = np.random.default_rng(7)
    mats = []
    for _ in range(50):
        X = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        mats.append(X @ X.conj().T)
    secular = [SecularProblem(rng.normal(size=6) * 3, rng.exponential(size=6) + 1e-6,
                              rng.uniform(0.2, 5), rng.exponential() * 3) for _ in range(500)]
    cfg = ExperimentConfig(beams=12, snr_db=(20.0,))
    ccms = [selected_ccm(cfg, trial_seed(0, t), 20.0)[0].matrix for t in range(3)]
    alpha = PhaseAlphabet(2)
    return {
        "herm_eig 16x16 (x50)": lambda: [herm_eig(a) for a in mats],
        "solve_secular n=6 (x500)": lambda: [solve_secular(p) for p in secular],
        "bb_bc L=12 B=2 K=1 (x3)": lambda: [bb_bc(R, 1, alpha) for R in ccms],
        "sg_bc L=12 B=2 K=4 (x3)": lambda: [sg_bc(R, 4, alpha) for R in ccms],
    }


def _child(repeat):
    from beamcomb import JIT_ENABLED
    out = {"jit": JIT_ENABLED, "timings": {}}
    for name, fn in _workloads().items():
        fn()  # warm-up, includes compilation on the jit path
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out["timings"][name] = best
    print(json.dumps(out))


def _run(disable, repeat):
    env = dict(os.environ)
    env.pop("BEAMCOMB_DISABLE_JIT", None)
    if disable:
        env["BEAMCOMB_DISABLE_JIT"] = "1"
    proc = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(repeat)],
                          env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.child:
        _child(args.repeat)
        return 0
    jit = _run(False, args.repeat)
    py = _run(True, args.repeat)
    if not jit["jit"]:
        print("warning: numba unavailable, both columns use the fallback", file=sys.stderr)
    rows = [(name, jit["timings"][name], py["timings"][name]) for name in jit["timings"]]
    if args.json:
        print(json.dumps([{"workload": n, "jit_s": a, "numpy_s": b} for n, a, b in rows]))
        return 0
    width = max(len(n) for n, _, _ in rows)
    print(f"{'workload':<{width}}  {'jit [s]':>10}  {'numpy [s]':>10}  {'speedup':>8}")
    for name, a, b in rows:
        print(f"{name:<{width}}  {a:10.4f}  {b:10.4f}  {b / a:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
