"""Compare the numba kernels with their pure-numpy twins.

Kernel timings call both modules directly in one process.  The end-to-end
timings run a GPQ coverage study and a gamma calibration bound in
subprocesses, with and without ``PREDINT_DISABLE_NUMBA``.

    python benchmarks/bench_kernels.py [--repeat 5] [--skip-e2e]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from predint._kernels import _numba, _numpy

E2E_SNIPPET = """
import time
from predint import dist
from predint.coverage import MethodConfig, estimate_coverage
from predint.fit import fit_ml
from predint.predict_core import calibration_bootstrap_bound
import numpy as np
# warm-up compiles the numba kernels outside the timed region
estimate_coverage(MethodConfig("gpq", {"B": 200}), dist.normal(), n=10, n_sim=100, rng=0, threads=1)
t0 = time.perf_counter()
estimate_coverage(MethodConfig("gpq", {"B": 2000}), dist.normal(), n=10, n_sim=200, rng=1, threads=1)
t1 = time.perf_counter()
fit = fit_ml("gamma", np.random.default_rng(2).gamma(2.0, 1.0, 20))
calibration_bootstrap_bound(None, fit, B=5000, rng=3, threads=1)
t2 = time.perf_counter()
print(f"{t1 - t0:.4f} {t2 - t1:.4f}")
"""


def workloads(rng):
    x_ls = rng.normal(size=(2000, 10))
    x_cens = np.sort(rng.gumbel(size=(2000, 20)), axis=1)
    s = rng.uniform(0.01, 2.0, 2000)
    A = rng.normal(0.0, 0.3, 2000)
    B = rng.uniform(0.7, 1.4, 2000)
    Ag = rng.uniform(1.5, 3.0, 2000)
    return {
        "ls_fit_rows normal 2000x10": lambda k: k.ls_fit_rows(x_ls, 10, 0),
        "ls_fit_rows sev censored 2000x20": lambda k: k.ls_fit_rows(x_cens, 14, 2),
        "gamma_shape 2000": lambda k: k.gamma_shape(s),
        "mixture_quantile normal B=2000": lambda k: k.mixture_quantile(0, 0.95, A, B, -5.0, 5.0, 1e-10),
        "mixture_quantile gamma B=2000": lambda k: k.mixture_quantile(3, 0.95, Ag, B, 0.1, 10.0, 1e-10),
        "mixture_cdf normal 200 points": lambda k: k.mixture_cdf(0, np.linspace(-3, 3, 200), A, B),
    }


def bench_kernels(repeat):
    rows = []
    for name, fn in workloads(np.random.default_rng(0)).items():
        fn(_numba)  # compile
        t_nb = min(timeit.repeat(lambda: fn(_numba), number=1, repeat=repeat))
        t_np = min(timeit.repeat(lambda: fn(_numpy), number=1, repeat=repeat))
        rows.append((name, t_nb, t_np))
    return rows


def bench_e2e():
    out = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, PREDINT_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", E2E_SNIPPET], env=env, check=True,
                             capture_output=True, text=True)
        out[label] = [float(v) for v in res.stdout.split()]
    return [("gpq coverage n_sim=200 B=2000", out["numba"][0], out["numpy"][0]),
            ("gamma calibration bound B=5000", out["numba"][1], out["numpy"][1])]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--skip-e2e", action="store_true")
    args = ap.parse_args(argv)
    rows = bench_kernels(args.repeat)
    if not args.skip_e2e:
        rows += bench_e2e()
    width = max(len(r[0]) for r in rows)
    print(f"{'workload':<{width}}  {'numba s':>10}  {'numpy s':>10}  {'speedup':>8}")
    for name, t_nb, t_np in rows:
        print(f"{name:<{width}}  {t_nb:10.5f}  {t_np:10.5f}  {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
