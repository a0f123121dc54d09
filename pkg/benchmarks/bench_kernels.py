"""Time the compiled kernels against the numpy fallback.

Run ``python benchmarks/bench_kernels.py``. The last block times a whole
IRSIMPLS fit in two fresh interpreters, one per backend.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from rfpls import _fallback, make_bspline_basis

try:
    from rfpls import _kernels
except ImportError:  # extension not built
    _kernels = None

END_TO_END = """
import time, warnings
warnings.simplefilter("ignore")
import rfpls
from rfpls.simlab import ScenarioConfig, generate_case
ds = generate_case(ScenarioConfig(n=150, n_train=100, contamination_rate=0.2, seed=1))
t0 = time.perf_counter()
for _ in range({reps}):
    rfpls.fit_fflr(ds.Y_train, ds.X_train, "irsimpls", 3, seed=1)
print(rfpls.BACKEND, (time.perf_counter() - t0) / {reps})
"""


def _best(fn, number):
    return min(timeit.repeat(fn, number=number, repeat=5)) / number


def kernel_cases(rng):
    b = make_bspline_basis(20)
    x = np.linspace(0, 1, 2000)
    X = rng.standard_normal((500, 20))
    R = rng.standard_normal((200, 10))
    h = np.full(10, 0.4)
    return {
        "bspline_design 2000 x 20": lambda m: m.bspline_design(x, b.knots, 4),
        "weiszfeld 500 x 20": lambda m: m.weiszfeld(X, X.mean(0), 1e-8, 200),
        "kde_columns 200 x 10": lambda m: m.kde_columns(R, h),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--number", type=int, default=20, help="calls per timing")
    ap.add_argument("--fit-reps", type=int, default=3, help="IRSIMPLS fits per backend")
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    print(f"{'kernel':<28}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for name, call in kernel_cases(rng).items():
        py = _best(lambda: call(_fallback), args.number) * 1e3
        if _kernels is None:
            print(f"{name:<28}{py:>12.3f}{'n/a':>12}{'':>10}")
            continue
        cy = _best(lambda: call(_kernels), args.number) * 1e3
        print(f"{name:<28}{py:>12.3f}{cy:>12.3f}{py / cy:>9.1f}x")

    print("\nend-to-end IRSIMPLS fit (n=100, five predictors, h=3)")
    base = {k: v for k, v in os.environ.items() if k != "RFPLS_PURE_PYTHON"}
    for extra in ({"RFPLS_PURE_PYTHON": "1"}, {}):
        env = {**base, **extra}
        code = END_TO_END.format(reps=args.fit_reps)
        out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
        backend, secs = out.stdout.split()
        print(f"  {backend:<8}{float(secs) * 1e3:10.1f} ms per fit")


if __name__ == "__main__":
    main()
