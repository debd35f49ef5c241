"""Time the compiled and pure-Python kernels on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np
from scipy.stats import unitary_group

from athermal import kernels


def workloads(rng):
    n = 2000
    qw = rng.exponential(size=n)
    qv = np.sort(rng.exponential(size=n))[::-1].copy()
    ew = rng.exponential(size=n)
    ew *= qw.sum() / ew.sum()
    ev = np.sort(rng.uniform(0, 5, size=n))[::-1].copy()
    a, b, w = rng.uniform(size=(3, 100_000))
    d = 5
    U = np.ascontiguousarray(unitary_group.rvs(d, random_state=rng))
    p = rng.dirichlet(np.ones(d))
    h = rng.normal(size=d)
    return {
        "reflected_step_integral (2000 steps)": lambda k: k.reflected_step_integral(qw, qv, ew, ev, True, True),
        "fisher_sum (1e5 terms)": lambda k: k.fisher_sum(a, b, w),
        "qfi_rotated (d=5)": lambda k: k.qfi_rotated(U, p, h),
        "qfi_fd_gradient (d=5)": lambda k: k.qfi_fd_gradient(U, p, h, 1e-5),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = {name: kernels.get_backend(name) for name in kernels.available_backends()}
    print(f"active backend: {kernels.BACKEND}")
    print(f"{'kernel':40s}" + "".join(f"{name:>14s}" for name in backends) + f"{'speedup':>10s}")
    for label, call in workloads(np.random.default_rng(0)).items():
        times = {}
        for name, mod in backends.items():
            timer = timeit.Timer(lambda: call(mod))
            number, _ = timer.autorange()
            times[name] = min(timer.repeat(args.repeat, number)) / number
        row = f"{label:40s}" + "".join(f"{t * 1e6:12.1f}us" for t in times.values())
        if {"cython", "python"} <= times.keys():
            row += f"{times['python'] / times['cython']:9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
