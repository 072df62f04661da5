"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best wall time per kernel and backend and the speedup.  Inputs are
seeded so runs are comparable across machines.
"""
import argparse
import timeit

import numpy as np

from lapstab import _kernels_py

try:
    from lapstab import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    C = rng.integers(-1, 2, size=(60, 90)).astype(np.float64)
    adj = (rng.random((80, 80)) < 0.08).astype(np.uint8)
    n = 6
    comp = np.ones((n, n), dtype=np.uint8) - np.eye(n, dtype=np.uint8)
    return {
        "rref 60x90": lambda k: k.rref(np.ascontiguousarray(C), 1e-9),
        "max_matching 80x80": lambda k: k.max_matching(np.ascontiguousarray(adj)),
        "walks K6 length 4": lambda k: k.walks(np.ascontiguousarray(comp), 4),
    }


def check_agreement():
    for seed in range(5):
        r = np.random.default_rng(seed)
        adj = (r.random((7, 7)) < 0.4).astype(np.uint8)
        np.fill_diagonal(adj, 0)
        for p in range(4):
            a = np.asarray(_kernels_py.walks(adj, p)).reshape(-1, p + 1)
            b = np.asarray(_kernels.walks(adj, p)).reshape(-1, p + 1)
            assert np.array_equal(a, b)
        assert _kernels_py.max_matching(adj) == _kernels.max_matching(adj)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    backends = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])
    if _kernels is None:
        print("compiled extension not built; timing the Python fallback only")
    else:
        check_agreement()
    print(f"{'kernel':<22}" + "".join(f"{name:>12}" for name, _ in backends) + "     speedup")
    for label, fn in cases(rng).items():
        times = []
        for _, mod in backends:
            t = min(timeit.repeat(lambda: fn(mod), repeat=args.repeat, number=args.number))
            times.append(t / args.number)
        row = f"{label:<22}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
