"""Compare the compiled and pure-Python Smith kernels over Z/p^k.

    python3 benchmarks/bench_kernels.py [--sizes 10,20,40] [--repeat 3]
"""
import argparse
import random
import time

from bockstein.exactla import PrimePowerRing, backend
from bockstein.exactla.kernels import smith


def random_matrix(rng, n, m, coeffs, density=0.5):
    return [[rng.randrange(coeffs.modulus) if rng.random() < density else 0 for _ in range(m)]
            for _ in range(n)]


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="10,20,40,80")
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if backend() != "cython":
        print("compiled kernel not built; only the Python fallback is available")
    rng = random.Random(args.seed)
    print(f"{'ring':<8}{'size':>6}{'python s':>12}{'cython s':>12}{'speedup':>10}")
    for p, k in [(2, 4), (3, 3), (5, 2)]:
        coeffs = PrimePowerRing(p, k)
        for n in (int(x) for x in args.sizes.split(",")):
            A = random_matrix(rng, n, n, coeffs)
            ref = smith(A, n, coeffs, force="python")
            t_py = best_time(lambda: smith(A, n, coeffs, force="python"), args.repeat)
            if backend() == "cython":
                got = smith(A, n, coeffs, force="cython")
                if got[0] != ref[0]:
                    raise SystemExit(f"kernels disagree on a {n}x{n} matrix over Z/{p}^{k}")
                t_c = best_time(lambda: smith(A, n, coeffs, force="cython"), args.repeat)
                speed = f"{t_py / t_c:9.1f}x"
                t_c = f"{t_c:12.4f}"
            else:
                t_c, speed = f"{'-':>12}", f"{'-':>10}"
            print(f"Z/{p}^{k:<4}{n:>6}{t_py:12.4f}{t_c}{speed}")


if __name__ == "__main__":
    main()
