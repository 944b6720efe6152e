"""Time the compiled and pure-Python Jacobi eigensolvers on random Hermitian matrices.

    python3 benchmarks/bench_jacobi.py --dims 8 32 64 128 256 --repeat 3
"""

import argparse
import time

import numpy as np

from carmarkov import linalg


def bench(dim: int, backend: str, repeat: int, seed: int = 0) -> tuple[float, float]:
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = (g + g.conj().T) / 2
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        eig = linalg.hermitian_eig(m, backend)
        best = min(best, time.perf_counter() - start)
    err = np.linalg.norm(eig.reconstruct() - m) / np.linalg.norm(m)
    return best, err


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--dims", type=int, nargs="+", default=[8, 32, 64, 128, 256])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    backends = sorted(linalg.BACKENDS)
    print(f"{'dim':>5} " + " ".join(f"{b + ' [ms]':>15}" for b in backends)
          + f" {'speedup':>8} {'rel. error':>11}")
    for dim in args.dims:
        times, errs = {}, []
        for b in backends:
            times[b], err = bench(dim, b, args.repeat)
            errs.append(err)
        speed = (times["python"] / times["compiled"]) if "compiled" in times else float("nan")
        print(f"{dim:>5} " + " ".join(f"{1e3 * times[b]:>15.2f}" for b in backends)
              + f" {speed:>8.1f} {max(errs):>11.1e}")


if __name__ == "__main__":
    main()
