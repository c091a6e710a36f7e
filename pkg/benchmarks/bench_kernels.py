"""Compare the numba and numpy kernel backends on a 1,000-node path constraint.

    python3 benchmarks/bench_kernels.py [--nodes 1000] [--batch 1024] [--repeat 200]
"""

import argparse
import statistics
import time

import numpy as np

from fuzzysat import kernels
from fuzzysat.synth import large_pi
from fuzzysat.tape import compile_tape


def _timeit(fn, repeat):
    fn()  # warm-up (and JIT compile)
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--nodes", type=int, default=1000)
    ap.add_argument("--batch", type=int, default=1024)
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args()

    pi, seed = large_pi(args.nodes)
    cols = np.arange(len(seed), dtype=np.int64)
    tape = compile_tape(tuple(pi), cols)
    one = np.frombuffer(seed, np.uint8)[None, :].copy()
    rng = np.random.default_rng(0)
    many = rng.integers(0, 256, (args.batch, len(seed)), dtype=np.uint8)
    print(f"pi: {len(pi)} constraints, {len(tape.op)} tape slots")

    backends = [("numpy", kernels.numpy_backend)]
    if kernels.numba_backend is not None:
        backends.insert(0, ("numba", kernels.numba_backend))
    z = np.zeros(0, np.uint64)
    for name, be in backends:
        def check(rows, be=be):
            return be.check_batch(tape.op, tape.width, tape.arg0, tape.arg1, tape.arg2,
                                  tape.param, tape.root_slot, tape.root_end, rows, 0, z, z, z)
        t1 = _timeit(lambda: check(one), args.repeat)
        tn = _timeit(lambda: check(many), max(5, args.repeat // 10))
        print(f"{name:6s} single candidate {t1 * 1e6:9.1f} us   "
              f"batch of {args.batch}: {tn * 1e3:8.2f} ms ({tn / args.batch * 1e6:.2f} us/candidate)")


if __name__ == "__main__":
    main()
