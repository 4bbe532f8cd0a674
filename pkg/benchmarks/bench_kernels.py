"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--n 500] [--repeat 50]

Times ``score_pass`` (one risk-set sweep, unstratified and stratified) and
``assign_sequence`` (all three randomization schemes) on simulated trials,
checks that both backends agree and prints the speed-up.
"""

import argparse
import timeit

import numpy as np

from covlogrank import kernels
from covlogrank.randomization import KINDS, SchemeConfig
from covlogrank.simulation import ScenarioConfig, simulate_arrays


def _time(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=50)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        raise SystemExit("compiled kernels are not built; run `pip install -e .` first")

    a = simulate_arrays(ScenarioConfig(n=args.n), 0)
    ev = a["event"].astype(np.int64)
    rows = []
    for label, strata, L in (("score_pass (1 stratum)", np.zeros(args.n, np.int64), 1),
                             ("score_pass (6 strata)", a["stratum"], 6)):
        res = {b: kernels.score_pass(a["time"], ev, a["arm"], strata, L, 0.3, backend=b)
               for b in ("cython", "python")}
        assert abs(res["cython"][0] - res["python"][0]) < 1e-10
        assert np.allclose(res["cython"][2], res["python"][2], atol=1e-12)
        t = {b: _time(lambda b=b: kernels.score_pass(a["time"], ev, a["arm"], strata, L, 0.3,
                                                     backend=b), args.repeat)
             for b in ("cython", "python")}
        rows.append((label, t))

    u = np.random.default_rng(1).random(args.n)
    levels = a["Z"] + np.array([0, 2])
    for kind, cfg in (("simple", SchemeConfig("simple")),
                      ("permuted_block", SchemeConfig("permuted_block")),
                      ("minimization", SchemeConfig("minimization", margins=(2, 3)))):
        call = {b: (lambda b=b: kernels.assign_sequence(
            KINDS[kind], levels, a["stratum"], u, cfg.pi, cfg.ones_per_block,
            cfg.block_size, cfg.p_prefer, 5, 6, backend=b)) for b in ("cython", "python")}
        assert np.array_equal(call["cython"](), call["python"]())
        rows.append((f"assign_sequence ({kind})", {b: _time(f, args.repeat) for b, f in call.items()}))

    print(f"n = {args.n}, best of {args.repeat}")
    print(f"{'kernel':<34}{'cython (us)':>12}{'python (us)':>13}{'speed-up':>10}")
    for label, t in rows:
        print(f"{label:<34}{1e6 * t['cython']:>12.1f}{1e6 * t['python']:>13.1f}"
              f"{t['python'] / t['cython']:>9.1f}x")


if __name__ == "__main__":
    main()
