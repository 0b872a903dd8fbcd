"""LP value on the sqrt(3)-1 family as n grows.

    python3 scripts/sqrt3_trend.py --n 10 50 100 200 --free-order
"""
import argparse
import math
import time

from prophet_samples.generators import sqrt3_example
from prophet_samples.lp_policy import build_rfolp, build_rpslp, count_states, solve_lp


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[10, 20, 50, 100])
    ap.add_argument("--free-order", action="store_true", help="also solve the free-order program")
    args = ap.parse_args()

    print(f"# asymptote sqrt(3)-1 = {math.sqrt(3) - 1:.6f}")
    print("model,n,states,delta,seconds")
    builders = [("ps", build_rpslp)] + ([("fo", build_rfolp)] if args.free_order else [])
    for n in args.n:
        inst = sqrt3_example(n)
        for name, build in builders:
            start = time.perf_counter()
            lp = build(inst)
            sol = solve_lp(lp)
            print(f"{name},{n},{count_states(lp)},{sol.delta:.6f},{time.perf_counter() - start:.2f}", flush=True)


if __name__ == "__main__":
    main()
