"""Sample-based pipeline against the full-information LP on a few families.

For every (family, n, seed) the pipeline draws its sample budget, builds a
policy, and is scored on the true instance both exactly (when the oracle
applies) and by Monte Carlo.
"""
import argparse

from prophet_samples.distributions import ModelKind, exact_expected_max
from prophet_samples.errors import SizeGuardError
from prophet_samples.generators import generate
from prophet_samples.lp_policy import build_program, solve_lp
from prophet_samples.oracle import exact_policy_value
from prophet_samples.simulate import monte_carlo, run_pipeline

SETTINGS = [
    ("iid_bernoulli", 50, {"p": 0.1}),
    ("iid_bernoulli", 20, {"p": 0.3}),
    ("sqrt3_example", 50, {}),
    ("random_discrete", 6, {"s": 4}),
]


def main():
    ap = argparse.ArgumentParser(description="pipeline vs full-information LP")
    ap.add_argument("--eps", type=float, default=0.2)
    ap.add_argument("--episodes", type=int, default=20_000)
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--model", default="ps")
    ap.add_argument("--smooth", action="store_true")
    args = ap.parse_args()
    model = ModelKind.parse(args.model)

    print("family,n,seed,true_delta,pipeline_delta,exact_ratio,mc_ratio,mc_stderr,gap")
    for family, n, kw in SETTINGS:
        inst = generate(family, n, seed=0, eps=args.eps, **kw)
        true_delta = solve_lp(build_program(inst, model)).delta
        emax = exact_expected_max(inst)
        for seed in range(args.seeds):
            try:
                res = run_pipeline(inst, args.eps, model, seed, smooth=args.smooth, detailed=True)
            except SizeGuardError as exc:
                # too many variables classified large for the state space
                print(f"# {family},{n},{seed}: {exc}")
                continue
            try:
                exact = exact_policy_value(res.policy, inst, model).ratio
            except ValueError:
                exact = float("nan")  # outside the oracle's size guards
            stats = monte_carlo(res.policy, inst, model, args.episodes, seed)
            print(f"{family},{n},{seed},{true_delta:.6f},{res.delta:.6f},{exact:.6f},"
                  f"{stats.ratio:.6f},{stats.stderr / emax:.6f},"
                  f"{true_delta - exact:.6f}", flush=True)


if __name__ == "__main__":
    main()
