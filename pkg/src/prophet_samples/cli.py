"""Command-line front end: gen, oracle, lp, pipeline, simulate, check.

Options may also come from a flat ``key = value`` file given by
``--config``; explicit flags win over file values.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .checks import ROW_HEADER, SUITES, run_suite
from .distributions import ModelKind, exact_expected_max, format_instance, read_instance
from .errors import ParameterError
from .generators import FAMILIES, generate
from .lp_policy import build_program, count_states, dump_lp, extract_policy, solve_lp
from .oracle import optimal_fo_value, optimal_fixed_order_value, optimal_ps_value
from .simulate import CSV_HEADER, csv_row, monte_carlo, run_pipeline

DEFAULTS = {
    "model": "ps",
    "eps": 0.2,
    "episodes": 10_000,
    "seed": 0,
    "instance": None,
    "out": None,
    "dump_lp": None,
    "smooth": False,
    "family": "iid_bernoulli",
    "n": 2,
    "s": None,
    "p": 0.5,
    "max_support": 3,
    "suite": "all",
}


@dataclass
class ExperimentConfig:
    command: str
    model: ModelKind
    eps: float
    episodes: int
    seed: int
    instance: str | None
    out: str | None
    dump_lp: str | None
    smooth: bool
    family: str
    n: int
    s: int | None
    p: float
    max_support: int
    suite: str

    def __post_init__(self):
        if not 0.0 < self.eps < 0.5:
            raise ParameterError("eps must lie in (0, 1/2)")
        if self.episodes < 1:
            raise ParameterError("episodes must be at least 1")
        if self.command in ("oracle", "lp", "pipeline", "simulate") and not self.instance:
            raise ParameterError(f"{self.command} needs --instance")


def read_config(path) -> dict:
    out = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"config line {raw!r} is not key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _coerce(key: str, value):
    if value is None:
        return None
    if key in ("episodes", "seed", "n", "s", "max_support"):
        return int(value)
    if key in ("eps", "p"):
        return float(value)
    if key == "smooth":
        return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes", "on")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="prophet-samples", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=["gen", "oracle", "lp", "pipeline", "simulate", "check"])
    ap.add_argument("--config")
    ap.add_argument("--model")
    ap.add_argument("--eps", type=float)
    ap.add_argument("--episodes", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--instance")
    ap.add_argument("--out")
    ap.add_argument("--dump-lp", dest="dump_lp")
    ap.add_argument("--smooth", action="store_true", default=None)
    ap.add_argument("--family", help=f"one of {', '.join(FAMILIES)}")
    ap.add_argument("--n", type=int)
    ap.add_argument("--s", type=int, help="length of the i.i.d. prefix / number of eps-small variables")
    ap.add_argument("--p", type=float, help="success probability for iid_bernoulli")
    ap.add_argument("--max-support", dest="max_support", type=int)
    ap.add_argument("--suite", help=f"one of {', '.join(SUITES)} or all")
    return ap


def resolve(argv=None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    merged = dict(DEFAULTS)
    if args.config:
        unknown = set(cfg := read_config(args.config)) - set(DEFAULTS)
        if unknown:
            raise ParameterError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(cfg)
    for key in DEFAULTS:
        val = getattr(args, key)
        if val is not None:
            merged[key] = val
    merged = {k: _coerce(k, v) for k, v in merged.items()}
    merged["model"] = ModelKind.parse(merged["model"])
    return ExperimentConfig(command=args.command, **merged)


def _emit(lines: list[str], out: str | None) -> None:
    text = "\n".join(lines) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_gen(cfg: ExperimentConfig) -> int:
    inst = generate(cfg.family, cfg.n, seed=cfg.seed, s=cfg.s, p=cfg.p, eps=cfg.eps, max_support=cfg.max_support)
    text = format_instance(inst)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_oracle(cfg: ExperimentConfig) -> int:
    inst = read_instance(cfg.instance)
    if cfg.model is ModelKind.PROPHET_SECRETARY:
        value = optimal_ps_value(inst)
    elif cfg.model is ModelKind.FREE_ORDER:
        value = optimal_fo_value(inst)
    else:
        value = optimal_fixed_order_value(inst, range(inst.n))
    emax = exact_expected_max(inst)
    _emit(["model,n,expected_max,optimal,ratio",
           f"{cfg.model.value},{inst.n},{emax:.6f},{value:.6f},{value / emax if emax > 0 else 1.0:.6f}"], cfg.out)
    return 0


def cmd_lp(cfg: ExperimentConfig) -> int:
    inst = read_instance(cfg.instance)
    lp = build_program(inst, cfg.model, reduced=True)
    if cfg.dump_lp:
        Path(cfg.dump_lp).write_text(dump_lp(lp))
    sol = solve_lp(lp)
    _emit(["delta,n,s,states,solve_ms",
           f"{sol.delta:.6f},{inst.n},{inst.num_iid_prefix},{count_states(lp)},{sol.solve_ms:.6f}"], cfg.out)
    return 0


def cmd_pipeline(cfg: ExperimentConfig) -> int:
    inst = read_instance(cfg.instance)
    res = run_pipeline(inst, cfg.eps, cfg.model, cfg.seed, smooth=cfg.smooth, detailed=True)
    stats = monte_carlo(res.policy, inst, cfg.model, cfg.episodes, cfg.seed)
    true_delta = solve_lp(build_program(inst, cfg.model, reduced=True)).delta
    lines = [CSV_HEADER, csv_row(cfg.model, cfg.eps, inst.n, stats, cfg.seed, res.delta),
             "reference,true_delta,off_support_events",
             f"full_information,{true_delta:.6f},{stats.off_support}"]
    _emit(lines, cfg.out)
    return 0


def cmd_simulate(cfg: ExperimentConfig) -> int:
    """Monte Carlo of the full-information LP policy of the instance."""
    inst = read_instance(cfg.instance)
    sol = solve_lp(build_program(inst, cfg.model, reduced=True))
    stats = monte_carlo(extract_policy(sol), inst, cfg.model, cfg.episodes, cfg.seed)
    _emit([CSV_HEADER, csv_row(cfg.model, cfg.eps, inst.n, stats, cfg.seed, sol.delta)], cfg.out)
    return 0


def cmd_check(cfg: ExperimentConfig) -> int:
    names = list(SUITES) if cfg.suite == "all" else [cfg.suite]
    rows = []
    for name in names:
        rows += run_suite(name, seed=cfg.seed)
    failed = sum(not r.passed for r in rows)
    lines = [ROW_HEADER] + [r.line() for r in rows]
    lines.append(f"# {len(rows) - failed}/{len(rows)} passed")
    _emit(lines, cfg.out)
    return 1 if failed else 0


COMMANDS = {
    "gen": cmd_gen,
    "oracle": cmd_oracle,
    "lp": cmd_lp,
    "pipeline": cmd_pipeline,
    "simulate": cmd_simulate,
    "check": cmd_check,
}


def main(argv=None) -> int:
    try:
        cfg = resolve(argv)
        return COMMANDS[cfg.command](cfg)
    except (ValueError, LookupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
