"""Command-line interface.

Subcommands: generate, distance, build-eat, solve-eat, patch, solve,
experiment, distance-sweep, metrics. Exit code 0 on success; config or input
errors print a diagnostic to stderr and return a nonzero code.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path
from random import Random

from .auxiliary import MEASURES, build_eat, importance_scores
from .distance import itdm
from .emt import Engine, EngineConfig
from .errors import FlowmtError, ConfigError
from .harness import (
    aggregate,
    load_instance_file,
    parse_algorithm,
    parse_campaign_config,
    relative_error,
    run_campaign,
    distance_sweep,
    write_sweep_csv,
    RunRecord,
)
from .instance import Instance, generate_taillard, makespan, write_instance
from .search import SearchBudget, solve_eat
from .transfer import PATCH_STRATEGIES, patch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flowmt",
        description="Flowshop scheduling with economical auxiliary tasks and "
        "evolutionary multitasking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="regenerate a benchmark instance from its seed")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.add_argument("seed", type=int)
    p.add_argument("--out", help="write canonical instance file here (default stdout)")

    p = sub.add_parser("distance", help="normalized distance between two instances")
    p.add_argument("task_a", help="instance file for the task being measured")
    p.add_argument("task_b", help="instance file for the reference task")

    p = sub.add_parser("build-eat", help="extract an economical auxiliary task")
    p.add_argument("instance")
    p.add_argument("--measure", default="lsp", choices=MEASURES)
    p.add_argument("--ratio", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the submatrix here (default stdout)")

    p = sub.add_parser("solve-eat", help="NEH plus annealing on a compact task")
    p.add_argument("eat_file")
    p.add_argument("--sa-iters", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("patch", help="grow a partial schedule into a complete one")
    p.add_argument("instance")
    p.add_argument("--strategy", default="ri", choices=PATCH_STRATEGIES)
    p.add_argument("--eat-perm", required=True, help="comma-separated job sequence")
    p.add_argument("--measure", default="lsp", choices=MEASURES)
    p.add_argument("--ratio", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("solve", help="run the multitasking engine on an instance")
    p.add_argument("instance")
    p.add_argument("--pairing", default="lsp-20", help="e.g. lsp-20 or rndtsk2:<file>")
    p.add_argument("--transfer", default="ri", choices=("ik", "ri"))
    p.add_argument("--encoding", default="realkey", choices=("realkey", "perm"))
    p.add_argument("--budget-factor", type=float, default=None,
                   help="wall-clock budget = factor * n * m seconds")
    p.add_argument("--generations", type=int, default=None,
                   help="deterministic alternative to the wall-clock budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pop", type=int, default=100)
    p.add_argument("--ls", type=int, default=50)
    p.add_argument("--trace-out", default=None, help="convergence CSV path")

    p = sub.add_parser("experiment", help="run a campaign config")
    p.add_argument("config")

    p = sub.add_parser("distance-sweep", help="distance table for a sweep config")
    p.add_argument("config")

    p = sub.add_parser("metrics", help="aggregate a runs.csv into metrics rows")
    p.add_argument("records")
    p.add_argument("--out", help="write metrics CSV here (default stdout)")
    return parser


def _cmd_generate(args) -> int:
    inst = generate_taillard(args.n, args.m, args.seed)
    text = write_instance(inst)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_distance(args) -> int:
    a = load_instance_file(args.task_a)
    b = load_instance_file(args.task_b)
    res = itdm(a.matrix, b.matrix)
    print(f"d = {res.d:.9f}")
    print(f"t_star = {res.t_star:.9f}")
    print(f"b_star = {res.b_star:.9f}")
    print(f"cos_theta = {res.cos_theta:.9f}")
    return 0


def _cmd_build_eat(args) -> int:
    inst = load_instance_file(args.instance)
    eat = build_eat(
        inst.matrix, args.measure, args.ratio,
        rng=Random(args.seed), source=inst.name, seed=args.seed,
    )
    text = write_instance(Instance(eat.submatrix, name=f"{inst.name}-eat"))
    if args.out:
        Path(args.out).write_text(text)
        report = sys.stdout
    else:
        sys.stdout.write(text)
        report = sys.stderr
    print(f"S = {' '.join(str(j) for j in eat.selected)}", file=report)
    print(f"g = {eat.g}", file=report)
    return 0


def _cmd_solve_eat(args) -> int:
    inst = load_instance_file(args.eat_file)
    budget = SearchBudget(sa_iterations=args.sa_iters, rng_seed=args.seed)
    perm = solve_eat(inst.matrix, budget, Random(args.seed))
    print("permutation =", " ".join(str(j) for j in perm))
    print("makespan =", makespan(inst.matrix, perm))
    return 0


def _cmd_patch(args) -> int:
    inst = load_instance_file(args.instance)
    try:
        pi_eat = [int(tok) for tok in args.eat_perm.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--eat-perm must be comma-separated integers: {args.eat_perm!r}")
    rng = Random(args.seed)
    _, ranking = importance_scores(inst.matrix, args.measure, rng)
    remaining = [job for job in ranking if job not in set(pi_eat)]
    full = patch(args.strategy, pi_eat, remaining, inst.matrix, rng)
    print("permutation =", " ".join(str(j) for j in full))
    print("makespan =", makespan(inst.matrix, full))
    return 0


def _cmd_solve(args) -> int:
    inst = load_instance_file(args.instance)
    algo = parse_algorithm(f"{'MFEA-I' if args.encoding == 'realkey' else 'P-MFEA'}"
                           f"/{args.pairing}/{args.transfer}")
    pair = algo.make_pair(inst, Path(args.instance).parent)
    budget = None
    if args.budget_factor is not None:
        budget = args.budget_factor * inst.n * inst.m
    if budget is None and args.generations is None:
        budget = 0.03 * inst.n * inst.m
    config = EngineConfig(
        population=args.pop,
        ls_intensity=args.ls,
        encoding=args.encoding,
        transfer_mode=args.transfer,
        time_budget=budget,
        max_generations=args.generations,
        rng_seed=args.seed,
    )
    result = Engine(pair, config).run()
    print("best_makespan =", result.best_makespan)
    if inst.best_known is not None:
        print(f"re = {relative_error(result.best_makespan, inst.best_known):.4f}")
    print("permutation =", " ".join(str(j) for j in result.best_perm))
    trace_path = args.trace_out or f"{Path(args.instance).stem}_trace.csv"
    with open(trace_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["elapsed_s", "generation", "best_makespan"])
        for point in result.trace:
            writer.writerow([f"{point.elapsed_s:.6f}", point.generation, point.best_makespan])
    print("trace =", trace_path)
    return 0


def _cmd_experiment(args) -> int:
    path = Path(args.config)
    config = parse_campaign_config(path.read_text(), base_dir=path.parent)
    records, metrics = run_campaign(config)
    print(f"completed {len(records)} runs over {len(metrics)} (algorithm, instance) cells")
    print(f"outputs in {Path(config.base_dir) / config.out_dir}")
    return 0


def _parse_sweep_config(text: str, base_dir: Path):
    instances, measures, ratios, seed, out = [], list(MEASURES), None, 0, "distances.csv"
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not value:
            raise ConfigError(f"line {line_no}: expected key=value, got {raw!r}")
        if key == "instance":
            instances.append(load_instance_file(base_dir / value))
        elif key == "measures":
            measures = [tok.strip().lower() for tok in value.split(",") if tok.strip()]
        elif key == "ratios":
            ratios = [int(tok) for tok in value.split(",") if tok.strip()]
        elif key == "seed":
            seed = int(value)
        elif key == "out":
            out = value
        else:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
    if ratios is None:
        ratios = list(range(10, 100, 10))
    return instances, measures, ratios, seed, base_dir / out


def _cmd_distance_sweep(args) -> int:
    path = Path(args.config)
    instances, measures, ratios, seed, out = _parse_sweep_config(path.read_text(), path.parent)
    rows = distance_sweep(instances, measures, ratios, seed=seed)
    write_sweep_csv(out, rows)
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def _cmd_metrics(args) -> int:
    groups: dict = {}
    with open(args.records, newline="") as fh:
        for line_no, row in enumerate(csv.DictReader(fh), start=2):
            try:
                rec = RunRecord(
                    algorithm=row["algorithm"],
                    instance=row["instance"],
                    run_index=int(row["run"]),
                    seed=int(row["seed"]),
                    makespan=int(row["makespan"]),
                    elapsed_s=float(row["elapsed_s"]),
                    re=float(row["re"]),
                )
            except (KeyError, TypeError, ValueError):
                raise ConfigError(
                    f"{args.records}: line {line_no} is not a finished run record"
                ) from None
            groups.setdefault((rec.algorithm, rec.instance), []).append(rec)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(["algorithm", "instance", "are", "bre", "wre"])
        for key in sorted(groups):
            row = aggregate(groups[key])
            writer.writerow(
                [row.algorithm, row.instance,
                 f"{row.are:.6f}", f"{row.bre:.6f}", f"{row.wre:.6f}"]
            )
    finally:
        if args.out:
            out.close()
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "distance": _cmd_distance,
    "build-eat": _cmd_build_eat,
    "solve-eat": _cmd_solve_eat,
    "patch": _cmd_patch,
    "solve": _cmd_solve,
    "experiment": _cmd_experiment,
    "distance-sweep": _cmd_distance_sweep,
    "metrics": _cmd_metrics,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FlowmtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
