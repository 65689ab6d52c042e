"""Experiment campaigns over instance sets and algorithm configurations.

Algorithms are named by triplets "ENGINE/PAIRING/TRANSFER", for example
"MFEA-I/LSP-20/RI" or "P-MFEA/RndTsk2:aux.txt/IK". A campaign executes every
(algorithm, instance, run) cell, journals finished cells so interrupted
campaigns resume where they stopped, and emits:

  runs.csv     one row per cell (makespan, relative error, seed, trace path)
  metrics.csv  average/best/worst relative error per (algorithm, instance)
  traces/      one convergence CSV per cell (elapsed_s, generation, best)

Relative errors use the instance's best-known makespan when available and
otherwise fall back to the campaign's own best observed value, flagged in the
re_basis column.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from random import Random

from .auxiliary import MEASURES, build_eat, importance_scores
from .distance import cos_theta_lower_bound, itdm, zero_pad
from .emt import Engine, EngineConfig, ImpTsk, RndTsk, TaskPair
from .errors import ConfigError, ParameterError, ParseError
from .instance import Instance, parse_instance

__all__ = [
    "RunRecord",
    "MetricsRow",
    "CampaignConfig",
    "relative_error",
    "aggregate",
    "load_instance_file",
    "parse_algorithm",
    "parse_campaign_config",
    "run_campaign",
    "distance_sweep",
]

RUNS_HEADER = [
    "algorithm",
    "instance",
    "run",
    "seed",
    "makespan",
    "re",
    "re_basis",
    "elapsed_s",
    "trace",
]
METRICS_HEADER = ["algorithm", "instance", "are", "bre", "wre"]
SWEEP_HEADER = ["instance", "measure", "ratio", "d", "cos_theta", "bound"]


@dataclass
class RunRecord:
    algorithm: str
    instance: str
    run_index: int
    seed: int
    makespan: int
    elapsed_s: float
    trace_path: str = ""
    re: float | None = None
    re_basis: str = ""


@dataclass
class MetricsRow:
    algorithm: str
    instance: str
    are: float
    bre: float
    wre: float


def relative_error(c: float, c_star: float) -> float:
    """Percent excess of a makespan over the reference value."""
    if c_star <= 0:
        raise ParameterError(f"reference makespan must be positive, got {c_star}")
    return 100.0 * (c - c_star) / c_star


def aggregate(records: list[RunRecord]) -> MetricsRow:
    """Mean/min/max relative error over one (algorithm, instance) cell group."""
    if not records:
        raise ParameterError("cannot aggregate zero run records")
    keys = {(r.algorithm, r.instance) for r in records}
    if len(keys) != 1:
        raise ParameterError(f"records mix {len(keys)} (algorithm, instance) groups")
    res = [r.re for r in records]
    if any(r is None for r in res):
        raise ParameterError("aggregate needs relative errors on every record")
    return MetricsRow(
        algorithm=records[0].algorithm,
        instance=records[0].instance,
        are=sum(res) / len(res),
        bre=min(res),
        wre=max(res),
    )


# ---------------------------------------------------------------------------
# Instance loading and algorithm-name parsing.
# ---------------------------------------------------------------------------


def load_instance_file(path: str | Path) -> Instance:
    """Read an instance file, trying canonical format first, then taillard."""
    path = Path(path)
    text = path.read_text()
    try:
        return parse_instance(text, "canonical", name=path.stem)
    except ParseError:
        return parse_instance(text, "taillard", name=path.stem)


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    encoding: str      # realkey | perm
    transfer: str      # ik | ri
    measure: str | None = None
    k: int | None = None
    rnd_kind: int | None = None
    aux_path: str | None = None

    def make_pair(self, exp: Instance, base_dir: str | Path = ".") -> TaskPair:
        if self.measure is not None:
            return TaskPair(exp, ImpTsk(self.measure, self.k))
        aux = load_instance_file(Path(base_dir) / self.aux_path)
        return TaskPair(exp, RndTsk(self.rnd_kind, aux))


_ENGINES = {"mfea-i": "realkey", "p-mfea": "perm"}


def parse_algorithm(name: str) -> AlgorithmSpec:
    parts = name.split("/")
    if len(parts) != 3:
        raise ConfigError(f"algorithm {name!r} is not ENGINE/PAIRING/TRANSFER")
    engine, pairing, transfer = (p.strip() for p in parts)
    enc = _ENGINES.get(engine.lower())
    if enc is None:
        raise ConfigError(f"unknown engine {engine!r} (use MFEA-I or P-MFEA)")
    mode = transfer.lower()
    if mode not in ("ik", "ri"):
        raise ConfigError(f"unknown transfer {transfer!r} (use IK or RI)")

    low = pairing.lower()
    if low.startswith("rndtsk"):
        head, _, aux = low.partition(":")
        if len(head) != 7 or head[6] not in "123":
            raise ConfigError(f"bad random pairing {pairing!r} (use rndtsk1..3:<file>)")
        if not aux:
            raise ConfigError(f"random pairing {pairing!r} needs an instance file")
        # keep the original (case-preserved) path portion
        aux_path = pairing.partition(":")[2]
        return AlgorithmSpec(
            name=name, encoding=enc, transfer=mode,
            rnd_kind=int(head[6]), aux_path=aux_path,
        )

    measure, sep, ratio = low.partition("-")
    if not sep or measure not in MEASURES:
        raise ConfigError(f"bad pairing {pairing!r} (use e.g. LSP-20 or rndtsk2:<file>)")
    try:
        k = int(ratio)
    except ValueError:
        raise ConfigError(f"bad sampling ratio in pairing {pairing!r}") from None
    return AlgorithmSpec(name=name, encoding=enc, transfer=mode, measure=measure, k=k)


# ---------------------------------------------------------------------------
# Campaign configuration: flat key=value text, repeated instance=/algorithm=.
# ---------------------------------------------------------------------------


@dataclass
class CampaignConfig:
    instances: list = field(default_factory=list)
    algorithms: list = field(default_factory=list)
    runs: int = 1
    base_seed: int = 0
    budget_factor: float | None = None
    max_generations: int | None = None
    population: int = 100
    ls_intensity: int = 50
    parallelism: int = 1
    out_dir: str = "campaign_out"
    base_dir: str = "."

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.budget_factor is None and self.max_generations is None:
            raise ConfigError("set budget_factor, max_generations, or both")
        for name in self.algorithms:
            parse_algorithm(name)


def parse_campaign_config(text: str, base_dir: str | Path = ".") -> CampaignConfig:
    kwargs: dict = {"instances": [], "algorithms": [], "base_dir": str(base_dir)}
    scalars = {
        "runs": int,
        "base_seed": int,
        "budget_factor": float,
        "max_generations": int,
        "population": int,
        "ls_intensity": int,
        "parallelism": int,
        "out_dir": str,
    }
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not value:
            raise ConfigError(f"line {line_no}: expected key=value, got {raw!r}")
        if key == "instance":
            kwargs["instances"].append(value)
        elif key == "algorithm":
            kwargs["algorithms"].append(value)
        elif key in scalars:
            try:
                kwargs[key] = scalars[key](value)
            except ValueError:
                raise ConfigError(f"line {line_no}: bad value for {key}: {value!r}") from None
        else:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
    return CampaignConfig(**kwargs)


# ---------------------------------------------------------------------------
# Campaign execution.
# ---------------------------------------------------------------------------


def _cell_trace_name(algorithm: str, instance: str, run_index: int) -> str:
    safe = "".join(c if c.isalnum() or c in "-_." else "_" for c in algorithm)
    return f"{safe}__{instance}__run{run_index}.csv"


def _engine_config(cfg: CampaignConfig, algo: AlgorithmSpec, exp: Instance, seed: int) -> EngineConfig:
    budget = None
    if cfg.budget_factor is not None:
        budget = cfg.budget_factor * exp.n * exp.m
    return EngineConfig(
        population=cfg.population,
        ls_intensity=cfg.ls_intensity,
        encoding=algo.encoding,
        transfer_mode=algo.transfer,
        time_budget=budget,
        max_generations=cfg.max_generations,
        rng_seed=seed,
    )


def _run_cell(args) -> tuple:
    """Execute one (algorithm, instance, run) cell; top-level so pools can pickle it."""
    algo_name, instance_path, base_dir, cfg_kwargs, run_index, seed, trace_file = args
    cfg = CampaignConfig(**cfg_kwargs)
    algo = parse_algorithm(algo_name)
    exp = load_instance_file(Path(base_dir) / instance_path)
    pair = algo.make_pair(exp, base_dir)
    engine_cfg = _engine_config(cfg, algo, exp, seed)
    result = Engine(pair, engine_cfg).run()
    Path(trace_file).parent.mkdir(parents=True, exist_ok=True)
    with open(trace_file, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["elapsed_s", "generation", "best_makespan"])
        for point in result.trace:
            writer.writerow([f"{point.elapsed_s:.6f}", point.generation, point.best_makespan])
    return (algo_name, exp.name, run_index, seed, result.best_makespan, result.elapsed_s)


def _worker_count(config: CampaignConfig) -> int:
    env = os.environ.get("FLOWMT_PARALLELISM")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"FLOWMT_PARALLELISM must be an integer, got {env!r}") from None
    return max(1, config.parallelism)


def _read_journal(path: Path) -> dict:
    done = {}
    if not path.exists():
        return done
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = (row["algorithm"], row["instance"], int(row["run"]))
            done[key] = RunRecord(
                algorithm=row["algorithm"],
                instance=row["instance"],
                run_index=int(row["run"]),
                seed=int(row["seed"]),
                makespan=int(row["makespan"]),
                elapsed_s=float(row["elapsed_s"]),
                trace_path=row["trace"],
            )
    return done


def _write_runs_csv(path: Path, records: list[RunRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUNS_HEADER)
        for r in records:
            writer.writerow(
                [
                    r.algorithm,
                    r.instance,
                    r.run_index,
                    r.seed,
                    r.makespan,
                    "" if r.re is None else f"{r.re:.6f}",
                    r.re_basis,
                    f"{r.elapsed_s:.6f}",
                    r.trace_path,
                ]
            )


def _write_metrics_csv(path: Path, rows: list[MetricsRow]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_HEADER)
        for row in rows:
            writer.writerow(
                [row.algorithm, row.instance, f"{row.are:.6f}", f"{row.bre:.6f}", f"{row.wre:.6f}"]
            )


def run_campaign(config: CampaignConfig) -> tuple[list[RunRecord], list[MetricsRow]]:
    """Run every cell, resuming past work, and write runs/metrics/trace CSVs."""
    base = Path(config.base_dir)
    out_dir = base / config.out_dir
    traces_dir = out_dir / "traces"
    out_dir.mkdir(parents=True, exist_ok=True)
    runs_path = out_dir / "runs.csv"

    instances = {}
    for rel in config.instances:
        inst = load_instance_file(base / rel)
        if inst.name in instances:
            raise ConfigError(f"two instance files share the name {inst.name!r}")
        instances[inst.name] = (rel, inst)

    cells = []
    for algo in config.algorithms:
        for name, (rel, _inst) in instances.items():
            for run_index in range(config.runs):
                cells.append((algo, name, rel, run_index))

    done = _read_journal(runs_path)
    cfg_kwargs = {
        "instances": config.instances,
        "algorithms": config.algorithms,
        "runs": config.runs,
        "base_seed": config.base_seed,
        "budget_factor": config.budget_factor,
        "max_generations": config.max_generations,
        "population": config.population,
        "ls_intensity": config.ls_intensity,
        "parallelism": config.parallelism,
        "out_dir": config.out_dir,
        "base_dir": config.base_dir,
    }
    pending = []
    for algo, name, rel, run_index in cells:
        if (algo, name, run_index) in done:
            continue
        seed = config.base_seed + run_index
        trace_rel = Path("traces") / _cell_trace_name(algo, name, run_index)
        pending.append(
            (algo, rel, str(base), cfg_kwargs, run_index, seed, str(out_dir / trace_rel))
        )

    results = []
    workers = _worker_count(config)
    if workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, pending))
    else:
        results = [_run_cell(args) for args in pending]

    for algo_name, inst_name, run_index, seed, best, elapsed in results:
        done[(algo_name, inst_name, run_index)] = RunRecord(
            algorithm=algo_name,
            instance=inst_name,
            run_index=run_index,
            seed=seed,
            makespan=best,
            elapsed_s=elapsed,
            trace_path=str(Path("traces") / _cell_trace_name(algo_name, inst_name, run_index)),
        )

    records = [done[(algo, name, run_index)] for algo, name, _rel, run_index in cells]
    records.sort(key=lambda r: (r.algorithm, r.instance, r.run_index))

    # Reference makespans: best-known when the instance carries one, otherwise
    # the best value this campaign observed for the instance (flagged).
    best_seen: dict = {}
    for r in records:
        cur = best_seen.get(r.instance)
        if cur is None or r.makespan < cur:
            best_seen[r.instance] = r.makespan
    for r in records:
        inst = instances[r.instance][1]
        if inst.best_known is not None:
            c_star, basis = inst.best_known, "best_known"
        else:
            c_star, basis = best_seen[r.instance], "campaign_best"
        r.re = relative_error(r.makespan, c_star)
        r.re_basis = basis

    _write_runs_csv(runs_path, records)

    groups: dict = {}
    for r in records:
        groups.setdefault((r.algorithm, r.instance), []).append(r)
    metrics = [aggregate(groups[key]) for key in sorted(groups)]
    _write_metrics_csv(out_dir / "metrics.csv", metrics)
    return records, metrics


# ---------------------------------------------------------------------------
# Distance sweep: task similarity per (instance, measure, ratio).
# ---------------------------------------------------------------------------


def distance_sweep(
    instances: list[Instance],
    measures: list[str],
    ratios: list[int],
    seed: int = 0,
) -> list[tuple]:
    """One row per (instance, measure, ratio): distance, cosine and its floor."""
    rows = []
    for i_idx, inst in enumerate(instances):
        for m_idx, measure in enumerate(measures):
            rng = Random(seed + 1009 * i_idx + m_idx)
            _, ranking = importance_scores(inst.matrix, measure, rng)
            for ratio in ratios:
                eat = build_eat(
                    inst.matrix, measure, ratio, source=inst.name, ranking=ranking
                )
                padded = zero_pad(eat, inst.n)
                res = itdm(padded, inst.matrix)
                bound = cos_theta_lower_bound(inst.matrix, eat.S)
                rows.append((inst.name, eat.measure, ratio, res.d, res.cos_theta, bound))
    return rows


def write_sweep_csv(path: str | Path, rows: list[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER)
        for name, measure, ratio, d, cos_theta, bound in rows:
            writer.writerow([name, measure, ratio, f"{d:.9f}", f"{cos_theta:.9f}", f"{bound:.9f}"])
