"""Multifactorial evolutionary engine for an expensive task plus one auxiliary task.

A single population carries individuals skilled at either the expensive task
(EXP) or the auxiliary one (EAT). Knowledge moves implicitly through
cross-skill mating and, optionally, explicitly: the best auxiliary-task
schedules are patched into complete expensive-task schedules and injected back
as offspring.

Two encodings are supported. Real-key individuals live in [0,1]^D and decode
through ranked-order values; permutation individuals are job sequences
directly. D is the largest job count across the task pair.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from random import Random
from typing import NamedTuple

from .auxiliary import EatSpec, MEASURES, build_eat
from .errors import ConfigError, UnderfullPoolError
from .instance import Instance, ProblemMatrix, _makespan_unchecked
from .search import insert_local_search
from .transfer import (
    default_key_values,
    patch,
    perm_to_vector,
    project_to_eat,
    rov_decode,
)

__all__ = [
    "TASK_EXP",
    "TASK_EAT",
    "ImpTsk",
    "RndTsk",
    "TaskPair",
    "EngineConfig",
    "Individual",
    "TracePoint",
    "RunResult",
    "Engine",
    "run",
]

TASK_EXP = "EXP"
TASK_EAT = "EAT"


@dataclass(frozen=True)
class ImpTsk:
    """Auxiliary task built from the expensive task's own important rows."""

    measure: str
    k: int

    def __post_init__(self):
        if self.measure.lower() not in MEASURES:
            raise ConfigError(f"unknown importance measure {self.measure!r}")
        if not 10 <= self.k <= 90:
            raise ConfigError(f"sampling ratio {self.k} outside 10..90")

    @property
    def label(self) -> str:
        return f"{self.measure.lower()}-{self.k}"


@dataclass(frozen=True)
class RndTsk:
    """Auxiliary task taken from an unrelated benchmark instance."""

    kind: int  # 1: same job count, 2: fewer jobs, 3: more jobs
    instance: Instance

    def __post_init__(self):
        if self.kind not in (1, 2, 3):
            raise ConfigError(f"random-pairing kind must be 1, 2 or 3, got {self.kind}")

    @property
    def label(self) -> str:
        return f"rndtsk{self.kind}"


@dataclass
class TaskPair:
    """The expensive task plus the description of its auxiliary companion."""

    exp: Instance
    pairing: ImpTsk | RndTsk
    aux: EatSpec | Instance | None = None  # resolved when the engine starts

    def __post_init__(self):
        if isinstance(self.pairing, RndTsk):
            aux = self.pairing.instance
            if aux.m != self.exp.m:
                raise ConfigError(
                    f"auxiliary has {aux.m} machines, expensive task has {self.exp.m}"
                )
            kind = self.pairing.kind
            if kind == 1 and aux.n != self.exp.n:
                raise ConfigError("rndtsk1 needs the same job count as the expensive task")
            if kind == 2 and aux.n >= self.exp.n:
                raise ConfigError("rndtsk2 needs fewer jobs than the expensive task")
            if kind == 3 and aux.n <= self.exp.n:
                raise ConfigError("rndtsk3 needs more jobs than the expensive task")


@dataclass
class EngineConfig:
    population: int = 100
    rmp: float = 0.3
    transfer_period: int = 5
    transfer_count: int = 5
    ls_intensity: int = 50
    sbx_eta: float = 2.0
    mut_sigma: float = 0.05
    encoding: str = "realkey"  # "realkey" or "perm"
    transfer_mode: str = "ik"  # "ik" or "ri"
    time_budget: float | None = None
    max_generations: int | None = None
    rng_seed: int = 0

    def __post_init__(self):
        enc = self.encoding.lower()
        if enc == "permutation":
            enc = "perm"
        if enc not in ("realkey", "perm"):
            raise ConfigError(f"unknown encoding {self.encoding!r}")
        self.encoding = enc
        self.transfer_mode = self.transfer_mode.lower()
        if self.transfer_mode not in ("ik", "ri"):
            raise ConfigError(f"unknown transfer mode {self.transfer_mode!r}")
        if self.population < 2 or self.population % 2:
            raise ConfigError("population must be an even number >= 2")
        if not 0.0 <= self.rmp <= 1.0:
            raise ConfigError("rmp must lie in [0, 1]")
        if self.transfer_period < 1:
            raise ConfigError("transfer period must be >= 1")
        if not 1 <= self.transfer_count <= self.population:
            raise ConfigError("transfer count must lie in 1..population")
        if self.ls_intensity < 0:
            raise ConfigError("local-search intensity must be >= 0")
        if self.sbx_eta <= 0 or self.mut_sigma < 0:
            raise ConfigError("sbx_eta must be > 0 and mut_sigma >= 0")
        if self.time_budget is None and self.max_generations is None:
            raise ConfigError("set a time budget, a generation limit, or both")
        if self.time_budget is not None and self.time_budget < 0:
            raise ConfigError("time budget must be >= 0")
        if self.max_generations is not None and self.max_generations < 0:
            raise ConfigError("generation limit must be >= 0")

    @property
    def deterministic(self) -> bool:
        """Generation-count termination only: reported times are zeroed."""
        return self.max_generations is not None and self.time_budget is None


@dataclass
class Individual:
    genotype: tuple
    skill: str
    objectives: dict = field(default_factory=dict)
    birth: int = 0
    uid: int = 0
    fitness: float = 0.0


class TracePoint(NamedTuple):
    elapsed_s: float
    generation: int
    best_makespan: int


@dataclass
class RunResult:
    best_perm: tuple
    best_makespan: int
    trace: list
    generations: int
    elapsed_s: float
    pair: TaskPair
    config: EngineConfig


class Engine:
    """One engine instance owns one run's population state and rng."""

    def __init__(self, pair: TaskPair, config: EngineConfig):
        self.pair = pair
        self.config = config
        if config.transfer_mode == "ri" and not isinstance(pair.pairing, ImpTsk):
            raise ConfigError(
                "patched-solution transfer needs an auxiliary task drawn from the "
                "expensive task's own jobs"
            )
        self._uid = 0
        self._resolved = False

    # -- task plumbing ------------------------------------------------------

    def resolve(self, rng: Random) -> None:
        """Materialize the auxiliary task; counted inside the run's budget."""
        pair = self.pair
        exp = pair.exp
        if isinstance(pair.pairing, ImpTsk):
            if pair.aux is None:
                pair.aux = build_eat(
                    exp.matrix,
                    pair.pairing.measure,
                    pair.pairing.k,
                    rng=rng,
                    source=exp.name,
                    seed=self.config.rng_seed,
                )
            eat: EatSpec = pair.aux
            self._eat_jobs = set(eat.S)
            self._aux_matrix = exp.matrix  # rows of the kept jobs are the task
            self.D = exp.n
        else:
            pair.aux = pair.pairing.instance
            self._eat_jobs = set(range(1, pair.aux.n + 1))
            self._aux_matrix = pair.aux.matrix
            self.D = max(exp.n, pair.aux.n)
        self._exp_jobs = set(range(1, exp.n + 1))
        self._resolved = True

    def _task_jobs(self, task: str) -> set:
        return self._exp_jobs if task == TASK_EXP else self._eat_jobs

    def _task_matrix(self, task: str) -> ProblemMatrix:
        return self.pair.exp.matrix if task == TASK_EXP else self._aux_matrix

    def decode_full(self, genotype: tuple) -> list[int]:
        if self.config.encoding == "realkey":
            return rov_decode(genotype)
        return list(genotype)

    def decode_task(self, task: str, genotype: tuple) -> list[int]:
        full = self.decode_full(genotype)
        jobs = self._task_jobs(task)
        if len(jobs) == len(full):
            return full
        return [job for job in full if job in jobs]

    def evaluate(self, task: str, genotype: tuple) -> int:
        perm = self.decode_task(task, genotype)
        mat = self._task_matrix(task)
        return _makespan_unchecked(mat.rows(), mat.m, perm)

    def _next_uid(self) -> int:
        self._uid += 1
        return self._uid

    # -- population operators -----------------------------------------------

    def initialize(self, rng: Random) -> list[Individual]:
        """Uniform random population; everyone is scored on both tasks once and
        adopts the task where it ranks better (ties favor the expensive task)."""
        if not self._resolved:
            self.resolve(rng)
        pop = []
        for _ in range(self.config.population):
            if self.config.encoding == "realkey":
                genotype = tuple(rng.random() for _ in range(self.D))
            else:
                seq = list(range(1, self.D + 1))
                rng.shuffle(seq)
                genotype = tuple(seq)
            ind = Individual(genotype=genotype, skill=TASK_EXP, uid=self._next_uid())
            ind.objectives[TASK_EXP] = self.evaluate(TASK_EXP, genotype)
            ind.objectives[TASK_EAT] = self.evaluate(TASK_EAT, genotype)
            pop.append(ind)
        ranks = {task: self._task_ranks(pop, task) for task in (TASK_EXP, TASK_EAT)}
        for ind in pop:
            if ranks[TASK_EAT][ind.uid] < ranks[TASK_EXP][ind.uid]:
                ind.skill = TASK_EAT
        return pop

    def _sbx(self, xa: tuple, xb: tuple, rng: Random) -> tuple[tuple, tuple]:
        eta = self.config.sbx_eta
        c1, c2 = [], []
        for a, b in zip(xa, xb):
            u = rng.random()
            if u <= 0.5:
                beta = (2.0 * u) ** (1.0 / (eta + 1.0))
            else:
                beta = (1.0 / (2.0 * (1.0 - u))) ** (1.0 / (eta + 1.0))
            v1 = 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b)
            v2 = 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b)
            c1.append(min(1.0, max(0.0, v1)))
            c2.append(min(1.0, max(0.0, v2)))
        return tuple(c1), tuple(c2)

    def _gauss_mutate(self, x: tuple, rng: Random) -> tuple:
        sigma = self.config.mut_sigma
        return tuple(min(1.0, max(0.0, v + rng.gauss(0.0, sigma))) for v in x)

    def _ordered_crossover(self, pa: tuple, pb: tuple, rng: Random) -> tuple[tuple, tuple]:
        length = len(pa)
        i, j = sorted(rng.sample(range(length), 2))

        def child(keep, fill_from):
            mid = keep[i : j + 1]
            midset = set(mid)
            fill = [g for g in fill_from if g not in midset]
            out = [0] * length
            out[i : j + 1] = mid
            pos = (j + 1) % length
            for g in fill:
                out[pos] = g
                pos = (pos + 1) % length
            return tuple(out)

        return child(pa, pb), child(pb, pa)

    def _swap_mutate(self, x: tuple, rng: Random) -> tuple:
        out = list(x)
        i, j = rng.sample(range(len(out)), 2)
        out[i], out[j] = out[j], out[i]
        return tuple(out)

    def mate(self, pa: Individual, pb: Individual, rng: Random, birth: int = 0):
        """Assortative mating with skill inheritance; returns two offspring."""
        same_skill = pa.skill == pb.skill
        if same_skill or rng.random() < self.config.rmp:
            if self.config.encoding == "realkey":
                g1, g2 = self._sbx(pa.genotype, pb.genotype, rng)
            else:
                g1, g2 = self._ordered_crossover(pa.genotype, pb.genotype, rng)
            if same_skill:
                s1 = s2 = pa.skill
            else:
                s1 = pa.skill if rng.random() < 0.5 else pb.skill
                s2 = pa.skill if rng.random() < 0.5 else pb.skill
        else:
            if self.config.encoding == "realkey":
                g1 = self._gauss_mutate(pa.genotype, rng)
                g2 = self._gauss_mutate(pb.genotype, rng)
            else:
                g1 = self._swap_mutate(pa.genotype, rng)
                g2 = self._swap_mutate(pb.genotype, rng)
            s1, s2 = pa.skill, pb.skill
        kids = [
            Individual(genotype=g1, skill=s1, birth=birth, uid=self._next_uid()),
            Individual(genotype=g2, skill=s2, birth=birth, uid=self._next_uid()),
        ]
        return kids

    @staticmethod
    def _merge_back(full: list[int], improved_sub: list[int], jobs: set) -> list[int]:
        it = iter(improved_sub)
        return [next(it) if job in jobs else job for job in full]

    def improve(self, ind: Individual, rng: Random) -> Individual:
        """INSERT local search on the individual's own task, genotype re-aligned
        so decoding reproduces the improved sequence."""
        if self.config.ls_intensity == 0:
            return ind
        full = self.decode_full(ind.genotype)
        jobs = self._task_jobs(ind.skill)
        mat = self._task_matrix(ind.skill)
        if len(jobs) == len(full):
            sub = full
        else:
            sub = [job for job in full if job in jobs]
        improved_sub = insert_local_search(mat, sub, self.config.ls_intensity, rng)
        improved_full = (
            improved_sub
            if len(improved_sub) == len(full)
            else self._merge_back(full, improved_sub, jobs)
        )
        if self.config.encoding == "realkey":
            ind.genotype = tuple(perm_to_vector(ind.genotype, improved_full))
        else:
            ind.genotype = tuple(improved_full)
        ind.objectives[ind.skill] = _makespan_unchecked(mat.rows(), mat.m, improved_sub)
        return ind

    def explicit_transfer(
        self, population: list[Individual], generation: int, rng: Random
    ) -> list[Individual]:
        """Patch the best auxiliary-skill schedules into expensive-task offspring.

        Runs only on the configured period; the remaining jobs are inserted in
        descending importance at their best positions.
        """
        config = self.config
        if config.transfer_mode != "ri" or generation % config.transfer_period != 0:
            return []
        eat: EatSpec = self.pair.aux
        donors = [
            ind
            for ind in population
            if ind.skill == TASK_EAT and TASK_EAT in ind.objectives
        ]
        donors.sort(key=lambda ind: (ind.objectives[TASK_EAT], ind.uid))
        out = []
        exp_matrix = self.pair.exp.matrix
        for donor in donors[: config.transfer_count]:
            pi_eat = self.decode_task(TASK_EAT, donor.genotype)
            complete = patch("ri", pi_eat, list(eat.remaining), exp_matrix, rng)
            if config.encoding == "realkey":
                genotype = tuple(perm_to_vector(default_key_values(self.D), complete))
            else:
                genotype = tuple(complete)
            ind = Individual(
                genotype=genotype, skill=TASK_EXP, birth=generation, uid=self._next_uid()
            )
            ind.objectives[TASK_EXP] = self.evaluate(TASK_EXP, genotype)
            out.append(ind)
        return out

    def _task_ranks(self, pool: list[Individual], task: str) -> dict:
        """1-based rank per uid on one task; unevaluated individuals are absent."""
        cands = [ind for ind in pool if task in ind.objectives]
        cands.sort(key=lambda ind: (ind.objectives[task], ind.birth, ind.uid))
        return {ind.uid: rank for rank, ind in enumerate(cands, start=1)}

    def select(self, pool: list[Individual]) -> list[Individual]:
        """Keep the highest-fitness individuals from parents plus offspring."""
        n = self.config.population
        if len(pool) < n:
            raise UnderfullPoolError(f"pool of {len(pool)} cannot fill population {n}")
        ranks = {task: self._task_ranks(pool, task) for task in (TASK_EXP, TASK_EAT)}

        def best_key(ind: Individual):
            return min(
                (ranks[task][ind.uid], ind.objectives[task])
                for task in ind.objectives
            )

        keyed = []
        for ind in pool:
            min_rank, obj = best_key(ind)
            ind.fitness = 1.0 / min_rank
            keyed.append(((min_rank, obj, ind.uid), ind))
        keyed.sort(key=lambda t: t[0])
        return [ind for _, ind in keyed[:n]]

    # -- main loop -----------------------------------------------------------

    def run(self) -> RunResult:
        config = self.config
        start = time.perf_counter()

        def elapsed() -> float:
            return 0.0 if config.deterministic else time.perf_counter() - start

        def stopped(done_generations: int) -> bool:
            if (
                config.max_generations is not None
                and done_generations >= config.max_generations
            ):
                return True
            if (
                config.time_budget is not None
                and time.perf_counter() - start >= config.time_budget
            ):
                return True
            return False

        rng = Random(config.rng_seed)
        self.resolve(rng)
        pop = self.initialize(rng)

        best_val = None
        best_perm: tuple = ()
        for ind in pop:
            val = ind.objectives[TASK_EXP]
            if best_val is None or val < best_val:
                best_val = val
                best_perm = tuple(self.decode_task(TASK_EXP, ind.genotype))
        trace = [TracePoint(elapsed(), 0, best_val)]

        gen = 0
        while not stopped(gen):
            gen += 1
            order = list(range(len(pop)))
            rng.shuffle(order)
            offspring = []
            for a, b in zip(order[::2], order[1::2]):
                for kid in self.mate(pop[a], pop[b], rng, birth=gen):
                    kid.objectives[kid.skill] = self.evaluate(kid.skill, kid.genotype)
                    self.improve(kid, rng)
                    offspring.append(kid)
            offspring.extend(self.explicit_transfer(pop, gen, rng))
            pop = self.select(pop + offspring)
            for ind in offspring:
                val = ind.objectives.get(TASK_EXP)
                if val is not None and val < best_val:
                    best_val = val
                    best_perm = tuple(self.decode_task(TASK_EXP, ind.genotype))
            trace.append(TracePoint(elapsed(), gen, best_val))

        return RunResult(
            best_perm=best_perm,
            best_makespan=best_val,
            trace=trace,
            generations=gen,
            elapsed_s=elapsed(),
            pair=self.pair,
            config=config,
        )


def run(pair: TaskPair, config: EngineConfig) -> RunResult:
    """Construct an engine and execute one full run."""
    return Engine(pair, config).run()
