"""Scenario sampling and the Monte Carlo power engine.

Each replicate draws from its own generator, seeded by the study seed and a
stream id derived from ``(scenario, n, replicate)``.  Results therefore do not
depend on how replicates are split across worker processes.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .baselines import t_test, wilcoxon
from .empirical import semiparametric_lrt
from .errors import AtomTestError, DomainError, InputError
from .model import ScenarioSpec, TrialData
from .parametric import parametric_lrt

METHODS = ("parametric", "semiparametric", "wilcoxon", "t_test")
# median of T^2 for T ~ t(2): P(|T| <= s) = s / sqrt(2 + s^2) = 1/2 at s^2 = 2/3
T2SQ_MEDIAN = 2.0 / 3.0
CHUNK = 250


@dataclass(frozen=True)
class RngSpec:
    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed & (2**64 - 1),
                                    spawn_key=(self.stream & (2**64 - 1),))
        return np.random.Generator(np.random.PCG64(ss))


def stream_id(scenario_id: str, n: int, replicate: int) -> int:
    """Stable 64-bit stream id for one replicate."""
    key = f"{scenario_id}\x1f{n}\x1f{replicate}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little")


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngSpec):
        return rng.generator()
    return rng


def t2_squared(location: float, rng, size=None):
    """Squared t(2) draws scaled so that their median equals ``location``."""
    if not location > 0:
        raise DomainError(f"location must be positive, got {location}")
    gen = _as_generator(rng)
    z = gen.standard_normal(size)
    v = gen.chisquare(2.0, size)
    t = z / np.sqrt(v / 2.0)
    return (location / T2SQ_MEDIAN) * t * t


def sample_dataset(spec: ScenarioSpec, n_per_group: int, rng) -> TrialData:
    """Draw ``n_per_group`` records per arm from ``spec``."""
    if n_per_group < 1:
        raise InputError("n_per_group must be at least 1")
    gen = _as_generator(rng)
    ys = []
    for mu, pi in ((spec.mu0, spec.pi0), (spec.mu1, spec.pi1)):
        observed = gen.random(n_per_group) < pi
        if spec.dist == "normal":
            y = gen.normal(mu, 1.0, n_per_group)
        else:
            y = t2_squared(mu, gen, n_per_group)
        ys.append(np.where(observed, y, spec.atom))
    group = np.repeat([0, 1], n_per_group)
    return TrialData(np.concatenate(ys), group, spec.atom)


def method_p_value(method: str, data: TrialData) -> float:
    if method == "parametric":
        return parametric_lrt(data).p_value
    if method == "semiparametric":
        return semiparametric_lrt(data).p_value
    y0 = data.y[data.group == 0]
    y1 = data.y[data.group == 1]
    if method == "wilcoxon":
        return wilcoxon(y0, y1).p_value
    if method == "t_test":
        return t_test(y0, y1).p_value
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class PowerRow:
    scenario: str
    method: str
    n_per_group: int
    reps: int
    degenerate: int
    rejections: int

    @property
    def valid(self) -> int:
        return self.reps - self.degenerate

    @property
    def power(self) -> float:
        return self.rejections / self.valid if self.valid else math.nan

    @property
    def mc_se(self) -> float:
        p = self.power
        return math.sqrt(p * (1.0 - p) / self.valid) if self.valid else math.nan


@dataclass(frozen=True)
class PowerTable:
    rows: tuple

    def get(self, scenario: str, method: str, n: int) -> PowerRow:
        for row in self.rows:
            if (row.scenario, row.method, row.n_per_group) == (scenario, method, n):
                return row
        raise KeyError((scenario, method, n))

    def power(self, scenario: str, method: str, n: int) -> float:
        return self.get(scenario, method, n).power


def _scenario_ids(specs: Sequence[ScenarioSpec]) -> list:
    ids = []
    for k, spec in enumerate(specs):
        sid = spec.name or f"scenario{k + 1}"
        if sid in ids:
            sid = f"{sid}#{k + 1}"
        ids.append(sid)
    return ids


def _run_chunk(task):
    spec, sid, n, start, stop, alpha, methods, seed = task
    rejections = dict.fromkeys(methods, 0)
    degenerate = dict.fromkeys(methods, 0)
    for r in range(start, stop):
        data = sample_dataset(spec, n, RngSpec(seed, stream_id(sid, n, r)))
        for m in methods:
            try:
                p = method_p_value(m, data)
            except (AtomTestError, np.linalg.LinAlgError):
                degenerate[m] += 1
                continue
            if p < alpha:
                rejections[m] += 1
    return (sid, n, start), rejections, degenerate


def default_workers() -> int:
    env = os.environ.get("ATOMTEST_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise InputError(f"ATOMTEST_WORKERS must be an integer, got {env!r}") from None
    return 1


def power_study(specs: Sequence[ScenarioSpec], n_grid: Iterable[int], reps: int,
                alpha: float = 0.05, methods: Sequence[str] = METHODS, seed: int = 0,
                workers: int = 1, min_reps: int = 100) -> PowerTable:
    """Rejection rates of each method for every (scenario, n) pair.

    Every requested method is applied to the same simulated datasets.  A
    replicate on which a method fails (for instance fewer than two observed
    outcomes in a group) is counted as degenerate for that method and left
    out of its power denominator.
    """
    if reps < min_reps:
        raise InputError(f"reps must be at least {min_reps}, got {reps}")
    methods = tuple(dict.fromkeys(methods))
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise InputError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    n_grid = [int(n) for n in n_grid]
    ids = _scenario_ids(specs)
    tasks = []
    for spec, sid in zip(specs, ids):
        for n in n_grid:
            for start in range(0, reps, CHUNK):
                tasks.append((spec, sid, n, start, min(reps, start + CHUNK), alpha, methods, seed))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, tasks))
    else:
        results = [_run_chunk(t) for t in tasks]
    totals = {}
    for (sid, n, _), rej, deg in results:
        for m in methods:
            r0, d0 = totals.get((sid, n, m), (0, 0))
            totals[(sid, n, m)] = (r0 + rej[m], d0 + deg[m])
    rows = []
    for sid in ids:
        for n in n_grid:
            for m in methods:
                rej, deg = totals[(sid, n, m)]
                rows.append(PowerRow(sid, m, n, reps, deg, rej))
    return PowerTable(tuple(rows))
