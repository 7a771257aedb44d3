"""Shared fixtures: exhaustive pair spaces and the generalization benchmark
dataset (a few fixed goal structures with sources sampled per distance)."""

import random

import pytest

from blockseq import planner
from blockseq.dataset import PairRecord, enumerate_configs, make_pairs
from blockseq.model import Color, parse_config, stacks_key

BENCH_PALETTE = frozenset({Color.R, Color.G, Color.B, Color.Y, Color.O})
BENCH_MAIN_GOALS = ("R.G.B.Y.O", "O.Y.B.G.R", "B.R|Y.G.O", "G.O.Y|R.B")
BENCH_AUX_GOALS = ("R.G.B.Y|O", "Y.B|G.R")  # cover table/out moves at every length


def build_benchmark_records(per_main: int = 10, per_aux: int = 3, seed: int = 7):
    """Goal-conditioned navigation dataset over a fixed five-block palette.

    For each goal, sources are grouped by exact distance 1..8; distances >= 6
    prefer sources with the most distinct minimal plans (the deep shells stay
    comparably scoreable under match-any FSA).  All plans stored, verified by
    construction through the planner."""
    pool = [c for c in enumerate_configs(5, "relational") if c.stack_colors == BENCH_PALETTE]
    goals = [(parse_config(t), per_main) for t in BENCH_MAIN_GOALS]
    goals += [(parse_config(t), per_aux) for t in BENCH_AUX_GOALS]
    shells: dict[int, dict[int, list]] = {gi: {} for gi in range(len(goals))}
    for src in pool:
        dm = planner.distance_map(src, horizon=None)
        for gi, (goal, _) in enumerate(goals):
            d = dm.get(stacks_key(goal))
            if d and 1 <= d <= 8:
                shells[gi].setdefault(d, []).append(src)
    rng = random.Random(seed)
    records = []
    for gi, (goal, per) in enumerate(goals):
        for d in range(1, 9):
            srcs = shells[gi].get(d, [])
            if not srcs:
                continue
            planned = [(s, planner.plan(s, goal, horizon=None, max_plans=None)) for s in srcs]
            if d >= 6:
                planned.sort(key=lambda sp: (-len(sp[1].plans), stacks_key(sp[0])))
                picked = planned[:per]
            else:
                picked = planned if len(planned) <= per else rng.sample(planned, per)
            for s, result in picked:
                records.append(PairRecord(s, goal, result.plans, result.min_length, result.truncated))
    return records


@pytest.fixture(scope="session")
def bench_records():
    return build_benchmark_records()


@pytest.fixture(scope="session")
def two_block_records():
    """Every ordered pair of <=2-block configurations, exactly labeled."""
    configs = list(enumerate_configs(2, "relational"))
    records = []
    for src in configs:
        for tgt in configs:
            result = planner.plan(src, tgt, horizon=None)
            label = result.min_length if result.found else None
            records.append(PairRecord(src, tgt, result.plans, label))
    return records


@pytest.fixture(scope="session")
def mixed_records():
    """Sampled 3-block dataset across all labels (none and 0 included)."""
    configs = list(enumerate_configs(3, "relational"))
    quotas = {None: 60, 0: 60, 1: 120, 2: 120, 3: 120, 4: 120}
    return make_pairs(configs, quotas, seed=13)
