"""Configuration-space enumeration, pair-record generation, length splits,
and the corruption model that emulates imperfect scene recognition.

Record files are line-delimited UTF-8: tab-separated source text, target
text, length label ('none' for unreachable pairs), and the semicolon-joined
minimal plans (each plan a comma-joined list of move(X,Y,t) atoms).  A fifth
'truncated' column appears when the stored plan set was capped.
"""

from __future__ import annotations

import random
import re
from collections import Counter
from dataclasses import dataclass, field
from itertools import combinations, permutations
from typing import Iterable, Iterator, Sequence

from . import planner
from .logic import legal_moves, run, apply_move
from .model import (
    COLORS,
    MAX_BLOCKS,
    Color,
    Configuration,
    Move,
    MoveSequence,
    canonical,
    format_config,
    format_move,
    parse_config,
    parse_move,
    stacks_key,
)


@dataclass
class PairRecord:
    """One benchmark sample: a configuration pair with all its minimal plans.

    ``label`` is the shared plan length, or None when no sequence exists.
    """

    src: Configuration
    tgt: Configuration
    plans: tuple[MoveSequence, ...]
    label: int | None
    truncated: bool = False


@dataclass
class SplitSpec:
    """Length-disjoint split: train holds labels <= ell, test labels >= ell+1."""

    ell: int
    train: list[PairRecord] = field(default_factory=list)
    test: list[PairRecord] = field(default_factory=list)


class QuotaError(Exception):
    """A per-label quota could not be filled; carries the achieved counts."""

    def __init__(self, label, achieved: dict):
        self.label = label
        self.achieved = dict(achieved)
        name = "none" if label is None else label
        super().__init__(f"quota for label {name} infeasible; achieved {self.achieved}")


class RecordError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


# ---------------------------------------------------------------------------
# Enumeration
# ---------------------------------------------------------------------------

def _splits(items: tuple[Color, ...]) -> Iterator[tuple[tuple[Color, ...], ...]]:
    """All ways to cut an ordered row of blocks into ordered non-empty stacks."""
    n = len(items)
    if n == 0:
        yield ()
        return
    for mask in range(1 << (n - 1)):
        stacks, start = [], 0
        for i in range(n - 1):
            if mask >> i & 1:
                stacks.append(items[start : i + 1])
                start = i + 1
        stacks.append(items[start:])
        yield tuple(stacks)


def enumerate_configs(max_blocks: int = MAX_BLOCKS, mode: str = "relational") -> Iterator[Configuration]:
    """Every configuration with an empty out set and at most max_blocks blocks,
    exactly once per canonical class of the chosen mode, in deterministic order.
    """
    if not 0 <= max_blocks <= MAX_BLOCKS:
        raise ValueError(f"max_blocks must be in 0..{MAX_BLOCKS}")
    if mode not in ("relational", "grid"):
        raise ValueError(f"unknown mode {mode!r}")
    seen: set[str] = set()
    for k in range(max_blocks + 1):
        for subset in combinations(COLORS, k):
            for perm in permutations(subset):
                for stacks in _splits(perm):
                    cfg = Configuration(stacks)
                    if mode == "relational":
                        key = canonical(cfg)
                        if key in seen:
                            continue
                        seen.add(key)
                    yield cfg


# ---------------------------------------------------------------------------
# Pair sampling
# ---------------------------------------------------------------------------

def _label_order(labels: Iterable) -> list:
    return sorted(labels, key=lambda v: (v is None, v if v is not None else 0))


def make_pairs(
    configs: Iterable[Configuration],
    quotas: dict,
    seed: int,
    max_plans: int = 200,
    horizon: int | None = 8,
    attempts_per_label: int | None = None,
) -> list[PairRecord]:
    """Sample verified pair records until each label quota is met.

    Labels cycle round-robin; sources are drawn uniformly, targets for length
    labels are drawn from the source's exact distance map so rare lengths do
    not require blind rejection.  Every stored plan is replayed through the
    transition engine before the record is accepted.  Fully determined by
    ``seed``; raises QuotaError when a label runs out of attempts.
    """
    pool = list(configs)
    if not pool:
        raise ValueError("no configurations to sample from")
    quotas = {k: int(v) for k, v in quotas.items() if int(v) > 0}
    for k in quotas:
        if not (k is None or (isinstance(k, int) and 0 <= k <= 8)):
            raise ValueError(f"bad quota label {k!r}")
    rng = random.Random(seed)
    records: list[PairRecord] = []
    achieved: Counter = Counter()
    attempts: Counter = Counter()
    budgets = {
        k: attempts_per_label if attempts_per_label is not None else max(5000, 200 * n)
        for k, n in quotas.items()
    }
    seen_pairs: set[tuple[str, str]] = set()
    buckets: dict[str, dict[int, list[str]]] = {}

    def distance_buckets(src: Configuration, src_key: str) -> dict[int, list[str]]:
        cached = buckets.get(src_key)
        if cached is None:
            cached = {}
            for part, d in planner.distance_map(src, horizon=horizon).items():
                cached.setdefault(d, []).append(part)
            buckets[src_key] = cached
        return cached

    pending = [k for k in _label_order(quotas) for _ in range(quotas[k])]
    idx = 0
    while pending:
        label = pending[idx % len(pending)]
        attempts[label] += 1
        if attempts[label] > budgets[label]:
            raise QuotaError(label, achieved)
        src = pool[rng.randrange(len(pool))]
        src_key = canonical(src)
        record = None
        if label is None:
            tgt = pool[rng.randrange(len(pool))]
            if not planner.reachable(src, tgt):
                pair = (src_key, canonical(tgt))
                if pair not in seen_pairs:
                    seen_pairs.add(pair)
                    record = PairRecord(src, tgt, (), None)
        elif label == 0:
            pair = (src_key, src_key)
            if pair not in seen_pairs:
                seen_pairs.add(pair)
                record = PairRecord(src, src, ((),), 0)
        else:
            options = distance_buckets(src, src_key).get(label)
            if options:
                tgt_part = options[rng.randrange(len(options))]
                pair = (src_key, tgt_part)
                if pair not in seen_pairs:
                    seen_pairs.add(pair)
                    tgt = parse_config(tgt_part)
                    result = planner.plan(src, tgt, horizon=horizon, max_plans=max_plans)
                    if result.min_length != label:
                        raise RuntimeError("distance map and plan disagree")
                    goal = stacks_key(tgt)
                    for p in result.plans:
                        if stacks_key(run(src, p)) != goal:
                            raise RuntimeError("stored plan failed verification")
                    record = PairRecord(src, tgt, result.plans, label, result.truncated)
        if record is not None:
            records.append(record)
            achieved[label] += 1
            pending.remove(label)
            if not pending:
                break
        else:
            idx += 1
        if pending:
            idx %= len(pending)
    return records


def split_by_length(records: Sequence[PairRecord], ell: int) -> SplitSpec:
    """Train keeps labels <= ell (no-sequence records included); test keeps
    labels >= ell + 1."""
    if not 1 <= ell <= 7:
        raise ValueError("ell must be in 1..7")
    spec = SplitSpec(ell)
    for r in records:
        if r.label is None or r.label <= ell:
            spec.train.append(r)
        else:
            spec.test.append(r)
    return spec


# ---------------------------------------------------------------------------
# Recognition-noise emulation
# ---------------------------------------------------------------------------

def perturb_config(cfg: Configuration, p: float, rng: random.Random) -> Configuration:
    """With probability p apply one validity-preserving corruption: recolor a
    block to an unused color, or relocate one free block legally."""
    if not 0 <= p <= 1:
        raise ValueError("p must be in [0, 1]")
    if rng.random() >= p:
        return cfg
    unused = sorted(set(COLORS) - cfg.stack_colors - cfg.out, key=lambda c: c.value)
    options: list[tuple] = []
    for si, stack in enumerate(cfg.stacks):
        for hi in range(len(stack)):
            for c in unused:
                options.append(("recolor", si, hi, c))
    for subject, dest in legal_moves(cfg):
        options.append(("move", subject, dest))
    if not options:
        return cfg
    choice = options[rng.randrange(len(options))]
    if choice[0] == "recolor":
        _, si, hi, c = choice
        stacks = [list(s) for s in cfg.stacks]
        stacks[si][hi] = c
        return Configuration(tuple(tuple(s) for s in stacks), cfg.out)
    _, subject, dest = choice
    return apply_move(cfg, Move(subject, dest, 0))


# ---------------------------------------------------------------------------
# Record files
# ---------------------------------------------------------------------------

_MOVE_ATOM = re.compile(r"move\([^()]*\)")


def _split_plan(chunk: str, lineno: int) -> list[str]:
    atoms = _MOVE_ATOM.findall(chunk)
    if ",".join(atoms) != chunk:
        raise RecordError(f"malformed plan {chunk!r}", lineno)
    return atoms


def _format_plans(plans: tuple[MoveSequence, ...]) -> str:
    return ";".join(",".join(format_move(m) for m in p) for p in plans)


def write_records(path, records: Sequence[PairRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for r in records:
            label = "none" if r.label is None else str(r.label)
            fields = [format_config(r.src), format_config(r.tgt), label, _format_plans(r.plans)]
            if r.truncated:
                fields.append("truncated")
            fh.write("\t".join(fields) + "\n")


def read_records(path) -> list[PairRecord]:
    records: list[PairRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) not in (4, 5):
                raise RecordError(f"expected 4 or 5 tab-separated fields, got {len(fields)}", lineno)
            try:
                src = parse_config(fields[0])
                tgt = parse_config(fields[1])
            except ValueError as exc:
                raise RecordError(str(exc), lineno) from None
            if fields[2] == "none":
                label = None
            else:
                try:
                    label = int(fields[2])
                except ValueError:
                    raise RecordError(f"bad label {fields[2]!r}", lineno) from None
            if label is None:
                plans: tuple[MoveSequence, ...] = ()
            elif label == 0:
                plans = ((),)
            else:
                try:
                    plans = tuple(
                        tuple(parse_move(tok) for tok in _split_plan(chunk, lineno))
                        for chunk in fields[3].split(";")
                        if chunk
                    )
                except ValueError as exc:
                    raise RecordError(str(exc), lineno) from None
                if not plans or any(len(p) != label for p in plans):
                    raise RecordError("plan lengths disagree with the label", lineno)
            truncated = len(fields) == 5 and fields[4] == "truncated"
            records.append(PairRecord(src, tgt, plans, label, truncated))
    return records
