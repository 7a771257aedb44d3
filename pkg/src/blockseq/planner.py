"""Exact optimal planning: reachability plus enumeration of every
minimal-length move sequence between two configurations.

Layered breadth-first search over relationally-canonical states; per-state
predecessor sets make it possible to reconstruct all distinct shortest action
sequences, not just one.  The goal test compares on-table structure only:
targets say nothing about which blocks were dropped out of the scene.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import islice
from typing import Callable, Iterator

from .logic import apply_move, legal_moves
from .model import (
    Color,
    Configuration,
    Dest,
    Move,
    MoveSequence,
    canonical,
    stacks_key,
)

Action = tuple[Color, Dest]
SuccFn = Callable[[str], tuple[tuple[Action, str], ...]]

# Process-wide interning of states and their successor lists.  Successor sets
# depend only on the relational class, so any representative works.
_REPS: dict[str, Configuration] = {}
_SUCCS: dict[str, tuple[tuple[Action, str], ...]] = {}


def intern_config(cfg: Configuration) -> str:
    key = canonical(cfg)
    _REPS.setdefault(key, cfg)
    return key


def config_of(key: str) -> Configuration:
    return _REPS[key]


def successors(key: str) -> tuple[tuple[Action, str], ...]:
    """Outgoing (action, next-state-key) edges, in legal_moves order."""
    cached = _SUCCS.get(key)
    if cached is not None:
        return cached
    cfg = _REPS[key]
    edges = []
    for subject, dest in legal_moves(cfg):
        nxt = apply_move(cfg, Move(subject, dest, 0))
        edges.append(((subject, dest), intern_config(nxt)))
    result = tuple(edges)
    _SUCCS[key] = result
    return result


@dataclass
class PlanResult:
    status: str  # "plans" or "no-sequence"
    min_length: int | None
    plans: tuple[MoveSequence, ...]
    truncated: bool = False
    layer_sizes: tuple[int, ...] = ()

    @property
    def found(self) -> bool:
        return self.status == "plans"


NO_SEQUENCE = "no-sequence"
PLANS = "plans"


def reachable(src: Configuration, tgt: Configuration) -> bool:
    """Blocks never (re)enter the scene, so the target's on-table colors must
    all be on the table in the source."""
    return tgt.stack_colors <= src.stack_colors


def _stacks_part(key: str) -> str:
    return key.split(";", 1)[0]


def _bfs(
    start: str,
    goal_part: str,
    succ: SuccFn,
    horizon: int | None,
) -> tuple[list[str], dict[str, list[tuple[str, Action]]], int | None, tuple[int, ...]]:
    """Layered BFS; returns (goal states, predecessor sets, depth, layer sizes)."""
    if _stacks_part(start) == goal_part:
        return [start], {}, 0, (1,)
    dist: dict[str, int] = {start: 0}
    parents: dict[str, list[tuple[str, Action]]] = {}
    layer = [start]
    layer_sizes = [1]
    d = 0
    while layer and (horizon is None or d < horizon):
        nxt: list[str] = []
        for u in layer:
            for action, v in succ(u):
                seen = dist.get(v)
                if seen is None:
                    dist[v] = d + 1
                    parents[v] = [(u, action)]
                    nxt.append(v)
                elif seen == d + 1:
                    parents[v].append((u, action))
        d += 1
        layer = nxt
        layer_sizes.append(len(nxt))
        goals = [v for v in nxt if _stacks_part(v) == goal_part]
        if goals:
            return goals, parents, d, tuple(layer_sizes)
    return [], parents, None, tuple(layer_sizes)


def _iter_plans(
    goals: list[str],
    parents: dict[str, list[tuple[str, Action]]],
    start: str,
) -> Iterator[tuple[Action, ...]]:
    def walk(v: str) -> Iterator[tuple[Action, ...]]:
        if v == start:
            yield ()
            return
        for u, action in parents[v]:
            for prefix in walk(u):
                yield prefix + (action,)

    for g in goals:
        yield from walk(g)


def _materialize(
    goals: list[str],
    parents: dict[str, list[tuple[str, Action]]],
    start: str,
    max_plans: int | None,
) -> tuple[tuple[MoveSequence, ...], bool]:
    it = _iter_plans(goals, parents, start)
    if max_plans is None:
        raw = list(it)
        truncated = False
    else:
        raw = list(islice(it, max_plans + 1))
        truncated = len(raw) > max_plans
        raw = raw[:max_plans]
    plans = tuple(
        tuple(Move(s, dst, t) for t, (s, dst) in enumerate(actions)) for actions in raw
    )
    return plans, truncated


def search_plans(
    src: Configuration,
    tgt: Configuration,
    succ: SuccFn,
    start_key: str,
    horizon: int | None,
    max_plans: int | None,
) -> PlanResult:
    """Shared search core, parameterized over the transition relation."""
    if not reachable(src, tgt):
        return PlanResult(NO_SEQUENCE, None, ())
    goals, parents, depth, layer_sizes = _bfs(start_key, stacks_key(tgt), succ, horizon)
    if depth is None:
        return PlanResult(NO_SEQUENCE, None, (), layer_sizes=layer_sizes)
    plans, truncated = _materialize(goals, parents, start_key, max_plans)
    return PlanResult(PLANS, depth, plans, truncated, layer_sizes)


def plan(
    src: Configuration,
    tgt: Configuration,
    horizon: int | None = 8,
    max_plans: int | None = None,
) -> PlanResult:
    """All minimal-length sequences turning src's stacks into tgt's stacks.

    ``horizon=None`` searches the whole (finite) state space.  ``max_plans``
    caps how many sequences are materialized; the cap sets ``truncated``.
    """
    return search_plans(src, tgt, successors, intern_config(src), horizon, max_plans)


def min_plan_length(
    src: Configuration, tgt: Configuration, horizon: int | None = 8
) -> int | None:
    """plan(...).min_length without materializing any plan."""
    if not reachable(src, tgt):
        return None
    start = intern_config(src)
    goal = stacks_key(tgt)
    if _stacks_part(start) == goal:
        return 0
    dist = {start}
    layer = [start]
    d = 0
    while layer and (horizon is None or d < horizon):
        nxt = []
        for u in layer:
            for _, v in successors(u):
                if v not in dist:
                    dist.add(v)
                    if _stacks_part(v) == goal:
                        return d + 1
                    nxt.append(v)
        d += 1
        layer = nxt
    return None


def distance_map(src: Configuration, horizon: int | None = None) -> dict[str, int]:
    """Minimal plan length from src to every reachable on-table structure,
    keyed by stacks_key.  Insertion order is BFS (deterministic)."""
    start = intern_config(src)
    best: dict[str, int] = {_stacks_part(start): 0}
    seen = {start}
    layer = [start]
    d = 0
    while layer and (horizon is None or d < horizon):
        nxt = []
        for u in layer:
            for _, v in successors(u):
                if v not in seen:
                    seen.add(v)
                    best.setdefault(_stacks_part(v), d + 1)
                    nxt.append(v)
        d += 1
        layer = nxt
    return best
