"""Goal-conditioned tabular Q-learning.

State = (canonical current configuration, canonical target structure); actions
are the legal moves of the current configuration.  Reaching the target's
on-table structure pays +1 and ends the episode; every other step costs 0.01.
Horizon is 8 moves, matching the longest minimal plan in the domain.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from . import planner
from .dataset import PairRecord
from .model import (
    OUT,
    TABLE,
    Color,
    Configuration,
    Dest,
    Move,
    MoveSequence,
    color_from_letter,
    stacks_key,
)

Action = tuple[Color, Dest]

GOAL_REWARD = 1.0
STEP_REWARD = -0.01
HORIZON = 8


@dataclass
class QTable:
    """Q-values keyed by ((state key, goal key), action); only actions legal
    in the keyed state are ever stored."""

    q: dict[tuple[str, str], dict[Action, float]] = field(default_factory=dict)
    alpha: float = 0.1
    gamma: float = 0.9

    def __len__(self) -> int:
        return sum(len(v) for v in self.q.values())


def _goal_key(tgt: Configuration) -> str:
    return stacks_key(tgt)


def _at_goal(state_key: str, goal: str) -> bool:
    return state_key.split(";", 1)[0] == goal


def train(
    records: Sequence[PairRecord],
    episodes: int,
    alpha: float = 0.1,
    gamma: float = 0.9,
    eps_start: float = 1.0,
    eps_end: float = 0.05,
    horizon: int = HORIZON,
    seed: int = 0,
) -> QTable:
    """Epsilon-greedy Q-learning over the given pairs (unreachable records are
    skipped).  Epsilon anneals linearly across episodes; fully deterministic
    for a fixed seed."""
    pairs = [(r.src, r.tgt) for r in records if r.label is not None]
    table = QTable(alpha=alpha, gamma=gamma)
    if not pairs or episodes <= 0:
        return table
    rng = random.Random(seed)
    for ep in range(episodes):
        frac = ep / (episodes - 1) if episodes > 1 else 1.0
        eps = eps_start + (eps_end - eps_start) * frac
        src, tgt = pairs[rng.randrange(len(pairs))]
        goal = _goal_key(tgt)
        state = planner.intern_config(src)
        for _ in range(horizon):
            if _at_goal(state, goal):
                break
            edges = planner.successors(state)
            if not edges:
                break
            entry = table.q.get((state, goal))
            if entry and rng.random() >= eps:
                best = max(entry.values())
                action, nxt = next(e for e in edges if entry.get(e[0], float("-inf")) == best)
            else:
                action, nxt = edges[rng.randrange(len(edges))]
            done = _at_goal(nxt, goal)
            reward = GOAL_REWARD if done else STEP_REWARD
            q_next = 0.0
            if not done:
                nxt_entry = table.q.get((nxt, goal))
                if nxt_entry:
                    q_next = max(nxt_entry.values())
            slot = table.q.setdefault((state, goal), {})
            old = slot.get(action, 0.0)
            slot[action] = old + alpha * (reward + gamma * q_next - old)
            state = nxt
    return table


def rollout(
    table: QTable,
    src: Configuration,
    tgt: Configuration,
    horizon: int = HORIZON,
) -> MoveSequence | None:
    """Greedy policy execution.  Returns None when the policy has no value for
    a state it reaches (nothing was learned there); ties break toward the
    legal-move enumeration order."""
    goal = _goal_key(tgt)
    state = planner.intern_config(src)
    moves: list[Move] = []
    for t in range(horizon):
        if _at_goal(state, goal):
            break
        entry = table.q.get((state, goal))
        if not entry:
            return None
        best = max(entry.values())
        for action, nxt in planner.successors(state):
            if entry.get(action, float("-inf")) == best:
                moves.append(Move(action[0], action[1], t))
                state = nxt
                break
    return tuple(moves)


def _action_text(action: Action) -> str:
    subject, dest = action
    return f"{subject.name}>{dest if isinstance(dest, str) else dest.name}"


def _parse_action(text: str) -> Action:
    subj, _, dtok = text.partition(">")
    dest: Dest = dtok if dtok in (TABLE, OUT) else color_from_letter(dtok)
    return (color_from_letter(subj), dest)


def save_table(table: QTable, path) -> None:
    """Line format: '<state-key>>><goal-key> TAB action TAB q-value'."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for (state, goal), actions in sorted(table.q.items()):
            for action in sorted(actions, key=lambda a: (a[0].value, str(a[1]))):
                fh.write(f"{state}>>{goal}\t{_action_text(action)}\t{actions[action]!r}\n")


def load_table(path) -> QTable:
    table = QTable()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line:
                continue
            try:
                key_text, action_text, value_text = line.split("\t")
                state, _, goal = key_text.partition(">>")
                action = _parse_action(action_text)
                value = float(value_text)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            table.q.setdefault((state, goal), {})[action] = value
    return table
