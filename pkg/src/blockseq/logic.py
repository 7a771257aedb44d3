"""Move legality and the deterministic transition semantics.

Encodes the domain rules: only free blocks move, nothing lands on a covered
block, out-of-scene blocks are gone for good, untouched blocks stay put, one
move per time step.
"""

from __future__ import annotations

from enum import Enum

from .model import (
    OUT,
    TABLE,
    Color,
    Configuration,
    Dest,
    Move,
    MoveSequence,
)


class Violation(Enum):
    SUBJECT_MISSING = "SubjectMissing"
    SUBJECT_OUT = "SubjectOut"
    SUBJECT_NOT_FREE = "SubjectNotFree"
    DEST_MISSING = "DestMissing"
    DEST_OUT = "DestOut"
    DEST_NOT_FREE = "DestNotFree"
    SELF_MOVE = "SelfMove"


class TransitionError(Exception):
    """An illegal move; ``kind`` names the violated rule."""

    def __init__(self, kind: Violation, move: Move, step: int | None = None):
        self.kind = kind
        self.move = move
        self.step = step
        at = f" at step {step}" if step is not None else ""
        super().__init__(f"{kind.value}: {move}{at}")


def is_free(cfg: Configuration, x: Color) -> bool:
    """True iff x is the top block of some stack (absent/out blocks are not free)."""
    return any(stack[-1] is x for stack in cfg.stacks)


def check_move(cfg: Configuration, subject: Color, dest: Dest) -> Violation | None:
    """Why (subject -> dest) is illegal in cfg, or None when it is legal."""
    if dest == subject:
        return Violation.SELF_MOVE
    if subject in cfg.out:
        return Violation.SUBJECT_OUT
    if subject not in cfg.stack_colors:
        return Violation.SUBJECT_MISSING
    if not is_free(cfg, subject):
        return Violation.SUBJECT_NOT_FREE
    if isinstance(dest, Color):
        if dest in cfg.out:
            return Violation.DEST_OUT
        if dest not in cfg.stack_colors:
            return Violation.DEST_MISSING
        if not is_free(cfg, dest):
            return Violation.DEST_NOT_FREE
    return None


def is_legal(cfg: Configuration, m: Move) -> bool:
    return check_move(cfg, m.subject, m.dest) is None


def legal_moves(cfg: Configuration) -> list[tuple[Color, Dest]]:
    """All legal (subject, dest) pairs, ordered by subject id then destination
    (colors by id, table, out).  Moving a lone block to the table is a no-op
    under relational equality and is omitted."""
    free = [stack[-1] for stack in cfg.stacks]
    free_set = set(free)
    singles = {stack[0] for stack in cfg.stacks if len(stack) == 1}
    moves: list[tuple[Color, Dest]] = []
    for subject in sorted(free_set, key=lambda c: c.value):
        for dest in sorted(free_set - {subject}, key=lambda c: c.value):
            moves.append((subject, dest))
        if subject not in singles:
            moves.append((subject, TABLE))
        moves.append((subject, OUT))
    return moves


def apply_move(cfg: Configuration, m: Move) -> Configuration:
    """Next configuration after one move (the transition function).

    The subject leaves its stack (an emptied stack disappears); it lands on
    top of the destination block, as a new rightmost stack on the table, or
    in the out set.  Everything else is untouched.
    """
    kind = check_move(cfg, m.subject, m.dest)
    if kind is not None:
        raise TransitionError(kind, m)
    stacks = [list(s) for s in cfg.stacks]
    for s in stacks:
        if s[-1] is m.subject:
            s.pop()
            break
    stacks = [s for s in stacks if s]
    out = cfg.out
    if m.dest == OUT:
        out = out | {m.subject}
    elif m.dest == TABLE:
        stacks.append([m.subject])
    else:
        for s in stacks:
            if s[-1] is m.dest:
                s.append(m.subject)
                break
    return Configuration(tuple(tuple(s) for s in stacks), out)


def run(cfg: Configuration, seq: MoveSequence) -> Configuration:
    """Fold apply_move over a sequence; TransitionError carries the step index."""
    state = cfg
    for i, m in enumerate(seq):
        try:
            state = apply_move(state, m)
        except TransitionError as exc:
            raise TransitionError(exc.kind, m, step=i) from None
    return state


# ---------------------------------------------------------------------------
# Ground facts (shared with the rule-induction module)
# ---------------------------------------------------------------------------

def config_facts(cfg: Configuration) -> frozenset[tuple]:
    """State atoms over letters: on(a,b), ontable(a), out(a), free(a)."""
    facts: set[tuple] = set()
    for stack in cfg.stacks:
        facts.add(("ontable", stack[0].name))
        for below, above in zip(stack, stack[1:]):
            facts.add(("on", above.name, below.name))
        facts.add(("free", stack[-1].name))
    for c in cfg.out:
        facts.add(("out", c.name))
    return frozenset(facts)


def action_atom(m: Move) -> tuple:
    if m.dest == TABLE:
        return ("move_table", m.subject.name)
    if m.dest == OUT:
        return ("move_out", m.subject.name)
    return ("move", m.subject.name, m.dest.name)
