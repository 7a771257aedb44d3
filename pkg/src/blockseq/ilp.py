"""Rule induction over move effects, and planning with the induced theory.

The hypothesis language is tiny on purpose: clauses ``head :- body`` where
the head is a next-step state atom (on/ontable/out/free over variables X, Y),
the body holds at most two current-step atoms (state atoms or the action
atoms move/move_table/move_out), and every head variable occurs in the body.
That is just enough to express every true effect of a move.

Induction is greedy set cover: positives already entailed by the fixed
background knowledge (inertia for untouched blocks, freeness by definition)
need no clause; the remaining positives are covered by repeatedly picking the
clause that covers the most of them while covering no negative example.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Iterable, Sequence

from . import planner
from .logic import action_atom, config_facts, legal_moves
from .model import (
    COLORS,
    Color,
    Configuration,
    InvalidConfiguration,
    Move,
    MoveSequence,
    color_from_letter,
)

VARS = ("X", "Y")
STATE_PREDS = (("on", 2), ("ontable", 1), ("out", 1), ("free", 1))
ACTION_PREDS = (("move", 2), ("move_table", 1), ("move_out", 1))
_PRED_ORDER = {name: i for i, (name, _) in enumerate(STATE_PREDS + ACTION_PREDS)}


class TheoryError(Exception):
    """The theory's predictions do not assemble into a valid configuration."""


class IncompleteTheoryError(Exception):
    """Greedy cover stalled; carries the positives left uncovered."""

    def __init__(self, uncovered):
        self.uncovered = list(uncovered)
        super().__init__(f"{len(self.uncovered)} positive examples left uncovered")


@dataclass(frozen=True)
class Literal:
    """An atom schema over the variables X, Y.  Heads are read at t+1, body
    literals at t; the time tag is positional, not stored."""

    pred: str
    args: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.pred}({','.join(self.args)})"


@dataclass(frozen=True)
class Clause:
    head: Literal
    body: tuple[Literal, ...]

    def __str__(self) -> str:
        return format_clause(self)


@dataclass(frozen=True)
class Example:
    """One supervised fact: given the state atoms and the action atom at t,
    is ``atom`` true at t+1?"""

    facts: frozenset[tuple]
    action: tuple
    atom: tuple


@dataclass
class ExampleSet:
    positives: list[Example] = field(default_factory=list)
    negatives: list[Example] = field(default_factory=list)


@dataclass
class Theory:
    clauses: tuple[Clause, ...]

    def __str__(self) -> str:
        return "\n".join(format_clause(c) for c in self.clauses)


Transition = tuple[Configuration, Move, Configuration]


# ---------------------------------------------------------------------------
# Examples
# ---------------------------------------------------------------------------

def _scene_letters(cfg: Configuration) -> list[str]:
    letters = sorted(c.name for c in cfg.stack_colors | cfg.out)
    return letters


def _head_atoms(letters: Sequence[str]) -> Iterable[tuple]:
    for a in letters:
        yield ("ontable", a)
        yield ("out", a)
        yield ("free", a)
    for a, b in permutations(letters, 2):
        yield ("on", a, b)


def make_examples(transitions: Iterable[Transition]) -> ExampleSet:
    """Positive/negative next-state atoms for each observed transition,
    grounded over the blocks present in the scene (duplicates dropped)."""
    pos: set[Example] = set()
    neg: set[Example] = set()
    for cfg, move, nxt in transitions:
        facts = config_facts(cfg)
        action = action_atom(move)
        truths = config_facts(nxt)
        for atom in _head_atoms(_scene_letters(cfg)):
            ex = Example(facts, action, atom)
            (pos if atom in truths else neg).add(ex)
    def order(ex: Example):
        return (ex.atom, ex.action, tuple(sorted(ex.facts)))
    return ExampleSet(sorted(pos, key=order), sorted(neg, key=order))


# ---------------------------------------------------------------------------
# Hypothesis space
# ---------------------------------------------------------------------------

def _arg_choices(arity: int) -> list[tuple[str, ...]]:
    if arity == 1:
        return [(v,) for v in VARS]
    return [p for p in permutations(VARS, 2)]


def _rename(clause: Clause) -> Clause:
    """Canonical variable naming: first occurrence (head first, body in sorted
    order) becomes X, the next Y."""
    body = tuple(sorted(clause.body, key=lambda l: (_PRED_ORDER[l.pred], l.args)))
    mapping: dict[str, str] = {}
    for v in clause.head.args + tuple(a for lit in body for a in lit.args):
        if v not in mapping:
            mapping[v] = VARS[len(mapping)]
    def sub(lit: Literal) -> Literal:
        return Literal(lit.pred, tuple(mapping[a] for a in lit.args))
    return Clause(sub(clause.head), tuple(sorted((sub(l) for l in body),
                                                 key=lambda l: (_PRED_ORDER[l.pred], l.args))))


def enumerate_clauses(max_body: int = 2) -> list[Clause]:
    """Every range-restricted clause of the language, deduplicated up to
    variable renaming, shortest bodies first, in a fixed deterministic order."""
    body_pool = [
        Literal(pred, args)
        for pred, arity in STATE_PREDS + ACTION_PREDS
        for args in _arg_choices(arity)
    ]
    heads = [
        Literal(pred, args)
        for pred, arity in STATE_PREDS
        for args in _arg_choices(arity)
    ]
    seen: set[Clause] = set()
    result: list[Clause] = []
    for size in range(1, max_body + 1):
        for head in heads:
            for body in combinations(body_pool, size):
                body_vars = {a for lit in body for a in lit.args}
                if not set(head.args) <= body_vars:
                    continue
                clause = _rename(Clause(head, body))
                if clause in seen:
                    continue
                seen.add(clause)
                result.append(clause)
    result.sort(key=lambda c: (len(c.body), _PRED_ORDER[c.head.pred], c.head.args,
                               tuple((_PRED_ORDER[l.pred], l.args) for l in c.body)))
    return result


# ---------------------------------------------------------------------------
# Coverage and induction
# ---------------------------------------------------------------------------

def _covers(clause: Clause, ex: Example) -> bool:
    """Does some grounding of the clause derive ex.atom from ex.facts+action?"""
    if clause.head.pred != ex.atom[0] or len(clause.head.args) != len(ex.atom) - 1:
        return False
    theta = {}
    for var, const in zip(clause.head.args, ex.atom[1:]):
        if theta.setdefault(var, const) != const:
            return False
    free = [v for v in VARS if v not in theta and any(v in l.args for l in clause.body)]
    letters = sorted({a for fact in ex.facts for a in fact[1:]} | set(ex.action[1:]))

    def body_holds(binding: dict) -> bool:
        for lit in clause.body:
            ground = (lit.pred,) + tuple(binding[a] for a in lit.args)
            if ground != ex.action and ground not in ex.facts:
                return False
        return True

    if not free:
        return body_holds(theta)
    for c in letters:
        if body_holds({**theta, free[0]: c}):
            return True
    return False


def _background_entails(ex: Example) -> bool:
    """Inertia carries every position fact of an unmoved block; freeness is
    definitional and never needs a learned clause."""
    if ex.atom[0] == "free":
        return True
    subject = ex.action[1]
    return ex.atom[1] != subject and ex.atom in ex.facts


def induce(examples: ExampleSet, clauses: Sequence[Clause] | None = None) -> Theory:
    """Greedy cover of the positives that background knowledge does not already
    entail; candidate clauses must cover no negative example."""
    if not examples.positives:
        raise ValueError("cannot induce from an empty positive set")
    if clauses is None:
        clauses = enumerate_clauses()
    required = [ex for ex in examples.positives if not _background_entails(ex)]
    cover_sets = [frozenset(i for i, ex in enumerate(required) if _covers(c, ex)) for c in clauses]
    rejects_negative: dict[int, bool] = {}

    def clause_is_safe(ci: int) -> bool:
        cached = rejects_negative.get(ci)
        if cached is None:
            cached = any(_covers(clauses[ci], ex) for ex in examples.negatives)
            rejects_negative[ci] = cached
        return not cached

    uncovered = set(range(len(required)))
    chosen: list[Clause] = []
    while uncovered:
        best_ci, best_gain = None, 0
        for ci, cs in enumerate(cover_sets):
            gain = len(cs & uncovered)
            if gain > best_gain and clause_is_safe(ci):
                best_ci, best_gain = ci, gain
        if best_ci is None:
            raise IncompleteTheoryError(required[i] for i in sorted(uncovered))
        chosen.append(clauses[best_ci])
        uncovered -= cover_sets[best_ci]
    return Theory(tuple(chosen))


def transitions_from_records(records, max_transitions: int | None = None) -> list[Transition]:
    """Replay stored plans into (state, move, next state) training transitions.

    Records are interleaved (first transition of every record, then second,
    ...) so a transition cap keeps the full variety of the record set instead
    of exhausting the first records only."""
    from itertools import zip_longest

    from .logic import apply_move

    streams: list[list[Transition]] = []
    for r in records:
        steps: list[Transition] = []
        for plan in r.plans:
            state = r.src
            for move in plan:
                nxt = apply_move(state, move)
                steps.append((state, move, nxt))
                state = nxt
        if steps:
            streams.append(steps)
    out: list[Transition] = []
    for layer in zip_longest(*streams):
        for item in layer:
            if item is not None:
                out.append(item)
                if max_transitions is not None and len(out) >= max_transitions:
                    return out
    return out


# ---------------------------------------------------------------------------
# Prediction with a theory
# ---------------------------------------------------------------------------

def _derived_atoms(theory: Theory, facts: frozenset, action: tuple, letters: list[str]) -> set[tuple]:
    derived: set[tuple] = set()
    for clause in theory.clauses:
        vars_used = sorted({a for lit in (clause.head,) + clause.body for a in lit.args})
        for binding_vals in product(letters, repeat=len(vars_used)):
            binding = dict(zip(vars_used, binding_vals))
            ok = True
            for lit in clause.body:
                ground = (lit.pred,) + tuple(binding[a] for a in lit.args)
                if ground != action and ground not in facts:
                    ok = False
                    break
            if ok:
                head = (clause.head.pred,) + tuple(binding[a] for a in clause.head.args)
                derived.add(head)
    return derived


def predict_next(theory: Theory, cfg: Configuration, move: Move) -> Configuration:
    """Next configuration per the induced effect clauses plus background
    inertia.  Stacks come back in canonical order (facts carry no left-right
    layout).  Raises TheoryError when the derived facts are inconsistent or
    leave the moved block's position undetermined."""
    facts = config_facts(cfg)
    action = action_atom(move)
    letters = _scene_letters(cfg)
    derived = _derived_atoms(theory, facts, action, letters)

    def position_of(block: str, atoms: Iterable[tuple]) -> list[tuple]:
        return [a for a in atoms if a[0] in ("on", "ontable", "out") and a[1] == block]

    positions: dict[str, tuple] = {}
    for block in letters:
        effect = sorted(set(position_of(block, derived)))
        if len(effect) > 1:
            raise TheoryError(f"conflicting positions for {block}: {effect}")
        if effect:
            positions[block] = effect[0]
        else:
            if block == move.subject.name:
                raise TheoryError(f"theory leaves moved block {block} unplaced")
            carried = position_of(block, facts)
            positions[block] = carried[0]

    out = frozenset(color_from_letter(b) for b, a in positions.items() if a[0] == "out")
    above: dict[str, str] = {}
    for block, atom in positions.items():
        if atom[0] == "on":
            support = atom[2]
            if support in above:
                raise TheoryError(f"both {above[support]} and {block} sit on {support}")
            above[support] = block
    stacks = []
    placed = set(b for b, a in positions.items() if a[0] == "out")
    for block, atom in sorted(positions.items()):
        if atom[0] != "ontable":
            continue
        stack = [block]
        while stack[-1] in above:
            stack.append(above[stack[-1]])
        stacks.append(tuple(color_from_letter(b) for b in stack))
        placed.update(stack)
    if placed != set(letters):
        raise TheoryError(f"blocks {sorted(set(letters) - placed)} are floating or cyclic")
    stacks.sort(key=lambda s: tuple(c.name for c in s))
    try:
        return Configuration(tuple(stacks), out)
    except InvalidConfiguration as exc:
        raise TheoryError(str(exc)) from None


class TheoryPlanner:
    """Optimal search identical to the exact planner, but stepping with the
    induced theory instead of the built-in transition engine.  Successor
    computations are cached across queries."""

    def __init__(self, theory: Theory):
        self.theory = theory
        self._reps: dict[str, Configuration] = {}
        self._succs: dict[str, tuple] = {}

    def _intern(self, cfg: Configuration) -> str:
        from .model import canonical

        key = canonical(cfg)
        self._reps.setdefault(key, cfg)
        return key

    def _successors(self, key: str):
        cached = self._succs.get(key)
        if cached is not None:
            return cached
        cfg = self._reps[key]
        edges = []
        for subject, dest in legal_moves(cfg):
            nxt = predict_next(self.theory, cfg, Move(subject, dest, 0))
            edges.append(((subject, dest), self._intern(nxt)))
        result = tuple(edges)
        self._succs[key] = result
        return result

    def plan(
        self,
        src: Configuration,
        tgt: Configuration,
        horizon: int | None = None,
        max_plans: int | None = None,
    ) -> planner.PlanResult:
        return planner.search_plans(
            src, tgt, self._successors, self._intern(src), horizon, max_plans
        )


def plan_with_theory(
    theory: Theory,
    src: Configuration,
    tgt: Configuration,
    horizon: int | None = None,
    max_plans: int | None = None,
) -> planner.PlanResult:
    return TheoryPlanner(theory).plan(src, tgt, horizon=horizon, max_plans=max_plans)


# ---------------------------------------------------------------------------
# Theory files
# ---------------------------------------------------------------------------

_ATOM_RE = re.compile(r"(\w+)\(([^()]*)\)")


def format_clause(clause: Clause) -> str:
    head = f"{clause.head.pred}({','.join(clause.head.args)},t+1)"
    body = ", ".join(f"{l.pred}({','.join(l.args)},t)" for l in clause.body)
    return f"{head} :- {body}."


def parse_clause(text: str) -> Clause:
    t = text.strip()
    if not t.endswith("."):
        raise ValueError(f"clause must end with '.': {text!r}")
    head_text, sep, body_text = t[:-1].partition(":-")
    if not sep:
        raise ValueError(f"clause needs ':-': {text!r}")

    def read(atom_text: str, tag: str) -> Literal:
        m = _ATOM_RE.fullmatch(atom_text.strip())
        if not m:
            raise ValueError(f"bad atom {atom_text!r}")
        pred, raw = m.group(1), [a.strip() for a in m.group(2).split(",")]
        if raw[-1] != tag:
            raise ValueError(f"atom {atom_text!r} must carry time tag {tag}")
        args = tuple(raw[:-1])
        if pred not in _PRED_ORDER or any(a not in VARS for a in args):
            raise ValueError(f"unknown predicate or variable in {atom_text!r}")
        return Literal(pred, args)

    head = read(head_text, "t+1")
    body = tuple(read(part, "t") for part in body_text.split(", ") if part.strip())
    return Clause(head, body)


def save_theory(theory: Theory, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for clause in theory.clauses:
            fh.write(format_clause(clause) + "\n")


def load_theory(path) -> Theory:
    clauses = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            try:
                clauses.append(parse_clause(line))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
    return Theory(tuple(clauses))
