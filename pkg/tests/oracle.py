"""Self-contained brute-force oracle used to cross-check the planner.

Deliberately independent of the package's transition engine: states are
sorted tuples of letter strings (each string one stack, bottom to top), moves
are (subject letter, destination token) pairs, and minimal plans are found by
enumerating the *entire* action tree level by level.
"""

from itertools import combinations, permutations

TABLE = "table"
OUT = "out"
LETTERS = "RGBYOP"


def state_of(stacks) -> tuple[str, ...]:
    return tuple(sorted(stacks))


def oracle_moves(state) -> list[tuple[str, str]]:
    free = sorted(s[-1] for s in state)
    singles = {s for s in state if len(s) == 1}
    moves = []
    for subj in free:
        for dest in free:
            if dest != subj:
                moves.append((subj, dest))
        if subj not in singles:
            moves.append((subj, TABLE))
        moves.append((subj, OUT))
    return moves


def oracle_apply(state, move) -> tuple[str, ...]:
    subj, dest = move
    stacks = [s[:-1] if s.endswith(subj) else s for s in state]
    stacks = [s for s in stacks if s]
    if dest == TABLE:
        stacks.append(subj)
    elif dest != OUT:
        stacks = [s + subj if s.endswith(dest) else s for s in stacks]
    return state_of(stacks)


def reachable_states(src_state) -> set[tuple[str, ...]]:
    """Closure under moves (plain state-level search, no plan bookkeeping)."""
    seen = {src_state}
    frontier = [src_state]
    while frontier:
        nxt = []
        for st in frontier:
            for mv in oracle_moves(st):
                new = oracle_apply(st, mv)
                if new not in seen:
                    seen.add(new)
                    nxt.append(new)
        frontier = nxt
    return seen


def all_minimal_plans(src_state, max_depth: int = 10):
    """Enumerate every legal action sequence breadth-first and record, for
    each reachable state, its minimal depth and *all* sequences hitting it at
    that depth.  Returns {state: (depth, set of move tuples)}."""
    remaining = reachable_states(src_state)
    found: dict[tuple[str, ...], tuple[int, set]] = {}
    level = [(src_state, ())]
    depth = 0
    found[src_state] = (0, {()})
    remaining.discard(src_state)
    while remaining and depth < max_depth:
        depth += 1
        nxt = []
        for st, seq in level:
            for mv in oracle_moves(st):
                new_state = oracle_apply(st, mv)
                new_seq = seq + (mv,)
                nxt.append((new_state, new_seq))
                if new_state in remaining:
                    found.setdefault(new_state, (depth, set()))[1].add(new_seq)
        for st in [s for s in found if s in remaining]:
            remaining.discard(st)
        level = nxt
    if remaining:
        raise AssertionError(f"oracle hit depth cap with {len(remaining)} states unresolved")
    return found


def enumerate_states(max_blocks: int):
    """All distinct states with at most max_blocks blocks, independently of
    the package's enumerator."""
    states = set()
    for k in range(max_blocks + 1):
        for subset in combinations(LETTERS, k):
            for perm in permutations(subset):
                word = "".join(perm)
                for cuts in _cuts(len(word)):
                    stacks = [word[a:b] for a, b in cuts]
                    states.add(state_of(stacks))
    return sorted(states)


def _cuts(n: int):
    if n == 0:
        yield []
        return
    for mask in range(1 << (n - 1)):
        cuts = []
        start = 0
        for i in range(n - 1):
            if mask >> i & 1:
                cuts.append((start, i + 1))
                start = i + 1
        cuts.append((start, n))
        yield cuts
