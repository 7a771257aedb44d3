"""Symbolic blocksworld states, moves, and their bit-level encodings.

The scene vocabulary is fixed: six block colors, at most five blocks on the
table at once, and moves that relocate one free block onto another free
block, onto the table, or out of the scene.  Everything here is an immutable
value; all functions are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Union

import numpy as np


class Color(Enum):
    """The six block colors.  Ids 1..6 double as 3-bit codes (000 = empty)."""

    R = 1
    G = 2
    B = 3
    Y = 4
    O = 5
    P = 6

    @property
    def code_bits(self) -> tuple[int, int, int]:
        """3-bit binary code of the id, most significant bit first."""
        v = self.value
        return ((v >> 2) & 1, (v >> 1) & 1, v & 1)

    def __repr__(self) -> str:  # keeps test output readable
        return self.name


COLORS: tuple[Color, ...] = tuple(Color)
LETTERS = "".join(c.name for c in COLORS)

TABLE = "table"
OUT = "out"

#: A move destination: another block, the table, or out of the scene.
Dest = Union[Color, str]

MAX_BLOCKS = 5
MAX_STACKS = 5
MAX_MOVES = 8
GRID = 5
MOVE_BITS = 16
SEQ_BITS = MOVE_BITS * MAX_MOVES


class InvalidConfiguration(ValueError):
    pass


class InvalidMove(ValueError):
    pass


class EncodingError(ValueError):
    pass


class ParseError(ValueError):
    """Malformed configuration/move text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


def color_from_letter(letter: str) -> Color:
    try:
        return Color[letter]
    except KeyError:
        raise ValueError(f"unknown color letter {letter!r}") from None


@dataclass(frozen=True)
class Configuration:
    """Ordered stacks of colored blocks plus the set of out-of-scene blocks.

    ``stacks`` is left-to-right, each stack bottom-to-top.  No color appears
    twice, stacks are non-empty, and at most five blocks / five stacks are
    on the table.
    """

    stacks: tuple[tuple[Color, ...], ...] = ()
    out: frozenset[Color] = field(default_factory=frozenset)

    def __post_init__(self):
        seen: set[Color] = set()
        for stack in self.stacks:
            if not stack:
                raise InvalidConfiguration("empty stack")
            for c in stack:
                if not isinstance(c, Color):
                    raise InvalidConfiguration(f"not a color: {c!r}")
                if c in seen:
                    raise InvalidConfiguration(f"duplicate color {c.name}")
                seen.add(c)
        for c in self.out:
            if c in seen:
                raise InvalidConfiguration(f"duplicate color {c.name}")
            seen.add(c)
        if len(self.stacks) > MAX_STACKS:
            raise InvalidConfiguration(f"more than {MAX_STACKS} stacks")
        if sum(len(s) for s in self.stacks) > MAX_BLOCKS:
            raise InvalidConfiguration(f"more than {MAX_BLOCKS} blocks on the table")

    @property
    def stack_colors(self) -> frozenset[Color]:
        return frozenset(c for stack in self.stacks for c in stack)

    def blocks(self) -> Iterator[Color]:
        """Blocks in bottom-to-top, left-to-right order (out blocks excluded)."""
        for stack in self.stacks:
            yield from stack


EMPTY = Configuration()


@dataclass(frozen=True)
class Move:
    """move(subject, dest, time): relocate ``subject`` at step ``time``."""

    subject: Color
    dest: Dest
    time: int = 0

    def __post_init__(self):
        if not isinstance(self.subject, Color):
            raise InvalidMove(f"subject must be a color, got {self.subject!r}")
        if self.dest not in (TABLE, OUT) and not isinstance(self.dest, Color):
            raise InvalidMove(f"bad destination {self.dest!r}")
        if self.dest == self.subject:
            raise InvalidMove("a block cannot be moved onto itself")
        if not 0 <= self.time < MAX_MOVES:
            raise InvalidMove(f"time {self.time} outside 0..{MAX_MOVES - 1}")


#: An event sequence: consecutive moves with times 0, 1, ... (at most 8).
MoveSequence = tuple[Move, ...]


def sequence(steps: Iterable[tuple[Color, Dest]]) -> MoveSequence:
    """Build a MoveSequence from (subject, dest) pairs, times assigned 0..n-1."""
    return tuple(Move(s, d, t) for t, (s, d) in enumerate(steps))


def validate_sequence(seq: MoveSequence) -> None:
    if len(seq) > MAX_MOVES:
        raise InvalidMove(f"sequence longer than {MAX_MOVES} moves")
    for t, m in enumerate(seq):
        if m.time != t:
            raise InvalidMove(f"move at index {t} carries time {m.time}")


# ---------------------------------------------------------------------------
# Canonical keys and the text grammar
# ---------------------------------------------------------------------------

def _stack_text(stack: tuple[Color, ...]) -> str:
    return ".".join(c.name for c in stack)


def _out_text(out: frozenset[Color]) -> str:
    return ".".join(c.name for c in sorted(out, key=lambda c: c.value))


def format_config(cfg: Configuration) -> str:
    """Inverse of parse_config.  Empty scene formats as '-'."""
    base = "|".join(_stack_text(s) for s in cfg.stacks) if cfg.stacks else "-"
    if cfg.out:
        base += ";out=" + _out_text(cfg.out)
    return base


def stacks_key(cfg: Configuration) -> str:
    """Order-free key of the on-table structure only (out set ignored)."""
    if not cfg.stacks:
        return "-"
    return "|".join(sorted(_stack_text(s) for s in cfg.stacks))


def canonical(cfg: Configuration, mode: str = "relational") -> str:
    """Canonical key: relational mode erases stack order, grid mode keeps it."""
    if mode == "relational":
        base = stacks_key(cfg)
    elif mode == "grid":
        base = "|".join(_stack_text(s) for s in cfg.stacks) if cfg.stacks else "-"
    else:
        raise ValueError(f"unknown canonical mode {mode!r}")
    if cfg.out:
        base += ";out=" + _out_text(cfg.out)
    return base


def parse_config(text: str) -> Configuration:
    """Parse 'R.G|B;out=Y' style text.  Raises ParseError with a position."""
    if not text:
        raise ParseError("empty configuration text", 0)
    cut = text.find(";")
    if cut >= 0:
        body, tail = text[:cut], text[cut:]
        if not tail.startswith(";out="):
            raise ParseError("expected ';out=' suffix", cut)
        out_text, out_base = tail[len(";out="):], cut + len(";out=")
    else:
        body, out_text, out_base = text, "", 0

    seen: dict[Color, int] = {}

    def read_color(token: str, pos: int) -> Color:
        if len(token) != 1 or token not in LETTERS:
            raise ParseError(f"expected a color letter, got {token!r}", pos)
        c = Color[token]
        if c in seen:
            raise ParseError(f"duplicate color {token}", pos)
        seen[c] = pos
        return c

    stacks: list[tuple[Color, ...]] = []
    if body != "-":
        pos = 0
        for seg in body.split("|"):
            stack = []
            for tok in seg.split("."):
                stack.append(read_color(tok, pos))
                pos += len(tok) + 1
            stacks.append(tuple(stack))
    else:
        pos = 2

    out: set[Color] = set()
    if cut >= 0:
        pos = out_base
        for tok in out_text.split("."):
            out.add(read_color(tok, pos))
            pos += len(tok) + 1

    try:
        return Configuration(tuple(stacks), frozenset(out))
    except InvalidConfiguration as exc:
        raise ParseError(str(exc), 0) from None


def format_move(m: Move) -> str:
    dest = m.dest if isinstance(m.dest, str) else m.dest.name
    return f"move({m.subject.name},{dest},{m.time})"


def parse_move(text: str) -> Move:
    t = text.strip()
    if not (t.startswith("move(") and t.endswith(")")):
        raise ParseError(f"not a move atom: {text!r}", 0)
    parts = t[len("move("):-1].split(",")
    if len(parts) != 3:
        raise ParseError(f"move atom needs 3 arguments: {text!r}", 0)
    subj = color_from_letter(parts[0].strip())
    dtok = parts[1].strip()
    dest: Dest = dtok if dtok in (TABLE, OUT) else color_from_letter(dtok)
    try:
        time = int(parts[2])
    except ValueError:
        raise ParseError(f"bad time in move atom: {text!r}", 0) from None
    return Move(subj, dest, time)


# ---------------------------------------------------------------------------
# Bit-level encodings
# ---------------------------------------------------------------------------

def encode_arrangement(cfg: Configuration) -> np.ndarray:
    """5x5 binary grid: grid[r][c] = 1 iff stack c holds a block at height r."""
    grid = np.zeros((GRID, GRID), dtype=np.uint8)
    for c, stack in enumerate(cfg.stacks):
        grid[: len(stack), c] = 1
    return grid


def encode_colors(cfg: Configuration) -> np.ndarray:
    """5 slots of 3-bit color codes, bottom-to-top then left-to-right."""
    slots = np.zeros((GRID, 3), dtype=np.uint8)
    for j, block in enumerate(cfg.blocks()):
        slots[j] = block.code_bits
    return slots


def decode_config(arr: np.ndarray, col: np.ndarray) -> Configuration:
    """Inverse of (encode_arrangement, encode_colors); out set comes back empty."""
    arr = np.asarray(arr)
    col = np.asarray(col)
    if arr.shape != (GRID, GRID) or col.shape != (GRID, 3):
        raise EncodingError(f"bad shapes {arr.shape} / {col.shape}")
    if not (np.isin(arr, (0, 1)).all() and np.isin(col, (0, 1)).all()):
        raise EncodingError("vectors must be binary")

    heights = arr.sum(axis=0)
    for c in range(GRID):
        h = int(heights[c])
        if not arr[:h, c].all() or arr[h:, c].any():
            raise EncodingError(f"column {c} violates gravity")
        if c > 0 and h > 0 and heights[c - 1] == 0:
            raise EncodingError(f"column {c} occupied but column {c - 1} empty")

    total = int(heights.sum())
    codes = [int(col[j, 0]) * 4 + int(col[j, 1]) * 2 + int(col[j, 2]) for j in range(GRID)]
    nonzero = sum(1 for v in codes if v)
    if nonzero != total:
        raise EncodingError(f"{total} grid blocks but {nonzero} color slots")
    if any(codes[j] == 0 for j in range(total)):
        raise EncodingError("empty color slot before the end of the block list")
    used = codes[:total]
    if any(v > len(COLORS) for v in used):
        raise EncodingError("color code out of range")
    if len(set(used)) != len(used):
        raise EncodingError("repeated color code")

    stacks, j = [], 0
    for c in range(GRID):
        h = int(heights[c])
        if h == 0:
            break
        stacks.append(tuple(Color(used[j + r]) for r in range(h)))
        j += h
    return Configuration(tuple(stacks), frozenset())


def config_bits(cfg: Configuration) -> np.ndarray:
    """40-bit flat encoding: arrangement grid (row-major) then color slots."""
    return np.concatenate([encode_arrangement(cfg).ravel(), encode_colors(cfg).ravel()])


def _dest_index(dest: Dest) -> int:
    if isinstance(dest, Color):
        return dest.value - 1
    return 6 if dest == TABLE else 7


def encode_move(m: Move) -> np.ndarray:
    """16 bits: one-hot subject in bits 0..7 (colors at 0..5), one-hot
    destination in bits 8..15 (colors at 0..5, table at 6, out at 7)."""
    bits = np.zeros(MOVE_BITS, dtype=np.uint8)
    bits[m.subject.value - 1] = 1
    bits[8 + _dest_index(m.dest)] = 1
    return bits


def encode_sequence(seq: MoveSequence) -> np.ndarray:
    """128 bits: slot t holds encode_move(seq[t]); unused slots stay zero."""
    validate_sequence(seq)
    bits = np.zeros(SEQ_BITS, dtype=np.uint8)
    for t, m in enumerate(seq):
        bits[t * MOVE_BITS : (t + 1) * MOVE_BITS] = encode_move(m)
    return bits


def decode_sequence(values) -> MoveSequence:
    """Decode 128 real-valued activations into a MoveSequence.

    Per slot the subject is the argmax of bits 0..5 and the destination the
    argmax of bits 8..15 (the subject's own position is skipped so the result
    is always a well-formed move); ties break toward the lowest index.  A slot
    whose maximum activation is below 0.5 ends the sequence.  Total function:
    any input decodes to something.
    """
    v = np.asarray(values, dtype=float).ravel()
    if v.size != SEQ_BITS:
        raise EncodingError(f"expected {SEQ_BITS} values, got {v.size}")
    slots = v.reshape(MAX_MOVES, MOVE_BITS)
    moves: list[Move] = []
    for t in range(MAX_MOVES):
        slot = slots[t]
        if float(slot.max()) < 0.5:
            break
        x = int(np.argmax(slot[:6]))
        ybits = slot[8:16].copy()
        ybits[x] = -np.inf
        y = int(np.argmax(ybits))
        dest: Dest = COLORS[y] if y < 6 else (TABLE if y == 6 else OUT)
        moves.append(Move(COLORS[x], dest, t))
    return tuple(moves)


def bits_to_hex(bits) -> str:
    """Serialize a bit vector as hex; bit 0 is the most significant bit."""
    b = np.asarray(bits).ravel()
    n = b.size
    if n % 4:
        raise EncodingError(f"bit count {n} not a multiple of 4")
    value = 0
    for bit in b:
        value = (value << 1) | int(bit)
    return f"{value:0{n // 4}x}"


def hex_to_bits(text: str, nbits: int) -> np.ndarray:
    if len(text) * 4 != nbits:
        raise EncodingError(f"{len(text)} hex digits cannot hold {nbits} bits")
    value = int(text, 16)
    return np.array([(value >> (nbits - 1 - i)) & 1 for i in range(nbits)], dtype=np.uint8)
