"""Turn object-detection output for an image pair into block configurations,
so sequencers trained on the symbolic domain run on real scenes.

Detection files are line-delimited: label, x_min, y_min, x_max, y_max, score
(tab-separated, pixel coordinates, y growing downward).  A class-map file
assigns each label a block color, one 'label TAB letter' line per class.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Color, Configuration, color_from_letter


@dataclass(frozen=True)
class Detection:
    label: str
    box: tuple[float, float, float, float]  # x_min, y_min, x_max, y_max
    score: float

    def __post_init__(self):
        x0, y0, x1, y1 = self.box
        if not (x0 < x1 and y0 < y1):
            raise ValueError(f"degenerate box {self.box}")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")


class AmbiguityError(Exception):
    """Support structure is not a clean set of stacks; carries the pairs."""

    def __init__(self, message: str, pairs: list[tuple[str, str]]):
        self.pairs = pairs
        super().__init__(f"{message}: {pairs}")


def load_detections(path) -> list[Detection]:
    dets: list[Detection] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 6:
                raise ValueError(f"{path}:{lineno}: expected 6 fields, got {len(fields)}")
            try:
                det = Detection(
                    fields[0],
                    (float(fields[1]), float(fields[2]), float(fields[3]), float(fields[4])),
                    float(fields[5]),
                )
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            dets.append(det)
    return dets


def load_class_map(path) -> dict[str, Color]:
    mapping: dict[str, Color] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            try:
                label, letter = line.split("\t")
                color = color_from_letter(letter)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            if label in mapping:
                raise ValueError(f"{path}:{lineno}: duplicate class {label!r}")
            if color in mapping.values():
                raise ValueError(f"{path}:{lineno}: color {letter} mapped twice")
            mapping[label] = color
    return mapping


def _rests_on(a: Detection, b: Detection, overlap_frac: float, gap_frac: float) -> bool:
    ax0, _, ax1, ay1 = a.box
    bx0, by0, bx1, by1 = b.box
    overlap = min(ax1, bx1) - max(ax0, bx0)
    if overlap < overlap_frac * (ax1 - ax0):
        return False
    return abs(ay1 - by0) <= gap_frac * (by1 - by0)


def to_blocks(
    dets: list[Detection],
    class_map: dict[str, Color],
    score_threshold: float = 0.5,
    overlap_frac: float = 0.5,
    gap_frac: float = 0.1,
) -> Configuration:
    """Build a configuration from detections: A is on B when A overlaps B by at
    least ``overlap_frac`` of A's width and A's bottom edge sits within
    ``gap_frac`` of B's height from B's top edge.  Unsupported detections form
    table stacks ordered left to right.  Keeps at most the five best-scoring
    detections above the threshold."""
    kept = [d for d in dets if d.score >= score_threshold]
    kept.sort(key=lambda d: (-d.score, d.label, d.box))
    kept = kept[:5]
    for d in kept:
        if d.label not in class_map:
            raise ValueError(f"class {d.label!r} missing from the class map")
    colors = [class_map[d.label] for d in kept]
    if len(set(colors)) != len(colors):
        raise ValueError("two detections map to the same block color")

    support: dict[int, int] = {}
    for i, a in enumerate(kept):
        below = [j for j, b in enumerate(kept) if j != i and _rests_on(a, b, overlap_frac, gap_frac)]
        if len(below) > 1:
            raise AmbiguityError(
                "detection rests on several supports",
                [(a.label, kept[j].label) for j in below],
            )
        if below:
            support[i] = below[0]

    above: dict[int, int] = {}
    for child, parent in support.items():
        if parent in above:
            raise AmbiguityError(
                "two detections rest on one support",
                [(kept[above[parent]].label, kept[parent].label), (kept[child].label, kept[parent].label)],
            )
        above[parent] = child

    roots = [i for i in range(len(kept)) if i not in support]
    roots.sort(key=lambda i: kept[i].box[0])
    stacks = []
    placed: set[int] = set()
    for root in roots:
        stack = [root]
        while stack[-1] in above:
            nxt = above[stack[-1]]
            if nxt in placed or nxt in stack:
                raise AmbiguityError("support cycle", [(kept[nxt].label, kept[stack[-1]].label)])
            stack.append(nxt)
        placed.update(stack)
        stacks.append(tuple(colors[i] for i in stack))
    if len(placed) != len(kept):
        missing = [kept[i].label for i in range(len(kept)) if i not in placed]
        raise AmbiguityError("support cycle", [(m, m) for m in missing])
    return Configuration(tuple(stacks), frozenset())
