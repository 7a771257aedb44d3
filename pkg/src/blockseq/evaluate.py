"""Sequence-accuracy metrics, report files, and the inductive-generalization
benchmark harness.

FSA (full-sequence accuracy) counts a prediction as correct when it equals
*any* stored minimal plan of its record; a no-sequence prediction matches a
no-sequence record.  SLA (step-level accuracy) scores slot-by-slot over the
8-slot padded representation by default, taking each record's best score over
its stored plans.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from . import ilp, mlp, qlearn
from .dataset import PairRecord, perturb_config, split_by_length
from .logic import TransitionError, run
from .model import Configuration, MoveSequence, stacks_key

MAX_SLOTS = 8

#: A sequencer under evaluation: None output means "no sequence exists".
Predictor = Callable[[Configuration, Configuration], MoveSequence | None]

Prediction = MoveSequence | None


@dataclass
class EvalReport:
    method: str
    dataset_id: str
    n: int
    fsa: float
    sla: float
    per_length: dict[str, tuple[int, float, float]] = field(default_factory=dict)
    semantic_validity: float = 0.0


def _matches(pred: Prediction, record: PairRecord) -> bool:
    if pred is None:
        return record.label is None
    if record.label is None:
        return False
    return any(pred == p for p in record.plans)


def _slot_score(pred: MoveSequence, truth: MoveSequence, padded: bool) -> float:
    if padded:
        length = MAX_SLOTS
    else:
        length = max(len(pred), len(truth))
        if length == 0:
            return 1.0
    hits = 0
    for i in range(length):
        a = pred[i] if i < len(pred) else None
        b = truth[i] if i < len(truth) else None
        if a == b:
            hits += 1
    return hits / length


def _record_sla(pred: Prediction, record: PairRecord, padded: bool) -> float:
    if pred is None or record.label is None:
        return 1.0 if _matches(pred, record) else 0.0
    return max(_slot_score(pred, truth, padded) for truth in record.plans)


def fsa(predictions: Sequence[Prediction], records: Sequence[PairRecord]) -> float:
    """Percentage of predictions equal to some stored minimal plan."""
    if len(predictions) != len(records):
        raise ValueError(f"{len(predictions)} predictions for {len(records)} records")
    if not records:
        return 0.0
    return 100.0 * sum(_matches(p, r) for p, r in zip(predictions, records)) / len(records)


def sla(
    predictions: Sequence[Prediction],
    records: Sequence[PairRecord],
    padded: bool = True,
) -> float:
    """Mean per-record best slot-level match rate, as a percentage.

    ``padded=True`` compares all 8 slots (absent moves count as matching
    pads); ``padded=False`` divides by max(len(prediction), len(truth))."""
    if len(predictions) != len(records):
        raise ValueError(f"{len(predictions)} predictions for {len(records)} records")
    if not records:
        return 0.0
    total = sum(_record_sla(p, r, padded) for p, r in zip(predictions, records))
    return 100.0 * total / len(records)


def semantic_valid(pred: Prediction, record: PairRecord) -> bool:
    """Does replaying the prediction actually reach the target structure?
    (A no-sequence prediction is valid exactly on no-sequence records.)"""
    if pred is None:
        return record.label is None
    try:
        final = run(record.src, pred)
    except TransitionError:
        return False
    return stacks_key(final) == stacks_key(record.tgt)


def predictor_inputs(
    records: Sequence[PairRecord], noise_p: float = 0.0, seed: int = 0
) -> list[tuple[Configuration, Configuration]]:
    """The (source, target) pairs a predictor will see: the records' own
    configurations, corrupted with probability ``noise_p`` each to emulate an
    imperfect recognition stage.  Ground truth is never touched."""
    rng = random.Random(seed)
    pairs = []
    for r in records:
        src, tgt = r.src, r.tgt
        if noise_p > 0.0:
            src = perturb_config(src, noise_p, rng)
            tgt = perturb_config(tgt, noise_p, rng)
        pairs.append((src, tgt))
    return pairs


def report_from_predictions(
    predictions: Sequence[Prediction],
    records: Sequence[PairRecord],
    method: str = "",
    dataset_id: str = "",
    padded_sla: bool = True,
) -> EvalReport:
    groups: dict[str, list[int]] = {}
    for i, r in enumerate(records):
        groups.setdefault("none" if r.label is None else str(r.label), []).append(i)
    per_length = {}
    for key in sorted(groups, key=lambda k: (k == "none", k)):
        idx = groups[key]
        preds = [predictions[i] for i in idx]
        recs = [records[i] for i in idx]
        per_length[key] = (len(idx), fsa(preds, recs), sla(preds, recs, padded_sla))
    valid = 100.0 * sum(semantic_valid(p, r) for p, r in zip(predictions, records)) / max(len(records), 1)
    return EvalReport(
        method=method,
        dataset_id=dataset_id,
        n=len(records),
        fsa=fsa(predictions, records),
        sla=sla(predictions, records, padded_sla),
        per_length=per_length,
        semantic_validity=valid,
    )


def evaluate(
    predictor: Predictor,
    records: Sequence[PairRecord],
    method: str = "",
    dataset_id: str = "",
    noise_p: float = 0.0,
    seed: int = 0,
    padded_sla: bool = True,
) -> EvalReport:
    """Run a predictor over records and score it."""
    inputs = predictor_inputs(records, noise_p, seed)
    predictions = [predictor(src, tgt) for src, tgt in inputs]
    return report_from_predictions(predictions, records, method, dataset_id, padded_sla)


# ---------------------------------------------------------------------------
# Method training shims
# ---------------------------------------------------------------------------

METHODS = ("mlp", "q", "ilp")

DEFAULT_EPOCHS = 200
DEFAULT_EPISODES = 10000
DEFAULT_TRANSITIONS = 1500


def fit_predictor(
    method: str,
    train_records: Sequence[PairRecord],
    seed: int = 0,
    epochs: int = DEFAULT_EPOCHS,
    episodes: int = DEFAULT_EPISODES,
    max_transitions: int = DEFAULT_TRANSITIONS,
    horizon: int | None = None,
) -> Predictor:
    """Train one sequencing method on the given records and wrap it as a
    predictor.  ``horizon`` applies to the theory planner (None = unbounded)."""
    if method == "mlp":
        model = mlp.init_model(seed=seed)
        trained, _ = mlp.train(model, train_records, epochs=epochs, seed=seed)
        return lambda src, tgt: mlp.predict(trained, src, tgt)
    if method == "q":
        table = qlearn.train(train_records, episodes=episodes, seed=seed)
        return lambda src, tgt: qlearn.rollout(table, src, tgt)
    if method == "ilp":
        transitions = ilp.transitions_from_records(train_records, max_transitions)
        theory = ilp.induce(ilp.make_examples(transitions))
        tp = ilp.TheoryPlanner(theory)

        def predict(src: Configuration, tgt: Configuration) -> Prediction:
            result = tp.plan(src, tgt, horizon=horizon, max_plans=1)
            return result.plans[0] if result.found else None

        return predict
    raise ValueError(f"unknown method {method!r} (expected one of {METHODS})")


def induction_benchmark(
    method: str,
    records: Sequence[PairRecord],
    ells: Iterable[int] = range(1, 7),
    noise_p: float = 0.0,
    seed: int = 0,
    **fit_kwargs,
) -> list[tuple[int, float, float]]:
    """Train on plans of length <= ell, test on strictly longer ones.

    For each ell the records are split length-disjointly, the method is
    trained from scratch on the train side, and (FSA, SLA) is measured on the
    test side.  Returns [(ell, fsa, sla), ...]; deterministic for a seed."""
    rows = []
    for ell in ells:
        spec = split_by_length(records, ell)
        predictor = fit_predictor(method, spec.train, seed=seed, **fit_kwargs)
        report = evaluate(
            predictor,
            spec.test,
            method=method,
            noise_p=noise_p,
            seed=seed * 7919 + ell,
        )
        rows.append((ell, report.fsa, report.sla))
    return rows


# ---------------------------------------------------------------------------
# Report files
# ---------------------------------------------------------------------------

_DISPLAY = {"mlp": "MLP", "q": "QL", "ilp": "ILP"}


def write_report(report: EvalReport, path, fmt: str = "tsv") -> None:
    """Serialize a report deterministically; markdown mirrors the
    (Method, FSA, SLA) summary-table layout."""
    if fmt == "tsv":
        lines = [
            "method\tdataset\tn\tfsa\tsla\tsemantic_validity",
            f"{report.method}\t{report.dataset_id}\t{report.n}"
            f"\t{report.fsa:.2f}\t{report.sla:.2f}\t{report.semantic_validity:.2f}",
            "length\tn\tfsa\tsla",
        ]
        for key, (n, f_, s_) in report.per_length.items():
            lines.append(f"{key}\t{n}\t{f_:.2f}\t{s_:.2f}")
    elif fmt == "markdown":
        name = _DISPLAY.get(report.method, report.method.upper())
        lines = [
            "| Method | FSA | SLA |",
            "| --- | --- | --- |",
            f"| {name} | {report.fsa:.2f} | {report.sla:.2f} |",
            "",
            f"n = {report.n}, semantic validity = {report.semantic_validity:.2f}%"
            f" (dataset: {report.dataset_id})",
        ]
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_report(path) -> EvalReport:
    """Read back a TSV report (floats carry the serialized 2-decimal values)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [l.rstrip("\n") for l in fh]
    if len(lines) < 3 or lines[0] != "method\tdataset\tn\tfsa\tsla\tsemantic_validity":
        raise ValueError(f"{path}: not a report file")
    method, dataset_id, n, f_, s_, v_ = lines[1].split("\t")
    report = EvalReport(method, dataset_id, int(n), float(f_), float(s_),
                        semantic_validity=float(v_))
    for line in lines[3:]:
        if not line:
            continue
        key, ln, lf, ls = line.split("\t")
        report.per_length[key] = (int(ln), float(lf), float(ls))
    return report


def write_benchmark_rows(rows: Sequence[tuple[int, float, float]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("ell\tfsa\tsla\n")
        for ell, f_, s_ in rows:
            fh.write(f"{ell}\t{f_:.2f}\t{s_:.2f}\n")
