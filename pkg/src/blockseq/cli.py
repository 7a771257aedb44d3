"""Command-line front end: dataset generation, planning, training, evaluation,
the induction benchmark, and detection re-imagination.

All randomness flows from the --seed flag of each run; identical invocations
produce identical bytes.  Diagnostics go to stderr, data to stdout or files.
Relative data paths resolve against $BLOCKSEQ_DATA_DIR when it is set.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import evaluate as ev
from . import ilp, mlp, planner, qlearn, reimagine
from .dataset import (
    QuotaError,
    enumerate_configs,
    make_pairs,
    read_records,
    write_records,
)
from .figures import save_eval_figure, save_induction_figure
from .logic import TransitionError
from .model import format_config, format_move, parse_config

DATA_DIR_VAR = "BLOCKSEQ_DATA_DIR"
LABELS = ("none", "0", "1", "2", "3", "4", "5", "6", "7", "8")


def _path(p: str) -> Path:
    base = os.environ.get(DATA_DIR_VAR)
    path = Path(p)
    if base and not path.is_absolute():
        return Path(base) / path
    return path


def _horizon(text: str) -> int | None:
    if text in ("unbounded", "none"):
        return None
    return int(text)


def _parse_quotas(text: str) -> dict:
    quotas = {}
    for part in text.split(","):
        name, _, count = part.partition("=")
        name = name.strip()
        if name not in LABELS or not count:
            raise argparse.ArgumentTypeError(f"bad quota entry {part!r}")
        quotas[None if name == "none" else int(name)] = int(count)
    return quotas


def _parse_ells(text: str) -> list[int]:
    lo, sep, hi = text.partition("-")
    ells = list(range(int(lo), int(hi) + 1)) if sep else [int(lo)]
    if not ells or not all(1 <= e <= 7 for e in ells):
        raise argparse.ArgumentTypeError(f"bad ell range {text!r}")
    return ells


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    configs = list(enumerate_configs(args.max_blocks, args.mode))
    if args.quotas:
        quotas = args.quotas
    else:
        quotas = {None if l == "none" else int(l): args.per_label for l in LABELS}
    records = make_pairs(
        configs, quotas, seed=args.seed, max_plans=args.max_plans, horizon=args.horizon
    )
    out = _path(args.out)
    write_records(out, records)
    counts = {}
    for r in records:
        key = "none" if r.label is None else str(r.label)
        counts[key] = counts.get(key, 0) + 1
    summary = ", ".join(f"{k}={counts[k]}" for k in LABELS if k in counts)
    print(f"wrote {len(records)} records to {out} ({summary})", file=sys.stderr)
    return 0


def _print_plan_result(result: planner.PlanResult, out) -> None:
    print(f"status: {result.status}", file=out)
    if result.found:
        print(f"min_length: {result.min_length}", file=out)
        print(f"plans: {len(result.plans)}{' (truncated)' if result.truncated else ''}", file=out)
        for plan in result.plans:
            print(",".join(format_move(m) for m in plan) if plan else "(empty)", file=out)


def cmd_plan(args) -> int:
    src = parse_config(args.src)
    tgt = parse_config(args.tgt)
    result = planner.plan(src, tgt, horizon=args.horizon, max_plans=args.max_plans)
    _print_plan_result(result, sys.stdout)
    return 0


def cmd_train(args) -> int:
    records = read_records(_path(args.dataset))
    out = _path(args.out)
    if args.method == "mlp":
        model = mlp.init_model(seed=args.seed)
        trained, curve = mlp.train(
            model, records, epochs=args.epochs, lr=args.lr,
            batch_size=args.batch_size, seed=args.seed,
        )
        mlp.save_model(trained, out)
        final = f"{curve[-1]:.6f}" if curve else "n/a"
        print(f"trained mlp on {len(records)} records, final loss {final}", file=sys.stderr)
    elif args.method == "q":
        table = qlearn.train(
            records, episodes=args.episodes, alpha=args.alpha, gamma=args.gamma,
            eps_start=args.eps_start, eps_end=args.eps_end, seed=args.seed,
        )
        qlearn.save_table(table, out)
        print(f"trained q table with {len(table)} entries", file=sys.stderr)
    else:
        transitions = ilp.transitions_from_records(records, args.max_transitions)
        theory = ilp.induce(ilp.make_examples(transitions),
                            ilp.enumerate_clauses(args.max_body))
        ilp.save_theory(theory, out)
        print(f"induced {len(theory.clauses)} clauses from "
              f"{len(transitions)} transitions", file=sys.stderr)
    print(f"checkpoint written to {out}", file=sys.stderr)
    return 0


_WORKER = {}


def _init_worker(method: str, checkpoint: str, horizon: int | None) -> None:
    _WORKER["predict"] = _load_predictor(method, Path(checkpoint), horizon)


def _predict_chunk(pairs):
    predict = _WORKER["predict"]
    return [predict(src, tgt) for src, tgt in pairs]


def _load_predictor(method: str, checkpoint: Path, horizon: int | None):
    if method == "mlp":
        model = mlp.load_model(checkpoint)
        return lambda src, tgt: mlp.predict(model, src, tgt)
    if method == "q":
        table = qlearn.load_table(checkpoint)
        return lambda src, tgt: qlearn.rollout(table, src, tgt)
    theory = ilp.load_theory(checkpoint)
    tp = ilp.TheoryPlanner(theory)

    def predict(src, tgt):
        result = tp.plan(src, tgt, horizon=horizon, max_plans=1)
        return result.plans[0] if result.found else None

    return predict


def cmd_eval(args) -> int:
    records = read_records(_path(args.dataset))
    checkpoint = _path(args.checkpoint)
    inputs = ev.predictor_inputs(records, args.noise_p, args.seed)
    if args.jobs > 1 and records:
        chunks = [inputs[i :: args.jobs] for i in range(args.jobs)]
        with ProcessPoolExecutor(
            max_workers=args.jobs,
            initializer=_init_worker,
            initargs=(args.method, str(checkpoint), args.horizon),
        ) as pool:
            results = list(pool.map(_predict_chunk, chunks))
        predictions = [None] * len(inputs)
        for j, chunk in enumerate(results):
            predictions[j :: args.jobs] = chunk
    else:
        predict = _load_predictor(args.method, checkpoint, args.horizon)
        predictions = [predict(src, tgt) for src, tgt in inputs]
    report = ev.report_from_predictions(
        predictions, records, method=args.method, dataset_id=Path(args.dataset).name
    )
    if args.report_out:
        report_path = _path(args.report_out)
        ev.write_report(report, report_path, args.format)
        if not args.no_figure:
            figure = _path(args.figure_out) if args.figure_out else report_path.with_suffix(".png")
            save_eval_figure(report, figure)
        print(f"report written to {report_path}", file=sys.stderr)
    else:
        print(f"method {report.method}  n {report.n}  FSA {report.fsa:.2f}  "
              f"SLA {report.sla:.2f}  valid {report.semantic_validity:.2f}")
    if args.require_fsa is not None and report.fsa < args.require_fsa:
        print(f"FSA {report.fsa:.2f} below required {args.require_fsa:.2f}", file=sys.stderr)
        return 1
    return 0


def cmd_induct(args) -> int:
    records = read_records(_path(args.dataset))
    rows = ev.induction_benchmark(
        args.method,
        records,
        ells=args.ells,
        noise_p=args.noise_p,
        seed=args.seed,
        epochs=args.epochs,
        episodes=args.episodes,
        max_transitions=args.max_transitions,
        horizon=args.horizon,
    )
    if args.report_out:
        report_path = _path(args.report_out)
        ev.write_benchmark_rows(rows, report_path)
        if not args.no_figure:
            figure = _path(args.figure_out) if args.figure_out else report_path.with_suffix(".png")
            save_induction_figure({args.method: rows}, figure)
        print(f"benchmark written to {report_path}", file=sys.stderr)
    else:
        print("ell\tfsa\tsla")
        for ell, f_, s_ in rows:
            print(f"{ell}\t{f_:.2f}\t{s_:.2f}")
    return 0


def cmd_reimagine(args) -> int:
    class_map = reimagine.load_class_map(_path(args.classmap))
    src = reimagine.to_blocks(reimagine.load_detections(_path(args.src)), class_map,
                              score_threshold=args.score_threshold,
                              overlap_frac=args.overlap_frac, gap_frac=args.gap_frac)
    tgt = reimagine.to_blocks(reimagine.load_detections(_path(args.tgt)), class_map,
                              score_threshold=args.score_threshold,
                              overlap_frac=args.overlap_frac, gap_frac=args.gap_frac)
    print(f"source: {format_config(src)}")
    print(f"target: {format_config(tgt)}")
    if args.plan:
        result = planner.plan(src, tgt, horizon=args.horizon, max_plans=args.max_plans)
        _print_plan_result(result, sys.stdout)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blockseq",
        description="Blocksworld event sequencing toolkit",
        epilog=f"Relative data paths resolve against ${DATA_DIR_VAR} when set.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a pair-record dataset")
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--max-blocks", type=int, default=5)
    gen.add_argument("--mode", choices=("relational", "grid"), default="relational")
    gen.add_argument("--per-label", type=int, default=9000,
                     help="count per label when --quotas is not given")
    gen.add_argument("--quotas", type=_parse_quotas,
                     help="explicit per-label counts, e.g. 'none=10,0=10,3=50'")
    gen.add_argument("--max-plans", type=int, default=200,
                     help="cap on stored minimal plans per record")
    gen.add_argument("--horizon", type=_horizon, default=8)
    gen.set_defaults(func=cmd_gen)

    pln = sub.add_parser("plan", help="enumerate all minimal plans for a pair")
    pln.add_argument("src", help="source configuration text, e.g. 'R.G|B'")
    pln.add_argument("tgt", help="target configuration text")
    pln.add_argument("--horizon", type=_horizon, default=8,
                     help="max plan length, or 'unbounded'")
    pln.add_argument("--max-plans", type=int, default=None)
    pln.set_defaults(func=cmd_plan)

    tr = sub.add_parser("train", help="train a sequencer, write a checkpoint")
    tr.add_argument("method", choices=ev.METHODS)
    tr.add_argument("--dataset", required=True)
    tr.add_argument("--out", required=True)
    tr.add_argument("--seed", type=int, default=0)
    tr.add_argument("--epochs", type=int, default=ev.DEFAULT_EPOCHS)
    tr.add_argument("--lr", type=float, default=1e-3)
    tr.add_argument("--batch-size", type=int, default=64)
    tr.add_argument("--episodes", type=int, default=ev.DEFAULT_EPISODES)
    tr.add_argument("--alpha", type=float, default=0.1)
    tr.add_argument("--gamma", type=float, default=0.9)
    tr.add_argument("--eps-start", type=float, default=1.0)
    tr.add_argument("--eps-end", type=float, default=0.05)
    tr.add_argument("--max-transitions", type=int, default=ev.DEFAULT_TRANSITIONS)
    tr.add_argument("--max-body", type=int, default=2)
    tr.set_defaults(func=cmd_train)

    evp = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    evp.add_argument("method", choices=ev.METHODS)
    evp.add_argument("--checkpoint", required=True)
    evp.add_argument("--dataset", required=True)
    evp.add_argument("--report-out")
    evp.add_argument("--format", choices=("tsv", "markdown"), default="tsv")
    evp.add_argument("--figure-out")
    evp.add_argument("--no-figure", action="store_true")
    evp.add_argument("--noise-p", type=float, default=0.0)
    evp.add_argument("--seed", type=int, default=0)
    evp.add_argument("--require-fsa", type=float, default=None,
                     help="exit nonzero when FSA falls below this value")
    evp.add_argument("--horizon", type=_horizon, default=8,
                     help="theory-planner horizon (ilp only)")
    evp.add_argument("--jobs", type=int, default=1,
                     help="parallel prediction workers")
    evp.set_defaults(func=cmd_eval)

    ind = sub.add_parser("induct", help="length-generalization benchmark")
    ind.add_argument("method", choices=ev.METHODS)
    ind.add_argument("--dataset", required=True)
    ind.add_argument("--ells", type=_parse_ells, default=list(range(1, 7)),
                     help="training length caps, e.g. '1-6'")
    ind.add_argument("--noise-p", type=float, default=0.0)
    ind.add_argument("--seed", type=int, default=0)
    ind.add_argument("--epochs", type=int, default=ev.DEFAULT_EPOCHS)
    ind.add_argument("--episodes", type=int, default=ev.DEFAULT_EPISODES)
    ind.add_argument("--max-transitions", type=int, default=ev.DEFAULT_TRANSITIONS)
    ind.add_argument("--horizon", type=_horizon, default=None,
                     help="theory-planner horizon (default unbounded)")
    ind.add_argument("--report-out")
    ind.add_argument("--figure-out")
    ind.add_argument("--no-figure", action="store_true")
    ind.set_defaults(func=cmd_induct)

    rei = sub.add_parser("reimagine", help="map detection files to block configurations")
    rei.add_argument("src", help="source detection file")
    rei.add_argument("tgt", help="target detection file")
    rei.add_argument("--classmap", required=True)
    rei.add_argument("--plan", action="store_true")
    rei.add_argument("--horizon", type=_horizon, default=8)
    rei.add_argument("--max-plans", type=int, default=None)
    rei.add_argument("--score-threshold", type=float, default=0.5)
    rei.add_argument("--overlap-frac", type=float, default=0.5)
    rei.add_argument("--gap-frac", type=float, default=0.1)
    rei.set_defaults(func=cmd_reimagine)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        ValueError,
        OSError,
        QuotaError,
        TransitionError,
        reimagine.AmbiguityError,
        ilp.TheoryError,
        ilp.IncompleteTheoryError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
