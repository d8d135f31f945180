"""Command-line entry point: ``autoansatz gen-data|train|search|report|baselines``."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from .analysis import (
    contour_export,
    fanova_importance,
    save_frame,
    save_importance,
    scatter_export,
    slice_export,
    trajectory_export,
    trials_frame,
)
from .automl import run_search
from .baselines import fit_and_score, learning_curve
from .data import Standardizer, generate_synthetic, load_csv, save_csv, split_by_session, split_validation
from .models import (
    MAX_QUBITS,
    PARAM_NAMES,
    AnsatzSpec,
    EmbeddingKind,
    SearchSettings,
    SearchSpace,
    SynthConfig,
    TrainConfig,
    VariationalKind,
)
from .qnn import init_model, qnn_trainable_count, save_checkpoint
from .quantum import count_params
from .train import evaluate, history_to_csv, train
from .trial_store import TrialStore
from .utils import init_logging

logger = logging.getLogger(__name__)

REPORT_KINDS = ("scatter", "slice", "contour", "importance", "trajectory", "trials")
BASELINE_METHODS = ("mlp", "knn", "gnb")


def _log_effective_config(command: str, config: Dict[str, Any]) -> None:
    logger.info(f"Effective config for {command}: {json.dumps(config, default=str, sort_keys=True)}")


def _write_table(frame: pd.DataFrame, out: Optional[Path]) -> None:
    """CSV to ``out`` if given, else to stdout."""
    if out is None:
        frame.to_csv(sys.stdout, index=False, lineterminator="\n")
    else:
        save_frame(frame, out)


def gen_data(args: argparse.Namespace) -> int:
    config: SynthConfig = args.synth
    _log_effective_config("gen-data", config.model_dump())
    save_csv(generate_synthetic(config), args.out, metadata=config.model_dump())
    return 0


def train_command(args: argparse.Namespace) -> int:
    spec: AnsatzSpec = args.spec
    config: TrainConfig = args.train_config
    _log_effective_config("train", {**spec.model_dump(), **config.model_dump(), "data": args.data})

    variational = count_params(spec.variational, spec.n, spec.L)
    logger.info(f"Variational parameters: {variational}; trainable parameters: {qnn_trainable_count(spec)}")

    dataset = load_csv(args.data)
    train_all, test = split_by_session(dataset)
    train_set, val_set = split_validation(train_all, 0.2, args.seed)
    model = init_model(spec, args.seed, Standardizer.fit(train_set.features))
    result = train(model, train_set, val_set, config)

    test_loss, test_acc = evaluate(result.model, test)
    if args.checkpoint:
        save_checkpoint(result.model, args.checkpoint)
    if args.metrics:
        history_to_csv(result.history, args.metrics)

    summary = {
        "variational_params": variational,
        "trainable_params": qnn_trainable_count(spec),
        "epochs": len(result.history),
        "diverged": result.diverged,
        "val_acc": result.history[-1].val_acc if result.history else None,
        "test_loss": test_loss,
        "test_acc": test_acc,
    }
    print(json.dumps(summary))
    return 0


def search_command(args: argparse.Namespace) -> int:
    settings: SearchSettings = args.settings
    _log_effective_config(
        "search",
        {**settings.model_dump(), "trials": args.trials, "store": args.store, "sampler": args.sampler},
    )
    dataset = load_csv(args.data)
    store = TrialStore.open(args.store)
    result = run_search(SearchSpace(), args.trials, dataset, args.train_config, store, settings, sampler=args.sampler)

    summary: Dict[str, Any] = {
        "trials": len(result.records),
        "pruned_fraction": round(result.pruned_fraction, 4),
        "best": None,
    }
    if result.best is not None:
        summary["best"] = {
            "id": result.best.id,
            "config": result.best.config.model_dump(),
            **result.best.final.model_dump(),
            "param_count": result.best.param_count,
        }
    print(json.dumps(summary))
    return 0


def report_command(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    if args.kind == "slice" and not args.param:
        parser.error("--kind slice requires --param")
    if args.kind == "contour" and not args.params:
        parser.error("--kind contour requires --params A B")
    _log_effective_config("report", vars(args))

    if not args.store.exists():
        raise FileNotFoundError(f"no trial store at {args.store}")
    trials = TrialStore.open(args.store, repair=False).records
    if args.kind == "importance":
        report = fanova_importance(trials, seed=args.seed)
        if args.out is None:
            print(report.model_dump_json(indent=2))
        else:
            save_importance(report, args.out)
        return 0

    if args.kind == "scatter":
        frame = scatter_export(trials)
    elif args.kind == "slice":
        frame = slice_export(trials, args.param)
    elif args.kind == "contour":
        frame = contour_export(trials, args.params[0], args.params[1], resolution=args.resolution)
    elif args.kind == "trajectory":
        frame = trajectory_export(trials)
    else:
        frame = trials_frame(trials)
    _write_table(frame, args.out)
    return 0


def baselines_command(args: argparse.Namespace) -> int:
    config: TrainConfig = args.train_config
    methods: List[str] = (["qnn"] if args.with_qnn else []) + list(BASELINE_METHODS)
    _log_effective_config("baselines", {**config.model_dump(), "k": args.k, "methods": methods, "sizes": args.sizes})

    train_set, test = split_by_session(load_csv(args.data))
    if args.sizes:
        frame = learning_curve(train_set, test, args.sizes, methods, config, k=args.k, seed=args.seed)
    else:
        rows = [
            {
                "method": method,
                "n_train": len(train_set),
                "test_acc": fit_and_score(method, train_set, test, config, args.k),
            }
            for method in methods
        ]
        frame = pd.DataFrame(rows, columns=["method", "n_train", "test_acc"])
    _write_table(frame, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autoansatz", description="Quantum neural networks with automated ansatz search"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    gen = subparsers.add_parser("gen-data", help="Write a synthetic beam-SNR dataset")
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--per-class", type=int, default=SynthConfig().per_class, help="Samples per class per session")
    gen.add_argument("--sep", type=float, default=SynthConfig().separation, help="Class prototype spread")
    gen.add_argument("--noise", type=float, default=SynthConfig().noise)
    gen.add_argument("--session-shift", type=float, default=SynthConfig().session_shift)

    defaults = TrainConfig()
    trn = subparsers.add_parser("train", help="Train one QNN")
    trn.add_argument("--data", type=Path, required=True)
    trn.add_argument("--embedding", choices=[e.value for e in EmbeddingKind], default=EmbeddingKind.ANGLE.value)
    trn.add_argument("--ansatz", choices=[v.value for v in VariationalKind], default=VariationalKind.S2D.value)
    trn.add_argument("--qubits", type=int, default=10)
    trn.add_argument("--layers", type=int, default=1)
    trn.add_argument("--lr", type=float, default=defaults.lr0)
    trn.add_argument("--seed", type=int, default=0)
    trn.add_argument("--epochs", type=int, default=defaults.max_epochs)
    trn.add_argument("--batch-size", type=int, default=defaults.batch_size)
    trn.add_argument("--gradient", choices=["adjoint", "parameter-shift"], default=defaults.gradient_method)
    trn.add_argument("--checkpoint", type=Path)
    trn.add_argument("--metrics", type=Path, help="Per-epoch metrics CSV")
    trn.add_argument("--allow-small", action="store_true", help="Permit fewer qubits than the search space minimum")

    srch = subparsers.add_parser("search", help="Run the AutoAnsatz search")
    srch.add_argument("--data", type=Path, required=True)
    srch.add_argument("--trials", type=int, required=True, help="Total trials in the store when done")
    srch.add_argument("--seed", type=int, default=0)
    srch.add_argument("--store", type=Path, required=True)
    srch.add_argument("--max-epochs", type=int, default=SearchSettings().max_epochs)
    srch.add_argument("--workers", type=int, default=1)
    srch.add_argument("--train-fraction", type=float, default=1.0)
    srch.add_argument("--sampler", choices=["tpe", "random"], default="tpe")
    srch.add_argument("--timing", action="store_true", help="Record measured wall time per trial")

    rep = subparsers.add_parser("report", help="Export plot-ready tables from a trial store")
    rep.add_argument("--store", type=Path, required=True)
    rep.add_argument("--kind", choices=REPORT_KINDS, required=True)
    rep.add_argument("--param", choices=PARAM_NAMES)
    rep.add_argument("--params", nargs=2, choices=PARAM_NAMES, metavar="PARAM")
    rep.add_argument("--resolution", type=int, default=20)
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--out", type=Path)

    base = subparsers.add_parser("baselines", help="Score classical baselines on the session split")
    base.add_argument("--data", type=Path, required=True)
    base.add_argument("--k", type=int, default=5)
    base.add_argument("--epochs", type=int, default=defaults.max_epochs)
    base.add_argument("--seed", type=int, default=0)
    base.add_argument("--sizes", type=int, nargs="+", help="Learning-curve training sizes")
    base.add_argument("--with-qnn", action="store_true")
    base.add_argument("--out", type=Path)

    return parser


def _describe(error: ValidationError) -> str:
    return "; ".join(f"{'.'.join(str(part) for part in item['loc'])}: {item['msg']}" for item in error.errors())


def build_configs(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Validate flag values into config objects on ``args``; any range error is a usage error."""
    if args.command == "gen-data":
        args.synth = SynthConfig(
            per_class=args.per_class,
            separation=args.sep,
            noise=args.noise,
            session_shift=args.session_shift,
            seed=args.seed,
        )
    elif args.command == "train":
        low = SearchSpace().n_range[0]
        if args.qubits > MAX_QUBITS:
            parser.error(f"--qubits must be at most {MAX_QUBITS}")
        if args.qubits < low and not (args.allow_small and args.qubits >= 2):
            parser.error(f"--qubits must be at least {low} (at least 2 with --allow-small)")
        args.spec = AnsatzSpec(
            embedding=EmbeddingKind(args.embedding),
            variational=VariationalKind(args.ansatz),
            n=args.qubits,
            L=args.layers,
            structure_seed=args.seed,
        )
        args.train_config = TrainConfig(
            batch_size=args.batch_size,
            max_epochs=args.epochs,
            lr0=args.lr,
            gradient_method=args.gradient,
            seed=args.seed,
        )
    elif args.command == "search":
        if args.trials < 1:
            parser.error(f"--trials must be at least 1, got {args.trials}")
        args.settings = SearchSettings(
            seed=args.seed,
            max_epochs=args.max_epochs,
            workers=args.workers,
            train_fraction=args.train_fraction,
            record_wall_time=args.timing,
        )
        args.train_config = TrainConfig(seed=args.seed)
    elif args.command == "report":
        if args.resolution < 2:
            parser.error(f"--resolution must be at least 2, got {args.resolution}")
    elif args.command == "baselines":
        if args.k < 1:
            parser.error(f"--k must be at least 1, got {args.k}")
        if args.sizes and min(args.sizes) < 1:
            parser.error("--sizes must all be at least 1")
        args.train_config = TrainConfig(max_epochs=args.epochs, seed=args.seed)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        try:
            build_configs(args, parser)
        except ValidationError as e:
            parser.error(f"invalid {args.command} options: {_describe(e)}")
    except SystemExit as e:
        return int(e.code or 0)

    init_logging()
    try:
        if args.command == "gen-data":
            return gen_data(args)
        if args.command == "train":
            return train_command(args)
        if args.command == "search":
            return search_command(args)
        if args.command == "report":
            return report_command(args, parser)
        return baselines_command(args)
    except SystemExit as e:
        return int(e.code or 0)
    except (OSError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
