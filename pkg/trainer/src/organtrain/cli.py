"""Command-line interface: ``organtrain train`` and ``organtrain parity``.

Exit codes: 0 success, 1 parity check exceeded tolerance, 2 bad inputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import tempfile
from pathlib import Path

from .config import TrainConfig
from .data import DescriptorCorpus
from .errors import TrainerError
from .export import save_weights
from .parity import DEFAULT_ENGINE_CMD, run_parity_check
from .train import train, training_summary


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="organtrain",
        description="train organ-label point classifiers and verify them "
                    "against the runtime engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a classifier on ORGD datasets")
    p.add_argument("--data", type=Path, nargs="+", required=True,
                   help="one or more ORGD files")
    p.add_argument("--out", type=Path, required=True,
                   help="output ORGC weights path (JSON sidecar written "
                        "alongside)")
    p.add_argument("--labels", default=None,
                   help="comma-separated label names; defaults to "
                        "class_0..class_N-1")
    defaults = TrainConfig()
    p.add_argument("--epochs", type=int, default=defaults.epochs)
    p.add_argument("--lr-init", type=float, default=defaults.lr_init)
    p.add_argument("--lr-final", type=float, default=defaults.lr_final)
    p.add_argument("--l1-l2", type=float, default=defaults.l1_l2_coeff,
                   help="coefficient applied to both the L1 and L2 terms")
    p.add_argument("--dropout", type=float, default=defaults.dropout)
    p.add_argument("--hidden", type=int, default=defaults.hidden)
    p.add_argument("--blocks", type=int, default=defaults.blocks)
    p.add_argument("--batch-size", type=int, default=defaults.batch_size)
    p.add_argument("--val-split", type=float, default=defaults.val_split)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--stop-at-val-accuracy", type=float, default=None,
                   help="stop early once validation accuracy reaches this")
    p.add_argument("--quiet", action="store_true",
                   help="suppress per-epoch progress lines")

    p = sub.add_parser("parity",
                       help="compare exported weights against the engine")
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--probes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workdir", type=Path, default=None,
                   help="directory for scratch files (default: temporary)")
    p.add_argument("--engine", default=None,
                   help="engine command to run, whitespace-split "
                        "(default: current interpreter's organpoint module)")
    return parser


def _cmd_train(args: argparse.Namespace) -> int:
    cfg = TrainConfig(
        epochs=args.epochs, lr_init=args.lr_init, lr_final=args.lr_final,
        l1_l2_coeff=args.l1_l2, dropout=args.dropout, hidden=args.hidden,
        blocks=args.blocks, batch_size=args.batch_size,
        val_split=args.val_split, seed=args.seed,
        stop_at_val_accuracy=args.stop_at_val_accuracy)
    corpus = DescriptorCorpus.open(args.data)
    if args.labels is not None:
        label_names = [s.strip() for s in args.labels.split(",")]
        if len(label_names) != corpus.num_classes:
            raise TrainerError(
                f"{len(label_names)} label names given but data contains "
                f"{corpus.num_classes} classes")
    else:
        label_names = [f"class_{i}" for i in range(corpus.num_classes)]

    log = None if args.quiet else print
    net, result = train(corpus, cfg, log=log)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    save_weights(args.out, net, label_names)
    sidecar = args.out.with_suffix(args.out.suffix + ".json")
    sidecar.write_text(json.dumps(
        training_summary(cfg, corpus, label_names, result), indent=2) + "\n")

    print(f"epochs_run={result.epochs_run}")
    print(f"steps={result.steps}")
    print(f"train_accuracy={result.train_accuracy:.6f}")
    if result.val_accuracy is not None:
        print(f"val_accuracy={result.val_accuracy:.6f}")
    print(f"wrote={args.out}")
    print(f"sidecar={sidecar}")
    return 0


def _cmd_parity(args: argparse.Namespace) -> int:
    engine_cmd = (tuple(args.engine.split()) if args.engine
                  else DEFAULT_ENGINE_CMD)
    if args.workdir is not None:
        report = run_parity_check(args.weights, probes=args.probes,
                                  seed=args.seed, workdir=args.workdir,
                                  engine_cmd=engine_cmd)
    else:
        with tempfile.TemporaryDirectory(prefix="organtrain-parity-") as tmp:
            report = run_parity_check(args.weights, probes=args.probes,
                                      seed=args.seed, workdir=tmp,
                                      engine_cmd=engine_cmd)
    print(f"probes={report.probes}")
    print(f"max_abs_diff={report.max_abs_diff:.9g}")
    print(f"mean_abs_diff={report.mean_abs_diff:.9g}")
    print(f"ok={'true' if report.ok else 'false'}")
    return 0 if report.ok else 1


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args)
        return _cmd_parity(args)
    except TrainerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
