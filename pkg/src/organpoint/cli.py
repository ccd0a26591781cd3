"""Command line entry point: classify / bench / segment / extract / decode / eval.

Exit codes: 0 success, 2 usage error, 3 input parse error, 4 dimension or
consistency error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import dataset, metrics, sampler, segmenter, volume
from .classify import ModelClassifier
from .errors import ConsistencyError, ParseError
from .model import load_weights

EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CONSISTENCY = 4


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def load_volume(path: Path) -> volume.Volume:
    data = path.read_bytes()
    if path.suffix == ".orgv" or data[:4] == volume.RAW_MAGIC:
        return volume.parse_raw(data)
    return volume.parse_nifti(data)[0]


def load_mask(path: Path) -> volume.LabelMask:
    data = path.read_bytes()
    if path.suffix == ".orgm" or data[:4] == volume.MASK_MAGIC:
        return volume.parse_mask(data)[0]
    vol, ints = volume.parse_nifti(data)
    return volume.require_label_data(ints, vol.dims)


def _parse_levels(text: str) -> list[float]:
    try:
        levels = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse levels {text!r}")
    if not levels or any(s <= 0 for s in levels):
        raise argparse.ArgumentTypeError("levels must be positive millimeters")
    if any(b >= a for a, b in zip(levels, levels[1:])):
        raise argparse.ArgumentTypeError("levels must be strictly decreasing")
    return levels


def cmd_classify(args) -> int:
    vol = load_volume(args.volume)
    weights = load_weights(args.weights.read_bytes())
    clf = ModelClassifier(weights)
    table = clf.table_for(vol)  # bind outside the timed span

    t0 = time.perf_counter_ns()
    desc = sampler.extract_descriptor(vol, tuple(args.point), table)
    from .model import forward  # local alias keeps the timed span tight

    logits = forward(weights, desc.values)
    elapsed_us = (time.perf_counter_ns() - t0) // 1000

    z = logits - logits.max()
    probs = np.exp(z)
    probs /= probs.sum()
    label = int(np.argmax(logits))
    print(f"label={label}")
    print(f"name={weights.label_names[label]}")
    print("probs=" + " ".join(_fmt(p) for p in probs))
    print("logits=" + " ".join(_fmt(v) for v in logits))
    print(f"time_us={elapsed_us}")
    return 0


def cmd_bench(args) -> int:
    vol = load_volume(args.volume)
    weights = load_weights(args.weights.read_bytes())
    mask = load_mask(args.mask) if args.mask else None
    if mask is not None:
        volume.check_mask_pairing(vol, mask)
    clf = ModelClassifier(weights)
    clf.table_for(vol)

    rng = np.random.Generator(np.random.PCG64(args.seed))
    nx, ny, nz = vol.dims
    points = np.stack([
        rng.integers(0, nx, size=args.n),
        rng.integers(0, ny, size=args.n),
        rng.integers(0, nz, size=args.n),
    ], axis=1)

    seconds = np.empty(args.n)
    predicted = np.empty(args.n, dtype=np.int64)
    for i in range(args.n):
        p = (int(points[i, 0]), int(points[i, 1]), int(points[i, 2]))
        t0 = time.perf_counter()
        predicted[i] = clf.classify(vol, p)
        seconds[i] = time.perf_counter() - t0

    print(f"n={args.n}")
    print(f"mean_ms={_fmt(seconds.mean() * 1e3)}")
    print(f"std_ms={_fmt(seconds.std() * 1e3)}")
    if mask is not None:
        flat = points[:, 0] + nx * (points[:, 1] + ny * points[:, 2])
        truth = mask.labels[flat]
        num_classes = max(weights.num_classes, int(truth.max()) + 1)
        counts = metrics.ConfusionCounts.from_labels(truth, predicted, num_classes)
        accuracy, macro_f1 = metrics.accuracy_and_macro_f1(counts)
        print(f"accuracy={_fmt(accuracy)}")
        print(f"macro_f1={_fmt(macro_f1)}")
    return 0


def cmd_segment(args) -> int:
    vol = load_volume(args.volume)
    weights = load_weights(args.weights.read_bytes())
    clf = ModelClassifier(weights)
    clf.table_for(vol)

    t0 = time.perf_counter()
    mask, stats = segmenter.segment(
        vol, clf, levels_mm=args.levels, threads=args.threads,
    )
    total = time.perf_counter() - t0
    args.out.write_bytes(volume.write_mask(mask, vol.spacing_mm))

    print(f"voxels={vol.intensities.size}")
    print(f"classifier_calls={stats.classifier_calls}")
    print(f"smoothed_assignments={stats.smoothed_assignments}")
    print("points_per_level=" + ",".join(str(n) for n in stats.points_per_level))
    for phase, dt in stats.phase_seconds:
        print(f"time_{phase}={_fmt(dt)}")
    print(f"time_total={_fmt(total)}")
    print(f"wrote={args.out}")
    return 0


def cmd_extract(args) -> int:
    vol = load_volume(args.volume)
    mask = load_mask(args.mask)
    spec = dataset.SampleSpec(args.count, args.balanced_fraction, args.seed)
    table = sampler.bind_to_spacing(sampler.build_offset_table(), vol.spacing_mm)
    volume_id = args.volume_id or args.volume.stem
    data, manifest = dataset.export_dataset(vol, mask, spec, table, volume_id)
    args.out.write_bytes(data)
    manifest_path = args.manifest or args.out.with_suffix(args.out.suffix + ".manifest.txt")
    manifest_path.write_text(manifest)
    print(f"rows={spec.per_image_count}")
    print(f"wrote={args.out}")
    print(f"manifest={manifest_path}")
    return 0


def cmd_decode(args) -> int:
    vol = load_volume(args.volume)
    table = sampler.bind_to_spacing(sampler.build_offset_table(), vol.spacing_mm)
    desc = sampler.extract_descriptor(vol, tuple(args.point), table)
    image = sampler.decode_descriptor(desc)
    args.out.write_bytes(sampler.image_to_pgm(image))
    print(f"wrote={args.out}")
    return 0


def cmd_eval(args) -> int:
    pred = load_mask(args.pred)
    truth = load_mask(args.truth)
    dice = metrics.dice_per_class(pred, truth)
    print("class  dice")
    for c, value in enumerate(dice, start=1):
        print(f"{c:<6d} {value:.4f}")
    print(f"average {dice.mean():.4f}" if dice.size else "average n/a")
    if args.csv:
        lines = ["class,dice"] + [f"{c},{v:.6f}" for c, v in enumerate(dice, start=1)]
        args.csv.write_text("\n".join(lines) + "\n")
        print(f"csv={args.csv}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="organpoint",
        description="Real-time organ-label point classification and grid segmentation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="classify one voxel location")
    p.add_argument("--volume", type=Path, required=True)
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--point", type=int, nargs=3, required=True, metavar=("I", "J", "K"))
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("bench", help="per-query latency over random points")
    p.add_argument("--volume", type=Path, required=True)
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--mask", type=Path, default=None, help="ground truth for accuracy")
    p.add_argument("-n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("segment", help="coarse-to-fine full-volume segmentation")
    p.add_argument("--volume", type=Path, required=True)
    p.add_argument("--weights", type=Path, required=True)
    p.add_argument("--levels", type=_parse_levels, default=[8.0, 4.0, 2.0],
                   help="comma-separated mm grid levels, strictly decreasing")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("extract", help="sample points and write an ORGD dataset")
    p.add_argument("--volume", type=Path, required=True)
    p.add_argument("--mask", type=Path, required=True)
    p.add_argument("--count", type=int, default=100_000)
    p.add_argument("--balanced-fraction", type=float, default=0.10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--volume-id", default=None)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--manifest", type=Path, default=None)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("decode", help="write a point's descriptor as an 81x81 PGM")
    p.add_argument("--volume", type=Path, required=True)
    p.add_argument("--point", type=int, nargs=3, required=True, metavar=("I", "J", "K"))
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="per-class Dice between two masks")
    p.add_argument("--pred", type=Path, required=True)
    p.add_argument("--truth", type=Path, required=True)
    p.add_argument("--csv", type=Path, default=None)
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (ConsistencyError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONSISTENCY


if __name__ == "__main__":
    sys.exit(main())
