"""Full evaluation protocol for a trained model on real scans (e.g. BTCV).

For every volume/mask case this script shells out to the CLI exactly as a
benchmark run would:

  1. ``bench``   — 1000 random queries against the reference mask, reporting
                   mean/std per-query latency, point accuracy, and macro-F1;
  2. ``segment`` — full hierarchical segmentation at 8/4/2 mm with per-phase
                   timings, writing the predicted mask;
  3. ``eval``    — per-class Dice of the prediction against the reference.

Results land in --out-dir (predicted masks, per-case Dice CSVs) and a
summary table is printed. Requires real data and trained weights; point it
at NIfTI or ORGV/ORGM files:

    python3 scripts/btcv_protocol.py weights.orgc \\
        --case img0035.nii.gz label0035.nii.gz \\
        --case img0036.nii.gz label0036.nii.gz
"""

from __future__ import annotations

import argparse
import subprocess
import sys
from pathlib import Path


def run_cli(*args: str) -> dict[str, str]:
    """Run an engine subcommand; return its key=value stdout lines."""
    cmd = [sys.executable, "-m", "organpoint", *args]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        sys.stderr.write(proc.stderr)
        raise SystemExit(f"command failed ({proc.returncode}): {' '.join(cmd)}")
    out: dict[str, str] = {}
    for line in proc.stdout.splitlines():
        key, sep, value = line.partition("=")
        if sep and " " not in key:
            out[key] = value
    return out


def main() -> int:
    parser = argparse.ArgumentParser(
        description=__doc__.splitlines()[0],
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("weights", type=Path, help="trained model (.orgc)")
    parser.add_argument("--case", nargs=2, action="append", required=True,
                        metavar=("VOLUME", "MASK"),
                        help="scan and its reference label mask (repeatable)")
    parser.add_argument("--out-dir", type=Path, default=Path("protocol-results"))
    parser.add_argument("--queries", type=int, default=1000)
    parser.add_argument("--levels", default="8,4,2")
    parser.add_argument("--threads", type=int, default=4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    missing = [p for p in [args.weights] + [Path(f) for c in args.case for f in c]
               if not p.exists()]
    if missing:
        for p in missing:
            print(f"missing input: {p}", file=sys.stderr)
        print("This protocol needs real scans and trained weights; see --help.",
              file=sys.stderr)
        return 2

    args.out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for volume, mask in args.case:
        stem = Path(volume).name.split(".")[0]
        pred = args.out_dir / f"{stem}_pred.orgm"
        csv = args.out_dir / f"{stem}_dice.csv"

        bench = run_cli("bench", "--volume", volume, "--weights", str(args.weights),
                        "--mask", mask, "-n", str(args.queries),
                        "--seed", str(args.seed))
        seg = run_cli("segment", "--volume", volume, "--weights", str(args.weights),
                      "--out", str(pred), "--levels", args.levels,
                      "--threads", str(args.threads))
        run_cli("eval", "--pred", str(pred), "--truth", mask, "--csv", str(csv))
        dice_rows = [line.split(",") for line in
                     csv.read_text().splitlines()[1:]]
        dice_avg = sum(float(d) for _, d in dice_rows) / len(dice_rows)

        rows.append({
            "case": stem,
            "mean_ms": float(bench["mean_ms"]),
            "accuracy": float(bench["accuracy"]),
            "macro_f1": float(bench["macro_f1"]),
            "segment_s": float(seg["time_total"]),
            "calls": int(seg["classifier_calls"]),
            "dice_avg": dice_avg,
        })
        print(f"{stem}: query {rows[-1]['mean_ms']:.3f} ms, "
              f"accuracy {rows[-1]['accuracy']:.4f}, "
              f"macro-F1 {rows[-1]['macro_f1']:.4f}, "
              f"segment {rows[-1]['segment_s']:.2f} s "
              f"({rows[-1]['calls']} calls), dice avg {dice_avg:.4f}")

    if len(rows) > 1:
        print("-- summary over", len(rows), "cases --")
        for key in ("mean_ms", "accuracy", "macro_f1", "segment_s", "dice_avg"):
            mean = sum(r[key] for r in rows) / len(rows)
            print(f"mean {key}: {mean:.4f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
