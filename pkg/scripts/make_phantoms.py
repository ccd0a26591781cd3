"""Write the stock synthetic phantoms to disk as volume + ground-truth mask pairs.

Each phantom produces ``<name>.orgv`` (intensity volume) and
``<name>_truth.orgm`` (label mask). These files feed the CLI demos:

    python3 scripts/make_phantoms.py --out phantoms/
    python3 -m organpoint eval phantoms/sphere_truth.orgm phantoms/sphere_truth.orgm
"""

from __future__ import annotations

import argparse
from pathlib import Path

from organpoint import STANDARD_PHANTOMS, synth_phantom, write_mask, write_raw


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("phantoms"),
                        help="output directory (created if missing)")
    parser.add_argument("--phantom", choices=sorted(STANDARD_PHANTOMS),
                        action="append",
                        help="phantom to write (repeatable; default: all)")
    args = parser.parse_args()

    names = args.phantom or sorted(STANDARD_PHANTOMS)
    args.out.mkdir(parents=True, exist_ok=True)
    for name in names:
        spec = STANDARD_PHANTOMS[name]()
        volume, truth = synth_phantom(spec)
        stem = name.replace("-", "_")
        vol_path = args.out / f"{stem}.orgv"
        mask_path = args.out / f"{stem}_truth.orgm"
        vol_path.write_bytes(write_raw(volume))
        mask_path.write_bytes(write_mask(truth, volume.spacing_mm))
        print(f"{name}: wrote {vol_path} and {mask_path} "
              f"(dims {volume.dims}, {truth.num_classes} classes)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
