"""Logit parity between this trainer and the runtime engine.

The check round-trips through the real component boundary: weights go out as
an ORGC file, probe descriptors come back from the engine's ``extract``
command, and reference logits come from the engine's ``classify`` command.
The trainer then runs its own forward pass on the identical descriptor rows
and compares. Because both sides consume the same descriptor values, any
difference is purely a network-evaluation discrepancy.
"""

from __future__ import annotations

import subprocess
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .errors import EngineError
from .export import load_weights
from .formats import open_rows, write_mask, write_volume

DEFAULT_ENGINE_CMD = (sys.executable, "-m", "organpoint")
LOGIT_TOLERANCE = 1e-4


@dataclass
class ParityReport:
    probes: int
    max_abs_diff: float
    mean_abs_diff: float

    @property
    def ok(self) -> bool:
        return self.max_abs_diff <= LOGIT_TOLERANCE


def run_engine(args: list[str], engine_cmd=DEFAULT_ENGINE_CMD) -> dict[str, str]:
    """Run an engine subcommand and parse its key=value stdout lines."""
    proc = subprocess.run([*engine_cmd, *args], capture_output=True, text=True)
    if proc.returncode != 0:
        raise EngineError(
            f"engine {args[0]} failed (exit {proc.returncode}): "
            f"{proc.stderr.strip() or proc.stdout.strip()}")
    out: dict[str, str] = {}
    for line in proc.stdout.splitlines():
        if "=" in line:
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def _read_manifest_points(path: Path) -> list[tuple[int, int, int]]:
    points = []
    for line in path.read_text().splitlines():
        parts = line.split()
        if len(parts) >= 4:
            points.append((int(parts[1]), int(parts[2]), int(parts[3])))
    return points


def run_parity_check(weights_path: Path | str, *, probes: int = 100,
                     seed: int = 0, workdir: Path | str,
                     engine_cmd=DEFAULT_ENGINE_CMD, net=None) -> ParityReport:
    """Compare trainer-side logits with engine-side logits at random probes.

    Writes a random probe volume into ``workdir``, asks the engine to sample
    ``probes`` descriptor rows from it, and checks the trainer's forward pass
    against the engine's ``classify`` output at every sampled point.

    With the default ``net=None`` the trainer side is reloaded from
    ``weights_path``, so the check verifies the export / engine-load /
    engine-forward round-trip. Pass the in-memory network instead to also
    catch any difference between what the trainer holds and what the engine
    reads from disk (for example a corrupted weights file) — with the
    default, a damaged file is read identically by both sides and therefore
    cannot be flagged.
    """
    weights_path = Path(weights_path)
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    if net is None:
        net, _ = load_weights(weights_path.read_bytes())
    net.eval()

    rng = np.random.Generator(np.random.PCG64(seed))
    shape = (24, 24, 24)  # (nz, ny, nx)
    intensities = rng.integers(-1024, 2001, size=shape).astype(np.float32)
    vol_path = workdir / "parity_volume.orgv"
    mask_path = workdir / "parity_mask.orgm"
    write_volume(vol_path, intensities, (2.0, 2.0, 2.0))
    write_mask(mask_path, np.zeros(shape, dtype=np.uint16), (2.0, 2.0, 2.0))

    rows_path = workdir / "parity_rows.orgd"
    manifest_path = workdir / "parity_rows.txt"
    run_engine([
        "extract", "--volume", str(vol_path), "--mask", str(mask_path),
        "--count", str(probes), "--balanced-fraction", "0",
        "--seed", str(seed), "--volume-id", "parity",
        "--out", str(rows_path), "--manifest", str(manifest_path),
    ], engine_cmd)

    rows = open_rows(rows_path)
    points = _read_manifest_points(manifest_path)
    if len(points) != rows.shape[0]:
        raise EngineError(
            f"manifest lists {len(points)} points for {rows.shape[0]} rows")

    values = np.ascontiguousarray(rows["values"], dtype=np.float32)
    with torch.no_grad():
        ours = net(torch.from_numpy(values)).numpy()

    diffs = np.empty(len(points), dtype=np.float64)
    for idx, (i, j, k) in enumerate(points):
        reply = run_engine([
            "classify", "--volume", str(vol_path),
            "--weights", str(weights_path),
            "--point", str(i), str(j), str(k),
        ], engine_cmd)
        # The engine prints float32 logits with nine significant digits,
        # which round-trips float32 exactly; parse at that precision so the
        # comparison measures logit disagreement, not decimal formatting.
        engine_logits = np.array(
            [np.float32(v) for v in reply["logits"].split()], dtype=np.float64)
        if engine_logits.shape[0] != ours.shape[1]:
            raise EngineError(
                f"engine returned {engine_logits.shape[0]} logits, "
                f"trainer has {ours.shape[1]} classes")
        diffs[idx] = np.max(np.abs(engine_logits - ours[idx].astype(np.float64)))

    return ParityReport(probes=len(points),
                        max_abs_diff=float(diffs.max()),
                        mean_abs_diff=float(diffs.mean()))
