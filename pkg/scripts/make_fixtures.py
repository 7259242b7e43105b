#!/usr/bin/env python3
"""Regenerates the planted-error grid fixtures next to the eval manifest.

Each condition gets one grid file spelling a hypothesis that differs from
the manifest reference in a fixed number of single-character words, so the
corpus harness reproduces a known WER column:

    short        9 faults / 160 words  -> 5.62%
    long        34 faults / 295 words  -> 11.52%
    short+noise  1 fault  /  11 words  -> 9.09%
    long+noise   8 faults /  63 words  -> 12.69%

References use letter words and the planted substitutions are digit words,
so every fault is forced to align as a substitution. Deterministic: every
run writes byte-identical files.
"""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from speechmorse.ctc import DEFAULT_ALPHABET
from speechmorse.decoder import OracleScorerConfig, oracle_posteriors
from speechmorse.ctc import write_grid

CONDITIONS = (
    ("short", 160, 9),
    ("long", 295, 34),
    ("short+noise", 11, 1),
    ("long+noise", 63, 8),
)

LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
DIGITS = "0123456789"


def planted_pair(words: int, faults: int, rng: np.random.Generator) -> tuple[str, str]:
    """Reference of letter words and a hypothesis with digit substitutions."""
    ref = [LETTERS[rng.integers(len(LETTERS))] for _ in range(words)]
    hyp = list(ref)
    positions = rng.choice(words, size=faults, replace=False)
    for p in positions:
        hyp[p] = DIGITS[rng.integers(len(DIGITS))]
    return " ".join(ref), " ".join(hyp)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=str(Path(__file__).resolve().parents[1] / "fixtures"),
        help="directory for the manifest and grid files",
    )
    parser.add_argument("--seed", type=int, default=20260823)
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    records = []
    for tag, words, faults in CONDITIONS:
        reference, hypothesis = planted_pair(words, faults, rng)
        grid = oracle_posteriors(
            OracleScorerConfig(hypothesis, frames_per_symbol=1), DEFAULT_ALPHABET
        )
        grid_name = f"{tag.replace('+', '_')}.grid"
        write_grid(grid, out / grid_name)
        records.append(
            {
                "id": tag,
                "input_path": grid_name,
                "input_kind": "grid",
                "reference": reference,
                "tag": tag,
            }
        )
    manifest = out / "paper_tables.manifest"
    with open(manifest, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    print(f"wrote {manifest} and {len(records)} grid files")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
