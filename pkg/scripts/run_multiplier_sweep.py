#!/usr/bin/env python3
"""Correction-multiplier sensitivity sweep over {1, 1.5, 2}.

One trajectory set per multiplier and prior preset; larger multipliers
produce pointwise-lower corrected paths wherever the correction fires.
"""

import sys
from pathlib import Path

from cvbias.cli import main

ROOT = Path(__file__).resolve().parent.parent


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out/multiplier_sweep"
    rc = main(
        ["simulate", str(ROOT / "configs" / "multiplier_sweep.json"), "--output", out]
    )
    if rc == 0:
        print(f"tables written to {out}/")
    sys.exit(rc)
