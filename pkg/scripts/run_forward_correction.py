#!/usr/bin/env python3
"""Forward-search bias-correction experiment (desk scale).

Runs the bundled block-DGP config: per-run stopping-rule verdicts plus the
long-format per-size trajectories (raw, corrected, test mlpd).
"""

import sys
from pathlib import Path

from cvbias.cli import main

ROOT = Path(__file__).resolve().parent.parent


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out/forward_correction"
    rc = main(["simulate", str(ROOT / "configs" / "forward_correction.json"), "--output", out])
    if rc == 0:
        print(f"tables written to {out}/")
    sys.exit(rc)
