#!/usr/bin/env python3
"""Null-design expected-maximum experiment (desk scale).

Runs the bundled many-candidate null config and prints the per-K summary:
observed max elpd differences against the order-statistic prediction.
"""

import sys
from pathlib import Path

from cvbias.cli import main

ROOT = Path(__file__).resolve().parent.parent


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "out/null_expected_max"
    rc = main(["simulate", str(ROOT / "configs" / "null_expected_max.json"), "--output", out])
    if rc == 0:
        print(f"tables written to {out}/")
    sys.exit(rc)
