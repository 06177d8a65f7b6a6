#!/usr/bin/env python3
"""Regenerate the committed ratio baselines under baselines/.

One JSON file per benchmark run, in the format the verify subcommand's
--baseline flag loads: {check_name: {str(N): ratio}}. Rerunning must
reproduce the committed files bit for bit; any diff means the greedy
construction or the metrics changed and the change needs a deliberate
baseline refresh.
"""

import argparse
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from lejacircle import (  # noqa: E402
    BASELINE_COUNTS,
    BENCHMARKS,
    benchmark_run,
    theorem1_ratio,
    theorem2_ratio,
)
from lejacircle.pointset import _atomic_write_text  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out-dir",
        default=os.path.join(os.path.dirname(__file__), "..", "baselines"),
    )
    args = parser.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    for name, spec in BENCHMARKS.items():
        result = benchmark_run(name)
        ratio = theorem1_ratio if spec.ratio_check == "theorem1" else \
            theorem2_ratio
        table = {str(n): ratio(result, n) for n in BASELINE_COUNTS}
        payload = {spec.ratio_check: table}
        path = os.path.join(args.out_dir, f"{name}.json")
        _atomic_write_text(
            path, json.dumps(payload, indent=2, sort_keys=True) + "\n"
        )
        worst = max(table.values())
        print(f"{name:13s} {spec.ratio_check}: "
              + " ".join(f"{n}={table[str(n)]:.6f}" for n in BASELINE_COUNTS)
              + f"  (max {worst:.6f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
