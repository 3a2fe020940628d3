#!/usr/bin/env python3
"""Run the desk-scale probing matrix on the bundled synthetic task.

Covers eigennoise vs. random embeddings, frozen vs. unfrozen, across the
three default seeds, and prints the aggregate codelength/accuracy table.
Identical invocations produce byte-identical report bodies.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from eigennoise import cli


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=2000, help="training examples")
    parser.add_argument("--d", type=int, default=50, help="embedding dimension")
    parser.add_argument("--kind", choices=("separable", "noisy"), default="separable")
    parser.add_argument("--seeds", default="0,1234,322111")
    parser.add_argument("--output-dir", default="runs/desk")
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()

    argv = [
        "probe", "run",
        "--task", "synthetic",
        "--kind", args.kind,
        "--n", str(args.n),
        "--d", str(args.d),
        "--frozen", "both",
        "--seeds", args.seeds,
        "--output-dir", args.output_dir,
    ]
    if args.workers is not None:
        argv += ["--workers", str(args.workers)]

    start = time.perf_counter()
    rc = cli.main(argv)
    elapsed = time.perf_counter() - start
    print(f"\nfinished in {elapsed:.1f}s -> {args.output_dir}/report.txt")
    return rc


if __name__ == "__main__":
    sys.exit(main())
