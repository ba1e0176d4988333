#!/usr/bin/env python3
"""Regenerate every figure dataset into one directory tree.

    python3 scripts/reproduce_figures.py [--out results] [--format csv]

Panels with several amplifier settings get one subdirectory each.
"""

import argparse
import sys
import time
from pathlib import Path

from immaculate.cli import main as cli

RUNS = [
    ("fig3", ["fig3"]),
    ("fig4", ["fig4"]),
    ("fig5/g_sqrt2_N4", ["fig5", "--g", "sqrt(2)", "--N", "4"]),
    ("fig5/g3_N9", ["fig5", "--g", "3", "--N", "9"]),
    ("fig6/g_sqrt2_N2", ["fig6", "--g", "sqrt(2)", "--N", "2"]),
    ("fig6/g_sqrt2_N4", ["fig6", "--g", "sqrt(2)", "--N", "4"]),
    ("fig6/g3_N9", ["fig6", "--g", "3", "--N", "9"]),
    ("fig7", ["fig7", "--g", "3", "--N", "9"]),
    ("fig8/g_sqrt2_N2", ["fig8", "--g", "sqrt(2)", "--N", "2"]),
    ("fig8/g3_N9", ["fig8", "--g", "3", "--N", "9"]),
    ("fig9/g_sqrt2_N2", ["fig9", "--g", "sqrt(2)", "--N", "2"]),
    ("fig9/g3_N9", ["fig9", "--g", "3", "--N", "9"]),
    ("usd_table", ["usd-table"]),
    ("bounds", ["bounds"]),
]


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("results"))
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    return p.parse_args()


def main():
    args = parse_args()
    status = 0
    for sub, argv in RUNS:
        t0 = time.perf_counter()
        rc = cli(argv + ["--out", str(args.out / sub), "--format", args.format])
        print(f"{sub:20s} rc={rc} {time.perf_counter() - t0:6.2f}s", file=sys.stderr)
        status = status or rc
    return status


if __name__ == "__main__":
    sys.exit(main())
