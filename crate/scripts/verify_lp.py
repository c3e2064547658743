#!/usr/bin/env python3
"""Manual cross-check of exported follower LP models (non-gating).

The crate's exact follower oracle and the exported CPLEX-LP model should
agree on the optimal objective. This script feeds an exported .lp file to
whatever MILP solver is installed locally (glpsol or cbc) and compares the
reported optimum against an expected value.

Typical session:

    cargo run --bin impd -- export-lp \
        --instance crates/impd/data/six_node.impd \
        --seeds 0,3 --realizations 1 --out /tmp/six_node.lp
    python3 scripts/verify_lp.py /tmp/six_node.lp --expect 1.0

The check is manual because the sandboxed CI image carries no MILP solver;
it is documented here rather than wired into the test suite.
"""

import argparse
import re
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path


def solve_with_glpsol(lp_path: Path) -> float:
    with tempfile.NamedTemporaryFile(mode="r", suffix=".sol") as out:
        subprocess.run(
            ["glpsol", "--lp", str(lp_path), "-o", out.name],
            check=True,
            capture_output=True,
            text=True,
        )
        text = Path(out.name).read_text()
    m = re.search(r"Objective:\s+\S+\s*=\s*([-\d.eE+]+)", text)
    if not m:
        raise RuntimeError("glpsol output had no objective line")
    return float(m.group(1))


def solve_with_cbc(lp_path: Path) -> float:
    with tempfile.NamedTemporaryFile(mode="r", suffix=".sol") as out:
        subprocess.run(
            ["cbc", str(lp_path), "solve", "solution", out.name],
            check=True,
            capture_output=True,
            text=True,
        )
        first = Path(out.name).read_text().splitlines()[0]
    m = re.search(r"objective value\s+([-\d.eE+]+)", first)
    if not m:
        raise RuntimeError(f"unexpected cbc solution header: {first!r}")
    return float(m.group(1))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("lp_file", type=Path, help="exported CPLEX-LP model")
    parser.add_argument(
        "--expect",
        type=float,
        default=None,
        help="expected optimum (e.g. the value printed by export-lp)",
    )
    parser.add_argument(
        "--tol", type=float, default=1e-6, help="comparison tolerance"
    )
    args = parser.parse_args()

    if not args.lp_file.is_file():
        print(f"error: {args.lp_file} not found", file=sys.stderr)
        return 2

    if shutil.which("glpsol"):
        value = solve_with_glpsol(args.lp_file)
        solver = "glpsol"
    elif shutil.which("cbc"):
        value = solve_with_cbc(args.lp_file)
        solver = "cbc"
    else:
        print(
            "error: no MILP solver found; install glpk or coin-or cbc",
            file=sys.stderr,
        )
        return 2

    print(f"{solver} optimum: {value:.6f}")
    if args.expect is not None:
        if abs(value - args.expect) <= args.tol:
            print(f"match: |{value:.6f} - {args.expect:.6f}| <= {args.tol}")
            return 0
        print(
            f"MISMATCH: solver {value:.6f} vs expected {args.expect:.6f}",
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
