#!/usr/bin/env python3
"""Produce the exact spectrum, wavefunction grid, and degeneracy table.

A thin driver over the CLI commands so the standard quantum artifacts for
one parameter set land in a single directory.
"""

import argparse
import os
import sys

from superint.cli import main as cli_main


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--k", default="3/2")
    parser.add_argument("--Q", type=float, default=1.0)
    parser.add_argument("--alpha", type=float, default=0.2)
    parser.add_argument("--beta", type=float, default=0.3)
    parser.add_argument("--out-dir", default="spectrum_report")
    args = parser.parse_args()

    os.makedirs(args.out_dir, exist_ok=True)
    from superint.quantum import exponents_from_couplings
    a, b = exponents_from_couplings(args.alpha, args.beta)

    failures = 0
    failures += cli_main(["spectrum", "--k", args.k, "--Q", str(args.Q),
                          "--a", str(a), "--b", str(b),
                          "--n-max", "3", "--m-max", "3", "--out-dir", args.out_dir])
    failures += cli_main(["degeneracy", "--k", args.k, "--N-max", "100",
                          "--out-dir", args.out_dir])
    failures += cli_main(["wavefunction-residual", "--k", args.k, "--Q", str(args.Q),
                          "--alpha", str(args.alpha), "--beta", str(args.beta),
                          "--n", "1", "--m", "1", "--export-grid",
                          "--out-dir", args.out_dir])
    failures += cli_main(["orthogonality", "--k", args.k, "--Q", str(args.Q),
                          "--alpha", str(args.alpha), "--beta", str(args.beta),
                          "--states", "0,0;1,0;0,1;1,1", "--out-dir", args.out_dir])
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
