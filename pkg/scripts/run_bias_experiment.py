#!/usr/bin/env python3
"""Monte Carlo estimate of sketch-based pivot selection quality.

For matrices with orthogonal columns of norms phi^0, phi^1, ... the script
reports, per decay rate phi, the expected true norm of the column an
ell-row Gaussian sketch's argmax rule picks (1.0 = always the best column).
"""

import argparse
import sys

from rqrcp.analysis import BiasExperimentConfig, selection_bias_experiment
from rqrcp.harness import write_bias_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rank", "-k", type=int, default=32, help="pivots per sketch")
    ap.add_argument("--pad", "-p", type=int, default=8, help="extra sketch rows")
    ap.add_argument("--trials", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--n-cols", type=int, default=128)
    ap.add_argument("--output", "-o", default=None, help="CSV path (default stdout)")
    args = ap.parse_args(argv)

    config = BiasExperimentConfig(
        k=args.rank, padding=args.pad, trials=args.trials,
        seed=args.seed, n_cols=args.n_cols,
    )
    phi, expectation = selection_bias_experiment(config)
    if args.output:
        with open(args.output, "w", newline="", encoding="ascii") as fh:
            write_bias_csv(phi, expectation, fh)
    else:
        write_bias_csv(phi, expectation, sys.stdout)
    print(
        f"min expectation {expectation.min():.4f} at phi={phi[expectation.argmin()]:.2f}",
        file=sys.stderr,
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
