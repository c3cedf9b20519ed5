#!/usr/bin/env python3
"""Synthesize a grayscale PGM with rapidly decaying singular values.

A sum of smooth separable patterns (outer products of sinusoids) gives an
image that low-rank methods compress well — handy input for the CLI's
``truncate --reconstruct`` and ``tuxv --reconstruct`` demos.
"""

import argparse
import sys

import numpy as np

from rqrcp.matio import save_pgm


def demo_image(height, width, terms=8, seed=0):
    rng = np.random.default_rng(seed)
    y = np.linspace(0.0, np.pi, height)
    x = np.linspace(0.0, np.pi, width)
    img = np.zeros((height, width))
    for j in range(terms):
        weight = 0.5**j
        fy, fx = rng.integers(1, 6, size=2)
        py, px = rng.uniform(0, np.pi, size=2)
        img += weight * np.outer(np.sin(fy * y + py), np.sin(fx * x + px))
    img -= img.min()
    img /= img.max()
    return img


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--height", type=int, default=256)
    ap.add_argument("--width", type=int, default=256)
    ap.add_argument("--terms", type=int, default=8, help="separable components")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--maxval", type=int, default=255)
    ap.add_argument("--output", "-o", default="demo.pgm")
    args = ap.parse_args(argv)

    img = demo_image(args.height, args.width, terms=args.terms, seed=args.seed)
    save_pgm(img, args.output, maxval=args.maxval)
    print(f"wrote {args.output} ({args.height}x{args.width}, {args.terms} terms)",
          file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
