#!/usr/bin/env python3
"""Compare the solved deterministic-equivalent density with the closed form.

For the identity ensemble the limiting spectral measure is the classical
square-root law on [(1-sqrt(c))^2, (1+sqrt(c))^2]; the fixed-point route
must reproduce it without knowing the formula.
"""

import argparse

import numpy as np

from specgap import build_identity, density, detect_support


def closed_form(xs, c):
    a, b = (1 - np.sqrt(c)) ** 2, (1 + np.sqrt(c)) ** 2
    out = np.zeros_like(xs)
    inside = (xs > a) & (xs < b)
    out[inside] = np.sqrt((b - xs[inside]) * (xs[inside] - a)) / (2 * np.pi * c * xs[inside])
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=64)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--steps", type=int, default=600)
    ap.add_argument("--y", type=float, default=1e-4)
    ap.add_argument("--csv", help="optionally dump x,solved,closed_form rows")
    args = ap.parse_args()

    ens = build_identity(args.N, args.n)
    c = ens.c
    a, b = (1 - np.sqrt(c)) ** 2, (1 + np.sqrt(c)) ** 2
    curve = density(ens, 0.0, b + 0.75, args.steps, y=args.y)
    ref = closed_form(curve.xs, c)
    away = (np.abs(curve.xs - a) > 0.05) & (np.abs(curve.xs - b) > 0.05)
    print(f"c = {c}, closed-form support [{a:.4f}, {b:.4f}]")
    print(f"mass = {curve.mass:.6f}")
    print(f"max |solved - closed form| away from edges = {np.abs(curve.ys - ref)[away].max():.2e}")

    report = detect_support(ens)
    (lo, hi), = report.intervals
    print(f"detected support [{lo:.5f}, {hi:.5f}]  (edge errors {abs(lo - a):.1e}, {abs(hi - b):.1e})")
    print(f"gap at zero: {report.epsilon_at_zero:.5f}")

    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write("x,solved,closed_form\n")
            for x, s, r in zip(curve.xs, curve.ys, ref):
                fh.write(f"{x:.17g},{s:.17g},{r:.17g}\n")
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
