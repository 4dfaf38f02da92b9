#!/usr/bin/env python3
"""Print the theoretical report (limiting error, convergence radii,
admissibility checks, iteration suggestions) for a model configuration."""

import argparse

from itkm.harness import ExperimentConfig, report_as_json, report_as_text, run_bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--d", type=int, default=256)
    ap.add_argument("--S", type=int, default=4)
    ap.add_argument("--coefficients", choices=["flat", "geometric"], default="flat")
    ap.add_argument("--noise-sigma", type=float, default=0.0)
    ap.add_argument("--target-error", type=float, default=1e-4)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    cfg = ExperimentConfig(
        d=args.d,
        S=args.S,
        coefficients=args.coefficients,
        noise_sigma=args.noise_sigma,
        target_error=args.target_error,
    )
    cfg.validate()
    report = run_bounds(cfg)
    print(report_as_json(report) if args.json else report_as_text(report))


if __name__ == "__main__":
    main()
