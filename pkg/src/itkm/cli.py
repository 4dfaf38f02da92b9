"""Command line interface.

Subcommands: gen-dict, synth-run, image-run, bounds, eval.
Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .dictionary import (
    compute_metrics,
    distance_asym,
    distance_sym,
    make_dirac_dct,
    random_dictionary,
    recovery_stats,
)
from .dataio import read_dictionary, write_dictionary, write_matrix_csv
from .harness import (
    ConfigError,
    ExperimentConfig,
    report_as_json,
    report_as_text,
    run_bounds,
    run_image,
    run_synthetic,
)

EXIT_CONFIG = 2
EXIT_IO = 3


def _add_config_overrides(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file (flags override file keys)")
    p.add_argument("--algorithm", choices=["ITKsM", "ITKrM"])
    p.add_argument("--d", type=int)
    p.add_argument("--S", type=int)
    p.add_argument("--noise-sigma", dest="noise_sigma", type=float)
    p.add_argument("--coefficients", choices=["flat", "geometric"])
    p.add_argument("--iterations", type=int)
    p.add_argument("--signals-per-iteration", dest="signals_per_iteration", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--init", choices=["ratio", "random", "file"])
    p.add_argument("--init-alpha", dest="init_alpha", type=float)
    p.add_argument("--init-omega", dest="init_omega", type=float)
    p.add_argument("--init-file", dest="init_file")
    p.add_argument("--dictionary-file", dest="dictionary_file")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--parallel-trials", dest="parallel_trials", action="store_const", const=True)
    p.add_argument("--target-error", dest="target_error", type=float)


def _build_config(args, experiment: str) -> ExperimentConfig:
    keys = [
        "algorithm", "d", "S", "noise_sigma", "coefficients", "iterations",
        "signals_per_iteration", "trials", "seed", "init", "init_alpha",
        "init_omega", "init_file", "dictionary_file", "output_dir",
        "parallel_trials", "target_error", "image_path", "patch_edge",
    ]
    overrides = {k: getattr(args, k, None) for k in keys}
    overrides["experiment"] = experiment
    if args.config:
        return ExperimentConfig.from_json(args.config, overrides)
    cfg = ExperimentConfig(**{k: v for k, v in overrides.items() if v is not None})
    cfg.validate()
    return cfg


def cmd_gen_dict(args) -> int:
    if args.type == "dirac-dct":
        D = make_dirac_dct(args.d)
    else:
        if args.K is None:
            print("gen-dict: --K required for random dictionaries", file=sys.stderr)
            return EXIT_CONFIG
        D = random_dictionary(args.d, args.K, np.random.default_rng(args.seed))
    write_dictionary(args.out, D)
    if args.csv:
        write_matrix_csv(args.csv, D.atoms)
    m = compute_metrics(D)
    print(f"wrote {args.out}: d={D.d} K={D.K} coherence={m.coherence:.6g} "
          f"A={m.frame_lower:.6g} B={m.frame_upper:.6g}")
    return 0


def cmd_synth_run(args) -> int:
    cfg = _build_config(args, "synthetic")
    path = run_synthetic(cfg)
    print(f"metrics written to {path}")
    return 0


def cmd_image_run(args) -> int:
    cfg = _build_config(args, "image")
    path = run_image(cfg)
    print(f"learned dictionary written to {path}")
    return 0


def cmd_bounds(args) -> int:
    cfg = _build_config(args, "synthetic")
    report = run_bounds(cfg)
    if args.json:
        print(report_as_json(report))
    else:
        print(report_as_text(report))
    return 0


def cmd_eval(args) -> int:
    A = read_dictionary(args.learned)
    B = read_dictionary(args.reference)
    d_lr = distance_asym(A, B)
    d_rl = distance_asym(B, A)
    ds, _, _ = distance_sym(B, A)
    rate, _ = recovery_stats(A, B, args.threshold)
    print(f"d(learned, reference) = {d_lr:.6g}")
    print(f"d(reference, learned) = {d_rl:.6g}")
    print(f"d_sym = {ds:.6g}")
    print(f"recovery rate (threshold {args.threshold}) = {rate:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="itkm", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-dict", help="generate and serialize a dictionary")
    g.add_argument("--type", choices=["dirac-dct", "random"], default="dirac-dct")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--K", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--csv")
    g.set_defaults(func=cmd_gen_dict)

    s = sub.add_parser("synth-run", help="run the synthetic experiment")
    _add_config_overrides(s)
    s.set_defaults(func=cmd_synth_run)

    i = sub.add_parser("image-run", help="run the image-patch experiment")
    _add_config_overrides(i)
    i.add_argument("--image", dest="image_path")
    i.add_argument("--patch-edge", dest="patch_edge", type=int)
    i.set_defaults(func=cmd_image_run)

    b = sub.add_parser("bounds", help="print the theoretical report")
    _add_config_overrides(b)
    b.add_argument("--json", action="store_true")
    b.set_defaults(func=cmd_bounds)

    e = sub.add_parser("eval", help="compare two dictionary files")
    e.add_argument("learned")
    e.add_argument("reference")
    e.add_argument("--threshold", type=float, default=0.99)
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
