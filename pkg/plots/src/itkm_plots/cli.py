"""Command line interface: ``itkm-plots convergence`` and ``itkm-plots mosaic``.

Exit codes: 0 success, 2 bad data or arguments, 3 I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .figures import PlotSpec, plot_convergence, plot_mosaic
from .io import PlotDataError


def cmd_convergence(args) -> int:
    inputs = {}
    for item in args.csv:
        label, _, path = item.rpartition("=")
        inputs[label] = path
    spec = PlotSpec(inputs=inputs, output=args.out, metric=args.metric, title=args.title)
    out = plot_convergence(spec)
    print(f"wrote {out}")
    return 0


def cmd_mosaic(args) -> int:
    out = plot_mosaic(args.dictionary, args.patch_edge, args.out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="itkm-plots", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("convergence", help="trial-averaged metric curves from metrics CSVs")
    c.add_argument("csv", nargs="+", help="metrics CSV path, optionally 'label=path'")
    c.add_argument("--out", required=True)
    c.add_argument("--metric", choices=["d_asym", "recovery_rate"], default="d_asym")
    c.add_argument("--title")
    c.set_defaults(func=cmd_convergence)

    m = sub.add_parser("mosaic", help="atom-tile mosaic from an ITKM dictionary file")
    m.add_argument("dictionary")
    m.add_argument("--patch-edge", type=int, required=True)
    m.add_argument("--out", required=True)
    m.set_defaults(func=cmd_mosaic)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PlotDataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
