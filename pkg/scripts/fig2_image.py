#!/usr/bin/env python3
"""Image-patch dictionary learning on a PGM image.

Defaults follow the reference protocol: 8x8 patches, 63 learned atoms plus
the constant atom, S=5, 10000 patches per iteration, 100 iterations of
ITKrM.  ``--desk-scale`` cuts the iteration and batch counts for a quick
run.  Exports the learned dictionary, the display dictionary (constant
atom prepended) and a tiled mosaic matrix for the plotting component.
"""

import argparse

from itkm.harness import ExperimentConfig, run_image


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("image", help="input PGM (P2 or P5) image")
    ap.add_argument("--out", default="out/fig2")
    ap.add_argument("--algorithm", choices=["ITKsM", "ITKrM"], default="ITKrM")
    ap.add_argument("--patch-edge", type=int, default=8)
    ap.add_argument("--S", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--desk-scale", action="store_true",
                    help="10 iterations of 2000 patches instead of 100 x 10000")
    args = ap.parse_args()

    iters, n = (10, 2000) if args.desk_scale else (100, 10_000)
    cfg = ExperimentConfig(
        experiment="image",
        image_path=args.image,
        patch_edge=args.patch_edge,
        S=args.S,
        algorithm=args.algorithm,
        iterations=iters,
        signals_per_iteration=n,
        trials=1,
        seed=args.seed,
        output_dir=args.out,
    )
    cfg.validate()
    path = run_image(cfg)
    print(f"learned dictionary: {path}")
    print(f"mosaic matrix: {cfg.output_dir}/mosaic.itkm")


if __name__ == "__main__":
    main()
