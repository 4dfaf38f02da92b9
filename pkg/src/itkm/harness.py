"""Experiment runner: seeded synthetic and image-patch experiments.

Per-iteration metrics are appended to a CSV with schema
``trial,iter,algorithm,d_asym,recovery_rate,support_mismatch,sign_mismatch,replacements,seconds``
(one ``iter = -1`` row per trial records the initialization distance), and
an aggregate CSV holds per-iteration mean/min/max across trials.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from .dictionary import (
    Dictionary,
    compute_metrics,
    distance_asym,
    make_dirac_dct,
    perturb_init,
    random_dictionary,
    recovery_stats,
)
from .dataio import (
    extract_patches,
    preprocess_patches,
    read_dictionary,
    read_pgm,
    write_dictionary,
    write_matrix,
)
from .learn import DatasetSampler, IterationMetrics, LearnerConfig, SyntheticGenerator, learn
from .model import CoefficientSpec, statistics

CSV_HEADER = [
    "trial",
    "iter",
    "algorithm",
    "d_asym",
    "recovery_rate",
    "support_mismatch",
    "sign_mismatch",
    "replacements",
    "seconds",
]

__all__ = ["ExperimentConfig", "run_synthetic", "run_image", "run_bounds", "CSV_HEADER"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str = "synthetic"  # | 'image'
    # dictionary spec
    d: int = 64
    dictionary_file: str | None = None
    # model spec
    coefficients: str = "flat"
    S: int = 4
    noise_sigma: float = 0.0
    decay_low: float = 0.9
    decay_high: float = 1.0
    # init spec
    init: str = "ratio"  # 'ratio' | 'random' | 'file'
    init_alpha: float = 1.0
    init_omega: float = 1.0
    init_file: str | None = None
    # learner
    algorithm: str = "ITKrM"
    iterations: int = 40
    signals_per_iteration: int = 8192
    fresh_batch: bool = True
    replacement_policy: str = "random-redraw"
    # experiment
    trials: int = 1
    seed: int = 0
    output_dir: str = "out"
    parallel_trials: bool = False
    # image experiment
    image_path: str | None = None
    patch_edge: int = 8
    image_K: int | None = None  # default patch_edge^2 - 1 learned atoms
    # bounds
    target_error: float = 1e-4

    @classmethod
    def from_json(cls, path: str | Path, overrides: dict | None = None) -> "ExperimentConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path}: invalid JSON ({e})") from None
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"config {path}: unknown keys {sorted(unknown)}")
        if overrides:
            raw.update({k: v for k, v in overrides.items() if v is not None})
        try:
            cfg = cls(**raw)
        except TypeError as e:
            raise ConfigError(str(e)) from None
        cfg.validate()
        return cfg

    def validate(self):
        if self.experiment not in ("synthetic", "image"):
            raise ConfigError(f"experiment must be 'synthetic' or 'image', got {self.experiment!r}")
        if self.coefficients not in ("flat", "geometric"):
            raise ConfigError(f"coefficients must be 'flat' or 'geometric'")
        if self.init not in ("ratio", "random", "file"):
            raise ConfigError(f"init must be 'ratio', 'random' or 'file'")
        if self.init == "file" and not self.init_file:
            raise ConfigError("init='file' needs init_file")
        if self.algorithm not in ("ITKsM", "ITKrM"):
            raise ConfigError(f"algorithm must be 'ITKsM' or 'ITKrM'")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be >= 0")
        K = self._K()
        if not 1 <= self.S <= K:
            raise ConfigError(f"need 1 <= S <= K = {K}, got S = {self.S}")

    def _K(self) -> int:
        if self.experiment == "image":
            return self.image_K if self.image_K is not None else self.patch_edge**2 - 1
        if self.dictionary_file:
            return read_dictionary(self.dictionary_file).K
        return 3 * self.d // 2

    def generating_dictionary(self) -> Dictionary:
        if self.dictionary_file:
            return read_dictionary(self.dictionary_file)
        return make_dirac_dct(self.d)

    def coefficient_spec(self, K: int) -> CoefficientSpec:
        return CoefficientSpec(self.coefficients, self.S, K, self.decay_low, self.decay_high)

    def initial_dictionary(self, reference: Dictionary | None, d: int, K: int,
                           rng: np.random.Generator) -> Dictionary:
        if self.init == "file":
            return read_dictionary(self.init_file)
        if self.init == "random":
            return random_dictionary(d, K, rng)
        if reference is None:
            raise ConfigError("ratio initialization needs a generating dictionary")
        return perturb_init(reference, (self.init_alpha, self.init_omega), rng)

    def learner_config(self) -> LearnerConfig:
        return LearnerConfig(
            algorithm=self.algorithm,
            S=self.S,
            iterations=self.iterations,
            signals_per_iteration=self.signals_per_iteration,
            fresh_batch=self.fresh_batch,
            replacement_policy=self.replacement_policy,
            seed=self.seed,
        )


def _metric_row(trial: int, algorithm: str, m: IterationMetrics) -> list:
    return [
        trial,
        m.iteration,
        algorithm,
        f"{m.d_asym:.17g}",
        f"{m.recovery_rate:.17g}",
        m.support_mismatches,
        m.sign_mismatches,
        m.zero_norm_replacements,
        f"{m.wall_time_seconds:.6f}",
    ]


def _run_one_trial(cfg: ExperimentConfig, trial: int, seed_seq: np.random.SeedSequence):
    rng = np.random.default_rng(seed_seq)
    generating = cfg.generating_dictionary()
    spec = cfg.coefficient_spec(generating.K)
    init = cfg.initial_dictionary(generating, generating.d, generating.K, rng)
    source = SyntheticGenerator(generating, spec, cfg.noise_sigma)
    final, history = learn(init, cfg.learner_config(), source, rng)
    init_metrics = IterationMetrics(
        iteration=-1,
        d_asym=distance_asym(init, generating),
        recovery_rate=recovery_stats(init, generating)[0],
    )
    return final, [init_metrics] + history


def run_synthetic(cfg: ExperimentConfig) -> Path:
    """Run the synthetic experiment; returns the metrics CSV path."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.trials)
    results = []
    if cfg.parallel_trials and cfg.trials > 1:
        from concurrent.futures import ProcessPoolExecutor

        workers = int(os.environ.get("ITKM_THREADS", "0")) or None
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futures = [ex.submit(_run_one_trial, cfg, t, seeds[t]) for t in range(cfg.trials)]
            results = [f.result() for f in futures]
    else:
        results = [_run_one_trial(cfg, t, seeds[t]) for t in range(cfg.trials)]

    metrics_path = out / "metrics.csv"
    with open(metrics_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for t, (final, history) in enumerate(results):
            for m in history:
                w.writerow(_metric_row(t, cfg.algorithm, m))
    for t, (final, _) in enumerate(results):
        write_dictionary(out / f"dictionary_trial{t}.itkm", final)
    _write_aggregate(metrics_path, out / "metrics_aggregate.csv")
    return metrics_path


def _write_aggregate(metrics_path: Path, agg_path: Path) -> None:
    rows = list(csv.DictReader(open(metrics_path, newline="")))
    by_iter: dict[int, list[float]] = {}
    for r in rows:
        it = int(r["iter"])
        v = float(r["d_asym"])
        if not math.isnan(v):
            by_iter.setdefault(it, []).append(v)
    with open(agg_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["iter", "d_asym_mean", "d_asym_min", "d_asym_max"])
        for it in sorted(by_iter):
            vals = by_iter[it]
            w.writerow(
                [it, f"{np.mean(vals):.17g}", f"{np.min(vals):.17g}", f"{np.max(vals):.17g}"]
            )


def _mosaic(D: Dictionary, p: int) -> np.ndarray:
    """Tile atoms as p x p images in a near-square grid, per-tile min-max scaled."""
    if D.d != p * p:
        raise ConfigError(f"atoms of length {D.d} cannot be reshaped to {p}x{p}")
    cols = math.ceil(math.sqrt(D.K))
    rows = math.ceil(D.K / cols)
    grid = np.zeros((rows * p, cols * p))
    for k in range(D.K):
        tile = D.atoms[:, k].reshape(p, p)
        lo, hi = tile.min(), tile.max()
        if hi - lo > 1e-15:
            tile = (tile - lo) / (hi - lo)
        else:
            tile = np.full_like(tile, 0.5)
        r, c = divmod(k, cols)
        grid[r * p : (r + 1) * p, c * p : (c + 1) * p] = tile
    return grid


def run_image(cfg: ExperimentConfig) -> Path:
    """Image-patch experiment; returns the learned-dictionary file path.

    Learns patch_edge^2 - 1 atoms on mean-removed patches; the exported
    display dictionary prepends the constant atom.
    """
    if not cfg.image_path:
        raise ConfigError("image experiment needs image_path")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    img = read_pgm(cfg.image_path)
    p = cfg.patch_edge
    patches = preprocess_patches(extract_patches(img, p))
    rng = np.random.default_rng(cfg.seed)
    K = cfg.image_K if cfg.image_K is not None else p * p - 1
    d = p * p
    init = random_dictionary(d, K, rng)
    sampler = DatasetSampler(patches.patches, replace=True)
    final, history = learn(init, cfg.learner_config(), sampler, rng)
    write_dictionary(out / "dictionary_learned.itkm", final)
    # display dictionary with the constant atom prepended
    const = np.full((d, 1), 1.0 / p)
    display = Dictionary(np.hstack([const, final.atoms]))
    write_dictionary(out / "dictionary_display.itkm", display)
    write_matrix(out / "mosaic.itkm", _mosaic(display, p))
    with open(out / "metrics.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for m in history:
            w.writerow(_metric_row(0, cfg.algorithm, m))
    return out / "dictionary_learned.itkm"


def run_bounds(cfg: ExperimentConfig, mc_samples: int = 100_000) -> bounds_mod.TheoryReport:
    """Evaluate the theoretical report for the configured model."""
    D = cfg.generating_dictionary()
    metrics = compute_metrics(D)
    spec = cfg.coefficient_spec(D.K)
    stats = statistics(spec, cfg.noise_sigma, D.d, mc_samples, np.random.default_rng(cfg.seed))
    inp = bounds_mod.TheoryInputs(
        d=D.d,
        K=D.K,
        S=cfg.S,
        mu=metrics.coherence,
        A=metrics.frame_lower,
        B=metrics.frame_upper,
        beta_S=stats.beta_S,
        delta_S=stats.delta_S_rel,
        gamma1_S=stats.gamma1_S,
        gamma2_S=stats.gamma2_S,
        C_r=stats.C_r,
        rho=cfg.noise_sigma,
        target_error=cfg.target_error,
    )
    return bounds_mod.build_report(inp)


def report_as_text(report) -> str:
    lines = []
    for k, v in asdict(report).items():
        if isinstance(v, float):
            lines.append(f"{k:32s} {v:.6g}")
        else:
            lines.append(f"{k:32s} {v}")
    return "\n".join(lines)


def report_as_json(report) -> str:
    return json.dumps(asdict(report), indent=2)
