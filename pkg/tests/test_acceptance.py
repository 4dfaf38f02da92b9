"""Acceptance suite.

Each criterion prints one PASS/FAIL line (visible with ``pytest -v -rA`` or
in the failure output) and asserts at the stated tolerance.  Criteria are
checked at their literal thresholds; none are weakened.
"""

import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest

from itkm.dataio import (
    read_dictionary,
    read_matrix,
    read_matrix_csv,
    read_pgm,
    write_matrix,
    write_matrix_csv,
)
from itkm.dictionary import (
    Dictionary,
    compute_metrics,
    distance_asym,
    make_dirac_dct,
    perturb_init,
    random_dictionary,
)
from itkm.learn import LearnerConfig, SyntheticGenerator, itkrm_iteration, itksm_iteration, learn
from itkm.model import CoefficientSpec, draw_batch
from itkm.sparse import count_failures, threshold
from itkm import bounds

DATA = Path(__file__).parent / "data"


def report(name: str, ok: bool, detail: str):
    line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line)
    assert ok, line


# --------------------------------------------------------------------------
# 1. thresholding exactness
# --------------------------------------------------------------------------


def test_criterion_01_thresholding_exactness():
    rng = np.random.default_rng(101)
    t0 = time.perf_counter()
    failures = 0
    for _ in range(1000):
        d = int(rng.integers(2, 9))
        K = int(rng.integers(2, 11))
        S = int(rng.integers(1, min(3, K) + 1))
        D = random_dictionary(d, K, rng)
        y = rng.standard_normal(d)
        got = set(threshold(D, y, S).indices.tolist())
        scores = np.abs(D.atoms.T @ y)
        best_val = -1.0
        best_sets = []
        for I in itertools.combinations(range(K), S):
            v = float(np.sum(scores[list(I)]))
            if v > best_val + 1e-12:
                best_val, best_sets = v, [set(I)]
            elif abs(v - best_val) <= 1e-12:
                best_sets.append(set(I))
        if got not in best_sets:
            failures += 1
    elapsed = time.perf_counter() - t0
    report(
        "1",
        failures == 0 and elapsed < 10.0,
        f"{failures}/1000 mismatches vs exhaustive l1 argmax, {elapsed:.1f}s (< 10s)",
    )


# --------------------------------------------------------------------------
# 2. S=1 algorithm identity
# --------------------------------------------------------------------------


def test_criterion_02_s1_identity():
    rng = np.random.default_rng(102)
    worst = 0.0
    for _ in range(50):
        D = random_dictionary(16, 24, rng)
        P = random_dictionary(16, 24, rng)
        Y = rng.standard_normal((16, 500))
        from itkm.model import SignalBatch

        batch = SignalBatch(Y, None, None, None, 0.0, None)
        a, _ = itksm_iteration(P, batch, 1, "keep-previous")
        b, _ = itkrm_iteration(P, batch, 1, "keep-previous")
        worst = max(worst, float(np.max(np.linalg.norm(a.atoms - b.atoms, axis=0))))
    report("2", worst <= 1e-12, f"max per-atom ITKsM/ITKrM gap {worst:.3e} (<= 1e-12)")


# --------------------------------------------------------------------------
# 3. fixed point in the strongly sparse noiseless regime
# --------------------------------------------------------------------------


def test_criterion_03_strongly_sparse_fixed_point():
    D = read_dictionary(DATA / "incoherent_32x48.itkm")
    assert (D.d, D.K) == (32, 48)
    mu = compute_metrics(D).coherence
    S = 3
    assert 1.0 > 2 * mu * S, "test asset must satisfy the strong sparsity condition"
    spec = CoefficientSpec("flat", S=S, K=48)
    batch = draw_batch(D, spec, 0.0, 5000, np.random.default_rng(103))
    sup_fail, sign_fail = count_failures(D, batch, S)
    out, _ = itkrm_iteration(D, batch, S, "keep-previous")
    gap = float(np.max(np.linalg.norm(out.atoms - D.atoms, axis=0)))
    report(
        "3",
        gap <= 1e-8 and sup_fail == 0 and sign_fail == 0,
        f"one-step gap {gap:.3e} (<= 1e-8), failures ({sup_fail}, {sign_fail}) (= (0, 0)), "
        f"2*mu*S = {2 * mu * S:.3f} < 1",
    )


# --------------------------------------------------------------------------
# 4. scaled noiseless convergence run (shared by 4a / 4b / 4c)
# --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def noiseless_runs():
    D = make_dirac_dct(64)
    spec = CoefficientSpec("flat", S=4, K=96)
    src = SyntheticGenerator(D, spec, 0.0)
    finals = {"ITKsM": [], "ITKrM": []}
    init_gaps = []
    for seed in range(3):
        init = perturb_init(D, (1.0, 1.0), np.random.default_rng(1000 + seed))
        init_gaps.append(float(np.max(np.linalg.norm(init.atoms - D.atoms, axis=0))))
        for algo in ("ITKsM", "ITKrM"):
            cfg = LearnerConfig(algo, S=4, iterations=40, signals_per_iteration=8192,
                                seed=2000 + seed)
            final, hist = learn(init, cfg, src)
            finals[algo].append(hist[-1].d_asym)
    return finals, init_gaps


def test_criterion_04_init_distance(noiseless_runs):
    _, init_gaps = noiseless_runs
    target = math.sqrt(2 - math.sqrt(2))
    dev = max(abs(g - target) for g in init_gaps)
    report("4-init", dev <= 1e-10, f"1:1 init distance deviation {dev:.3e} (<= 1e-10)")


def test_criterion_04a_itkrm_final(noiseless_runs):
    finals, _ = noiseless_runs
    worst = max(finals["ITKrM"])
    report(
        "4a",
        worst < 1e-3,
        f"ITKrM final d_asym per seed {['%.3e' % v for v in finals['ITKrM']]} (< 1e-3)",
    )


def test_criterion_04b_itksm_final(noiseless_runs):
    finals, _ = noiseless_runs
    worst = max(finals["ITKsM"])
    report(
        "4b",
        worst < 5e-2,
        f"ITKsM final d_asym per seed {['%.3e' % v for v in finals['ITKsM']]} (< 5e-2)",
    )


def test_criterion_04c_itkrm_beats_itksm(noiseless_runs):
    finals, _ = noiseless_runs
    ok = all(r < s for r, s in zip(finals["ITKrM"], finals["ITKsM"]))
    report(
        "4c",
        ok,
        "ITKrM < ITKsM per seed: "
        + ", ".join(f"{r:.3e} vs {s:.3e}" for r, s in zip(finals["ITKrM"], finals["ITKsM"])),
    )


# --------------------------------------------------------------------------
# 5. noisy local stability (shared run)
# --------------------------------------------------------------------------


@pytest.fixture(scope="module")
def noisy_runs():
    D = make_dirac_dct(64)
    spec = CoefficientSpec("geometric", S=4, K=96)
    src = SyntheticGenerator(D, spec, 1.0 / math.sqrt(64))
    out = {"ITKsM": [], "ITKrM": []}
    initial = math.sqrt(2 - math.sqrt(2))
    for seed in range(3):
        init = perturb_init(D, (1.0, 1.0), np.random.default_rng(3000 + seed))
        for algo in ("ITKsM", "ITKrM"):
            cfg = LearnerConfig(algo, S=4, iterations=40, signals_per_iteration=8192,
                                seed=4000 + seed)
            final, hist = learn(init, cfg, src)
            out[algo].append(hist[-1].d_asym)
    return out, initial


def test_criterion_05_itksm_noisy_stability(noisy_runs):
    finals, initial = noisy_runs
    worst = max(finals["ITKsM"])
    report(
        "5-ITKsM",
        worst <= initial / 5,
        f"ITKsM final per seed {['%.3f' % v for v in finals['ITKsM']]} "
        f"(<= initial/5 = {initial / 5:.3f})",
    )


def test_criterion_05_itkrm_noisy_stability(noisy_runs):
    finals, initial = noisy_runs
    worst = max(finals["ITKrM"])
    report(
        "5-ITKrM",
        worst <= initial / 5,
        f"ITKrM final per seed {['%.3f' % v for v in finals['ITKrM']]} "
        f"(<= initial/5 = {initial / 5:.3f})",
    )


# --------------------------------------------------------------------------
# 6. signed-signal mean concentration (oracle supports)
# --------------------------------------------------------------------------


def test_criterion_06_signed_mean_concentration():
    D = make_dirac_dct(32)
    S, K, N = 4, 48, 100_000
    spec = CoefficientSpec("flat", S=S, K=K)
    batch = draw_batch(D, spec, 0.0, N, np.random.default_rng(106))
    gamma1 = math.sqrt(S)
    # per-atom average of y * sigma(k) over signals whose oracle support holds k
    W = np.zeros((K, N))
    np.put_along_axis(W.T, batch.supports, batch.signs, axis=1)
    means = (batch.signals @ W.T) / N  # d x K
    gaps = np.linalg.norm(means - (gamma1 / K) * D.atoms, axis=0)
    tol = 5 * math.sqrt(S / K) / math.sqrt(N)
    worst = float(np.max(gaps))
    report("6", worst <= tol, f"max atom deviation {worst:.3e} (<= {tol:.3e})")


# --------------------------------------------------------------------------
# 7. rescaling inequality property test
# --------------------------------------------------------------------------


def test_criterion_07_rescaling_inequality():
    rng = np.random.default_rng(107)
    violations = 0
    worst_excess = -np.inf
    for _ in range(10_000):
        d = int(rng.integers(2, 17))
        phi = rng.standard_normal(d)
        phi /= np.linalg.norm(phi)
        s = float(rng.uniform(0.1, 3.0))
        t = float(rng.uniform(0.0, s * 0.999))
        e = rng.standard_normal(d)
        e *= rng.uniform(0.0, 1.0) * t / np.linalg.norm(e)
        psi_bar = s * phi + e
        lhs = float(np.sum((psi_bar / np.linalg.norm(psi_bar) - phi) ** 2))
        rhs = 2 - 2 * math.sqrt(1 - (t / s) ** 2)
        worst_excess = max(worst_excess, lhs - rhs)
        if lhs > rhs + 1e-12:
            violations += 1
    report(
        "7",
        violations == 0,
        f"{violations}/10000 violations, worst lhs-rhs = {worst_excess:.3e} (<= 1e-12)",
    )


# --------------------------------------------------------------------------
# 8. paper constants
# --------------------------------------------------------------------------


def test_criterion_08_paper_constants():
    checks = []

    # asymmetric-distance example on the canonical basis
    d = 16
    Phi = np.eye(d)
    Psi = Phi.copy()
    Psi[:, 0] = (Phi[:, 0] + Phi[:, 1]) / math.sqrt(2)
    Psi[:, 1] = np.full(d, 1 / math.sqrt(d))
    got_fwd = distance_asym(Dictionary(Phi), Dictionary(Psi))
    got_bwd = distance_asym(Dictionary(Psi), Dictionary(Phi))
    checks.append(("d(Phi,Psi) = 1/sqrt(2)", abs(got_fwd - 1 / math.sqrt(2)), got_fwd))
    checks.append(
        ("d(Psi,Phi) = sqrt(2-2/sqrt(d))", abs(got_bwd - math.sqrt(2 - 2 / math.sqrt(d))), got_bwd)
    )

    # initialization distances at ratios 1:1 and 1:4
    D = make_dirac_dct(64)
    rng = np.random.default_rng(108)
    g11 = float(
        np.max(np.linalg.norm(perturb_init(D, (1.0, 1.0), rng).atoms - D.atoms, axis=0))
    )
    g14 = float(
        np.max(np.linalg.norm(perturb_init(D, (1.0, 4.0), rng).atoms - D.atoms, axis=0))
    )
    checks.append(("init 1:1 = sqrt(2-sqrt(2))", abs(g11 - math.sqrt(2 - math.sqrt(2))), g11))
    checks.append(("init 1:4 = sqrt(2-2/sqrt(17))", abs(g14 - math.sqrt(2 - 2 / math.sqrt(17))), g14))

    # Dirac+DCT coherence at d = 256
    mu = compute_metrics(make_dirac_dct(256)).coherence
    checks.append(("coherence(256) = sqrt(2/256)", abs(mu - math.sqrt(2 / 256)), mu))

    # patch count for a 256 x 256 image with p = 8
    count = (256 - 8 + 1) ** 2
    checks.append(("patch count 62001", abs(count - 62001), count))

    bad = [(name, dev, got) for name, dev, got in checks if dev > 1e-10]
    detail = "; ".join(f"{name}: got {got}, dev {dev:.3e}" for name, dev, got in (bad or checks))
    report("8", not bad, detail)


# --------------------------------------------------------------------------
# 9. bound formulas vs independent duplicates on a grid
# --------------------------------------------------------------------------


def test_criterion_09_bound_formula_grid():
    rng = np.random.default_rng(109)
    worst_rel = 0.0
    mono_ok = True
    prev_by_mu = {}
    for i in range(50):
        K = int(rng.integers(10, 1000))
        d = int(rng.integers(4, K))
        S = int(rng.integers(1, 9))
        mu = float(rng.uniform(1e-4, 0.05))
        B = float(rng.uniform(1.0, 4.0))
        rho = float(rng.uniform(0.0, 0.3))
        beta = float(rng.uniform(0.05, 1.0)) / math.sqrt(S)
        delta = float(rng.uniform(max(0.3, 2 * mu * S + 0.05), 1.0))
        gamma1 = float(rng.uniform(1.0, math.sqrt(S)))
        cr = float(rng.uniform(0.5, 1.0))
        inp = bounds.TheoryInputs(
            d=d, K=K, S=S, mu=mu, A=1.0, B=B, beta_S=beta, delta_S=delta,
            gamma1_S=gamma1, gamma2_S=1.0, C_r=cr, rho=rho,
        )

        def rel(a, b):
            return abs(a - b) / max(abs(b), 1e-300)

        m = max(mu * mu, rho * rho)
        e_min = 8 * K**2 * math.sqrt(B + 1) / (cr * gamma1) * math.exp(-beta * beta / (98 * m))
        worst_rel = max(worst_rel, rel(bounds.eps_min(inp), e_min))

        r_sm = delta / (
            math.sqrt(98 * B)
            * (0.25 + math.sqrt(math.log(1060 * K**2 * (B + 1) / (delta * cr * gamma1))))
        )
        worst_rel = max(worst_rel, rel(bounds.radius_itksm(inp), r_sm))

        gap = delta - 2 * mu * S
        r_sm_x = gap / (
            math.sqrt(98 * B) * (0.25 + math.sqrt(math.log(1060 * K**2 * B / (gap * gamma1))))
        )
        worst_rel = max(worst_rel, rel(bounds.radius_itksm_exact(inp), r_sm_x))

        r_rm_log = delta / (
            math.sqrt(98 * B)
            * (0.25 + math.sqrt(math.log(2544 * K**2 * (B + 1) / (delta * cr * gamma1))))
        )
        got_log, got_sqrt = bounds.radii_itkrm(inp)
        worst_rel = max(worst_rel, rel(got_log, r_rm_log))
        worst_rel = max(worst_rel, rel(got_sqrt, 1 / (32 * math.sqrt(S))))

        r_rm_x = gap / (
            math.sqrt(12) * (0.25 + math.sqrt(math.log(23 * K**2 * math.sqrt(B) / (gap * gamma1))))
        )
        worst_rel = max(worst_rel, rel(bounds.radius_itkrm_exact(inp), r_rm_x))

        e_delta = K * math.exp(-1 / (4741 * mu * mu * S))
        worst_rel = max(worst_rel, rel(bounds.eps_delta(K, mu, S), e_delta))

        crl = (1 - math.exp(-d)) / math.sqrt(1 + 5 * d * rho * rho)
        worst_rel = max(worst_rel, rel(bounds.c_r_lower(d, rho), crl))

        # monotonicity spot checks on the same point
        if bounds.eps_min(inp) > bounds.eps_min(
            bounds.TheoryInputs(d=d, K=K, S=S, mu=mu, A=1.0, B=B, beta_S=beta,
                                delta_S=delta, gamma1_S=gamma1, gamma2_S=1.0,
                                C_r=cr, rho=rho + 0.1)
        ):
            mono_ok = False  # eps_min must not decrease with noise
        if bounds.radius_itksm_exact(inp) > bounds.radius_itksm(
            bounds.TheoryInputs(d=d, K=K, S=S, mu=0.0 + 1e-9, A=1.0, B=B, beta_S=beta,
                                delta_S=delta, gamma1_S=gamma1, gamma2_S=1.0,
                                C_r=1.0, rho=0.0)
        ) * (1 + 1e-9) and cr == 1.0:
            mono_ok = False
    report(
        "9",
        worst_rel <= 1e-12 and mono_ok,
        f"worst relative gap {worst_rel:.3e} (<= 1e-12), monotonicity {'ok' if mono_ok else 'violated'}",
    )


# --------------------------------------------------------------------------
# 10. format round trips
# --------------------------------------------------------------------------


def test_criterion_10_format_round_trips(tmp_path):
    rng = np.random.default_rng(110)
    M = rng.standard_normal((13, 7))
    ok = True
    details = []

    # binary: bit-exact
    p = tmp_path / "m.itkm"
    write_matrix(p, M)
    bit_exact = read_matrix(p).tobytes() == M.tobytes()
    ok &= bit_exact
    details.append(f"binary bit-exact: {bit_exact}")

    # csv: value-exact
    c = tmp_path / "m.csv"
    write_matrix_csv(c, M)
    value_exact = bool(np.array_equal(read_matrix_csv(c), M))
    ok &= value_exact
    details.append(f"csv value-exact: {value_exact}")

    # pgm: P2 and P5 encodings of the same image parse identically
    pixels = rng.integers(0, 256, size=(9, 11), dtype=np.uint8)
    p5 = tmp_path / "img5.pgm"
    p5.write_bytes(b"P5\n11 9\n255\n" + pixels.tobytes())
    p2 = tmp_path / "img2.pgm"
    p2.write_text("P2\n11 9\n255\n" + "\n".join(" ".join(map(str, row)) for row in pixels))
    a, b = read_pgm(p5), read_pgm(p2)
    pgm_equal = bool(np.array_equal(a.data, b.data)) and (a.width, a.height) == (b.width, b.height)
    ok &= pgm_equal
    details.append(f"pgm P2/P5 equivalence: {pgm_equal}")

    report("10", ok, "; ".join(details))
