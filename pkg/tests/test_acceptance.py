"""Acceptance suite: one printed PASS/FAIL line per criterion (see the terminal summary).

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python3 tests/test_acceptance.py``.
"""

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE, BETAS
from beliefpool.cli import main as cli_main
from beliefpool.learning import run
from beliefpool.observation import two_hypothesis_exponential, two_hypothesis_gaussian
from beliefpool.rates import (
    empirical_rate,
    exchangeable_bound,
    ga_rate,
    gap_estimate,
    inept_bound,
    matrix_product_rate,
    minimize_F,
    rank_one_exact,
    subadditive_bounds,
)
from beliefpool.topology import (
    NONREGULAR_24_EDGES,
    build_d_regular,
    build_fully_connected_uniform,
    build_lazy_metropolis,
)

ROOT = Path(__file__).resolve().parents[1]

# pinned tolerances and reference values
GA_REF, GA_TOL = 0.7261, 1e-4
RANK_ONE_REF, RANK_ONE_ABS_TOL, N_SIGMA, RANK_ONE_SAMPLES = 0.0457, 0.003, 3.0, 1_000_000
REL_TOL_5PCT = 0.05
ALPHA = 0.05
AA_LOWER = 0.0363  # alpha * rho_GA as printed
GAP_ZERO_TOL = 1e-6
V_STAR_TOL = 1e-3
ITERS, TRIALS = 20_000, 20
GAMMA_HORIZON, GAMMA_TRIALS = 20_000, 50
GAP_HORIZON, GAP_CHAINS = 20_000, 16
SUB_TRIALS = 20_000
INEPT_ALPHAS = (0.01, 0.5, 0.8, 0.95)
CORRELATIONS = (0.0, 0.4, 0.6, 0.9)

UNIFORM = np.full(10, 0.1)
PAPER = two_hypothesis_exponential(BETAS)
BETA3 = two_hypothesis_exponential(np.full(10, 3.0))
CONFIGS = {
    "2-regular": build_d_regular(10, 2, ALPHA),
    "3-regular": build_d_regular(10, 3, ALPHA),
    "rank-one": build_fully_connected_uniform(10),
}


def check(crit, name, ok, detail):
    ACCEPTANCE.setdefault(crit, []).append((name, bool(ok), detail))
    return bool(ok)


def combined(*se):
    return math.sqrt(sum(s * s for s in se))


@pytest.fixture(scope="module")
def gammas():
    return {name: matrix_product_rate(A, PAPER, 0, 1, horizon=GAMMA_HORIZON, trials=GAMMA_TRIALS, seed=101)
            for name, A in CONFIGS.items()}


def test_criterion_1_ga_closed_form():
    t = time.perf_counter()
    rho = ga_rate(UNIFORM, PAPER, 0, 1)
    dt = time.perf_counter() - t
    ok = check(1, "ga_rate", abs(rho - GA_REF) <= GA_TOL, f"{rho:.6f} vs {GA_REF} (tol {GA_TOL})")
    ok &= check(1, "instantaneous", dt < 1.0, f"{dt * 1e3:.2f} ms")
    assert ok


def test_criterion_2_rank_one_rate():
    t = time.perf_counter()
    est = rank_one_exact(UNIFORM, BETA3, 0, 1, samples=RANK_ONE_SAMPLES, seed=0)
    dt = time.perf_counter() - t
    dev = abs(est.value - RANK_ONE_REF)
    ok_abs = check(2, "absolute", dev <= RANK_ONE_ABS_TOL,
                   f"|{est.value:.5f} - {RANK_ONE_REF}| = {dev:.5f} <= {RANK_ONE_ABS_TOL}")
    ok_time = check(2, "runtime", dt < 10.0, f"{dt:.1f} s")
    ok_se = check(2, "3-stderr", dev <= N_SIGMA * est.stderr,
                  f"deviation {dev / est.stderr:.1f} stderr (stderr {est.stderr:.1e}, "
                  f"{est.samples} samples)")
    assert ok_abs and ok_time and ok_se


def test_criterion_3_empirical_ga():
    t = time.perf_counter()
    tr = run("ga_diffusion", CONFIGS["2-regular"], PAPER, 0, ITERS, seed=202, trials=TRIALS)
    er = empirical_rate(tr, 1)
    dt = time.perf_counter() - t
    ok = check(3, "pooled", abs(er.pooled - GA_REF) <= REL_TOL_5PCT * GA_REF,
               f"{er.pooled:.4f} within 5% of {GA_REF}")
    ok &= check(3, "agent spread", er.spread < REL_TOL_5PCT * er.pooled, f"{er.spread:.2e}")
    ok &= check(3, "runtime", dt < 30.0, f"{dt:.1f} s")
    assert ok


def test_criterion_4_aa_ordering(gammas):
    t = time.perf_counter()
    ok = True
    for name in ("2-regular", "3-regular"):
        tr = run("aa_diffusion", CONFIGS[name], PAPER, 0, ITERS, seed=303, trials=TRIALS)
        emp = empirical_rate(tr, 1).pooled
        g = gammas[name].rate
        ok &= check(4, f"{name} empirical", AA_LOWER < emp < GA_REF, f"{emp:.4f} in ({AA_LOWER}, {GA_REF})")
        ok &= check(4, f"{name} -gamma", AA_LOWER < g < GA_REF, f"{g:.4f} in ({AA_LOWER}, {GA_REF})")
    dt = time.perf_counter() - t
    ok &= check(4, "runtime", dt < 120.0, f"{dt:.1f} s")
    assert ok


def test_criterion_5_gap_consistency(gammas):
    t = time.perf_counter()
    ok = True
    for name, A in CONFIGS.items():
        g = gap_estimate(A, PAPER, 0, 1, horizon=GAP_HORIZON, chains=GAP_CHAINS, seed=404)
        m = gammas[name]
        target = ga_rate(A, PAPER, 0, 1) - m.rate
        se = combined(g.stderr, m.stderr)
        ok &= check(5, name, abs(g.value - target) <= N_SIGMA * se,
                    f"gap {g.value:.4f} vs {target:.4f} ({abs(g.value - target) / se:.1f} stderr)")
    dt = time.perf_counter() - t
    ok &= check(5, "runtime", dt < 120.0, f"{dt:.1f} s")
    assert ok


def test_criterion_6_subadditive_bracket(gammas):
    ok = True
    for name, A in CONFIGS.items():
        m = gammas[name]
        for j in (1, 5, 20):
            b = subadditive_bounds(A, PAPER, 0, 1, j, trials=SUB_TRIALS, seed=505 + j)
            lo_ok = b.lower <= m.gamma + N_SIGMA * combined(b.lower_stderr, m.stderr)
            hi_ok = m.gamma <= b.upper + N_SIGMA * combined(b.upper_stderr, m.stderr)
            ok &= check(6, f"{name} j={j}", lo_ok and hi_ok,
                        f"{b.lower:.4f} <= {m.gamma:.4f} <= {b.upper:.4f}")
            if name == "rank-one" and j == 1:
                ok &= check(6, "rank-one j=1 collapse",
                            abs(b.lower - b.upper) < 1e-12
                            and abs(b.lower - m.gamma) <= N_SIGMA * combined(b.lower_stderr, m.stderr),
                            f"lower=upper={b.lower:.4f}, gamma {m.gamma:.4f}")
    assert ok


def test_criterion_7_inept_agent():
    t = time.perf_counter()
    model = two_hypothesis_exponential([1.0] + BETAS[1:])
    aa, ga, bounds = [], [], []
    for a in INEPT_ALPHAS:
        A = build_lazy_metropolis(NONREGULAR_24_EDGES, a)
        aa.append(empirical_rate(run("aa_diffusion", A, model, 0, ITERS, seed=606, trials=TRIALS), 1).pooled)
        ga.append(empirical_rate(run("ga_diffusion", A, model, 0, ITERS, seed=606, trials=TRIALS), 1).pooled)
        bounds.append(inept_bound(A, model, 0, 1, 0))
    dt = time.perf_counter() - t
    rho = ga_rate(UNIFORM, model, 0, 1)
    ok = check(7, "AA decreasing", all(x > y for x, y in zip(aa, aa[1:])), " > ".join(f"{x:.4f}" for x in aa))
    ok &= check(7, "AA <= inept bound", all(x <= b for x, b in zip(aa, bounds)),
                ", ".join(f"{x:.4f}<={b:.4f}" for x, b in zip(aa, bounds)))
    ok &= check(7, "GA alpha-invariant", max(abs(g - rho) for g in ga) <= REL_TOL_5PCT * rho
                and (max(ga) - min(ga)) <= REL_TOL_5PCT * rho, " ".join(f"{g:.4f}" for g in ga))
    ok &= check(7, "runtime", dt < 180.0, f"{dt:.1f} s")
    assert ok


def test_criterion_8_exchangeable_closed_form():
    A = build_lazy_metropolis(NONREGULAR_24_EDGES, ALPHA)
    f = minimize_F(A, BETA3, 0, 1, samples=200_000, seed=707)
    dev = float(np.max(np.abs(f.v - 0.1)))
    ok = check(8, "v* uniform", dev < V_STAR_TOL, f"||v* - 1/K||_inf = {dev:.1e}")
    xb = exchangeable_bound(A, BETA3, 0, 1, samples=1_000_000, seed=707)
    emp = empirical_rate(run("aa_diffusion", A, BETA3, 0, ITERS, seed=707, trials=TRIALS), 1)
    ok &= check(8, "B_A above AA rate", np.isfinite(xb.B_A) and xb.B_A > emp.pooled,
                f"B_A {xb.B_A:.4f} > {emp.pooled:.4f} (delta {xb.dobrushin:.2f})")
    assert ok


def test_criterion_9_identical_data():
    A = CONFIGS["2-regular"]
    m1 = two_hypothesis_gaussian(10, 10.0, 1.0)
    g = gap_estimate(A, m1, 0, 1, horizon=GAP_HORIZON, seed=808)
    ok = check(9, "c=1 gap", g.value < GAP_ZERO_TOL, f"{g.value:.2e}")
    rho = ga_rate(A, m1, 0, 1)
    aa1 = empirical_rate(run("aa_diffusion", A, m1, 0, ITERS, seed=808, trials=TRIALS), 1).pooled
    ga1 = empirical_rate(run("ga_diffusion", A, m1, 0, ITERS, seed=808, trials=TRIALS), 1).pooled
    ok &= check(9, "c=1 AA = GA = 50", abs(aa1 - 50) <= REL_TOL_5PCT * 50 and abs(ga1 - 50) <= REL_TOL_5PCT * 50
                and abs(rho - 50) < 1e-12, f"AA {aa1:.3f}, GA {ga1:.3f}, closed form {rho:.1f}")
    rates = []
    for c in CORRELATIONS:
        m = two_hypothesis_gaussian(10, 10.0, c)
        rates.append(empirical_rate(run("aa_diffusion", A, m, 0, ITERS, seed=809, trials=TRIALS), 1).pooled)
    ok &= check(9, "AA increasing in c", all(x < y for x, y in zip(rates, rates[1:])),
                " < ".join(f"{r:.3f}" for r in rates))
    assert ok


def _small_config(tmp_path):
    cfg = {
        "networks": {"reg2": {"kind": "d_regular_with_self_weight", "K": 10, "degree": 2, "alpha": ALPHA}},
        "model": {"family": "exponential_rates", "betas": BETAS},
        "rules": ["aa_diffusion", "ga_diffusion", "aa_consensus", "ga_consensus"],
        "iterations": 400, "trials": 2, "seed": 99,
        "analysis": {"matrix_product_rate": {"horizon": 400, "trials": 4},
                     "subadditive": {"j": [1, 5], "trials": 200},
                     "gap_estimate": {"horizon": 400, "chains": 2},
                     "variational": {"samples": 2000}},
    }
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(cfg))
    return p


def _snapshot(d: Path):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_criterion_10_property_suites_and_reproducibility(tmp_path):
    r = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider",
                        str(ROOT / "tests" / "test_properties.py")], capture_output=True, text=True, cwd=ROOT)
    tail = r.stdout.strip().splitlines()[-1] if r.stdout.strip() else r.stderr[-200:]
    ok = check(10, "property suites standalone", r.returncode == 0, tail)
    cfg = _small_config(tmp_path)
    runs = {
        "simulate": lambda out: ["simulate", "--config", str(cfg), "--out", str(out)],
        "rates": lambda out: ["rates", "--config", str(cfg), "--out", str(out)],
        "reproduce": lambda out: ["reproduce", "--figure", "4iii", "--out", str(out), "--iters", "300",
                                  "--trials", "2"],
    }
    for name, argv in runs.items():
        a, b = tmp_path / f"{name}_a", tmp_path / f"{name}_b"
        codes = (cli_main(argv(a)), cli_main(argv(b)))
        same = codes == (0, 0) and _snapshot(a) == _snapshot(b)
        ok &= check(10, f"{name} byte-identical", same, f"{len(_snapshot(a))} files")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
