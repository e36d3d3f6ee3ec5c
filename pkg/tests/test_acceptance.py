"""Acceptance criteria 1-13 at their stated tolerances.

Each test appends one ``PASS``/``FAIL`` line, printed in the terminal summary,
before asserting.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from gkdv.harness.cli import main
from gkdv.harness.config import default_config
from gkdv.harness.experiments import run_experiment
from gkdv.harness.report import csv_text
from gkdv.norms import is_admissible

from conftest import ACCEPTANCE_LINES


def _record(number, name, checks, elapsed, budget):
    """``checks`` maps a description to a bool; the runtime budget is one more check."""
    checks = dict(checks)
    if budget is not None:
        checks[f"runtime {elapsed:.1f}s <= {budget}s"] = elapsed <= budget
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    detail = "; ".join(failed) if failed else "; ".join(checks)
    line = f"criterion {number:2d} {name:31s} {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    assert ok, line


def _run(kind):
    t0 = time.perf_counter()
    res = run_experiment(default_config(kind))
    return res.metrics, time.perf_counter() - t0


def test_criterion_01_conservation():
    cfg = default_config("conservation")
    assert (cfg.grid["n_points"], cfg.grid["box_length"], cfg.solver["t_final"]) == (1024, 256.0, 10.0)
    assert cfg.datum["family"] == "gaussian" and cfg.datum["l2"] == 1.0
    m, dt = _run("conservation")
    _record(1, "conservation", {
        f"mass drift {m['mass_drift']:.2e} < 1e-8": m["mass_drift"] < 1e-8,
        f"energy drift {m['energy_drift']:.2e} < 1e-6": m["energy_drift"] < 1e-6,
    }, dt, 60)


def test_criterion_02_scaling():
    assert default_config("scaling").params["lam"] == 2.0
    m, dt = _run("scaling")
    _record(2, "scaling covariance", {f"L2 mismatch {m['l2_mismatch']:.2e} < 1e-6": m["l2_mismatch"] < 1e-6}, dt, 120)


def test_criterion_03_decay():
    m, dt = _run("decay")
    _record(3, "dispersive decay", {
        f"sup exponent {m['exponent_pinf']:.4f} in -1/3 +- 0.05": abs(m["exponent_pinf"] + 1 / 3) <= 0.05,
        f"L6 exponent {m['exponent_p6']:.4f} in -2/9 +- 0.05": abs(m["exponent_p6"] + 2 / 9) <= 0.05,
        f"window {m['decades']:.2f} decades >= 1.5": m["decades"] >= 1.5,
    }, dt, 60)


def test_criterion_04_local_laws():
    m, dt = _run("local_laws")
    _record(4, "local conservation laws", {
        f"mass-law order {m['order_mass']:.3f} in 2 +- 0.3": abs(m["order_mass"] - 2) <= 0.3,
        f"energy-law order {m['order_energy']:.3f} in 2 +- 0.3": abs(m["order_energy"] - 2) <= 0.3,
    }, dt, 180)


def test_criterion_05_positivity():
    assert default_config("positivity").params["fields"] == 100
    m, dt = _run("positivity")
    _record(5, "positivity and gap identity", {
        f"monotonicity min {m['min_monotonicity']:.3e} > 0": m["min_monotonicity"] > 0,
        f"positivity min {m['min_tao']:.3e} > 0": m["min_tao"] > 0,
        f"positivity min with c = 2 {m['min_tao_c2']:.3e} > 0": m["min_tao_c2"] > 0,
        f"gap identity rel error {m['max_gap_error']:.1e} <= 1e-9": m["max_gap_error"] <= 1e-9,
    }, dt, 60)


def test_criterion_06_truncated_morawetz():
    assert default_config("morawetz_truncated").params["R"] == [8.0, 16.0, 32.0, 64.0]
    m, dt = _run("morawetz_truncated")
    _record(6, "truncated Morawetz defect", {
        f"defect slope {m['slope']:.3f} in -2 +- 0.4": abs(m["slope"] + 2) <= 0.4,
    }, dt, 300)


def test_criterion_07_interaction_kernel():
    assert default_config("interaction_kernel").grid["n_points"] == 256
    m, dt = _run("interaction_kernel")
    _record(7, "interaction kernel", {
        f"phi even {m['phi_even_error']:.1e} <= 1e-10": m["phi_even_error"] <= 1e-10,
        f"psi odd {m['psi_odd_error']:.1e} <= 1e-8": m["psi_odd_error"] <= 1e-8,
        f"psi' = phi {m['deriv_error']:.1e} <= 1e-8": m["deriv_error"] <= 1e-8,
        f"fft vs double sum {m['fft_direct_error']:.1e} <= 1e-8": m["fft_direct_error"] <= 1e-8,
    }, dt, 120)


def test_criterion_08_interaction_flux():
    m, dt = _run("morawetz_interaction")
    _record(8, "interaction flux identity", {
        f"residual order {m['order']:.3f} in 2 +- 0.3": abs(m["order"] - 2) <= 0.3,
    }, dt, 300)


def test_criterion_09_vp_oracle():
    cfg = default_config("vp_norm")
    assert cfg.params["instances"] == 50 and cfg.params["max_snapshots"] == 12
    m, dt = _run("vp_norm")
    _record(9, "V^p oracle equivalence", {
        f"DP vs brute force {m['max_dp_error']:.1e} <= 1e-12": m["max_dp_error"] <= 1e-12,
        f"monotonicity violations {m['monotone_violations']} == 0": m["monotone_violations"] == 0,
    }, dt, 60)


def test_criterion_10_small_data():
    assert default_config("small_data").params["epsilon"] == [0.02, 0.04, 0.08]
    m, dt = _run("small_data")
    lo, hi = m["tv_scaling_min"], m["tv_scaling_max"]
    _record(10, "small-data scattering", {
        f"S/M^(5/2) spread {m['ratio_spread']:.4f} < 2": m["ratio_spread"] < 2,
        f"TV doubling ratio / 2^5 in [{lo:.3f}, {hi:.3f}] within factor 3": 1 / 3 <= lo and hi <= 3,
    }, dt, 300)


ACCEPT = [(5, 10, 0), ("inf", 2, 1), (6, 6, Fraction(1, 6)), (Fraction(24, 5), 12, Fraction(-1, 24)),
          (4, "inf", Fraction(-1, 4))]


def test_criterion_11_admissible():
    t0 = time.perf_counter()
    hits = [(t := is_admissible(p, q)) is not None and t.alpha == a for p, q, a in ACCEPT]
    rejected = is_admissible(6, 7) is None
    _record(11, "admissible-triple predicate", {
        f"accepts {sum(hits)}/5 with exact alpha": all(hits),
        "rejects (6, 7)": rejected,
    }, time.perf_counter() - t0, 1)


def test_criterion_12_envelope():
    assert default_config("envelope").params["delta"] == 1 / 40
    m, dt = _run("envelope")
    _record(12, "frequency envelope", {
        f"single-shell profile error {m['profile_error']:.1e}": m["profile_error"] <= 1e-12,
        f"domination margin {m['domination_margin']:.3e} >= 0": m["domination_margin"] >= 0,
    }, dt, 1)


def test_criterion_13_harness(tmp_path):
    t0 = time.perf_counter()
    code = main(["verify", "--out", str(tmp_path / "verify")])
    texts = []
    for _ in range(2):
        cfg = default_config("positivity").with_value("experiment.seed", 2**63 + 5)
        res = run_experiment(cfg)
        row = {"experiment_id": cfg.id, "kind": cfg.kind, "seed": cfg.seed, **res.metrics, "passed": res.passed}
        texts.append(csv_text(["experiment_id", "kind", "seed", *res.metrics, "passed"], [row]).encode())
    runs = []
    for d in ("a", "b"):
        main(["run", "local_laws", "--seed", "17", "--out", str(tmp_path / d)])
        runs.append((tmp_path / d / "results.csv").read_bytes())
    _record(13, "harness verify and determinism", {
        f"verify exit code {code} == 0": code == 0,
        "byte-identical CSV (library rows)": texts[0] == texts[1],
        "byte-identical CSV (CLI run)": runs[0] == runs[1],
    }, time.perf_counter() - t0, None)
