"""Acceptance gate: one test per criterion, at the stated tolerance.

Run with `pytest tests/test_acceptance.py -v -s` to see one pass line per
criterion.  Each test enforces its runtime budget where one is stated.
"""

import json
import os
import random
import time
from fractions import Fraction

import numpy as np

from rdx3.checker import (
    CERTIFIED,
    FALSIFIED,
    IwscWeights,
    NonlinearityTriple,
    SamplerConfig,
    check_isc,
    check_iwsc,
    lemma_liws_probe,
)
from rdx3.cli import EXIT_OK, main
from rdx3.lyapunov import (
    DiffusionTriple,
    HpSpec,
    VARIANT_ABOVE,
    VARIANT_BELOW,
    _sigma_sq_boundary,
    _sqrt_exact_or_upper,
    build_bij,
    build_energy,
    grad_energy_closed_form,
    hess_energy_closed_form,
    leading_minors_positive,
    theorem_params,
    theta_sigma_feasible,
)
from rdx3.models import build_preset
from rdx3.poly import Poly3, X1, X2, X3, affine_weight
from rdx3.sim import DomainGrid, SimConfig, SpeciesBC, laplacian_apply, run

NEUMANN_COSINE_INIT = {
    "u": {"kind": "cosine", "base": 1.0, "amplitude": 0.5, "modes": [1]},
    "v": {"kind": "cosine", "base": 0.8, "amplitude": 0.4, "modes": [2]},
    "w": {"kind": "cosine", "base": 1.2, "amplitude": 0.6, "modes": [3]},
}


def announce(name: str, t0: float, budget: float | None = None) -> None:
    elapsed = time.monotonic() - t0
    print(f"[PASS] {name} ({elapsed:.1f}s)")
    if budget is not None:
        assert elapsed < budget, f"{name}: runtime {elapsed:.1f}s exceeded budget {budget}s"


def test_derivative_lemma_equivalence():
    """Closed-form gradients/Hessians equal formal derivatives, exactly."""
    t0 = time.monotonic()
    rng = random.Random(1001)
    pairs = [
        (Fraction(rng.randrange(1, 30), rng.randrange(1, 30)),
         Fraction(rng.randrange(1, 30), rng.randrange(1, 30)))
        for _ in range(20)
    ]
    for p in range(1, 7):
        for theta, sigma in pairs:
            for variant in (VARIANT_ABOVE, VARIANT_BELOW):
                spec = HpSpec(p, theta, sigma, variant)
                poly = build_energy(spec)
                grad = grad_energy_closed_form(spec)
                for axis in (1, 2, 3):
                    assert grad[axis - 1] == poly.partial_derivative(axis)
                if p >= 2:
                    hess = hess_energy_closed_form(spec)
                    for (a, b), entry in hess.items():
                        assert entry == poly.partial_derivative(a).partial_derivative(b)
    announce("derivative-lemma equivalence (p<=6, 20 rational pairs, both variants)", t0, 10.0)


def test_feasibility_implies_sylvester():
    """200 random feasible (d, theta, sigma): every minors test passes."""
    t0 = time.monotonic()
    rng = random.Random(2002)
    checked = 0
    failures = 0
    while checked < 200:
        d = DiffusionTriple(
            *(Fraction(rng.randrange(1, 65), rng.randrange(1, 17)) for _ in range(3))
        )
        base = _sqrt_exact_or_upper(d.ratio_sq(1, 2))
        theta = base * (1 + Fraction(rng.randrange(1, 200), 100))
        sigma = _sqrt_exact_or_upper(_sigma_sq_boundary(d, theta)) * (
            1 + Fraction(rng.randrange(1, 200), 100)
        )
        if not theta_sigma_feasible(d, theta, sigma):
            continue
        checked += 1
        for j in range(7):  # p <= 8 means index pairs up to (6, 6)
            for i in range(j + 1):
                if not leading_minors_positive(build_bij(d, theta, sigma, i, j)):
                    failures += 1
    assert checked == 200 and failures == 0
    announce("feasibility => positive leading minors (200 samples, p<=8)", t0, 30.0)


def test_equal_diffusion_reduction():
    """For equal diffusions the feasible set is exactly the open quadrant."""
    t0 = time.monotonic()
    d = DiffusionTriple(1, 1, 1)
    lo, hi, n = Fraction(1, 2), Fraction(2), 100
    step = (hi - lo) / (n - 1)
    values = [lo + k * step for k in range(n)]
    checked = 0
    for theta in values:
        if theta == 1:
            continue  # boundary excluded
        for sigma in values:
            if sigma == 1:
                continue
            assert theta_sigma_feasible(d, theta, sigma) == (theta > 1 and sigma > 1)
            checked += 1
    assert checked >= 9000
    announce(f"equal-diffusion reduction (100x100 grid, {checked} interior points)", t0, 5.0)


def test_iwsc_isc_separation():
    """The motivating triple: weighted sums certify, triangular system fails."""
    t0 = time.monotonic()
    model = build_preset("intro", {"B": 5, "C": 5})
    weights = IwscWeights(4, 4)
    for _ in range(2):  # deterministic: identical verdicts on repeat
        iwsc, ks = check_iwsc(model.n, weights)
        assert iwsc.status == CERTIFIED
        assert ks == (0, 0, 0)
        isc = check_isc(model.n, 1)
        assert isc.status == FALSIFIED
        x = isc.witness
        assert x[0] == 0 and x[1] > 0 and x[2] == 0, "witness must sit on the second axis"
        assert isc.margin > Fraction(1, 10**9)
    announce("weighted-sum certifies while triangular check falsifies (exact witness)", t0)


def _random_signed_poly(rng, scale: int) -> Poly3:
    terms = {}
    for _ in range(rng.randrange(2, 6)):
        e = tuple(rng.randrange(0, 4) for _ in range(3))
        terms[e] = scale * rng.randrange(-6, 7)
    return Poly3(terms)


def _positive_part(p: Poly3) -> Poly3:
    return Poly3({e: c for e, c in p.terms.items() if c > 0})


def _negative_part(p: Poly3) -> Poly3:
    return Poly3({e: c for e, c in p.terms.items() if c < 0})


def test_lemma_liws_sampling():
    """50 premise-certified instances, 10^4 points each, zero violations."""
    t0 = time.monotonic()
    rng = random.Random(3003)
    weight = affine_weight()
    sampler = SamplerConfig(seed=404)
    base_points = len(sampler.points3())
    extra = 10_000 - base_points
    assert extra > 0
    for trial in range(50):
        above = trial % 2 == 0
        c1 = rng.randrange(0, 5)
        if above:
            alpha = rng.randrange(2, 7)
            phi = _random_signed_poly(rng, 2)
            slack = -(alpha - 1) * _positive_part(phi)
            num = rng.randrange(2, 2 * alpha + 1)
            alpha_star = Fraction(num, 2)
        else:
            k = rng.randrange(2, 7)
            alpha = Fraction(1, k)
            phi = _random_signed_poly(rng, 2 * k)
            slack = (1 - alpha) * _negative_part(phi)
            alpha_star = Fraction(rng.randrange(2, 2 * k + 1), 2 * k)
        residual = Poly3(
            {tuple(rng.randrange(0, 4) for _ in range(3)): -rng.randrange(0, 4) for _ in range(2)}
        )
        psi = c1 * weight - phi + slack + residual
        ok = lemma_liws_probe(phi, psi, alpha, c1, c1, alpha_star, sampler, extra_points=extra)
        assert ok, f"interpolation consequence violated on trial {trial}"
    announce("weighted-interpolation lemma sampling (50 instances x 10^4 points)", t0)


def test_k0_energy_monotonicity():
    """Dissipative LV run: discrete energy nonincreasing, sup norms contained."""
    t0 = time.monotonic()
    model = build_preset("lv_sk_minus")
    assert model.metadata["matrix"]["rows"] == [[-1, -1, 0], [-1, -2, -1], [0, -1, -1]]
    params = theorem_params(1, model.d, 2, 1)
    assert params.thresholds_hold(model.weights.lam1, model.weights.lam2)
    cfg = SimConfig(
        grid=DomainGrid(1, (10.0,), (128,)),
        t_end=50.0,
        record_dt=0.1,
        energy=params.hp_spec(),
        init=NEUMANN_COSINE_INIT,
        safety=0.9,
        k1=0.0,
        k0_tol=1e-8,
    )
    res = run(model, cfg)
    assert not res.blowup
    assert res.monitor.k0_monotone, "scaled energy must be nonincreasing at 1e-8 per step"
    first, last = res.records[0], res.records[-1]
    assert last.t == 50.0
    for attr in ("linf_u", "linf_v", "linf_w"):
        assert getattr(last, attr) <= getattr(first, attr) + 1e-6
    announce("zero-constant energy monotonicity (LV, 128 cells, T=50, tol 1e-8)", t0, 60.0)


def test_mass_conservation():
    """Conserved triple under Neumann: relative drift below 1e-8 throughout."""
    t0 = time.monotonic()
    model = build_preset("mass_conserving")
    cfg = SimConfig(
        grid=DomainGrid(1, (10.0,), (128,)),
        t_end=10.0,
        record_dt=0.1,
        energy=HpSpec(2, Fraction(11, 10), Fraction(11, 10)),
        init=NEUMANN_COSINE_INIT,
        safety=0.9,
    )
    res = run(model, cfg)
    masses = [r.mass for r in res.records]
    worst = max(abs(m - masses[0]) for m in masses)
    assert worst <= 1e-8 * masses[0]
    announce(f"mass conservation (drift {worst / masses[0]:.2e} <= 1e-8 over T=10)", t0)


def test_blowup_oracle():
    """Uniform cubic growth reduces to x' = x^3: flag within 10% of 1/8."""
    t0 = time.monotonic()
    model = build_preset("triple_product")
    cfg = SimConfig(
        grid=DomainGrid(1, (1.0,), (16,)),
        t_end=1.0,
        record_dt=0.01,
        energy=HpSpec(2, Fraction(11, 10), Fraction(11, 10)),
        init={k: {"kind": "constant", "value": 2.0} for k in ("u", "v", "w")},
        safety=0.9,
    )
    res = run(model, cfg)
    assert res.blowup
    t_star = res.last_time
    assert abs(t_star - 0.125) <= 0.0125, f"flagged at {t_star}"
    announce(f"blow-up oracle (flagged at t*={t_star:.6f}, target 0.125 +- 0.0125)", t0)


def test_theorem1_pipeline(tmp_path):
    """The quadratic cyclic example end to end through the verify command."""
    t0 = time.monotonic()
    cfg = {
        "model": {"name": "example1", "params": {"l": 2, "q": 2, "r": 2, "A": 1, "B": 2, "C": 2}},
        "grid": {"dim": 1, "extents": [10.0], "cells": [64]},
        "init": NEUMANN_COSINE_INIT,
        "t_end": 20.0,
        "record_dt": 0.1,
    }
    cfg_path = os.path.join(tmp_path, "verify.json")
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh)
    code = main(["verify", "--config", cfg_path, "--out", str(tmp_path)])
    assert code == EXIT_OK
    out = json.load(open(os.path.join(tmp_path, "verify.json")))
    assert out["theorem"] == 1
    assert out["params"]["p"] == 4
    assert out["params"]["theta_exact"] == "11/10"
    assert out["params"]["sigma_exact"] == "11/10"
    assert abs(out["params"]["lam1_threshold"] - 1.7716) < 1e-3
    assert out["params"]["lam1_threshold"] <= 2.0
    assert out["simulation"]["blowup"] is False
    assert out["simulation"]["last_time"] == 20.0
    rows = open(os.path.join(tmp_path, "trajectory.csv")).read().splitlines()[1:]
    sup0 = max(float(v) for v in rows[0].split(",")[1:4])
    bound = sup0 + 1.0
    for row in rows:
        assert max(float(v) for v in row.split(",")[1:4]) <= bound
    announce("end-to-end theorem-1 pipeline (p=4, thresholds ~1.7716 <= 2, T=20)", t0, 60.0)


def test_laplacian_order():
    """Eigenfunction error drops fourfold per grid doubling."""
    t0 = time.monotonic()
    errs = []
    for cells in (64, 128, 256):
        grid = DomainGrid(1, (1.0,), (cells,))
        x = grid.centers(0)
        f = np.cos(np.pi * x)
        out = laplacian_apply(f, grid, SpeciesBC("neumann"))
        errs.append(float(np.max(np.abs(out + np.pi**2 * f))))
    r1, r2 = errs[0] / errs[1], errs[1] / errs[2]
    assert 3.5 <= r1 <= 4.5 and 3.5 <= r2 <= 4.5
    announce(f"laplacian second-order convergence (ratios {r1:.3f}, {r2:.3f})", t0)


def test_simulate_determinism(tmp_path):
    """Identical config + seed gives byte-identical CSV output."""
    t0 = time.monotonic()
    cfg = {
        "model": {"name": "lv_sk_minus"},
        "grid": {"dim": 1, "extents": [5.0], "cells": [32]},
        "init": {k: {"kind": "random", "low": 0.0, "high": 1.5} for k in ("u", "v", "w")},
        "t_end": 1.0,
        "record_dt": 0.1,
        "energy": {"mode": "explicit", "p": 4, "theta": "11/10", "sigma": "11/10"},
        "seed": 7,
    }
    cfg_path = os.path.join(tmp_path, "sim.json")
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh)
    for sub in ("a", "b"):
        code = main(["simulate", "--config", cfg_path, "--out", os.path.join(tmp_path, sub)])
        assert code == EXIT_OK
    a = open(os.path.join(tmp_path, "a", "trajectory.csv"), "rb").read()
    b = open(os.path.join(tmp_path, "b", "trajectory.csv"), "rb").read()
    assert a == b
    announce("byte-identical CSV on repeated simulate", t0)
