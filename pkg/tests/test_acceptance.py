"""Exit criteria for the package, one test per criterion.

Each test prints a PASS/FAIL line; the lines are repeated in the pytest
terminal summary under "acceptance criteria".
"""

import itertools
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from greenmeta import kernels
from greenmeta.adaptation import (PowerTarget, cumulative_ops_factor,
                                  plan_request, restoration_plan)
from greenmeta.analysis import Akima, RdCurve, bd_rate
from greenmeta.dor_req import (DorRequest, code_to_percent_v3, decode_message,
                               encode_message, legacy_percent)
from greenmeta.energy import (CodingCandidate, EnergyModel, LagrangeWeights,
                              cost, derdo_select, fracpel_avoiding_model)
from greenmeta.profiles import builtin_profile
from greenmeta.session import SessionState, run_session

WIDTHS = (6, 1, 1, 1, 1, 14, 14, 10)
RES_360 = DorRequest(pic_width_in_luma_samples=640,
                     pic_height_in_luma_samples=360)
HALF_FPS = DorRequest(frames_per_second=30)


def test_ac1_protocol_roundtrip(acceptance_report):
    rng = random.Random(1)
    t0 = time.perf_counter()
    mismatches = 0
    for _ in range(10_000):
        req = DorRequest(rng.randrange(64), rng.random() < .5,
                         rng.random() < .5, rng.random() < .5,
                         rng.random() < .5, rng.randrange(16384),
                         rng.randrange(16384), rng.randrange(1024))
        if decode_message(encode_message(req)) != req:
            mismatches += 1
    elapsed = time.perf_counter() - t0
    image = [code_to_percent_v3(c) for c in range(64)]
    codewords_ok = image == sorted(image) and \
        set(image) == set(range(-62, 65, 2)) and len(set(image)) == 64
    ok = mismatches == 0 and codewords_ok and elapsed < 5.0
    acceptance_report("AC1 protocol round-trip", ok,
                      f"{mismatches} mismatches / 10000, 64 codewords -> even "
                      f"[-62,64]: {codewords_ok}, {elapsed:.2f}s (< 5s)")
    assert ok


def test_ac2_legacy_formula(acceptance_report):
    a, b = legacy_percent(64), legacy_percent(-128)
    ok = a == Fraction(50) and b == Fraction(-100)
    acceptance_report("AC2 legacy percentage", ok,
                      f"legacy(64)={a}%, legacy(-128)={b}% (exact)")
    assert ok


def test_ac3_golden_vector(acceptance_report):
    req = DorRequest.from_percent(0, disable_loop_filters=True,
                                  disable_fracpel_filtering=True,
                                  pic_width_in_luma_samples=1280,
                                  pic_height_in_luma_samples=720,
                                  frames_per_second=30)
    bits = "".join(format(v, f"0{w}b") for v, w in zip(req.fields(), WIDTHS))
    oracle = bytes(int(bits[i:i + 8], 2) for i in range(0, 48, 8))
    frozen = bytes.fromhex("7E45000B401E")
    got = encode_message(req)
    ok = oracle == frozen and got == oracle and decode_message(got) == req
    acceptance_report("AC3 golden vector", ok,
                      f"encoder {got.hex().upper()} / oracle "
                      f"{oracle.hex().upper()} / frozen {frozen.hex().upper()}")
    assert ok


def test_ac4_derdo_fracpel_avoidance(acceptance_report):
    model = fracpel_avoiding_model(
        EnergyModel(("dbf", "fracpel", "sao"), (0.4, 1.0, 0.2)))
    weights = LagrangeWeights(1.0, 1.0)
    variants = [CodingCandidate((f, d, r), float(d), float(r), (1, f, 1))
                for f in (0, 1, 2) for d in (0, 1, 10) for r in (0, 1, 10)]
    t0 = time.perf_counter()
    sets = violations = 0
    for size in range(1, 5):
        for combo in itertools.product(variants, repeat=size):
            chosen = derdo_select(combo, weights, model)
            sets += 1
            free = [c for c in combo if c.counts[1] == 0]
            if free and chosen.counts[1] > 0 and \
                    min(cost(c, weights, model) for c in free) < float("inf"):
                violations += 1
    elapsed = time.perf_counter() - t0
    ok = violations == 0 and elapsed < 10.0
    acceptance_report("AC4 DERDO fracpel avoidance", ok,
                      f"{sets} ordered candidate sets (size <= 4), "
                      f"{violations} violations, {elapsed:.2f}s (< 10s, "
                      f"{kernels.BACKEND} kernels)")
    assert ok


def _shortest_restoration(factor, tol, max_len):
    """Brute force over ordered sequences of all 64 codewords."""
    lo, hi = 1 - tol, 1 + tol
    codes = [code_to_percent_v3(c) for c in range(64)]
    for length in range(0, max_len + 1):
        for seq in itertools.product(codes, repeat=length):
            p, ok = factor, True
            for c in seq:
                p *= Fraction(100 + c, 100)
                if p > hi:
                    ok = False
                    break
            if ok and p >= lo:
                return length
    return None


def test_ac5_composition_algebra(acceptance_report):
    inverse = cumulative_ops_factor([-50, 100], mode="legacy")
    seq = restoration_plan(0.38, 0.05)
    final = Fraction(38, 100)
    for c in seq:
        final *= Fraction(100 + c, 100)
    shortest = _shortest_restoration(Fraction(38, 100), Fraction(5, 100), 3)
    ok = inverse == 1.0 and Fraction(95, 100) <= final <= Fraction(105, 100) \
        and len(seq) == shortest
    acceptance_report("AC5 composition algebra", ok,
                      f"factor([-50,+100])={inverse}, restoration {seq} -> "
                      f"{float(final):.6f}, brute-force shortest length "
                      f"{shortest}")
    assert ok


def test_ac6_calibrated_simulation(acceptance_report):
    t0 = time.perf_counter()
    cases = [("table2/hardware/ClassB", RES_360, 0.0, 78.21),
             ("table2/hardware/ClassB", RES_360, 300.0, 39.105),
             ("table2/software/ClassB", RES_360, 0.0, 89.64),
             ("table2/software/ClassB", HALF_FPS, 0.0, 43.07)]
    results = []
    for name, req, t, expected in cases:
        state = SessionState(builtin_profile(name), 2.0)
        res = run_session([(t, req)], 600.0, state)
        results.append((name, t, res.realized_savings_pct, expected))
    elapsed = time.perf_counter() - t0
    ok = all(abs(got - exp) <= 0.01 for _, _, got, exp in results) \
        and elapsed < 1.0
    detail = ", ".join(f"{n.split('/', 1)[1]}@t={t:g}: {g:.4f}% (want {e}%)"
                       for n, t, g, e in results)
    acceptance_report("AC6 calibrated simulation", ok,
                      f"{detail}; {elapsed * 1e3:.1f} ms (< 1s)")
    assert ok


def _smooth_curve(rng):
    while True:
        q = np.sort(rng.uniform(28.0, 44.0, 4))
        if np.min(np.diff(q)) >= 0.3:
            break
    log_r = 2.5 + 0.08 * (q - 28.0) + rng.uniform(-0.02, 0.02, 4)
    return RdCurve(zip(10 ** log_r, q))


def test_ac7_bd_rate_properties(acceptance_report):
    rng = np.random.default_rng(7)
    a = _smooth_curve(rng)
    self_bdr = bd_rate(a, a)
    doubled = RdCurve([(2 * p.rate, p.quality) for p in a.points])
    double_bdr = bd_rate(a, doubled)
    disjoint = bd_rate(RdCurve([(100, 30), (200, 34), (400, 38)]),
                       RdCurve([(100, 40), (200, 42.5), (400, 45)]))
    worst = 0.0
    pairs = 0
    while pairs < 100:
        x, y = _smooth_curve(rng), _smooth_curve(rng)
        xy, yx = bd_rate(x, y), bd_rate(y, x)
        if xy is None or yx is None:
            continue
        worst = max(worst, abs((1 + xy / 100) * (1 + yx / 100) - 1))
        pairs += 1
    ok = abs(self_bdr) <= 1e-9 and abs(double_bdr - 100) <= 0.05 \
        and disjoint is None and worst <= 1e-6
    acceptance_report("AC7 BD-rate properties", ok,
                      f"BDR(a,a)={self_bdr:.2e}, 2x rate -> {double_bdr:.6f}%, "
                      f"disjoint -> {disjoint}, reciprocity max error "
                      f"{worst:.2e} over {pairs} pairs")
    assert ok


def test_ac8_akima_correctness(acceptance_report):
    rng = np.random.default_rng(11)
    worst_knot = worst_c1 = 0.0
    line = Akima([0, 1, 2, 3], [0, 1, 2, 3])
    line_err = max(abs(line(x) - x) for x in np.linspace(0, 3, 31))
    h = 1e-5
    for _ in range(200):
        n = int(rng.integers(4, 9))
        xs = np.cumsum(np.concatenate([[0.0], rng.uniform(0.5, 2.0, n - 1)]))
        ys = rng.uniform(-5.0, 5.0, n)
        f = Akima(xs, ys)
        worst_knot = max(worst_knot, float(np.max(np.abs(f(xs) - ys))))
        for x in xs[1:-1]:
            left = (3 * f(x) - 4 * f(x - h) + f(x - 2 * h)) / (2 * h)
            right = (-3 * f(x) + 4 * f(x + h) - f(x + 2 * h)) / (2 * h)
            worst_c1 = max(worst_c1, abs(left - right))
    ok = worst_knot <= 1e-12 and line_err <= 1e-12 and worst_c1 <= 1e-6
    acceptance_report("AC8 Akima correctness", ok,
                      f"knot error {worst_knot:.1e}, collinear error "
                      f"{line_err:.1e}, C1 jump {worst_c1:.1e} (<= 1e-6) "
                      f"over 200 random 4-8 knot curves")
    assert ok


def test_ac9_planner_policy(acceptance_report):
    prof = builtin_profile("table2/software/ClassE")
    p40 = plan_request(prof, PowerTarget(40.0))
    p95 = plan_request(prof, PowerTarget(95.0))
    ok = (p40.entry.label == "half fps" and p40.entry.savings_pct == 43.76
          and p40.entry.bdr_pct == 38.06 and not p40.shortfall
          and p40.request == HALF_FPS
          and p95.entry.label == "Res: 360p" and p95.entry.savings_pct == 77.92
          and p95.shortfall)
    acceptance_report("AC9 planner policy", ok,
                      f"40% -> {p40.entry.label} ({p40.entry.savings_pct}%, "
                      f"BDR {p40.entry.bdr_pct}%); 95% -> {p95.entry.label} "
                      f"({p95.entry.savings_pct}%, shortfall={p95.shortfall})")
    assert ok
