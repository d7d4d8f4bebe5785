import math

import numpy as np
import pytest

from dicode.channel import bernoulli_family, identity_channel, make_channel, truncate_channel
from dicode.codebook import assemble_code, construct
from dicode.evaluator import (
    brute_force_typical_prob,
    exact_error_report,
    letter_spectrum,
    measure_lambda1,
    measure_lambda2,
    monte_carlo_errors,
    typical_set_prob,
    wilson_interval,
)


def random_channel(rng, n_in, n_out):
    m = rng.random((n_in, n_out)) ** 2 + 1e-6
    m /= m.sum(axis=1, keepdims=True)
    return make_channel([str(i) for i in range(n_in)], m)


def random_instance(rng):
    n = int(rng.integers(2, 13))
    n_in = int(rng.integers(2, 5))
    W = random_channel(rng, n_in, 2)
    source = tuple(int(v) for v in rng.integers(0, n_in, n))
    owner = tuple(int(v) for v in rng.integers(0, n_in, n))
    delta = float(rng.uniform(0.2, 1.5))
    return W, source, owner, delta


def test_letter_spectrum_masses_sum():
    W = make_channel(["a", "b"], [[0.7, 0.3], [1.0, 0.0]])
    spec = letter_spectrum(W.matrix[0], W.matrix[1])
    assert sum(m for _, m in spec.atoms) + spec.dead_mass == pytest.approx(1.0)
    assert spec.dead_mass == pytest.approx(0.3)  # owner has a zero there


def test_identity_owner_probability_one():
    W = identity_channel(2)
    lo, hi = typical_set_prob(W, (0, 1, 0), (0, 1, 0), delta=0.5)
    assert lo == hi == 1.0


def test_disjoint_support_probability_zero():
    W = identity_channel(2)
    lo, hi = typical_set_prob(W, (0, 0), (1, 1), delta=0.5)
    assert lo == hi == 0.0


def test_dp_interval_contains_enumeration():
    rng = np.random.default_rng(12)
    for _ in range(100):
        W, source, owner, delta = random_instance(rng)
        lo, hi = typical_set_prob(W, source, owner, delta)
        bf = brute_force_typical_prob(W, source, owner, delta)
        assert lo - 1e-12 <= bf <= hi + 1e-12
        assert hi - lo <= 1e-6


def test_interval_nesting_in_qstep():
    rng = np.random.default_rng(13)
    for _ in range(20):
        W, source, owner, delta = random_instance(rng)
        prev = (0.0, 1.0)
        for step in (2.0**-8, 2.0**-12, 2.0**-16, 2.0**-20):
            lo, hi = typical_set_prob(W, source, owner, delta, qstep=step)
            assert lo >= prev[0] - 1e-12
            assert hi <= prev[1] + 1e-12
            prev = (lo, hi)


def test_lambda_measurements_identity_code():
    W = identity_channel(2)
    code = construct(W, 6, 1e-5, 1 / 3)
    assert measure_lambda1(code, W) == (0.0, 0.0)
    (lo, hi), mode, _ = measure_lambda2(code, W)
    assert (lo, hi) == (0.0, 0.0)
    assert mode == "exhaustive"


def test_lambda_bounds_of_constructed_code():
    W = bernoulli_family(2.0, 6)
    code = construct(W, 10, 1e-5, 0.5)
    rep = exact_error_report(code, W)
    p = code.params
    assert rep.lambda1[1] <= p.lambda1_ceiling + 1e-12
    assert rep.lambda2[1] <= p.lambda2_ceiling + 1e-12
    assert rep.e1_measured >= p.e1_floor - 1e-12
    assert rep.e2_measured >= p.e2_floor - 1e-12


def test_lambda2_against_enumeration():
    rng = np.random.default_rng(14)
    W = random_channel(rng, 3, 2)
    code = assemble_code(W, [(0, 1, 2, 0, 1), (2, 0, 1, 2, 0), (1, 2, 0, 1, 2)],
                         delta=0.9)
    (lo, hi), mode, _ = measure_lambda2(code, W)
    want = max(
        brute_force_typical_prob(W, code.codewords[j], code.codewords[k], 0.9)
        for j in range(3) for k in range(3) if j != k)
    assert lo - 1e-12 <= want <= hi + 1e-12
    l1 = measure_lambda1(code, W)
    want1 = max(1 - brute_force_typical_prob(W, w, w, 0.9) for w in code.codewords)
    assert l1[0] - 1e-12 <= want1 <= l1[1] + 1e-12


def test_lambda2_screened_mode_is_upper_bound():
    rng = np.random.default_rng(15)
    W = random_channel(rng, 4, 2)
    words = [tuple(int(v) for v in rng.integers(0, 4, 6)) for _ in range(6)]
    words = list(dict.fromkeys(words))
    code = assemble_code(W, words, delta=1.0)
    full, _, _ = measure_lambda2(code, W, pair_budget=10**6)
    screened, mode, ceiling = measure_lambda2(code, W, pair_budget=4)
    assert mode == "screened"
    assert screened[1] >= full[1] - 1e-12   # stays a true upper bound
    assert screened[0] <= full[0] + 1e-12
    assert ceiling >= 0.0


def test_pair_bound_only_mode():
    rng = np.random.default_rng(16)
    W = random_channel(rng, 3, 2)
    code = assemble_code(W, [(0, 1, 2, 0), (2, 0, 1, 2), (1, 2, 0, 1)], delta=1.0)
    rep = exact_error_report(code, W, pair_budget=0)
    assert rep.method == "pair-bound"
    full = exact_error_report(code, W)
    assert rep.lambda2[1] >= full.lambda2[1] - 1e-12


def test_monte_carlo_reproducible_and_consistent():
    W = bernoulli_family(2.0, 4)
    code = assemble_code(W, [(0, 2, 1, 3), (1, 3, 2, 0), (2, 0, 3, 1)], delta=0.8)
    rep1 = monte_carlo_errors(code, W, trials=4000, seed=42)
    rep2 = monte_carlo_errors(code, W, trials=4000, seed=42)
    assert rep1 == rep2
    rep3 = monte_carlo_errors(code, W, trials=4000, seed=43)
    assert rep3 != rep1  # different stream

    exact1 = measure_lambda1(code, W)
    exact2, _, _ = measure_lambda2(code, W)
    # Wilson intervals should overlap the exact enclosures
    assert rep1.lambda1[0] <= exact1[1] + 1e-9
    assert rep1.lambda1[1] >= exact1[0] - 1e-9
    assert rep1.lambda2[0] <= exact2[1] + 1e-9
    assert rep1.lambda2[1] >= exact2[0] - 1e-9


def test_monte_carlo_coverage_over_seeds():
    W = make_channel(["a", "b"], [[0.85, 0.15], [0.3, 0.7]])
    code = assemble_code(W, [(0, 0, 1, 0), (1, 1, 0, 1)], delta=0.7)
    lam1 = measure_lambda1(code, W)
    covered = 0
    for seed in range(20):
        rep = monte_carlo_errors(code, W, trials=2000, seed=seed)
        if rep.lambda1[0] - 1e-12 <= lam1[1] and rep.lambda1[1] + 1e-12 >= lam1[0]:
            covered += 1
    assert covered >= 16  # nominal 95% coverage, generous slack


def test_identity_monte_carlo_zero():
    W = identity_channel(2)
    code = construct(W, 6, 1e-5, 1 / 3)
    rep = monte_carlo_errors(code, W, trials=500, seed=7)
    assert rep.lambda1[0] == 0.0
    assert rep.lambda2[0] == 0.0


def test_truncated_law_evaluation():
    W = make_channel(["a", "b"],
                     [[0.9, 0.095, 0.005], [0.25, 0.74, 0.01]])
    V = truncate_channel(W, 0.5, 6)
    code = assemble_code(W, [(0, 0, 1, 0, 1, 0), (1, 1, 0, 1, 0, 1)], delta=0.9)
    base = exact_error_report(code, W)
    shifted = exact_error_report(code, W, law=V)
    factor = math.exp(2 * 0.5)
    assert shifted.lambda1[0] <= factor * base.lambda1[1] + 1e-9
    assert shifted.lambda1[0] <= base.lambda1[1] + 0.25 + 1e-9
    assert shifted.lambda2[0] <= factor * base.lambda2[1] + 1e-9
    assert shifted.lambda2[0] <= base.lambda2[1] + 0.25 + 1e-9


def test_wilson_interval_basic():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0
    assert hi < 0.05
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi


def test_error_report_json_round_trip():
    W = identity_channel(2)
    code = construct(W, 6, 1e-5, 1 / 3)
    rep = exact_error_report(code, W)
    text = rep.to_json()
    assert '"method": "exact-dp"' in text
