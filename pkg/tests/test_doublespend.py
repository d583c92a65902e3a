import math
import random

import pytest

from carchain.errors import InvalidParams
from carchain.netsim.doublespend import (
    DEFICIT_CAP,
    catch_up_probability,
    double_spend_experiment,
)

# Classic race-probability table: attacker share q, confirmations z,
# published probability to seven decimals.
PUBLISHED = [
    (0.1, 1, 0.2045873),
    (0.1, 2, 0.0509779),
    (0.1, 3, 0.0131722),
    (0.1, 4, 0.0034552),
    (0.1, 5, 0.0009137),
    (0.1, 10, 0.0000012),
    (0.3, 5, 0.1773523),
    (0.3, 10, 0.0416605),
    (0.3, 15, 0.0101008),
]


@pytest.mark.parametrize("q,z,expected", PUBLISHED)
def test_closed_form_matches_published_table(q, z, expected):
    assert catch_up_probability(q, z) == pytest.approx(expected, abs=5e-7)


def test_zero_confirmations_always_succeed():
    assert catch_up_probability(0.1, 0) == 1.0
    assert double_spend_experiment(0.1, 0, trials=1_000, seed=1) == 1.0


def test_equal_hashpower_always_catches_up():
    assert catch_up_probability(0.5, 6) == pytest.approx(1.0, abs=1e-12)
    assert double_spend_experiment(0.5, 6, trials=1_000, seed=1) == 1.0


def test_closed_form_monotone_decreasing_in_z():
    for q in (0.05, 0.1, 0.25, 0.4):
        probs = [catch_up_probability(q, z) for z in range(9)]
        assert probs[0] == 1.0
        assert all(a > b for a, b in zip(probs, probs[1:]))
        assert all(0.0 < p <= 1.0 for p in probs)


def test_closed_form_monotone_increasing_in_q():
    for z in (1, 3, 6):
        probs = [catch_up_probability(q, z) for q in (0.05, 0.1, 0.2, 0.3, 0.4, 0.5)]
        assert all(a < b for a, b in zip(probs, probs[1:]))


def plain_python_walk(q, z, trials, seed):
    """Independent one-trial-at-a-time reference: stdlib RNG, no arrays."""
    rng = random.Random(seed)
    p = 1.0 - q
    lam = z * q / p
    wins = 0
    for _ in range(trials):
        # Poisson sample by inversion over the exponential product
        produced, threshold, acc = 0, math.exp(-lam), rng.random()
        cumulative, term = threshold, threshold
        while acc > cumulative:
            produced += 1
            term *= lam / produced
            cumulative += term
        deficit = z - produced
        while 0 < deficit < DEFICIT_CAP:
            deficit += -1 if rng.random() < q else 1
        if deficit <= 0:
            wins += 1
    return wins / trials


@pytest.mark.parametrize("q", [0.05, 0.1, 0.25])
@pytest.mark.parametrize("z", [0, 1, 2, 4])
def test_monte_carlo_tracks_closed_form(q, z):
    trials = 20_000
    analytic = catch_up_probability(q, z)
    empirical = double_spend_experiment(q, z, trials=trials, seed=404)
    band = max(3.0 * math.sqrt(analytic * (1.0 - analytic) / trials), 0.002)
    assert abs(empirical - analytic) <= band


def test_monte_carlo_agrees_with_plain_python_reference():
    q, z, trials = 0.2, 3, 20_000
    vectorized = double_spend_experiment(q, z, trials=trials, seed=7)
    scalar = plain_python_walk(q, z, trials=trials, seed=7_000)
    se = math.sqrt(0.1 / trials)  # generous p(1-p) bound near these rates
    assert abs(vectorized - scalar) <= 6 * se


def test_monte_carlo_is_seed_deterministic():
    a = double_spend_experiment(0.25, 4, trials=5_000, seed=42)
    b = double_spend_experiment(0.25, 4, trials=5_000, seed=42)
    assert a == b


def test_near_balanced_walk_terminates():
    # the deficit cap bounds the walk even at q just under one half
    result = double_spend_experiment(0.49, 2, trials=2_000, seed=9)
    analytic = catch_up_probability(0.49, 2)
    assert abs(result - analytic) < 0.05


@pytest.mark.parametrize("q", [0.0, -0.1, 0.51, 1.0])
def test_q_out_of_range_rejected(q):
    with pytest.raises(InvalidParams):
        catch_up_probability(q, 3)
    with pytest.raises(InvalidParams):
        double_spend_experiment(q, 3, trials=10, seed=0)


def test_negative_z_rejected():
    with pytest.raises(InvalidParams):
        catch_up_probability(0.1, -1)
    with pytest.raises(InvalidParams):
        double_spend_experiment(0.1, -1, trials=10, seed=0)


def test_nonpositive_trials_rejected():
    with pytest.raises(InvalidParams):
        double_spend_experiment(0.1, 2, trials=0, seed=0)
