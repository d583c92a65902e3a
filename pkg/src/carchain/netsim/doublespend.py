"""Double-spend race: closed-form catch-up probability and Monte Carlo.

Model: the attacker privately mines a replacement branch while the
merchant waits for z confirmations. During the z-block confirmation
window the attacker's progress is Poisson with mean z*q/p; afterwards
the race is a biased random walk on the attacker's block deficit, one
step per block found anywhere (attacker side with probability q). The
attack succeeds once the deficit reaches zero — at that point the
private branch has caught the public one and the attacker's next block
overtakes it. z = 0 therefore succeeds immediately.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import InvalidParams

# A walk this far behind succeeds with probability (q/p)^64, at most
# ~1e-19 for the allowed q range; absorbing it as failure keeps trials
# finite with negligible bias.
DEFICIT_CAP = 64


def _check_params(q: float, z: int) -> None:
    # q = 0.5 is outside the attack model (no honest majority) but kept
    # reachable so tests can pin the degenerate always-catches-up case.
    if not 0.0 < q <= 0.5:
        raise InvalidParams("attacker share q must be in (0, 0.5]")
    if z < 0:
        raise InvalidParams("confirmations z must be non-negative")


def catch_up_probability(q: float, z: int) -> float:
    """Probability the attacker ever catches up from z confirmations
    behind: 1 - sum_{k=0..z} Pois(k; z*q/p) * (1 - (q/p)^(z-k))."""
    _check_params(q, z)
    p = 1.0 - q
    ratio = q / p
    lam = z * ratio
    total = 1.0
    poisson = math.exp(-lam)
    for k in range(z + 1):
        if k > 0:
            poisson *= lam / k
        total -= poisson * (1.0 - ratio ** (z - k))
    return total


def double_spend_experiment(q: float, z: int, trials: int, seed: int) -> float:
    """Empirical success fraction over seeded Monte Carlo trials."""
    _check_params(q, z)
    if trials < 1:
        raise InvalidParams("trials must be at least 1")

    rng = np.random.default_rng(seed)
    p = 1.0 - q
    ratio = q / p

    progress = rng.poisson(z * ratio, size=trials)
    deficit = z - progress
    successes = int(np.count_nonzero(deficit <= 0))

    active = deficit[deficit > 0].astype(np.int64)
    if ratio >= 1.0:
        # Unbiased walk: catching up is certain, but the hitting time is
        # unbounded, so resolve analytically instead of stepping.
        return (successes + active.size) / trials
    while active.size:
        attacker_win = rng.random(active.size) < q
        active = np.where(attacker_win, active - 1, active + 1)
        successes += int(np.count_nonzero(active <= 0))
        active = active[(active > 0) & (active < DEFICIT_CAP)]
    return successes / trials
