"""Independent validators for the closed-form game analysis.

These estimators simulate the selection process event by event and share
no arithmetic with the formulas in :mod:`trustsim.game`; an estimator that
reused the formula could not catch a sign or scale error in it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .rng import Stream

_MIN_TRIALS = 1000
_MAX_ENUM_STREAK = 20


@dataclass(frozen=True)
class McResult:
    """A Monte-Carlo estimate: sample mean, standard error of the mean,
    and the number of trials behind it."""

    mean: float
    std_error: float
    trials: int

    def __post_init__(self):
        if self.trials < 2:
            raise ValueError("trials must be >= 2")


def combine(results: list[McResult]) -> McResult:
    """Pool independent partition estimates into one McResult.

    Order-independent, so trials may be split across concurrent workers with
    per-partition seeds and merged afterwards.
    """
    if not results:
        raise ValueError("nothing to combine")
    total = sum(r.trials for r in results)
    mean = math.fsum(r.mean * r.trials for r in results) / total
    # Reassemble the pooled sum of squared deviations from each partition's
    # variance and mean offset.
    ss = math.fsum(
        r.std_error**2 * r.trials * (r.trials - 1) + r.trials * (r.mean - mean) ** 2
        for r in results
    )
    return McResult(mean=mean, std_error=math.sqrt(ss / (total - 1) / total), trials=total)


def mc_liar_payoff(p: float, penalty: float, j: int, trials: int, seed: int = 0) -> McResult:
    """Estimate a liar's per-round trust change by simulating rounds.

    Each round: with probability p the requester selects by trust and the
    liar earns +1; otherwise one of the j volunteers is picked uniformly
    and the liar loses ``penalty`` if the pick lands on it, earning +1
    otherwise.
    """
    _check_round_params(p, j)
    if trials < _MIN_TRIALS:
        raise ValueError(f"trials must be >= {_MIN_TRIALS}")
    stream = Stream.from_path(seed, "mc-liar-payoff")
    rand = stream.random
    pick = stream.randbelow
    credited = 0
    for _ in range(trials):
        if rand() < p or pick(j) != 0:
            credited += 1
    penalized = trials - credited
    mean = (credited - penalty * penalized) / trials
    ss = credited * (1.0 - mean) ** 2 + penalized * (-penalty - mean) ** 2
    return McResult(mean=mean, std_error=math.sqrt(ss / (trials - 1) / trials), trials=trials)


def mc_escape_frequency(j: int, p: float, streak: int, trials: int, seed: int = 0) -> McResult:
    """Estimate the probability a liar survives ``streak`` volunteering
    rounds without a penalty, by simulating its credit sequence."""
    _check_round_params(p, j)
    if streak < 0:
        raise ValueError("streak must be >= 0")
    if trials < _MIN_TRIALS:
        raise ValueError(f"trials must be >= {_MIN_TRIALS}")
    stream = Stream.from_path(seed, "mc-escape")
    rand = stream.random
    pick = stream.randbelow
    survived = 0
    for _ in range(trials):
        for _ in range(streak):
            if rand() >= p and pick(j) == 0:
                break
        else:
            survived += 1
    freq = survived / trials
    ss = survived * (1.0 - freq) ** 2 + (trials - survived) * freq**2
    return McResult(mean=freq, std_error=math.sqrt(ss / (trials - 1) / trials), trials=trials)


def enumerate_escape_probability(j: int, p: float, streak: int) -> float:
    """Exact escape probability by exhausting all outcome sequences.

    Walks the 2**streak credit sequences (trust-selected round vs random
    round where another volunteer was picked), multiplying branch
    probabilities and summing the leaves exactly.
    """
    _check_round_params(p, j)
    if streak < 0:
        raise ValueError("streak must be >= 0")
    if streak > _MAX_ENUM_STREAK:
        raise ValueError(
            f"streak {streak} too large to enumerate (2**streak sequences; "
            f"limit {_MAX_ENUM_STREAK})"
        )
    credit_by_trust = p
    credit_random = (1.0 - p) * (j - 1) / j
    leaves: list[float] = []

    def walk(depth: int, prob: float) -> None:
        if depth == streak:
            leaves.append(prob)
            return
        walk(depth + 1, prob * credit_by_trust)
        walk(depth + 1, prob * credit_random)

    walk(0, 1.0)
    return math.fsum(leaves)


def within_sigmas(expected: float, result: McResult, sigmas: float = 4.0) -> bool:
    """True when the estimate lies within ``sigmas`` standard errors of the
    expected value (exact equality required when the spread is zero)."""
    if result.std_error == 0.0:
        return result.mean == expected
    return abs(result.mean - expected) <= sigmas * result.std_error


def _check_round_params(p: float, j: int) -> None:
    if j < 1:
        raise ValueError("j must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be within [0, 1]")
