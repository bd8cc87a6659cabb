"""De-randomized binary string guessing under random-order arrivals.

Guess 0 for the first bit, then persist with the first bit's true value
until the first miss.  The miss happens exactly when the first bit value
different from the leading one arrives, which is also the moment COMBINE
emits its bit r; guess r from then on.  On a constant string there is never
a switch and at most the very first guess is wrong.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import InputError, distinct_orderings, rng_for
from .extraction import CombineExtractor


@dataclass
class GuessTrace:
    guesses: tuple
    truth: tuple
    correct: int
    switch_index: int  # position of the first miss / bit emission, or None


def guess_run(bits):
    """Play one arrival order of the truth string; returns the full trace."""
    bits = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in bits):
        raise InputError("string guessing items must be bits")
    ext = CombineExtractor()
    guesses = []
    confirmed = None
    r = None
    switch = None
    for i, b in enumerate(bits):
        if r is not None:
            guesses.append(r)
        elif confirmed is None:
            guesses.append(0)
        else:
            guesses.append(confirmed)
        if r is None:
            emitted = ext.feed((b,))
            if emitted is not None:
                r = emitted
                switch = i
        if i == 0:
            confirmed = b
    correct = sum(1 for g, b in zip(guesses, bits) if g == b)
    return GuessTrace(guesses=tuple(guesses), truth=bits, correct=correct, switch_index=switch)


def exact_expected_correct(bits):
    """Exact E[correct] over all arrival orders of the bit multiset."""
    total = Fraction(0)
    count = 0
    for order in distinct_orderings(bits):
        total += guess_run(order).correct
        count += 1
    return total / count


def exact_ratio(bits):
    """n / E[correct]; the offline optimum always guesses every bit."""
    e = exact_expected_correct(bits)
    if e == 0:
        raise InputError("expected correct count is zero")
    return Fraction(len(tuple(bits))) / e


def empirical_ratio(n, p_one, trials, seed):
    """Monte Carlo n / E[correct] over random truth strings and arrivals.

    Each trial draws a Bernoulli(p_one) string and one arrival order; the
    arrival order of an exchangeable random string is itself the string, so
    a single shuffle-free draw suffices.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    p = float(p_one)
    total_correct = 0
    for t in range(trials):
        rng = rng_for(seed, t)
        bits = [1 if rng.random() < p else 0 for _ in range(n)]
        total_correct += guess_run(bits).correct
    mean = total_correct / trials
    return {
        "n": n,
        "mean_correct": mean,
        "ratio": n / mean if mean else float("inf"),
        "trials": trials,
        "seed": seed,
    }
