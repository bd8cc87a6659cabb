"""De-randomized online knapsack with revoking.

Three ROM algorithms share the same skeleton: pack identical items greedily,
extract a bit with COMBINE when the first distinct item arrives, then commit
to one of two deterministic continuations.

* proportional, two subroutines (aggressive / balanced) chosen by the bit;
* proportional, two-bin variant with an early-exit guard;
* general weights, GREEDY-by-density versus MAX-value.

Unit capacity throughout.  Weights and values enter as exact rationals and
are rescaled once per instance to integers (capacity becomes ``cap``), so
class boundaries such as 3/10 are decided by integer cross-multiplication
and the exhaustive permutation audits run on plain ints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .core import CapacityError, InputError, rng_for
from .extraction import CombineExtractor

OPT_GUARD = 24


def weight_class(w, cap=1):
    """Weight class from the printed thresholds; boundaries are exact.

    small w <= 3/10; M1 (3/10, 2/5]; M2 (2/5, 1/2]; M3 (1/2, 3/5);
    M4 [3/5, 7/10); large w >= 7/10.  Works on Fractions (cap=1) and on
    scaled integers alike.
    """
    t = 10 * w
    if t <= 3 * cap:
        return "S"
    if t <= 4 * cap:
        return "M1"
    if t <= 5 * cap:
        return "M2"
    if t < 6 * cap:
        return "M3"
    if t < 7 * cap:
        return "M4"
    return "L"


def scale_weights(weights):
    """Rescale rational weights in (0,1] to integers with a common capacity."""
    fracs = [Fraction(w) for w in weights]
    if any(not 0 < w <= 1 for w in fracs):
        raise InputError("weights must lie in (0, 1]")
    cap = 1
    for w in fracs:
        cap = cap * w.denominator // math.gcd(cap, w.denominator)
    return [int(w * cap) for w in fracs], cap


def scale_values(values):
    fracs = [Fraction(v) for v in values]
    if any(v <= 0 for v in fracs):
        raise InputError("values must be positive")
    den = 1
    for v in fracs:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return [int(v * den) for v in fracs], den


# ---------------------------------------------------------------------------
# proportional subroutines (aggressive A1, balanced A2)
# ---------------------------------------------------------------------------


class SubroutineA1:
    """Aggressive continuation: hold at most one heavy-medium (M3/M4) item,
    the smallest of the preferred class (M4 once any M4 item has been seen,
    M3 before that), and around it retain the maximum-weight fitting subset
    of the lighter items.  A large arrival evicts everything else and
    completes the packing.

    Two heavy-medium items never fit together, so the choice is which single
    one to hold; the smallest pairs best with later small items.  The slot
    stays empty when the light items alone outweigh it (forcing the keeper
    can strand it against a heavier pair), and cheaper greedy evictions lose
    the 7/5 pair bound in both directions, so the fitting subset is exact.
    """

    def __init__(self, cap):
        self.cap = cap
        self.contents = []  # (weight, arrival_index)
        self.seen_m4 = False
        self.frozen = False
        self.revoked = []

    def total(self):
        return sum(w for w, _ in self.contents)

    def feed(self, w, arr):
        if self.frozen:
            return
        cls = weight_class(w, self.cap)
        if cls == "L":
            self.revoked.extend(self.contents)
            self.contents = [(w, arr)]
            self.frozen = True
            return
        if cls == "M4":
            self.seen_m4 = True
        q = self.contents + [(w, arr)]
        want = "M4" if self.seen_m4 else "M3"
        candidates = [e for e in q if weight_class(e[0], self.cap) == want]
        if not candidates:
            candidates = [
                e for e in q if weight_class(e[0], self.cap) in ("M3", "M4")
            ]
        keeper = min(candidates) if candidates else None
        lights = [
            e for e in q if weight_class(e[0], self.cap) not in ("M3", "M4")
        ]
        best_light, kept_light = max_subset_within(lights, self.cap)
        new_contents = list(kept_light)
        if keeper is not None:
            with_k, kept_k = max_subset_within(lights, self.cap - keeper[0])
            if keeper[0] + with_k >= best_light:
                new_contents = [keeper] + list(kept_k)
        self.revoked.extend(e for e in q if e not in new_contents)
        self.contents = new_contents


class SubroutineA2:
    """Balanced continuation: freeze as soon as some subset of the knapsack
    plus the new item carries at least 9/10 weight (8/10 once an M4 item has
    been seen); otherwise protect the smallest M2 and M1 items, evicting
    other medium items heaviest-first and then the lightest small items."""

    def __init__(self, cap):
        self.cap = cap
        self.contents = []
        self.seen_m4 = False
        self.frozen = False
        self.revoked = []

    def total(self):
        return sum(w for w, _ in self.contents)

    def feed(self, w, arr):
        if self.frozen:
            return
        cls = weight_class(w, self.cap)
        if cls == "L":
            self.revoked.extend(self.contents)
            self.contents = [(w, arr)]
            self.frozen = True
            return
        if cls == "M4":
            self.seen_m4 = True
        q = self.contents + [(w, arr)]
        threshold = 8 if self.seen_m4 else 9
        best_sum, best_set = max_subset_within(q, self.cap)
        if 10 * best_sum >= threshold * self.cap:
            self.revoked.extend(e for e in q if e not in best_set)
            self.contents = list(best_set)
            self.frozen = True
            return
        keepers = set()
        for want in ("M2", "M1"):
            cands = [e for e in q if weight_class(e[0], self.cap) == want]
            if cands:
                keepers.add(min(cands))
        total = sum(e[0] for e in q)
        mediums = [
            e
            for e in q
            if weight_class(e[0], self.cap).startswith("M") and e not in keepers
        ]
        # heaviest first; among equal weights the most recent arrival goes
        for victim in sorted(mediums, key=lambda e: (-e[0], -e[1])):
            if total <= self.cap:
                break
            q.remove(victim)
            self.revoked.append(victim)
            total -= victim[0]
        smalls = [e for e in q if weight_class(e[0], self.cap) == "S"]
        for victim in sorted(smalls, key=lambda e: (e[0], -e[1])):
            if total <= self.cap:
                break
            q.remove(victim)
            self.revoked.append(victim)
            total -= victim[0]
        self.contents = q


def subroutine_a1(state, w, arr=0):
    state.feed(w, arr)
    return state


def subroutine_a2(state, w, arr=0):
    state.feed(w, arr)
    return state


def max_subset_within(entries, cap):
    """Maximum-total subset of the given (weight, arrival) entries with total
    <= cap; deterministic tie-break by search order (heaviest first)."""
    order = sorted(entries, key=lambda e: (-e[0], e[1]))
    n = len(order)
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + order[i][0]
    best_sum = 0
    best_set = ()

    def rec(i, total, chosen):
        nonlocal best_sum, best_set
        if total > cap:
            return
        if total > best_sum:
            best_sum = total
            best_set = tuple(chosen)
        if i == n or total + suffix[i] <= best_sum:
            return
        chosen.append(order[i])
        rec(i + 1, total + order[i][0], chosen)
        chosen.pop()
        rec(i + 1, total, chosen)

    rec(0, 0, [])
    return best_sum, best_set


@dataclass
class ProportionalRun:
    bit: int
    switch_index: int
    chosen: str  # "A1", "A2", or "prefix" when no bit was extracted
    contents: list
    value: int
    a1_value: int
    a2_value: int
    revoked: list
    cap: int

    def value_fraction(self):
        return Fraction(self.value, self.cap)


def rom_proportional(weights, cap):
    """Greedy identical prefix, then the bit picks subroutine A1 or A2.

    Both subroutines are simulated from the start of the sequence; during
    the identical prefix their knapsacks coincide with the greedy packing,
    so the returned knapsack always equals one full A1 or A2 run.
    """
    a1 = SubroutineA1(cap)
    a2 = SubroutineA2(cap)
    ext = CombineExtractor()
    bit = None
    switch = None
    for i, w in enumerate(weights):
        if bit is None:
            b = ext.feed((w,))
            if b is not None:
                bit = b
                switch = i
        a1.feed(w, i)
        a2.feed(w, i)
    if bit is None:
        # all items identical: both subroutines hold the same greedy packing
        return ProportionalRun(
            bit=None,
            switch_index=None,
            chosen="prefix",
            contents=list(a1.contents),
            value=a1.total(),
            a1_value=a1.total(),
            a2_value=a2.total(),
            revoked=list(a1.revoked),
            cap=cap,
        )
    side = a1 if bit == 1 else a2
    return ProportionalRun(
        bit=bit,
        switch_index=switch,
        chosen="A1" if bit == 1 else "A2",
        contents=list(side.contents),
        value=side.total(),
        a1_value=a1.total(),
        a2_value=a2.total(),
        revoked=list(side.revoked),
        cap=cap,
    )


# ---------------------------------------------------------------------------
# proportional two-bin variant
# ---------------------------------------------------------------------------


@dataclass
class TwoBinRun:
    bit: int
    early_exit: bool
    contents: list
    value: int
    revocations: int
    cap: int

    def value_fraction(self):
        return Fraction(self.value, self.cap)


def rom_proportional_tworbin(weights, cap, force_bit=None):
    """Two-bin continuation: bit 1 keeps filling the current knapsack (bin 1),
    bit 0 revokes everything and collects the items that overflow bin 1.

    Returns the current knapsack untouched when less than one more identical
    item would fit (the early-exit guard).
    """
    w0 = weights[0]
    ext = CombineExtractor()
    ext.feed((w0,))
    packed = [(w0, 0)] if w0 <= cap else []
    total = w0 if w0 <= cap else 0
    i = 1
    bit = None
    while i < len(weights):
        w = weights[i]
        b = ext.feed((w,))
        if b is not None:
            bit = b
            break
        if total + w <= cap:
            packed.append((w, i))
            total += w
        i += 1
    if bit is None:
        return TwoBinRun(
            bit=None, early_exit=False, contents=packed, value=total,
            revocations=0, cap=cap,
        )
    if force_bit is not None:
        bit = force_bit
    if total > 0 and cap - total < w0:
        return TwoBinRun(
            bit=bit, early_exit=True, contents=packed, value=total,
            revocations=0, cap=cap,
        )
    bin1 = list(packed)
    w1 = total
    revocations = 0
    if bit == 1:
        for j in range(i, len(weights)):
            w = weights[j]
            if w1 + w <= cap:
                bin1.append((w, j))
                w1 += w
        return TwoBinRun(
            bit=1, early_exit=False, contents=bin1, value=w1,
            revocations=0, cap=cap,
        )
    # bit 0: revoke the greedy prefix, keep simulating bin 1, pack bin 2
    revocations = len(packed)
    bin2 = []
    w2 = 0
    for j in range(i, len(weights)):
        w = weights[j]
        if w1 + w <= cap:
            bin1.append((w, j))
            w1 += w
        elif w2 + w <= cap:
            bin2.append((w, j))
            w2 += w
    return TwoBinRun(
        bit=0, early_exit=False, contents=bin2, value=w2,
        revocations=revocations, cap=cap,
    )


# ---------------------------------------------------------------------------
# general weights: GREEDY by value density versus MAX value
# ---------------------------------------------------------------------------


def greedy_density_run(items, cap):
    """Online GREEDY with revoking: keep the densest items, evicting the
    least dense (most recent on ties) whenever the knapsack overflows.
    Returns the final packed value."""
    contents = []  # (w, v, arrival)
    total_w = 0
    for i, (w, v) in enumerate(items):
        contents.append((w, v, i))
        total_w += w
        while total_w > cap:
            victim = min(contents, key=lambda e: (Fraction(e[1], e[0]), -e[2]))
            contents.remove(victim)
            total_w -= victim[0]
    return sum(e[1] for e in contents), contents


@dataclass
class GeneralRun:
    bit: int
    switch_index: int
    greedy_value: int
    max_value: int
    value: int
    cap: int
    value_den: int

    def value_fraction(self):
        return Fraction(self.value, self.value_den)


def rom_general(items, cap, value_den=1):
    """GREEDY on the identical prefix; the bit keeps GREEDY or switches to MAX.

    ``items`` are scaled (weight, value) integer pairs; COMBINE compares
    items by value first, then weight.
    """
    ext = CombineExtractor()
    bit = None
    switch = None
    contents = []
    total_w = 0
    best = None  # (value, arrival) maximum-value item seen
    for i, (w, v) in enumerate(items):
        if bit is None:
            b = ext.feed((v, w))
            if b is not None:
                bit = b
                switch = i
        if best is None or v > best[0]:
            best = (v, i)
        if bit == 0:
            continue
        contents.append((w, v, i))
        total_w += w
        while total_w > cap:
            victim = min(contents, key=lambda e: (Fraction(e[1], e[0]), -e[2]))
            contents.remove(victim)
            total_w -= victim[0]
    greedy_value = sum(e[1] for e in contents)
    max_value = best[0] if best is not None else 0
    if bit == 0:
        value = max_value
    else:
        value = greedy_value
    return GeneralRun(
        bit=bit,
        switch_index=switch,
        greedy_value=greedy_value,
        max_value=max_value,
        value=value,
        cap=cap,
        value_den=value_den,
    )


# ---------------------------------------------------------------------------
# offline oracle
# ---------------------------------------------------------------------------


def offline_opt_scaled(items, cap):
    """Exact optimum by depth-first subset search with a fractional bound."""
    if len(items) > OPT_GUARD:
        raise CapacityError(f"n={len(items)} exceeds oracle guard {OPT_GUARD}")
    order = sorted(
        (it for it in items if it[0] <= cap),
        key=lambda it: (Fraction(it[1], it[0]), it[1]),
        reverse=True,
    )
    n = len(order)
    best = 0

    def bound(i, room):
        b = 0
        for j in range(i, n):
            w, v = order[j]
            if w <= room:
                room -= w
                b += v
            else:
                return b + Fraction(v * room, w)
        return b

    def rec(i, room, value):
        nonlocal best
        if value > best:
            best = value
        if i == n or value + bound(i, room) <= best:
            return
        w, v = order[i]
        if w <= room:
            rec(i + 1, room - w, value + v)
        rec(i + 1, room, value)

    rec(0, cap, 0)
    return best


def offline_opt(items):
    """Exact optimum for rational (weight, value) items, unit capacity."""
    items = [(Fraction(w), Fraction(v)) for w, v in items]
    ws, cap = scale_weights([w for w, _ in items])
    vs, den = scale_values([v for _, v in items])
    return Fraction(offline_opt_scaled(list(zip(ws, vs)), cap), den)


# ---------------------------------------------------------------------------
# forced-revocation experiment
# ---------------------------------------------------------------------------


def exact_revocation_tail(n, alpha):
    """Pr(k >= ceil(alpha*n)) given that at least one copy precedes the unique
    item: the unique item is uniform over the n-1 non-leading positions."""
    a = Fraction(alpha)
    if not 0 < a <= 1:
        raise InputError("alpha must lie in (0, 1]")
    m = math.ceil(a * n)
    if m < 1:
        return Fraction(1)
    return Fraction(max(0, n - m), n - 1)


def revocation_experiment(n, epsilon, alpha, trials, seed):
    """Empirical Pr(k >= ceil(alpha*n)) for the forced-revocation instance.

    The instance is n-1 copies of weight epsilon/n plus one unit item.  On
    the bit-0 branch every copy that precedes the unique item is packed and
    then revoked (for epsilon <= 1 the early exit can never trigger), so k
    is the unique item's position minus one.
    """
    eps = Fraction(epsilon)
    if not 0 < eps <= 1:
        raise InputError("epsilon must lie in (0, 1]")
    a = Fraction(alpha)
    if not 0 < a <= 1:
        raise InputError("alpha must lie in (0, 1]")
    m = math.ceil(a * n)
    hits = 0
    for t in range(trials):
        pos = rng_for(seed, t).randrange(n)  # 0-based position of the unique item
        if pos >= m:
            hits += 1
    p = hits / trials
    return {
        "n": n,
        "alpha": a,
        "threshold": m,
        "estimate": p,
        "stderr": math.sqrt(p * (1 - p) / trials),
        "bound": 1 - float(a) - 1 / n,
        "trials": trials,
        "seed": seed,
    }


def forced_revocation_weights(n, epsilon):
    """Scaled weights for the adversarial instance: n-1 copies of eps/n plus
    one unit item (unit item last in label order)."""
    eps = Fraction(epsilon)
    ws, cap = scale_weights([eps / n] * (n - 1) + [Fraction(1)])
    return ws, cap
