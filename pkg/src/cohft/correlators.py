r"""Rational psi-class intersection numbers in genus 0 and 1.

Genus 0 is the closed formula

    <tau_{d_1} ... tau_{d_n}>_0 = (n-3)! / (d_1! ... d_n!)   if sum d_i = n-3,

zero otherwise (and zero for n < 3 or any negative exponent).  Genus 1 is
computed by the genus-1 topological recursion: reducing at a point with
d_i >= 1,

    <... tau_{d_i+1} ...>_1 = sum_{I u J, i in I} <tau_{d_I} tau_0>_0 <tau_0 tau_{d_J}>_1
                              + 1/24 <tau_d tau_0 tau_0>_0 ,

with memoization on sorted exponent tuples.  Nothing seeds <tau_1>_1: on
the one-point key the splitting terms die by stability and the recursion
returns 1/24 <tau_0^3>_0 = 1/24 on its own.

>>> genus0((0, 0, 0))
Fraction(1, 1)
>>> genus1((1,))
Fraction(1, 24)
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

ZERO = Fraction(0)
ONE_24TH = Fraction(1, 24)


def correlator_key(genus: int, d: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Canonical (genus, sorted exponents) key for a correlator."""
    if genus not in (0, 1):
        raise ValueError(f"genus must be 0 or 1, got {genus}")
    return genus, tuple(sorted(int(x) for x in d))


def genus0(d: Sequence[int]) -> Fraction:
    """<tau_{d_1} ... tau_{d_n}>_0 by the closed formula."""
    d = tuple(int(x) for x in d)
    n = len(d)
    if n < 3 or any(x < 0 for x in d) or sum(d) != n - 3:
        return ZERO
    denom = 1
    for x in d:
        denom *= math.factorial(x)
    return Fraction(math.factorial(n - 3), denom)


class CorrelatorCache:
    """A memo table for correlator values, serializable as JSON.

    Keys are ``"d_1,...,d_n"`` over sorted exponents; values are rationals
    in ``"p/q"`` form.  Stored genus-0 values are redundant (the closed
    formula is authoritative) and are verified against it on load; genus-1
    values feed the recursion's memo and are re-verified whenever the
    recursion recomputes a cached key.
    """

    def __init__(self):
        self.genus1: dict[tuple[int, ...], Fraction] = {}
        self.genus0: dict[tuple[int, ...], Fraction] = {}

    @staticmethod
    def _parse_key(s: str) -> tuple[int, ...]:
        if s == "":
            return ()
        return tuple(sorted(int(x) for x in s.split(",")))

    def to_dict(self) -> dict:
        return {
            "genus0": {",".join(map(str, k)): str(v) for k, v in sorted(self.genus0.items())},
            "genus1": {",".join(map(str, k)): str(v) for k, v in sorted(self.genus1.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CorrelatorCache":
        from .serialize import parse_rational
        cache = cls()
        for key, val in data.get("genus0", {}).items():
            k = cls._parse_key(key)
            v = parse_rational(val)
            if v != genus0(k):
                raise ValueError(f"cached genus-0 value for {k} contradicts the closed formula")
            cache.genus0[k] = v
        for key, val in data.get("genus1", {}).items():
            cache.genus1[cls._parse_key(key)] = parse_rational(val)
        return cache

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "CorrelatorCache":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


_DEFAULT_CACHE = CorrelatorCache()


def genus1(d: Sequence[int], cache: CorrelatorCache | None = None) -> Fraction:
    """<tau_{d_1} ... tau_{d_n}>_1 via the genus-1 topological recursion.

    Zero unless n >= 1, all exponents nonnegative and sum d_i = n.
    Reduction always happens at the largest exponent (ties: lowest index
    in the sorted key), and results are memoized per sorted key.
    """
    if cache is None:
        cache = _DEFAULT_CACHE
    e = tuple(sorted(int(x) for x in d))
    n = len(e)
    if n < 1 or (e and e[0] < 0) or sum(e) != n:
        return ZERO
    got = cache.genus1.get(e)
    if got is not None:
        return got

    # reduce at the largest exponent; sum(e) = n >= 1 forces max(e) >= 1
    i = e.index(max(e))
    base = list(e)
    base[i] -= 1
    rest = [p for p in range(n) if p != i]

    total = ZERO
    for mask in range(1 << len(rest)):
        inner = [base[i]]
        outer = [0]
        for b, p in enumerate(rest):
            (inner if mask >> b & 1 else outer).append(base[p])
        g0 = genus0(inner + [0])
        if g0 == 0:
            continue  # also guards termination: |I| >= 2 here
        total += g0 * genus1(outer, cache)
    total += ONE_24TH * genus0(base + [0, 0])

    cache.genus1[e] = total
    return total


def clear_default_cache() -> None:
    _DEFAULT_CACHE.genus1.clear()
    _DEFAULT_CACHE.genus0.clear()


# ---------------------------------------------------------------------------
# recursion checks


def trr0_check(d: Sequence[int], i: int, j: int, k: int) -> bool:
    """Genus-0 topological recursion at points (i; j, k).

    Checks  <.. tau_{d_i+1} ..>_0 = sum_{I u J = n, i in I; j,k in J}
    <tau_{d_I} tau_0>_0 <tau_0 tau_{d_J}>_0  for the given base exponents.
    """
    d = tuple(int(x) for x in d)
    n = len(d)
    if len({i, j, k}) != 3 or not all(0 <= p < n for p in (i, j, k)):
        raise ValueError("need three distinct marked points")
    lhs_key = list(d)
    lhs_key[i] += 1
    lhs = genus0(lhs_key)
    rest = [p for p in range(n) if p not in (i, j, k)]
    rhs = ZERO
    for mask in range(1 << len(rest)):
        inner = [d[i]]
        outer = [d[j], d[k]]
        for b, p in enumerate(rest):
            (inner if mask >> b & 1 else outer).append(d[p])
        rhs += genus0(inner + [0]) * genus0([0] + outer)
    return lhs == rhs


def trr0_sym_check(d: Sequence[int], i: int, j: int) -> bool:
    """Symmetrized genus-0 recursion at two points.

    Checks  <.. tau_{d_i+1} ..>_0 + <.. tau_{d_j+1} ..>_0
    = sum_{I u J = n, i in I, j in J} <tau_{d_I} tau_0>_0 <tau_0 tau_{d_J}>_0.
    """
    d = tuple(int(x) for x in d)
    n = len(d)
    if i == j or not all(0 <= p < n for p in (i, j)):
        raise ValueError("need two distinct marked points")
    ki = list(d)
    ki[i] += 1
    kj = list(d)
    kj[j] += 1
    lhs = genus0(ki) + genus0(kj)
    rest = [p for p in range(n) if p not in (i, j)]
    rhs = ZERO
    for mask in range(1 << len(rest)):
        inner = [d[i]]
        outer = [d[j]]
        for b, p in enumerate(rest):
            (inner if mask >> b & 1 else outer).append(d[p])
        rhs += genus0(inner + [0]) * genus0([0] + outer)
    return lhs == rhs


def trr1_reduce_at(e: Sequence[int], i: int, cache: CorrelatorCache | None = None) -> Fraction:
    """Right-hand side of the genus-1 recursion reducing at point ``i``.

    Requires e_i >= 1.  Used to check independence of the reduction point.
    """
    e = tuple(int(x) for x in e)
    n = len(e)
    if not 0 <= i < n or e[i] < 1:
        raise ValueError("reduction point must carry exponent >= 1")
    base = list(e)
    base[i] -= 1
    rest = [p for p in range(n) if p != i]
    total = ZERO
    for mask in range(1 << len(rest)):
        inner = [base[i]]
        outer = [0]
        for b, p in enumerate(rest):
            (inner if mask >> b & 1 else outer).append(base[p])
        g0 = genus0(inner + [0])
        if g0 == 0:
            continue
        total += g0 * genus1(outer, cache)
    total += ONE_24TH * genus0(base + [0, 0])
    return total


def trr1_consistency(e: Sequence[int], cache: CorrelatorCache | None = None) -> bool:
    """The genus-1 recursion gives the same value at every reduction point."""
    e = tuple(int(x) for x in e)
    want = genus1(e, cache)
    for i, x in enumerate(e):
        if x >= 1 and trr1_reduce_at(e, i, cache) != want:
            return False
    return True


# ---------------------------------------------------------------------------
# key enumeration


def sorted_tuples_with_sum(length: int, total: int) -> Iterator[tuple[int, ...]]:
    """All nondecreasing tuples of the given length summing to total."""
    if length == 0:
        if total == 0:
            yield ()
        return

    def rec(prefix, lo, remaining, slots):
        if slots == 0:
            if remaining == 0:
                yield prefix
            return
        for x in range(lo, remaining + 1):
            if x * slots > remaining:
                break
            yield from rec(prefix + (x,), x, remaining - x, slots - 1)

    yield from rec((), 0, total, length)


def genus0_keys(n: int) -> Iterator[tuple[int, ...]]:
    """Sorted on-shell genus-0 exponent tuples with n points."""
    if n >= 3:
        yield from sorted_tuples_with_sum(n, n - 3)


def genus1_keys(n: int) -> Iterator[tuple[int, ...]]:
    """Sorted on-shell genus-1 exponent tuples with n points."""
    if n >= 1:
        yield from sorted_tuples_with_sum(n, n)


def all_keys(n_max: int) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Every on-shell (genus, sorted d) with at most n_max points."""
    for n in range(1, n_max + 1):
        for d in genus0_keys(n):
            yield 0, d
        for d in genus1_keys(n):
            yield 1, d
