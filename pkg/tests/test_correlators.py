"""Psi-class intersection numbers against an independent oracle.

The oracle below computes every on-shell correlator from the string and
dilaton equations alone, seeded only by <tau_0^3>_0 = 1 and
<tau_1>_1 = 1/24.  On shell (sum d_i = n - 3 + 3g) a key with no zero
exponent must contain a 1, so the two equations always apply and the pair
is a complete, closed-formula-free and recursion-free route to the same
numbers.
"""

import itertools
from fractions import Fraction

import pytest

from cohft.correlators import (
    CorrelatorCache,
    all_keys,
    clear_default_cache,
    correlator_key,
    genus0,
    genus0_keys,
    genus1,
    genus1_keys,
    sorted_tuples_with_sum,
    trr0_check,
    trr0_sym_check,
    trr1_consistency,
    trr1_reduce_at,
)

F = Fraction

_MEMO: dict[tuple[int, tuple[int, ...]], Fraction] = {}


def oracle(g, d):
    """String/dilaton evaluation of <tau_{d_1} ... tau_{d_n}>_g."""
    d = tuple(sorted(d))
    n = len(d)
    if any(x < 0 for x in d) or sum(d) != n - 3 + 3 * g:
        return F(0)
    if g == 0 and n < 3:
        return F(0)
    if g == 1 and n < 1:
        return F(0)
    if g == 0 and n == 3:
        return F(1)  # forced: d = (0, 0, 0)
    if g == 1 and n == 1:
        return F(1, 24)  # forced: d = (1,)
    key = (g, d)
    if key in _MEMO:
        return _MEMO[key]
    if d[0] == 0:
        rest = d[1:]
        total = F(0)
        for i, x in enumerate(rest):
            if x >= 1:
                total += oracle(g, rest[:i] + (x - 1,) + rest[i + 1:])
    else:
        # no zeros: on shell forces min(d) = 1, so dilaton applies
        assert d[0] == 1
        rest = d[1:]
        total = (2 * g - 2 + n - 1) * oracle(g, rest)
    _MEMO[key] = total
    return total


# ---------------------------------------------------------------------------
# frozen spot values


@pytest.mark.parametrize("d,val", [
    ((0, 0, 0), F(1)),
    ((0, 0, 0, 1), F(1)),
    ((0, 0, 0, 1, 1), F(2)),
    ((0, 0, 0, 0, 2), F(1)),
    ((0, 0, 0, 0, 0, 3), F(1)),
    ((0, 0, 0, 0, 1, 2), F(3)),
    ((0, 0, 0, 1, 1, 1), F(6)),
    ((0, 0, 1), F(0)),      # off shell
    ((0, 0), F(0)),         # unstable
    ((0, -1, 0, 1, 1), F(0)),
])
def test_genus0_values(d, val):
    assert genus0(d) == val


@pytest.mark.parametrize("d,val", [
    ((1,), F(1, 24)),
    ((0, 2), F(1, 24)),
    ((1, 1), F(1, 24)),
    ((0, 0, 3), F(1, 24)),
    ((0, 1, 2), F(1, 12)),
    ((1, 1, 1), F(1, 12)),
    ((0,), F(0)),           # off shell
    ((2,), F(0)),
    ((), F(0)),
])
def test_genus1_values(d, val):
    assert genus1(d) == val


def test_genus0_symmetric_in_arguments():
    for perm in itertools.permutations((2, 0, 1, 0, 0)):
        assert genus0(perm) == genus0((0, 0, 0, 1, 2))


# ---------------------------------------------------------------------------
# the oracle agrees with both engines


def test_genus0_matches_string_dilaton_oracle():
    for n in range(3, 9):
        for d in genus0_keys(n):
            assert genus0(d) == oracle(0, d), d


def test_genus1_matches_string_dilaton_oracle():
    clear_default_cache()
    for n in range(1, 7):
        for d in genus1_keys(n):
            assert genus1(d) == oracle(1, d), d


# ---------------------------------------------------------------------------
# recursion identities (exhaustive versions live in the acceptance suite)


def test_trr0_spot():
    assert trr0_check((1, 0, 0, 1), 0, 1, 2)
    assert trr0_check((2, 0, 0, 0, 1), 4, 0, 2)


def test_trr0_sym_spot():
    assert trr0_sym_check((1, 1, 0, 0, 0), 0, 1)


def test_trr1_reduction_point_independence_spot():
    for e in ((1, 1), (0, 1, 2), (1, 1, 1), (0, 0, 1, 2)):
        vals = {trr1_reduce_at(e, i) for i in range(len(e)) if e[i] >= 1}
        assert len(vals) == 1
        assert vals == {genus1(e)}
        assert trr1_consistency(e)


def test_trr1_reduce_requires_positive_exponent():
    with pytest.raises(ValueError):
        trr1_reduce_at((0, 2), 0)


# ---------------------------------------------------------------------------
# key enumeration


def test_key_enumeration_counts():
    # number of sorted length-n tuples with given sum is a partition count
    assert list(sorted_tuples_with_sum(3, 0)) == [(0, 0, 0)]
    assert list(sorted_tuples_with_sum(2, 3)) == [(0, 3), (1, 2)]
    assert len(list(genus0_keys(6))) == len(list(sorted_tuples_with_sum(6, 3)))
    assert len(list(genus1_keys(4))) == len(list(sorted_tuples_with_sum(4, 4)))
    keys = list(all_keys(4))
    assert (0, (0, 0, 0)) in keys
    assert (1, (1,)) in keys
    assert all(g in (0, 1) for g, _ in keys)


def test_correlator_key_canonicalizes():
    assert correlator_key(0, [2, 0, 1]) == (0, (0, 1, 2))
    with pytest.raises(ValueError):
        correlator_key(2, [0])


# ---------------------------------------------------------------------------
# cache plumbing


def test_cache_round_trip(tmp_path):
    cache = CorrelatorCache()
    genus1((0, 1, 2), cache)
    cache.genus0[(0, 0, 0)] = genus0((0, 0, 0))
    path = tmp_path / "cache.json"
    cache.save(path)
    back = CorrelatorCache.load(path)
    assert back.genus1 == cache.genus1
    assert back.genus0 == cache.genus0


def test_cache_rejects_contradicting_genus0(tmp_path):
    data = {"genus0": {"0,0,0": "2"}, "genus1": {}}
    with pytest.raises(ValueError) as err:
        CorrelatorCache.from_dict(data)
    assert "contradicts" in str(err.value)


def test_cache_feeds_recursion():
    cache = CorrelatorCache()
    cache.genus1[(1,)] = F(1, 24)
    assert genus1((1, 1), cache) == F(1, 24)
    assert (1, 1) in cache.genus1


def test_memo_is_trusted_at_exact_keys():
    # the recursion trusts genus-1 memo entries at their own key; loading
    # is where cross-checking happens (genus-0 side above)
    cache = CorrelatorCache()
    cache.genus1[(1,)] = F(1, 7)
    assert genus1((1,), cache) == F(1, 7)
    fresh = CorrelatorCache()
    assert genus1((1,), fresh) == F(1, 24)
