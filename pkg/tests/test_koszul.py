"""Bracket hierarchy, operator orders, and trace compatibility conditions."""

import random
from fractions import Fraction
from itertools import product

import pytest

from cohft.algebra import (
    PreconditionViolation,
    commutator,
    linop,
    random_linop,
    vec,
)
from cohft.catalog import get, trunc_poly
from cohft.koszul import (
    bering_check,
    bracket,
    bracket_basis,
    bracket_explicit,
    comm_compat_check,
    getzler_check,
    lie_subalgebra_check,
    min_order,
    product_identity_check,
    strong_compat_check,
    trace_order_drop_check,
)

F = Fraction


# ---------------------------------------------------------------------------
# two implementations, one bracket


@pytest.mark.parametrize("name", ["trunc_poly_3", "exterior_2", "ext1_poly3"])
def test_bracket_equals_explicit_on_basis(name):
    E = get(name)
    A = E.algebra
    ops = list(E.operators.values())
    for D in ops:
        for n in (1, 2, 3):
            for t in product(range(A.dim), repeat=n):
                fs = [A.space.basis_vector(i) for i in t]
                assert bracket(A, D, fs) == bracket_explicit(A, D, fs), (D.degree, t)


def test_bracket_equals_explicit_on_random_vectors():
    rng = random.Random(41)
    E = get("exterior_2")
    A = E.algebra
    for _ in range(30):
        D = random_linop(A.space, rng.choice((-2, -1, 0, 1)), rng)
        fs = [vec(rng.randint(-2, 2) for _ in range(A.dim)) for _ in range(4)]
        assert bracket(A, D, fs) == bracket_explicit(A, D, fs)


def test_bracket_basis_matches_vector_route():
    E = get("ext1_poly3")
    A = E.algebra
    D = E.operators["weighted_contraction"]
    for t in product(range(A.dim), repeat=2):
        sparse = bracket_basis(A, D, t)
        dense = bracket(A, D, [A.space.basis_vector(i) for i in t])
        assert list(dense) == [sparse.get(k, F(0)) for k in range(A.dim)]


def test_bracket_graded_symmetry():
    # swapping adjacent arguments costs (-1)^{deg f_i deg f_{i+1}}
    E = get("exterior_2")
    A = E.algebra
    D = E.operators["bv_laplacian"]
    for t in product(range(A.dim), repeat=3):
        base = bracket_basis(A, D, t)
        for p in (0, 1):
            swapped = list(t)
            swapped[p], swapped[p + 1] = swapped[p + 1], swapped[p]
            sign = -1 if (A.space.parity(t[p]) and A.space.parity(t[p + 1])) else 1
            got = bracket_basis(A, D, tuple(swapped))
            assert got == {k: sign * v for k, v in base.items()}


# ---------------------------------------------------------------------------
# minimal orders: the full catalog table, frozen


ORDER_TABLE = [
    ("trunc_poly_2", "euler", 1),
    ("trunc_poly_3", "euler", 1),
    ("trunc_poly_3", "d2_dx2", 4),
    ("trunc_poly_4", "euler", 1),
    ("trunc_poly_4", "d_dx", 4),
    ("trunc_poly_4", "getzler2", 2),
    ("trunc_poly_4", "x_mult", None),
    ("trunc_poly_4", "identity", None),
    ("trunc_poly_5", "euler", 1),
    ("trunc_poly_5", "euler_sq", 2),
    ("trunc_poly_5", "euler_cube", 3),
    ("trunc_poly_6", "euler", 1),
    ("trunc_poly_6", "d2_dx2", 7),
    ("exterior_1", "d_theta", 1),
    ("exterior_2", "d_theta1", 1),
    ("exterior_2", "d_theta2", 1),
    ("exterior_2", "bv_laplacian", 2),
    ("exterior_2", "skew_contraction", 2),
    ("exterior_2", "theta1_mult", None),
    ("exterior_3", "d_theta1", 1),
    ("ext1_poly2", "x_dtheta", 1),
    ("ext1_poly3", "d_theta", 1),
    ("ext1_poly3", "theta_euler", 1),
    ("ext1_poly3", "weighted_contraction", 2),
    ("ext1_poly3", "partial_contraction", 3),
    ("odd_dual", "d_theta", 1),
]


@pytest.mark.parametrize("name,opname,order", ORDER_TABLE)
def test_minimal_orders(name, opname, order):
    E = get(name)
    rep = min_order(E.algebra, E.operators[opname], 7, opname)
    assert rep.minimal_order == order
    if order is None:
        assert sorted(rep.witnesses) == list(range(8))
    else:
        assert sorted(rep.witnesses) == list(range(order))
    # every witness is honest: re-evaluate through the vector bracket
    A = E.algebra
    for m, t in rep.witnesses.items():
        assert len(t) == m + 1
        val = bracket_explicit(A, E.operators[opname],
                               [A.space.basis_vector(i) for i in t])
        assert any(val)


def test_order_zero_means_zero_operator():
    A = get("trunc_poly_3").algebra
    z = linop(A.space, {}, 0)
    assert min_order(A, z, 3).minimal_order == 0


def test_truncation_raises_derivative_order():
    # d/dx on C[x]/(x^k) has order k, not 1: the relation x^k = 0 breaks
    # the Leibniz expansion at the top arity
    for k in (2, 3, 5):
        A = trunc_poly(k)
        d_dx = linop(A.space, {(j - 1, j): j for j in range(1, k)}, 0)
        assert min_order(A, d_dx, k + 1).minimal_order == k


def test_multiplication_operators_have_no_finite_order():
    # bracket_l(c-mult)(1,...,1) = (-1)^{l+1} c for every l: the Koszul
    # definition never terminates on multiplication operators
    T4 = get("trunc_poly_4")
    A = T4.algebra
    xm = T4.operators["x_mult"]
    for l in range(1, 6):
        v = bracket_basis(A, xm, (0,) * l)
        assert v == {1: F((-1) ** (l + 1))}


def test_min_order_precondition():
    A = get("trunc_poly_3").algebra
    with pytest.raises(PreconditionViolation):
        min_order(A, get("trunc_poly_3").operators["euler"], -1)


# ---------------------------------------------------------------------------
# the order-l product expansion


def test_product_identity_holds_at_and_above_order():
    cases = [("trunc_poly_5", "euler", 1), ("trunc_poly_4", "getzler2", 2),
             ("exterior_2", "bv_laplacian", 2), ("ext1_poly3", "partial_contraction", 3)]
    for name, opname, m in cases:
        E = get(name)
        for l in range(m, 4):
            for n in range(l + 1, l + 3):
                assert product_identity_check(E.algebra, E.operators[opname], l, n).ok


def test_product_identity_fails_below_order():
    E = get("trunc_poly_4")
    chk = product_identity_check(E.algebra, E.operators["d_dx"], 1, 3)
    assert not chk.ok
    assert chk.witness is not None


def test_product_identity_precondition():
    E = get("trunc_poly_4")
    with pytest.raises(PreconditionViolation):
        product_identity_check(E.algebra, E.operators["euler"], 2, 2)


# ---------------------------------------------------------------------------
# Bering's commutator expansion and the order filtration


def test_bering_on_seeded_pairs():
    rng = random.Random(59)
    for name in ("trunc_poly_3", "exterior_2"):
        A = get(name).algebra
        degs = sorted(set(A.space.degrees))
        for _ in range(30):
            D1 = random_linop(A.space, rng.choice(degs) - rng.choice(degs), rng, bound=2)
            D2 = random_linop(A.space, rng.choice(degs) - rng.choice(degs), rng, bound=2)
            for n in (1, 2, 3):
                assert bering_check(A, D1, D2, n).ok


def test_composition_filtration_sharp_cases():
    T = get("trunc_poly_5")
    A = T.algebra
    e1, e2 = T.operators["euler"], T.operators["euler_sq"]
    assert min_order(A, e1.compose(e2), 4).minimal_order == 3
    assert min_order(A, e2.compose(e2), 5).minimal_order == 4


def test_commutator_filtration_sharp_cases():
    E = get("ext1_poly3")
    A = E.algebra
    wc, te, dth = (E.operators[k] for k in
                   ("weighted_contraction", "theta_euler", "d_theta"))
    # orders 2 and 1: the bracket drops one step below the sum
    assert min_order(A, commutator(wc, te), 3).minimal_order == 2
    assert min_order(A, commutator(dth, te), 2).minimal_order == 1


# ---------------------------------------------------------------------------
# trace conditions


GETZLER_TRUE = [("trunc_poly_4", "getzler2"), ("ext1_poly2", "x_dtheta"),
                ("ext1_poly3", "theta_euler"), ("ext1_poly3", "weighted_contraction"),
                ("exterior_2", "d_theta1"), ("exterior_2", "d_theta2")]
GETZLER_FALSE = [("exterior_2", "bv_laplacian"), ("exterior_2", "skew_contraction"),
                 ("ext1_poly3", "d_theta"), ("trunc_poly_4", "euler"),
                 ("odd_dual", "d_theta")]


@pytest.mark.parametrize("name,opname", GETZLER_TRUE)
def test_getzler_positive(name, opname):
    E = get(name)
    assert getzler_check(E.algebra, E.operators[opname]).ok


@pytest.mark.parametrize("name,opname", GETZLER_FALSE)
def test_getzler_negative(name, opname):
    E = get(name)
    chk = getzler_check(E.algebra, E.operators[opname])
    assert not chk.ok
    assert chk.witness is not None


def test_strong_compat_table():
    sc = lambda name, opname: strong_compat_check(
        get(name).algebra, get(name).operators[opname], 3).ok
    assert sc("ext1_poly3", "partial_contraction")
    assert sc("ext1_poly3", "weighted_contraction")
    assert sc("trunc_poly_5", "euler_cube")
    assert not sc("trunc_poly_3", "d2_dx2")
    assert not sc("trunc_poly_6", "d2_dx2")
    with pytest.raises(PreconditionViolation):
        strong_compat_check(get("trunc_poly_3").algebra,
                            get("trunc_poly_3").operators["euler"], 2)


def test_trace_order_drop_at_minimal_order():
    for name, opname, m in [("trunc_poly_5", "euler_sq", 2),
                            ("exterior_2", "bv_laplacian", 2),
                            ("ext1_poly3", "partial_contraction", 3)]:
        E = get(name)
        assert trace_order_drop_check(E.algebra, E.operators[opname], m).ok


def test_trace_order_drop_can_fail_below_order():
    E = get("trunc_poly_3")
    chk = trace_order_drop_check(E.algebra, E.operators["d2_dx2"], 2)
    assert not chk.ok


# ---------------------------------------------------------------------------
# commutators of compatible operators stay compatible


def test_comm_compat_diagonal_and_pair():
    E = get("ext1_poly3")
    A = E.algebra
    wc, te = E.operators["weighted_contraction"], E.operators["theta_euler"]
    assert comm_compat_check(A, wc).ok
    # the pair case is non-vacuous: [wc, te] != 0
    assert not commutator(wc, te).is_zero()
    assert comm_compat_check(A, wc, te, 3).ok


def test_comm_compat_hypothesis_enforcement():
    E3 = get("ext1_poly3")
    A = E3.algebra
    with pytest.raises(PreconditionViolation, match="odd"):
        comm_compat_check(A, E3.operators["theta_euler"].compose(
            E3.operators["theta_euler"]))  # zero map but even degree label
    with pytest.raises(PreconditionViolation, match="order"):
        comm_compat_check(A, E3.operators["partial_contraction"])  # order 3
    with pytest.raises(PreconditionViolation, match="1/12"):
        comm_compat_check(A, E3.operators["d_theta"])  # getzler fails
    wc = E3.operators["weighted_contraction"]
    with pytest.raises(PreconditionViolation, match="l is required"):
        comm_compat_check(A, wc, E3.operators["theta_euler"])


def test_lie_subalgebra_check_cases():
    E = get("ext1_poly3")
    A = E.algebra
    wc, te = E.operators["weighted_contraction"], E.operators["theta_euler"]
    assert lie_subalgebra_check(A, wc, 3, te, 3).ok
    T = get("trunc_poly_5")
    assert lie_subalgebra_check(T.algebra, T.operators["euler_sq"], 3,
                                T.operators["euler_cube"], 3).ok


# ---------------------------------------------------------------------------
# the order-2 trace-compatible operator is re-derivable by parameter search


def test_getzler2_found_by_parameter_search():
    T4 = get("trunc_poly_4")
    A = T4.algebra
    found = []
    for d1, d2, d3, s in product(range(-3, 4), repeat=4):
        ent = {}
        for key, v in (((1, 1), d1), ((2, 2), d2), ((3, 3), d3), ((2, 1), s)):
            if v:
                ent[key] = v
        if not ent:
            continue
        D = linop(A.space, ent, 0)
        if not getzler_check(A, D).ok:
            continue
        if min_order(A, D, 2).minimal_order != 2:
            continue
        if D.compose(D).is_zero():
            continue
        found.append((d1, d2, d3, s))
    assert (-2, -1, 3, 1) in found  # the catalog operator
    g2 = T4.operators["getzler2"]
    assert g2.matrix[1][1] == -2 and g2.matrix[2][1] == 1
    # every solution satisfies the conclusions of the order-2 trace theorem
    for d1, d2, d3, s in found:
        ent = {k: v for k, v in
               (((1, 1), d1), ((2, 2), d2), ((3, 3), d3), ((2, 1), s)) if v}
        D = linop(A.space, ent, 0)
        assert trace_order_drop_check(A, D, 2).ok
        assert strong_compat_check(A, commutator(D, D), 3).ok
