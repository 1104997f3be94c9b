"""Graded linear algebra layer: spaces, operators, products, signs."""

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohft.algebra import (
    ConstraintViolation,
    DimensionMismatch,
    GradedVectorSpace,
    LinOp,
    MultiLinearMap,
    PreconditionViolation,
    apply_sparse,
    check_linop,
    commutator,
    degree_of,
    homogeneous_components,
    identity_op,
    linop,
    make_algebra,
    mult_op,
    multiply,
    product_map,
    random_linop,
    sort_sign,
    str_mult_vec,
    supertrace,
    unshuffle_sign,
    vec,
    zero_op,
)
from cohft.catalog import exterior, get, trunc_poly

F = Fraction


# ---------------------------------------------------------------------------
# spaces


def test_space_rejects_empty():
    with pytest.raises(DimensionMismatch):
        GradedVectorSpace(())


def test_space_basics():
    V = GradedVectorSpace((0, 1, -2))
    assert V.dim == 3
    assert V.parities == (0, 1, 0)
    assert V.parity(1) == 1
    assert V.basis_vector(2) == (F(0), F(0), F(1))


def test_homogeneous_components_and_degree():
    V = GradedVectorSpace((0, 0, 1))
    comps = homogeneous_components(V, (F(2), F(0), F(3)))
    assert comps == [(0, (F(2), F(0), F(0))), (1, (F(0), F(0), F(3)))]
    assert degree_of(V, (F(0), F(5), F(0))) == 0
    assert degree_of(V, V.zero_vector()) is None
    with pytest.raises(PreconditionViolation):
        degree_of(V, (F(1), F(0), F(1)))


# ---------------------------------------------------------------------------
# constructor validation


def _mult_table(dim, entries):
    t = [[[F(0)] * dim for _ in range(dim)] for _ in range(dim)]
    for (i, j, k), v in entries.items():
        t[i][j][k] = F(v)
    return t


def test_make_algebra_degree_violation():
    V = GradedVectorSpace((0, 1))
    # 1*1 = theta breaks degree additivity
    with pytest.raises(ConstraintViolation) as err:
        make_algebra(V, _mult_table(2, {(0, 0, 1): 1}))
    assert err.value.kind == "degree"
    assert err.value.witness == (0, 0, 1)


def test_make_algebra_commutativity_violation():
    V = GradedVectorSpace((0, 0))
    with pytest.raises(ConstraintViolation) as err:
        make_algebra(V, _mult_table(2, {(0, 0, 0): 1, (0, 1, 1): 1, (1, 1, 1): 1}))
    assert err.value.kind == "commutativity"


def test_make_algebra_sign_rule_for_odd_squares():
    # an odd generator with th*th != 0 contradicts graded commutativity
    V = GradedVectorSpace((0, 1, 2))
    with pytest.raises(ConstraintViolation) as err:
        make_algebra(
            V, _mult_table(3, {(0, 0, 0): 1, (0, 1, 1): 1, (1, 0, 1): 1,
                               (0, 2, 2): 1, (2, 0, 2): 1, (1, 1, 2): 1}))
    assert err.value.kind == "commutativity"
    assert err.value.witness == (1, 1, 2)


def test_make_algebra_associativity_violation():
    V = GradedVectorSpace((0, 0))
    # e0 e0 = e1, e0 e1 = e0, e1 e1 = 0: (e0 e0) e1 = 0 but e0 (e0 e1) = e1
    with pytest.raises(ConstraintViolation) as err:
        make_algebra(V, _mult_table(2, {(0, 0, 1): 1, (0, 1, 0): 1,
                                        (1, 0, 0): 1}))
    assert err.value.kind == "associativity"


def test_catalog_algebras_revalidate():
    for name in ("trunc_poly_4", "exterior_2", "ext1_poly3", "odd_dual"):
        A = get(name).algebra
        B = make_algebra(A.space, A.c)
        assert B.c == A.c


# ---------------------------------------------------------------------------
# operators


def test_linop_degree_constraint():
    V = GradedVectorSpace((0, 1))
    op = linop(V, {(0, 1): 1}, -1)  # th -> 1 is fine at degree -1
    assert op.matrix[0][1] == 1
    with pytest.raises(ConstraintViolation):
        linop(V, {(0, 1): 1}, 0)  # same entry mislabelled as degree 0
    with pytest.raises(DimensionMismatch):
        check_linop(V, zero_op(3, 0))


def test_linop_square_only():
    with pytest.raises(DimensionMismatch):
        LinOp(((F(0), F(1)),), 0)


def test_apply_matches_apply_sparse():
    rng = random.Random(3)
    A = get("exterior_2").algebra
    for _ in range(25):
        deg = rng.choice((-2, -1, 0, 1, 2))
        D = random_linop(A.space, deg, rng)
        v = {j: F(rng.randint(-4, 4)) for j in rng.sample(range(A.dim), 2)}
        dense = [F(0)] * A.dim
        for j, x in v.items():
            dense[j] = x
        out = D.apply(tuple(dense))
        sparse = apply_sparse(D, {j: x for j, x in v.items() if x})
        assert list(out) == [sparse.get(i, F(0)) for i in range(A.dim)]


def test_sparse_columns_match_matrix():
    rng = random.Random(5)
    D = random_linop(get("ext1_poly3").algebra.space, 0, rng, density=0.4)
    cols = D.sparse_columns()
    for j in range(D.dim):
        assert cols[j] == {i: D.matrix[i][j] for i in range(D.dim) if D.matrix[i][j]}


def test_commutator_degree_and_odd_square():
    E = get("exterior_2")
    d1 = E.operators["d_theta1"]
    t1 = E.operators["theta1_mult"]
    c = commutator(d1, t1)
    assert c.degree == 0
    # odd D: [D, D] = 2 D^2
    dd = commutator(d1, d1)
    assert dd.matrix == d1.compose(d1).scale(2).matrix


def test_commutator_jacobi():
    # graded Jacobi: [a,[b,c]] = [[a,b],c] + (-1)^{|a||b|} [b,[a,c]]
    rng = random.Random(11)
    A = get("exterior_2").algebra
    for _ in range(40):
        da, db, dc = (rng.choice((-1, 0, 1)) for _ in range(3))
        a = random_linop(A.space, da, rng)
        b = random_linop(A.space, db, rng)
        c = random_linop(A.space, dc, rng)
        lhs = commutator(a, commutator(b, c))
        rhs = commutator(commutator(a, b), c)
        inner = commutator(b, commutator(a, c))
        if a.parity and b.parity:
            inner = inner.scale(-1)
        assert lhs.matrix == rhs.add(inner).matrix


def test_supertrace_of_commutator_vanishes():
    rng = random.Random(17)
    for name in ("trunc_poly_4", "exterior_2", "ext1_poly3", "odd_dual"):
        A = get(name).algebra
        degs = sorted(set(A.space.degrees))
        for _ in range(100):
            da = rng.choice(degs) - rng.choice(degs)
            db = -da if rng.random() < 0.5 else rng.choice(degs) - rng.choice(degs)
            a = random_linop(A.space, da, rng)
            b = random_linop(A.space, db, rng)
            assert supertrace(A.space, commutator(a, b)) == 0


def test_supertrace_known_values():
    V = GradedVectorSpace((0, 1, 1, 2))
    assert supertrace(V, identity_op(4)) == 0  # 1 - 2 + 1
    W = GradedVectorSpace((0, 0, 0))
    assert supertrace(W, identity_op(3)) == 3
    # homogeneous operators of nonzero degree have zero diagonal
    E = get("exterior_2")
    assert supertrace(V, E.operators["d_theta1"]) == 0


# ---------------------------------------------------------------------------
# products


def test_multiply_trunc_poly():
    A = trunc_poly(4)
    x = A.space.basis_vector(1)
    x2 = multiply(A, x, x)
    assert x2 == A.space.basis_vector(2)
    x3 = multiply(A, x2, x)
    assert multiply(A, x3, x) == A.space.zero_vector()  # x^4 = 0


def test_basis_product_signs():
    A = exterior(2)  # basis 1, th1, th2, th1 th2
    assert A.basis_product((1, 2)) == {3: F(1)}
    assert A.basis_product((2, 1)) == {3: F(-1)}
    assert A.basis_product((1, 1)) == {}
    with pytest.raises(PreconditionViolation):
        A.basis_product(())


def test_mult_op_is_morphism():
    # mult_op(f g) = mult_op(f) o mult_op(g) on homogeneous vectors
    rng = random.Random(23)
    A = get("trunc_poly_5").algebra
    for _ in range(20):
        f = vec(rng.randint(-3, 3) for _ in range(A.dim))
        g = vec(rng.randint(-3, 3) for _ in range(A.dim))
        lhs = mult_op(A, multiply(A, f, g))
        rhs = mult_op(A, f).compose(mult_op(A, g))
        assert lhs.matrix == rhs.matrix


def test_mult_op_requires_homogeneous():
    A = get("exterior_2").algebra
    with pytest.raises(PreconditionViolation):
        mult_op(A, vec([1, 1, 0, 0]))  # 1 + th1 is mixed


def test_str_mult_vec_linearity():
    A = get("trunc_poly_3").algebra
    assert str_mult_vec(A, {0: F(2)}) == 6  # 2 * str(id) on dim 3
    assert str_mult_vec(A, {1: F(1)}) == 0  # x-multiplication is nilpotent


def test_product_map_agrees_with_basis_product():
    A = exterior(2)
    m = product_map(A, 2)
    for i in range(A.dim):
        for j in range(A.dim):
            got = m.value((i, j))
            assert got == A.basis_product((i, j))


# ---------------------------------------------------------------------------
# signs


def test_sort_sign_examples():
    assert sort_sign((0, 1, 1), (2, 1)) == ((1, 2), -1)
    assert sort_sign((0, 1, 1), (2, 0)) == ((0, 2), 1)
    assert sort_sign((1, 1, 1), (2, 1, 0)) == ((0, 1, 2), -1)


def test_unshuffle_sign_examples():
    # pulling slot 1 (odd) past slot 0 (odd) gives a sign
    assert unshuffle_sign((1, 1), (1,)) == -1
    assert unshuffle_sign((0, 1), (1,)) == 1
    assert unshuffle_sign((1, 1, 1), (1, 2)) == 1  # two crossings


def test_unshuffle_matches_brute_inversions():
    rng = random.Random(31)
    for _ in range(60):
        n = rng.randint(1, 6)
        pars = [rng.randint(0, 1) for _ in range(n)]
        k = rng.randint(1, n)
        pos = sorted(rng.sample(range(n), k))
        sign = unshuffle_sign(pars, pos)
        crossings = sum(
            1
            for p in pos
            for q in range(p)
            if q not in pos and pars[p] and pars[q]
        )
        assert sign == (-1) ** crossings


# ---------------------------------------------------------------------------
# rationals stay exact


@settings(max_examples=200, deadline=None)
@given(
    st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**4),
    st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**4),
)
def test_fraction_arithmetic_is_exact(a, b):
    assert a + b - b == a
    if b:
        assert (a / b) * b == a
    assert (a + b) * (a - b) == a * a - b * b


# ---------------------------------------------------------------------------
# multilinear maps


def test_multilinear_map_rule_and_eval():
    A = exterior(2)
    m = MultiLinearMap(2, A.dim, rule=lambda t: A.basis_product(t))
    v = m.evaluate_vectors([vec([0, 1, 0, 0]), vec([0, 0, 2, 0])])
    assert list(v) == [F(0), F(0), F(0), F(2)]
    with pytest.raises(DimensionMismatch):
        m.value((0, 1, 2))


def test_multilinear_scalar_mode():
    m = MultiLinearMap(1, 3, scalar=True, rule=lambda t: F(t[0]))
    assert m.value((2,)) == F(2)
    assert m.evaluate_vectors([vec([1, 1, 1])]) == F(3)
