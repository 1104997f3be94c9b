"""Wire format: canonical rationals, algebra/operator JSON, file round trips."""

import json
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohft.algebra import ConstraintViolation, linop
from cohft.catalog import get
from cohft.serialize import (
    ParseError,
    algebra_from_dict,
    algebra_to_dict,
    dump_algebra,
    format_rational,
    load_algebra,
    operator_from_dict,
    operator_to_dict,
    parse_rational,
)

F = Fraction


# ---------------------------------------------------------------------------
# rational strings


@pytest.mark.parametrize("s,val", [
    ("0", F(0)),
    ("7", F(7)),
    ("-3", F(-3)),
    ("1/2", F(1, 2)),
    ("-22/7", F(-22, 7)),
    ("1/24", F(1, 24)),
])
def test_parse_rational_accepts(s, val):
    assert parse_rational(s) == val
    assert format_rational(val) == s


@pytest.mark.parametrize("s", [
    "2/4",       # not lowest terms
    "0/1",       # zero must be bare
    "1/-2",      # negative denominator
    "-1/-2",
    "1/0",
    "+3",
    "007",
    "1.5",
    " 1",
    "1 ",
    "",
    "1/2/3",
])
def test_parse_rational_rejects(s):
    with pytest.raises(ParseError):
        parse_rational(s)


def test_parse_rational_rejects_non_strings():
    for bad in (1, 1.5, None, ["1"]):
        with pytest.raises(ParseError):
            parse_rational(bad)


@settings(max_examples=300, deadline=None)
@given(st.fractions(min_value=-10**9, max_value=10**9, max_denominator=10**6))
def test_rational_round_trip(x):
    assert parse_rational(format_rational(x)) == x


# ---------------------------------------------------------------------------
# algebra dictionaries


@pytest.mark.parametrize("name", ["trunc_poly_3", "exterior_2", "ext1_poly3",
                                  "odd_dual", "ext2_poly2"])
def test_algebra_dict_round_trip(name):
    E = get(name)
    d = algebra_to_dict(E.algebra, E.operators)
    B, ops = algebra_from_dict(d)
    assert B.space.degrees == E.algebra.space.degrees
    assert B.c == E.algebra.c
    assert set(ops) == set(E.operators)
    for key, op in ops.items():
        assert op.matrix == E.operators[key].matrix
        assert op.degree == E.operators[key].degree
    # emitted JSON is stable under a parse/emit cycle
    assert algebra_to_dict(B, ops) == d


def test_algebra_dict_is_json_clean():
    E = get("ext1_poly2")
    text = json.dumps(algebra_to_dict(E.algebra, E.operators))
    B, ops = algebra_from_dict(json.loads(text))
    assert B.c == E.algebra.c


@pytest.mark.parametrize("mangle,msg_part", [
    (lambda d: d.pop("dim"), "dim"),
    (lambda d: d.update(dim="3"), "positive integer"),
    (lambda d: d.update(degrees=[0]), "dim integers"),
    (lambda d: d["mult"].append([0, 0, 0, "1"]), "duplicate"),
    (lambda d: d["mult"].append([0, 0, 9, "1"]), "outside 0..2"),
    (lambda d: d["mult"].append({"i": 0}), "must be [i, j, k, coeff]"),
    (lambda d: d["mult"].append([1, 1, 1, "2/4"]), "lowest terms"),
    (lambda d: d.update(operators=[]), "object"),
    (lambda d: d["operators"].update(bad={"degree": 0}), "matrix"),
])
def test_algebra_from_dict_schema_errors(mangle, msg_part):
    d = algebra_to_dict(get("trunc_poly_3").algebra,
                        get("trunc_poly_3").operators)
    mangle(d)
    with pytest.raises(ParseError) as err:
        algebra_from_dict(d)
    assert msg_part in str(err.value)


def test_algebra_from_dict_propagates_constraint_failures():
    d = {"dim": 2, "degrees": [0, 0],
         "mult": [[0, 0, 0, "1"], [0, 1, 1, "1"]],  # missing (1,0,1): not commutative
         "operators": {}}
    with pytest.raises(ConstraintViolation):
        algebra_from_dict(d)


# ---------------------------------------------------------------------------
# operators, square and rectangular


def test_operator_round_trip():
    E = get("exterior_2")
    op = E.operators["bv_laplacian"]
    d = operator_to_dict(op)
    back = operator_from_dict(d, space=E.algebra.space)
    assert back.degree == op.degree
    assert back.matrix == op.matrix


def test_operator_from_dict_rejects_degree_mismatch():
    E = get("exterior_2")
    bad = operator_to_dict(E.operators["d_theta1"])
    bad["degree"] = 0
    with pytest.raises(ConstraintViolation):
        operator_from_dict(bad, space=E.algebra.space)


def test_operator_from_dict_rectangular():
    d = {"degree": 0, "matrix": [["1", "0", "0"], ["0", "0", "1"]]}
    m, deg = operator_from_dict(d, rows=2, cols=3)
    assert deg == 0
    assert m == ((F(1), F(0), F(0)), (F(0), F(0), F(1)))
    with pytest.raises(ParseError):
        operator_from_dict(d, rows=3, cols=3)


# ---------------------------------------------------------------------------
# files


def test_file_round_trip(tmp_path):
    E = get("ext1_poly3")
    path = tmp_path / "alg.json"
    dump_algebra(path, E.algebra, E.operators)
    B, ops = load_algebra(path)
    assert B.c == E.algebra.c
    assert ops["theta_euler"].matrix == E.operators["theta_euler"].matrix


def test_load_algebra_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_algebra(path)


def test_load_algebra_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_algebra(tmp_path / "nope.json")
