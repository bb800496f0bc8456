from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracle
from specgen import random_spec
from skewcfc.blocks import (
    H2M1,
    BlockKind,
    CfcSpec,
    G,
    H,
    InvalidBlockError,
    J,
    SpecParseError,
    census,
    format_spec,
    gamma_block,
    materialize,
    normalize_mu,
    parse_spec,
    rank_a_plus_at_formula,
    rho,
    strip_j1,
    validate,
)
from skewcfc.exact import Matrix, congruence, gq, mat_rank
from skewcfc.rules import block_permutation_matrix


def test_block_validation():
    with pytest.raises(InvalidBlockError):
        H(2, 1)
    with pytest.raises(InvalidBlockError):
        H(4, -1)
    with pytest.raises(InvalidBlockError):
        H(4, 0)
    with pytest.raises(InvalidBlockError):
        H(3, 2)
    with pytest.raises(InvalidBlockError):
        J(0)
    assert H(2, -1) == H2M1 and H(4, 1).mu == 1


def test_normalize_mu():
    assert normalize_mu(gq("1/2")) == 2
    assert normalize_mu(gq(3)) == 3
    assert normalize_mu(gq("1/2+1/2i")) == gq("1-i")
    # unit circle: the representative with nonnegative imaginary part
    assert normalize_mu(gq("-i")) == gq("i")
    assert normalize_mu(gq("3/5-4/5i")) == gq("3/5+4/5i")
    assert validate(parse_spec("H2(1/2) + J3")) == parse_spec("H2(2) + J3")


@pytest.mark.parametrize("text, counts, n", [
    ("J1 + J3 + G2 + H2(-1)", dict(j1=1, jO=1, gE=1, h2OMinus=1), 8),
    ("", {}, 0),
    ("H6(2)", dict(h2=1), 6),
    ("H4(1) + G3 + J4", dict(h2EPlus=1, gO=1, jE=1), 11),
])
def test_census(text, counts, n):
    d = census(parse_spec(text)).as_dict()
    assert d.pop("n") == n
    assert d == {k: counts.get(k, 0) for k in d}


def test_census_partitions_blocks():
    rng = random.Random(21)
    for _ in range(100):
        s = random_spec(rng, max_blocks=8)
        c = census(s)
        kinds = [b.kind for b in s.blocks]
        assert c.j1 + c.j_odd + c.j_even == kinds.count(BlockKind.TYPE0)
        assert c.g_even + c.g_odd == kinds.count(BlockKind.TYPE1)
        assert c.h2 + c.h2_even_plus + c.h2_odd_minus == kinds.count(BlockKind.TYPE2)


@pytest.mark.parametrize("text, value", [
    ("G3", "3/4"), ("H4(1)", "1"), ("G2*4", "3"), ("J1*5", "0"),
    ("J5 + J6", "3"), ("H6(2) + H6(3)", "3"), ("J5 + G4 + H6(2)", "17/4"),
])
def test_rho_examples(text, value):
    assert str(rho(parse_spec(text))) == value


def test_rho_per_block_for_other_mu():
    for k in range(1, 7):
        assert Fraction(rho(CfcSpec.of(H(2 * k, gq("3+i")))).quarters, 4) == Fraction(k, 2)


def test_materialize_examples():
    assert materialize(CfcSpec.of(G(1))) == Matrix.from_rows([[1]])
    assert materialize(CfcSpec.of(H2M1)) == Matrix.from_rows([[0, 1], [-1, 0]])
    assert materialize(CfcSpec.of()) == Matrix.zeros(0, 0)


def test_gamma_orientation():
    assert gamma_block(2) == Matrix.from_rows([[0, -1], [1, 1]])
    assert gamma_block(3) == Matrix.from_rows([[0, 0, 1], [0, -1, -1], [1, 1, 0]])
    assert gamma_block(4) == Matrix.from_rows([[0, 0, 0, -1], [0, 0, 1, 1], [0, -1, -1, 0], [1, 1, 0, 0]])
    for k in range(1, 13):
        g = gamma_block(k)
        assert oracle.to_sympy(g) == oracle.gamma(k)
        assert mat_rank(g + g.T) == (k if k % 2 else k - 1)


def test_materialize_matches_oracle():
    rng = random.Random(22)
    for _ in range(40):
        s = random_spec(rng, max_blocks=4, max_size=8)
        assert oracle.to_sympy(materialize(s)) == oracle.spec(s)


@pytest.mark.parametrize("text, rank", [("G4", 3), ("H6(-1)", 4), ("J1", 0), ("J3", 2), ("H8(1)", 8)])
def test_rank_formula_examples(text, rank):
    s = parse_spec(text)
    a = materialize(s)
    assert rank_a_plus_at_formula(s) == rank == mat_rank(a + a.T)


def test_rank_identity_with_j1():
    rng = random.Random(23)
    for _ in range(60):
        s = random_spec(rng, max_blocks=5, max_size=8)
        c = census(s)
        a = materialize(s)
        assert c.n - mat_rank(a + a.T) == c.j1 + c.j_odd + c.g_even + 2 * c.h2_odd_minus


def test_materialize_respects_permutation():
    rng = random.Random(24)
    for _ in range(30):
        s = random_spec(rng, max_blocks=4, max_size=6)
        sigma = list(range(len(s)))
        rng.shuffle(sigma)
        permuted = CfcSpec(tuple(s.blocks[i] for i in sigma))
        p = block_permutation_matrix(s, sigma)
        assert congruence(p, materialize(s)) == materialize(permuted)


def test_strip_j1():
    assert strip_j1(parse_spec("J1*3 + G3")) == (parse_spec("G3"), 3)
    s = parse_spec("J2 + G3")
    assert strip_j1(s) == (s, 0)
    rng = random.Random(25)
    for _ in range(100):
        s = random_spec(rng)
        assert rho(strip_j1(s)[0]) == rho(s)


def test_additivity():
    rng = random.Random(26)
    for _ in range(100):
        a, b = random_spec(rng), random_spec(rng)
        assert rho(a + b) == rho(a) + rho(b)


# -- DSL ------------------------------------------------------------------------------

def test_parse_examples():
    assert parse_spec("J3 + J2*2") == CfcSpec.of(J(3), J(2), J(2))
    assert parse_spec("G4*2 + H6(2)") == CfcSpec.of(G(4), G(4), H(6, 2))
    assert parse_spec("H4(1/2+3/4i)") == CfcSpec.of(H(4, gq("1/2+3/4i")))
    assert parse_spec("  J 3+G2 * 2 ") == CfcSpec.of(J(3), G(2), G(2))
    assert parse_spec("") == CfcSpec.of()


@pytest.mark.parametrize("text, pos", [
    ("J3 + X2", 5), ("J", 1), ("J3 G2", 3), ("H2(1", 2), ("J3*", 3), ("H2(1)", 0), ("J3 +", 4),
])
def test_parse_errors(text, pos):
    with pytest.raises(SpecParseError) as info:
        parse_spec(text)
    assert info.value.position == pos


def test_format_round_trip():
    rng = random.Random(27)
    for _ in range(100):
        s = random_spec(rng, max_blocks=6)
        assert parse_spec(format_spec(s)) == s
    assert format_spec(parse_spec("J2 + J2 + G3 + J2")) == "J2*2 + G3 + J2"


@given(st.lists(st.tuples(st.sampled_from("JG"), st.integers(1, 20), st.integers(1, 3)), max_size=5))
def test_parse_format_property(terms):
    text = " + ".join(f"{k}{s}*{c}" for k, s, c in terms)
    s = parse_spec(text)
    assert len(s) == sum(c for *_, c in terms)
    assert parse_spec(format_spec(s)) == s


def test_spec_sequence_behaviour():
    s = parse_spec("J3 + G2 + H4(2)")
    assert s.size == 9 and len(s) == 3
    assert s[1:] == parse_spec("G2 + H4(2)")
    assert s.offsets() == [0, 3, 5]
    assert (s * 2)[3] == J(3)
    assert str(s) == "J3 + G2 + H4(2)"
