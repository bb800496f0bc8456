from __future__ import annotations

import random

import pytest

import oracle
from skewcfc.blocks import h2_power, materialize
from skewcfc.exact import I, DimensionError, Matrix, congruence, mat_rank
from skewcfc.skew import NotSkewError, is_skew, skew_canonicalize


def _random_skew(rng: random.Random, n: int) -> Matrix:
    pool = (0, 0, 1, -1, 2, -2, I, -I)
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = rng.choice(pool)
            rows[i][j], rows[j][i] = v, -v
    return Matrix.from_rows(rows) if n else Matrix.zeros(0, 0)


def test_is_skew():
    assert is_skew(materialize(h2_power(1)))
    assert not is_skew(Matrix.from_rows([[1]]))
    assert is_skew(Matrix.zeros(3, 3))
    with pytest.raises(DimensionError):
        is_skew(Matrix.zeros(2, 3))


def test_zero_and_canonical_inputs():
    red = skew_canonicalize(Matrix.zeros(4, 4))
    assert red.m == 0 and red.q == Matrix.identity(4)
    h = materialize(h2_power(2))
    red = skew_canonicalize(h)
    assert red.m == 2 and red.q == Matrix.identity(4)


def test_worked_example():
    b = Matrix.from_rows([[0, 2, 0], [-2, 0, 1], [0, -1, 0]])
    red = skew_canonicalize(b)
    assert red.m == 1
    assert congruence(red.q, b) == red.canonical()
    # independent check of the same identity
    q = oracle.to_sympy(red.q)
    assert q.T * oracle.to_sympy(b) * q == oracle.to_sympy(red.canonical())
    assert q.det() != 0


def test_rejects_non_skew():
    with pytest.raises(NotSkewError):
        skew_canonicalize(Matrix.from_rows([[0, 1], [1, 0]]))


def test_random_reductions():
    rng = random.Random(31)
    for _ in range(200):
        b = _random_skew(rng, rng.randint(0, 10))
        red = skew_canonicalize(b)
        rank = mat_rank(b)
        assert rank % 2 == 0 and 2 * red.m == rank
        assert congruence(red.q, b) == red.canonical()
        assert mat_rank(red.q) == b.rows
        # canonicalizing the canonical form keeps m
        assert skew_canonicalize(red.canonical()).m == red.m
