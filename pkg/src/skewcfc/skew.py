"""Congruence reduction of skew-symmetric matrices to ``H_2(-1)^m + 0``."""

from __future__ import annotations

from dataclasses import dataclass

from .blocks import h2_power, materialize
from .exact import ZERO, DimensionError, Matrix, congruence, mat_direct_sum, mat_transpose


class NotSkewError(ValueError):
    pass


@dataclass(frozen=True)
class SkewReduction:
    q: Matrix
    m: int

    def canonical(self) -> Matrix:
        n = self.q.rows
        return mat_direct_sum([materialize(h2_power(self.m)), Matrix.zeros(n - 2 * self.m, n - 2 * self.m)])


def is_skew(b: Matrix) -> bool:
    if b.rows != b.cols:
        raise DimensionError(f"skew test needs a square matrix, got {b.rows}x{b.cols}")
    return mat_transpose(b) == -b


def skew_canonicalize(b: Matrix) -> SkewReduction:
    """Find invertible ``q`` with ``q^T b q = H_2(-1)^m + 0``.

    Each round takes the first nonzero entry of the trailing block in
    row-major order, moves it to the leading 2x2 position, scales it to 1 and
    clears the rest of that row/column pair by congruence.
    """
    if not is_skew(b):
        raise NotSkewError("matrix is not skew-symmetric")
    n = b.rows
    w = b.tolist()
    q = Matrix.identity(n).tolist()

    def swap(i: int, j: int) -> None:
        if i == j:
            return
        w[i], w[j] = w[j], w[i]
        for r in w:
            r[i], r[j] = r[j], r[i]
        for r in q:
            r[i], r[j] = r[j], r[i]

    def add(src: int, dst: int, f) -> None:
        # column dst += f * column src, then the same on rows
        for r in w:
            if r[src]:
                r[dst] = r[dst] + f * r[src]
        w[dst] = [x + f * y if y else x for x, y in zip(w[dst], w[src])]
        for r in q:
            if r[src]:
                r[dst] = r[dst] + f * r[src]

    def scale(i: int, f) -> None:
        for r in w:
            r[i] = r[i] * f
        w[i] = [x * f for x in w[i]]
        for r in q:
            r[i] = r[i] * f

    m = 0
    while True:
        e, f = 2 * m, 2 * m + 1
        pivot = next(
            ((i, j) for i in range(e, n) for j in range(e, n) if w[i][j]),
            None,
        )
        if pivot is None:
            break
        i, j = pivot
        swap(e, i)
        # j may have been moved by the first swap
        j = i if j == e else j
        swap(f, j)
        scale(f, w[e][f].inverse())
        for col in range(f + 1, n):
            alpha = -w[e][col]
            if alpha:
                add(f, col, alpha)
            beta = w[f][col]
            if beta:
                add(e, col, beta)
        m += 1

    red = SkewReduction(Matrix.from_rows(q) if n else Matrix.zeros(0, 0), m)
    if congruence(red.q, b) != red.canonical():
        raise ArithmeticError("skew reduction failed its exact check")
    return red
