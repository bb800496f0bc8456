"""Independent sympy reference used only by the tests."""

from __future__ import annotations

import sympy as sp
from sympy.polys.domains import QQ_I
from sympy.polys.matrices import DomainMatrix

from skewcfc.blocks import Block, BlockKind, CfcSpec
from skewcfc.exact import GaussianRational, Matrix


def sym_scalar(x) -> sp.Expr:
    g = x if isinstance(x, GaussianRational) else GaussianRational(x)
    return sp.Rational(g.re.numerator, g.re.denominator) + sp.I * sp.Rational(g.im.numerator, g.im.denominator)


def to_sympy(m: Matrix) -> sp.Matrix:
    return sp.Matrix(m.rows, m.cols, [sym_scalar(x) for x in m.entries])


def jordan(k: int, lam=0) -> sp.Matrix:
    out = sp.zeros(k, k)
    for i in range(k):
        out[i, i] = lam
        if i + 1 < k:
            out[i, i + 1] = 1
    return out


def gamma(k: int) -> sp.Matrix:
    # alternating anti-diagonal band: row i carries (-1)^(k-i) at columns k+1-i and k+2-i (1-based)
    out = sp.zeros(k, k)
    for i in range(1, k + 1):
        v = (-1) ** (k - i)
        out[i - 1, k - i] = v
        if i >= 2:
            out[i - 1, k + 1 - i] = v
    return out


def hblock(size: int, mu) -> sp.Matrix:
    k = size // 2
    out = sp.zeros(size, size)
    out[:k, k:] = sp.eye(k)
    out[k:, :k] = jordan(k, sym_scalar(mu))
    return out


def block(b: Block) -> sp.Matrix:
    if b.kind is BlockKind.TYPE0:
        return jordan(b.size)
    if b.kind is BlockKind.TYPE1:
        return gamma(b.size)
    return hblock(b.size, b.mu)


def spec(s: CfcSpec) -> sp.Matrix:
    if not len(s):
        return sp.zeros(0, 0)
    return sp.diag(*[block(b) for b in s.blocks])


def congruent(x: sp.Matrix, a: sp.Matrix, b: sp.Matrix) -> bool:
    if x.rows == 0 or x.cols == 0:
        return b == sp.zeros(x.cols, x.cols)
    return (x.T * a * x).applyfunc(sp.expand) == b


def rank(m: sp.Matrix) -> int:
    if not (m.rows and m.cols):
        return 0
    return DomainMatrix.from_Matrix(m).convert_to(QQ_I).rank()
