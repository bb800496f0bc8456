"""Witnessed consistency relations ``lhs ~X~> rhs`` meaning ``X^T lhs X = rhs``.

Every :class:`Rule` checks its witness exactly when it is constructed, so a
rule that exists is a proof.  The generators below produce the fixed
reductions the planner chains together; the combinators implement the
structural laws (direct sums, composition, reordering, dropping summands).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

from .blocks import (
    H2M1,
    Block,
    BlockKind,
    CfcSpec,
    G,
    H,
    InvalidBlockError,
    J,
    h2_power,
    materialize,
)
from .exact import (
    I,
    ONE,
    ZERO,
    GaussianRational,
    Matrix,
    congruence,
    gq,
    mat_direct_sum,
    mat_from_permutation,
    mat_mul,
)


class RuleError(ValueError):
    """Parameters outside a rule's hypotheses, or an ill-formed combination."""


class WitnessError(ArithmeticError):
    """A witness failed its exact check."""


ELIMINATION = "elimination"


@dataclass(frozen=True, eq=False)
class Rule:
    lhs: CfcSpec
    rhs: CfcSpec
    witness: Matrix
    law: str
    ref: str

    def __post_init__(self):
        if self.witness.shape != (self.lhs.size, self.rhs.size):
            raise WitnessError(
                f"witness shape {self.witness.shape} does not match "
                f"{self.lhs.size}x{self.rhs.size} for {self.ref}"
            )
        if congruence(self.witness, materialize(self.lhs)) != materialize(self.rhs):
            raise WitnessError(f"witness does not verify: {self.lhs} -> {self.rhs} ({self.ref})")

    def __str__(self) -> str:
        return f"{self.lhs or '()'}  ~>  {self.rhs or '()'}    [{self.law}: {self.ref}]"


def _m(rows) -> Matrix:
    return Matrix.from_rows(rows)


def _sparse(rows: int, cols: int, entries: dict[tuple[int, int], object]) -> Matrix:
    table = [[ZERO] * cols for _ in range(rows)]
    for (i, j), v in entries.items():
        table[i][j] = gq(v)
    return Matrix._wrap(rows, cols, table)


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise RuleError(msg)


def _blocks(*parts) -> CfcSpec:
    return CfcSpec.of(*parts)


# -- Type-0 -----------------------------------------------------------------

def j_shorten(k: int) -> Rule:
    """``J_2k(0) -> J_{2k-1}(0)`` dropping the first coordinate."""
    _need(k >= 1, "J shorten needs k >= 1")
    x = _sparse(2 * k, 2 * k - 1, {(c + 1, c): 1 for c in range(2 * k - 1)})
    return Rule(_blocks(J(2 * k)), _blocks(J(2 * k - 1)), x, "type0", f"J{2 * k} -> J{2 * k - 1}")


def j_split(k: int) -> Rule:
    """``J_{k+4}(0) -> J_k(0) + J_3(0)``."""
    _need(k >= 1, "J split needs k >= 1")
    entries = {(c, c): 1 for c in range(k)}
    entries.update({(k + 1 + c, k + c): 1 for c in range(3)})
    x = _sparse(k + 4, k + 3, entries)
    return Rule(_blocks(J(k + 4)), _blocks(J(k), J(3)), x, "type0", f"J{k + 4} -> J{k} + J3")


def j2_pair() -> Rule:
    x = _m([[1, 0], [0, 1], [0, 1], [-1, 0]])
    return Rule(_blocks(J(2), J(2)), h2_power(1), x, "type0", "J2 + J2 -> H2(-1)")


def j3_to_h() -> Rule:
    x = _m([[1, 0], [0, 1], [-1, 0]])
    return Rule(_blocks(J(3)), h2_power(1), x, "type0", "J3 -> H2(-1)")


def j5_to_h_j2() -> Rule:
    x = _m([
        [0, 1, 1, 0],
        [0, 0, 0, 1],
        [0, -1, 0, 0],
        [1, 0, 0, 1],
        [0, 1, 0, 0],
    ])
    return Rule(_blocks(J(5)), _blocks(H2M1, J(2)), x, "type0", "J5 -> H2(-1) + J2")


TYPE0_RULES: dict[str, Callable[..., Rule]] = {
    "shorten": j_shorten,
    "split": j_split,
    "pair": j2_pair,
    "j3": j3_to_h,
    "j5": j5_to_h_j2,
}


def type0_rules(selector: str, *params) -> Rule:
    try:
        gen = TYPE0_RULES[selector]
    except KeyError:
        raise RuleError(f"unknown Type-0 rule {selector!r}") from None
    return gen(*params)


# -- Type-II ----------------------------------------------------------------

def _hblock(size: int, mu) -> Block:
    try:
        return H(size, mu)
    except InvalidBlockError as exc:
        raise RuleError(str(exc)) from None


def h_peel(k: int, mu) -> Rule:
    """``H_{2k+4}(mu) -> H_2(-1) + H_2k(mu)``; for ``k = 0`` the trailing block is empty."""
    _need(k >= 0, "H peel needs k >= 0")
    mu = gq(mu)
    lhs = _blocks(_hblock(2 * k + 4, mu))
    rhs = _blocks(H2M1, [_hblock(2 * k, mu)] if k else [])
    entries = {(0, 0): 1, (1, 0): -1 - mu, (k + 2, 1): 1}
    entries.update({(2 + c, 2 + c): 1 for c in range(k)})
    entries.update({(k + 4 + c, k + 2 + c): 1 for c in range(k)})
    x = _sparse(2 * k + 4, 2 * k + 2, entries)
    return Rule(lhs, rhs, x, "type2", f"H{2 * k + 4}(mu) -> H2(-1) + H{2 * k}(mu)")


def h_peel_factored(k: int, mu) -> Matrix:
    """The peel witness assembled as a product ``Y Z P`` of elementary factors.

    Kept separate from :func:`h_peel` so the two constructions can be
    checked against each other.
    """
    mu = gq(mu)
    n = 2 * k + 4
    y = Matrix.identity(n).tolist()
    y[1][0] = -1 - mu
    keep = [c for c in range(n) if c not in (1, k + 3)]
    z = Matrix.identity(n).submatrix(range(n), keep)
    # cyclic permutation (2 3 ... k+2) on the first k+2 coordinates (1-based)
    perm = [0] + [k + 1] + list(range(1, k + 1)) + list(range(k + 2, 2 * k + 2))
    p = mat_from_permutation(perm)
    return mat_mul(mat_mul(Matrix.from_rows(y), z), p)


def h_cross_pair(mu, nu) -> Rule:
    mu, nu = gq(mu), gq(nu)
    _need(mu != nu, "cross pair needs mu != nu")
    _need(mu != -1 and nu != -1, "cross pair needs mu, nu != -1")
    x = _m([[1, 0], [0, (nu + 1) / (nu - mu)], [1, 0], [0, (mu + 1) / (mu - nu)]])
    return Rule(_blocks(_hblock(2, mu), _hblock(2, nu)), h2_power(1), x, "type2",
                "H2(mu) + H2(nu) -> H2(-1)")


def h_self_pair(mu) -> Rule:
    mu = gq(mu)
    _need(mu != 1 and mu != -1, "self pair needs mu != +-1")
    x = _m([[0, 1], [1 / (mu - 1), 0], [1, 0], [0, 1 / (1 - mu)]])
    return Rule(_blocks(_hblock(2, mu), _hblock(2, mu)), h2_power(1), x, "type2",
                "H2(mu) + H2(mu) -> H2(-1)")


def h_absorb_j2(mu) -> Rule:
    mu = gq(mu)
    # 1/mu appears in the witness, so mu = 0 is excluded on top of mu = -1
    _need(mu != -1 and mu != 0, "H2(mu) + J2 needs mu != -1, 0")
    x = _m([[1, 0], [0, -1 / mu], [1, 0], [0, (mu + 1) / mu]])
    return Rule(_blocks(_hblock(2, mu), J(2)), h2_power(1), x, "type2", "H2(mu) + J2 -> H2(-1)")


TYPE2_RULES: dict[str, Callable[..., Rule]] = {
    "peel": h_peel,
    "cross_pair": h_cross_pair,
    "self_pair": h_self_pair,
    "absorb_j2": h_absorb_j2,
}


def typeII_rules(selector: str, *params) -> Rule:
    try:
        gen = TYPE2_RULES[selector]
    except KeyError:
        raise RuleError(f"unknown Type-II rule {selector!r}") from None
    return gen(*params)


# -- Type-I -----------------------------------------------------------------

def g_shorten(k: int) -> Rule:
    """``Gamma_{2k+1} -> Gamma_2k`` with witness ``i [e_{2k+1} ... e_2]``."""
    _need(k >= 1, "Gamma shorten needs k >= 1")
    x = _sparse(2 * k + 1, 2 * k, {(2 * k - c, c): I for c in range(2 * k)})
    return Rule(_blocks(G(2 * k + 1)), _blocks(G(2 * k)), x, "type1", f"G{2 * k + 1} -> G{2 * k}")


def g_peel(k: int) -> Rule:
    """``Gamma_{2k+4} -> H_2(-1) + Gamma_2k`` for ``k >= 1``."""
    _need(k >= 1, "Gamma peel needs k >= 1")
    entries = {(0, 0): -1, (2 * k + 3, 1): 1}
    entries.update({(2 + c, 2 + c): 1 for c in range(2 * k)})
    x = _sparse(2 * k + 4, 2 * k + 2, entries)
    return Rule(_blocks(G(2 * k + 4)), _blocks(H2M1, G(2 * k)), x, "type1",
                f"G{2 * k + 4} -> H2(-1) + G{2 * k}")


def g4_to_h_g1() -> Rule:
    x = _m([[I, 0, 0], [0, 0, 0], [0, 0, I], [0, I, 0]])
    return Rule(_blocks(G(4)), _blocks(H2M1, G(1)), x, "type1", "G4 -> H2(-1) + G1")


TYPE1_RULES: dict[str, Callable[..., Rule]] = {
    "shorten": g_shorten,
    "peel": g_peel,
    "g4": g4_to_h_g1,
}


def typeI_rules(selector: str, *params) -> Rule:
    try:
        gen = TYPE1_RULES[selector]
    except KeyError:
        raise RuleError(f"unknown Type-I rule {selector!r}") from None
    return gen(*params)


# -- small Gamma combinations -----------------------------------------------

_HALF = GaussianRational(1, 0) / 2
_QUARTER = _HALF / 2


def _small_rules() -> dict[str, tuple[CfcSpec, CfcSpec, list]]:
    h, q = _HALF, _QUARTER
    return {
        "j2_g1": (_blocks(J(2), G(1)), _blocks(G(2)),
                  [[-1, 1], [1, 1], [1, 0]]),
        "g2_g1": (_blocks(G(2), G(1)), h2_power(1),
                  [[0, 1], [1, 0], [I, 0]]),
        # rational rescaling (second column doubled) of the sqrt(2)-scaled witness
        "j2_g1_g1": (_blocks(J(2), G(1), G(1)), h2_power(1),
                     [[1, 0], [0, 2], [I * h, I], [h, -1]]),
        "g2_j2": (_blocks(G(2), J(2)), _blocks(H2M1, G(1)),
                  [[-1, 0, -1], [0, 1, 0], [0, 1, 1], [0, -1, 1]]),
        "g3_g2": (_blocks(G(3), G(2)), _blocks(H2M1, J(2)),
                  [[0, 0, 0, 1], [1, 0, 0, 1], [1, 0, h, h], [0, 1, h, -h], [1, 0, 0, 0]]),
        "g6_g2": (_blocks(G(6), G(2)), _blocks(H2M1, H2M1, J(2)), [
            [-1, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 0],
            [0, 0, 0, -I, -h, h],
            [0, 0, 0, -I, 0, 1],
            [0, 0, 0, 0, 0, 1],
            [0, 1, 0, 0, 0, 0],
            [0, 0, -1, 0, -I * h, -I * h],
            [0, 0, 0, 1, 0, 0],
        ]),
        "g4_g4": (_blocks(G(4), G(4)), _blocks(H2M1, H2M1, J(2)), [
            [-1, 0, 0, 0, 0, 0],
            [0, 0, 0, 0, 0, 0],
            [0, 0, 0, I, -I * h, -I * h],
            [0, 1, 0, 0, 0, 0],
            [0, 0, -1, 0, -q, q],
            [0, 0, 0, -h, h, h],
            [0, 0, 0, 0, -h, h],
            [0, 0, 0, 1, 0, 0],
        ]),
    }


GAMMA_SMALL_SELECTORS = ("j2_g1", "g2_g1", "j2_g1_g1", "g2_j2", "g3_g2", "g6_g2", "g4_g4")


def gamma_small_rules(selector: str) -> Rule:
    table = _small_rules()
    if selector not in table:
        raise RuleError(f"unknown small-Gamma rule {selector!r}")
    lhs, rhs, rows = table[selector]
    return Rule(lhs, rhs, _m(rows), "type1-small", f"{lhs} -> {rhs}")


# -- H_2(mu) against Gamma_1 / Gamma_2 ----------------------------------------

def h2_g1_g1(mu) -> Rule:
    mu = gq(mu)
    _need(mu != 1 and mu != -1, "H2(mu) + G1 + G1 needs mu != +-1")
    d = mu - 1
    x = _m([[1, 0], [-1 - mu, -2 / d], [1 + mu, 1 / d], [0, I / d]])
    return Rule(_blocks(_hblock(2, mu), G(1), G(1)), h2_power(1), x, "mixed",
                "H2(mu) + G1 + G1 -> H2(-1)")


def h2_g2(mu) -> Rule:
    mu = gq(mu)
    _need(mu != 1 and mu != -1, "H2(mu) + G2 needs mu != +-1")
    s = mu + 1
    x = _m([[1, 0, 1], [-1 / s, 0, 1 / s], [0, 1, (mu - 1) / s], [1, 0, 0]])
    return Rule(_blocks(_hblock(2, mu), G(2)), _blocks(H2M1, G(1)), x, "mixed",
                "H2(mu) + G2 -> H2(-1) + G1")


MIXED_RULES: dict[str, Callable[..., Rule]] = {"g1_g1": h2_g1_g1, "g2": h2_g2}


def mixed_rules(selector: str, mu) -> Rule:
    try:
        gen = MIXED_RULES[selector]
    except KeyError:
        raise RuleError(f"unknown mixed rule {selector!r}") from None
    return gen(mu)


# -- Gamma_2 pairs ------------------------------------------------------------

def gamma2_pair() -> Rule:
    # columns in this order give +H_2(-1); the other order gives its transpose
    x = _m([[-1, 0], [0, 1], [0, 0], [0, I]])
    return Rule(_blocks(G(2), G(2)), h2_power(1), x, "gamma2", "G2 + G2 -> H2(-1)")


def gamma2_rules(selector: str, t: int = 1) -> Rule:
    """``pair`` is the two-block rule; ``pairs`` is its ``t``-fold direct sum."""
    if selector == "pair":
        return gamma2_pair()
    if selector == "pairs":
        _need(t >= 0, "t must be nonnegative")
        return combine_addition([gamma2_pair()] * t)
    raise RuleError(f"unknown Gamma_2 rule {selector!r}")


# -- structural laws ----------------------------------------------------------

def identity_rule(spec: CfcSpec) -> Rule:
    return Rule(spec, spec, Matrix.identity(spec.size), "identity", "identity")


def combine_addition(rules: Sequence[Rule]) -> Rule:
    rules = list(rules)
    if len(rules) == 1:
        return rules[0]
    lhs = CfcSpec.of(*(r.lhs for r in rules))
    rhs = CfcSpec.of(*(r.rhs for r in rules))
    x = mat_direct_sum([r.witness for r in rules])
    refs = [r.ref for r in rules if r.law != "identity"]
    laws = {r.law for r in rules if r.law != "identity"}
    law = laws.pop() if len(laws) == 1 else "addition"
    return Rule(lhs, rhs, x, law, _join_refs(refs))


def _join_refs(refs: list[str]) -> str:
    # runs of the same ref fold into "[ref] xN"; distinct refs are joined with " | "
    if not refs:
        return "identity"
    parts = []
    for ref, run in itertools.groupby(refs):
        n = len(list(run))
        parts.append(f"[{ref}] x{n}" if n > 1 else ref)
    return " | ".join(parts)


def combine_transitivity(first: Rule, second: Rule) -> Rule:
    if first.rhs != second.lhs:
        raise RuleError(f"cannot compose: {first.rhs} differs from {second.lhs}")
    return Rule(first.lhs, second.rhs, mat_mul(first.witness, second.witness),
                "transitivity", f"{first.ref} ; {second.ref}")


def block_permutation_matrix(spec: CfcSpec, sigma: Sequence[int]) -> Matrix:
    """Coordinate permutation placing block ``sigma[i]`` of ``spec`` at slot ``i``."""
    offsets = spec.offsets()
    coords: list[int] = []
    for s in sigma:
        coords.extend(range(offsets[s], offsets[s] + spec.blocks[s].size))
    return mat_from_permutation(coords)


def apply_permutation(lhs: CfcSpec, sigma: Sequence[int]) -> Rule:
    """Reorder summands: slot ``i`` of the result holds block ``sigma[i]`` of ``lhs``."""
    sigma = list(sigma)
    if sorted(sigma) != list(range(len(lhs))):
        raise RuleError(f"{sigma} does not permute {len(lhs)} blocks")
    rhs = CfcSpec(tuple(lhs.blocks[s] for s in sigma))
    return Rule(lhs, rhs, block_permutation_matrix(lhs, sigma), "permutation", f"reorder {sigma}")


def apply_elimination(lhs: CfcSpec, keep_prefix: CfcSpec) -> Rule:
    k = len(keep_prefix)
    if lhs.blocks[:k] != keep_prefix.blocks:
        raise RuleError(f"{keep_prefix} is not a prefix of {lhs}")
    n, m = lhs.size, keep_prefix.size
    x = _sparse(n, m, {(c, c): 1 for c in range(m)})
    dropped = lhs[k:]
    return Rule(lhs, keep_prefix, x, ELIMINATION, f"drop {dropped}" if len(dropped) else "drop nothing")


def strip_j1_rule(lhs: CfcSpec) -> Rule:
    """Drop every ``J_1(0)`` summand wherever it sits; zero rows mark their coordinates."""
    offsets = lhs.offsets()
    keep = [i for i, b in enumerate(lhs.blocks) if not (b.kind is BlockKind.TYPE0 and b.size == 1)]
    rhs = CfcSpec(tuple(lhs.blocks[i] for i in keep))
    entries = {}
    col = 0
    for i in keep:
        for c in range(lhs.blocks[i].size):
            entries[(offsets[i] + c, col)] = ONE
            col += 1
    x = _sparse(lhs.size, rhs.size, entries)
    return Rule(lhs, rhs, x, "j1", f"drop {len(lhs) - len(keep)} J1 block(s)")
