"""Decide ``A ~> H_2(-1)^m`` and build certified solutions.

The planner never searches.  It follows a fixed recipe: strip ``J_1(0)``
summands, sort the remaining blocks by family, reduce each family to
``H_2(-1)^a + C`` with a small leftover ``C``, merge the leftovers, and drop
whatever is left with the elimination law.  Each move is a verified
:class:`~skewcfc.rules.Rule` on the full current direct sum, so the chain
is a certificate that can be rechecked step by step.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

from . import rules as R
from .blocks import (
    H2M1,
    Block,
    BlockKind,
    CfcSpec,
    G,
    J,
    RhoValue,
    format_spec,
    h2_power,
    materialize,
    rho,
    strip_j1,
)
from .exact import (
    DimensionError,
    Matrix,
    congruence,
    mat_inverse,
    mat_mul,
    matrix_to_json,
)
from .skew import skew_canonicalize


class NotConsistentError(ValueError):
    """A solution was requested for a query that is not known to be consistent."""

    def __init__(self, verdict: Verdict):
        super().__init__(f"{verdict.kind.value}: {verdict.reason}")
        self.verdict = verdict


@dataclass(frozen=True, eq=False)
class Certificate:
    source: CfcSpec
    target: CfcSpec
    steps: tuple[R.Rule, ...] = ()

    def __post_init__(self):
        cur = self.source
        for i, step in enumerate(self.steps):
            if step.lhs != cur:
                raise R.RuleError(f"step {i} starts at {step.lhs}, expected {cur}")
            cur = step.rhs
        if cur != self.target:
            raise R.RuleError(f"chain ends at {cur}, expected {self.target}")

    def witness(self) -> Matrix:
        x = Matrix.identity(self.source.size)
        for step in self.steps:
            x = mat_mul(x, step.witness)
        return x

    def verify(self) -> bool:
        return congruence(self.witness(), materialize(self.source)) == materialize(self.target)

    def to_json(self, solution: Matrix | None = None) -> dict:
        return {
            "source": format_spec(self.source),
            "target": format_spec(self.target),
            "steps": [
                {
                    "law": s.law,
                    "paper_ref": s.ref,
                    "lhs": format_spec(s.lhs),
                    "rhs": format_spec(s.rhs),
                    "witness": matrix_to_json(s.witness),
                }
                for s in self.steps
            ],
            "solution": matrix_to_json(solution if solution is not None else self.witness()),
        }

    def lines(self) -> list[str]:
        return [f"{i + 1:3d}. {s}" for i, s in enumerate(self.steps)]


class VerdictKind(enum.Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    UNKNOWN = "unknown"


# reason labels
REASON_TRIVIAL = "m = 0: the empty witness always works"
REASON_NECESSITY = "necessity bound: rank B <= 2 rho(A) is violated"
REASON_SUFFICIENT = "no G1/G2 blocks: the rho bound is sufficient"
REASON_GAMMA2_OK = "G2-only source: pairs of G2 blocks reach m <= floor(k/2)"
REASON_GAMMA2_BOUND = "G2-only bound: G2^k reaches H2(-1)^m only for m <= floor(k/2)"
REASON_SYMMETRIC = "symmetric source: a symmetric A only reaches symmetric B, and a skew symmetric B is 0"
REASON_ELIMINATION = "G1/G2 blocks eliminated: the remaining blocks already reach m"
REASON_OPEN = "mixed G1/G2 case: only the necessity bound is known"


@dataclass(frozen=True, eq=False)
class Verdict:
    kind: VerdictKind
    reason: str
    m: int
    rho: RhoValue
    certificate: Certificate | None = None

    @property
    def consistent(self) -> bool:
        return self.kind is VerdictKind.CONSISTENT


# -- chain builder --------------------------------------------------------------

def _is_h(b: Block) -> bool:
    return b.is_h2_minus1


class _Chain:
    def __init__(self, source: CfcSpec):
        self.source = source
        self.current = source
        self.steps: list[R.Rule] = []

    def push(self, rule: R.Rule) -> None:
        if rule.lhs != self.current:
            raise R.RuleError(f"rule starts at {rule.lhs}, chain is at {self.current}")
        self.steps.append(rule)
        self.current = rule.rhs

    def apply(self, start: int, rule: R.Rule) -> None:
        """Rewrite the contiguous run of blocks starting at ``start``."""
        end = start + len(rule.lhs)
        if self.current[start:end] != rule.lhs:
            raise R.RuleError(f"{rule.lhs} not found at position {start} of {self.current}")
        parts = []
        if start:
            parts.append(R.identity_rule(self.current[:start]))
        parts.append(rule)
        if end < len(self.current):
            parts.append(R.identity_rule(self.current[end:]))
        self.push(R.combine_addition(parts))

    def apply_each(self, start: int, rules: Sequence[R.Rule]) -> None:
        if rules:
            self.apply(start, R.combine_addition(list(rules)))

    def permute(self, sigma: Sequence[int]) -> None:
        if list(sigma) != list(range(len(self.current))):
            self.push(R.apply_permutation(self.current, sigma))

    def gather(self, key: Callable[[Block], int]) -> None:
        blocks = self.current.blocks
        self.permute(sorted(range(len(blocks)), key=lambda i: key(blocks[i])))

    def gather_h(self) -> None:
        self.gather(lambda b: 0 if _is_h(b) else 1)

    def lead_h(self) -> int:
        n = 0
        for b in self.current.blocks:
            if not _is_h(b):
                break
            n += 1
        return n

    def rewrite(self, positions: Sequence[int], rule: R.Rule) -> None:
        """Bring the blocks at ``positions`` together (in that order), then rewrite them."""
        sel = list(positions)
        insert = min(sel)
        others = [i for i in range(len(self.current)) if i not in sel]
        before = [i for i in others if i < insert]
        self.permute(before + sel + [i for i in others if i > insert])
        self.apply(len(before), rule)

    def drop(self, positions: Sequence[int]) -> None:
        """Move the given blocks to the end and eliminate them."""
        if not positions:
            return
        sel = set(positions)
        keep = [i for i in range(len(self.current)) if i not in sel]
        self.permute(keep + sorted(sel))
        self.push(R.apply_elimination(self.current, self.current[:len(keep)]))

    def keep_prefix(self, count: int) -> None:
        if count < len(self.current):
            self.push(R.apply_elimination(self.current, self.current[:count]))

    def embed(self, cert: Certificate, start: int) -> None:
        for step in cert.steps:
            self.apply(start, step)

    def certificate(self) -> Certificate:
        return Certificate(self.source, self.current, tuple(self.steps))


def _fire(ch: _Chain, lo: int, hi: int, want: Sequence[Callable[[Block], bool]],
          make: Callable[[list[Block]], R.Rule]) -> int | None:
    """Apply one leftover-merging rule inside ``[lo, hi)`` of the leftover tail.

    The chain is kept as ``H_2(-1)^a + leftovers``.  Returns the new upper
    bound of the region, or ``None`` when the pattern is absent.
    """
    base = ch.lead_h()
    region = ch.current.blocks[base + lo:base + hi]
    picked: list[int] = []
    for pred in want:
        idx = next((i for i, b in enumerate(region) if i not in picked and pred(b)), None)
        if idx is None:
            return None
        picked.append(idx)
    rule = make([region[i] for i in picked])
    ch.rewrite([base + lo + i for i in picked], rule)
    ch.gather_h()
    new_h = sum(1 for b in rule.rhs if _is_h(b))
    return hi + (len(rule.rhs) - new_h) - len(rule.lhs)


def _fire_all(ch: _Chain, lo: int, hi: int, want, make) -> int:
    while True:
        nxt = _fire(ch, lo, hi, want, make)
        if nxt is None:
            return hi
        hi = nxt


def _eq(block: Block) -> Callable[[Block], bool]:
    return lambda b: b == block


def _is_h2_mu(b: Block) -> bool:
    return b.kind is BlockKind.TYPE2 and b.size == 2 and not _is_h(b)


_J2, _G1, _G2, _G4 = _eq(J(2)), _eq(G(1)), _eq(G(2)), _eq(G(4))


def _h_pair(bs: list[Block]) -> R.Rule:
    mu, nu = bs[0].mu, bs[1].mu
    return R.h_self_pair(mu) if mu == nu else R.h_cross_pair(mu, nu)


def _leftovers(ch: _Chain) -> CfcSpec:
    return ch.current[ch.lead_h():]


def _check_kind(spec: CfcSpec, kind: BlockKind, what: str) -> None:
    for b in spec.blocks:
        if b.kind is not kind:
            raise ValueError(f"{what} reducer got a {b} block")


# -- per-family reducers ------------------------------------------------------------

def _reduce_j_block(ch: _Chain, pos: int) -> None:
    s = ch.current[pos].size
    if s <= 2:
        return
    if s % 2 == 0:
        ch.apply(pos, R.j_shorten(s // 2))
        s -= 1
    splits = 0
    while s >= 7:
        ch.apply(pos, R.j_split(s - 4))
        s -= 4
        splits += 1
    first = R.j3_to_h() if s == 3 else R.j5_to_h_j2()
    ch.apply_each(pos, [first] + [R.j3_to_h()] * splits)


def reduce_type0(spec: CfcSpec) -> Certificate:
    """``A_0 -> H_2(-1)^floor(rho) [+ J_2(0)]`` for a sum of Type-0 blocks."""
    _check_kind(spec, BlockKind.TYPE0, "Type-0")
    ch = _Chain(spec)
    if strip_j1(spec)[1]:
        ch.push(R.strip_j1_rule(spec))
    for pos in reversed(range(len(ch.current))):
        _reduce_j_block(ch, pos)
    ch.gather_h()
    _fire_all(ch, 0, len(_leftovers(ch)), [_J2, _J2], lambda bs: R.j2_pair())
    return ch.certificate()


def _reduce_h_block(ch: _Chain, pos: int) -> None:
    while ch.current[pos].size >= 4:
        b = ch.current[pos]
        ch.apply(pos, R.h_peel((b.size - 4) // 2, b.mu))
        if b.size == 4:
            return
        pos += 1


def reduce_typeII(spec: CfcSpec) -> Certificate:
    """``A_2 -> H_2(-1)^floor(rho) [+ H_2(mu)]`` for a sum of Type-II blocks."""
    _check_kind(spec, BlockKind.TYPE2, "Type-II")
    ch = _Chain(spec)
    for pos in reversed(range(len(spec))):
        _reduce_h_block(ch, pos)
    ch.gather_h()
    _fire_all(ch, 0, len(_leftovers(ch)), [_is_h2_mu, _is_h2_mu], _h_pair)
    return ch.certificate()


def _reduce_g_block(ch: _Chain, pos: int, stop: int) -> None:
    """Shorten an odd Gamma block, then peel ``H_2(-1)`` off until size ``stop``."""
    s = ch.current[pos].size
    if s % 2:
        ch.apply(pos, R.g_shorten((s - 1) // 2))
        s -= 1
    while s > stop:
        ch.apply(pos, R.g_peel((s - 4) // 2))
        s -= 4
        pos += 1


def _reduce_g_pair(ch: _Chain, pos: int) -> None:
    """Two blocks of sizes ``4k+2`` or ``4k+3`` at ``pos`` become ``H_2(-1)^{k1+k2+1} + J_2``."""
    s1, s2 = ch.current[pos].size, ch.current[pos + 1].size
    if s1 == 3 and s2 == 3:
        ch.apply(pos + 1, R.g_shorten(1))
        ch.apply(pos, R.gamma_small_rules("g3_g2"))
        return
    # the larger-index block of the pair is handled first so ``pos`` stays valid
    big_first = (s1 - 2) // 4 >= 1
    _reduce_g_block(ch, pos + 1, 2 if big_first else 6)
    _reduce_g_block(ch, pos, 6 if big_first else 2)
    region = ch.current.blocks[pos:]
    i6 = pos + next(i for i, b in enumerate(region) if b == G(6))
    i2 = pos + next(i for i, b in enumerate(region) if b == G(2))
    ch.rewrite([i6, i2], R.gamma_small_rules("g6_g2"))


def reduce_typeI(spec: CfcSpec) -> Certificate:
    """Sum of Gamma blocks of size >= 3 to ``H_2(-1)^floor(rho) + C``.

    ``C`` is one of: nothing, ``G1``, ``J2``, ``G1 + G1``, ``G2``.
    """
    _check_kind(spec, BlockKind.TYPE1, "Type-I")
    for b in spec.blocks:
        if b.size < 3:
            raise ValueError(f"Type-I reducer needs sizes >= 3, got {b}")
    ch = _Chain(spec)
    # sizes 0,1 mod 4 first, then sizes 2,3 mod 4
    ch.gather(lambda b: 0 if b.size % 4 in (0, 1) else 1)
    na = sum(1 for b in spec.blocks if b.size % 4 in (0, 1))
    nb = len(spec) - na

    units = [(na + 2 * i, True) for i in range(nb // 2)]
    if nb % 2:
        units.append((na + nb - 1, False))
    for start, paired in reversed(units):
        if paired:
            _reduce_g_pair(ch, start)
        else:
            _reduce_g_block(ch, start, 2)
    for pos in reversed(range(na)):
        _reduce_g_block(ch, pos, 4)
    ch.gather_h()

    # first family: G4 leftovers pair up into H2(-1)^2 + J2, a lone one gives H2(-1) + G1
    hi_a = _fire_all(ch, 0, na, [_G4, _G4], lambda bs: R.gamma_small_rules("g4_g4"))
    hi_a = _fire(ch, 0, hi_a, [_G4], lambda bs: R.g4_to_h_g1()) or hi_a
    hi_a = _fire_all(ch, 0, hi_a, [_J2, _J2], lambda bs: R.j2_pair())
    # second family: J2 leftovers pair up, a G2 absorbs a remaining J2
    end = len(_leftovers(ch))
    end = _fire_all(ch, hi_a, end, [_J2, _J2], lambda bs: R.j2_pair())
    end = _fire(ch, hi_a, end, [_G2, _J2], lambda bs: R.gamma_small_rules("g2_j2")) or end
    # cross-family merges, tried in this order
    merges = [
        ([_J2, _J2], lambda bs: R.j2_pair()),
        ([_G2, _G1], lambda bs: R.gamma_small_rules("g2_g1")),
        ([_J2, _G1, _G1], lambda bs: R.gamma_small_rules("j2_g1_g1")),
        ([_G2, _J2], lambda bs: R.gamma_small_rules("g2_j2")),
        ([_J2, _G1], lambda bs: R.gamma_small_rules("j2_g1")),
    ]
    fired = True
    while fired:
        fired = False
        for want, make in merges:
            nxt = _fire(ch, 0, end, want, make)
            if nxt is not None:
                end, fired = nxt, True
                break
    return ch.certificate()


def combine_leftovers(parts: Sequence[Certificate]) -> Certificate:
    """Join the three family certificates and merge their leftovers.

    ``parts`` are the Type-0, Type-I and Type-II certificates, in that order.
    The result ends at ``H_2(-1)^floor(rho)`` of the joint source.
    """
    c0, c1, c2 = parts
    source = c0.source + c1.source + c2.source
    ch = _Chain(source)
    start = 0
    for cert in parts:
        ch.embed(cert, start)
        start += len(cert.target)
    ch.gather_h()

    left = list(_leftovers(ch).blocks)
    n0 = len(_leftovers_of(c0))
    n1 = len(_leftovers_of(c1))
    has_j2 = n0 == 1
    has_hmu = any(_is_h2_mu(b) for b in left)
    c1_blocks = left[n0:n0 + n1]
    total = len(left)

    if has_hmu and has_j2:
        if c1_blocks:
            ch.drop([ch.lead_h() + n0 + i for i in range(n1)])
            total -= n1
        _fire(ch, 0, total, [_is_h2_mu, _J2], lambda bs: R.h_absorb_j2(bs[0].mu))
    elif has_hmu:
        if c1_blocks == [J(2)]:
            _fire(ch, 0, total, [_is_h2_mu, _J2], lambda bs: R.h_absorb_j2(bs[0].mu))
        elif c1_blocks == [G(1), G(1)]:
            _fire(ch, 0, total, [_is_h2_mu, _G1, _G1], lambda bs: R.h2_g1_g1(bs[0].mu))
        elif c1_blocks == [G(2)]:
            _fire(ch, 0, total, [_is_h2_mu, _G2], lambda bs: R.h2_g2(bs[0].mu))
    elif has_j2:
        if c1_blocks == [J(2)]:
            _fire(ch, 0, total, [_J2, _J2], lambda bs: R.j2_pair())
        elif c1_blocks == [G(1), G(1)]:
            _fire(ch, 0, total, [_J2, _G1, _G1], lambda bs: R.gamma_small_rules("j2_g1_g1"))
        elif c1_blocks == [G(2)]:
            _fire(ch, 0, total, [_G2, _J2], lambda bs: R.gamma_small_rules("g2_j2"))

    base = ch.lead_h()
    ch.drop(list(range(base, len(ch.current))))
    expected = rho(source).floor
    if len(ch.current) != expected:
        raise AssertionError(f"leftover merge reached H2(-1)^{len(ch.current)}, expected {expected}")
    return ch.certificate()


def _leftovers_of(cert: Certificate) -> CfcSpec:
    t = cert.target
    k = 0
    while k < len(t) and _is_h(t[k]):
        k += 1
    return t[k:]


# -- decision procedure ---------------------------------------------------------------

def _is_small_gamma(b: Block) -> bool:
    return b.kind is BlockKind.TYPE1 and b.size <= 2


def _family(b: Block) -> int:
    return {BlockKind.TYPE0: 0, BlockKind.TYPE1: 1, BlockKind.TYPE2: 2}[b.kind]


def _plan_core(ch: _Chain, m: int) -> None:
    """Continue ``ch`` (no J1, G1 or G2 left) to ``H_2(-1)^m``."""
    ch.gather(_family)
    cur = ch.current
    fams = [CfcSpec(tuple(b for b in cur.blocks if _family(b) == f)) for f in range(3)]
    parts = [reduce_type0(fams[0]), reduce_typeI(fams[1]), reduce_typeII(fams[2])]
    ch.embed(combine_leftovers(parts), 0)
    ch.keep_prefix(m)


def _plan(spec: CfcSpec, m: int, drop_small: bool = False) -> Certificate:
    ch = _Chain(spec)
    if strip_j1(spec)[1]:
        ch.push(R.strip_j1_rule(spec))
    if drop_small:
        ch.drop([i for i, b in enumerate(ch.current.blocks) if _is_small_gamma(b)])
    _plan_core(ch, m)
    return ch.certificate()


def _plan_gamma2(spec: CfcSpec, m: int) -> Certificate:
    ch = _Chain(spec)
    if strip_j1(spec)[1]:
        ch.push(R.strip_j1_rule(spec))
    k = len(ch.current)
    if k % 2:
        ch.keep_prefix(k - 1)
    ch.apply_each(0, [R.gamma2_pair()] * (k // 2))
    ch.keep_prefix(m)
    return ch.certificate()


def _plan_zero(spec: CfcSpec) -> Certificate:
    ch = _Chain(spec)
    ch.keep_prefix(0)
    return ch.certificate()


def decide(spec: CfcSpec, m: int) -> Verdict:
    """Is ``X^T A X = H_2(-1)^m`` solvable, with ``A`` the direct sum ``spec``?"""
    if m < 0:
        raise ValueError("m must be nonnegative")
    r = rho(spec)
    if m == 0:
        return Verdict(VerdictKind.CONSISTENT, REASON_TRIVIAL, m, r, _plan_zero(spec))
    if m > r.floor:
        return Verdict(VerdictKind.INCONSISTENT, REASON_NECESSITY, m, r)
    core, _ = strip_j1(spec)
    small = [b for b in core.blocks if _is_small_gamma(b)]
    if not small:
        return Verdict(VerdictKind.CONSISTENT, REASON_SUFFICIENT, m, r, _plan(spec, m))
    if all(b == G(2) for b in core.blocks):
        k = len(core)
        if m <= k // 2:
            return Verdict(VerdictKind.CONSISTENT, REASON_GAMMA2_OK, m, r, _plan_gamma2(spec, m))
        return Verdict(VerdictKind.INCONSISTENT, REASON_GAMMA2_BOUND, m, r)
    if all(b == G(1) for b in core.blocks):
        return Verdict(VerdictKind.INCONSISTENT, REASON_SYMMETRIC, m, r)
    rest = CfcSpec(tuple(b for b in core.blocks if not _is_small_gamma(b)))
    if m <= rho(rest).floor:
        return Verdict(VerdictKind.CONSISTENT, REASON_ELIMINATION, m, r,
                       _plan(spec, m, drop_small=True))
    return Verdict(VerdictKind.UNKNOWN, REASON_OPEN, m, r)


def solve(spec: CfcSpec, m: int) -> tuple[Matrix, Certificate]:
    """Return ``X`` (``n x 2m``) with ``X^T A X = H_2(-1)^m`` and its certificate."""
    verdict = decide(spec, m)
    if not verdict.consistent:
        raise NotConsistentError(verdict)
    cert = verdict.certificate
    x = cert.witness()
    if congruence(x, materialize(spec)) != materialize(h2_power(m)):
        raise AssertionError("composed witness failed its final check")
    return x, cert


def solve_general(spec: CfcSpec, b: Matrix) -> Matrix:
    """Solve ``X^T A X = b`` for an arbitrary skew-symmetric ``b``."""
    red = skew_canonicalize(b)
    x, _ = solve(spec, red.m)
    n, size = spec.size, b.rows
    pad = Matrix.zeros(n, size - 2 * red.m)
    x1 = Matrix._wrap(n, size, [x.row(i) + pad.row(i) for i in range(n)]) if n else Matrix.zeros(0, size)
    out = mat_mul(x1, mat_inverse(red.q))
    if congruence(out, materialize(spec)) != b:
        raise AssertionError("general solution failed its final check")
    return out


@dataclass(frozen=True)
class MaxSkewRank:
    """Largest reachable skew rank; ``value`` is ``None`` when only bounds are known."""

    lower: int
    upper: int

    @property
    def value(self) -> int | None:
        return self.lower if self.lower == self.upper else None

    @property
    def known(self) -> bool:
        return self.lower == self.upper


def max_skew_rank(spec: CfcSpec) -> MaxSkewRank:
    upper = 2 * rho(spec).floor
    core, _ = strip_j1(spec)
    if not any(_is_small_gamma(b) for b in core.blocks):
        return MaxSkewRank(upper, upper)
    if all(b == G(2) for b in core.blocks):
        v = 2 * (len(core) // 2)
        return MaxSkewRank(v, v)
    if all(b == G(1) for b in core.blocks):
        return MaxSkewRank(0, 0)
    rest = CfcSpec(tuple(b for b in core.blocks if not _is_small_gamma(b)))
    return MaxSkewRank(2 * rho(rest).floor, upper)


def verify(a: CfcSpec | Matrix, x: Matrix, b: Matrix) -> bool:
    """Exact check of ``x^T a x == b``."""
    mat = materialize(a) if isinstance(a, CfcSpec) else a
    if mat.rows != mat.cols:
        raise DimensionError("A must be square")
    if x.rows != mat.rows or b.shape != (x.cols, x.cols):
        raise DimensionError(f"shapes A {mat.shape}, X {x.shape}, B {b.shape} do not fit")
    return congruence(x, mat) == b
