"""Canonical congruence blocks, their direct sums, and the invariants read off them.

Three block families exist:

* ``J`` -- the nilpotent Jordan block ``J_k(0)``;
* ``G`` -- the alternating-sign anti-triangular block ``Gamma_k`` (``Gamma_1 = [1]``);
* ``H`` -- ``H_{2k}(mu) = [[0, I_k], [J_k(mu), 0]]`` with ``mu != 0`` and
  ``mu != (-1)**(k+1)``.

A :class:`CfcSpec` is an ordered direct sum of blocks.  The skew-rank
invariant :func:`rho` is kept exact as a count of quarters.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .exact import ONE, ZERO, GaussianRational, Matrix, gq, mat_direct_sum


class InvalidBlockError(ValueError):
    """A block violates the canonical-form constraints."""


class SpecParseError(ValueError):
    """The block-sum text is malformed; ``position`` is a 0-based column."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class BlockKind(enum.Enum):
    TYPE0 = "J"
    TYPE1 = "G"
    TYPE2 = "H"


@dataclass(frozen=True)
class Block:
    kind: BlockKind
    size: int
    mu: GaussianRational | None = None

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise InvalidBlockError(f"block size must be a positive integer, got {self.size!r}")
        if self.kind is BlockKind.TYPE2:
            if self.mu is None:
                raise InvalidBlockError("H blocks need a parameter mu")
            object.__setattr__(self, "mu", gq(self.mu))
            if self.size % 2:
                raise InvalidBlockError(f"H block size must be even, got {self.size}")
            if not self.mu:
                raise InvalidBlockError("H block parameter must be nonzero")
            k = self.size // 2
            if self.mu == (-1) ** (k + 1):
                raise InvalidBlockError(f"H_{self.size} forbids mu = {(-1) ** (k + 1)}")
        elif self.mu is not None:
            raise InvalidBlockError(f"{self.kind.value} blocks take no parameter")

    def __str__(self) -> str:
        if self.kind is BlockKind.TYPE2:
            return f"H{self.size}({self.mu})"
        return f"{self.kind.value}{self.size}"

    @property
    def is_h2_minus1(self) -> bool:
        return self.kind is BlockKind.TYPE2 and self.size == 2 and self.mu == -1


def J(k: int) -> Block:
    return Block(BlockKind.TYPE0, k)


def G(k: int) -> Block:
    return Block(BlockKind.TYPE1, k)


def H(size: int, mu) -> Block:
    return Block(BlockKind.TYPE2, size, gq(mu))


H2M1 = H(2, -1)


@dataclass(frozen=True)
class CfcSpec:
    """Ordered direct sum of canonical blocks."""

    blocks: tuple[Block, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))

    @classmethod
    def of(cls, *blocks: Block | Iterable[Block]) -> CfcSpec:
        flat: list[Block] = []
        for b in blocks:
            if isinstance(b, Block):
                flat.append(b)
            else:
                flat.extend(b)
        return cls(tuple(flat))

    @classmethod
    def parse(cls, text: str) -> CfcSpec:
        return parse_spec(text)

    @property
    def size(self) -> int:
        return sum(b.size for b in self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self) -> Iterator[Block]:
        return iter(self.blocks)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return CfcSpec(self.blocks[idx])
        return self.blocks[idx]

    def __add__(self, other: CfcSpec) -> CfcSpec:
        if not isinstance(other, CfcSpec):
            return NotImplemented
        return CfcSpec(self.blocks + other.blocks)

    def __mul__(self, count: int) -> CfcSpec:
        return CfcSpec(self.blocks * count)

    def offsets(self) -> list[int]:
        """Starting coordinate of each block in the materialized matrix."""
        out, pos = [], 0
        for b in self.blocks:
            out.append(pos)
            pos += b.size
        return out

    def __str__(self) -> str:
        return format_spec(self)


def h2_power(m: int) -> CfcSpec:
    """``H_2(-1)`` repeated ``m`` times; the canonical form of a rank-``2m`` skew matrix."""
    return CfcSpec((H2M1,) * m)


def normalize_mu(mu: GaussianRational) -> GaussianRational:
    """Pick the representative of ``{mu, 1/mu}``.

    The one with ``|mu|^2 >= 1`` wins; on the unit circle the lexicographically
    larger ``(re, im)`` wins, i.e. the one with nonnegative imaginary part.
    """
    inv = mu.inverse()
    a, b = mu.abs2(), inv.abs2()
    if a != b:
        return mu if a > b else inv
    return mu if (mu.re, mu.im) >= (inv.re, inv.im) else inv


def validate(spec: CfcSpec) -> CfcSpec:
    """Return ``spec`` with every H parameter normalized.

    Block constraints are enforced when a :class:`Block` is built, so
    everything reaching here is structurally valid already.
    """
    out = []
    for b in spec.blocks:
        if not isinstance(b, Block):
            raise InvalidBlockError(f"not a block: {b!r}")
        if b.kind is BlockKind.TYPE2:
            b = Block(BlockKind.TYPE2, b.size, normalize_mu(b.mu))
        out.append(b)
    return CfcSpec(tuple(out))


# -- census and rho ---------------------------------------------------------

@dataclass(frozen=True)
class BlockCensus:
    j1: int = 0
    j_odd: int = 0       # Type-0, odd size >= 3
    j_even: int = 0      # Type-0, even size
    g_even: int = 0      # Type-I, even size
    g_odd: int = 0       # Type-I, odd size
    h2: int = 0          # H_2k(mu) with mu != (-1)^k
    h2_even_plus: int = 0   # H_4k(1)
    h2_odd_minus: int = 0   # H_{4k-2}(-1)
    n: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "j1": self.j1, "jO": self.j_odd, "jE": self.j_even,
            "gE": self.g_even, "gO": self.g_odd,
            "h2": self.h2, "h2EPlus": self.h2_even_plus, "h2OMinus": self.h2_odd_minus,
            "n": self.n,
        }


def census(spec: CfcSpec) -> BlockCensus:
    counts = dict.fromkeys(
        ["j1", "j_odd", "j_even", "g_even", "g_odd", "h2", "h2_even_plus", "h2_odd_minus"], 0
    )
    for b in spec.blocks:
        s = b.size
        if b.kind is BlockKind.TYPE0:
            key = "j1" if s == 1 else ("j_odd" if s % 2 else "j_even")
        elif b.kind is BlockKind.TYPE1:
            key = "g_odd" if s % 2 else "g_even"
        else:
            k = s // 2
            if b.mu != (-1) ** k:
                key = "h2"
            elif k % 2 == 0:
                key = "h2_even_plus"
            else:
                key = "h2_odd_minus"
        counts[key] += 1
    return BlockCensus(n=spec.size, **counts)


@dataclass(frozen=True, order=True)
class RhoValue:
    """``rho`` stored as an exact count of quarters."""

    quarters: int

    @property
    def floor(self) -> int:
        return self.quarters // 4

    @property
    def frac_quarters(self) -> int:
        return self.quarters % 4

    def __add__(self, other: RhoValue) -> RhoValue:
        return RhoValue(self.quarters + other.quarters)

    def __str__(self) -> str:
        from fractions import Fraction

        f = Fraction(self.quarters, 4)
        return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def rho(spec: CfcSpec) -> RhoValue:
    c = census(spec)
    return RhoValue(c.n - c.j1 + c.j_odd + c.g_even + 2 * c.h2_odd_minus)


def block_rho(block: Block) -> RhoValue:
    return rho(CfcSpec((block,)))


# -- dense matrices ---------------------------------------------------------

def jordan_block(k: int, lam=0) -> Matrix:
    lam = gq(lam)
    return Matrix._wrap(k, k, [
        [lam if j == i else (ONE if j == i + 1 else ZERO) for j in range(k)] for i in range(k)
    ])


def gamma_block(k: int) -> Matrix:
    """``Gamma_k``: row ``i`` (1-based) carries ``(-1)**(k-i)`` in columns ``k+1-i`` and ``k+2-i``."""
    out = [[ZERO] * k for _ in range(k)]
    for i in range(1, k + 1):
        s = ONE if (k - i) % 2 == 0 else -ONE
        out[i - 1][k - i] = s
        if i >= 2:
            out[i - 1][k + 1 - i] = s
    return Matrix._wrap(k, k, out)


def h_block(size: int, mu) -> Matrix:
    k = size // 2
    mu = gq(mu)
    out = [[ZERO] * size for _ in range(size)]
    for i in range(k):
        out[i][k + i] = ONE
        out[k + i][i] = mu
        if i + 1 < k:
            out[k + i][i + 1] = ONE
    return Matrix._wrap(size, size, out)


def block_matrix(block: Block) -> Matrix:
    if block.kind is BlockKind.TYPE0:
        return jordan_block(block.size)
    if block.kind is BlockKind.TYPE1:
        return gamma_block(block.size)
    return h_block(block.size, block.mu)


_MATERIALIZE_CACHE: dict[Block, Matrix] = {}


def materialize(spec: CfcSpec) -> Matrix:
    parts = []
    for b in spec.blocks:
        m = _MATERIALIZE_CACHE.get(b)
        if m is None:
            m = _MATERIALIZE_CACHE.setdefault(b, block_matrix(b))
        parts.append(m)
    return mat_direct_sum(parts)


def block_rank_a_plus_at(block: Block) -> int:
    s = block.size
    if block.kind is BlockKind.TYPE0:
        return s - 1 if s % 2 else s
    if block.kind is BlockKind.TYPE1:
        return s if s % 2 else s - 1
    if block.mu == -1:
        # only H_{4n-2}(-1) is admissible with mu = -1
        return s - 2
    return s


def rank_a_plus_at_formula(spec: CfcSpec) -> int:
    """Closed-form ``rank(A + A^T)``, summed block by block."""
    return sum(block_rank_a_plus_at(b) for b in spec.blocks)


def strip_j1(spec: CfcSpec) -> tuple[CfcSpec, int]:
    kept = tuple(b for b in spec.blocks if not (b.kind is BlockKind.TYPE0 and b.size == 1))
    return CfcSpec(kept), len(spec.blocks) - len(kept)


# -- DSL --------------------------------------------------------------------

_KINDS = {"J": BlockKind.TYPE0, "G": BlockKind.TYPE1, "H": BlockKind.TYPE2}
_INT_RE = re.compile(r"\d+")


def parse_spec(text: str) -> CfcSpec:
    """Parse ``"J3 + J2*2 + G4 + H6(1/2+3/4i)*3"``; whitespace is ignored.

    The empty string is the empty direct sum.
    """
    # keep the original column of each non-blank character for error messages
    chars = [(i, ch) for i, ch in enumerate(text) if not ch.isspace()]
    s = "".join(ch for _, ch in chars)

    def col(p: int) -> int:
        return chars[p][0] if p < len(chars) else len(text)

    blocks: list[Block] = []
    pos = 0
    if not s:
        return CfcSpec()
    while True:
        start = pos
        if pos >= len(s) or s[pos] not in _KINDS:
            raise SpecParseError("expected block letter J, G or H", col(pos))
        kind = _KINDS[s[pos]]
        pos += 1
        m = _INT_RE.match(s, pos)
        if not m:
            raise SpecParseError("expected block size", col(pos))
        size = int(m.group())
        pos = m.end()
        mu = None
        if pos < len(s) and s[pos] == "(":
            close = s.find(")", pos)
            if close < 0:
                raise SpecParseError("unclosed parameter", col(pos))
            try:
                mu = GaussianRational.parse(s[pos + 1:close])
            except ValueError as exc:
                raise SpecParseError(str(exc), col(pos + 1)) from None
            pos = close + 1
        count = 1
        if pos < len(s) and s[pos] == "*":
            m = _INT_RE.match(s, pos + 1)
            if not m:
                raise SpecParseError("expected repeat count after '*'", col(pos + 1))
            count = int(m.group())
            pos = m.end()
        try:
            block = Block(kind, size, mu)
        except InvalidBlockError as exc:
            raise SpecParseError(str(exc), col(start)) from None
        blocks.extend([block] * count)
        if pos == len(s):
            break
        if s[pos] != "+":
            raise SpecParseError("expected '+' between terms", col(pos))
        pos += 1
    return CfcSpec(tuple(blocks))


def format_spec(spec: CfcSpec) -> str:
    """Inverse of :func:`parse_spec`; runs of equal blocks are folded into ``*count``."""
    terms = []
    blocks = spec.blocks
    i = 0
    while i < len(blocks):
        j = i
        while j < len(blocks) and blocks[j] == blocks[i]:
            j += 1
        terms.append(str(blocks[i]) + (f"*{j - i}" if j - i > 1 else ""))
        i = j
    return " + ".join(terms)


def spec_from(value: CfcSpec | str | Sequence[Block]) -> CfcSpec:
    if isinstance(value, CfcSpec):
        return value
    if isinstance(value, str):
        return parse_spec(value)
    return CfcSpec(tuple(value))
