"""Shared value types: code types, configurations, side constraints.

A configuration is a partition of the coordinates together with a
block-constant subcode basis (each row is a 0/1 pattern over the blocks:
a '1' means the row is all-ones on that block), block-constant dual
words in the same encoding, and side constraints on the count variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gf2 import BitMatrix, BitWord, rank


@dataclass(frozen=True)
class VarRef:
    """A count variable: y<w> (codeword weight-w count), mu<w> (dual
    weight-w count) or x with a multiweight index."""

    kind: str  # 'x', 'y' or 'mu'
    index: tuple[int, ...]  # (w,) for y/mu, the multiweight tuple for x

    def __post_init__(self):
        if self.kind not in ("x", "y", "mu"):
            raise ValueError("unknown variable kind %r" % self.kind)

    def __str__(self) -> str:
        if self.kind == "x":
            return "x_" + "_".join(str(a) for a in self.index)
        return "%s%d" % (self.kind, self.index[0])


@dataclass(frozen=True)
class SideConstraint:
    var: VarRef
    op: str  # '=', '!=' or '>='
    value: int

    def __post_init__(self):
        if self.op not in ("=", "!=", ">="):
            raise ValueError("unknown relation %r" % self.op)

    def __str__(self) -> str:
        return "%s %s %d" % (self.var, self.op, self.value)


@dataclass(frozen=True)
class CodeType:
    """The object of study: [n, k, d] codes, optionally even, with side
    constraints such as mu5 = 0."""

    n: int
    k: int
    d: int
    even: bool = False
    constraints: tuple[SideConstraint, ...] = ()

    def __post_init__(self):
        if not (1 <= self.k <= self.n and 1 <= self.d <= self.n):
            raise ValueError("bad type parameters [%d,%d,%d]"
                             % (self.n, self.k, self.d))

    def __str__(self) -> str:
        suffix = "_2" if self.even else ""
        s = "[%d,%d,%d%s]" % (self.n, self.k, self.d, suffix)
        if self.constraints:
            s += "{%s}" % ", ".join(str(c) for c in self.constraints)
        return s


def _pattern_word(pattern: str, partition: tuple[int, ...]) -> BitWord:
    """Expand a block pattern ('110') to the word that is all-ones on its
    1-blocks."""
    if len(pattern) != len(partition):
        raise ValueError("pattern %r has %d blocks, partition has %d"
                         % (pattern, len(pattern), len(partition)))
    bits = 0
    pos = 0
    for ch, p in zip(pattern, partition):
        if ch == "1":
            bits |= ((1 << p) - 1) << pos
        elif ch != "0":
            raise ValueError("bad pattern character %r" % ch)
        pos += p
    return BitWord(sum(partition), bits)


@dataclass(frozen=True)
class Configuration:
    partition: tuple[int, ...]
    rows: tuple[str, ...] = ()
    dual_rows: tuple[str, ...] = ()
    constraints: tuple[SideConstraint, ...] = ()
    label: str | None = None

    def __post_init__(self):
        if not self.partition or any(p < 1 for p in self.partition):
            raise ValueError("partition blocks must be positive")
        for pat in self.rows + self.dual_rows:
            _pattern_word(pat, self.partition)  # validates
        if self.rows:
            M = self.row_matrix()
            if rank(M) != len(self.rows):
                raise ValueError("subcode rows are linearly dependent")

    @property
    def n(self) -> int:
        return sum(self.partition)

    @property
    def r(self) -> int:
        return len(self.partition)

    def row_words(self) -> list[BitWord]:
        return [_pattern_word(p, self.partition) for p in self.rows]

    def dual_row_words(self) -> list[BitWord]:
        return [_pattern_word(p, self.partition) for p in self.dual_rows]

    def row_matrix(self) -> BitMatrix:
        if not self.rows:
            return BitMatrix(self.n, ())
        return BitMatrix.from_words(self.row_words())

    def dual_row_matrix(self) -> BitMatrix:
        if not self.dual_rows:
            return BitMatrix(self.n, ())
        return BitMatrix.from_words(self.dual_row_words())

    def __str__(self) -> str:
        s = "config " + ",".join(str(p) for p in self.partition)
        groups = []
        if self.rows or self.dual_rows or self.constraints:
            groups.append("{%s}" % ",".join(self.rows))
        if self.dual_rows or self.constraints:
            groups.append("{%s}" % ",".join(self.dual_rows))
        if self.constraints:
            groups.append("{%s}" % ", ".join(str(c) for c in self.constraints))
        for g in groups:
            s += " : " + g
        if self.label:
            s = "[%s] " % self.label + s
        return s


def base_configuration(n: int) -> Configuration:
    """The trivial configuration with one block and no rows."""
    return Configuration(partition=(n,))


@dataclass
class ProofContext:
    """Everything the constraint builder needs to know about the current
    proof node: the code type plus the facts in force there.

    x_nonzero holds orbits of multiweight indices (a singleton orbit is an
    exact fact; a larger one means "nonzero somewhere in this orbit").
    x_zero holds indices proven identically zero.
    """

    code_type: CodeType
    dual_min: int = 1
    y_zero: frozenset[int] = frozenset()
    y_nonzero: frozenset[int] = frozenset()
    mu_zero: frozenset[int] = frozenset()
    mu_nonzero: frozenset[int] = frozenset()
    x_nonzero: tuple[frozenset[tuple[int, ...]], ...] = ()
    x_zero: frozenset[tuple[int, ...]] = frozenset()
