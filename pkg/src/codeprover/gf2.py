"""Bit-exact linear algebra over GF(2).

Words are stored as Python ints used as bitsets: coordinate i (1-based)
lives at bit i-1, so the printed form (coordinate 1 leftmost) matches the
usual generator-matrix listings.  Matrices are tuples of such ints plus an
explicit length.  Everything is an immutable value; all operations are
pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

DEFAULT_ENUM_CAP = 22  # 2^22 words; guards accidental blowup


class CapacityError(Exception):
    """An enumeration or closure exceeded its configured cap."""


def popcount(x: int) -> int:
    return bin(x).count("1")


@dataclass(frozen=True)
class BitWord:
    """A length-n word over GF(2)."""

    n: int
    bits: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("word length must be >= 1")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError("bits out of range for length %d" % self.n)

    @classmethod
    def from_string(cls, text: str) -> "BitWord":
        """Parse a 0/1 string; spaces (block separators) are ignored."""
        raw = text.replace(" ", "")
        if not raw or any(c not in "01" for c in raw):
            raise ValueError("not a bit string: %r" % text)
        bits = 0
        for i, c in enumerate(raw):
            if c == "1":
                bits |= 1 << i
        return cls(len(raw), bits)

    def to_string(self, partition: tuple[int, ...] | None = None) -> str:
        """Render coordinate 1 first; insert a space at block boundaries."""
        s = "".join("1" if (self.bits >> i) & 1 else "0" for i in range(self.n))
        if partition is None:
            return s
        if sum(partition) != self.n:
            raise ValueError("partition does not sum to word length")
        out, pos = [], 0
        for p in partition:
            out.append(s[pos:pos + p])
            pos += p
        return " ".join(out)

    @property
    def weight(self) -> int:
        return popcount(self.bits)

    def __xor__(self, other: "BitWord") -> "BitWord":
        if self.n != other.n:
            raise ValueError("length mismatch")
        return BitWord(self.n, self.bits ^ other.bits)

    def __str__(self) -> str:
        return self.to_string()


def multiweight(w: BitWord, partition: tuple[int, ...]) -> tuple[int, ...]:
    """Per-block weights of w for consecutive blocks of the given sizes."""
    if sum(partition) != w.n:
        raise ValueError("partition sums to %d, word length is %d"
                         % (sum(partition), w.n))
    entries = []
    pos = 0
    for p in partition:
        mask = ((1 << p) - 1) << pos
        entries.append(popcount(w.bits & mask))
        pos += p
    return tuple(entries)


# -- matrices -----------------------------------------------------------

@dataclass(frozen=True)
class BitMatrix:
    """A list of equal-length rows over GF(2).  May have zero rows."""

    n: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("matrix width must be >= 1")
        for r in self.rows:
            if r < 0 or r >> self.n:
                raise ValueError("row out of range for width %d" % self.n)

    @classmethod
    def from_words(cls, words: Iterable[BitWord]) -> "BitMatrix":
        ws = list(words)
        if not ws:
            raise ValueError("cannot infer width from an empty word list")
        n = ws[0].n
        if any(w.n != n for w in ws):
            raise ValueError("rows have mixed lengths")
        return cls(n, tuple(w.bits for w in ws))

    @classmethod
    def from_strings(cls, rows: Iterable[str]) -> "BitMatrix":
        return cls.from_words([BitWord.from_string(r) for r in rows])

    def words(self) -> list[BitWord]:
        return [BitWord(self.n, r) for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    def __str__(self) -> str:
        return "\n".join(str(w) for w in self.words())


def _eliminate(rows: list[int], n: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form.  Returns (nonzero rows, pivot columns).

    Pivots are taken at the smallest coordinate (leftmost printed column)
    first, and pivot columns are cleared above and below, so the result is
    canonical for the row space.
    """
    work = list(rows)
    pivots: list[int] = []
    out: list[int] = []
    for col in range(n):
        mask = 1 << col
        pivot_row = None
        for i, r in enumerate(work):
            if r & mask:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        piv = work.pop(pivot_row)
        work = [r ^ piv if r & mask else r for r in work]
        out = [r ^ piv if r & mask else r for r in out]
        out.append(piv)
        pivots.append(col)
        if not work:
            break
    return out, pivots


def reduce(M: BitMatrix) -> BitMatrix:
    """Canonical reduced row echelon form (zero rows dropped)."""
    out, _ = _eliminate(list(M.rows), M.n)
    return BitMatrix(M.n, tuple(out))


def rank(M: BitMatrix) -> int:
    _, pivots = _eliminate(list(M.rows), M.n)
    return len(pivots)


def span_contains(M: BitMatrix, w: BitWord) -> bool:
    """True iff w is a sum of rows of M."""
    if w.n != M.n:
        raise ValueError("length mismatch")
    reduced, pivots = _eliminate(list(M.rows), M.n)
    x = w.bits
    for row, col in zip(reduced, pivots):
        if x & (1 << col):
            x ^= row
    return x == 0


def express_in_rows(M: BitMatrix, w: BitWord) -> tuple[int, ...] | None:
    """Coefficients c with sum(c_i * row_i) = w, or None if w not in span.

    Works on the rows as given (not the reduced form), so callers can map
    combinations back to their own basis.
    """
    if w.n != M.n:
        raise ValueError("length mismatch")
    m = len(M.rows)
    # Augment each row with an indicator of which original rows built it.
    aug = [(M.rows[i], 1 << i) for i in range(m)]
    x, combo = w.bits, 0
    done: list[tuple[int, int]] = []
    for col in range(M.n):
        mask = 1 << col
        pivot = None
        for i, (r, c) in enumerate(aug):
            if r & mask:
                pivot = i
                break
        if pivot is None:
            continue
        pr, pc = aug.pop(pivot)
        aug = [(r ^ pr, c ^ pc) if r & mask else (r, c) for r, c in aug]
        done.append((pr, pc))
        if x & mask:
            x ^= pr
            combo ^= pc
    if x != 0:
        return None
    return tuple((combo >> i) & 1 for i in range(m))


# -- codes --------------------------------------------------------------

@dataclass(frozen=True)
class Code:
    """An [n, k] binary linear code with a canonical generator matrix."""

    generators: BitMatrix

    @classmethod
    def from_matrix(cls, M: BitMatrix) -> "Code":
        R = reduce(M)
        if len(R.rows) != len(M.rows):
            raise ValueError("generator rows are linearly dependent")
        return cls(R)

    @classmethod
    def from_strings(cls, rows: Iterable[str]) -> "Code":
        return cls.from_matrix(BitMatrix.from_strings(rows))

    @property
    def n(self) -> int:
        return self.generators.n

    @property
    def k(self) -> int:
        return len(self.generators.rows)


def dual_basis(M: BitMatrix) -> BitMatrix:
    """A canonical basis of the orthogonal complement of the row space.

    Returns an (n - rank) x n matrix; for the full space the result has
    zero rows.  Built from the reduced form: free columns get unit vectors
    patched with the pivot-column entries that make them orthogonal.
    """
    reduced, pivots = _eliminate(list(M.rows), M.n)
    pivot_set = set(pivots)
    free_cols = [c for c in range(M.n) if c not in pivot_set]
    out = []
    for fc in free_cols:
        v = 1 << fc
        for row, pc in zip(reduced, pivots):
            if row & (1 << fc):
                v |= 1 << pc
        out.append(v)
    reduced_out, _ = _eliminate(out, M.n)
    return BitMatrix(M.n, tuple(reduced_out))


def dual_code(C: Code) -> BitMatrix:
    return dual_basis(C.generators)


def enumerate_span(M: BitMatrix, cap: int = DEFAULT_ENUM_CAP) -> list[int]:
    """All 2^rank distinct words of the row space, as ints."""
    reduced, _ = _eliminate(list(M.rows), M.n)
    if len(reduced) > cap:
        raise CapacityError("span dimension %d exceeds cap %d"
                            % (len(reduced), cap))
    words = [0]
    for row in reduced:
        words += [w ^ row for w in words]
    return words


def enumerate_codewords(C: Code, cap: int = DEFAULT_ENUM_CAP) -> list[BitWord]:
    return [BitWord(C.n, b) for b in enumerate_span(C.generators, cap)]


def min_weight(C: Code, cap: int = DEFAULT_ENUM_CAP) -> int:
    """Minimum weight over nonzero codewords, by full enumeration."""
    if C.k < 1:
        raise ValueError("the zero code has no nonzero words")
    return min(popcount(b) for b in enumerate_span(C.generators, cap) if b)


def is_even(C: Code) -> bool:
    """True iff every codeword has even weight (generators suffice)."""
    return all(popcount(r) % 2 == 0 for r in C.generators.rows)


def multiweight_distribution(
    C: Code, partition: tuple[int, ...], cap: int = DEFAULT_ENUM_CAP
) -> dict[tuple[int, ...], int]:
    """Count codewords by multiweight (brute force over the whole code)."""
    counts: dict[tuple[int, ...], int] = {}
    for b in enumerate_span(C.generators, cap):
        mw = multiweight(BitWord(C.n, b), partition)
        counts[mw] = counts.get(mw, 0) + 1
    return counts


def iter_multiweights(partition: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """All multiweight tuples in the box prod(p_i + 1), lexicographic."""
    if not partition:
        yield ()
        return
    head, tail = partition[0], partition[1:]
    for a in range(head + 1):
        for rest in iter_multiweights(tail):
            yield (a,) + rest
