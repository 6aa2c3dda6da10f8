"""Krawtchouk kernels, the split multiweight transform, and construction
of the exact integer constraint system for a configuration.

The transform sends the multiweight distribution (x_a)_a of a code to the
vector S with

    S_b = sum_a x_a * prod_i K_{b_i}(a_i; p_i)

over all multiweight indices b of the partition; for an actual [n, k]
code, S / 2^k is the multiweight distribution of the dual code.  All
coefficients are exact integers, which is what makes the downstream
infeasibility certificates checkable in exact arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gf2 import BitWord, CapacityError, enumerate_span, iter_multiweights, multiweight
from .model import CodeType, Configuration, ProofContext

MAX_SYSTEM_CELLS = 50_000_000  # rows x columns guard for one system


def krawtchouk(k: int, x: int, n: int) -> int:
    """Binary Krawtchouk value K_k(x; n) = sum_j (-1)^j C(x,j) C(n-x,k-j)."""
    if not (0 <= k <= n and 0 <= x <= n):
        raise ValueError("need 0 <= k, x <= n, got k=%d x=%d n=%d" % (k, x, n))
    return sum((-1) ** j * math.comb(x, j) * math.comb(n - x, k - j)
               for j in range(k + 1))


@lru_cache(maxsize=None)
def krawtchouk_table(n: int) -> tuple[tuple[int, ...], ...]:
    """Full table T[k][x] = K_k(x; n), exact integers."""
    return tuple(tuple(krawtchouk(k, x, n) for x in range(n + 1))
                 for k in range(n + 1))


def split_transform(
    counts: dict[tuple[int, ...], int], partition: tuple[int, ...]
) -> dict[tuple[int, ...], int]:
    """Apply the transform to an integer vector over multiweights.

    The input may be sparse (missing indices count as 0); the output is
    the full box of the partition.  Applying the transform twice gives
    2^n times the identity.
    """
    tables = [krawtchouk_table(p) for p in partition]
    out: dict[tuple[int, ...], int] = {}
    items = [(a, c) for a, c in counts.items() if c != 0]
    for a, _ in items:
        if len(a) != len(partition) or any(
                not 0 <= ai <= pi for ai, pi in zip(a, partition)):
            raise ValueError("multiweight %r out of range for partition %r"
                             % (a, partition))
    for b in iter_multiweights(partition):
        s = 0
        for a, c in items:
            prod = c
            for t, bi, ai in zip(tables, b, a):
                prod *= t[bi][ai]
            s += prod
        out[b] = s
    return out


def dual_distribution(
    counts: dict[tuple[int, ...], int], partition: tuple[int, ...], k: int
) -> dict[tuple[int, ...], int]:
    """Dual code's multiweight distribution, S / 2^k (must divide exactly)."""
    S = split_transform(counts, partition)
    out = {}
    for b, s in S.items():
        q, r = divmod(s, 1 << k)
        if r:
            raise ValueError("transform value %d at %r not divisible by 2^%d"
                             % (s, b, k))
        out[b] = q
    return out


def admissible_totals(ct: CodeType, y_zero: frozenset[int] = frozenset()) -> set[int]:
    """Codeword weights not excluded by d, evenness, n and y_w = 0 facts."""
    totals = {0}
    for w in range(ct.d, ct.n + 1):
        if ct.even and w % 2:
            continue
        if w in y_zero:
            continue
        totals.add(w)
    return totals


class ConfigContradiction(Exception):
    """The configuration is inconsistent with the type and current facts;
    there is nothing to solve."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class ConstraintSystem:
    """Exact integer rows over the admissible multiweight variables.

    rels[i] is '>=' or '='; each row reads  coeffs[i] . x  rel  rhs[i].
    """

    partition: tuple[int, ...]
    variables: tuple[tuple[int, ...], ...]
    coeffs: np.ndarray  # int64, shape (rows, len(variables))
    rels: list[str]
    rhs: list[int]
    tags: list[str]

    @property
    def num_rows(self) -> int:
        return len(self.rels)

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    def var_index(self, a: tuple[int, ...]) -> int:
        try:
            return self.variables.index(a)
        except ValueError:
            raise KeyError("multiweight %r is not a variable of this system" % (a,))

    def row_ints(self, i: int) -> list[int]:
        return [int(c) for c in self.coeffs[i]]

    def with_row(self, coeffs: list[int], rel: str, rhs: int, tag: str) -> "ConstraintSystem":
        if len(coeffs) != self.num_vars:
            raise ValueError("coefficient count mismatch")
        new_coeffs = np.vstack([self.coeffs, np.asarray(coeffs, dtype=np.int64)])
        return ConstraintSystem(self.partition, self.variables, new_coeffs,
                                self.rels + [rel], self.rhs + [rhs],
                                self.tags + [tag])

    def serialize(self) -> str:
        """One row per line: tag, signed integer coefficients in variable
        order, relation, rhs.  Deterministic."""
        lines = []
        for i in range(self.num_rows):
            coeffs = " ".join(str(int(c)) for c in self.coeffs[i])
            lines.append("%s %s %s %d" % (self.tags[i], coeffs, self.rels[i], self.rhs[i]))
        return "\n".join(lines) + "\n"


def parse_system_rows(text: str) -> ConstraintSystem:
    """Inverse of ConstraintSystem.serialize (partition/variables are not
    recorded there, so placeholders are used)."""
    rows, rels, rhs, tags = [], [], [], []
    width = None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag, rel, r = parts[0], parts[-2], int(parts[-1])
        cs = [int(t) for t in parts[1:-2]]
        if rel not in (">=", "="):
            raise ValueError("bad relation %r" % rel)
        if width is None:
            width = len(cs)
        elif len(cs) != width:
            raise ValueError("ragged coefficient rows")
        rows.append(cs)
        rels.append(rel)
        rhs.append(r)
        tags.append(tag)
    if width is None:
        raise ValueError("no rows")
    variables = tuple((i,) for i in range(width))
    return ConstraintSystem((width,), variables,
                            np.asarray(rows, dtype=np.int64), rels, rhs, tags)


def _merged_context(ctx: ProofContext, cfg: Configuration) -> ProofContext:
    """Fold the configuration's side constraints into the fact sets."""
    y_zero, y_nonzero = set(ctx.y_zero), set(ctx.y_nonzero)
    mu_zero, mu_nonzero = set(ctx.mu_zero), set(ctx.mu_nonzero)
    x_nonzero = list(ctx.x_nonzero)
    x_zero = set(ctx.x_zero)
    for sc in ctx.code_type.constraints + cfg.constraints:
        w = sc.var.index[0] if sc.var.kind in ("y", "mu") else None
        zero = (sc.op, sc.value) == ("=", 0)
        nonzero = sc.op == "!=" and sc.value == 0 or sc.op == ">=" and sc.value >= 1
        if not (zero or nonzero):
            raise ConfigContradiction("unsupported side constraint %s" % sc)
        if sc.var.kind == "y":
            (y_zero if zero else y_nonzero).add(w)
        elif sc.var.kind == "mu":
            (mu_zero if zero else mu_nonzero).add(w)
        else:
            if len(sc.var.index) != cfg.r:
                raise ConfigContradiction(
                    "x constraint %s does not match partition arity" % sc)
            if zero:
                x_zero.add(sc.var.index)
            else:
                x_nonzero.append(frozenset([sc.var.index]))
    if y_zero & y_nonzero:
        raise ConfigContradiction("y facts contradictory at weights %s"
                                  % sorted(y_zero & y_nonzero))
    if mu_zero & mu_nonzero:
        raise ConfigContradiction("mu facts contradictory at weights %s"
                                  % sorted(mu_zero & mu_nonzero))
    return ProofContext(
        code_type=ctx.code_type, dual_min=ctx.dual_min,
        y_zero=frozenset(y_zero), y_nonzero=frozenset(y_nonzero),
        mu_zero=frozenset(mu_zero), mu_nonzero=frozenset(mu_nonzero),
        x_nonzero=tuple(frozenset(o) for o in x_nonzero),
        x_zero=frozenset(x_zero))


def build_constraint_system(
    ctx: ProofContext, cfg: Configuration,
    max_cells: int = MAX_SYSTEM_CELLS,
) -> ConstraintSystem:
    """Emit the full constraint system for a configuration under the
    current facts.  Raises ConfigContradiction when the configuration is
    already inconsistent (no system needed)."""
    ct = ctx.code_type
    p = cfg.partition
    if sum(p) != ct.n:
        raise ValueError("partition sums to %d, type length is %d" % (sum(p), ct.n))
    merged = _merged_context(ctx, cfg)
    totals = admissible_totals(ct, merged.y_zero)

    for w in merged.y_nonzero:
        if w not in totals:
            raise ConfigContradiction(
                "y%d != 0 required but weight %d is excluded" % (w, w))

    variables = tuple(a for a in iter_multiweights(p)
                      if sum(a) in totals and a not in merged.x_zero)
    var_pos = {a: i for i, a in enumerate(variables)}
    V = len(variables)

    # Words realized by the subcode span.
    sub_counts: dict[tuple[int, ...], int] = {}
    for bits in enumerate_span(cfg.row_matrix()):
        a = multiweight(BitWord(ct.n, bits), p)
        sub_counts[a] = sub_counts.get(a, 0) + 1
    for a in sub_counts:
        if a not in var_pos:
            raise ConfigContradiction(
                "subcode realizes multiweight %r of excluded weight %d"
                % (a, sum(a)))

    # Words realized by the span of the configuration's dual words.
    dual_counts: dict[tuple[int, ...], int] = {}
    for bits in enumerate_span(cfg.dual_row_matrix()):
        b = multiweight(BitWord(ct.n, bits), p)
        dual_counts[b] = dual_counts.get(b, 0) + 1
    for b in dual_counts:
        t = sum(b)
        if 0 < t < merged.dual_min:
            raise ConfigContradiction(
                "dual row realizes weight %d below proven dual minimum %d"
                % (t, merged.dual_min))
        if t in merged.mu_zero:
            raise ConfigContradiction(
                "dual row realizes weight %d but mu%d = 0" % (t, t))

    box = list(iter_multiweights(p))
    if len(box) * max(V, 1) > max_cells:
        raise CapacityError(
            "system of %d transform rows x %d variables exceeds cell cap"
            % (len(box), V))
    # Krawtchouk products are bounded by C(n, n // 2); int64 is exact below 2^62.
    if math.comb(ct.n, ct.n // 2) >= 1 << 62:
        raise CapacityError("length %d too large for exact int64 coefficients" % ct.n)

    rows: list[np.ndarray] = []
    rels: list[str] = []
    rhs: list[int] = []
    tags: list[str] = []

    def emit(coeffs: np.ndarray, rel: str, r: int, tag: str):
        rows.append(coeffs)
        rels.append(rel)
        rhs.append(r)
        tags.append(tag)

    def unit(a: tuple[int, ...]) -> np.ndarray:
        v = np.zeros(V, dtype=np.int64)
        v[var_pos[a]] = 1
        return v

    zero_mw = (0,) * len(p)
    emit(unit(zero_mw), "=", 1, "one")
    emit(np.ones(V, dtype=np.int64), "=", 1 << ct.k, "total")

    for a in sorted(sub_counts):
        emit(unit(a), ">=", sub_counts[a], "subcode:%s" % ",".join(map(str, a)))

    for w in sorted(merged.y_nonzero):
        v = np.zeros(V, dtype=np.int64)
        for a, i in var_pos.items():
            if sum(a) == w:
                v[i] = 1
        emit(v, ">=", 1, "ynz:%d" % w)

    for orbit in merged.x_nonzero:
        if any(len(a) != len(p) for a in orbit):
            continue  # fact from another partition; not expressible here
        live = [a for a in sorted(orbit) if a in var_pos]
        if not live:
            raise ConfigContradiction(
                "fact: some variable in orbit %s is nonzero, but all are excluded"
                % sorted(orbit))
        v = np.zeros(V, dtype=np.int64)
        for a in live:
            v[var_pos[a]] = 1
        emit(v, ">=", 1, "xnz:%s" % ";".join(",".join(map(str, a)) for a in sorted(orbit)))

    # Transform rows, one per multiweight index b of the box.
    tables = [np.asarray(krawtchouk_table(pi), dtype=np.int64) for pi in p]
    var_arr = np.asarray(variables, dtype=np.int64).reshape(V, len(p))
    box_arr = np.asarray(box, dtype=np.int64).reshape(len(box), len(p))
    tmat = np.ones((len(box), V), dtype=np.int64)
    for i in range(len(p)):
        tmat *= tables[i][box_arr[:, i][:, None], var_arr[:, i][None, :]]

    for bi, b in enumerate(box):
        t = sum(b)
        coeffs = tmat[bi]
        tag_b = ",".join(map(str, b))
        if 0 < t < merged.dual_min:
            emit(coeffs, "=", 0, "dualmin:%s" % tag_b)
        elif t in merged.mu_zero:
            emit(coeffs, "=", 0, "muzero:%s" % tag_b)
        elif b in dual_counts and t > 0:
            emit(coeffs, ">=", (1 << ct.k) * dual_counts[b], "dualrow:%s" % tag_b)
        else:
            emit(coeffs, ">=", 0, "transform:%s" % tag_b)

    for w in sorted(merged.mu_nonzero):
        sel = [bi for bi, b in enumerate(box) if sum(b) == w]
        if not sel:
            raise ConfigContradiction("mu%d != 0 required but no index has weight %d" % (w, w))
        emit(tmat[sel].sum(axis=0), ">=", 1 << ct.k, "munz:%d" % w)

    for a in variables:
        emit(unit(a), ">=", 0, "nonneg:%s" % ",".join(map(str, a)))

    # Simplification: drop rows that are identically zero on the surviving
    # variables, and exact duplicates of an earlier row.
    seen: set[bytes] = set()
    keep = []
    for i, coeffs in enumerate(rows):
        if not coeffs.any():
            if rels[i] == ">=" and rhs[i] > 0 or rels[i] == "=" and rhs[i] != 0:
                raise ConfigContradiction("row %s is 0 %s %d" % (tags[i], rels[i], rhs[i]))
            continue
        key = coeffs.tobytes() + b"|" + rels[i].encode() + b"|" + str(rhs[i]).encode()
        if key in seen:
            continue
        seen.add(key)
        keep.append(i)

    return ConstraintSystem(
        partition=p,
        variables=variables,
        coeffs=np.vstack([rows[i] for i in keep]) if keep else np.zeros((0, V), dtype=np.int64),
        rels=[rels[i] for i in keep],
        rhs=[rhs[i] for i in keep],
        tags=[tags[i] for i in keep],
    )
