"""Floating-point feasibility solving plus exact Farkas certification.

The float side is a dense phase-1 simplex (Bland's rule, deterministic).
Nothing proved ever depends on it: an infeasibility claim only becomes a
fact after verify_farkas has checked the rational multiplier vector
against the integer constraint rows in exact arithmetic.

Variables that carry an explicit  x_j >= 0  row (the builder emits one
per variable) are treated as nonnegative inside the solver; their rows
stay out of the tableau and their multipliers are reconstructed exactly
during certificate assembly, which absorbs all rounding slack on those
columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .enumerator import ConstraintSystem

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7


@dataclass(frozen=True)
class FarkasCertificate:
    """Multipliers (one per constraint row) whose exact combination is the
    contradiction 0 >= combined_rhs > 0."""

    multipliers: tuple[Fraction, ...]
    combined_rhs: Fraction


@dataclass
class SolveOutcome:
    status: str  # 'feasible' | 'infeasible_candidate' | 'inconclusive'
    point: np.ndarray | None = None
    multipliers: np.ndarray | None = None  # one per original row
    iterations: int = 0
    residual: float = 0.0
    gap: float = 0.0


@dataclass(frozen=True)
class RetryPolicy:
    denominators: tuple[int, ...] = (1, 1000, 10 ** 6, 10 ** 9)
    exact_resolve: bool = True
    max_iterations: int = 200_000
    tol: float = FEAS_TOL


class CertificationFailed(Exception):
    """No exactly-verified certificate could be produced.  When the float
    phase found a point that checks out exactly, it is attached as
    `feasible_point` (the system is then provably feasible)."""

    def __init__(self, message: str, outcome: SolveOutcome | None = None,
                 feasible_point: tuple[Fraction, ...] | None = None):
        super().__init__(message)
        self.outcome = outcome
        self.feasible_point = feasible_point


def _bound_rows(cs: ConstraintSystem) -> dict[int, int]:
    """Map var index -> row index of its  x_j >= 0  row (first one wins)."""
    out: dict[int, int] = {}
    for i in range(cs.num_rows):
        if cs.rels[i] != ">=" or cs.rhs[i] != 0:
            continue
        row = cs.coeffs[i]
        nz = np.nonzero(row)[0]
        if len(nz) == 1 and row[nz[0]] == 1:
            out.setdefault(int(nz[0]), i)
    return out


ENTER_TOL = 1e-7
STALL_LIMIT = 300  # iterations without objective progress before Bland mode


def solve_feasibility(cs: ConstraintSystem,
                      max_iterations: int = 200_000) -> SolveOutcome:
    """Phase-1 dense simplex on the feasibility problem.

    Deterministic: fixed column order; most-negative-reduced-cost pivoting
    with a largest-pivot ratio tie-break, falling back to Bland's rule
    after a degenerate stall (both rules are index-deterministic).  The
    reduced-cost row is recomputed from the artificial basis rows every
    iteration, so pivot decisions do not ride on accumulated drift.  On
    detected infeasibility the returned multipliers are the phase-1 duals
    mapped back to the original rows (candidates only; nothing is trusted
    until exact verification).
    """
    m_all, nvars = cs.num_rows, cs.num_vars
    if m_all == 0:
        raise ValueError("empty system")
    bounds = _bound_rows(cs)
    bound_row_set = set(bounds.values())
    general = [i for i in range(m_all) if i not in bound_row_set]

    A = cs.coeffs[general].astype(np.float64)
    b = np.array([float(cs.rhs[i]) for i in general])
    ge = np.array([cs.rels[i] == ">=" for i in general])
    m = len(general)

    # Power-of-two row/column scaling keeps the float data exact while
    # conditioning the tableau.
    scale = np.ones(m)
    for i in range(m):
        mx = max(np.max(np.abs(A[i])), abs(b[i]), 1.0)
        scale[i] = 2.0 ** math.ceil(math.log2(mx))
    A /= scale[:, None]
    b /= scale
    colscale = np.ones(nvars)
    for j in range(nvars):
        mx = np.max(np.abs(A[:, j]))
        if mx > 0:
            colscale[j] = 2.0 ** math.ceil(math.log2(mx))
    A /= colscale[None, :]

    # Orient rows so every right-hand side is nonnegative.
    flip = np.ones(m)
    for i in range(m):
        if (ge[i] and b[i] <= 0) or (not ge[i] and b[i] < 0):
            flip[i] = -1.0
    A *= flip[:, None]
    b *= flip

    free = [j for j in range(nvars) if j not in bounds]
    # Columns: nonneg vars, then (+,-) pairs for free vars, then one slack
    # or surplus per >=-row, then artificials where the start basis needs
    # them.
    col_meta: list[tuple] = []
    cols: list[np.ndarray] = []
    for j in range(nvars):
        if j in bounds:
            col_meta.append(("x", j, 1.0))
            cols.append(A[:, j])
    for j in free:
        col_meta.append(("x", j, 1.0))
        cols.append(A[:, j])
        col_meta.append(("x", j, -1.0))
        cols.append(-A[:, j])
    slack_col = {}
    art_col = {}
    basis = [-1] * m
    for i in range(m):
        if ge[i]:
            v = np.zeros(m)
            # flipped >= rows became <= rows: slack +1; unflipped keep a
            # surplus -1 and need an artificial below.
            v[i] = 1.0 if flip[i] < 0 else -1.0
            slack_col[i] = len(cols)
            col_meta.append(("slack", i))
            cols.append(v)
    for i in range(m):
        needs_art = (not ge[i]) or flip[i] > 0
        if needs_art:
            v = np.zeros(m)
            v[i] = 1.0
            art_col[i] = len(cols)
            col_meta.append(("art", i))
            cols.append(v)
            basis[i] = art_col[i]
        else:
            basis[i] = slack_col[i]

    ncols = len(cols)
    T = np.empty((m + 1, ncols + 1))
    for c, v in enumerate(cols):
        T[:m, c] = v
    T[:m, ncols] = b
    obj = np.zeros(ncols + 1)
    for i, c in art_col.items():
        obj[c] = 1.0
    is_art = np.zeros(ncols, dtype=bool)
    for c in art_col.values():
        is_art[c] = True
    basis_arr = np.asarray(basis, dtype=np.int64)

    def refresh_objective():
        # reduced costs = c - c_B B^-1 A; only artificial basics cost 1.
        T[m] = obj
        sel = is_art[basis_arr]
        if sel.any():
            T[m] -= T[:m][sel].sum(axis=0)

    refresh_objective()
    iterations = 0
    bland = False
    stall = 0
    last_obj = T[m, ncols]
    while iterations < max_iterations:
        # Artificial columns never re-enter the basis.
        red = np.where(is_art, np.inf, T[m, :ncols])
        if bland:
            neg = np.where(red < -PIVOT_TOL)[0]
            if len(neg) == 0:
                break
            enter = int(neg[0])
        else:
            enter = int(np.argmin(red))
            if red[enter] >= -ENTER_TOL:
                break
        col = T[:m, enter]
        cand = np.where(col > PIVOT_TOL)[0]
        if len(cand) == 0:
            return SolveOutcome(status="inconclusive", iterations=iterations)
        ratios = T[cand, ncols] / col[cand]
        rmin = float(np.min(ratios))
        near = cand[ratios <= rmin + PIVOT_TOL * (1.0 + abs(rmin))]
        if bland:
            leave = int(near[np.argmin(basis_arr[near])])
        else:
            leave = int(near[np.argmax(col[near])])
        piv = T[leave, enter]
        T[leave] /= piv
        col_vals = T[:m, enter].copy()
        col_vals[leave] = 0.0
        T[:m] -= np.outer(col_vals, T[leave])
        T[:m, enter] = 0.0
        T[leave, enter] = 1.0
        basis_arr[leave] = enter
        refresh_objective()
        iterations += 1
        cur_obj = T[m, ncols]
        if cur_obj > last_obj + 1e-12:
            stall = 0
            bland = False
        else:
            stall += 1
            if stall >= STALL_LIMIT:
                bland = True
        last_obj = max(last_obj, cur_obj)
    else:
        return SolveOutcome(status="inconclusive", iterations=iterations)

    gap = -T[m, ncols]  # phase-1 optimum

    # Duals for the transformed rows, then mapped back to original rows.
    yprime = np.zeros(m)
    for i in range(m):
        if i in art_col:
            yprime[i] = 1.0 - T[m, art_col[i]]
        else:
            yprime[i] = -T[m, slack_col[i]]
    lam = np.zeros(m_all)
    for gi, i in enumerate(general):
        lam[i] = yprime[gi] * flip[gi] / scale[gi]
    combined = lam[general] @ cs.coeffs[general].astype(np.float64)
    for j, ri in bounds.items():
        lam[ri] = -combined[j]

    if gap > FEAS_TOL:
        return SolveOutcome(status="infeasible_candidate", multipliers=lam,
                            iterations=iterations, gap=float(gap))

    # Extract the point (undo the column scaling).
    x = np.zeros(nvars)
    for i in range(m):
        kind = col_meta[basis_arr[i]]
        if kind[0] == "x":
            x[kind[1]] += kind[2] * T[i, ncols]
    x /= colscale
    resid = _float_residual(cs, x)
    return SolveOutcome(status="feasible", point=x, iterations=iterations,
                        residual=resid, gap=float(gap))


def _float_residual(cs: ConstraintSystem, x: np.ndarray) -> float:
    vals = cs.coeffs.astype(np.float64) @ x
    worst = 0.0
    for i in range(cs.num_rows):
        diff = vals[i] - cs.rhs[i]
        viol = abs(diff) if cs.rels[i] == "=" else max(0.0, -diff)
        rowscale = max(1.0, float(np.max(np.abs(cs.coeffs[i]))))
        worst = max(worst, viol / rowscale)
    return worst


def rationalize(values, max_denominator: int, ge_mask=None,
                tol: float = FEAS_TOL) -> list[Fraction]:
    """Best rational approximations with bounded denominator; values on
    >=-rows within tol of zero are clamped to 0 (never negative)."""
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    out = []
    for i, v in enumerate(values):
        ge = ge_mask[i] if ge_mask is not None else False
        if ge and v < tol:
            out.append(Fraction(0))
            continue
        out.append(Fraction(v).limit_denominator(max_denominator))
    return out


def verify_farkas(cs: ConstraintSystem, cert: FarkasCertificate) -> bool:
    """Exact check: sign conditions, zero combined coefficients, positive
    combined right-hand side.  No floating arithmetic."""
    lam = cert.multipliers
    if len(lam) != cs.num_rows:
        raise ValueError("certificate has %d multipliers for %d rows"
                         % (len(lam), cs.num_rows))
    combined_rhs = Fraction(0)
    combined = [Fraction(0)] * cs.num_vars
    for i, mult in enumerate(lam):
        if mult == 0:
            continue
        if cs.rels[i] == ">=" and mult < 0:
            return False
        row = cs.coeffs[i]
        for j in np.nonzero(row)[0]:
            combined[j] += mult * int(row[j])
        combined_rhs += mult * cs.rhs[i]
    if any(c != 0 for c in combined):
        return False
    if combined_rhs <= 0:
        return False
    return combined_rhs == cert.combined_rhs


@dataclass
class CertificationResult:
    certificate: FarkasCertificate
    outcome: SolveOutcome
    method: str  # 'denominator:<d>' or 'exact-resolve'


def _assemble(cs: ConstraintSystem, general: list[int],
              lam_general: list[Fraction],
              bounds: dict[int, int]) -> FarkasCertificate | None:
    """Lift rational multipliers on the general rows to a full certificate,
    choosing the bound-row multipliers exactly.  Returns None when the
    combination cannot cancel."""
    combined = [Fraction(0)] * cs.num_vars
    combined_rhs = Fraction(0)
    full = [Fraction(0)] * cs.num_rows
    for gi, i in enumerate(general):
        mult = lam_general[gi]
        if mult == 0:
            continue
        if cs.rels[i] == ">=" and mult < 0:
            return None
        full[i] = mult
        row = cs.coeffs[i]
        for j in np.nonzero(row)[0]:
            combined[j] += mult * int(row[j])
        combined_rhs += mult * cs.rhs[i]
    for j in range(cs.num_vars):
        if j in bounds:
            if combined[j] > 0:
                return None
            full[bounds[j]] = -combined[j]
        elif combined[j] != 0:
            return None
    if combined_rhs <= 0:
        return None
    return FarkasCertificate(tuple(full), combined_rhs)


def _exact_resolve(cs: ConstraintSystem, general: list[int],
                   lam_float: np.ndarray, bounds: dict[int, int],
                   support_tol: float = 1e-11) -> FarkasCertificate | None:
    """Last repair rung: exact rational elimination on the dual subsystem
    restricted to the rows the float solve actually used."""
    support = [i for i in general if abs(lam_float[i]) > support_tol]
    if not support:
        return None
    cols_rows = {}  # var -> list of (support position, coeff)
    for pos, i in enumerate(support):
        row = cs.coeffs[i]
        for j in np.nonzero(row)[0]:
            cols_rows.setdefault(int(j), []).append((pos, int(row[j])))

    # Float combination tells us which bounded columns are tight.
    combined_f = np.zeros(cs.num_vars)
    for i in support:
        combined_f += lam_float[i] * cs.coeffs[i].astype(np.float64)
    colmax = np.maximum(np.max(np.abs(cs.coeffs), axis=0), 1).astype(np.float64)
    eq_cols = []
    for j in sorted(cols_rows):
        if j not in bounds or abs(combined_f[j]) <= 1e-6 * colmax[j]:
            eq_cols.append(j)

    t = len(support)
    # Equations over the support multipliers: normalization first, then
    # exact cancellation on each tight column.
    equations: list[list[Fraction]] = []
    norm = [Fraction(cs.rhs[i]) for i in support] + [Fraction(1)]
    equations.append(norm)
    for j in eq_cols:
        row = [Fraction(0)] * t + [Fraction(0)]
        for pos, c in cols_rows[j]:
            row[pos] = Fraction(c)
        equations.append(row)

    # Incremental RREF with at most t pivot rows.
    pivots: list[tuple[int, list[Fraction]]] = []
    for eq in equations:
        for pc, prow in pivots:
            if eq[pc] != 0:
                f = eq[pc]
                eq = [a - f * b for a, b in zip(eq, prow)]
        lead = next((idx for idx in range(t) if eq[idx] != 0), None)
        if lead is None:
            if eq[t] != 0:
                return None  # inconsistent
            continue
        inv = Fraction(1) / eq[lead]
        eq = [a * inv for a in eq]
        for k, (pc, prow) in enumerate(pivots):
            if prow[lead] != 0:
                f = prow[lead]
                pivots[k] = (pc, [a - f * b for a, b in zip(prow, eq)])
        pivots.append((lead, eq))
        if len(pivots) == t:
            # Unique solution; remaining equations only need checking,
            # which the final verify pass does anyway.
            break

    sol = [Fraction(0)] * t
    for pc, prow in pivots:
        sol[pc] = prow[t]
    lam_general = [Fraction(0)] * len(general)
    pos_of = {i: gi for gi, i in enumerate(general)}
    for pos, i in enumerate(support):
        lam_general[pos_of[i]] = sol[pos]
    return _assemble(cs, general, lam_general, bounds)


def prove_infeasible(cs: ConstraintSystem,
                     policy: RetryPolicy = RetryPolicy()) -> CertificationResult:
    """solve -> rationalize (escalating denominators) -> verify.

    Returns the first exactly-verified certificate.  Raises
    CertificationFailed otherwise; if the solver found a point that
    satisfies every row exactly, the failure carries it as proof of
    feasibility.
    """
    outcome = solve_feasibility(cs, max_iterations=policy.max_iterations)
    bounds = _bound_rows(cs)
    bound_row_set = set(bounds.values())
    general = [i for i in range(cs.num_rows) if i not in bound_row_set]

    if outcome.status == "feasible":
        point = _exact_point(cs, outcome.point, policy)
        if point is not None:
            raise CertificationFailed(
                "system is feasible (exactly verified point)",
                outcome=outcome, feasible_point=point)
        raise CertificationFailed(
            "float solve reports feasible; no exact conclusion",
            outcome=outcome)
    if outcome.status == "inconclusive":
        raise CertificationFailed("iteration limit exceeded", outcome=outcome)

    lam = outcome.multipliers
    ge_mask = [cs.rels[i] == ">=" for i in general]
    gap = float(sum(lam[i] * cs.rhs[i] for i in range(cs.num_rows)))
    candidates = []
    if gap > 0:
        candidates.append(lam / gap)
    mx = float(np.max(np.abs(lam[general]))) if general else 0.0
    if mx > 0:
        candidates.append(lam / mx)
    for scaled in candidates:
        for denom in policy.denominators:
            lam_q = rationalize([float(scaled[i]) for i in general],
                                denom, ge_mask, tol=policy.tol)
            cert = _assemble(cs, general, lam_q, bounds)
            if cert is not None and verify_farkas(cs, cert):
                return CertificationResult(cert, outcome, "denominator:%d" % denom)
    if policy.exact_resolve:
        cert = _exact_resolve(cs, general, lam, bounds)
        if cert is not None and verify_farkas(cs, cert):
            return CertificationResult(cert, outcome, "exact-resolve")
    raise CertificationFailed("could not certify infeasibility", outcome=outcome)


def _exact_point(cs: ConstraintSystem, x: np.ndarray,
                 policy: RetryPolicy) -> tuple[Fraction, ...] | None:
    for denom in policy.denominators:
        pt = [Fraction(float(v)).limit_denominator(denom) for v in x]
        if check_point(cs, pt):
            return tuple(pt)
    return None


def check_point(cs: ConstraintSystem, point) -> bool:
    """Exact substitution of a rational point into every row."""
    if len(point) != cs.num_vars:
        raise ValueError("point arity mismatch")
    for i in range(cs.num_rows):
        row = cs.coeffs[i]
        val = sum(Fraction(point[j]) * int(row[j]) for j in np.nonzero(row)[0])
        if cs.rels[i] == "=" and val != cs.rhs[i]:
            return False
        if cs.rels[i] == ">=" and val < cs.rhs[i]:
            return False
    return True


# -- certificate files --------------------------------------------------

def write_certificate(path, node_id: str, cs: ConstraintSystem,
                      cert: FarkasCertificate) -> None:
    """System rows followed by the certificate block; the whole file can
    be re-verified with exact arithmetic only."""
    with open(path, "w") as fh:
        fh.write("# infeasibility certificate\n")
        fh.write("# vars: %s\n" % " ".join(
            "x_" + "_".join(map(str, a)) for a in cs.variables))
        fh.write("SYSTEM rows=%d vars=%d\n" % (cs.num_rows, cs.num_vars))
        fh.write(cs.serialize())
        fh.write("CERT %s rows=%d\n" % (node_id, cs.num_rows))
        for i, mult in enumerate(cert.multipliers):
            if mult != 0:
                fh.write("%d %d/%d\n" % (i, mult.numerator, mult.denominator))
        fh.write("CONTRADICTION 0 >= %d/%d\n"
                 % (cert.combined_rhs.numerator, cert.combined_rhs.denominator))


def read_certificate(path) -> tuple[str, ConstraintSystem, FarkasCertificate]:
    from .enumerator import parse_system_rows

    with open(path) as fh:
        lines = fh.read().splitlines()
    i = 0
    while i < len(lines) and not lines[i].startswith("SYSTEM "):
        i += 1
    if i == len(lines):
        raise ValueError("%s: missing SYSTEM header" % path)
    header = dict(kv.split("=") for kv in lines[i].split()[1:])
    nrows = int(header["rows"])
    sys_text = "\n".join(lines[i + 1:i + 1 + nrows])
    cs = parse_system_rows(sys_text)
    if cs.num_rows != nrows:
        raise ValueError("%s: row count mismatch" % path)
    j = i + 1 + nrows
    if j >= len(lines) or not lines[j].startswith("CERT "):
        raise ValueError("%s: missing CERT header" % path)
    node_id = lines[j].split()[1]
    mults = [Fraction(0)] * nrows
    rhs = None
    for line in lines[j + 1:]:
        if line.startswith("CONTRADICTION"):
            rhs = Fraction(line.split()[-1])
            break
        idx, frac = line.split()
        mults[int(idx)] = Fraction(frac)
    if rhs is None:
        raise ValueError("%s: missing CONTRADICTION line" % path)
    return node_id, cs, FarkasCertificate(tuple(mults), rhs)
