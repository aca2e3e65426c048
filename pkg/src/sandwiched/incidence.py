"""Incidence matrices of picture deformations.

An incidence matrix records, for each branch (row) and each decoration
point of the deformed curve (column), the multiplicity of the point on
the deformed disc.  It is well defined only up to column permutation,
so matrices are kept in a canonical form: columns sorted in
non-increasing lexicographic order with the fixed row order.

Three exact constraints cut out the candidate set for a germ:

    sum_j m_ij (m_ij - 1) / 2 = delta_i          (one ordinary point each)
    sum_j m_ij m_kj           = X_ik   (i != k)  (intersection numbers)
    sum_j m_ij                = l_i              (length of the decoration)

enumerate_matrices produces every solution exactly once per
column-permutation class by orderly generation: columns are appended in
non-increasing canonical order under exact row/pair budget pruning.

For germs that are unions of concurrent pairwise-transverse lines, a
further oracle decides whether a 0/1 matrix is realizable by translating
lines of prescribed slopes: concurrency conditions are exact rational
linear algebra, and the required genericity ("no further coincidences")
is certified by sampling random rational points of the solution space
and checking every degeneracy form exactly.
"""

import random
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt

from . import germs as germs_mod
from .exactla import nullspace, solve_homogeneous_sample
from .germs import GermError, ParseError


class MatrixError(GermError):
    pass


class ZeroColumn(MatrixError):
    pass


class NegativeEntry(MatrixError):
    pass


class PreconditionViolated(MatrixError):
    pass


@dataclass(frozen=True)
class ConstraintSet:
    """Right-hand sides of the three constraint families for one germ."""

    nbranches: int
    delta: tuple
    lengths: tuple
    cross: tuple  # symmetric, diagonal unused (0)

    def __post_init__(self):
        r = self.nbranches
        if len(self.delta) != r or len(self.lengths) != r or len(self.cross) != r:
            raise ValueError("constraint set dimensions disagree")


def constraints_of(germ):
    inv = germs_mod.germ_invariants(germ)
    return ConstraintSet(
        nbranches=germ.nbranches,
        delta=inv.delta,
        lengths=tuple(germ.lengths),
        cross=inv.intersections,
    )


@dataclass(frozen=True)
class IncidenceMatrix:
    """Non-negative integer matrix stored row-major; columns may be unsorted."""

    rows: tuple

    def __init__(self, rows):
        object.__setattr__(
            self, "rows", tuple(tuple(int(x) for x in row) for row in rows)
        )
        if self.rows:
            width = len(self.rows[0])
            if any(len(row) != width for row in self.rows):
                raise ValueError("ragged matrix")

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def columns(self):
        return tuple(zip(*self.rows)) if self.rows else ()

    @classmethod
    def from_columns(cls, cols, nrows):
        if not cols:
            return cls([() for _ in range(nrows)])
        return cls(tuple(zip(*cols)))

    def __lt__(self, other):
        return self.rows < other.rows


def canonicalize(matrix):
    """Sort columns in non-increasing lexicographic order (idempotent)."""
    cols = sorted(matrix.columns(), reverse=True)
    return IncidenceMatrix.from_columns(cols, matrix.nrows)


def is_canonical(matrix):
    cols = matrix.columns()
    return all(a >= b for a, b in zip(cols, cols[1:]))


@dataclass(frozen=True)
class MatrixVerdict:
    ok: bool
    violations: tuple


def validate_matrix(matrix, cs):
    """Check the three constraint families exactly.

    Structural defects (negative entries, zero columns, wrong row count)
    raise; constraint violations are listed in the verdict row by row.
    """
    if matrix.nrows != cs.nbranches:
        raise MatrixError(
            f"matrix has {matrix.nrows} rows, constraints expect {cs.nbranches}"
        )
    for row in matrix.rows:
        for x in row:
            if x < 0:
                raise NegativeEntry(f"negative entry {x}")
    for j, col in enumerate(matrix.columns()):
        if not any(col):
            raise ZeroColumn(f"column {j} is zero")
    violations = []
    for i, row in enumerate(matrix.rows, start=1):
        d = sum(x * (x - 1) // 2 for x in row)
        if d != cs.delta[i - 1]:
            violations.append(f"row {i}: ordinary-point sum {d} != delta {cs.delta[i - 1]}")
        s = sum(row)
        if s != cs.lengths[i - 1]:
            violations.append(f"row {i}: sum {s} != length {cs.lengths[i - 1]}")
    for i in range(cs.nbranches):
        for k in range(i + 1, cs.nbranches):
            dot = sum(a * b for a, b in zip(matrix.rows[i], matrix.rows[k]))
            if dot != cs.cross[i][k]:
                violations.append(
                    f"rows {i + 1},{k + 1}: dot {dot} != intersection {cs.cross[i][k]}"
                )
    return MatrixVerdict(ok=not violations, violations=tuple(violations))


def _max_entry_for_delta(d):
    # largest v with v(v-1)/2 <= d
    return (1 + isqrt(1 + 8 * d)) // 2


def _exists_column(ub, caps, need):
    """Is there a column v <= ub (lex), v <= caps entrywise, v_j >= need[j]?

    Used as an exact reachability prune: once the lex bound rules out
    every column that could feed a still-positive budget, the branch is
    dead.  Pairwise product caps are deliberately ignored here; this is a
    necessary condition only.
    """
    r = len(ub)

    def free_ok(j):
        return all(caps[t] >= need.get(t, 0) for t in range(j, r))

    def rec(j):
        # prefix [0..j) equals ub and satisfied all needs there
        if j == r:
            return True
        lo = need.get(j, 0)
        # break strictly below ub at position j
        if min(caps[j], ub[j] - 1) >= lo and free_ok(j + 1):
            return True
        # stay tight
        if caps[j] >= ub[j] >= lo:
            return rec(j + 1)
        return False

    return rec(0)


def _descending_columns(upper, caps, cross_caps, r):
    """All nonzero columns v <= upper (lexicographically), entries within caps.

    Emitted in strictly decreasing lexicographic order starting from
    `upper` itself, respecting per-row caps and pairwise product caps.
    """
    out = []
    col = [0] * r

    def fill(pos, tight):
        if pos == r:
            if any(col):
                out.append(tuple(col))
            return
        hi = min(caps[pos], upper[pos] if tight else caps[pos])
        for v in range(hi, -1, -1):
            ok = True
            if v:
                for q in range(pos):
                    if col[q] and col[q] * v > cross_caps[q][pos]:
                        ok = False
                        break
            if not ok:
                continue
            col[pos] = v
            fill(pos + 1, tight and v == upper[pos])
            col[pos] = 0

    fill(0, True)
    return out


def _enumerate_with_upper(cs, upper):
    """Orderly generation with every column bounded above by `upper`."""
    r = cs.nbranches
    rem_l = list(cs.lengths)
    rem_d = list(cs.delta)
    rem_x = [[cs.cross[i][k] for k in range(r)] for i in range(r)]
    if any(x < 0 for x in rem_l) or any(x < 0 for x in rem_d):
        return ()
    if any(rem_x[i][k] < 0 for i in range(r) for k in range(i + 1, r)):
        return ()

    results = []

    def feasible(ub):
        caps = tuple(min(rem_l[i], _max_entry_for_delta(rem_d[i])) for i in range(r))
        for i in range(r):
            if rem_d[i] > rem_l[i] * (rem_l[i] - 1) // 2:
                return False
            if rem_l[i] > 0 and not _exists_column(ub, caps, {i: 1}):
                return False
            if rem_d[i] > 0 and not _exists_column(ub, caps, {i: 2}):
                return False
            for k in range(i + 1, r):
                if rem_x[i][k] > rem_l[i] * rem_l[k]:
                    return False
                if rem_x[i][k] > 0 and not _exists_column(ub, caps, {i: 1, k: 1}):
                    return False
        return True

    def consume(col, sign):
        for i in range(r):
            v = col[i]
            if not v:
                continue
            rem_l[i] -= sign * v
            rem_d[i] -= sign * (v * (v - 1) // 2)
            for k in range(i + 1, r):
                if col[k]:
                    rem_x[i][k] -= sign * v * col[k]

    def extend(prefix, ub):
        if all(x == 0 for x in rem_l):
            if all(x == 0 for x in rem_d) and all(
                rem_x[i][k] == 0 for i in range(r) for k in range(i + 1, r)
            ):
                results.append(IncidenceMatrix.from_columns(tuple(prefix), r))
            return
        if not feasible(ub):
            return
        caps = tuple(min(rem_l[i], _max_entry_for_delta(rem_d[i])) for i in range(r))
        for col in _descending_columns(ub, caps, rem_x, r):
            consume(col, +1)
            prefix.append(col)
            extend(prefix, col)
            prefix.pop()
            consume(col, -1)

    extend([], upper)
    return tuple(sorted(results))


def enumerate_matrices(cs, jobs=1):
    """All constraint solutions, one canonical representative per class.

    Orderly generation: columns are appended in non-increasing canonical
    order; budgets for row sums, ordinary-point counts and pairwise
    products are tracked exactly, so a prefix is pruned as soon as any
    budget is violated or provably unreachable.  An infeasible constraint
    set yields an empty tuple, not an error.

    jobs > 1 fans the first-column subtrees out to a process pool; the
    workers are stateless and the merged result is sorted, so the output
    is identical for every job count.
    """
    r = cs.nbranches
    top = tuple(
        min(cs.lengths[i], _max_entry_for_delta(cs.delta[i])) for i in range(r)
    )
    if jobs <= 1:
        return _enumerate_with_upper(cs, top)

    from concurrent.futures import ProcessPoolExecutor

    firsts = _descending_columns(
        top, top, [[cs.cross[i][k] for k in range(r)] for i in range(r)], r
    )
    tasks = [(cs, first) for first in firsts]
    results = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for chunk in pool.map(_subtree_task, tasks, chunksize=4):
            results.extend(chunk)
    return tuple(sorted(results))


def _after_first_column(cs, col):
    r = cs.nbranches
    delta = tuple(cs.delta[i] - col[i] * (col[i] - 1) // 2 for i in range(r))
    lengths = tuple(cs.lengths[i] - col[i] for i in range(r))
    cross = tuple(
        tuple(
            cs.cross[i][k] - col[i] * col[k] if i != k else 0 for k in range(r)
        )
        for i in range(r)
    )
    return ConstraintSet(r, delta, lengths, cross)


def _subtree_task(args):
    cs, first = args
    rest = _after_first_column(cs, first)
    return [
        IncidenceMatrix.from_columns((first,) + m.columns(), cs.nbranches)
        for m in _enumerate_with_upper(rest, first)
    ]


# ---------------------------------------------------------------------------
# realizability by translated concurrent lines
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RealizabilityVerdict:
    realizable: bool
    offsets: tuple  # witness line offsets (Fractions) when realizable
    points: tuple  # witness concurrency points, aligned with multi-columns
    samples_used: int


def _check_line_preconditions(matrix, slopes):
    r = matrix.nrows
    if len(slopes) != r:
        raise PreconditionViolated("one slope per branch required")
    if len(set(slopes)) != r:
        raise PreconditionViolated("slopes must be pairwise distinct")
    for row in matrix.rows:
        for x in row:
            if x not in (0, 1):
                raise PreconditionViolated(
                    "entries must be 0/1 (smooth branches, delta = 0)"
                )
    for i in range(r):
        for k in range(i + 1, r):
            dot = sum(a * b for a, b in zip(matrix.rows[i], matrix.rows[k]))
            if dot != 1:
                raise PreconditionViolated(
                    "rows must pairwise share exactly one column "
                    "(pairwise transverse concurrent lines)"
                )


def realizable_by_translated_lines(matrix, slopes, samples=5, seed=0):
    """Decide realizability of a 0/1 incidence pattern by translated lines.

    The lines are y = a_i x + b_i with the given pairwise distinct
    rational slopes a_i; the offsets b_i are the unknowns.  Each column
    with at least two marked rows imposes exact linear concurrency
    conditions; "and nothing more" (all concurrency points distinct, no
    further line through any of them) is checked at `samples` random
    rational points of the rational solution space.

    A "realizable" verdict is certified by the returned exact witness.
    A "not realizable" verdict holds with probability at least
    1 - (D / 2_000_001) ** samples over the sampler's coin flips, where D
    counts the degeneracy forms (at most one per (point, line) and
    (point, point) pair); when the pattern is truly unrealizable some
    degeneracy form vanishes on the whole solution space, so every sample
    fails and the verdict is certain.
    """
    slopes = tuple(Fraction(a) for a in slopes)
    _check_line_preconditions(matrix, slopes)
    r = matrix.nrows
    cols = matrix.columns()
    multi = [
        tuple(i for i in range(r) if col[i]) for col in cols if sum(col) >= 2
    ]
    nb = r
    nunk = nb + 2 * len(multi)

    rows = []
    for j, support in enumerate(multi):
        xj = nb + 2 * j
        yj = xj + 1
        for i in support:
            row = [Fraction(0)] * nunk
            row[i] = Fraction(1)
            row[xj] = slopes[i]
            row[yj] = Fraction(-1)
            rows.append(row)

    basis = nullspace(rows, nunk) if rows else [
        [Fraction(1) if t == s else Fraction(0) for t in range(nunk)]
        for s in range(nunk)
    ]

    degeneracies = _degeneracy_forms(multi, slopes, nb)
    rng = random.Random(seed)
    span = 1_000_000
    for attempt in range(1, samples + 1):
        coeffs = [Fraction(rng.randint(-span, span)) for _ in basis]
        point = solve_homogeneous_sample(basis, coeffs)
        if not point:
            point = [Fraction(0)] * nunk
        if all(_evaluate_form(form, point) != 0 for form in degeneracies):
            offsets = tuple(point[:nb])
            pts = tuple(
                (point[nb + 2 * j], point[nb + 2 * j + 1]) for j in range(len(multi))
            )
            _verify_witness(matrix, slopes, offsets, multi, pts)
            return RealizabilityVerdict(True, offsets, pts, attempt)
    return RealizabilityVerdict(False, (), (), samples)


def _degeneracy_forms(multi, slopes, nb):
    """Linear forms whose simultaneous avoidance certifies genericity.

    For points j < j': the pair collapses only if both coordinate
    differences vanish, so the pair contributes the form (x_j - x_j')
    unless that difference is forced to vanish on the solution space, in
    which case distinctness hangs on (y_j - y_j') alone.  Rather than
    decide forcing, both pairs of forms are combined: the degeneracy is
    avoided iff at least one of the two differences is nonzero, encoded
    as a composite form evaluated disjunctively.
    """
    forms = []
    for j in range(len(multi)):
        xj = nb + 2 * j
        yj = xj + 1
        for jp in range(j + 1, len(multi)):
            xp = nb + 2 * jp
            yp = xp + 1
            forms.append(("pair", (xj, xp), (yj, yp)))
        support = set(multi[j])
        for i in range(nb):
            if i not in support:
                forms.append(("online", i, (xj, yj), slopes[i]))
    return forms


def _evaluate_form(form, point):
    if form[0] == "pair":
        (xj, xp), (yj, yp) = form[1], form[2]
        dx = point[xj] - point[xp]
        dy = point[yj] - point[yp]
        return 1 if (dx != 0 or dy != 0) else 0
    _, i, (xj, yj), slope = form
    return point[yj] - slope * point[xj] - point[i]


def _verify_witness(matrix, slopes, offsets, multi, pts):
    for support, (x, y) in zip(multi, pts):
        for i in support:
            if y != slopes[i] * x + offsets[i]:
                raise AssertionError("witness fails a concurrency condition")
    for a in range(len(pts)):
        for b in range(a + 1, len(pts)):
            if pts[a] == pts[b]:
                raise AssertionError("witness collapses two concurrency points")
    for j, (x, y) in enumerate(pts):
        support = set(multi[j])
        for i in range(len(slopes)):
            if i not in support and y == slopes[i] * x + offsets[i]:
                raise AssertionError("witness puts an extra line through a point")


def enumerate_realizable(cs, slopes, samples=5, seed=0, jobs=1):
    """Necessary-condition solutions filtered by line realizability."""
    if any(d != 0 for d in cs.delta):
        raise PreconditionViolated("realizability filter needs delta = 0")
    for i in range(cs.nbranches):
        for k in range(i + 1, cs.nbranches):
            if cs.cross[i][k] != 1:
                raise PreconditionViolated(
                    "realizability filter needs pairwise intersection 1"
                )
    out = []
    for m in enumerate_matrices(cs, jobs=jobs):
        if realizable_by_translated_lines(m, slopes, samples=samples, seed=seed).realizable:
            out.append(m)
    return tuple(out)


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def parse_matrices(text):
    """Blank-line separated blocks; one row per line, space-separated."""
    blocks = []
    current = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if current:
                blocks.append(current)
                current = []
            continue
        try:
            current.append(tuple(int(tok) for tok in line.split()))
        except ValueError:
            raise ParseError(f"bad matrix row {line!r}", lineno) from None
    if current:
        blocks.append(current)
    out = []
    for rows in blocks:
        if len({len(r) for r in rows}) > 1:
            raise ParseError("ragged matrix block")
        out.append(IncidenceMatrix(rows))
    return tuple(out)


def format_matrices(matrices):
    blocks = []
    for m in matrices:
        blocks.append("\n".join(" ".join(str(x) for x in row) for row in m.rows))
    return "\n\n".join(blocks) + "\n"
