"""Decorated plane-curve germs as proximity clusters.

A germ is stored purely combinatorially: a rooted tree of infinitely near
points with proximity relations (every point is proximate to its parent;
a satellite point is proximate to one further point), numbered branch
chains, and a positive length vector.  All numerical invariants
(multiplicity sequences, delta invariants, total multiplicities,
pairwise intersection numbers) are derived from this data and never
stored, so there is a single source of truth.

Conventions:
  * a branch chain is a root path listing every recorded point of the
    branch; branches separate from each other immediately past their
    recorded data, so two branches with identical chains are rejected
    as non-reduced;
  * the multiplicity of a branch at a chain point is the sum of the
    multiplicities at the later chain points proximate to it, with the
    terminal point carrying multiplicity 1.
"""

from dataclasses import dataclass, field
from typing import Optional


class GermError(Exception):
    """Base class for domain errors raised by germ operations."""


class InvalidGerm(GermError):
    def __init__(self, verdict):
        self.verdict = verdict
        lines = "; ".join(v.message for v in verdict.violations)
        super().__init__(f"invalid germ: {lines}")


class InvalidChain(GermError):
    pass


class BranchesNotSeparated(GermError):
    pass


class ParseError(GermError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Point:
    id: str
    parent: Optional[str] = None
    satellite_target: Optional[str] = None


@dataclass(frozen=True)
class ProximityCluster:
    """Rooted tree of infinitely near points with proximity relations."""

    points: tuple

    def __init__(self, points):
        object.__setattr__(self, "points", tuple(points))

    def by_id(self):
        return {p.id: p for p in self.points}

    def proximities(self, pid):
        """Ids of the points the given point is proximate to (1 or 2 of them)."""
        p = self.by_id()[pid]
        out = []
        if p.parent is not None:
            out.append(p.parent)
        if p.satellite_target is not None:
            out.append(p.satellite_target)
        return tuple(out)

    def root_id(self):
        roots = [p.id for p in self.points if p.parent is None]
        if len(roots) != 1:
            raise InvalidGerm(validate_cluster(self))
        return roots[0]


@dataclass(frozen=True)
class Branch:
    """One numbered branch: a root path in the cluster tree."""

    name: str
    chain: tuple
    index: int  # 1-based

    def __init__(self, name, chain, index):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "chain", tuple(chain))
        object.__setattr__(self, "index", int(index))


@dataclass(frozen=True)
class DecoratedGerm:
    """A reduced plane-curve germ with numbered branches and lengths.

    `lengths[i-1]` is the positive integer attached to branch i; it
    prescribes how far the blow-up process follows that branch.
    """

    cluster: ProximityCluster
    branches: tuple
    lengths: tuple

    def __init__(self, cluster, branches, lengths):
        object.__setattr__(self, "cluster", cluster)
        object.__setattr__(self, "branches", tuple(branches))
        object.__setattr__(self, "lengths", tuple(int(x) for x in lengths))

    @property
    def nbranches(self):
        return len(self.branches)

    def branch(self, i):
        if not 1 <= i <= len(self.branches):
            raise IndexError(f"branch index {i} out of range")
        return self.branches[i - 1]

    def length(self, i):
        return self.lengths[i - 1]

    def require_valid(self):
        verdict = validate_germ(self)
        if not verdict.ok:
            raise InvalidGerm(verdict)
        return self


@dataclass(frozen=True)
class Violation:
    kind: str
    point: Optional[str]
    message: str


@dataclass(frozen=True)
class Verdict:
    ok: bool
    violations: tuple = field(default_factory=tuple)


def validate_cluster(cluster):
    """Check the Enriques consistency of a proximity cluster.

    Violation kinds: DuplicateId, MultipleRoots, CyclicParentage,
    BadSatelliteTarget.  A satellite target must be one of the points the
    parent is itself proximate to, and two children of the same point
    cannot both be satellite toward the same target (the two exceptional
    components meet in a single point).
    """
    violations = []
    seen = set()
    for p in cluster.points:
        if p.id in seen:
            violations.append(Violation("DuplicateId", p.id, f"duplicate point id {p.id!r}"))
        seen.add(p.id)
    by_id = {}
    for p in cluster.points:
        by_id.setdefault(p.id, p)

    roots = [p.id for p in cluster.points if p.parent is None]
    if len(roots) > 1:
        violations.append(
            Violation("MultipleRoots", roots[1], f"more than one root: {', '.join(roots)}")
        )
    if cluster.points and not roots:
        violations.append(Violation("CyclicParentage", None, "no root point; parent links cycle"))

    # parent links must reach a root without repeating
    for p in cluster.points:
        if p.parent is not None and p.parent not in by_id:
            violations.append(
                Violation("CyclicParentage", p.id, f"{p.id}: unknown parent {p.parent!r}")
            )
    for p in cluster.points:
        walked = set()
        cur = p
        while cur.parent is not None:
            if cur.id in walked:
                violations.append(
                    Violation("CyclicParentage", p.id, f"{p.id}: parent chain cycles")
                )
                break
            walked.add(cur.id)
            nxt = by_id.get(cur.parent)
            if nxt is None:
                break
            cur = nxt

    # satellite targets
    sat_pairs = set()
    for p in cluster.points:
        t = p.satellite_target
        if t is None:
            continue
        if p.parent is None:
            violations.append(
                Violation("BadSatelliteTarget", p.id, f"root {p.id} cannot be a satellite")
            )
            continue
        if t not in by_id:
            violations.append(
                Violation("BadSatelliteTarget", p.id, f"{p.id}: unknown satellite target {t!r}")
            )
            continue
        if t == p.parent:
            violations.append(
                Violation(
                    "BadSatelliteTarget", p.id, f"{p.id}: already proximate to parent {t}"
                )
            )
            continue
        parent = by_id.get(p.parent)
        allowed = set()
        if parent is not None:
            if parent.parent is not None:
                allowed.add(parent.parent)
            if parent.satellite_target is not None:
                allowed.add(parent.satellite_target)
        if t not in allowed:
            violations.append(
                Violation(
                    "BadSatelliteTarget",
                    p.id,
                    f"{p.id}: target {t} is not a point its parent is proximate to",
                )
            )
            continue
        if (p.parent, t) in sat_pairs:
            violations.append(
                Violation(
                    "BadSatelliteTarget",
                    p.id,
                    f"{p.id}: a sibling is already satellite toward {t}",
                )
            )
        sat_pairs.add((p.parent, t))

    return Verdict(ok=not violations, violations=tuple(violations))


def validate_germ(germ):
    """Full germ validation: cluster consistency plus chain/length invariants."""
    violations = list(validate_cluster(germ.cluster).violations)
    by_id = germ.cluster.by_id()
    if not germ.cluster.points:
        violations.append(Violation("EmptyGerm", None, "germ has no points"))
        return Verdict(False, tuple(violations))
    if violations:
        return Verdict(False, tuple(violations))

    root = germ.cluster.root_id()
    if len(germ.branches) != len(germ.lengths):
        violations.append(Violation("InvalidChain", None, "one length per branch required"))
    for pos, br in enumerate(germ.branches, start=1):
        if br.index != pos:
            violations.append(
                Violation("InvalidChain", None,
                          f"branch {br.name}: index {br.index} does not match position {pos}")
            )
    if violations:
        return Verdict(False, tuple(violations))
    for br in germ.branches:
        bad = False
        if not br.chain or br.chain[0] != root:
            violations.append(
                Violation("InvalidChain", br.chain[0] if br.chain else None,
                          f"branch {br.name}: chain must start at the root")
            )
            bad = True
        for a, b in zip(br.chain, br.chain[1:]):
            pb = by_id.get(b)
            if pb is None or pb.parent != a:
                violations.append(
                    Violation("InvalidChain", b,
                              f"branch {br.name}: {b!r} does not follow {a!r} in the tree")
                )
                bad = True
                break
        if bad:
            return Verdict(False, tuple(violations))

    chains = {}
    for br in germ.branches:
        if br.chain in chains:
            violations.append(
                Violation(
                    "BranchesNotSeparated",
                    br.chain[-1],
                    f"branches {chains[br.chain]} and {br.name} have identical chains "
                    "(non-reduced germ)",
                )
            )
        chains[br.chain] = br.name

    covered = set()
    for br in germ.branches:
        covered.update(br.chain)
    for p in germ.cluster.points:
        if p.id not in covered:
            violations.append(
                Violation("SpuriousPoint", p.id, f"point {p.id} lies on no branch chain")
            )

    if violations:
        return Verdict(False, tuple(violations))

    for br in germ.branches:
        li = germ.lengths[br.index - 1]
        if li < 1:
            violations.append(
                Violation("DecorationTooSmall", None,
                          f"branch {br.name}: length {li} must be positive")
            )
    if violations:
        return Verdict(False, tuple(violations))
    for br in germ.branches:
        li = germ.lengths[br.index - 1]
        mi = total_multiplicity(germ, br.index, _checked=False)
        if li < mi:
            violations.append(
                Violation(
                    "DecorationTooSmall",
                    None,
                    f"branch {br.name}: length {li} is below the total multiplicity {mi}",
                )
            )
    return Verdict(ok=not violations, violations=tuple(violations))


# ---------------------------------------------------------------------------
# numerical invariants
# ---------------------------------------------------------------------------


def branch_multiplicities(germ, i, _checked=True):
    """Multiplicity of branch i at each of its chain points.

    Backward proximity recursion: the terminal point carries 1 and every
    earlier point carries the sum over the later chain points proximate
    to it.  The result is positive and non-increasing.
    """
    if _checked:
        germ.require_valid()
    br = germ.branch(i)
    return _chain_multiplicities(germ.cluster, br.chain)


def _chain_multiplicities(cluster, chain):
    by_id = cluster.by_id()
    for a, b in zip(chain, chain[1:]):
        if by_id[b].parent != a:
            raise InvalidChain(f"{b!r} is not a child of {a!r}")
    mult = {chain[-1]: 1}
    rev = list(chain)
    for pos in range(len(rev) - 2, -1, -1):
        p = rev[pos]
        total = 0
        for q in rev[pos + 1:]:
            if p in _prox(by_id[q]):
                total += mult[q]
        mult[p] = total
    return tuple(mult[p] for p in chain)


def _prox(point):
    out = []
    if point.parent is not None:
        out.append(point.parent)
    if point.satellite_target is not None:
        out.append(point.satellite_target)
    return out


def point_multiplicities(germ, _checked=True):
    """Per-point table {point id: {branch index: multiplicity}}.

    Points absent from a branch's chain do not appear in its column; the
    total curve multiplicity at a point is the sum over the row.
    """
    if _checked:
        germ.require_valid()
    table = {p.id: {} for p in germ.cluster.points}
    for br in germ.branches:
        mults = _chain_multiplicities(germ.cluster, br.chain)
        for pid, m in zip(br.chain, mults):
            table[pid][br.index] = m
    return table


def delta_branch(germ, i):
    """Delta invariant of one branch: sum of m(m-1)/2 along its chain."""
    mults = branch_multiplicities(germ, i)
    return sum(m * (m - 1) // 2 for m in mults)


def delta_curve(germ):
    """Delta invariant of the whole germ.

    Computed as sum over infinitely near points of m(m-1)/2 for the total
    curve multiplicity m at the point, and cross-checked against
    sum of branch deltas plus pairwise intersection numbers.
    """
    germ.require_valid()
    table = point_multiplicities(germ, _checked=False)
    total = 0
    for row in table.values():
        m = sum(row.values())
        total += m * (m - 1) // 2
    r = germ.nbranches
    check = sum(delta_branch(germ, i) for i in range(1, r + 1))
    for i in range(1, r + 1):
        for k in range(i + 1, r + 1):
            check += pairwise_intersection(germ, i, k)
    if total != check:
        raise AssertionError(
            f"delta cross-check failed: pointwise {total} != additive {check}"
        )
    return total


def pairwise_intersection(germ, i, k):
    """Intersection number of branches i and k at the origin.

    Noether's formula: the sum over the shared chain points of the product
    of the two branch multiplicities.  Shared points always form a common
    prefix of the two chains.
    """
    if i == k:
        raise ValueError("pairwise_intersection needs two distinct branches")
    germ.require_valid()
    bi, bk = germ.branch(i), germ.branch(k)
    if bi.chain == bk.chain:
        raise BranchesNotSeparated(
            f"branches {bi.name} and {bk.name} have identical chains"
        )
    mi = _chain_multiplicities(germ.cluster, bi.chain)
    mk = _chain_multiplicities(germ.cluster, bk.chain)
    shared_i = set(bi.chain) & set(bk.chain)
    prefix = 0
    while prefix < min(len(bi.chain), len(bk.chain)) and bi.chain[prefix] == bk.chain[prefix]:
        prefix += 1
    if len(shared_i) != prefix:
        raise InvalidChain(
            f"branches {bi.name} and {bk.name} share points outside a common prefix"
        )
    return sum(mi[t] * mk[t] for t in range(prefix))


def total_multiplicity(germ, i, _checked=True):
    """Total multiplicity of branch i with respect to the whole germ.

    Sums the branch multiplicities over the prefix of its chain blown up
    by the minimal joint abstract resolution: exactly the points where the
    strict transform of the curve is still singular, i.e. has total
    multiplicity at least 2.  A single smooth branch alone needs no
    blow-up at all, so its total multiplicity is 0.
    """
    if _checked:
        germ.require_valid()
    table = point_multiplicities(germ, _checked=False)
    br = germ.branch(i)
    mults = _chain_multiplicities(germ.cluster, br.chain)
    total = 0
    for pid, m in zip(br.chain, mults):
        if sum(table[pid].values()) >= 2:
            total += m
        else:
            break
    return total


def _nc_needed(germ):
    """Points blown up by the minimal embedded (normal-crossings) resolution.

    A point is needed iff the strict transform is singular there (total
    multiplicity >= 2), or it is a satellite point (the curve would pass
    through a crossing of two exceptional components), or some branch
    through it is tangent to an exceptional component there (its next
    chain point is a satellite).  The needed set is closed under parents.
    """
    by_id = germ.cluster.by_id()
    table = point_multiplicities(germ, _checked=False)
    needed = set()
    for pid, row in table.items():
        if sum(row.values()) >= 2:
            needed.add(pid)
    for p in germ.cluster.points:
        if p.id in table and table[p.id] and p.satellite_target is not None:
            needed.add(p.id)
    for br in germ.branches:
        for cur, nxt in zip(br.chain, br.chain[1:]):
            if by_id[nxt].satellite_target is not None:
                needed.add(cur)
    return needed


def embedded_total_multiplicity(germ, i, rule="calibrated"):
    """Total multiplicity of branch i along the minimal embedded resolution.

    rule="plain-nc" sums the branch multiplicities over the chain prefix
    blown up by the literal minimal normal-crossings resolution of the
    germ.  rule="calibrated" extends that prefix with free simple points
    while its last centre is a satellite point, which reproduces the
    classical reference values for the cusp-plus-tangent-line germ; the
    two rules are both exposed because they genuinely differ (the cusp
    gives 5 calibrated versus 4 plain).
    """
    if rule not in ("calibrated", "plain-nc"):
        raise ValueError(f"unknown rule {rule!r}")
    germ.require_valid()
    needed = _nc_needed(germ)
    br = germ.branch(i)
    mults = _chain_multiplicities(germ.cluster, br.chain)
    by_id = germ.cluster.by_id()
    total = 0
    last = None
    for pid, m in zip(br.chain, mults):
        if pid in needed:
            total += m
            last = pid
        else:
            break
    if rule == "calibrated" and last is not None:
        if by_id[last].satellite_target is not None:
            # extend with one free simple point so the last centre is free
            total += 1
    return total


def is_standard(germ, rule="calibrated"):
    """True iff every length clears the embedded total multiplicity by one."""
    germ.require_valid()
    return all(
        germ.length(i) >= embedded_total_multiplicity(germ, i, rule) + 1
        for i in range(1, germ.nbranches + 1)
    )


@dataclass(frozen=True)
class GermInvariants:
    delta: tuple
    delta_total: int
    total_mult: tuple
    embedded_mult_calibrated: tuple
    embedded_mult_plain: tuple
    intersections: tuple  # r x r, diagonal 0


def germ_invariants(germ):
    """All numerical invariants in one record."""
    germ.require_valid()
    r = germ.nbranches
    inter = [[0] * r for _ in range(r)]
    for i in range(1, r + 1):
        for k in range(i + 1, r + 1):
            v = pairwise_intersection(germ, i, k)
            inter[i - 1][k - 1] = v
            inter[k - 1][i - 1] = v
    return GermInvariants(
        delta=tuple(delta_branch(germ, i) for i in range(1, r + 1)),
        delta_total=delta_curve(germ),
        total_mult=tuple(total_multiplicity(germ, i) for i in range(1, r + 1)),
        embedded_mult_calibrated=tuple(
            embedded_total_multiplicity(germ, i, "calibrated") for i in range(1, r + 1)
        ),
        embedded_mult_plain=tuple(
            embedded_total_multiplicity(germ, i, "plain-nc") for i in range(1, r + 1)
        ),
        intersections=tuple(tuple(row) for row in inter),
    )


# ---------------------------------------------------------------------------
# canonical form and topological equivalence
# ---------------------------------------------------------------------------


def canonical_point_order(germ):
    """Point ids in canonical depth-first order.

    Children of a point are visited sorted by the tuple of branch indices
    whose chains pass through them; within one cluster two siblings never
    carry the same index set, so the order is label-free and total.
    """
    by_id = germ.cluster.by_id()
    children = {p.id: [] for p in germ.cluster.points}
    root = germ.cluster.root_id()
    for p in germ.cluster.points:
        if p.parent is not None:
            children[p.parent].append(p.id)
    membership = {p.id: set() for p in germ.cluster.points}
    for br in germ.branches:
        for pid in br.chain:
            membership[pid].add(br.index)
    order = []

    def visit(pid):
        order.append(pid)
        kids = sorted(children[pid], key=lambda c: tuple(sorted(membership[c])))
        for c in kids:
            visit(c)

    visit(root)
    return order


def canonical_form(germ):
    """Label-free canonical serialization of (cluster, chains, lengths).

    Two germs are topologically equivalent (branch numbering respected)
    iff their canonical forms coincide.
    """
    germ.require_valid()
    order = canonical_point_order(germ)
    index = {pid: n for n, pid in enumerate(order)}
    by_id = germ.cluster.by_id()
    membership = {pid: [] for pid in order}
    for br in germ.branches:
        for pid in br.chain:
            membership[pid].append(br.index)
    point_part = tuple(
        (
            index[by_id[pid].parent] if by_id[pid].parent is not None else -1,
            index[by_id[pid].satellite_target]
            if by_id[pid].satellite_target is not None
            else -1,
            tuple(sorted(membership[pid])),
        )
        for pid in order
    )
    branch_part = tuple(
        (br.index, tuple(index[pid] for pid in br.chain), germ.lengths[br.index - 1])
        for br in germ.branches
    )
    return (point_part, branch_part)


def are_topologically_equivalent(germ_a, germ_b):
    """Decide equivalence; on success also return the point relabelling.

    Returns (True, {a_point_id: b_point_id}) or (False, None).
    """
    fa = canonical_form(germ_a)
    fb = canonical_form(germ_b)
    if fa != fb:
        return False, None
    witness = dict(zip(canonical_point_order(germ_a), canonical_point_order(germ_b)))
    return True, witness


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def parse_germ(text):
    """Parse the germ text format.

    One declaration per line; '#' starts a comment:
        point <id> [parent=<id>] [proximate=<id>]
        branch <name> chain=<id>,<id>,... l=<positive int>
    Branch order fixes the numbering.
    """
    points = []
    branches = []
    lengths = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0]
        if kind == "point":
            if len(tokens) < 2:
                raise ParseError("point needs an id", lineno)
            pid = tokens[1]
            parent = None
            sat = None
            for tok in tokens[2:]:
                if tok.startswith("parent="):
                    parent = tok[len("parent="):]
                elif tok.startswith("proximate="):
                    sat = tok[len("proximate="):]
                else:
                    raise ParseError(f"unknown point attribute {tok!r}", lineno)
            points.append(Point(pid, parent, sat))
        elif kind == "branch":
            if len(tokens) < 2:
                raise ParseError("branch needs a name", lineno)
            name = tokens[1]
            chain = None
            ell = None
            for tok in tokens[2:]:
                if tok.startswith("chain="):
                    chain = tuple(x for x in tok[len("chain="):].split(",") if x)
                elif tok.startswith("l="):
                    try:
                        ell = int(tok[len("l="):])
                    except ValueError:
                        raise ParseError(f"bad length in {tok!r}", lineno) from None
                else:
                    raise ParseError(f"unknown branch attribute {tok!r}", lineno)
            if chain is None or ell is None:
                raise ParseError("branch needs chain= and l=", lineno)
            if ell < 1:
                raise ParseError("branch length must be positive", lineno)
            branches.append(Branch(name, chain, len(branches) + 1))
            lengths.append(ell)
        else:
            raise ParseError(f"unknown declaration {kind!r}", lineno)
    germ = DecoratedGerm(ProximityCluster(points), branches, lengths)
    return germ


def format_germ(germ):
    """Serialize a germ; points are emitted in canonical DFS order."""
    germ.require_valid()
    by_id = germ.cluster.by_id()
    lines = []
    for pid in canonical_point_order(germ):
        p = by_id[pid]
        parts = [f"point {p.id}"]
        if p.parent is not None:
            parts.append(f"parent={p.parent}")
        if p.satellite_target is not None:
            parts.append(f"proximate={p.satellite_target}")
        lines.append(" ".join(parts))
    for br in germ.branches:
        lines.append(
            f"branch {br.name} chain={','.join(br.chain)} l={germ.lengths[br.index - 1]}"
        )
    return "\n".join(lines) + "\n"
