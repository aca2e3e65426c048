"""The blow-up process dictated by a decorated germ.

extend_cluster realizes each length exactly: every branch chain is
truncated at the unique prefix whose multiplicity sum equals the length,
or extended with trailing free simple points when the length exceeds the
chain total.  The exceptional dual graph is then read off the classical
proximity calculus:

  weight of the component of point P   = -1 - #{blown points proximate to P}
  components of P and Q (P earlier)    meet iff Q is proximate to P and no
                                       third blown point is proximate to both.

The sandwiched graph is the part not meeting any strict transform; the
marking sends each branch to the unique such component its -1-curve hits.
"""

from dataclasses import dataclass

from . import plumbing
from .germs import GermError, Point, branch_multiplicities, point_multiplicities
from .plumbing import WeightedTree


class DecorationTooSmall(GermError):
    pass


class EmptyGraph(GermError):
    pass


class NotConnected(GermError):
    pass


class AmbiguousAttachment(GermError):
    pass


@dataclass(frozen=True)
class ExtendedCluster:
    """The blown-up point set realizing every length exactly.

    `chains[i]` is the extended chain of branch i+1 (a prefix of the
    original chain plus appended free points), `appended` maps each new
    point id to its parent, and `attachment[i]` is the last chain point,
    the one carrying the -1-curve of branch i+1.
    """

    germ: object
    chains: tuple
    appended: tuple  # (point id, parent id) pairs, in creation order
    multiplicities: tuple  # per branch, aligned with chains

    @property
    def attachments(self):
        return tuple(chain[-1] for chain in self.chains)

    def blown_points(self):
        out = []
        seen = set()
        base_ids = {p.id for p in self.germ.cluster.points}
        by_id = self.germ.cluster.by_id()
        appended = dict(self.appended)
        for chain in self.chains:
            for pid in chain:
                if pid in seen:
                    continue
                seen.add(pid)
                if pid in base_ids:
                    out.append(by_id[pid])
                else:
                    out.append(Point(pid, appended[pid]))
        return tuple(out)


def extend_cluster(germ):
    """Realize each length as the exact multiplicity sum of a blow-up chain."""
    germ.require_valid()
    base_chains = []
    for i in range(1, germ.nbranches + 1):
        br = germ.branch(i)
        mults = branch_multiplicities(germ, i, _checked=False)
        target = germ.length(i)
        prefix_end = None
        running = 0
        for pos, m in enumerate(mults):
            running += m
            if running == target:
                prefix_end = pos + 1
                break
            if running > target:
                raise DecorationTooSmall(
                    f"branch {br.name}: no chain prefix sums to {target} "
                    f"(multiplicities {mults})"
                )
        if prefix_end is not None:
            base_chains.append((list(br.chain[:prefix_end]), list(mults[:prefix_end]), 0))
        else:
            base_chains.append((list(br.chain), list(mults), target - running))

    used_ids = {p.id for p in germ.cluster.points}
    appended = []
    chains = []
    mult_out = []
    for i, (chain, mults, extra) in enumerate(base_chains, start=1):
        br = germ.branch(i)
        parent = chain[-1]
        for k in range(1, extra + 1):
            pid = f"{br.name}+{k}"
            while pid in used_ids:
                pid += "'"
            used_ids.add(pid)
            appended.append((pid, parent))
            chain.append(pid)
            mults.append(1)
            parent = pid
        chains.append(tuple(chain))
        mult_out.append(tuple(mults))

    ext = ExtendedCluster(germ, tuple(chains), tuple(appended), tuple(mult_out))
    _check_cross_consistency(ext)
    return ext


def _check_cross_consistency(ext):
    """Every branch's sum over all blown points of its chain must stay exact.

    For valid germs the union of prefixes never adds points to another
    branch (shared points sit inside every total-multiplicity prefix), so
    this only fires on germs that skipped validation.
    """
    germ = ext.germ
    blown = {p.id for p in ext.blown_points()}
    for i in range(1, germ.nbranches + 1):
        br = germ.branch(i)
        base = set(br.chain)
        mults = branch_multiplicities(germ, i, _checked=False)
        total = sum(m for pid, m in zip(br.chain, mults) if pid in blown)
        total += sum(1 for pid in ext.chains[i - 1] if pid not in base)
        if total != germ.length(i):
            raise DecorationTooSmall(
                f"branch {br.name}: blown points force multiplicity sum {total}, "
                f"length is {germ.length(i)}"
            )


@dataclass(frozen=True)
class ExceptionalGraph:
    """Full exceptional dual graph of the extension, with roles flagged."""

    tree: WeightedTree
    ecl: frozenset  # vertices not meeting any strict transform
    attach: tuple  # attach[i-1] = vertex carrying the -1-curve of branch i
    ext: ExtendedCluster

    def sandwiched_tree(self):
        verts = self.ecl
        weights = {v: self.tree.weight(v) for v in verts}
        edges = [(a, b) for a, b in self.tree.edges() if a in verts and b in verts]
        # may be disconnected; WeightedTree insists on a tree, so guard first
        return weights, edges


def exceptional_graph(ext):
    """Dual graph of the full exceptional divisor of the extension."""
    points = ext.blown_points()
    prox = {}
    for p in points:
        out = []
        if p.parent is not None:
            out.append(p.parent)
        if p.satellite_target is not None:
            out.append(p.satellite_target)
        prox[p.id] = out

    ids = [p.id for p in points]
    idset = set(ids)
    for p in points:
        for t in prox[p.id]:
            if t not in idset:
                raise AssertionError(f"proximity target {t} of {p.id} was not blown up")

    weights = {}
    for pid in ids:
        weights[pid] = -1 - sum(1 for q in ids if pid in prox[q])

    prox_sets = {pid: set(prox[pid]) for pid in ids}
    edges = []
    for q in ids:
        for p in prox[q]:
            separated = any(
                r != q and p in prox_sets[r] and q in prox_sets[r] for r in ids
            )
            if not separated:
                edges.append((p, q))

    tree = WeightedTree(weights, edges)
    attach = ext.attachments
    ecl = frozenset(idset - set(attach))
    return ExceptionalGraph(tree, ecl, attach, ext)


@dataclass(frozen=True)
class SandwichedGraphReport:
    tree: WeightedTree
    connected: bool
    negative_definite: bool


def sandwiched_graph(germ):
    """Extract the sandwiched graph (exceptional components missing the curve).

    Raises EmptyGraph when every component meets a strict transform (the
    contraction is a smooth point) and NotConnected when the lengths are
    too small for the components to form a connected configuration.
    """
    graph = exceptional_graph(extend_cluster(germ))
    weights, edges = graph.sandwiched_tree()
    if not weights:
        raise EmptyGraph("every exceptional component meets a strict transform")
    if not _is_connected(weights, edges):
        raise NotConnected("the components missing the curve are disconnected")
    tree = WeightedTree(weights, edges)
    return SandwichedGraphReport(
        tree=tree,
        connected=True,
        negative_definite=plumbing.is_negative_definite(tree),
    )


def _is_connected(weights, edges):
    verts = set(weights)
    if not verts:
        return True
    adj = {v: set() for v in verts}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    seen = set()
    stack = [next(iter(sorted(verts)))]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj[v] - seen)
    return seen == verts


def canonical_order(ext):
    """Blown-point ids in canonical depth-first order.

    Children are visited sorted by the branch indices whose extended
    chains pass through them, mirroring the canonical germ serialization.
    """
    points = ext.blown_points()
    children = {p.id: [] for p in points}
    root = None
    for p in points:
        if p.parent is None:
            root = p.id
        else:
            children[p.parent].append(p.id)
    membership = {p.id: set() for p in points}
    for i, chain in enumerate(ext.chains, start=1):
        for pid in chain:
            membership[pid].add(i)
    order = []

    def visit(pid):
        order.append(pid)
        for c in sorted(children[pid], key=lambda c: tuple(sorted(membership[c]))):
            visit(c)

    visit(root)
    return tuple(order)


def marking(germ):
    """Map each branch to the sandwiched-graph component meeting its -1-curve.

    Total on branches; AmbiguousAttachment signals a -1-curve with not
    exactly one neighbour inside the sandwiched graph, which only happens
    for non-standard germs.
    """
    graph = exceptional_graph(extend_cluster(germ))
    weights, edges = graph.sandwiched_tree()
    if not weights:
        raise EmptyGraph("every exceptional component meets a strict transform")
    if not _is_connected(weights, edges):
        raise NotConnected("the components missing the curve are disconnected")
    out = {}
    for i, e_vertex in enumerate(graph.attach, start=1):
        inside = [u for u in graph.tree.neighbors(e_vertex) if u in graph.ecl]
        if len(inside) != 1:
            raise AmbiguousAttachment(
                f"branch {i}: its -1-curve meets {len(inside)} sandwiched components"
            )
        out[i] = inside[0]
    return out
