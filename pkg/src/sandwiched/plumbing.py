"""Plumbing calculus on weighted trees.

Blow-down rewriting, smooth-graph testing, exact negative-definiteness,
and bounded sandwiched-graph recognition with machine-checkable
certificates.  Only trees are supported; the recognition search is sound
but honestly incomplete: when no certificate is found within the
per-vertex bound the verdict is Unknown, never "no".
"""

from dataclasses import dataclass

from .exactla import is_negative_definite_matrix
from .germs import ParseError


class PlumbingError(Exception):
    pass


class NotContractible(PlumbingError):
    pass


class NotNegativeDefinite(PlumbingError):
    pass


class NonRationalWeight(PlumbingError):
    pass


class WeightedTree:
    """Immutable-by-convention weighted tree with string vertex ids."""

    def __init__(self, weights, edges=()):
        self._weights = {str(v): int(w) for v, w in dict(weights).items()}
        self._adj = {v: set() for v in self._weights}
        for a, b in edges:
            a, b = str(a), str(b)
            if a not in self._weights or b not in self._weights:
                raise ValueError(f"edge ({a},{b}) uses an unknown vertex")
            if a == b:
                raise ValueError(f"loop edge at {a}")
            self._adj[a].add(b)
            self._adj[b].add(a)
        self._check_tree()

    def _check_tree(self):
        n = len(self._weights)
        if n == 0:
            return
        nedges = sum(len(s) for s in self._adj.values()) // 2
        if nedges != n - 1:
            raise ValueError("not a tree: wrong edge count")
        seen = set()
        stack = [next(iter(self._weights))]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(self._adj[v] - seen)
        if len(seen) != n:
            raise ValueError("not a tree: disconnected")

    @property
    def vertices(self):
        return tuple(sorted(self._weights))

    def __len__(self):
        return len(self._weights)

    def weight(self, v):
        return self._weights[v]

    def weights(self):
        return dict(self._weights)

    def neighbors(self, v):
        return tuple(sorted(self._adj[v]))

    def valence(self, v):
        return len(self._adj[v])

    def edges(self):
        out = set()
        for a, s in self._adj.items():
            for b in s:
                out.add((a, b) if a < b else (b, a))
        return tuple(sorted(out))

    def __eq__(self, other):
        if not isinstance(other, WeightedTree):
            return NotImplemented
        return self._weights == other._weights and self.edges() == other.edges()

    def __hash__(self):
        return hash((tuple(sorted(self._weights.items())), self.edges()))

    def __repr__(self):
        ws = ", ".join(f"{v}:{w}" for v, w in sorted(self._weights.items()))
        return f"WeightedTree({{{ws}}}, edges={list(self.edges())})"

    def intersection_matrix(self):
        """Weights on the diagonal, 1 for each edge, vertex order sorted."""
        verts = self.vertices
        idx = {v: i for i, v in enumerate(verts)}
        n = len(verts)
        mat = [[0] * n for _ in range(n)]
        for v in verts:
            mat[idx[v]][idx[v]] = self._weights[v]
        for a, b in self.edges():
            mat[idx[a]][idx[b]] = 1
            mat[idx[b]][idx[a]] = 1
        return mat


def blow_down_step(tree, v):
    """Contract one vertex of weight -1 and valence <= 2.

    valence 0: drop it; valence 1: drop it, neighbour weight +1;
    valence 2: drop it, join the neighbours, both weights +1.
    """
    if v not in tree.weights():
        raise NotContractible(f"no vertex {v!r}")
    if tree.weight(v) != -1:
        raise NotContractible(f"{v} has weight {tree.weight(v)}, not -1")
    nbrs = tree.neighbors(v)
    if len(nbrs) > 2:
        raise NotContractible(f"{v} has valence {len(nbrs)} > 2")
    weights = tree.weights()
    del weights[v]
    edges = [e for e in tree.edges() if v not in e]
    for u in nbrs:
        weights[u] += 1
    if len(nbrs) == 2:
        edges.append(tuple(sorted(nbrs)))
    return WeightedTree(weights, edges)


@dataclass(frozen=True)
class ReduceResult:
    tree: WeightedTree
    trace: tuple
    smooth: bool


def reduce_tree(tree, rng=None):
    """Greedily contract eligible vertices until none remains.

    The verdict (empty or not) is independent of the contraction order;
    with rng=None the smallest eligible id is taken each step, so the
    trace itself is deterministic too.
    """
    cur = tree
    trace = []
    while True:
        eligible = [
            v for v in cur.vertices if cur.weight(v) == -1 and cur.valence(v) <= 2
        ]
        if not eligible:
            break
        v = eligible[0] if rng is None else rng.choice(eligible)
        cur = blow_down_step(cur, v)
        trace.append(v)
    return ReduceResult(cur, tuple(trace), smooth=len(cur) == 0)


def is_negative_definite(tree):
    if len(tree) == 0:
        return True
    return is_negative_definite_matrix(tree.intersection_matrix())


@dataclass(frozen=True)
class Certificate:
    """Additions of -1-leaves plus a full contraction sequence to empty."""

    additions: tuple  # ((host vertex, count), ...) with count > 0
    contractions: tuple  # vertex ids, including the added leaves

    def leaf_ids(self):
        out = []
        for host, count in self.additions:
            for k in range(1, count + 1):
                out.append(f"{host}+{k}")
        return tuple(out)


@dataclass(frozen=True)
class UnknownWithinBound:
    """No certificate exists within the searched per-vertex leaf bound."""

    bound: tuple  # ((vertex, max leaves searched), ...)


def apply_certificate(tree, cert):
    """Replay a certificate: add the leaves, then contract; returns final tree."""
    weights = tree.weights()
    edges = list(tree.edges())
    for host, count in cert.additions:
        if host not in weights:
            raise PlumbingError(f"certificate adds a leaf to unknown vertex {host!r}")
        for k in range(1, count + 1):
            leaf = f"{host}+{k}"
            if leaf in weights:
                raise PlumbingError(f"leaf id {leaf!r} collides with a vertex")
            weights[leaf] = -1
            edges.append((host, leaf))
    cur = WeightedTree(weights, edges)
    for v in cert.contractions:
        cur = blow_down_step(cur, v)
    return cur


def verify_certificate(tree, cert):
    return len(apply_certificate(tree, cert)) == 0


def _reduces_to_empty(weights, adj):
    """Fast order-free smooth test on (weight list, adjacency sets)."""
    w = list(weights)
    nbr = [set(s) for s in adj]
    alive = [True] * len(w)
    remaining = len(w)
    stack = [i for i, x in enumerate(w) if x == -1]
    while stack:
        v = stack.pop()
        if not alive[v] or w[v] != -1 or len(nbr[v]) > 2:
            continue
        ns = tuple(nbr[v])
        alive[v] = False
        remaining -= 1
        for u in ns:
            nbr[u].discard(v)
            w[u] += 1
        if len(ns) == 2:
            a, b = ns
            nbr[a].add(b)
            nbr[b].add(a)
        for u in ns:
            if w[u] == -1 and len(nbr[u]) <= 2:
                stack.append(u)
    return remaining == 0


def recognize_sandwiched(tree, max_extra=None):
    """Search for -1-leaf additions making the tree blow down to empty.

    Totals are tried smallest first, distributions in lexicographic order
    over the sorted vertices.  Every returned Certificate replays to the
    empty graph (checked here before returning).  A vertex can never be
    contracted once its weight reaches 0, so the per-vertex search bound
    is capped at |weight|-1 additions without losing solutions; the
    reported bound is min(max_extra, |weight|) per vertex, default
    |weight|.
    """
    if len(tree) == 0:
        return Certificate((), ())
    for v in tree.vertices:
        if tree.weight(v) >= 0:
            raise NonRationalWeight(f"vertex {v} has weight {tree.weight(v)} >= 0")
    if not is_negative_definite(tree):
        raise NotNegativeDefinite("intersection form is not negative definite")

    verts = tree.vertices
    idx = {v: i for i, v in enumerate(verts)}
    base = [tree.weight(v) for v in verts]
    adj = [set() for _ in verts]
    for a, b in tree.edges():
        adj[idx[a]].add(idx[b])
        adj[idx[b]].add(idx[a])

    declared = [(-w) if max_extra is None else min(max_extra, -w) for w in base]
    # adding more than |w|-1 leaves pushes the weight to >= 0: hopeless
    caps = [min(d, -w - 1) for d, w in zip(declared, base)]
    n = len(verts)

    found = None

    def assign(pos, left, weights):
        nonlocal found
        if found is not None:
            return
        if pos == n:
            if left == 0 and _reduces_to_empty(weights, adj):
                found = tuple(weights)
            return
        if left > sum(caps[pos:]):
            return
        for c in range(0, min(caps[pos], left) + 1):
            weights[pos] = base[pos] + c
            assign(pos + 1, left - c, weights)
            if found is not None:
                return
        weights[pos] = base[pos]

    for total in range(0, sum(caps) + 1):
        assign(0, total, list(base))
        if found is not None:
            break
    if found is None:
        return UnknownWithinBound(tuple(zip(verts, declared)))

    additions = tuple(
        (v, found[i] - base[i]) for i, v in enumerate(verts) if found[i] > base[i]
    )
    cert = Certificate(additions, _contraction_sequence(tree, additions))
    if not verify_certificate(tree, cert):
        raise AssertionError("certificate replay failed")
    return cert


def _contraction_sequence(tree, additions):
    weights = tree.weights()
    edges = list(tree.edges())
    for host, count in additions:
        for k in range(1, count + 1):
            leaf = f"{host}+{k}"
            weights[leaf] = -1
            edges.append((host, leaf))
    result = reduce_tree(WeightedTree(weights, edges))
    if not result.smooth:
        raise AssertionError("search accepted a distribution that does not reduce")
    return result.trace


# ---------------------------------------------------------------------------
# isomorphism
# ---------------------------------------------------------------------------


def _centroids(tree):
    """Vertices minimizing the largest component left after their removal."""
    verts = list(tree.vertices)
    if len(verts) <= 2:
        return verts
    best = None
    out = []
    for v in verts:
        comp_max = 0
        seen = {v}
        for u in tree.neighbors(v):
            if u in seen:
                continue
            cnt = 0
            stack = [u]
            seen_local = {v, u}
            while stack:
                x = stack.pop()
                cnt += 1
                for y in tree.neighbors(x):
                    if y not in seen_local:
                        seen_local.add(y)
                        stack.append(y)
            comp_max = max(comp_max, cnt)
        if best is None or comp_max < best:
            best = comp_max
            out = [v]
        elif comp_max == best:
            out.append(v)
    return out


def canonical_form(tree):
    """Weight-aware AHU canonical form rooted at the centroid(s)."""
    if len(tree) == 0:
        return ()

    def encode(v, parent):
        kids = sorted(
            encode(u, v) for u in tree.neighbors(v) if u != parent
        )
        return (tree.weight(v), tuple(kids))

    return min(encode(c, None) for c in _centroids(tree))


def trees_isomorphic(tree_a, tree_b):
    return canonical_form(tree_a) == canonical_form(tree_b)


# ---------------------------------------------------------------------------
# text format (shared with the resolution module's graphs)
# ---------------------------------------------------------------------------


def parse_tree(text):
    """Parse the graph text format into (WeightedTree, ecl set, attach map).

    Lines: `vertex <id> weight=<int> [in-ecl] [attach=<branch>]` and
    `edge <id> <id>`; '#' comments.
    """
    weights = {}
    edges = []
    ecl = set()
    attach = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] == "vertex":
            if len(tokens) < 3 or not tokens[2].startswith("weight="):
                raise ParseError("vertex needs `vertex <id> weight=<int>`", lineno)
            vid = tokens[1]
            try:
                weights[vid] = int(tokens[2][len("weight="):])
            except ValueError:
                raise ParseError(f"bad weight {tokens[2]!r}", lineno) from None
            for tok in tokens[3:]:
                if tok == "in-ecl":
                    ecl.add(vid)
                elif tok.startswith("attach="):
                    try:
                        attach[int(tok[len("attach="):])] = vid
                    except ValueError:
                        raise ParseError(f"bad branch in {tok!r}", lineno) from None
                else:
                    raise ParseError(f"unknown vertex flag {tok!r}", lineno)
        elif tokens[0] == "edge":
            if len(tokens) != 3:
                raise ParseError("edge needs exactly two vertex ids", lineno)
            edges.append((tokens[1], tokens[2]))
        else:
            raise ParseError(f"unknown declaration {tokens[0]!r}", lineno)
    for a, b in edges:
        if a not in weights or b not in weights:
            raise ParseError(f"edge ({a},{b}) uses an undeclared vertex")
    try:
        tree = WeightedTree(weights, edges)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return tree, ecl, attach


def format_tree(tree, ecl=None, attach=None, order=None):
    """Emit the graph text format; vertex order is canonical unless given."""
    ecl = ecl or set()
    attach = attach or {}
    attach_rev = {}
    for branch, vid in sorted(attach.items()):
        attach_rev.setdefault(vid, []).append(branch)
    if order is None:
        order = _canonical_vertex_order(tree)
    lines = []
    for v in order:
        parts = [f"vertex {v} weight={tree.weight(v)}"]
        if v in ecl:
            parts.append("in-ecl")
        for branch in attach_rev.get(v, ()):
            parts.append(f"attach={branch}")
        lines.append(" ".join(parts))
    pos = {v: i for i, v in enumerate(order)}
    for a, b in sorted(tree.edges(), key=lambda e: (pos[e[0]], pos[e[1]])):
        lines.append(f"edge {a} {b}")
    return "\n".join(lines) + "\n"


def _canonical_vertex_order(tree):
    """Deterministic rooted DFS order from the lexicographically best centroid."""
    if len(tree) == 0:
        return ()
    cents = sorted(_centroids(tree))
    root = cents[0]
    order = []
    seen = set()

    def visit(v):
        order.append(v)
        seen.add(v)
        for u in sorted(tree.neighbors(v), key=lambda u: (tree.weight(u), u)):
            if u not in seen:
                visit(u)

    visit(root)
    return tuple(order)
