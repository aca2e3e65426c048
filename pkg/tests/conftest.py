import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sandwiched.germs import (
    Branch,
    DecoratedGerm,
    Point,
    ProximityCluster,
    embedded_total_multiplicity,
    parse_germ,
    total_multiplicity,
)

DATA = Path(__file__).parent.parent / "src" / "sandwiched" / "data"


def load_germ(name):
    return parse_germ((DATA / name).read_text()).require_valid()


@pytest.fixture
def cusp_line():
    return load_germ("cusp-line.germ")


@pytest.fixture
def cusp_line_53():
    return load_germ("cusp-line-l53.germ")


@pytest.fixture
def six_lines():
    return load_germ("six-lines.germ")


@pytest.fixture
def one_line_l2():
    return load_germ("one-line-l2.germ")


def make_germ(points, chains, lengths, names=None):
    """points: (id, parent, sat) triples; chains: id tuples."""
    pts = [Point(*p) if len(p) == 3 else Point(p[0], p[1]) for p in points]
    names = names or [f"b{i}" for i in range(1, len(chains) + 1)]
    branches = [
        Branch(names[i - 1], chain, i) for i, chain in enumerate(chains, start=1)
    ]
    return DecoratedGerm(ProximityCluster(pts), branches, lengths)


def cusp_germ(length=4):
    """The plain cusp alone: chain (q0, q1, q2 satellite to q0)."""
    return make_germ(
        [("q0", None, None), ("q1", "q0", None), ("q2", "q1", "q0")],
        [("q0", "q1", "q2")],
        [length],
    ).require_valid()


def two_five_germ(length=6):
    """The branch y^2 = x^5: (q0, q1, q2 free, q3 satellite to q1)."""
    return make_germ(
        [
            ("q0", None, None),
            ("q1", "q0", None),
            ("q2", "q1", None),
            ("q3", "q2", "q1"),
        ],
        [("q0", "q1", "q2", "q3")],
        [length],
    ).require_valid()


def three_five_germ(length=8):
    """The branch y^3 = x^5: (q0, q1, q2 sat q0, q3 sat q1)."""
    return make_germ(
        [
            ("q0", None, None),
            ("q1", "q0", None),
            ("q2", "q1", "q0"),
            ("q3", "q2", "q1"),
        ],
        [("q0", "q1", "q2", "q3")],
        [length],
    ).require_valid()


def transverse_lines_germ(lengths):
    """r pairwise transverse lines through the origin, explicit tips."""
    r = len(lengths)
    points = [("q0", None, None)] + [(f"t{i}", "q0", None) for i in range(1, r + 1)]
    chains = [("q0", f"t{i}") for i in range(1, r + 1)]
    return make_germ(points, chains, lengths).require_valid()


def random_cluster_points(rng, max_points=7):
    """Random Enriques-consistent point list, ids p0..pk."""
    points = [Point("p0", None, None)]
    by_id = {"p0": points[0]}
    n = rng.randint(1, max_points)
    for k in range(1, n):
        parent = rng.choice(points).id
        par = by_id[parent]
        allowed = []
        if par.parent is not None:
            allowed.append(par.parent)
        if par.satellite_target is not None:
            allowed.append(par.satellite_target)
        taken = {
            q.satellite_target
            for q in points
            if q.parent == parent and q.satellite_target is not None
        }
        allowed = [t for t in allowed if t not in taken]
        sat = rng.choice(allowed) if allowed and rng.random() < 0.45 else None
        p = Point(f"p{k}", parent, sat)
        points.append(p)
        by_id[p.id] = p
    return points


def random_germ(rng, max_points=7, extra=4, standard=False):
    """Random valid germ; branches are the root-to-leaf paths.

    With standard=True every length clears the calibrated embedded
    multiplicity by at least one.
    """
    points = random_cluster_points(rng, max_points)
    by_id = {p.id: p for p in points}
    children = {p.id: [] for p in points}
    for p in points:
        if p.parent is not None:
            children[p.parent].append(p.id)
    leaves = [p.id for p in points if not children[p.id]]
    chains = []
    for leaf in leaves:
        chain = []
        cur = leaf
        while cur is not None:
            chain.append(cur)
            cur = by_id[cur].parent
        chains.append(tuple(reversed(chain)))
    chains.sort()
    branches = [Branch(f"b{i}", ch, i) for i, ch in enumerate(chains, start=1)]
    probe = DecoratedGerm(ProximityCluster(points), branches, [1] * len(branches))
    lengths = []
    for i in range(1, len(branches) + 1):
        if standard:
            base = embedded_total_multiplicity(
                DecoratedGerm(
                    ProximityCluster(points),
                    branches,
                    [10**6] * len(branches),
                ),
                i,
                "calibrated",
            )
            lengths.append(base + 1 + rng.randint(0, extra))
        else:
            base = total_multiplicity(probe, i, _checked=False)
            lengths.append(max(1, base) + rng.randint(0, extra))
    return DecoratedGerm(ProximityCluster(points), branches, lengths).require_valid()


def seeded_rng(seed):
    return random.Random(seed)
