import random

import pytest

from conftest import (
    cusp_germ,
    make_germ,
    random_germ,
    seeded_rng,
    transverse_lines_germ,
    two_five_germ,
)
from sandwiched.germs import DecoratedGerm, branch_multiplicities
from sandwiched.plumbing import (
    WeightedTree,
    blow_down_step,
    reduce_tree,
    trees_isomorphic,
)
from sandwiched.resolution import (
    AmbiguousAttachment,
    DecorationTooSmall,
    EmptyGraph,
    NotConnected,
    canonical_order,
    exceptional_graph,
    extend_cluster,
    marking,
    sandwiched_graph,
)


def star(center_weight, arms, arm_weights):
    """Tree with a center and `arms` chains of the given weights."""
    weights = {"c": center_weight}
    edges = []
    for a in range(arms):
        prev = "c"
        for j, w in enumerate(arm_weights):
            vid = f"a{a}v{j}"
            weights[vid] = w
            edges.append((prev, vid))
            prev = vid
    return WeightedTree(weights, edges)


# ---------------------------------------------------------------------------
# extension
# ---------------------------------------------------------------------------


def test_six_lines_extension(six_lines):
    ext = extend_cluster(six_lines)
    for i, chain in enumerate(ext.chains, start=1):
        assert len(chain) == 5
        assert chain[0] == "q0"
        assert sum(ext.multiplicities[i - 1]) == 5


def test_cusp_extension(cusp_line):
    ext = extend_cluster(cusp_line)
    assert ext.multiplicities[0] == (2, 1, 1, 1, 1)
    assert ext.multiplicities[1] == (1, 1, 1)
    assert ext.chains[0][:3] == ("q0", "q1", "q2")


def test_smooth_length_one_extension():
    germ = make_germ([("q0", None, None)], [("q0",)], [1])
    ext = extend_cluster(germ.require_valid())
    assert ext.chains == (("q0",),)


def test_truncation():
    # the (5,3) decoration truncates nothing but appends less
    germ = cusp_germ(3)
    ext = extend_cluster(germ)
    assert ext.chains[0] == ("q0", "q1")
    assert sum(ext.multiplicities[0]) == 3


def test_unreachable_prefix_sum_rejected():
    # y^2=x^5 has prefix sums 2, 4, 5, 6...: 3 is unreachable
    germ = two_five_germ(6)
    bad = DecoratedGerm(germ.cluster, germ.branches, (3,))
    with pytest.raises(DecorationTooSmall):
        extend_cluster(bad)


def test_extension_sums_random():
    rng = seeded_rng(23)
    for _ in range(50):
        germ = random_germ(rng)
        ext = extend_cluster(germ)
        for i in range(1, germ.nbranches + 1):
            assert sum(ext.multiplicities[i - 1]) == germ.length(i)
            base = set(germ.branch(i).chain)
            appended = [p for p in ext.chains[i - 1] if p not in base]
            # appended points are free simple tail points
            mults = ext.multiplicities[i - 1]
            assert all(m == 1 for m in mults[len(mults) - len(appended):])


# ---------------------------------------------------------------------------
# exceptional graphs
# ---------------------------------------------------------------------------


def test_six_lines_star(six_lines):
    report = sandwiched_graph(six_lines)
    expected = star(-7, 6, [-2, -2, -2])
    assert trees_isomorphic(report.tree, expected)
    assert report.connected and report.negative_definite


def test_cusp_line_53_chain(cusp_line_53):
    report = sandwiched_graph(cusp_line_53)
    chain = WeightedTree({"a": -3, "b": -2, "c": -3}, [("a", "b"), ("b", "c")])
    assert trees_isomorphic(report.tree, chain)


def test_cusp_line_63_star(cusp_line):
    report = sandwiched_graph(cusp_line)
    expected = WeightedTree(
        {"c": -2, "x": -3, "y": -3, "z": -2},
        [("c", "x"), ("c", "y"), ("c", "z")],
    )
    assert trees_isomorphic(report.tree, expected)


def test_two_lines_small_lengths():
    with pytest.raises(EmptyGraph):
        sandwiched_graph(transverse_lines_germ([1, 1]))
    report = sandwiched_graph(transverse_lines_germ([2, 2]))
    assert report.tree.weights() == {"q0": -3}


def test_not_connected():
    germ = make_germ(
        [("q0", None, None), ("q1", "q0", None), ("q2", "q1", "q0")],
        [("q0", "q1", "q2"), ("q0", "q1")],
        [4, 3],
        names=["cusp", "line"],
    ).require_valid()
    with pytest.raises(NotConnected):
        sandwiched_graph(germ)


def test_exceptional_weights_and_attachments(cusp_line):
    graph = exceptional_graph(extend_cluster(cusp_line))
    w = graph.tree.weights()
    assert w["q0"] == -3 and w["q1"] == -3 and w["q2"] == -2
    for v in graph.attach:
        assert graph.tree.weight(v) == -1
    assert set(graph.attach) & graph.ecl == set()


def test_canonical_order_starts_at_root(six_lines):
    ext = extend_cluster(six_lines)
    order = canonical_order(ext)
    assert order[0] == "q0"
    assert len(order) == len(ext.blown_points())


# ---------------------------------------------------------------------------
# markings
# ---------------------------------------------------------------------------


def test_marking_six_lines(six_lines):
    marks = marking(six_lines)
    ext = extend_cluster(six_lines)
    graph = exceptional_graph(ext)
    for i in range(1, 7):
        # the marked piece is the arm end next to the -1 curve
        e_i = graph.attach[i - 1]
        assert marks[i] in graph.tree.neighbors(e_i)
        assert graph.tree.weight(marks[i]) == -2


def test_marking_cusp_line_values(cusp_line_53, cusp_line):
    assert marking(cusp_line_53) == {1: "q2", 2: "q1"}
    marks = marking(cusp_line)
    assert marks[2] == "q1"


def test_marking_single_branch(one_line_l2):
    assert marking(one_line_l2) == {1: "q0"}


def test_ambiguous_attachment():
    germ = transverse_lines_germ([1, 2, 2, 3])
    with pytest.raises(AmbiguousAttachment):
        marking(germ)


# ---------------------------------------------------------------------------
# cross-module properties
# ---------------------------------------------------------------------------


def test_full_graph_blows_down_to_empty_random():
    rng = seeded_rng(29)
    for _ in range(40):
        germ = random_germ(rng)
        tree = exceptional_graph(extend_cluster(germ)).tree
        assert reduce_tree(tree).smooth


def test_standard_germs_have_clean_attachments():
    rng = seeded_rng(31)
    count = 0
    for _ in range(40):
        germ = random_germ(rng, standard=True)
        graph = exceptional_graph(extend_cluster(germ))
        for v in graph.attach:
            assert graph.tree.weight(v) == -1
            inside = [u for u in graph.tree.neighbors(v) if u in graph.ecl]
            assert len(inside) == 1
        marks = marking(germ)
        assert set(marks) == set(range(1, germ.nbranches + 1))
        count += 1
    assert count == 40


def test_contracting_appendages_recovers_truncated_graph():
    # blowing the appended points back down must reproduce the exceptional
    # graph of the decoration realized by the original chains alone
    rng = seeded_rng(37)
    for _ in range(25):
        germ = random_germ(rng)
        ext = extend_cluster(germ)
        tree = exceptional_graph(ext).tree
        appended = {pid for pid, _ in ext.appended}
        cur = tree
        while True:
            target = next(
                (
                    v
                    for v in cur.vertices
                    if v in appended and cur.weight(v) == -1 and cur.valence(v) <= 2
                ),
                None,
            )
            if target is None:
                break
            from sandwiched.plumbing import blow_down_step

            cur = blow_down_step(cur, target)
        assert not (set(cur.vertices) & appended)
        truncated_lengths = [
            sum(
                m
                for pid, m in zip(
                    germ.branch(i).chain, branch_multiplicities(germ, i)
                )
                if pid in set(ext.chains[i - 1])
            )
            for i in range(1, germ.nbranches + 1)
        ]
        truncated = DecoratedGerm(
            germ.cluster, germ.branches, truncated_lengths
        )
        expected = exceptional_graph(extend_cluster(truncated)).tree
        assert cur == expected


def test_random_contraction_orders_agree(six_lines):
    tree = exceptional_graph(extend_cluster(six_lines)).tree
    verdicts = {
        reduce_tree(tree, rng=random.Random(seed)).smooth for seed in range(20)
    }
    assert verdicts == {True}
