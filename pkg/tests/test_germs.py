import pytest

from conftest import (
    cusp_germ,
    load_germ,
    make_germ,
    random_germ,
    seeded_rng,
    three_five_germ,
    transverse_lines_germ,
    two_five_germ,
)
from oracles import torus_delta, torus_multiplicity_sequence
from sandwiched.germs import (
    Branch,
    BranchesNotSeparated,
    DecoratedGerm,
    InvalidGerm,
    ParseError,
    Point,
    ProximityCluster,
    are_topologically_equivalent,
    branch_multiplicities,
    canonical_form,
    delta_branch,
    delta_curve,
    embedded_total_multiplicity,
    format_germ,
    is_standard,
    pairwise_intersection,
    parse_germ,
    total_multiplicity,
    validate_cluster,
    validate_germ,
)


# ---------------------------------------------------------------------------
# cluster validation
# ---------------------------------------------------------------------------


def test_cusp_cluster_is_valid():
    cluster = ProximityCluster(
        [Point("q0"), Point("q1", "q0"), Point("q2", "q1", "q0")]
    )
    assert validate_cluster(cluster).ok


def test_single_root_is_valid():
    assert validate_cluster(ProximityCluster([Point("q0")])).ok


def test_satellite_to_sibling_rejected():
    cluster = ProximityCluster(
        [Point("q0"), Point("a", "q0"), Point("b", "q0", "a")]
    )
    verdict = validate_cluster(cluster)
    assert not verdict.ok
    assert any(v.kind == "BadSatelliteTarget" and v.point == "b" for v in verdict.violations)


def test_duplicate_id_and_multiple_roots():
    verdict = validate_cluster(ProximityCluster([Point("q0"), Point("q0")]))
    assert any(v.kind == "DuplicateId" for v in verdict.violations)
    verdict = validate_cluster(ProximityCluster([Point("a"), Point("b")]))
    assert any(v.kind == "MultipleRoots" for v in verdict.violations)


def test_parent_cycle_detected():
    verdict = validate_cluster(
        ProximityCluster([Point("a", "b"), Point("b", "a")])
    )
    assert any(v.kind == "CyclicParentage" for v in verdict.violations)


def test_root_satellite_rejected():
    verdict = validate_cluster(ProximityCluster([Point("q0", None, "q0")]))
    assert any(v.kind == "BadSatelliteTarget" for v in verdict.violations)


def test_two_satellites_same_target_rejected():
    # two children of q1 both proximate to q0 would be the same point
    cluster = ProximityCluster(
        [
            Point("q0"),
            Point("q1", "q0"),
            Point("a", "q1", "q0"),
            Point("b", "q1", "q0"),
        ]
    )
    verdict = validate_cluster(cluster)
    assert any(v.kind == "BadSatelliteTarget" and v.point == "b" for v in verdict.violations)


def test_satellite_chain_of_torus_branch_is_valid():
    # (q0, q1, q2 sat q0, q3 sat q1) is the diagram of y^3 = x^5
    germ = three_five_germ()
    assert validate_germ(germ).ok


# ---------------------------------------------------------------------------
# multiplicities and delta
# ---------------------------------------------------------------------------


def test_cusp_multiplicities():
    assert branch_multiplicities(cusp_germ(), 1) == (2, 1, 1)
    assert branch_multiplicities(cusp_germ(), 1) == torus_multiplicity_sequence(2, 3)


def test_smooth_branch_multiplicities():
    germ = make_germ([("q0", None, None)], [("q0",)], [1])
    assert branch_multiplicities(germ, 1) == (1,)


def test_two_five_multiplicities_and_delta():
    germ = two_five_germ()
    assert branch_multiplicities(germ, 1) == (2, 2, 1, 1)
    assert branch_multiplicities(germ, 1) == torus_multiplicity_sequence(2, 5)
    assert delta_branch(germ, 1) == 2 == torus_delta(2, 5)


def test_three_five_multiplicities_and_delta():
    germ = three_five_germ()
    assert branch_multiplicities(germ, 1) == (3, 2, 1, 1)
    assert branch_multiplicities(germ, 1) == torus_multiplicity_sequence(3, 5)
    assert delta_branch(germ, 1) == 4 == torus_delta(3, 5)


def test_delta_cusp_and_line(cusp_line):
    assert delta_branch(cusp_line, 1) == 1
    assert delta_branch(cusp_line, 2) == 0
    assert delta_curve(cusp_line) == 4


def test_delta_six_lines(six_lines):
    assert delta_curve(six_lines) == 15
    assert all(delta_branch(six_lines, i) == 0 for i in range(1, 7))


def test_delta_single_smooth_branch(one_line_l2):
    assert delta_curve(one_line_l2) == 0


# ---------------------------------------------------------------------------
# intersections
# ---------------------------------------------------------------------------


def test_cusp_line_intersection(cusp_line):
    assert pairwise_intersection(cusp_line, 1, 2) == 3


def test_transverse_lines_intersection():
    germ = transverse_lines_germ([1, 1])
    assert pairwise_intersection(germ, 1, 2) == 1


def test_six_lines_pairwise(six_lines):
    for i in range(1, 7):
        for k in range(i + 1, 7):
            assert pairwise_intersection(six_lines, i, k) == 1


def test_identical_chains_rejected():
    germ = make_germ(
        [("q0", None, None), ("q1", "q0", None)],
        [("q0", "q1"), ("q0", "q1")],
        [2, 2],
    )
    verdict = validate_germ(germ)
    assert any(v.kind == "BranchesNotSeparated" for v in verdict.violations)
    with pytest.raises(InvalidGerm):
        germ.require_valid()


def test_pairwise_needs_distinct_indices(cusp_line):
    with pytest.raises(ValueError):
        pairwise_intersection(cusp_line, 1, 1)


# ---------------------------------------------------------------------------
# total multiplicities, both rules, standardness
# ---------------------------------------------------------------------------


def test_total_multiplicity_cusp_line(cusp_line):
    assert total_multiplicity(cusp_line, 1) == 3
    assert total_multiplicity(cusp_line, 2) == 2


def test_total_multiplicity_six_lines(six_lines):
    assert [total_multiplicity(six_lines, i) for i in range(1, 7)] == [1] * 6


def test_total_multiplicity_single_smooth(one_line_l2):
    assert total_multiplicity(one_line_l2, 1) == 0


def test_embedded_multiplicity_rules(cusp_line):
    assert embedded_total_multiplicity(cusp_line, 1, "calibrated") == 5
    assert embedded_total_multiplicity(cusp_line, 2, "calibrated") == 2
    assert embedded_total_multiplicity(cusp_line, 1, "plain-nc") == 4
    assert embedded_total_multiplicity(cusp_line, 2, "plain-nc") == 2


def test_embedded_multiplicity_six_lines(six_lines):
    for i in range(1, 7):
        assert embedded_total_multiplicity(six_lines, i, "calibrated") == 1
        assert embedded_total_multiplicity(six_lines, i, "plain-nc") == 1


def test_embedded_multiplicity_two_five():
    # blow-ups: mult-2 points q0, q1; tangency at q2; satellite q3
    germ = two_five_germ()
    assert embedded_total_multiplicity(germ, 1, "plain-nc") == 6
    assert embedded_total_multiplicity(germ, 1, "calibrated") == 7


def test_embedded_multiplicity_unknown_rule(cusp_line):
    with pytest.raises(ValueError):
        embedded_total_multiplicity(cusp_line, 1, "nonsense")


def test_is_standard(cusp_line, six_lines):
    assert is_standard(cusp_line, "calibrated")
    assert is_standard(six_lines, "calibrated")
    lowered = DecoratedGerm(cusp_line.cluster, cusp_line.branches, (5, 3))
    assert not is_standard(lowered, "calibrated")
    assert is_standard(lowered, "plain-nc")


def test_length_below_total_multiplicity_rejected():
    germ = make_germ(
        [("q0", None, None), ("q1", "q0", None), ("q2", "q1", "q0")],
        [("q0", "q1", "q2")],
        [1],
    )
    verdict = validate_germ(germ)
    assert any(v.kind == "DecorationTooSmall" for v in verdict.violations)


# ---------------------------------------------------------------------------
# equivalence and canonical forms
# ---------------------------------------------------------------------------


def test_equivalent_after_renaming(cusp_line):
    renamed = make_germ(
        [("x", None, None), ("y", "x", None), ("z", "y", "x")],
        [("x", "y", "z"), ("x", "y")],
        [6, 3],
        names=["a", "b"],
    ).require_valid()
    same, witness = are_topologically_equivalent(cusp_line, renamed)
    assert same
    assert witness == {"q0": "x", "q1": "y", "q2": "z"}


def test_swapped_numbering_not_equivalent(cusp_line):
    swapped = make_germ(
        [("q0", None, None), ("q1", "q0", None), ("q2", "q1", "q0")],
        [("q0", "q1"), ("q0", "q1", "q2")],
        [3, 6],
    ).require_valid()
    same, _ = are_topologically_equivalent(cusp_line, swapped)
    assert not same


def test_different_proximity_not_equivalent():
    free = make_germ(
        [("q0", None, None), ("q1", "q0", None), ("q2", "q1", None)],
        [("q0", "q1", "q2")],
        [4],
    ).require_valid()
    sat = cusp_germ(4)
    same, _ = are_topologically_equivalent(free, sat)
    assert not same


def test_different_lengths_not_equivalent(cusp_line, cusp_line_53):
    same, _ = are_topologically_equivalent(cusp_line, cusp_line_53)
    assert not same


def test_canonical_form_invariant_under_relabelling():
    rng = seeded_rng(7)
    for _ in range(30):
        germ = random_germ(rng)
        order = list(range(len(germ.cluster.points)))
        rng.shuffle(order)
        mapping = {
            p.id: f"r{order[n]}" for n, p in enumerate(germ.cluster.points)
        }
        pts = [
            Point(
                mapping[p.id],
                mapping[p.parent] if p.parent else None,
                mapping[p.satellite_target] if p.satellite_target else None,
            )
            for p in germ.cluster.points
        ]
        rng.shuffle(pts)
        branches = [
            Branch(b.name, tuple(mapping[x] for x in b.chain), b.index)
            for b in germ.branches
        ]
        relabeled = DecoratedGerm(
            ProximityCluster(pts), branches, germ.lengths
        ).require_valid()
        assert canonical_form(germ) == canonical_form(relabeled)
        same, _ = are_topologically_equivalent(germ, relabeled)
        assert same


# ---------------------------------------------------------------------------
# randomized invariant properties
# ---------------------------------------------------------------------------


def test_delta_decomposition_identity_random():
    # delta_curve internally cross-checks the pointwise total against
    # branch deltas plus pairwise intersections and would raise on drift
    rng = seeded_rng(11)
    for _ in range(60):
        germ = random_germ(rng)
        delta_curve(germ)


def test_multiplicities_non_increasing_and_terminal_one():
    rng = seeded_rng(13)
    for _ in range(60):
        germ = random_germ(rng)
        for i in range(1, germ.nbranches + 1):
            mults = branch_multiplicities(germ, i)
            assert mults[-1] == 1
            assert all(a >= b for a, b in zip(mults, mults[1:]))
            assert all(m > 0 for m in mults)


def test_total_multiplicity_bounds_random():
    rng = seeded_rng(17)
    for _ in range(60):
        germ = random_germ(rng)
        for i in range(1, germ.nbranches + 1):
            m = total_multiplicity(germ, i)
            for rule in ("calibrated", "plain-nc"):
                big = embedded_total_multiplicity(germ, i, rule)
                assert m <= big
        for i in range(1, germ.nbranches + 1):
            if germ.length(i) >= embedded_total_multiplicity(germ, i, "calibrated") + 1:
                assert germ.length(i) >= total_multiplicity(germ, i)


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def test_round_trip(cusp_line):
    text = format_germ(cusp_line)
    again = parse_germ(text).require_valid()
    assert again == cusp_line
    assert format_germ(again) == text


def test_round_trip_random():
    rng = seeded_rng(19)
    for _ in range(25):
        germ = random_germ(rng)
        text = format_germ(germ)
        again = parse_germ(text).require_valid()
        assert canonical_form(again) == canonical_form(germ)
        assert format_germ(again) == text


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_germ("point")
    with pytest.raises(ParseError):
        parse_germ("point q0 nonsense=1")
    with pytest.raises(ParseError):
        parse_germ("branch b chain=q0")
    with pytest.raises(ParseError):
        parse_germ("branch b chain=q0 l=0")
    with pytest.raises(ParseError):
        parse_germ("frobnicate q0")


def test_comments_and_blank_lines():
    germ = parse_germ("# comment\n\npoint q0\nbranch b chain=q0 l=2 # trailing\n")
    assert germ.require_valid().nbranches == 1
