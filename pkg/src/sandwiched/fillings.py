"""Milnor-fiber distinguishing data derived from incidence matrices.

For a standard decorated germ, the boundary of every smoothing can be
capped off by one fixed 4-manifold: a ball with one 2-handle per branch,
attached along the branch knot with framing -(l_i + 2 delta_i) and, seen
from the fiber side, along the marked piece with its plumbing framing
increased by 1.  In the capped manifold the branch spheres pair against
the exceptional (-1)-classes through the incidence matrix, so
-M M^T must reproduce the closed-form Gram matrix

    diagonal  -(l_i + 2 delta_i),     off-diagonal  -(C_i . C_k),

an identity equivalent to the three incidence constraints.  Matrices that
differ as column-permutation classes therefore yield fillings that no
orientation-preserving diffeomorphism respecting the boundary markings
can identify, and counting classes across all germs of a topological
type bounds the number of Stein fillings from below.
"""

import json
from dataclasses import dataclass

from . import germs as germs_mod
from . import incidence as incidence_mod
from . import resolution as resolution_mod
from .exactla import integer_kernel, is_negative_definite_matrix
from .germs import GermError


class ConstraintMismatch(GermError):
    pass


class NotEquivalentGerms(GermError):
    pass


def sphere_gram(germ, matrix):
    """Gram matrix of the branch sphere classes: -M M^T.

    Computed from the matrix and re-derived from the closed form; the two
    must agree exactly or the matrix does not satisfy the constraints.
    """
    cs = incidence_mod.constraints_of(germ)
    verdict = incidence_mod.validate_matrix(matrix, cs)
    if not verdict.ok:
        raise ConstraintMismatch("; ".join(verdict.violations))
    r = matrix.nrows
    gram = [
        [-sum(a * b for a, b in zip(matrix.rows[i], matrix.rows[k])) for k in range(r)]
        for i in range(r)
    ]
    closed = closed_form_gram(cs)
    if tuple(map(tuple, gram)) != closed:
        raise ConstraintMismatch(
            f"-M M^T = {gram} deviates from the closed form {closed}"
        )
    return closed


def closed_form_gram(cs):
    r = cs.nbranches
    return tuple(
        tuple(
            -(cs.lengths[i] + 2 * cs.delta[i]) if i == k else -cs.cross[i][k]
            for k in range(r)
        )
        for i in range(r)
    )


@dataclass(frozen=True)
class CapHandle:
    branch: int
    framing: int  # -(l_i + 2 delta_i)
    piece: str  # sandwiched-graph vertex carrying the attaching fiber
    fiber_framing_offset: int  # attach along the plumbing framing plus this


@dataclass(frozen=True)
class CapDescription:
    handles: tuple

    def to_json(self):
        return json.dumps(
            [
                {
                    "branch": h.branch,
                    "framing": h.framing,
                    "piece": h.piece,
                    "fiber_framing_offset": h.fiber_framing_offset,
                }
                for h in self.handles
            ],
            sort_keys=True,
        )


def cap_description(germ):
    """The cap is a function of the decorated germ alone.

    One 2-handle per branch with framing -(l_i + 2 delta_i), attached at
    the marked piece with the plumbing framing increased by 1.  No
    incidence matrix enters the computation.
    """
    germ.require_valid()
    marks = resolution_mod.marking(germ)
    handles = []
    for i in range(1, germ.nbranches + 1):
        framing = -(germ.length(i) + 2 * germs_mod.delta_branch(germ, i))
        handles.append(
            CapHandle(branch=i, framing=framing, piece=marks[i], fiber_framing_offset=1)
        )
    return CapDescription(tuple(handles))


def euler_number(matrix):
    """Euler number of the fiber: 1 + n - r for an r x n matrix."""
    return 1 + matrix.ncols - matrix.nrows


@dataclass(frozen=True)
class KernelLattice:
    rank: int
    basis: tuple  # HNF rows spanning {v : M v = 0}
    gram: tuple  # -B B^T, negative definite whenever rank > 0


def kernel_lattice(matrix):
    """Diagnostic lattice: the kernel of M inside the diagonal -1 form.

    The basis is the Hermite normal form of the integer kernel, so the
    Gram matrix is deterministic.  This lattice is derived data about the
    exceptional classes orthogonal to every branch sphere; no further
    identification is claimed for it.
    """
    rows = [list(r) for r in matrix.rows]
    basis = integer_kernel(rows, matrix.ncols)
    gram = tuple(
        tuple(-sum(a * b for a, b in zip(u, v)) for v in basis) for u in basis
    )
    return KernelLattice(rank=len(basis), basis=tuple(tuple(v) for v in basis), gram=gram)


@dataclass(frozen=True)
class DistinguishVerdict:
    same_class: bool
    note: str


def distinguish(germ, matrix_a, matrix_b):
    """Same column-permutation class, or provably distinct fillings.

    Distinct canonical forms mean the associated fillings admit no
    orientation-preserving diffeomorphism that preserves the boundary
    markings.
    """
    cs = incidence_mod.constraints_of(germ)
    for m in (matrix_a, matrix_b):
        verdict = incidence_mod.validate_matrix(m, cs)
        if not verdict.ok:
            raise ConstraintMismatch("; ".join(verdict.violations))
    ca = incidence_mod.canonicalize(matrix_a)
    cb = incidence_mod.canonicalize(matrix_b)
    if ca.rows == cb.rows:
        return DistinguishVerdict(
            True, "equal up to column permutation: same deformation class"
        )
    return DistinguishVerdict(
        False,
        "distinct column-permutation classes: the fillings are not "
        "diffeomorphic by any orientation-preserving diffeomorphism "
        "preserving the boundary markings",
    )


def filling_lower_bound(germ_list, matrix_sets):
    """Count canonical classes across germs of one topological type.

    The germs must be pairwise topologically equivalent (numbering and
    lengths respected); each matrix set is validated against its germ.
    The result is the size of the union of canonical forms, a lower bound
    for the number of Stein fillings of the common contact boundary.
    """
    if len(germ_list) != len(matrix_sets):
        raise ValueError("one matrix set per germ required")
    if not germ_list:
        return 0
    first = germ_list[0]
    for other in germ_list[1:]:
        same, _ = germs_mod.are_topologically_equivalent(first, other)
        if not same:
            raise NotEquivalentGerms(
                "germs are not topologically equivalent with matching numbering"
            )
    union = set()
    for germ, mats in zip(germ_list, matrix_sets):
        cs = incidence_mod.constraints_of(germ)
        for m in mats:
            verdict = incidence_mod.validate_matrix(m, cs)
            if not verdict.ok:
                raise ConstraintMismatch("; ".join(verdict.violations))
            union.add(incidence_mod.canonicalize(m).rows)
    return len(union)


@dataclass(frozen=True)
class FillingReport:
    matrix: object
    gram: tuple
    euler: int
    kernel_rank: int
    kernel_gram: tuple
    cap: CapDescription


def filling_report(germ, matrix):
    """Everything derived from one (germ, matrix) pair, matrix canonicalized."""
    canon = incidence_mod.canonicalize(matrix)
    gram = sphere_gram(germ, canon)
    lattice = kernel_lattice(canon)
    if lattice.rank > 0:
        neg = is_negative_definite_matrix([list(row) for row in lattice.gram])
        if not neg:
            raise AssertionError("kernel Gram failed the definiteness check")
    return FillingReport(
        matrix=canon,
        gram=gram,
        euler=euler_number(canon),
        kernel_rank=lattice.rank,
        kernel_gram=lattice.gram,
        cap=cap_description(germ),
    )
