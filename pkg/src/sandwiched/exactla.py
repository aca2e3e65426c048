"""Exact linear algebra over Q and Z.

Everything here is small and deterministic: Fraction-based row reduction
for nullspaces and membership tests, leading-principal-minor signs for
definiteness, and a Hermite-style normal form so integer kernel bases
have one canonical representative.
"""

from fractions import Fraction


def rref(rows, ncols):
    """Reduced row echelon form over Q.

    Returns (reduced, pivot_cols).  `rows` is a list of sequences; the
    input is not modified.
    """
    m = [[Fraction(x) for x in row] for row in rows]
    pivot_cols = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, len(m)):
            if m[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        m[r], m[pr] = m[pr], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivot_cols.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivot_cols


def nullspace(rows, ncols):
    """Basis of {v : A v = 0} over Q, as Fraction vectors.

    Deterministic: one basis vector per free column, with a 1 in the free
    column and pivot entries back-substituted.
    """
    red, pivot_cols = rref(rows, ncols)
    pivots = set(pivot_cols)
    basis = []
    for free in range(ncols):
        if free in pivots:
            continue
        v = [Fraction(0)] * ncols
        v[free] = Fraction(1)
        for rowi, pc in enumerate(pivot_cols):
            v[pc] = -red[rowi][free]
        basis.append(v)
    return basis


def rank(rows, ncols):
    return len(rref(rows, ncols)[0])


def is_negative_definite_matrix(a):
    """Exact Sylvester test: (-1)^k det(A_k) > 0 for every leading minor.

    Runs fraction-free-style elimination without row swaps; a zero pivot
    means a zero leading minor, hence not definite.
    """
    n = len(a)
    if n == 0:
        return True
    m = [[Fraction(x) for x in row] for row in a]
    minor = Fraction(1)
    for k in range(n):
        piv = m[k][k]
        if piv == 0:
            return False
        minor *= piv
        if (minor if k % 2 else -minor) <= 0:
            return False
        for i in range(k + 1, n):
            if m[i][k] != 0:
                f = m[i][k] / piv
                for j in range(k, n):
                    m[i][j] -= f * m[k][j]
    return True


def _primitive(vec):
    """Scale a rational vector to a primitive integer vector, first nonzero > 0."""
    from math import gcd, lcm

    den = 1
    for x in vec:
        den = lcm(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g:
        ints = [x // g for x in ints]
    for x in ints:
        if x:
            if x < 0:
                ints = [-y for y in ints]
            break
    return ints


def hnf(rows):
    """Row-style Hermite normal form of an integer matrix.

    Zero rows are dropped.  Pivots are positive and entries above each
    pivot are reduced into [0, pivot).  This is the canonical basis used
    for kernel lattices.
    """
    m = [list(map(int, r)) for r in rows]
    nrows = len(m)
    if nrows == 0:
        return []
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        # gcd-out column c below row r
        piv = None
        for i in range(r, nrows):
            if m[i][c] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(r + 1, nrows):
            while m[i][c] != 0:
                q = m[r][c] // m[i][c]
                m[r] = [a - q * b for a, b in zip(m[r], m[i])]
                m[r], m[i] = m[i], m[r]
        if m[r][c] < 0:
            m[r] = [-x for x in m[r]]
        for i in range(r):
            q = m[i][c] // m[r][c]
            if q:
                m[i] = [a - q * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == nrows:
            break
    return [row for row in m[:r] if any(row)]


def integer_kernel(rows, ncols):
    """HNF basis of the integer kernel {v in Z^n : A v = 0}.

    The rational nullspace is saturated (cleared to primitive vectors),
    so the result is a basis of the full kernel lattice, not a finite-index
    sublattice.
    """
    basis = nullspace(rows, ncols)
    prim = [_primitive(v) for v in basis]
    return hnf(prim)


def solve_homogeneous_sample(basis, coeffs):
    """Linear combination sum(c * v) of Fraction basis vectors."""
    if not basis:
        return []
    n = len(basis[0])
    out = [Fraction(0)] * n
    for c, v in zip(coeffs, basis):
        if c:
            for j in range(n):
                out[j] += c * v[j]
    return out
