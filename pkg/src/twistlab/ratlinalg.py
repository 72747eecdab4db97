"""Exact linear algebra over the rationals (row reduction, kernels, affine solves)."""
from __future__ import annotations

from fractions import Fraction
from math import gcd


def rref(rows, ncols=None):
    """Reduced row echelon form.  Returns (matrix, pivot columns)."""
    M = [[Fraction(v) for v in row] for row in rows]
    ncols = len(M[0]) if M else (ncols or 0)
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c]), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [v * inv for v in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M[:r], pivots


def rank(rows) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def nullspace(rows, ncols):
    """A basis of {y : rows y = 0} as a list of vectors."""
    R, piv = rref(rows, ncols) if rows else ([], [])
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, p in enumerate(piv):
            v[p] = -R[r][f]
        basis.append(v)
    return basis


def solve_affine(A, b, ncols):
    """One solution of A x = b (free variables zero), or None if inconsistent."""
    if not A:
        return [Fraction(0)] * ncols
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, piv = rref(aug, ncols + 1)
    if piv and piv[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for r, p in enumerate(piv):
        x[p] = R[r][ncols]
    return x


def primitive(v):
    """Scale a rational vector to the primitive integer vector with the same direction."""
    den = 1
    for a in v:
        a = Fraction(a)
        den = den * a.denominator // gcd(den, a.denominator)
    ints = [int(Fraction(a) * den) for a in v]
    g = 0
    for a in ints:
        g = gcd(g, a)
    if g > 1:
        ints = [a // g for a in ints]
    return tuple(ints)


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))
