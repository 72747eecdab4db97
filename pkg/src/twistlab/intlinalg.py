"""Integer Smith normal form and linear systems over Z/d."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd


def _eye(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(A, ncols=None):
    """Return (U, D, V) with U A V = D diagonal, d_1 | d_2 | ..., U, V unimodular.

    ``A`` is a list of integer rows; pass ``ncols`` when A has no rows.
    """
    m = len(A)
    n = len(A[0]) if m else (ncols or 0)
    D = [list(map(int, row)) for row in A]
    U = _eye(m)
    V = _eye(n)

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        if q:
            D[dst] = [a + q * b for a, b in zip(D[dst], D[src])]
            U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, q):
        if q:
            for row in D:
                row[dst] += q * row[src]
            for row in V:
                row[dst] += q * row[src]

    for t in range(min(m, n)):
        while True:
            entries = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
            if not entries:
                return U, D, V
            _, i, j = min(entries)
            swap_rows(t, i)
            swap_cols(t, j)
            clean = True
            p = D[t][t]
            for i in range(t + 1, m):
                add_row(i, t, -(D[i][t] // p))
                clean &= D[i][t] == 0
            for j in range(t + 1, n):
                add_col(j, t, -(D[t][j] // p))
                clean &= D[t][j] == 0
            if not clean:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if D[t][t] < 0:
            D[t] = [-a for a in D[t]]
            U[t] = [-a for a in U[t]]
    return U, D, V


@dataclass
class ModularSolution:
    """Solution set of A x = b over Z/d: particular + span of kernel generators."""

    modulus: int
    particular: list
    generators: list  # (vector, order)

    @property
    def count(self) -> int:
        n = 1
        for _, order in self.generators:
            n *= order
        return n

    def enumerate(self):
        d = self.modulus
        ranges = [range(order) for _, order in self.generators]
        for coeffs in itertools.product(*ranges):
            x = list(self.particular)
            for c, (vec, _) in zip(coeffs, self.generators):
                if c:
                    x = [(a + c * v) % d for a, v in zip(x, vec)]
            yield x


@dataclass
class ModularObstruction:
    """A row combination y with y A = 0 and y b != 0 (mod d)."""

    modulus: int
    weights: list

    def verify(self, A, b) -> bool:
        d = self.modulus
        n = len(A[0]) if A else 0
        cols_ok = all(sum(w * A[i][j] for i, w in enumerate(self.weights)) % d == 0
                      for j in range(n))
        return cols_ok and sum(w * bi for w, bi in zip(self.weights, b)) % d != 0


def solve_mod(A, b, d, ncols=None):
    """Solve A x = b over Z/d.

    Returns a ``ModularSolution`` or a ``ModularObstruction``.
    """
    m = len(A)
    n = len(A[0]) if m else (ncols or 0)
    U, D, V = smith_normal_form(A, n)
    c = [sum(U[i][k] * b[k] for k in range(m)) for i in range(m)]
    y = [0] * n
    gens = []
    for i in range(m):
        dii = D[i][i] if i < n else 0
        g = gcd(dii, d)
        if c[i] % g:
            scale = d // g
            return ModularObstruction(d, [(scale * u) % d for u in U[i]])
        if dii:
            dg = d // g
            if dg > 1:
                y[i] = (c[i] // g) * pow(dii // g, -1, dg) % dg
    for j in range(n):
        dii = D[j][j] if j < m else 0
        g = gcd(dii, d)
        if g == 1:
            continue
        vec = [(V[r][j] * (d // g)) % d for r in range(n)]
        gens.append((vec, g))
    x = [sum(V[r][k] * y[k] for k in range(n)) % d for r in range(n)]
    return ModularSolution(d, x, gens)


def lex_least_solution(A, b, d, ncols=None):
    """Lexicographically least solution of A x = b over Z/d, or None."""
    n = len(A[0]) if A else (ncols or 0)
    sol = solve_mod(A, b, d, n)
    if isinstance(sol, ModularObstruction):
        return None
    fixed = []
    for k in range(n):
        for v in range(d):
            rhs = [(bi - sum(row[j] * fixed[j] for j in range(k)) - row[k] * v) % d
                   for row, bi in zip(A, b)]
            rest = [row[k + 1:] for row in A]
            if k + 1 == n:
                ok = all(r % d == 0 for r in rhs)
            else:
                ok = isinstance(solve_mod(rest, rhs, d), ModularSolution) if A else True
            if ok:
                fixed.append(v)
                break
        else:  # pragma: no cover - the full system was solvable
            raise AssertionError("lost feasibility during lexicographic descent")
    return fixed
