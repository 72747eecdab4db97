"""Normalized group-valued cochains, the coboundary, and trivialization of 2-cocycles."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .groups import FiniteAbelianGroup
from .intlinalg import ModularObstruction, lex_least_solution, solve_mod
from .simpset import EZForm, SimplexId, SimplicialMap, SimplicialSet

__all__ = [
    "Cochain", "CochainError", "FiniteAbelianGroup", "ObstructionCertificate", "coboundary",
    "is_cocycle", "solve_trivialization", "trivialization_certificate", "pull_back", "restrict",
    "trivializing_solutions", "incidence_matrix",
]


class CochainError(ValueError):
    pass


class Cochain:
    """A normalized k-cochain: values on non-degenerate k-simplices, zero elsewhere."""

    def __init__(self, space: SimplicialSet, degree: int, group: FiniteAbelianGroup,
                 values: Mapping | None = None, name: str = ""):
        self.space = space
        self.degree = degree
        self.group = group
        self.name = name
        self.values = {}
        for key, v in (values or {}).items():
            sid = self._sid(key)
            if sid.dim != degree:
                raise CochainError(f"{sid.name} is not a {degree}-simplex")
            e = group.element(v)
            if e != group.zero:
                self.values[sid] = e

    def _sid(self, key) -> SimplexId:
        if isinstance(key, SimplexId):
            if key not in self.space:
                raise CochainError(f"{key.name} is not a simplex of the base")
            return key
        if isinstance(key, EZForm):
            return key.base
        return self.space.get(self.degree, key)

    @classmethod
    def zero(cls, space, degree, group, name=""):
        return cls(space, degree, group, {}, name=name)

    def __call__(self, s) -> tuple:
        if isinstance(s, EZForm):
            if s.is_degenerate:
                return self.group.zero
            s = s.base
        elif isinstance(s, str):
            s = self.space.get(self.degree, s)
        return self.values.get(s, self.group.zero)

    def _check(self, other):
        if other.space is not self.space or other.degree != self.degree or other.group != self.group:
            raise CochainError("cochains live on different complexes, degrees or groups")

    def __add__(self, other):
        self._check(other)
        keys = set(self.values) | set(other.values)
        return Cochain(self.space, self.degree, self.group,
                       {k: self.group.add(self(k), other(k)) for k in keys})

    def __neg__(self):
        return Cochain(self.space, self.degree, self.group,
                       {k: self.group.neg(v) for k, v in self.values.items()})

    def __sub__(self, other):
        return self + (-other)

    def __eq__(self, other):
        if not isinstance(other, Cochain):
            return NotImplemented
        return (self.space is other.space and self.degree == other.degree
                and self.group == other.group and self.values == other.values)

    def __hash__(self):
        return hash((self.degree, frozenset(self.values.items())))

    def is_zero(self) -> bool:
        return not self.values

    def as_dict(self) -> dict:
        """Values keyed by simplex name, zeros included, in presentation order."""
        return {sid.name: self(sid) for sid in self.space.simplices(self.degree)}

    def __repr__(self):
        vals = ", ".join(f"{k.name}={self.group.format(v)}" for k, v in sorted(self.values.items()))
        return f"Cochain(deg={self.degree}, {vals or '0'})"


def coboundary(c: Cochain) -> Cochain:
    X, H = c.space, c.group
    out = {}
    for x in X.simplices(c.degree + 1):
        ex = EZForm(x)
        acc = H.zero
        for i in range(x.dim + 1):
            v = c(X.face(i, ex))
            acc = H.add(acc, v) if i % 2 == 0 else H.sub(acc, v)
        out[x] = acc
    return Cochain(X, c.degree + 1, H, out)


def is_cocycle(c: Cochain) -> bool:
    return coboundary(c).is_zero()


def pull_back(c: Cochain, f: SimplicialMap) -> Cochain:
    if f.target is not c.space:
        raise CochainError("map does not land in the cochain's complex")
    vals = {sid: c(f.images[sid]) for sid in f.source.simplices(c.degree)}
    return Cochain(f.source, c.degree, c.group, vals)


def restrict(c: Cochain, inclusion: SimplicialMap) -> Cochain:
    return pull_back(c, inclusion)


def incidence_matrix(X: SimplicialSet, k: int = 1):
    """Signed incidence of non-degenerate (k+1)-simplices on k-simplices."""
    rows = X.simplices(k + 1)
    cols = X.simplices(k)
    index = {sid: j for j, sid in enumerate(cols)}
    A = []
    for x in rows:
        row = [0] * len(cols)
        for i in range(x.dim + 1):
            f = X.face(i, EZForm(x))
            if not f.is_degenerate:
                row[index[f.base]] += (-1) ** i
        A.append(row)
    return rows, cols, A


@dataclass
class ObstructionCertificate:
    """Weights on 2-simplices (for one cyclic factor) proving [gamma] != 0.

    The weighted sum of boundary rows vanishes mod the factor's modulus
    while the weighted sum of cocycle values does not.
    """

    component: int
    modulus: int
    weights: dict

    def verify(self, gamma: Cochain) -> bool:
        rows, cols, A = incidence_matrix(gamma.space, gamma.degree - 1)
        w = [self.weights.get(x, 0) for x in rows]
        b = [gamma(x)[self.component] for x in rows]
        return ModularObstruction(self.modulus, w).verify(A, b)


def _systems(gamma: Cochain):
    if not is_cocycle(gamma):
        raise CochainError("precondition failed: the cochain is not a cocycle")
    rows, cols, A = incidence_matrix(gamma.space, gamma.degree - 1)
    for c, d in enumerate(gamma.group.moduli):
        yield c, d, rows, cols, A, [gamma(x)[c] for x in rows]


def trivialization_certificate(gamma: Cochain) -> ObstructionCertificate | None:
    """An obstruction certificate if ``gamma`` is not a coboundary, else None."""
    for c, d, rows, cols, A, b in _systems(gamma):
        res = solve_mod(A, b, d, len(cols))
        if isinstance(res, ModularObstruction):
            return ObstructionCertificate(c, d, {x: w for x, w in zip(rows, res.weights) if w})
    return None


def solve_trivialization(gamma: Cochain) -> Cochain | None:
    """The lexicographically least alpha with d(alpha) = gamma, or None."""
    cols = gamma.space.simplices(gamma.degree - 1)
    parts = []
    for c, d, rows, cols, A, b in _systems(gamma):
        sol = lex_least_solution(A, b, d, len(cols))
        if sol is None:
            return None
        parts.append(sol)
    vals = {e: tuple(p[j] for p in parts) for j, e in enumerate(cols)}
    return Cochain(gamma.space, gamma.degree - 1, gamma.group, vals)


def trivializing_solutions(gamma: Cochain):
    """Per cyclic factor ``ModularSolution``s of d(alpha) = gamma, or None if infeasible."""
    out = []
    for c, d, rows, cols, A, b in _systems(gamma):
        sol = solve_mod(A, b, d, len(cols))
        if isinstance(sol, ModularObstruction):
            return None
        out.append(sol)
    return out
