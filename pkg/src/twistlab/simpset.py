"""Finite simplicial sets presented by their non-degenerate simplices.

A simplex is always handled in Eilenberg-Zilber normal form: a
non-degenerate base simplex together with the strictly increasing list
``(i_1 < ... < i_k)`` of degeneracy indices, standing for
``s_{i_k} ... s_{i_1} x``.  Structure maps are evaluated by composing
monotone maps of ordinals and splitting the result into a surjection
followed by an injection; only the injection part consults the face
table.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .groups import FiniteAbelianGroup

DEFAULT_MAX_DIM = 3


def max_supported_dim() -> int:
    return int(os.environ.get("TWISTLAB_MAX_DIM", DEFAULT_MAX_DIM))


class SimplicialError(ValueError):
    pass


class CapabilityError(SimplicialError):
    pass


@dataclass(frozen=True, order=True)
class SimplexId:
    dim: int
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True, order=True)
class EZForm:
    base: SimplexId
    degeneracies: tuple = ()

    def __post_init__(self):
        degs = tuple(self.degeneracies)
        object.__setattr__(self, "degeneracies", degs)
        if any(b <= a for a, b in zip(degs, degs[1:])):
            raise SimplicialError(f"degeneracy list {degs} is not strictly increasing")
        for k, j in enumerate(degs):
            if not 0 <= j <= self.base.dim + k:
                raise SimplicialError(f"degeneracy s{j} invalid in {degs}")

    @property
    def dim(self) -> int:
        return self.base.dim + len(self.degeneracies)

    @property
    def is_degenerate(self) -> bool:
        return bool(self.degeneracies)

    @property
    def surjection(self) -> tuple:
        return surjection_from_degeneracies(self.degeneracies, self.dim)

    @classmethod
    def from_surjection(cls, base: SimplexId, sigma: tuple) -> "EZForm":
        return cls(base, degeneracies_of(sigma))

    def __str__(self):
        word = "".join(f"s{j}" for j in reversed(self.degeneracies))
        return f"{word}({self.base.name})" if word else self.base.name


def nd(dim: int, name: str) -> EZForm:
    return EZForm(SimplexId(dim, name))


# --- monotone maps -----------------------------------------------------
# A monotone map [k] -> [m] is a tuple of length k+1 with values in 0..m.

def identity_map(n: int) -> tuple:
    return tuple(range(n + 1))


def coface(i: int, n: int) -> tuple:
    """The coface d^i : [n-1] -> [n] skipping i."""
    return tuple(j if j < i else j + 1 for j in range(n))


def codegeneracy(j: int, n: int) -> tuple:
    """The codegeneracy s^j : [n+1] -> [n] hitting j twice."""
    return tuple(i if i <= j else i - 1 for i in range(n + 2))


def compose(sigma: tuple, theta: tuple) -> tuple:
    """sigma o theta (apply theta first)."""
    return tuple(sigma[t] for t in theta)


def epi_mono(phi: tuple) -> tuple:
    """Split phi = delta o eps with eps surjective and delta injective."""
    image = sorted(set(phi))
    pos = {v: k for k, v in enumerate(image)}
    return tuple(pos[v] for v in phi), tuple(image)


def degeneracies_of(sigma: tuple) -> tuple:
    return tuple(i for i in range(len(sigma) - 1) if sigma[i] == sigma[i + 1])


def surjection_from_degeneracies(degs: tuple, dim: int) -> tuple:
    sigma = identity_map(dim - len(degs))
    n = dim - len(degs)
    for j in degs:
        sigma = compose(sigma, codegeneracy(j, n))
        n += 1
    return sigma


def decompose(theta: tuple, m: int) -> list:
    """Write theta^* as a word of face and degeneracy operators.

    Returns ``[("d", i), ..., ("s", j), ...]`` in the order they are to
    be applied to an m-simplex.
    """
    eps, delta = epi_mono(theta)
    missing = sorted(set(range(m + 1)) - set(delta), reverse=True)
    ops = [("d", i) for i in missing]
    ops += [("s", j) for j in degeneracies_of(eps)]
    return ops


def is_monotone(theta: tuple, m: int) -> bool:
    return all(0 <= t <= m for t in theta) and all(a <= b for a, b in zip(theta, theta[1:]))


# --- simplicial sets ---------------------------------------------------

@dataclass
class Report:
    ok: bool
    message: str = "ok"
    checked: int = 0
    details: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


class SimplicialSet:
    """A finite simplicial set.

    ``simplices`` maps a dimension to the ordered list of names of its
    non-degenerate simplices; ``faces`` maps each positive-dimensional
    ``SimplexId`` to the tuple ``(d_0 x, ..., d_n x)`` of EZ forms.
    """

    def __init__(self, simplices: Mapping[int, Iterable[str]], faces: Mapping, name: str = "",
                 max_dim: int | None = None):
        self.name = name
        top = max((n for n, names in simplices.items() if list(names)), default=0)
        self.max_dim = top if max_dim is None else max_dim
        if self.max_dim > max_supported_dim():
            raise CapabilityError(
                f"dimension {self.max_dim} exceeds the supported maximum {max_supported_dim()}")
        self._simplices = {}
        for n in range(self.max_dim + 1):
            names = list(simplices.get(n, ()))
            if len(set(names)) != len(names):
                raise SimplicialError(f"duplicate names in dimension {n}")
            self._simplices[n] = [SimplexId(n, s) for s in names]
        self._known = {sid for ids in self._simplices.values() for sid in ids}
        self._faces = {}
        for sid in self._known:
            if sid.dim == 0:
                continue
            if sid not in faces:
                raise SimplicialError(f"no face table entry for {sid.name}")
            fs = tuple(faces[sid])
            if len(fs) != sid.dim + 1:
                raise SimplicialError(f"{sid.name} needs {sid.dim + 1} faces, got {len(fs)}")
            for i, f in enumerate(fs):
                if f.dim != sid.dim - 1:
                    raise SimplicialError(f"d{i}({sid.name}) = {f} has dimension {f.dim}, "
                                          f"expected {sid.dim - 1}")
                if f.base not in self._known:
                    raise SimplicialError(f"d{i}({sid.name}) refers to unknown simplex {f.base.name}")
            self._faces[sid] = fs
        self._cache = {}
        self._applied = {}

    # -- basic accessors

    def simplices(self, n: int) -> list:
        return list(self._simplices.get(n, ()))

    def all_ids(self) -> list:
        return [sid for n in range(self.max_dim + 1) for sid in self._simplices[n]]

    def __contains__(self, sid) -> bool:
        return sid in self._known

    def get(self, dim: int, name: str) -> SimplexId:
        sid = SimplexId(dim, name)
        if sid not in self._known:
            raise KeyError(f"no {dim}-simplex named {name!r}")
        return sid

    def find(self, name: str) -> SimplexId:
        hits = [sid for sid in self._known if sid.name == name]
        if len(hits) != 1:
            raise KeyError(f"{name!r} is {'ambiguous' if hits else 'unknown'}")
        return hits[0]

    def face_table(self, sid: SimplexId) -> tuple:
        return self._faces[sid]

    def counts(self) -> tuple:
        return tuple(len(self._simplices[n]) for n in range(self.max_dim + 1))

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * c for n, c in enumerate(self.counts()))

    def maximal_simplices(self) -> list:
        """Non-degenerate simplices that are not the base of any face."""
        covered = {f.base for fs in self._faces.values() for f in fs}
        return [sid for sid in self.all_ids() if sid not in covered]

    def __repr__(self):
        return f"SimplicialSet({self.name or '?'}, counts={self.counts()})"

    # -- structure maps

    def _apply_injection(self, x: SimplexId, delta: tuple) -> EZForm:
        n = x.dim
        if len(delta) == n + 1:
            return EZForm(x)
        key = (x, delta)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        i = max(set(range(n + 1)) - set(delta))
        inner = tuple(v if v < i else v - 1 for v in delta)
        out = self.apply(inner, self._faces[x][i])
        self._cache[key] = out
        return out

    def apply(self, theta: tuple, s: EZForm) -> EZForm:
        """theta^*(s) for a monotone theta : [k] -> [dim s]."""
        key = (theta, s)
        hit = self._applied.get(key)
        if hit is not None:
            return hit
        if not is_monotone(theta, s.dim):
            raise SimplicialError(f"{theta} is not a monotone map into [{s.dim}]")
        phi = compose(s.surjection, theta)
        eps, delta = epi_mono(phi)
        y = self._apply_injection(s.base, delta)
        out = self._applied[key] = EZForm.from_surjection(y.base, compose(y.surjection, eps))
        return out

    def face(self, i: int, s: EZForm) -> EZForm:
        if s.dim == 0 or not 0 <= i <= s.dim:
            raise SimplicialError(f"face d{i} out of range for a {s.dim}-simplex")
        return self.apply(coface(i, s.dim), s)

    def degeneracy(self, j: int, s: EZForm) -> EZForm:
        if not 0 <= j <= s.dim:
            raise SimplicialError(f"degeneracy s{j} out of range for a {s.dim}-simplex")
        return self.apply(codegeneracy(j, s.dim), s)

    def ez(self, sid: SimplexId | str, dim: int | None = None) -> EZForm:
        if isinstance(sid, str):
            sid = self.find(sid) if dim is None else self.get(dim, sid)
        return EZForm(sid)

    def vertices_of(self, s: EZForm) -> tuple:
        """The ordered vertices of s (as names)."""
        return tuple(self.apply((k,), s).base.name for k in range(s.dim + 1))

    def all_simplices(self, n: int) -> list:
        """Every n-simplex (degenerate ones included) in EZ form."""
        out = []
        for k in range(min(n, self.max_dim) + 1):
            for degs in itertools.combinations(range(n), n - k):
                for sid in self._simplices[k]:
                    try:
                        out.append(EZForm(sid, degs))
                    except SimplicialError:
                        pass
        return out

    # -- subcomplexes

    def closure(self, ids: Iterable[SimplexId]) -> set:
        todo = list(ids)
        seen = set()
        while todo:
            sid = todo.pop()
            if sid in seen:
                continue
            if sid not in self._known:
                raise SimplicialError(f"{sid} is not a simplex of {self.name or 'X'}")
            seen.add(sid)
            for f in self._faces.get(sid, ()):
                todo.append(f.base)
        return seen

    def is_face_closed(self, ids: Iterable[SimplexId]) -> bool:
        ids = set(ids)
        return all(f.base in ids for sid in ids for f in self._faces.get(sid, ()))

    def subcomplex(self, ids: Iterable, close: bool = True, name: str = "") -> "SimplicialSet":
        ids = {self.find(i) if isinstance(i, str) else i for i in ids}
        if close:
            ids = self.closure(ids)
        elif not self.is_face_closed(ids):
            raise SimplicialError("subset is not closed under faces")
        simplices = {n: [s.name for s in self._simplices[n] if s in ids]
                     for n in range(self.max_dim + 1)}
        faces = {sid: self._faces[sid] for sid in ids if sid.dim > 0}
        return SimplicialSet(simplices, faces, name=name or f"sub({self.name})",
                             max_dim=max((s.dim for s in ids), default=0))

    def inclusion_of(self, sub: "SimplicialSet") -> "SimplicialMap":
        images = {sid: EZForm(self.get(sid.dim, sid.name)) for sid in sub.all_ids()}
        return SimplicialMap(sub, self, images)

    def identity(self) -> "SimplicialMap":
        return SimplicialMap(self, self, {sid: EZForm(sid) for sid in self.all_ids()})


class SimplicialMap:
    """A simplicial map given by the images of non-degenerate simplices."""

    def __init__(self, source: SimplicialSet, target: SimplicialSet, images: Mapping):
        self.source = source
        self.target = target
        self.images = dict(images)
        for sid in source.all_ids():
            if sid not in self.images:
                raise SimplicialError(f"map has no image for {sid.name}")
            img = self.images[sid]
            if img.dim != sid.dim or img.base not in target:
                raise SimplicialError(f"bad image {img} for {sid.name}")

    def __call__(self, s: EZForm) -> EZForm:
        img = self.images[s.base]
        if not s.degeneracies:
            return img
        return self.target.apply(s.surjection, img)

    def compose(self, other: "SimplicialMap") -> "SimplicialMap":
        """self o other."""
        return SimplicialMap(other.source, self.target,
                             {sid: self(other.images[sid]) for sid in other.source.all_ids()})

    def is_injective_on_nondegenerate(self) -> bool:
        imgs = list(self.images.values())
        return all(not i.is_degenerate for i in imgs) and len(set(imgs)) == len(imgs)


# --- generic identity checking ----------------------------------------

def check_simplicial_object(simplices: Callable[[int], Iterable], face: Callable, degeneracy: Callable,
                            top: int, fmt: Callable = str, check_degeneracies: bool = True) -> Report:
    """Sweep the simplicial identities over all listed simplices up to ``top``.

    ``face(i, s)`` and ``degeneracy(j, s)`` are the structure maps;
    simplices of dimension n are drawn from ``simplices(n)``.
    """
    checked = 0
    for n in range(top + 1):
        for s in simplices(n):
            for j in range(n + 1):
                for i in range(j):
                    if n < 2:
                        break
                    lhs = face(i, face(j, s))
                    rhs = face(j - 1, face(i, s))
                    checked += 1
                    if lhs != rhs:
                        return Report(False, f"d{i} d{j} != d{j - 1} d{i} on {fmt(s)}: "
                                             f"{fmt(lhs)} vs {fmt(rhs)}", checked)
            if not check_degeneracies:
                continue
            for j in range(n + 1):
                sj = degeneracy(j, s)
                for i in range(n + 2):
                    lhs = face(i, sj)
                    if i < j:
                        rhs = degeneracy(j - 1, face(i, s)) if n > 0 else None
                    elif i in (j, j + 1):
                        rhs = s
                    else:
                        rhs = degeneracy(j, face(i - 1, s))
                    if rhs is None:
                        continue
                    checked += 1
                    if lhs != rhs:
                        return Report(False, f"d{i} s{j} identity fails on {fmt(s)}: "
                                             f"{fmt(lhs)} vs {fmt(rhs)}", checked)
                for i in range(j + 1):
                    lhs = degeneracy(i, sj)
                    rhs = degeneracy(j + 1, degeneracy(i, s))
                    checked += 1
                    if lhs != rhs:
                        return Report(False, f"s{i} s{j} != s{j + 1} s{i} on {fmt(s)}", checked)
    return Report(True, "ok", checked)


def check_simplicial(obj, top: int | None = None) -> Report:
    """Verify the simplicial identities of a set, or the naturality of a map."""
    if isinstance(obj, SimplicialMap):
        return _check_map(obj)
    X = obj
    bad = _check_face_dims(X)
    if bad:
        return bad
    top = X.max_dim + 1 if top is None else top
    return check_simplicial_object(X.all_simplices, X.face, X.degeneracy, top)


def _check_face_dims(X: SimplicialSet) -> Report | None:
    for sid in X.all_ids():
        for i, f in enumerate(X._faces.get(sid, ())):
            if f.dim != sid.dim - 1:
                return Report(False, f"d{i}({sid.name}) has wrong dimension")
    return None


def _check_map(f: SimplicialMap) -> Report:
    checked = 0
    for sid in f.source.all_ids():
        x = EZForm(sid)
        for i in range(sid.dim + 1) if sid.dim else ():
            lhs = f(f.source.face(i, x))
            rhs = f.target.face(i, f(x))
            checked += 1
            if lhs != rhs:
                return Report(False, f"f(d{i} {sid.name}) = {lhs} but d{i} f({sid.name}) = {rhs}",
                              checked)
    return Report(True, "ok", checked)


# --- constructions ------------------------------------------------------

def standard_simplex(n: int) -> SimplicialSet:
    """Delta^n; the k-simplices are named by their vertex strings, e.g. ``"02"``."""
    if n < 0:
        raise SimplicialError("negative dimension")
    if n > max_supported_dim() or n > 9:
        raise CapabilityError(f"standard simplex of dimension {n} exceeds the supported maximum")
    simplices = {}
    faces = {}
    for k in range(n + 1):
        names = ["".join(map(str, c)) for c in itertools.combinations(range(n + 1), k + 1)]
        simplices[k] = names
        if k:
            for s in names:
                faces[SimplexId(k, s)] = tuple(nd(k - 1, s[:i] + s[i + 1:]) for i in range(k + 1))
    return SimplicialSet(simplices, faces, name=f"Delta{n}")


def nerve(group: FiniteAbelianGroup, up_to_dim: int) -> SimplicialSet:
    """NH truncated at ``up_to_dim``; simplices are named by their tuple text."""
    if up_to_dim > max_supported_dim():
        raise CapabilityError(f"nerve dimension {up_to_dim} exceeds the supported maximum")
    zero = group.zero
    nondeg = {n: [g for g in group.tuples(n) if zero not in g] for n in range(up_to_dim + 1)}
    name = group.format_tuple

    def to_ez(g):
        degs = tuple(k for k, a in enumerate(g) if a == zero)
        base = tuple(a for a in g if a != zero)
        return EZForm(SimplexId(len(base), name(base)), degs)

    simplices = {n: [name(g) for g in gs] for n, gs in nondeg.items()}
    faces = {}
    for n in range(1, up_to_dim + 1):
        for g in nondeg[n]:
            faces[SimplexId(n, name(g))] = tuple(to_ez(group.nerve_face(i, g)) for i in range(n + 1))
    X = SimplicialSet(simplices, faces, name=f"N({group})", max_dim=up_to_dim)
    X.tuple_of = {SimplexId(n, name(g)): g for n, gs in nondeg.items() for g in gs}
    X.ez_of_tuple = to_ez
    return X


BASEPOINT = "*"


def quotient(X: SimplicialSet, Z) -> tuple:
    """Collapse a non-empty face-closed subset Z of X to a point.

    ``Z`` may be a sub-``SimplicialSet`` of X or an iterable of
    ``SimplexId``s.  Returns ``(X/Z, j)``.
    """
    if isinstance(Z, SimplicialSet):
        ids = {X.get(sid.dim, sid.name) for sid in Z.all_ids()}
    else:
        ids = {X.find(i) if isinstance(i, str) else i for i in Z}
    if not ids:
        raise SimplicialError("cannot collapse an empty subcomplex (no basepoint)")
    if not X.is_face_closed(ids):
        raise SimplicialError("subcomplex is not closed under faces")
    keep = [sid for sid in X.all_ids() if sid not in ids]
    if any(sid.name == BASEPOINT and sid.dim == 0 for sid in keep):
        raise SimplicialError(f"vertex name {BASEPOINT!r} is reserved for the basepoint")
    star = SimplexId(0, BASEPOINT)

    def push(s: EZForm) -> EZForm:
        if s.base in ids:
            return EZForm(star, tuple(range(s.dim)))
        return s

    simplices = {n: ([BASEPOINT] if n == 0 else []) + [s.name for s in keep if s.dim == n]
                 for n in range(X.max_dim + 1)}
    faces = {sid: tuple(push(f) for f in X.face_table(sid)) for sid in keep if sid.dim > 0}
    Q = SimplicialSet(simplices, faces, name=f"{X.name}/Z", max_dim=X.max_dim)
    images = {sid: push(EZForm(sid)) for sid in X.all_ids()}
    return Q, SimplicialMap(X, Q, images)
