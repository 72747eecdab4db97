"""Exact convex geometry of twisted distributions.

The polytope of distributions is cut out by linear equalities in one
variable per (maximal simplex, outcome tuple) together with
non-negativity.  Contextuality is decided by an exact simplex method and
vertices are enumerated by the double description method.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .bundle import Section, TwistedBundle, TwistingFunction, sections as enumerate_sections
from .cochain import Cochain, pull_back, trivialization_certificate
from .dist import (DistributionError, TwistedDistribution, bundle_face_word, classical_embed, delta,
                   face_routes, restrict_along)
from .ratlinalg import dot, nullspace, primitive, rank, rref, solve_affine
from .simpset import CapabilityError, EZForm, SimplexId, SimplicialMap, max_supported_dim

# --- H-representation -------------------------------------------------------


@dataclass
class EqualityRow:
    coeffs: dict  # variable index -> Fraction
    rhs: Fraction
    label: str

    def key(self):
        return tuple(sorted(self.coeffs.items())), self.rhs


def _normalize_row(coeffs: dict, rhs: Fraction):
    coeffs = {k: Fraction(v) for k, v in coeffs.items() if v}
    if not coeffs:
        return coeffs, Fraction(rhs)
    keys = sorted(coeffs)
    vec = primitive([coeffs[k] for k in keys] + [Fraction(rhs)])
    scale = 1 if vec[0] > 0 else -1
    out = {k: Fraction(scale * v) for k, v in zip(keys, vec[:-1])}
    return out, Fraction(scale * vec[-1])


class PolytopeH:
    """{x : A x = b, x >= 0} over the coordinates ``variables``."""

    def __init__(self, twisting: TwistingFunction, variables, rows, expressions):
        self.twisting = twisting
        self.space = twisting.space
        self.group = twisting.group
        self.variables = list(variables)
        self.index = {v: k for k, v in enumerate(self.variables)}
        self.rows = list(rows)
        self.expressions = expressions

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    def dense(self):
        n = self.num_variables
        A = [[row.coeffs.get(j, Fraction(0)) for j in range(n)] for row in self.rows]
        b = [row.rhs for row in self.rows]
        return A, b

    def equality_rank(self) -> int:
        return rank(self.dense()[0])

    def affine_dimension(self) -> int:
        """Dimension of the affine hull of the equalities (not of the polytope itself)."""
        return self.num_variables - self.equality_rank()

    def contains(self, vec) -> bool:
        vec = [Fraction(v) for v in vec]
        if any(v < 0 for v in vec):
            return False
        return all(sum(c * vec[j] for j, c in row.coeffs.items()) == row.rhs for row in self.rows)

    def vector_of(self, p: TwistedDistribution) -> list:
        if p.space is not self.space:
            raise DistributionError("distribution lives on a different base")
        return [p.prob(x, g) for x, g in self.variables]

    def to_distribution(self, vec, name: str = "") -> TwistedDistribution:
        vec = [Fraction(v) for v in vec]
        weights = {}
        for y, table in self.expressions.items():
            weights[y] = {g: sum(c * vec[j] for j, c in expr.items()) for g, expr in table.items()}
        return TwistedDistribution(self.twisting, weights, name)

    def describe(self) -> list:
        """Human-readable rows ``label: sum c*var = rhs``."""
        out = []
        for row in self.rows:
            terms = " + ".join(f"{c}*p[{self.variables[j][0].name}|{self.group.format_tuple(self.variables[j][1])}]"
                               for j, c in sorted(row.coeffs.items()))
            out.append(f"{row.label}: {terms or '0'} = {row.rhs}")
        return out


def build_hrep(twisting: TwistingFunction, pinned: Mapping | None = None) -> PolytopeH:
    """Equalities describing every twisted distribution over ``twisting``.

    ``pinned`` optionally maps simplices to fixed distributions (for
    instance the restriction of a deterministic distribution to a
    subcomplex); each pinned value adds one equality per outcome.
    """
    X, H = twisting.space, twisting.group
    if X.max_dim > max_supported_dim():
        raise CapabilityError(f"complex dimension {X.max_dim} exceeds the supported maximum")
    bundle = TwistedBundle(twisting)
    maximal = X.maximal_simplices()
    variables = [(x, g) for x in maximal for g in H.tuples(x.dim)]
    index = {v: k for k, v in enumerate(variables)}

    expressions = {}
    for y, (x, word) in face_routes(X).items():
        table = {g: {} for g in H.tuples(y.dim)}
        ex = EZForm(x)
        for g in H.tuples(x.dim):
            h = bundle_face_word(bundle, (g, ex), word)[0]
            j = index[(x, g)]
            table[h][j] = table[h].get(j, 0) + 1
        expressions[y] = table

    def expr(s: EZForm, g) -> dict:
        if not s.is_degenerate:
            return expressions[s.base][g]
        # g must be the degeneracy of some h; undo by the matching faces
        h = g
        for j in reversed(s.degeneracies):
            h = H.nerve_face(j, h)
        lifted = h
        for j in s.degeneracies:
            lifted = H.nerve_degeneracy(j, lifted)
        return expressions[s.base][h] if lifted == g else {}

    rows, seen = [], set()

    def add(coeffs, rhs, label):
        coeffs, rhs = _normalize_row(coeffs, rhs)
        if not coeffs and rhs == 0:
            return
        row = EqualityRow(coeffs, rhs, label)
        if row.key() in seen:
            return
        seen.add(row.key())
        rows.append(row)

    for x in maximal:
        add({index[(x, g)]: 1 for g in H.tuples(x.dim)}, Fraction(1), f"normalize {x.name}")
    for x in X.all_ids():
        if x.dim == 0:
            continue
        ex = EZForm(x)
        for i in range(x.dim + 1):
            face = X.face(i, ex)
            groups = defaultdict(list)
            for g in H.tuples(x.dim):
                groups[bundle.face(i, (g, ex))[0]].append(g)
            for h in H.tuples(x.dim - 1):
                coeffs = defaultdict(Fraction)
                for g in groups.get(h, ()):
                    for j, c in expressions[x][g].items():
                        coeffs[j] += c
                for j, c in expr(face, h).items():
                    coeffs[j] -= c
                add(coeffs, Fraction(0), f"d{i} {x.name} @ {H.format_tuple(h)}")
    for sid, dist in (pinned or {}).items():
        y = sid if isinstance(sid, SimplexId) else X.find(sid)
        for g in H.tuples(y.dim):
            add(dict(expressions[y][g]), Fraction(dist.get(g, 0)), f"pin {y.name} @ {H.format_tuple(g)}")
    return PolytopeH(twisting, variables, rows, expressions)


# --- exact simplex method ---------------------------------------------------


@dataclass
class LPOutcome:
    feasible: bool
    x: list | None = None
    dual: list | None = None


def lp_feasibility(A, b) -> LPOutcome:
    """Decide {x >= 0 : A x = b} by phase-one simplex with Bland's rule.

    When infeasible, ``dual`` holds y with y^T A <= 0 and y^T b > 0.
    """
    m = len(A)
    n = len(A[0]) if m else 0
    sign = [1 if Fraction(bi) >= 0 else -1 for bi in b]
    T = [[Fraction(sign[i] * a) for a in A[i]] + [Fraction(int(i == k)) for k in range(m)]
         + [Fraction(sign[i] * b[i])] for i in range(m)]
    basis = [n + i for i in range(m)]
    width = n + m
    cost = [Fraction(0)] * n + [Fraction(1)] * m
    red = [cost[j] - sum(T[i][j] for i in range(m)) for j in range(width)]
    while True:
        enter = next((j for j in range(width) if red[j] < 0), None)
        if enter is None:
            break
        best = None
        for i in range(m):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:  # pragma: no cover - phase one is bounded below
            raise RuntimeError("unbounded phase-one problem")
        r = best[1]
        piv = T[r][enter]
        T[r] = [v / piv for v in T[r]]
        for i in range(m):
            if i != r and T[i][enter]:
                f = T[i][enter]
                T[i] = [a - f * c for a, c in zip(T[i], T[r])]
        f = red[enter]
        red = [a - f * c for a, c in zip(red, T[r][:width])]
        basis[r] = enter
    value = sum(cost[basis[i]] * T[i][-1] for i in range(m))
    if value == 0:
        x = [Fraction(0)] * n
        for i, j in enumerate(basis):
            if j < n:
                x[j] = T[i][-1]
        return LPOutcome(True, x=x)
    y = [(1 - red[n + i]) * sign[i] for i in range(m)]
    return LPOutcome(False, dual=y)


# --- contextuality -------------------------------------------------------------


@dataclass
class NoncontextualCertificate:
    """A convex decomposition p = sum lambda(phi) delta^phi."""

    weights: dict  # Section -> Fraction

    def is_point_mass(self) -> bool:
        return len(self.weights) == 1

    def verify(self, p: TwistedDistribution) -> bool:
        return classical_embed(self.weights) == p

    def items(self):
        return self.weights.items()


@dataclass
class ContextualityWitness:
    """Why p is contextual: no sections at all, or a separating hyperplane.

    ``hyperplane`` pairs a weight per H-rep variable with a constant; it is
    non-negative on every deterministic distribution and negative on p.
    """

    reason: str
    hyperplane: tuple | None = None
    variables: list = field(default_factory=list)

    def value(self, p: TwistedDistribution) -> Fraction:
        w, c = self.hyperplane
        return sum(wi * p.prob(x, g) for wi, (x, g) in zip(w, self.variables)) + c

    def verify(self, p: TwistedDistribution, sections: Sequence[Section]) -> bool:
        if self.hyperplane is None:
            return not sections
        w, c = self.hyperplane
        for s in sections:
            if sum(wi for wi, (x, g) in zip(w, self.variables) if s(EZForm(x)) == g) + c < 0:
                return False
        return self.value(p) < 0


def _decomposition_system(p: TwistedDistribution, secs):
    X, H = p.space, p.group
    variables = [(x, g) for x in X.maximal_simplices() for g in H.tuples(x.dim)]
    A = [[Fraction(int(s(EZForm(x)) == g)) for s in secs] for x, g in variables]
    A.append([Fraction(1)] * len(secs))
    b = [p.prob(x, g) for x, g in variables] + [Fraction(1)]
    return variables, A, b


def _sections_of(p: TwistedDistribution, secs):
    if secs is None:
        return enumerate_sections(p.cocycle, twisting=p.twisting)
    return list(secs)


def is_noncontextual(p: TwistedDistribution, sections=None) -> NoncontextualCertificate | None:
    """A convex decomposition of p into deterministic distributions, or None."""
    secs = _sections_of(p, sections)
    if not secs:
        return None
    _, A, b = _decomposition_system(p, secs)
    out = lp_feasibility(A, b)
    if not out.feasible:
        return None
    return NoncontextualCertificate({s: w for s, w in zip(secs, out.x) if w})


def contextuality_witness(p: TwistedDistribution, sections=None) -> ContextualityWitness | None:
    """Evidence that p is contextual, or None when it is non-contextual."""
    secs = _sections_of(p, sections)
    if not secs:
        return ContextualityWitness("no sections")
    variables, A, b = _decomposition_system(p, secs)
    out = lp_feasibility(A, b)
    if out.feasible:
        return None
    y = out.dual
    w = [-v for v in y[:-1]]
    return ContextualityWitness("separating hyperplane", (w, -y[-1]), variables)


class NotTrivializingError(ValueError):
    pass


def relative_noncontextual(p: TwistedDistribution, f: SimplicialMap, sections=None):
    """Non-contextuality of the restriction of p along a trivializing map f."""
    cert = trivialization_certificate(pull_back(p.cocycle, f))
    if cert is not None:
        raise NotTrivializingError(
            f"the pulled-back class is nontrivial (obstructed mod {cert.modulus} by "
            f"{', '.join(s.name for s in cert.weights)})")
    return is_noncontextual(restrict_along(p, f), sections)


# --- double description --------------------------------------------------------


@dataclass
class PolytopeV:
    vertices: list
    status: str = "ok"  # ok | empty | infeasible-equalities | partial
    dimension: int = -1
    polytope: PolytopeH | None = None

    @property
    def complete(self) -> bool:
        return self.status in ("ok", "empty", "infeasible-equalities")

    def __len__(self):
        return len(self.vertices)

    def distributions(self) -> list:
        return [self.polytope.to_distribution(v) for v in self.vertices]


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _parametrize(P: PolytopeH):
    A, b = P.dense()
    n = P.num_variables
    x0 = solve_affine(A, b, n)
    if x0 is None:
        return None
    basis = nullspace(A, n)
    return x0, basis


def enumerate_vertices(P: PolytopeH, max_rays: int = 200_000) -> PolytopeV:
    """Vertices of P by the double description method, exactly.

    The equality subspace is parametrized as x = x0 + N y and the cone
    {(t, y) : t x0 + N y >= 0, t >= 0} is built up one halfspace at a
    time, starting from a simplicial cone on independent constraints.
    Remaining halfspaces are inserted by decreasing number of rays they
    cut off; new rays come only from combinatorially adjacent pairs.
    """
    param = _parametrize(P)
    if param is None:
        return PolytopeV([], "infeasible-equalities", -1, P)
    x0, basis = param
    n, d = P.num_variables, len(basis)
    if d == 0:
        if all(v >= 0 for v in x0):
            return PolytopeV([tuple(x0)], "ok", 0, P)
        return PolytopeV([], "empty", -1, P)
    H = [primitive([x0[i]] + [v[i] for v in basis]) for i in range(n)]
    H.append(tuple([1] + [0] * d))
    rays, zeros, status = _double_description(H, d + 1, max_rays)
    vertices = []
    for r in rays:
        if r[0] <= 0:
            continue
        t = Fraction(r[0])
        y = [Fraction(c) / t for c in r[1:]]
        vertices.append(tuple(x0[i] + sum(y[k] * basis[k][i] for k in range(d)) for i in range(n)))
    vertices.sort()
    if not vertices and status == "ok":
        return PolytopeV([], "empty", -1, P)
    dim = rank([[v - vertices[0][i] for i, v in enumerate(w)] for w in vertices[1:]]) if vertices else -1
    return PolytopeV(vertices, status, dim, P)


def _double_description(H, D, max_rays):
    rows = [tuple(r) for r in H]
    chosen = []
    for i in [len(rows) - 1] + list(range(len(rows) - 1)):
        if rank([rows[j] for j in chosen + [i]]) > len(chosen):
            chosen.append(i)
        if len(chosen) == D:
            break
    # rays of the simplicial cone are the columns of the inverse
    aug = [list(rows[i]) + [int(k == r) for k in range(D)] for r, i in enumerate(chosen)]
    R, _ = rref(aug, 2 * D)
    inv = [row[D:] for row in R]
    rays, zeros = [], []
    for k in range(D):
        col = primitive([inv[r][k] for r in range(D)])
        rays.append(col)
        zeros.append(sum(1 << chosen[j] for j in range(D) if j != k))
    done = set(chosen)
    remaining = [i for i in range(len(rows)) if i not in done]
    status = "ok"
    while remaining:
        vals = {i: [dot(rows[i], r) for r in rays] for i in remaining}
        i = max(remaining, key=lambda i: (sum(1 for v in vals[i] if v < 0), -i))
        remaining.remove(i)
        v = vals[i]
        pos = [k for k, a in enumerate(v) if a > 0]
        neg = [k for k, a in enumerate(v) if a < 0]
        zer = [k for k, a in enumerate(v) if a == 0]
        bit = 1 << i
        new_rays = [rays[k] for k in pos] + [rays[k] for k in zer]
        new_zeros = [zeros[k] for k in pos] + [zeros[k] | bit for k in zer]
        for a in pos:
            for c in neg:
                common = zeros[a] & zeros[c]
                if _popcount(common) < D - 2:
                    continue
                if any(k != a and k != c and zeros[k] & common == common for k in range(len(rays))):
                    continue
                va, vc = v[a], v[c]
                r = primitive([va * x - vc * y for x, y in zip(rays[c], rays[a])])
                new_rays.append(r)
                new_zeros.append(common | bit)
        rays, zeros = new_rays, new_zeros
        done.add(i)
        if len(rays) > max_rays:
            status = "partial"
            break
    return rays, zeros, status


def saturation_rank(P: PolytopeH, vertex) -> int:
    """Rank of the equalities plus the non-negativity constraints tight at ``vertex``."""
    A, _ = P.dense()
    n = P.num_variables
    tight = [[Fraction(int(j == i)) for j in range(n)] for i in range(n) if vertex[i] == 0]
    return rank(A + tight)


def is_vertex(P: PolytopeH, vertex) -> bool:
    return P.contains(vertex) and saturation_rank(P, vertex) == P.num_variables


def brute_force_vertices(P: PolytopeH, chunk: int = 200_000, tol: float = 1e-9):
    """Float oracle: solve every square subsystem of tight non-negativity constraints.

    Returns the vertex set as sorted tuples rounded to 9 decimals.
    """
    param = _parametrize(P)
    if param is None:
        return []
    x0, basis = param
    n, d = P.num_variables, len(basis)
    x0f = np.array([float(v) for v in x0])
    N = np.array([[float(v[i]) for v in basis] for i in range(n)]).reshape(n, d)
    if d == 0:
        return [tuple(np.round(x0f, 9))] if (x0f >= -tol).all() else []
    found = set()
    combos = itertools.combinations(range(n), d)
    while True:
        block = list(itertools.islice(combos, chunk))
        if not block:
            break
        idx = np.array(block)
        M = N[idx]
        rhs = -x0f[idx]
        det = np.linalg.det(M)
        ok = np.abs(det) > 1e-9
        if not ok.any():
            continue
        y = np.linalg.solve(M[ok], rhs[ok][..., None])[..., 0]
        X = x0f[None, :] + y @ N.T
        feas = (X >= -tol).all(axis=1)
        for row in np.round(X[feas], 9):
            found.add(tuple(float(v) + 0.0 for v in row))
    return sorted(found)


# --- declared symmetries and orbits --------------------------------------------


class SymmetryError(ValueError):
    pass


@dataclass(frozen=True)
class EdgeSymmetry:
    """A relabelling of edges that maps contexts to contexts, followed by
    flipping the outcomes of the edges in ``flips`` (Z2, two-dimensional only).

    Triangle outcomes (h1, h2) are read on edges as o(d2) = h1,
    o(d1) = h1 + h2, o(d0) = h2 + gamma.
    """

    name: str
    perm: tuple  # sorted (edge, image) pairs; unlisted edges are fixed
    flips: frozenset = frozenset()

    @classmethod
    def make(cls, name, perm: Mapping, flips=()):
        return cls(name, tuple(sorted(perm.items())), frozenset(flips))

    def image(self, edge: str) -> str:
        return dict(self.perm).get(edge, edge)


def _edge_names(X, t):
    return [f.base.name for f in X.face_table(t)]


def symmetry_permutation(P: PolytopeH, sym: EdgeSymmetry) -> list:
    """The permutation of H-rep variables induced by ``sym``; validates it."""
    X, H = P.space, P.group
    if H.moduli != (2,):
        raise CapabilityError("edge symmetries are implemented for Z2 coefficients only")
    maximal = X.maximal_simplices()
    if any(x.dim != 2 for x in maximal):
        raise CapabilityError("edge symmetries need every maximal simplex to be a triangle")
    edges = [e.name for e in X.simplices(1)]
    perm = {e: sym.image(e) for e in edges}
    if sorted(perm.values()) != sorted(edges) or any(k not in edges for k, _ in sym.perm):
        raise SymmetryError(f"{sym.name}: not a permutation of the edges")
    if not set(sym.flips) <= set(edges):
        raise SymmetryError(f"{sym.name}: flips unknown edges")
    gamma = P.twisting.cocycle
    by_edges = {frozenset(_edge_names(X, t)): t for t in maximal}
    out = [None] * P.num_variables
    for t in maximal:
        names = _edge_names(X, t)
        if len(set(names)) != 3:
            raise CapabilityError(f"triangle {t.name} repeats an edge")
        image = frozenset(perm[e] for e in names)
        t2 = by_edges.get(image)
        if t2 is None:
            raise SymmetryError(f"{sym.name}: image of {t.name} is not a context")
        b1, b2 = gamma(t)[0], gamma(t2)[0]
        if (sum(1 for e in image if e in sym.flips) - (b2 - b1)) % 2:
            raise SymmetryError(f"{sym.name}: flips are incompatible with the cocycle on {t2.name}")
        names2 = _edge_names(X, t2)
        for g in H.tuples(2):
            h1, h2 = g[0][0], g[1][0]
            o = {names[2]: h1, names[1]: (h1 + h2) % 2, names[0]: (h2 + b1) % 2}
            o2 = {perm[e]: (v + (perm[e] in sym.flips)) % 2 for e, v in o.items()}
            k1 = o2[names2[2]]
            k2 = (o2[names2[1]] - k1) % 2
            out[P.index[(t, g)]] = P.index[(t2, ((k1,), (k2,)))]
    return out


def vertex_orbits(V: PolytopeV, symmetries: Sequence[EdgeSymmetry]) -> list:
    """Partition vertex indices into orbits under the group generated by ``symmetries``."""
    P = V.polytope
    perms = [symmetry_permutation(P, s) for s in symmetries]
    pos = {v: k for k, v in enumerate(V.vertices)}
    parent = list(range(len(V.vertices)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for k, v in enumerate(V.vertices):
        for pi in perms:
            w = [None] * len(v)
            for j, val in enumerate(v):
                w[pi[j]] = val
            target = pos.get(tuple(w))
            if target is None:
                raise SymmetryError("vertex set is not closed under the declared symmetries")
            ra, rb = find(k), find(target)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    orbits = defaultdict(list)
    for k in range(len(V.vertices)):
        orbits[find(k)].append(k)
    return sorted(orbits.values(), key=lambda o: o[0])


def symmetry_image(X, sym: EdgeSymmetry, names) -> frozenset:
    """Image of a set of edge and triangle names under the edge relabelling of ``sym``."""
    by_edges = {frozenset(_edge_names(X, t)): t.name for t in X.simplices(2)}
    out = set()
    for name in names:
        sid = X.find(name)
        if sid.dim == 1:
            out.add(sym.image(name))
        elif sid.dim == 2:
            image = frozenset(sym.image(e) for e in _edge_names(X, sid))
            if image not in by_edges:
                raise SymmetryError(f"{sym.name}: image of {name} is not a triangle")
            out.add(by_edges[image])
        else:
            raise CapabilityError("symmetry images are defined for edges and triangles")
    return frozenset(out)


def symmetric_images(X, seed, symmetries: Sequence[EdgeSymmetry]) -> list:
    """All images of ``seed`` under the group generated by ``symmetries``, seed first."""
    start = frozenset(seed)
    seen = [start]
    known = {start}
    k = 0
    while k < len(seen):
        cur = seen[k]
        k += 1
        for s in symmetries:
            img = symmetry_image(X, s, cur)
            if img not in known:
                known.add(img)
                seen.append(img)
    return seen


def relatively_deterministic(p: TwistedDistribution, seeds, symmetries=()):
    """Look for a trivializing inclusion along which p restricts to a deterministic point.

    Candidates are the subcomplexes generated by each seed and by its
    images under the declared symmetries.  Returns ``(names, certificate)``
    for the first hit or None.
    """
    X = p.space
    for seed in seeds:
        for names in symmetric_images(X, seed, symmetries):
            sub = X.subcomplex(sorted(names))
            inc = X.inclusion_of(sub)
            if trivialization_certificate(pull_back(p.cocycle, inc)) is not None:
                continue
            cert = _point_mass(restrict_along(p, inc))
            if cert is not None:
                return sorted(names), cert
    return None


def _point_mass(q: TwistedDistribution) -> NoncontextualCertificate | None:
    """q as a single delta, read off its edge outcomes, or None."""
    if not q.is_deterministic():
        return None
    X = q.space
    alpha = Cochain(X, 1, q.group, {e: next(iter(q.weights[e]))[0] for e in X.simplices(1)})
    s = Section(q.twisting, alpha)
    if not s.check() or delta(s) != q:
        return None
    return NoncontextualCertificate({s: Fraction(1)})
