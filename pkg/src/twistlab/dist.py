"""Twisted simplicial distributions with exact rational weights."""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from typing import Iterable, Mapping

from .bundle import Section, TwistedBundle, TwistingFunction
from .cochain import CochainError, pull_back
from .simpset import EZForm, Report, SimplexId, SimplicialMap, SimplicialSet


class DistributionError(ValueError):
    pass


def _frac(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def _clean(d: Mapping) -> dict:
    return {k: _frac(v) for k, v in d.items() if v}


def pushforward(dist: Mapping, fn) -> dict:
    out = defaultdict(Fraction)
    for k, w in dist.items():
        out[fn(k)] += w
    return {k: v for k, v in out.items() if v}


# --- canonical face routes ---------------------------------------------

def face_routes(X: SimplicialSet) -> dict:
    """For each non-degenerate simplex y, a maximal simplex x and a face word
    (list of indices, applied left to right) with d...d x = y.

    Maximal simplices route to themselves with an empty word.  The first
    maximal simplex (in presentation order) reaching y wins; among its
    words the lexicographically least one is used.
    """
    routes = {}
    for x in X.maximal_simplices():
        frontier = [(EZForm(x), [])]
        seen = {EZForm(x)}
        while frontier:
            nxt = []
            for s, word in frontier:
                if not s.is_degenerate and s.base not in routes:
                    routes[s.base] = (x, word)
                if s.dim == 0:
                    continue
                for i in range(s.dim + 1):
                    f = X.face(i, s)
                    if f not in seen:
                        seen.add(f)
                        nxt.append((f, word + [i]))
            frontier = nxt
    return routes


def bundle_face_word(bundle: TwistedBundle, e, word):
    for i in word:
        e = bundle.face(i, e)
    return e


class TwistedDistribution:
    """A family {p_x} over the non-degenerate simplices of the base.

    ``weights[x]`` maps outcome tuples in H^{dim x} to non-negative
    fractions.  Values on degenerate simplices are obtained by pushing
    forward along the degeneracy maps of the bundle.
    """

    def __init__(self, twisting: TwistingFunction, weights: Mapping, name: str = ""):
        self.twisting = twisting
        self.bundle = TwistedBundle(twisting)
        self.space = twisting.space
        self.group = twisting.group
        self.name = name
        self.weights = {}
        for key, dist in weights.items():
            sid = key if isinstance(key, SimplexId) else self.space.find(key)
            self.weights[sid] = _clean(dist)
        missing = [s.name for s in self.space.all_ids() if s not in self.weights]
        if missing:
            raise DistributionError(f"no distribution given for {', '.join(missing)}")

    @classmethod
    def from_top(cls, twisting: TwistingFunction, top: Mapping, name: str = "") -> "TwistedDistribution":
        """Build p from its values on maximal simplices, deriving the rest by marginalization."""
        X = twisting.space
        bundle = TwistedBundle(twisting)
        top = {(k if isinstance(k, SimplexId) else X.find(k)): _clean(v) for k, v in top.items()}
        weights = {}
        for y, (x, word) in face_routes(X).items():
            if x not in top:
                raise DistributionError(f"no distribution given for maximal simplex {x.name}")
            ex = EZForm(x)
            weights[y] = pushforward(top[x], lambda g: bundle_face_word(bundle, (g, ex), word)[0])
        return cls(twisting, weights, name)

    @property
    def cocycle(self):
        return self.twisting.cocycle

    def __call__(self, s) -> dict:
        """The distribution on the fiber over any simplex (EZ form or name)."""
        if isinstance(s, str):
            s = EZForm(self.space.find(s))
        elif isinstance(s, SimplexId):
            s = EZForm(s)
        base = self.weights[s.base]
        if not s.is_degenerate:
            return dict(base)
        H = self.group

        def lift(g):
            for j in s.degeneracies:
                g = H.nerve_degeneracy(j, g)
            return g
        return pushforward(base, lift)

    def prob(self, s, g) -> Fraction:
        return self(s).get(tuple(g), Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, TwistedDistribution):
            return NotImplemented
        return (self.space is other.space and self.cocycle == other.cocycle
                and self.weights == other.weights)

    def __hash__(self):
        return hash(tuple(sorted((k, tuple(sorted(v.items()))) for k, v in self.weights.items())))

    def __repr__(self):
        return f"TwistedDistribution({self.name or '?'} over {self.space.name})"

    def marginal(self, i: int, x: SimplexId) -> dict:
        """Push p_x forward along the i-th face map of the bundle."""
        ex = EZForm(x)
        return pushforward(self.weights[x], lambda g: self.bundle.face(i, (g, ex))[0])

    def validate(self) -> Report:
        H = self.group
        checked = 0
        for x in self.space.all_ids():
            dist = self.weights[x]
            fiber = set(H.tuples(x.dim))
            for g, w in dist.items():
                if g not in fiber:
                    return Report(False, f"{x.name}: outcome {g} is not in H^{x.dim}", checked)
                if w < 0:
                    return Report(False, f"{x.name}: negative weight {w} at {H.format_tuple(g)}", checked)
            checked += 1
            if sum(dist.values()) != 1:
                return Report(False, f"{x.name}: weights sum to {sum(dist.values())}", checked)
            for i in range(x.dim + 1) if x.dim else ():
                checked += 1
                face = self.space.face(i, EZForm(x))
                if self.marginal(i, x) != self(face):
                    return Report(False, f"d{i} marginal of {x.name} differs from p at {face}", checked)
        return Report(True, "ok", checked)

    def is_deterministic(self) -> bool:
        return all(len(d) == 1 for d in self.weights.values())

    def support(self, x) -> list:
        sid = x if isinstance(x, SimplexId) else self.space.find(x)
        return sorted(self.weights[sid])

    def mix(self, other: "TwistedDistribution", t) -> "TwistedDistribution":
        """(1 - t) self + t other."""
        return mixture([(1 - _frac(t), self), (_frac(t), other)])


def _check_same_twisting(ps):
    first = ps[0]
    for p in ps[1:]:
        if p.space is not first.space or p.cocycle != first.cocycle:
            raise DistributionError("distributions live over different twisted bundles")


def mixture(terms: Iterable) -> TwistedDistribution:
    """Convex combination of (weight, distribution) pairs."""
    terms = [(_frac(w), p) for w, p in terms]
    if not terms:
        raise DistributionError("empty mixture")
    if any(w < 0 for w, _ in terms) or sum(w for w, _ in terms) != 1:
        raise DistributionError("mixture weights must be non-negative and sum to 1")
    ps = [p for _, p in terms]
    _check_same_twisting(ps)
    first = ps[0]
    weights = {}
    for x in first.space.all_ids():
        acc = defaultdict(Fraction)
        for w, p in terms:
            for g, v in p.weights[x].items():
                acc[g] += w * v
        weights[x] = acc
    return TwistedDistribution(first.twisting, weights)


def uniform(twisting: TwistingFunction) -> TwistedDistribution:
    H = twisting.group
    weights = {}
    for x in twisting.space.all_ids():
        fib = H.tuples(x.dim)
        weights[x] = {g: Fraction(1, len(fib)) for g in fib}
    return TwistedDistribution(twisting, weights, "uniform")


def delta(section: Section) -> TwistedDistribution:
    X = section.twisting.space
    return TwistedDistribution(section.twisting,
                               {x: {section(EZForm(x)): 1} for x in X.all_ids()}, "delta")


delta_distribution = delta


def classical_embed(weights) -> TwistedDistribution:
    """Theta: sum of lambda(phi) delta^phi over sections phi.

    ``weights`` is a mapping or an iterable of (section, weight) pairs.
    """
    items = list(weights.items()) if isinstance(weights, Mapping) else list(weights)
    items = [(s, _frac(w)) for s, w in items]
    if not items:
        raise DistributionError("bundle has no sections")
    if any(w < 0 for _, w in items) or sum(w for _, w in items) != 1:
        raise DistributionError("section weights must be non-negative and sum to 1")
    eta = items[0][0].twisting
    X = eta.space
    out = {}
    for x in X.all_ids():
        acc = defaultdict(Fraction)
        for s, w in items:
            if s.twisting.cocycle != eta.cocycle:
                raise DistributionError("sections belong to different bundles")
            if w:
                acc[s(EZForm(x))] += w
        out[x] = acc
    return TwistedDistribution(eta, out, "theta")


def convolve(p: TwistedDistribution, q: TwistedDistribution) -> TwistedDistribution:
    """Fiberwise convolution; lives over the sum of the two cocycles."""
    if p.space is not q.space or p.group != q.group:
        raise DistributionError("convolution needs a common base and group")
    H = p.group
    eta = p.twisting.tensor(q.twisting)
    out = {}
    for x in p.space.all_ids():
        acc = defaultdict(Fraction)
        for g, a in p.weights[x].items():
            for h, b in q.weights[x].items():
                acc[H.tadd(g, h)] += a * b
        out[x] = acc
    return TwistedDistribution(eta, out, "convolution")


def restrict_along(p: TwistedDistribution, f: SimplicialMap) -> TwistedDistribution:
    """(f^* p)_y = p_{f(y)}, living over the pulled-back cocycle."""
    if f.target is not p.space:
        raise DistributionError("map does not land in the distribution's base")
    eta = TwistingFunction(pull_back(p.cocycle, f), check=False)
    return TwistedDistribution(eta, {y: p(f.images[y]) for y in f.source.all_ids()})


# --- the equivariant picture --------------------------------------------

class EquivariantDistribution:
    """A family p~_{(k,x)} of distributions on H^n indexed by the simplices
    (k, x) of the inverse-twisted product, with x non-degenerate."""

    def __init__(self, twisting: TwistingFunction, weights: Mapping):
        self.twisting = twisting
        self.group = twisting.group
        self.space = twisting.space
        self.weights = {key: _clean(v) for key, v in weights.items()}

    def __call__(self, k, x) -> dict:
        return self.weights[(tuple(k), x)]

    def is_equivariant(self) -> bool:
        """k . p~ = delta_k * p~ for every k, i.e. p~_{k+g}(h+g) = p~_k(h)."""
        H = self.group
        for (k, x), dist in self.weights.items():
            for g in H.tuples(x.dim):
                shifted = {H.tadd(h, g): w for h, w in dist.items()}
                if self.weights.get((H.tadd(k, g), x)) != shifted:
                    return False
        return True

    def validate(self) -> Report:
        """Compatibility of p~ as an untwisted distribution on the inverse-twisted product."""
        H, X = self.group, self.space
        E = TwistedBundle(self.twisting.inverse())
        checked = 0
        for (k, x), dist in sorted(self.weights.items(), key=lambda kv: (kv[0][1], kv[0][0])):
            checked += 1
            if sum(dist.values()) != 1 or any(w < 0 for w in dist.values()):
                return Report(False, f"p~ at ({k}, {x.name}) is not a distribution", checked)
            for i in range(x.dim + 1) if x.dim else ():
                checked += 1
                g2, y = E.face(i, (k, EZForm(x)))
                target = self._at(g2, y)
                if pushforward(dist, lambda h: H.nerve_face(i, h)) != target:
                    return Report(False, f"d{i} compatibility fails at ({k}, {x.name})", checked)
        return Report(True, "ok", checked)

    def _at(self, k, y: EZForm) -> dict:
        H = self.group
        if not y.is_degenerate:
            return self.weights[(k, y.base)]
        # over a degenerate y the fiber is reached from (0, y) by equivariance,
        # and (0, y) is a degeneracy of (0, base)
        base = self.weights[(H.tzero(y.base.dim), y.base)]

        def lift(h):
            for j in y.degeneracies:
                h = H.nerve_degeneracy(j, h)
            return H.tadd(h, k)
        return pushforward(base, lift)


def to_equivariant(p: TwistedDistribution) -> EquivariantDistribution:
    """p~_{(k,x)}(h) = p_x(h - k)."""
    H = p.group
    out = {}
    for x in p.space.all_ids():
        for k in H.tuples(x.dim):
            out[(k, x)] = {H.tadd(h, k): w for h, w in p.weights[x].items()}
    return EquivariantDistribution(p.twisting, out)


def from_equivariant(pt: EquivariantDistribution) -> TwistedDistribution:
    if not pt.is_equivariant():
        raise DistributionError("input is not equivariant")
    H = pt.group
    return TwistedDistribution(
        pt.twisting, {x: pt.weights[(H.tzero(x.dim), x)] for x in pt.space.all_ids()})


__all__ = [
    "DistributionError", "EquivariantDistribution", "TwistedDistribution", "classical_embed",
    "convolve", "delta", "delta_distribution", "face_routes", "from_equivariant", "mixture",
    "pushforward", "restrict_along", "to_equivariant", "uniform", "CochainError",
]
