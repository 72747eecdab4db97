"""Twisting functions valued in the nerve NH, twisted products and their sections.

Throughout, K = NH for a finite abelian group H, so an element of K_n is
an n-tuple of group elements and the group law is componentwise.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from .cochain import Cochain, CochainError, coboundary, is_cocycle, solve_trivialization, trivializing_solutions
from .groups import FiniteAbelianGroup
from .simpset import EZForm, Report, SimplexId, SimplicialMap, SimplicialSet, check_simplicial_object

DEFAULT_SECTION_LIMIT = 1 << 16


class CapacityError(RuntimeError):
    def __init__(self, message, count=None):
        super().__init__(message)
        self.count = count


class TwistingFunction:
    """The twisting eta_n : X_n -> H^{n-1} generated by a normalized 2-cocycle.

    ``eta_n(x) = (gamma(d_3 ... d_n x), eta_{n-1}(d_1 x) - eta_{n-1}(d_0 x))``
    with ``eta_1 = ()`` and ``eta_2 = (gamma(x),)``.
    """

    def __init__(self, cocycle: Cochain, check: bool = True):
        if cocycle.degree != 2:
            raise CochainError("a twisting function needs a 2-cochain")
        if check and not is_cocycle(cocycle):
            raise CochainError("precondition failed: the cochain is not a cocycle")
        self.cocycle = cocycle
        self.space: SimplicialSet = cocycle.space
        self.group: FiniteAbelianGroup = cocycle.group
        self._memo = {}

    def __call__(self, x: EZForm) -> tuple:
        n = x.dim
        if n == 0:
            raise ValueError("twisting functions are defined on positive dimensions only")
        hit = self._memo.get(x)
        if hit is not None:
            return hit
        H, X = self.group, self.space
        if n == 1:
            out = ()
        else:
            y = x
            for i in range(n, 2, -1):
                y = X.face(i, y)
            head = self.cocycle(y)
            out = (head,) + H.tsub(self(X.face(1, x)), self(X.face(0, x))) if n > 2 else (head,)
        self._memo[x] = out
        return out

    def tensor(self, other: "TwistingFunction") -> "TwistingFunction":
        _same_base(self, other)
        return TwistingFunction(self.cocycle + other.cocycle, check=False)

    def inverse(self) -> "TwistingFunction":
        return TwistingFunction(-self.cocycle, check=False)

    def check(self, top: int | None = None) -> Report:
        """Verify the twisting identities on every simplex up to ``top``."""
        return check_twisting_identities(self, top)


def twisting_from_cocycle(gamma: Cochain) -> TwistingFunction:
    return TwistingFunction(gamma)


def zero_twisting(X: SimplicialSet, H: FiniteAbelianGroup) -> TwistingFunction:
    return TwistingFunction(Cochain.zero(X, 2, H), check=False)


def tensor(eta1: TwistingFunction, eta2: TwistingFunction) -> TwistingFunction:
    return eta1.tensor(eta2)


def inverse(eta: TwistingFunction) -> TwistingFunction:
    return eta.inverse()


def _same_base(a, b):
    if a.space is not b.space or a.group != b.group:
        raise CochainError("twistings live on different bases or groups")


def check_twisting_identities(eta: TwistingFunction, top: int | None = None) -> Report:
    X, H = eta.space, eta.group
    top = X.max_dim + 1 if top is None else top
    checked = 0
    for n in range(1, top + 1):
        for x in X.all_simplices(n):
            e = eta(x)
            if n >= 2:
                for i in range(1, n):
                    checked += 1
                    if H.nerve_face(i, e) != eta(X.face(i + 1, x)):
                        return Report(False, f"d{i} eta({x}) != eta(d{i + 1} {x})", checked)
                checked += 1
                if H.nerve_face(0, e) != H.tsub(eta(X.face(1, x)), eta(X.face(0, x))):
                    return Report(False, f"d0 eta({x}) != eta(d1 {x}) - eta(d0 {x})", checked)
            if n + 1 <= top:
                checked += 1
                if eta(X.degeneracy(0, x)) != H.tzero(n):
                    return Report(False, f"eta(s0 {x}) is not the identity", checked)
                for j in range(1, n + 1):
                    checked += 1
                    if eta(X.degeneracy(j, x)) != H.nerve_degeneracy(j - 1, e):
                        return Report(False, f"eta(s{j} {x}) != s{j - 1} eta({x})", checked)
    return Report(True, "ok", checked)


class TwistedBundle:
    """The twisted product NH x_eta X; simplices are pairs (g, x) with x in EZ form."""

    def __init__(self, twisting: TwistingFunction):
        self.twisting = twisting
        self.base = twisting.space
        self.group = twisting.group

    @property
    def cocycle(self) -> Cochain:
        return self.twisting.cocycle

    def fiber(self, x: EZForm) -> list:
        return self.group.tuples(x.dim)

    def simplices(self, n: int) -> list:
        return [(g, x) for x in self.base.all_simplices(n) for g in self.group.tuples(n)]

    def face(self, i: int, e):
        g, x = e
        H = self.group
        dg = H.nerve_face(i, g)
        if i == 0:
            dg = H.tadd(dg, self.twisting(x))
        return dg, self.base.face(i, x)

    def degeneracy(self, j: int, e):
        g, x = e
        return self.group.nerve_degeneracy(j, g), self.base.degeneracy(j, x)

    def act(self, k: tuple, e):
        g, x = e
        return self.group.tadd(k, g), x

    def project(self, e) -> EZForm:
        return e[1]

    def check(self, top: int | None = None) -> Report:
        top = self.base.max_dim + 1 if top is None else top
        return check_simplicial_object(self.simplices, self.face, self.degeneracy, top, fmt=_fmt_pair)


def twisted_product(X: SimplicialSet, eta: TwistingFunction) -> TwistedBundle:
    if eta.space is not X:
        raise CochainError("twisting function is defined on a different base")
    return TwistedBundle(eta)


def _fmt_pair(e):
    g, x = e
    return f"({g}; {x})"


# --- sections -----------------------------------------------------------

class Section:
    """The section phi_alpha determined by a normalized 1-cochain alpha with d(alpha) = gamma.

    phi_1 = alpha, and in higher degrees the value is forced: the first n-1
    entries are phi(d_n x) and the last entry is read off from the d_0
    relation ``d_0 phi(x) + eta(x) = phi(d_0 x)``.
    """

    def __init__(self, twisting: TwistingFunction, alpha: Cochain):
        if alpha.degree != 1 or alpha.space is not twisting.space or alpha.group != twisting.group:
            raise CochainError("alpha must be a 1-cochain on the twisting's base")
        self.twisting = twisting
        self.alpha = alpha
        self._memo = {}

    @property
    def cochain(self) -> Cochain:
        return self.alpha

    def __call__(self, x: EZForm) -> tuple:
        n = x.dim
        if n == 0:
            return ()
        hit = self._memo.get(x)
        if hit is not None:
            return hit
        X, H = self.twisting.space, self.twisting.group
        if n == 1:
            out = (self.alpha(x),)
        else:
            tail = H.tsub(self(X.face(0, x)), self.twisting(x))
            out = self(X.face(n, x)) + (tail[-1],)
        self._memo[x] = out
        return out

    def __eq__(self, other):
        return isinstance(other, Section) and self.alpha == other.alpha

    def __hash__(self):
        return hash(self.alpha)

    def __repr__(self):
        return f"Section({self.alpha!r})"

    def check(self, top: int | None = None) -> Report:
        """Check that x -> (phi(x), x) is a simplicial map into the bundle."""
        X, H = self.twisting.space, self.twisting.group
        top = X.max_dim + 1 if top is None else top
        bundle = TwistedBundle(self.twisting)
        checked = 0
        for n in range(top + 1):
            for x in X.all_simplices(n):
                e = (self(x), x)
                for i in range(n + 1) if n else ():
                    checked += 1
                    got = bundle.face(i, e)
                    want = (self(X.face(i, x)), X.face(i, x))
                    if got != want:
                        return Report(False, f"section fails d{i} on {x}: {got[0]} vs {want[0]}",
                                      checked)
                if n + 1 <= top:
                    for j in range(n + 1):
                        checked += 1
                        sx = X.degeneracy(j, x)
                        if bundle.degeneracy(j, e) != (self(sx), sx):
                            return Report(False, f"section fails s{j} on {x}", checked)
        return Report(True, "ok", checked)


def section_from_cochain(twisting: TwistingFunction, alpha: Cochain) -> Section:
    if coboundary(alpha) != twisting.cocycle:
        raise CochainError("d(alpha) differs from the twisting's cocycle")
    return Section(twisting, alpha)


def count_sections(gamma: Cochain) -> int:
    sols = trivializing_solutions(gamma)
    if sols is None:
        return 0
    n = 1
    for s in sols:
        n *= s.count
    return n


def iter_section_cochains(gamma: Cochain):
    """All normalized 1-cochains alpha with d(alpha) = gamma."""
    sols = trivializing_solutions(gamma)
    if sols is None:
        return
    edges = gamma.space.simplices(1)
    for combo in itertools.product(*(s.enumerate() for s in sols)):
        vals = {e: tuple(part[j] for part in combo) for j, e in enumerate(edges)}
        yield Cochain(gamma.space, 1, gamma.group, vals)


def sections(gamma: Cochain, limit: int = DEFAULT_SECTION_LIMIT, twisting: TwistingFunction | None = None):
    """Enumerate every section of the bundle twisted by ``gamma``."""
    n = count_sections(gamma)
    if n > limit:
        raise CapacityError(f"{n} sections exceed the enumeration limit {limit}", n)
    eta = twisting or TwistingFunction(gamma, check=False)
    if eta.cocycle != gamma:
        raise CochainError("twisting function does not match the cocycle")
    return [Section(eta, a) for a in iter_section_cochains(gamma)]


# --- equivalence of twistings -------------------------------------------

@dataclass
class BundleIsomorphism:
    """(g, x) -> (g + psi(x), x) from NH x_eta X to NH x_tau X."""

    source: TwistingFunction
    target: TwistingFunction
    psi: Section

    def __call__(self, e):
        g, x = e
        return self.source.group.tadd(g, self.psi(x)), x

    def inverse(self, e):
        g, x = e
        return self.source.group.tsub(g, self.psi(x)), x

    def check(self, top: int | None = None) -> Report:
        src, dst = TwistedBundle(self.source), TwistedBundle(self.target)
        top = src.base.max_dim + 1 if top is None else top
        checked = 0
        for n in range(top + 1):
            for e in src.simplices(n):
                for i in range(n + 1) if n else ():
                    checked += 1
                    if self(src.face(i, e)) != dst.face(i, self(e)):
                        return Report(False, f"not simplicial at d{i} on {_fmt_pair(e)}", checked)
                if n + 1 <= top:
                    for j in range(n + 1):
                        checked += 1
                        if self(src.degeneracy(j, e)) != dst.degeneracy(j, self(e)):
                            return Report(False, f"not simplicial at s{j}", checked)
        return Report(True, "ok", checked)


def twistings_equivalent(eta: TwistingFunction, tau: TwistingFunction) -> BundleIsomorphism | None:
    """A bundle isomorphism from the eta- to the tau-twisted product, or None.

    With nerve coefficients the map has the form (g, x) -> (g + psi(x), x)
    where psi is a section of the (tau - eta)-twisted product, so the
    question reduces to solving d(alpha) = gamma_tau - gamma_eta.
    """
    _same_base(eta, tau)
    diff = tau.cocycle - eta.cocycle
    alpha = solve_trivialization(diff)
    if alpha is None:
        return None
    return BundleIsomorphism(eta, tau, Section(TwistingFunction(diff, check=False), alpha))


# --- the universal bundle WK -> WbarK and the classifying map ----------

class WK:
    """WK for K = NH: n-simplices are tuples (g_n, ..., g_0) with g_k in H^k."""

    def __init__(self, group: FiniteAbelianGroup):
        self.group = group

    def simplices(self, n: int) -> list:
        H = self.group
        return [tuple(parts) for parts in itertools.product(*(H.tuples(k) for k in range(n, -1, -1)))]

    def face(self, i: int, L: tuple) -> tuple:
        H = self.group
        n = len(L) - 1
        if i == n:
            return tuple(H.nerve_face(n - k, L[k]) for k in range(n))
        head = tuple(H.nerve_face(i - k, L[k]) for k in range(i))
        return head + (H.tadd(H.nerve_face(0, L[i]), L[i + 1]),) + L[i + 2:]

    def degeneracy(self, i: int, L: tuple) -> tuple:
        H = self.group
        n = len(L) - 1
        head = tuple(H.nerve_degeneracy(i - k, L[k]) for k in range(i + 1))
        return head + (H.tzero(n - i),) + L[i + 1:]

    def act(self, k: tuple, L: tuple) -> tuple:
        return (self.group.tadd(k, L[0]),) + L[1:]


class WbarK:
    """WbarK for K = NH: n-simplices are tuples (g_{n-1}, ..., g_0)."""

    def __init__(self, group: FiniteAbelianGroup):
        self.group = group

    def simplices(self, n: int) -> list:
        H = self.group
        return [tuple(parts) for parts in itertools.product(*(H.tuples(k) for k in range(n - 1, -1, -1)))]

    def face(self, i: int, L: tuple) -> tuple:
        H = self.group
        n = len(L)
        if i == 0:
            return L[1:]
        if i == n:
            return tuple(H.nerve_face(n - 1 - k, L[k]) for k in range(n - 1))
        head = tuple(H.nerve_face(i - 1 - k, L[k]) for k in range(i - 1))
        return head + (H.tadd(H.nerve_face(0, L[i - 1]), L[i]),) + L[i + 1:]

    def degeneracy(self, i: int, L: tuple) -> tuple:
        H = self.group
        n = len(L)
        if i == 0:
            return (H.tzero(n),) + L
        head = tuple(H.nerve_degeneracy(i - 1 - k, L[k]) for k in range(i))
        return head + (H.tzero(n - i),) + L[i:]


def classifying_map(eta: TwistingFunction):
    """theta(g, x) = (g, eta_n(x), eta_{n-1}(d_0 x), ..., eta_1(d_0^{n-1} x)) and its quotient."""
    X = eta.space

    @functools.lru_cache(maxsize=None)
    def theta_bar(x: EZForm) -> tuple:
        out = []
        y = x
        while y.dim > 0:
            out.append(eta(y))
            y = X.face(0, y)
        return tuple(out)

    def theta(e) -> tuple:
        g, x = e
        return (g,) + theta_bar(x)

    return theta, theta_bar


@functools.lru_cache(maxsize=None)
def _universal_reports(H: FiniteAbelianGroup, top: int) -> tuple:
    return tuple(check_simplicial_object(obj.simplices, obj.face, obj.degeneracy, top)
                 for obj in (WK(H), WbarK(H)))


def _generators(H: FiniteAbelianGroup, n: int) -> list:
    out = []
    for pos in range(n):
        for c in range(len(H.moduli)):
            unit = tuple(int(k == c) for k in range(len(H.moduli)))
            out.append(tuple(unit if q == pos else H.zero for q in range(n)))
    return out


def classifying_map_check(eta: TwistingFunction, top: int | None = None) -> Report:
    """Verify WK, WbarK, theta and theta-bar are simplicial, theta is equivariant and
    each fiber of the bundle maps bijectively onto the matching fiber of WK."""
    X, H = eta.space, eta.group
    top = X.max_dim if top is None else top
    W, Wb = WK(H), WbarK(H)
    details = []
    checked = 0
    for label, rep in zip(("WK", "WbarK"), _universal_reports(H, top)):
        checked += rep.checked
        if not rep:
            return Report(False, f"{label}: {rep.message}", checked)
        details.append(f"{label} simplicial up to dimension {top}")
    theta, theta_bar = classifying_map(eta)
    E = TwistedBundle(eta)
    for n in range(top + 1):
        for x in X.all_simplices(n):
            tb = theta_bar(x)
            for i in range(n + 1) if n else ():
                checked += 1
                if theta_bar(X.face(i, x)) != Wb.face(i, tb):
                    return Report(False, f"theta-bar fails d{i} on {x}", checked)
            for j in range(n + 1):
                checked += 1
                if theta_bar(X.degeneracy(j, x)) != Wb.degeneracy(j, tb):
                    return Report(False, f"theta-bar fails s{j} on {x}", checked)
            images = set()
            for g in H.tuples(n):
                e = (g, x)
                t = theta(e)
                if t[1:] != tb:
                    return Report(False, f"theta does not cover theta-bar over {x}", checked)
                images.add(t)
                for i in range(n + 1) if n else ():
                    checked += 1
                    if theta(E.face(i, e)) != W.face(i, t):
                        return Report(False, f"theta fails d{i} on {_fmt_pair(e)}", checked)
                for j in range(n + 1):
                    checked += 1
                    if theta(E.degeneracy(j, e)) != W.degeneracy(j, t):
                        return Report(False, f"theta fails s{j} on {_fmt_pair(e)}", checked)
                # equivariance under generators implies it for the whole group
                for k in _generators(H, n):
                    checked += 1
                    if theta(E.act(k, e)) != W.act(k, t):
                        return Report(False, f"theta is not equivariant on {_fmt_pair(e)}", checked)
            if len(images) != H.order ** n:
                return Report(False, f"fiber over {x} is not mapped bijectively", checked)
    details.append("theta simplicial, equivariant and bijective on fibers")
    return Report(True, "ok", checked, details)


def total_space(bundle: TwistedBundle):
    """Materialize the twisted product as a ``SimplicialSet`` with its projection.

    A simplex (g, x) is degenerate at j exactly when it equals s_j d_j (g, x);
    these indices are its Eilenberg-Zilber degeneracies.  Names read
    ``g|x`` with the tuple text of g and the EZ text of x.
    """

    X, H = bundle.base, bundle.group

    def degs(e):
        n = e[1].dim
        return tuple(j for j in range(n) if bundle.degeneracy(j, bundle.face(j, e)) == e)

    def name(e):
        return f"{H.format_tuple(e[0])}|{e[1]}"

    def normal(e) -> EZForm:
        js = degs(e)
        base = e
        for j in reversed(js):
            base = bundle.face(j, base)
        return EZForm(SimplexId(base[1].dim, name(base)), js)

    simplices, faces, images = {}, {}, {}
    for n in range(X.max_dim + 1):
        simplices[n] = []
        for e in bundle.simplices(n):
            if degs(e):
                continue
            sid = SimplexId(n, name(e))
            simplices[n].append(sid.name)
            images[sid] = e[1]
            if n:
                faces[sid] = tuple(normal(bundle.face(i, e)) for i in range(n + 1))
    E = SimplicialSet(simplices, faces, name=f"E({X.name})", max_dim=X.max_dim)
    return E, SimplicialMap(E, X, images)
