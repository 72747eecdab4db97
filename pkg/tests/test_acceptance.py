"""End-to-end acceptance checks; one PASS/FAIL line per criterion is printed
in the terminal summary (and by ``python tests/test_acceptance.py``)."""
import contextlib
import io
import itertools
import random
import time
from fractions import Fraction

import pytest

from conftest import ACCEPTANCE_LINES, random_distribution, random_weights
from twistlab import cli
from twistlab.bundle import (Section, TwistingFunction, check_twisting_identities, classifying_map_check,
                             count_sections, sections)
from twistlab.cochain import Cochain, coboundary, solve_trivialization, trivialization_certificate
from twistlab.dist import (classical_embed, convolve, delta, from_equivariant, mixture, restrict_along,
                           to_equivariant)
from twistlab.geometry import (brute_force_vertices, build_hrep, contextuality_witness, enumerate_vertices,
                               is_noncontextual, is_vertex, relatively_deterministic, symmetric_images,
                               vertex_orbits)
from twistlab.groups import FiniteAbelianGroup, Z
from twistlab.quantum import (born_distribution, context_cocycle, maximally_mixed, stabilizer_state,
                              two_qubit_stabilizer_states)
from twistlab.reduce import make_collapse
from twistlab.scenario import mermin_path
from twistlab.simpset import standard_simplex


@contextlib.contextmanager
def criterion(number, title, budget):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        ACCEPTANCE_LINES.append(f"criterion {number} FAIL  {title} ({elapsed:.2f}s): {exc!r}"[:300])
        print(ACCEPTANCE_LINES[-1])
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < budget
    ACCEPTANCE_LINES.append(f"criterion {number} {'PASS' if ok else 'FAIL'}  {title} "
                            f"({elapsed:.2f}s, budget {budget}s)")
    print(ACCEPTANCE_LINES[-1])
    assert ok, f"criterion {number} exceeded its runtime budget: {elapsed:.2f}s"


def run_cli(*argv):
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli.main(list(argv))
    return code, buf.getvalue()


def brute_force_sections(gamma):
    """Count edge labelings alpha with d(alpha) = gamma, straight from the face tables."""
    X, H = gamma.space, gamma.group
    edges = X.simplices(1)
    n = 0
    for labels in itertools.product(H.elements(), repeat=len(edges)):
        alpha = dict(zip(edges, labels))
        val = lambda f: H.zero if f.is_degenerate else alpha[f.base]
        if all(H.add(H.sub(val(d0), val(d1)), val(d2)) == gamma(t)
               for t in X.simplices(2) for d0, d1, d2 in [X.face_table(t)]):
            n += 1
    return n


def test_criterion_1_mermin_obstruction(mermin):
    with criterion(1, "Mermin obstruction: 0 sections over beta, 16 over zero", 1.0):
        beta, zero = mermin.cochain("beta"), mermin.cochain("zero")
        code, out = run_cli("sections", str(mermin_path()), "beta")
        assert code == 1 and out.splitlines()[0] == "0 sections"
        assert solve_trivialization(beta) is None
        cert = trivialization_certificate(beta)
        assert cert is not None and cert.verify(beta)
        code, out = run_cli("sections", str(mermin_path()), "zero")
        assert code == 0 and out.splitlines()[0] == "16 sections"
        assert count_sections(zero) == 16 == len(sections(zero))
        assert brute_force_sections(beta) == 0
        assert brute_force_sections(zero) == 16


def test_criterion_2_pauli_signs(mermin):
    with criterion(2, "Pauli context signs reproduce beta", 1.0):
        A = mermin.pauli()
        for edge, text in {"f": "+ZX", "u": "+XY", "g": "+YX", "w": "+XZ"}.items():
            assert A.text(edge) == text
        signs = context_cocycle(mermin.complex, A)
        beta = mermin.cochain("beta")
        assert signs == beta
        assert solve_trivialization(signs - beta) is not None


def test_criterion_3_quantum_validity(mermin):
    X, A, beta = mermin.complex, mermin.pauli(), mermin.cochain("beta")
    P = build_hrep(TwistingFunction(beta))
    states = [("maximally mixed", maximally_mixed(2))] + [
        (",".join(gens), stabilizer_state(gens)) for gens in two_qubit_stabilizer_states()]
    assert len(states) == 61
    worst = 0.0
    with criterion(3, f"Born distributions of {len(states)} states valid and contextual", 1.0 * len(states)):
        for label, rho in states:
            t = time.perf_counter()
            p = born_distribution(X, A, rho, beta)
            assert p.exact
            assert p.validate(), label
            assert P.contains(P.vector_of(p)), label
            assert is_noncontextual(p) is None
            assert contextuality_witness(p).reason == "no sections"
            worst = max(worst, time.perf_counter() - t)
        assert worst < 1.0, f"slowest state took {worst:.2f}s"
    code, out = run_cli("contextual", str(mermin_path()), "beta", "born", "--state", "maximally-mixed")
    assert code == 1 and "no sections" in out


@pytest.fixture(scope="module")
def mermin_vertices(mermin):
    out = {}
    for name in ("zero", "beta"):
        P = build_hrep(TwistingFunction(mermin.cochain(name)))
        out[name] = (P, enumerate_vertices(P))
    return out


def test_criterion_4_polytope_structure(mermin):
    with criterion(4, "vertex enumeration of NS_0 and NS_beta, orbits, brute-force cross-check", 60.0):
        found = {}
        for name in ("zero", "beta"):
            P = build_hrep(TwistingFunction(mermin.cochain(name)))
            V = enumerate_vertices(P)
            assert V.status == "ok"
            for v, p in zip(V.vertices, V.distributions()):
                assert p.validate()
                assert is_vertex(P, v)
            brute = brute_force_vertices(P)
            assert brute == sorted(tuple(round(float(a), 9) + 0.0 for a in v) for v in V.vertices)
            found[name] = V
        assert len(found["zero"]) == 16
        assert len(found["beta"]) == 120
        deltas = {delta(s) for s in sections(mermin.cochain("zero"))}
        assert len(deltas) == 16 and deltas <= set(found["zero"].distributions())
        orbits = vertex_orbits(found["beta"], mermin.symmetries)
        assert sorted(len(o) for o in orbits) == [48, 72]


def test_criterion_5_relative_determinism(mermin, mermin_vertices):
    P, V = mermin_vertices["beta"]
    ds = V.distributions()
    X = mermin.complex
    U_images = {frozenset(s) for s in symmetric_images(X, ["u", "c", "a"], mermin.symmetries)}
    V_images = {frozenset(s) for s in symmetric_images(X, ["eta", "xi"], mermin.symmetries)}
    with criterion(5, "every NS_beta vertex is deterministic along an image of U or V", 5.0):
        kinds = []
        for p in ds:
            hit = relatively_deterministic(p, [["u", "c", "a"], ["eta", "xi"]], mermin.symmetries)
            assert hit is not None
            names, cert = hit
            assert cert.is_point_mass()
            inc = X.inclusion_of(X.subcomplex(names))
            assert classical_embed(cert.weights).weights == restrict_along(p, inc).weights
            kinds.append("U" if frozenset(names) in U_images else "V" if frozenset(names) in V_images else "?")
        assert "?" not in kinds
        orbit_kind = {}
        for orbit in vertex_orbits(V, mermin.symmetries):
            ks = {kinds[k] for k in orbit}
            orbit_kind[len(orbit)] = ks
        assert orbit_kind == {72: {"V"}, 48: {"U"}}


def _collapse_roundtrip(rng, X, Z, gamma, n):
    ctx = make_collapse(X, Z, gamma)
    pinned = ctx.pinned_values()
    P = build_hrep(TwistingFunction(gamma), pinned)
    left = enumerate_vertices(P)
    right = enumerate_vertices(build_hrep(ctx.quotient_twisting))
    assert left.status == right.status == "ok"
    assert len(left) == len(right)
    lv = left.distributions()
    rv = right.distributions()
    assert {ctx.forward(p) for p in lv} == set(rv)
    for p in lv:
        if p.is_deterministic():
            assert ctx.forward(p).is_deterministic()
    for q in rv:
        if q.is_deterministic():
            assert ctx.backward(q).is_deterministic()
    for _ in range(n):
        p = mixture(zip(random_weights(rng, 3), [rng.choice(lv) for _ in range(3)]))
        assert ctx.backward(ctx.forward(p)) == p
        q = mixture(zip(random_weights(rng, 3), [rng.choice(rv) for _ in range(3)]))
        assert ctx.forward(ctx.backward(q)) == q
    return len(left)


def test_criterion_6_twist_and_collapse(mermin, pair):
    rng = random.Random(6)
    with criterion(6, "twist-and-collapse is a convex bijection (pair over Z3, Mermin with Z = V)", 30.0):
        gamma = pair.cochain("gamma")
        assert _collapse_roundtrip(rng, pair.complex, pair.subcomplex("c"), gamma, 100) > 0
        assert _collapse_roundtrip(rng, pair.complex, pair.subcomplex("T1"), gamma, 100) > 0
        n = _collapse_roundtrip(rng, mermin.complex, mermin.subcomplex("eta,xi"), mermin.cochain("beta"), 100)
        assert n == 1


def _cocycle_pool(mermin, pair):
    pool = []
    for scen, names in ((mermin, ("zero", "beta")), (pair, ("zero", "gamma"))):
        for name in names:
            pool.append(scen.cochain(name))
    return pool


def test_criterion_7_property_suites(mermin, pair):
    rng = random.Random(7)
    N = 200
    with criterion(7, f"algebraic property suites on {N} random instances each", 60.0):
        pool = _cocycle_pool(mermin, pair)

        # convolution monoid with unit the delta of the zero section
        by_base = {}
        for g in pool:
            by_base.setdefault(id(g.space), []).append(g)
        for _ in range(N):
            family = rng.choice(list(by_base.values()))
            X, H = family[0].space, family[0].group
            a, b, c = (random_distribution(rng, rng.choice(family)) for _ in range(3))
            unit = delta(Section(TwistingFunction(Cochain.zero(X, 2, H)), Cochain.zero(X, 1, H)))
            assert convolve(a, unit) == a == convolve(unit, a)
            assert convolve(convolve(a, b), c) == convolve(a, convolve(b, c))
            assert convolve(a, b) == convolve(b, a)

        # Theta is affine and intertwines convolution with the product of weights
        trivial = [g for g in pool if count_sections(g)]
        secs = {id(g): sections(g) for g in trivial}
        for _ in range(N):
            g1 = rng.choice(trivial)
            g2 = rng.choice([g for g in trivial if g.space is g1.space])
            S1, S2 = secs[id(g1)], secs[id(g2)]
            l1 = dict(zip(rng.sample(S1, 3), random_weights(rng, 3)))
            l2 = dict(zip(rng.sample(S2, 2), random_weights(rng, 2)))
            l1b = dict(zip(rng.sample(S1, 2), random_weights(rng, 2)))
            t = Fraction(rng.randint(0, 7), 7)
            mixed = {}
            for s, w in l1.items():
                mixed[s] = mixed.get(s, 0) + t * w
            for s, w in l1b.items():
                mixed[s] = mixed.get(s, 0) + (1 - t) * w
            mixed = {s: w for s, w in mixed.items() if w}
            assert classical_embed(mixed) == classical_embed(l1b).mix(classical_embed(l1), t)
            eta12 = TwistingFunction(g1 + g2, check=False)
            product = {}
            for (s1, w1), (s2, w2) in itertools.product(l1.items(), l2.items()):
                s = Section(eta12, s1.alpha + s2.alpha)
                product[s] = product.get(s, 0) + w1 * w2
            assert convolve(classical_embed(l1), classical_embed(l2)) == classical_embed(product)

        # equivariant round trip and injectivity
        for _ in range(N):
            g = rng.choice(pool)
            p, q = random_distribution(rng, g), random_distribution(rng, g)
            pt = to_equivariant(p)
            assert pt.is_equivariant() and pt.validate()
            assert from_equivariant(pt) == p
            assert (to_equivariant(q).weights == pt.weights) == (q == p)

        # twisting identities up to dimension 3, and the classifying map
        bases = [standard_simplex(3), standard_simplex(3).subcomplex(["012", "013", "023", "123"]),
                 mermin.complex, pair.complex]
        groups = [Z(2), Z(3), FiniteAbelianGroup.parse("Z2xZ2")]
        for k in range(N):
            X = bases[k % len(bases)]
            H = groups[(k // len(bases)) % len(groups)]
            alpha = Cochain(X, 1, H, {e: tuple(rng.randrange(d) for d in H.moduli) for e in X.simplices(1)})
            extra = {}
            if X.max_dim == 2:
                extra = {t: tuple(rng.randrange(d) for d in H.moduli) for t in X.simplices(2)}
            gamma = coboundary(alpha) + Cochain(X, 2, H, extra)
            eta = TwistingFunction(gamma)
            assert check_twisting_identities(eta), k
            assert classifying_map_check(eta), k


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
