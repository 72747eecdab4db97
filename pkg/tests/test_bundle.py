import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_cochain
from twistlab.bundle import (BundleIsomorphism, CapacityError, Section, TwistedBundle, TwistingFunction,
                             WK, WbarK, check_twisting_identities, classifying_map, classifying_map_check,
                             count_sections, section_from_cochain, sections, total_space, twistings_equivalent,
                             zero_twisting)
from twistlab.cochain import Cochain, CochainError, coboundary, pull_back, solve_trivialization
from twistlab.groups import Z
from twistlab.simpset import EZForm, check_simplicial, check_simplicial_object, standard_simplex


def test_twisting_identities_on_shipped_complexes(mermin, pair, disk):
    for scen in (mermin, pair, disk):
        for gamma in scen.cochains.values():
            assert check_twisting_identities(TwistingFunction(gamma))


def test_twisting_values_low_dimensions(mermin):
    beta = mermin.cochain("beta")
    eta = TwistingFunction(beta)
    X = mermin.complex
    for t in X.simplices(2):
        assert eta(EZForm(t)) == (beta(t),)
    for e in X.simplices(1):
        assert eta(EZForm(e)) == ()


def test_three_dimensional_twisting_formula():
    X = standard_simplex(3)
    H = Z(3)
    rng = random.Random(5)
    gamma = coboundary(random_cochain(rng, X, 1, H))
    eta = TwistingFunction(gamma)
    x = X.ez("0123")
    # eta_3(x) = (gamma(d3 x), eta(d1 x) - eta(d0 x))
    expected = (gamma(X.face(3, x)), H.sub(gamma(X.face(1, x)), gamma(X.face(0, x))))
    assert eta(x) == expected
    assert check_twisting_identities(eta)


def test_twisted_products_are_simplicial(mermin, pair):
    for scen in (mermin, pair):
        for gamma in scen.cochains.values():
            assert TwistedBundle(TwistingFunction(gamma)).check()


def test_total_space_of_mermin_bundle(mermin):
    E, proj = total_space(TwistedBundle(TwistingFunction(mermin.cochain("beta"))))
    assert E.counts() == (3, 21, 63)
    assert check_simplicial(E)
    assert solve_trivialization(pull_back(mermin.cochain("beta"), proj)) is not None


def test_section_counts(mermin, pair):
    assert count_sections(mermin.cochain("zero")) == 16
    assert count_sections(mermin.cochain("beta")) == 0
    assert sections(mermin.cochain("beta")) == []
    assert count_sections(pair.cochain("gamma")) == 27
    with pytest.raises(CapacityError) as info:
        sections(mermin.cochain("zero"), limit=10)
    assert info.value.count == 16


def test_every_section_is_simplicial(mermin, pair):
    for gamma in (mermin.cochain("zero"), pair.cochain("gamma")):
        eta = TwistingFunction(gamma)
        E = TwistedBundle(eta)
        X = gamma.space
        for s in sections(gamma, twisting=eta):
            assert s.check()
            # the section splits the projection and commutes with faces
            for n in range(1, X.max_dim + 1):
                for x in X.all_simplices(n):
                    for i in range(n + 1):
                        assert E.face(i, (s(x), x)) == (s(X.face(i, x)), X.face(i, x))
            # phi_alpha round trip: the degree one component is alpha again
            assert Cochain(X, 1, gamma.group, {e: s(EZForm(e))[0] for e in X.simplices(1)}) == s.alpha


def test_section_from_cochain_rejects_wrong_alpha(pair):
    gamma = pair.cochain("gamma")
    with pytest.raises(CochainError):
        section_from_cochain(TwistingFunction(gamma), Cochain.zero(pair.complex, 1, gamma.group))


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_three_way_agreement(seed):
    rng = random.Random(seed)
    X = standard_simplex(3).subcomplex(["012", "013", "023", "123"])
    H = rng.choice([Z(2), Z(3)])
    gamma = random_cochain(rng, X, 2, H)
    eta = TwistingFunction(gamma)
    has_sections = count_sections(gamma) > 0
    iso = twistings_equivalent(eta, zero_twisting(X, H))
    assert has_sections == (iso is not None) == (solve_trivialization(gamma) is not None)
    if iso is not None:
        assert iso.check()


def test_bundle_isomorphism_against_brute_force(pair):
    """Search every psi for a simplicial (g, x) -> (g + psi(x), x) and compare."""
    X = pair.complex
    H = Z(2)
    rng = random.Random(11)
    for _ in range(6):
        eta = TwistingFunction(random_cochain(rng, X, 2, H))
        tau = TwistingFunction(random_cochain(rng, X, 2, H))
        src, dst = TwistedBundle(eta), TwistedBundle(tau)
        edges = X.simplices(1)
        found = []
        for labels in itertools.product(H.elements(), repeat=len(edges)):
            psi_alpha = Cochain(X, 1, H, dict(zip(edges, labels)))
            diff = tau.cocycle - eta.cocycle
            psi = Section(TwistingFunction(diff, check=False), psi_alpha)
            f = BundleIsomorphism(eta, tau, psi)
            ok = all(f(src.face(i, e)) == dst.face(i, f(e))
                     for n in (1, 2) for e in src.simplices(n) for i in range(n + 1))
            if ok:
                found.append(psi_alpha)
        iso = twistings_equivalent(eta, tau)
        assert (iso is not None) == bool(found)
        if iso is not None:
            assert iso.check()
            assert iso.psi.alpha in found


def test_inverse_twisting_flip_is_simplicial(mermin):
    beta = mermin.cochain("beta")
    eta = TwistingFunction(beta)
    E, Einv = TwistedBundle(eta), TwistedBundle(eta.inverse())
    H, X = eta.group, eta.space
    flip = lambda e: (H.tneg(e[0]), e[1])
    for n in range(3):
        for e in E.simplices(n):
            for i in range(n + 1) if n else ():
                assert flip(E.face(i, e)) == Einv.face(i, flip(e))
            for j in range(n + 1):
                assert flip(E.degeneracy(j, e)) == Einv.degeneracy(j, flip(e))
            assert E.project(e) == Einv.project(flip(e))


def test_tensor_adds_cocycles(mermin):
    beta = TwistingFunction(mermin.cochain("beta"))
    assert beta.tensor(beta).cocycle.is_zero()
    assert beta.tensor(beta.inverse()).cocycle.is_zero()


@pytest.mark.parametrize("H", [Z(2), Z(3)])
def test_universal_bundle_is_simplicial(H):
    for obj in (WK(H), WbarK(H)):
        assert check_simplicial_object(obj.simplices, obj.face, obj.degeneracy, 3)


def test_classifying_map(mermin, pair):
    for gamma in (mermin.cochain("beta"), pair.cochain("gamma")):
        eta = TwistingFunction(gamma)
        assert classifying_map_check(eta)
        theta, theta_bar = classifying_map(eta)
        t = gamma.space.simplices(2)[0]
        x = EZForm(t)
        assert theta_bar(x) == (eta(x), ())
        g = ((1,), (0,))
        assert theta((g, x)) == (g, eta(x), ())


def test_twisting_needs_a_cocycle():
    X = standard_simplex(3)
    with pytest.raises(CochainError):
        TwistingFunction(Cochain(X, 2, Z(2), {"012": 1}))
    with pytest.raises(CochainError):
        TwistingFunction(Cochain(X, 1, Z(2), {}))
