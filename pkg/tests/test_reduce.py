import itertools
import random
from fractions import Fraction

import pytest

from conftest import random_weights
from twistlab.bundle import TwistingFunction, count_sections
from twistlab.cochain import Cochain, coboundary, pull_back
from twistlab.dist import mixture, uniform
from twistlab.geometry import build_hrep, enumerate_vertices
from twistlab.reduce import CollapseError, is_trivializing, make_collapse


def test_mermin_collapse_data(mermin):
    X = mermin.complex
    Z = mermin.subcomplex("eta,xi")
    ctx = make_collapse(X, Z, mermin.cochain("beta"))
    assert {e.name: v for e, v in ctx.nu.values.items() if any(v)} == {"a": (1,), "v": (1,)}
    # brute force over every labelling of Z's edges, in simplex order
    target = pull_back(mermin.cochain("beta"), X.inclusion_of(Z))
    edges = Z.simplices(1)
    sols = [lab for lab in itertools.product((0, 1), repeat=len(edges))
            if coboundary(Cochain(Z, 1, target.group, dict(zip(edges, lab)))) == target]
    assert len(sols) == 8
    assert Cochain(Z, 1, target.group, dict(zip(edges, min(sols)))) == ctx.nu
    nu_tilde = Cochain(X, 1, target.group, {X.get(1, "a"): 1, X.get(1, "v"): 1})
    assert ctx.nu_tilde == nu_tilde
    assert {t.name: v for t, v in (mermin.cochain("beta") - coboundary(nu_tilde)).values.items() if any(v)} \
        == {"sigma": (1,)}
    assert {t.name: v for t, v in ctx.beta_bar.values.items() if any(v)} == {"sigma": (1,)}
    assert ctx.quotient.counts() == (1, 4, 4)
    assert pull_back(ctx.beta_bar, ctx.projection) == ctx.alpha
    assert ctx.alpha == mermin.cochain("beta") - coboundary(ctx.nu_tilde)
    # the quotient class is still obstructed
    assert count_sections(ctx.beta_bar) == 0


def test_zero_restriction_gives_plain_collapse(pair):
    zero = pair.cochain("zero")
    ctx = make_collapse(pair.complex, pair.subcomplex("T1"), zero)
    assert ctx.nu.is_zero() and ctx.nu_tilde.is_zero()
    assert ctx.beta_bar.is_zero()


def _vertices(P):
    V = enumerate_vertices(P)
    assert V.status == "ok"
    return V.distributions()


@pytest.mark.parametrize("sub", ["c", "T1", "a,b"])
def test_round_trips_and_affinity(pair, sub):
    rng = random.Random(hash(sub) % 1000)
    gamma = pair.cochain("gamma")
    ctx = make_collapse(pair.complex, pair.subcomplex(sub), gamma)
    left = _vertices(build_hrep(TwistingFunction(gamma), ctx.pinned_values()))
    right = _vertices(build_hrep(ctx.quotient_twisting))
    assert len(left) == len(right)
    for _ in range(20):
        k = 3
        ws = random_weights(rng, k)
        ps = [rng.choice(left) for _ in range(k)]
        p = mixture(zip(ws, ps))
        assert ctx.backward(ctx.forward(p)) == p
        # forward commutes with convex combination
        assert ctx.forward(p) == mixture(zip(ws, [ctx.forward(q) for q in ps]))
        qs = [rng.choice(right) for _ in range(k)]
        q = mixture(zip(ws, qs))
        assert ctx.forward(ctx.backward(q)) == q
        assert ctx.backward(q) == mixture(zip(ws, [ctx.backward(r) for r in qs]))


def test_unpinned_input_is_rejected(mermin):
    ctx = make_collapse(mermin.complex, mermin.subcomplex("eta,xi"), mermin.cochain("beta"))
    with pytest.raises(CollapseError, match="pinned"):
        ctx.forward(uniform(TwistingFunction(mermin.cochain("beta"))))


def test_obstructed_subcomplex_is_rejected(mermin):
    everything = ",".join(t.name for t in mermin.complex.simplices(2))
    with pytest.raises(CollapseError, match="obstruction"):
        make_collapse(mermin.complex, mermin.subcomplex(everything), mermin.cochain("beta"))


def test_is_trivializing(mermin):
    X, beta = mermin.complex, mermin.cochain("beta")
    assert is_trivializing(X.inclusion_of(X.subcomplex(["u", "c", "a"])), beta)
    assert is_trivializing(X.inclusion_of(X.subcomplex(["eta", "xi"])), beta)
    assert not is_trivializing(X.identity(), beta)


def test_pinned_values_are_deterministic(mermin):
    ctx = make_collapse(mermin.complex, mermin.subcomplex("eta,xi"), mermin.cochain("beta"))
    pins = ctx.pinned_values()
    assert all(len(d) == 1 and next(iter(d.values())) == Fraction(1) for d in pins.values())
