import random
from fractions import Fraction

import pytest

from twistlab.bundle import TwistingFunction
from twistlab.cochain import Cochain, coboundary
from twistlab.dist import mixture, uniform
from twistlab.geometry import build_hrep, enumerate_vertices
from twistlab.scenario import load_mermin, parse_scenario

PAIR = """
[scenario pair]
[vertices]
0 1 2 3
[edges]
a 0 1
b 1 2
c 0 2
d 2 3
e 0 3
[triangles]
T1 b c a
T2 d e c
[cochain zero deg=2 group=Z3]
[cochain gamma deg=2 group=Z3]
T1=1
T2=2
"""

DISK = """
[scenario disk]
[vertices]
c v0 v1 v2 v3
[edges]
x0 c v0
x1 c v1
x2 c v2
x3 c v3
e01 v0 v1
e12 v1 v2
e23 v2 v3
e03 v0 v3
[triangles]
t01 e01 x1 x0
t12 e12 x2 x1
t23 e23 x3 x2
t03 e03 x3 x0
[cochain zero deg=2 group=Z2]
"""


@pytest.fixture(scope="session")
def mermin():
    return load_mermin()


@pytest.fixture(scope="session")
def pair():
    return parse_scenario(PAIR)


@pytest.fixture(scope="session")
def disk():
    return parse_scenario(DISK)


_VERTEX_CACHE = {}


def vertex_distributions(gamma, pinned=None):
    key = (id(gamma), id(pinned))
    if key not in _VERTEX_CACHE:
        P = build_hrep(TwistingFunction(gamma), pinned)
        V = enumerate_vertices(P)
        assert V.status == "ok", V.status
        _VERTEX_CACHE[key] = (gamma, pinned, V.distributions())
    return _VERTEX_CACHE[key][2]


def random_weights(rng: random.Random, k: int):
    raw = [rng.randint(0, 12) for _ in range(k)]
    if not any(raw):
        raw[rng.randrange(k)] = 1
    total = sum(raw)
    return [Fraction(r, total) for r in raw]


def random_distribution(rng: random.Random, gamma, pinned=None, k: int = 4):
    """A random rational point of the polytope: a mixture of a few vertices."""
    verts = vertex_distributions(gamma, pinned)
    picks = [rng.choice(verts) for _ in range(k)]
    return mixture(zip(random_weights(rng, k), picks))


def random_cochain(rng: random.Random, X, degree, H):
    return Cochain(X, degree, H, {s: tuple(rng.randrange(d) for d in H.moduli) for s in X.simplices(degree)})


def random_coboundary(rng, X, H):
    return coboundary(random_cochain(rng, X, 1, H))


def any_distribution(rng, gamma):
    """Uniform or a random mixture, whichever the polytope allows cheaply."""
    if rng.random() < 0.2:
        return uniform(TwistingFunction(gamma))
    return random_distribution(rng, gamma)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
