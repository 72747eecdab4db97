import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twistlab.bundle import TwistingFunction
from twistlab.cochain import solve_trivialization
from twistlab.geometry import build_hrep
from twistlab.quantum import (MAX_QUBITS, Operator, PauliAssignment, QuantumError, born_distribution,
                              check_state, context_cocycle, eigenprojector, equivariance_check, load_matrix,
                              maximally_mixed, pauli, stabilizer_state, two_qubit_stabilizer_states)

NP_PAULI = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]),
            "Z": np.diag([1, -1])}


def np_pauli(word, sign=1):
    out = np.array([[1.0]])
    for ch in word:
        out = np.kron(out, NP_PAULI[ch])
    return sign * out


def test_pauli_algebra():
    X, Y, Z = pauli("X"), pauli("Y"), pauli("Z")
    ident = Operator.identity(2)
    assert (X @ X).close_to(ident)
    # X Y = i Z
    XY = X @ Y
    assert XY.re.tolist() == [[0, 0], [0, 0]]
    assert (Operator(XY.im) .close_to(Z))
    assert not X.commutes_with(Z)
    assert pauli("XX").commutes_with(pauli("ZZ"))
    assert (pauli("XX") @ pauli("YY") @ pauli("ZZ")).is_scalar_sign() == -1
    for word in ("ZX", "XY", "YY"):
        for h in (0, 1):
            P = eigenprojector(pauli(word), h)
            assert P.is_projector() and P.is_hermitian()
        assert (eigenprojector(pauli(word), 0) + eigenprojector(pauli(word), 1)).close_to(Operator.identity(4))


def test_operator_matches_numpy():
    for word in ("XZ", "YX", "ZY", "XYZ"):
        assert np.allclose(pauli(word, -1).to_complex(), np_pauli(word, -1))
    assert np.allclose((pauli("XY").kron(pauli("Z"))).to_complex(), np_pauli("XYZ"))


def test_mermin_context_signs(mermin):
    A = mermin.pauli()
    gamma = context_cocycle(mermin.complex, A)
    assert gamma == mermin.cochain("beta")
    # each column multiplies to +1 except one: three-qubit style parity check on the numpy side
    for t in mermin.complex.simplices(2):
        ops = [np_pauli(A.words[f.base.name][1], A.words[f.base.name][0]) for f in mermin.complex.face_table(t)]
        prod = ops[0] @ ops[1] @ ops[2]
        sign = 1 if np.allclose(prod, np.eye(4)) else -1
        assert np.allclose(prod, sign * np.eye(4))
        assert gamma(t) == ((0 if sign == 1 else 1),)


@given(st.sets(st.sampled_from(list("fgubhcwav")), max_size=9))
@settings(max_examples=40, deadline=None)
def test_sign_flips_change_the_cocycle_by_a_coboundary(edges):
    from twistlab.scenario import load_mermin
    scen = load_mermin()
    A = scen.pauli()
    flipped = context_cocycle(scen.complex, A.negated(sorted(edges)))
    assert solve_trivialization(flipped - scen.cochain("beta")) is not None


def test_non_commuting_context_is_rejected(mermin):
    A = mermin.pauli()
    bad = PauliAssignment(2, {**A.words, "f": (1, "XI")})
    with pytest.raises(QuantumError, match="commute"):
        context_cocycle(mermin.complex, bad)


def born_oracle(A, t, X, rho, eps):
    """Float Born rule from numpy eigenprojectors."""
    faces = X.face_table(t)
    mats = [np_pauli(A.words[f.base.name][1], A.words[f.base.name][0]) for f in faces]
    proj = lambda M, h: (np.eye(4) + (-1) ** h * M) / 2
    return {((h1,), (h2,)): np.trace(rho @ proj(mats[2], h1) @ proj(mats[0], (h2 + eps) % 2)).real
            for h1 in range(2) for h2 in range(2)}


def test_born_rule_against_numpy(mermin):
    X, A, beta = mermin.complex, mermin.pauli(), mermin.cochain("beta")
    P = build_hrep(TwistingFunction(beta))
    for gens in two_qubit_stabilizer_states()[::7]:
        rho = stabilizer_state(gens)
        p = born_distribution(X, A, rho, beta)
        assert p.validate() and P.contains(P.vector_of(p))
        rho_np = rho.to_complex()
        for t in X.simplices(2):
            ref = born_oracle(A, t, X, rho_np, beta(t)[0])
            for g, w in ref.items():
                assert abs(float(p.prob(t, g)) - w) < 1e-12


def test_stabilizer_list():
    states = two_qubit_stabilizer_states()
    assert len(states) == 60 and len(set(states)) == 60
    mats = {tuple(np.round(stabilizer_state(g).to_complex(), 9).ravel()) for g in states}
    assert len(mats) == 60
    for g in states[:10]:
        rho = stabilizer_state(g)
        check_state(rho)
        assert (rho @ rho).close_to(rho)


def test_inexact_states(mermin):
    rng = np.random.default_rng(0)
    M = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    rho = M @ M.conj().T
    rho /= np.trace(rho).real
    p = born_distribution(mermin.complex, mermin.pauli(), Operator.from_complex(rho), mermin.cochain("beta"))
    assert not p.exact
    for x in mermin.complex.simplices(2):
        assert abs(float(sum(p.weights[x].values())) - 1) < 1e-9


def test_state_validation():
    with pytest.raises(QuantumError, match="trace"):
        check_state(Operator.identity(4))
    with pytest.raises(QuantumError, match="Hermitian"):
        check_state(Operator([[Fraction(1, 2), 1], [0, Fraction(1, 2)]]))
    with pytest.raises(QuantumError, match="positive"):
        check_state(Operator([[Fraction(3, 2), 0], [0, Fraction(-1, 2)]]))
    with pytest.raises(QuantumError):
        Operator.identity(2 ** (MAX_QUBITS + 1))
    with pytest.raises(QuantumError):
        pauli("XQ")


def test_load_matrix():
    rho = load_matrix("1/2 0\n0 1/2\n")
    assert rho.exact and rho.close_to(maximally_mixed(1))


def test_equivariance_under_phase_flips(mermin):
    assert equivariance_check(mermin.complex, mermin.pauli(), maximally_mixed(2))
    rho = stabilizer_state(("+XX", "+ZZ"))
    assert equivariance_check(mermin.complex, mermin.pauli(), rho, edges=["u", "v", "f"])
