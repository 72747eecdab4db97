"""Dense-matrix quantum backend: Pauli words, Born rule, and the induced cocycle.

Matrices are kept exact as pairs of Fraction-valued arrays (real and
imaginary parts) whenever the input allows it; anything else falls back
to complex floats and is flagged inexact.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Mapping

import numpy as np

from .bundle import Section, TwistingFunction
from .cochain import Cochain, coboundary, is_cocycle
from .dist import TwistedDistribution, convolve, delta
from .groups import Z
from .simpset import EZForm, Report, SimplicialSet

MAX_QUBITS = 3
TOL = 1e-12


class QuantumError(ValueError):
    pass


def _fr(a):
    return np.array(a, dtype=object)


class Operator:
    """A square complex matrix, exact (real, imag Fraction arrays) or float."""

    def __init__(self, re_part, im_part=None, exact: bool = True):
        if exact:
            self.re = _fr([[Fraction(v) for v in row] for row in re_part])
            im = im_part if im_part is not None else [[0] * len(row) for row in re_part]
            self.im = _fr([[Fraction(v) for v in row] for row in im])
            self.exact = True
        else:
            m = np.asarray(re_part, dtype=complex)
            if im_part is not None:
                m = m + 1j * np.asarray(im_part, dtype=float)
            self.mat = m
            self.exact = False
        if self.shape[0] != self.shape[1]:
            raise QuantumError("operators must be square")
        if self.shape[0] > 2 ** MAX_QUBITS:
            raise QuantumError(f"at most {MAX_QUBITS} qubits are supported")

    @classmethod
    def from_complex(cls, m) -> "Operator":
        m = np.asarray(m, dtype=complex)
        return cls(m.real, m.imag, exact=False)

    @property
    def shape(self):
        return (self.re if self.exact else self.mat).shape

    @property
    def dim(self) -> int:
        return self.shape[0]

    def to_complex(self) -> np.ndarray:
        if not self.exact:
            return self.mat
        return (np.vectorize(float)(self.re) + 1j * np.vectorize(float)(self.im)).astype(complex)

    @classmethod
    def identity(cls, dim: int) -> "Operator":
        return cls([[int(i == j) for j in range(dim)] for i in range(dim)])

    def _coerce(self, other):
        if self.exact and other.exact:
            return self, other
        return Operator.from_complex(self.to_complex()), Operator.from_complex(other.to_complex())

    def __matmul__(self, other: "Operator") -> "Operator":
        a, b = self._coerce(other)
        if a.exact:
            out = Operator.__new__(Operator)
            out.exact = True
            out.re = a.re.dot(b.re) - a.im.dot(b.im)
            out.im = a.re.dot(b.im) + a.im.dot(b.re)
            return out
        return Operator.from_complex(a.mat @ b.mat)

    def __add__(self, other: "Operator") -> "Operator":
        a, b = self._coerce(other)
        if a.exact:
            out = Operator.__new__(Operator)
            out.exact, out.re, out.im = True, a.re + b.re, a.im + b.im
            return out
        return Operator.from_complex(a.mat + b.mat)

    def scale(self, c) -> "Operator":
        """Multiply by a rational (or, for inexact operators, any real) scalar."""
        if self.exact:
            c = Fraction(c)
            out = Operator.__new__(Operator)
            out.exact, out.re, out.im = True, self.re * c, self.im * c
            return out
        return Operator.from_complex(self.mat * c)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def kron(self, other: "Operator") -> "Operator":
        a, b = self._coerce(other)
        if a.exact:
            out = Operator.__new__(Operator)
            out.exact = True
            out.re = np.kron(a.re, b.re) - np.kron(a.im, b.im)
            out.im = np.kron(a.re, b.im) + np.kron(a.im, b.re)
            return out
        return Operator.from_complex(np.kron(a.mat, b.mat))

    def dagger(self) -> "Operator":
        if self.exact:
            out = Operator.__new__(Operator)
            out.exact, out.re, out.im = True, self.re.T.copy(), -self.im.T
            return out
        return Operator.from_complex(self.mat.conj().T)

    def trace(self):
        if self.exact:
            return sum(self.re[i][i] for i in range(self.dim)), sum(self.im[i][i] for i in range(self.dim))
        t = np.trace(self.mat)
        return t.real, t.imag

    def close_to(self, other: "Operator") -> bool:
        a, b = self._coerce(other)
        if a.exact:
            return bool((a.re == b.re).all() and (a.im == b.im).all())
        return bool(np.allclose(a.mat, b.mat, atol=TOL, rtol=0))

    def __eq__(self, other):
        return isinstance(other, Operator) and self.close_to(other)

    __hash__ = None

    def is_hermitian(self) -> bool:
        return self.close_to(self.dagger())

    def is_projector(self) -> bool:
        return self.is_hermitian() and self.close_to(self @ self)

    def is_scalar_sign(self):
        """+1 / -1 if the operator is plus or minus the identity, else None."""
        ident = Operator.identity(self.dim)
        if self.close_to(ident):
            return 1
        if self.close_to(-ident):
            return -1
        return None

    def commutes_with(self, other: "Operator") -> bool:
        return (self @ other).close_to(other @ self)


_PAULI = {
    "I": ([[1, 0], [0, 1]], [[0, 0], [0, 0]]),
    "X": ([[0, 1], [1, 0]], [[0, 0], [0, 0]]),
    "Y": ([[0, 0], [0, 0]], [[0, -1], [1, 0]]),
    "Z": ([[1, 0], [0, -1]], [[0, 0], [0, 0]]),
}


def parse_pauli(text: str):
    """Split ``-XZ`` or ``+X⊗Z`` into (sign, word)."""
    t = text.strip().replace("⊗", "").replace("*", "")
    m = re.fullmatch(r"([+-]?)([IXYZ]+)", t)
    if not m:
        raise QuantumError(f"bad Pauli word {text!r}")
    return (-1 if m.group(1) == "-" else 1), m.group(2)


def pauli(word: str, sign: int = 1) -> Operator:
    if not word or len(word) > MAX_QUBITS or set(word) - set("IXYZ"):
        raise QuantumError(f"bad Pauli word {word!r}")
    out = None
    for ch in word:
        op = Operator(*_PAULI[ch])
        out = op if out is None else out.kron(op)
    return out.scale(sign)


def eigenprojector(A: Operator, h: int) -> Operator:
    """(1 + (-1)^h A) / 2 for an observable with eigenvalues +1 and -1."""
    ident = Operator.identity(A.dim)
    return (ident + A.scale((-1) ** (h % 2))).scale(Fraction(1, 2))


@dataclass
class PauliAssignment:
    """Signed Pauli words attached to the edges of a scenario."""

    qubits: int
    words: dict  # edge name -> (sign, word)
    name: str = ""

    def __post_init__(self):
        if not 1 <= self.qubits <= MAX_QUBITS:
            raise QuantumError(f"qubit count must be between 1 and {MAX_QUBITS}")
        for e, (s, w) in self.words.items():
            if len(w) != self.qubits or s not in (1, -1):
                raise QuantumError(f"edge {e}: {w!r} is not a signed {self.qubits}-qubit word")

    @classmethod
    def parse(cls, qubits: int, entries: Mapping, name: str = "") -> "PauliAssignment":
        return cls(qubits, {e: parse_pauli(t) for e, t in entries.items()}, name)

    def operator(self, edge: str) -> Operator:
        s, w = self.words.get(edge, (1, "I" * self.qubits))
        return pauli(w, s)

    def text(self, edge: str) -> str:
        s, w = self.words[edge]
        return ("-" if s < 0 else "+") + w

    def negated(self, edges) -> "PauliAssignment":
        words = dict(self.words)
        for e in edges:
            s, w = words.get(e, (1, "I" * self.qubits))
            words[e] = (-s, w)
        return PauliAssignment(self.qubits, words, self.name)


def _triangle_operators(X: SimplicialSet, A: PauliAssignment, t):
    ops = []
    for f in X.face_table(t):
        if f.is_degenerate:
            ops.append(Operator.identity(2 ** A.qubits))
        else:
            ops.append(A.operator(f.base.name))
    return ops


def context_cocycle(X: SimplicialSet, A: PauliAssignment) -> Cochain:
    """The sign cochain: product of the three edge operators of each triangle is (-1)^eps."""
    if any(x.dim > 2 for x in X.all_ids()):
        raise QuantumError("the quantum backend handles two-dimensional scenarios")
    unknown = set(A.words) - {e.name for e in X.simplices(1)}
    if unknown:
        raise QuantumError(f"assignment names unknown edges: {', '.join(sorted(unknown))}")
    values = {}
    for t in X.simplices(2):
        ops = _triangle_operators(X, A, t)
        for a in range(3):
            for b in range(a + 1, 3):
                if not ops[a].commutes_with(ops[b]):
                    raise QuantumError(f"context {t.name}: operators on d{a} and d{b} do not commute")
        sign = (ops[0] @ ops[1] @ ops[2]).is_scalar_sign()
        if sign is None:
            raise QuantumError(f"context {t.name}: product of the edge operators is not +-1")
        values[t] = 0 if sign == 1 else 1
    gamma = Cochain(X, 2, Z(2), values)
    if not is_cocycle(gamma):  # pragma: no cover - a 2-dimensional complex has no 3-simplices
        raise QuantumError("sign cochain is not a cocycle")
    return gamma


def check_state(rho: Operator):
    if rho.dim & (rho.dim - 1):
        raise QuantumError("state dimension is not a power of two")
    if not rho.is_hermitian():
        raise QuantumError("state is not Hermitian")
    tr = rho.trace()
    if rho.exact:
        if tr != (1, 0):
            raise QuantumError("state does not have unit trace")
    elif abs(tr[0] - 1) > TOL or abs(tr[1]) > TOL:
        raise QuantumError("state does not have unit trace")
    eig = np.linalg.eigvalsh(rho.to_complex())
    if eig.min() < -1e-9:
        raise QuantumError("state is not positive semidefinite")


def _prob(rho: Operator, proj: Operator):
    re_part, im_part = (rho @ proj).trace()
    if rho.exact and proj.exact:
        if im_part != 0:
            raise QuantumError("Born probability has an imaginary part")
        return re_part
    if abs(im_part) > 1e-9:
        raise QuantumError("Born probability has an imaginary part")
    return Fraction(float(re_part)).limit_denominator(10 ** 12)


def born_distribution(X: SimplicialSet, A: PauliAssignment, rho: Operator,
                      gamma: Cochain | None = None) -> TwistedDistribution:
    """p_T(h1, h2) = Tr(rho P^{d2}_{h1} P^{d0}_{h2 + gamma(T)}) on every triangle.

    The d0 outcome is offset by the context sign so that the d1 edge
    carries h1 + h2, as the twisted face maps require.  Inexact states are
    rounded to rationals with denominators at most 10^12.
    """
    check_state(rho)
    if rho.dim != 2 ** A.qubits:
        raise QuantumError("state and assignment act on different numbers of qubits")
    gamma = context_cocycle(X, A) if gamma is None else gamma
    eta = TwistingFunction(gamma, check=False)
    top = {}
    for x in X.maximal_simplices():
        if x.dim == 0:
            top[x] = {(): 1}
        elif x.dim == 1:
            op = A.operator(x.name)
            top[x] = {((h,),): _prob(rho, eigenprojector(op, h)) for h in range(2)}
        else:
            ops = _triangle_operators(X, A, x)
            eps = gamma(x)[0]
            dist = {}
            for h1 in range(2):
                for h2 in range(2):
                    proj = eigenprojector(ops[2], h1) @ eigenprojector(ops[0], h2 + eps)
                    dist[((h1,), (h2,))] = _prob(rho, proj)
            top[x] = dist
    p = TwistedDistribution.from_top(eta, top, name="born")
    p.exact = rho.exact
    return p


def equivariance_check(X: SimplicialSet, A: PauliAssignment, rho: Operator, edges=None) -> Report:
    """Negating the operator on an edge e shifts its outcome; the Born distribution must
    change by convolution with the deterministic distribution of the indicator cochain of e."""
    base = born_distribution(X, A, rho)
    edges = [e.name for e in X.simplices(1)] if edges is None else list(edges)
    checked = 0
    for e in edges:
        flipped = A.negated([e])
        q = born_distribution(X, flipped, rho)
        ind = Cochain(X, 1, Z(2), {e: 1})
        shift = delta(Section(TwistingFunction(coboundary(ind), check=False), ind))
        expected = convolve(base, shift)
        checked += 1
        if q.cocycle != expected.cocycle or q.weights != expected.weights:
            return Report(False, f"phase flip on {e} is not the convolution shift", checked)
    return Report(True, "ok", checked)


# --- states -------------------------------------------------------------------


def maximally_mixed(qubits: int) -> Operator:
    return Operator.identity(2 ** qubits).scale(Fraction(1, 2 ** qubits))


def stabilizer_state(generators) -> Operator:
    """rho = prod (1 + g_i) / 2 for independent commuting signed Pauli words."""
    ops = []
    for g in generators:
        s, w = parse_pauli(g) if isinstance(g, str) else g
        ops.append(pauli(w, s))
    if not ops:
        raise QuantumError("no stabilizer generators")
    n = len(parse_pauli(generators[0])[1]) if isinstance(generators[0], str) else len(generators[0][1])
    if len(ops) != n:
        raise QuantumError(f"{n} qubits need {n} stabilizer generators")
    for a in range(len(ops)):
        for b in range(a + 1, len(ops)):
            if not ops[a].commutes_with(ops[b]):
                raise QuantumError("stabilizer generators do not commute")
    ident = Operator.identity(2 ** n)
    rho = ident
    for op in ops:
        rho = rho @ (ident + op).scale(Fraction(1, 2))
    if rho.trace() != (1, 0):
        raise QuantumError("stabilizer generators are not independent (or contain -1)")
    return rho


def load_matrix(text: str) -> Operator:
    """Rows of whitespace-separated entries; exact entries look like 1/2 or 1/2+1/4i."""
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    exact = True
    re_rows, im_rows = [], []
    for row in rows:
        rr, ii = [], []
        for tok in row:
            m = re.fullmatch(r"([+-]?\d+(?:/\d+)?)?(?:([+-]\d*(?:/\d+)?)i)?", tok)
            if m and tok and (m.group(1) or m.group(2)):
                rr.append(Fraction(m.group(1) or 0))
                im = m.group(2)
                if im in ("+", "-"):
                    im += "1"
                ii.append(Fraction(im) if im else Fraction(0))
            else:
                exact = False
                z = complex(tok.replace("i", "j"))
                rr.append(z.real)
                ii.append(z.imag)
        re_rows.append(rr)
        im_rows.append(ii)
    if any(len(r) != len(rows) for r in rows):
        raise QuantumError("state matrix is not square")
    if exact:
        return Operator(re_rows, im_rows)
    return Operator(np.array(re_rows, dtype=float), np.array(im_rows, dtype=float), exact=False)


def two_qubit_stabilizer_states() -> list:
    """The 60 pure two-qubit stabilizer states as generator pairs."""
    text = resources.files("twistlab.data").joinpath("stabilizers2.txt").read_text()
    return [tuple(line.split(",")) for line in text.splitlines() if line.strip() and not line.startswith("#")]
