"""Finite abelian groups in invariant-factor form and their nerves.

Group elements are tuples of residues, one per invariant factor.  An
n-simplex of the nerve NH is a tuple of n group elements.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

Element = tuple
NerveSimplex = tuple


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Z_{d1} x Z_{d2} x ... with d1 | d2 | ...  (empty = trivial group)."""

    moduli: tuple = ()

    def __post_init__(self):
        mods = tuple(int(d) for d in self.moduli)
        object.__setattr__(self, "moduli", mods)
        for d in mods:
            if d < 2:
                raise GroupError(f"invariant factor {d} < 2")
        for a, b in zip(mods, mods[1:]):
            if b % a:
                raise GroupError(f"invariant factors must divide: {a} does not divide {b}")

    @classmethod
    def cyclic(cls, d: int) -> "FiniteAbelianGroup":
        return cls(() if d == 1 else (d,))

    @classmethod
    def parse(cls, spec: str) -> "FiniteAbelianGroup":
        """Parse ``Z2``, ``Z2xZ4`` or ``1`` (trivial)."""
        spec = spec.strip()
        if spec in ("1", "0", "Z1", ""):
            return cls(())
        parts = re.split(r"[x×*]", spec)
        mods = []
        for p in parts:
            m = re.fullmatch(r"Z_?(\d+)", p.strip())
            if not m:
                raise GroupError(f"bad group spec {spec!r}")
            if int(m.group(1)) > 1:
                mods.append(int(m.group(1)))
        return cls(tuple(mods))

    def __str__(self):
        if not self.moduli:
            return "1"
        return "x".join(f"Z{d}" for d in self.moduli)

    @property
    def order(self) -> int:
        n = 1
        for d in self.moduli:
            n *= d
        return n

    @property
    def zero(self) -> Element:
        return tuple(0 for _ in self.moduli)

    def elements(self) -> list:
        return [tuple(e) for e in itertools.product(*(range(d) for d in self.moduli))]

    def element(self, value) -> Element:
        """Coerce an int (cyclic groups only), tuple or text to an element."""
        if isinstance(value, str):
            value = value.strip()
            if value in ("", "0") and not self.moduli:
                return ()
            value = tuple(int(v) for v in value.split("."))
        if isinstance(value, int):
            if len(self.moduli) > 1:
                raise GroupError("integer values only make sense for cyclic groups")
            if not self.moduli:
                if value:
                    raise GroupError("the trivial group has only 0")
                return ()
            value = (value,)
        value = tuple(value)
        if len(value) != len(self.moduli):
            raise GroupError(f"element {value} does not match group {self}")
        return tuple(int(v) % d for v, d in zip(value, self.moduli))

    def format(self, e: Element) -> str:
        if not self.moduli:
            return "0"
        return ".".join(str(v) for v in e)

    def add(self, a: Element, b: Element) -> Element:
        return tuple((x + y) % d for x, y, d in zip(a, b, self.moduli))

    def neg(self, a: Element) -> Element:
        return tuple((-x) % d for x, d in zip(a, self.moduli))

    def sub(self, a: Element, b: Element) -> Element:
        return tuple((x - y) % d for x, y, d in zip(a, b, self.moduli))

    def scale(self, k: int, a: Element) -> Element:
        return tuple((k * x) % d for x, d in zip(a, self.moduli))

    def sum(self, items) -> Element:
        acc = self.zero
        for e in items:
            acc = self.add(acc, e)
        return acc

    # --- nerve tuples -------------------------------------------------

    def tuples(self, n: int) -> list:
        """All n-simplices of NH in lexicographic order."""
        return [tuple(t) for t in itertools.product(self.elements(), repeat=n)]

    def tadd(self, g: NerveSimplex, h: NerveSimplex) -> NerveSimplex:
        return tuple(self.add(a, b) for a, b in zip(g, h))

    def tneg(self, g: NerveSimplex) -> NerveSimplex:
        return tuple(self.neg(a) for a in g)

    def tsub(self, g: NerveSimplex, h: NerveSimplex) -> NerveSimplex:
        return tuple(self.sub(a, b) for a, b in zip(g, h))

    def tzero(self, n: int) -> NerveSimplex:
        return tuple(self.zero for _ in range(n))

    def nerve_face(self, i: int, g: NerveSimplex) -> NerveSimplex:
        n = len(g)
        if not 0 <= i <= n:
            raise IndexError(f"face d{i} out of range for a {n}-simplex")
        if n == 0:
            raise IndexError("0-simplices have no faces")
        if i == 0:
            return g[1:]
        if i == n:
            return g[:-1]
        return g[: i - 1] + (self.add(g[i - 1], g[i]),) + g[i + 1:]

    def nerve_degeneracy(self, j: int, g: NerveSimplex) -> NerveSimplex:
        if not 0 <= j <= len(g):
            raise IndexError(f"degeneracy s{j} out of range for a {len(g)}-simplex")
        return g[:j] + (self.zero,) + g[j:]

    def format_tuple(self, g: NerveSimplex) -> str:
        if not g:
            return "()"
        return ",".join(self.format(e) for e in g)

    def parse_tuple(self, text: str) -> NerveSimplex:
        text = text.strip()
        if text in ("()", "-", ""):
            return ()
        return tuple(self.element(part) for part in text.split(","))


def Z(d: int) -> FiniteAbelianGroup:
    """Shorthand for the cyclic group of order d."""
    return FiniteAbelianGroup.cyclic(d)

