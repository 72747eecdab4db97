"""Twist and collapse: distributions on X pinned to a deterministic point on Z
correspond convexly to distributions on X/Z twisted by an induced cocycle."""
from __future__ import annotations

from .bundle import Section, TwistingFunction
from .cochain import Cochain, CochainError, coboundary, is_cocycle, pull_back, solve_trivialization
from .dist import DistributionError, TwistedDistribution, convolve, delta, restrict_along
from .simpset import SimplicialMap, SimplicialSet, quotient


class CollapseError(ValueError):
    pass


class CollapseContext:
    """The data (nu, nu~, X/Z, j, beta-bar) of a collapse of Z inside X for gamma.

    ``nu`` is the lexicographically least 1-cochain on Z with d(nu) = i^* gamma,
    ``nu_tilde`` extends it by zero, and ``beta_bar`` is the cocycle on X/Z
    with j^* beta_bar = gamma - d(nu_tilde).
    """

    def __init__(self, X: SimplicialSet, Z: SimplicialSet, gamma: Cochain):
        if gamma.space is not X:
            raise CochainError("cocycle lives on a different complex")
        self.X, self.Z, self.gamma = X, Z, gamma
        self.H = gamma.group
        self.inclusion: SimplicialMap = X.inclusion_of(Z)
        restricted = pull_back(gamma, self.inclusion)
        nu = solve_trivialization(restricted)
        if nu is None:
            raise CollapseError("subcomplex obstruction nontrivial: the restricted class does not vanish")
        self.nu = nu
        self.nu_tilde = Cochain(X, 1, self.H, {X.get(1, e.name): v for e, v in nu.values.items()})
        self.alpha = gamma - coboundary(self.nu_tilde)
        self.quotient, self.projection = quotient(X, Z)
        Q = self.quotient
        self.lifts = {y: X.get(y.dim, y.name) for y in Q.all_ids() if y.name != "*" or y.dim}
        self.beta_bar = Cochain(Q, 2, self.H, {y: self.alpha(self.lifts[y]) for y in Q.simplices(2)})
        if not is_cocycle(self.beta_bar):  # pragma: no cover - guaranteed by construction
            raise CollapseError("induced cochain on the quotient is not a cocycle")
        if pull_back(self.beta_bar, self.projection) != self.alpha:  # pragma: no cover
            raise CollapseError("j^* beta-bar differs from gamma - d(nu~)")
        self.twisting = TwistingFunction(gamma, check=False)
        self.quotient_twisting = TwistingFunction(self.beta_bar, check=False)
        self.pin = delta(Section(TwistingFunction(restricted, check=False), nu))
        self._shift_out = delta(Section(TwistingFunction(coboundary(-self.nu_tilde), check=False),
                                        -self.nu_tilde))
        self._shift_in = delta(Section(TwistingFunction(coboundary(self.nu_tilde), check=False),
                                       self.nu_tilde))

    def pinned_values(self) -> dict:
        """The pinned restriction on Z, keyed by the simplices of X."""
        return {self.X.get(z.dim, z.name): dict(self.pin.weights[z]) for z in self.Z.all_ids()}

    def check_pinned(self, p: TwistedDistribution):
        r = restrict_along(p, self.inclusion)
        for z in self.Z.all_ids():
            if r.weights[z] != self.pin.weights[z]:
                raise CollapseError(f"restriction to {z.name} is not the pinned deterministic point")

    def forward(self, p: TwistedDistribution) -> TwistedDistribution:
        if p.space is not self.X or p.cocycle != self.gamma:
            raise DistributionError("distribution is not over the context's twisting")
        self.check_pinned(p)
        q = convolve(p, self._shift_out)
        weights = {y: q.weights[x] for y, x in self.lifts.items()}
        weights[self.quotient.get(0, "*")] = {(): 1}
        return TwistedDistribution(self.quotient_twisting, weights)

    def backward(self, pbar: TwistedDistribution) -> TwistedDistribution:
        if pbar.space is not self.quotient or pbar.cocycle != self.beta_bar:
            raise DistributionError("distribution is not over the quotient twisting")
        q = restrict_along(pbar, self.projection)
        out = convolve(q, self._shift_in)
        return TwistedDistribution(self.twisting, out.weights)


def make_collapse(X: SimplicialSet, Z, gamma: Cochain) -> CollapseContext:
    if not isinstance(Z, SimplicialSet):
        Z = X.subcomplex(Z)
    return CollapseContext(X, Z, gamma)


def collapse_forward(ctx: CollapseContext, p: TwistedDistribution) -> TwistedDistribution:
    return ctx.forward(p)


def collapse_backward(ctx: CollapseContext, pbar: TwistedDistribution) -> TwistedDistribution:
    return ctx.backward(pbar)


def is_trivializing(f: SimplicialMap, gamma: Cochain) -> bool:
    return solve_trivialization(pull_back(gamma, f)) is not None


__all__ = ["CollapseContext", "CollapseError", "collapse_backward", "collapse_forward",
           "is_trivializing", "make_collapse"]
