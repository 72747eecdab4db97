"""Command-line front end: ``twistlab <command> <scenario> ...``.

Exit codes: 0 for success or an affirmative answer, 1 for a negative
answer, 2 for usage and validation errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bundle import (CapacityError, TwistedBundle, TwistingFunction, classifying_map_check,
                     count_sections, sections)
from .cochain import CochainError, is_cocycle, solve_trivialization, trivialization_certificate
from .dist import (DistributionError, convolve, from_equivariant, to_equivariant, uniform)
from .geometry import (NotTrivializingError, SymmetryError, brute_force_vertices, build_hrep,
                       contextuality_witness, enumerate_vertices, is_noncontextual,
                       relative_noncontextual, relatively_deterministic, vertex_orbits)
from .groups import GroupError
from .quantum import (QuantumError, born_distribution, context_cocycle, equivariance_check, load_matrix,
                      maximally_mixed, stabilizer_state)
from .reduce import CollapseError, make_collapse
from .scenario import Scenario, ScenarioError, load_scenario, serialize_scenario
from .simpset import CapabilityError, SimplicialError, check_simplicial

EXIT_OK, EXIT_NO, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --- output -------------------------------------------------------------------

class Output:
    """Collects summary lines and one table, then renders in the chosen format."""

    def __init__(self, fmt: str, command: str, stream=None):
        self.fmt = fmt
        self.command = command
        self.stream = stream or sys.stdout
        self.lines = []
        self.columns = None
        self.rows = []

    def say(self, text: str):
        self.lines.append(text)

    def table(self, columns, rows):
        self.columns = list(columns)
        self.rows = [[_cell(v) for v in row] for row in rows]

    def render(self):
        w = self.stream.write
        if self.fmt == "json-lines":
            w(json.dumps({"schema": 1, "command": self.command}) + "\n")
            for line in self.lines:
                w(json.dumps({"message": line}) + "\n")
            for row in self.rows:
                w(json.dumps(dict(zip(self.columns, row))) + "\n")
        elif self.fmt == "csv":
            if self.columns is None:
                for line in self.lines:
                    w(line + "\n")
                return
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(self.columns)
            writer.writerows(self.rows)
            w(buf.getvalue())
        else:
            for line in self.lines:
                w(line + "\n")
            if self.columns is not None and self.rows:
                widths = [max(len(str(c)), *(len(r[k]) for r in self.rows)) for k, c in enumerate(self.columns)]
                w("  ".join(str(c).ljust(widths[k]) for k, c in enumerate(self.columns)).rstrip() + "\n")
                for r in self.rows:
                    w("  ".join(v.ljust(widths[k]) for k, v in enumerate(r)).rstrip() + "\n")


def _cell(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


# --- shared helpers ---------------------------------------------------------------

def _state(spec: str | None, qubits: int):
    if spec is None or spec == "maximally-mixed":
        return maximally_mixed(qubits)
    if spec.startswith("stabilizer:"):
        return stabilizer_state([g for g in spec.split(":", 1)[1].split(",") if g])
    if spec.startswith("file:"):
        path = Path(spec.split(":", 1)[1])
        try:
            return load_matrix(path.read_text())
        except OSError as exc:
            raise UsageError(f"cannot read state file {path}: {exc.strerror}") from None
    raise UsageError(f"unknown state {spec!r} (use maximally-mixed, stabilizer:..., file:...)")


def _distribution(scen: Scenario, cochain: str, name: str, state: str | None, pauli: str | None):
    gamma = scen.cochain(cochain)
    if name == "born":
        A = scen.pauli(pauli)
        signs = context_cocycle(scen.complex, A)
        if signs != gamma:
            raise UsageError(f"the Pauli context signs differ from cochain {cochain!r}")
        return born_distribution(scen.complex, A, _state(state, A.qubits), gamma)
    if name == "uniform":
        return uniform(TwistingFunction(gamma))
    p = scen.distribution(name)
    if p.cocycle != gamma:
        raise UsageError(f"distribution {name!r} is not over cochain {cochain!r}")
    return p


def _var_name(P, k):
    x, g = P.variables[k]
    return f"{x.name}[{P.group.format_tuple(g)}]"


def _section_label(s) -> str:
    return " ".join(f"{e}={s.alpha.group.format(v)}" for e, v in s.alpha.as_dict().items())


# --- commands ---------------------------------------------------------------------

def cmd_check(args, scen: Scenario, out: Output) -> int:
    X = scen.complex
    ok = True
    rep = check_simplicial(X)
    out.say(f"complex {scen.name}: counts {X.counts()}, Euler characteristic {X.euler_characteristic()}, "
            f"simplicial identities {'ok' if rep else 'FAIL: ' + rep.message}")
    ok &= rep.ok
    rows = []
    names = args.cochains or list(scen.cochains)
    for cname in names:
        c = scen.cochain(cname)
        cyc = is_cocycle(c)
        row = [cname, c.degree, str(c.group), cyc]
        if c.degree == 2 and cyc:
            eta = TwistingFunction(c)
            tw = eta.check()
            bundle = TwistedBundle(eta).check()
            cls = classifying_map_check(eta)
            row += [tw.ok, bundle.ok, cls.ok, solve_trivialization(c) is not None]
            ok &= tw.ok and bundle.ok and cls.ok
        else:
            row += ["-", "-", "-", "-"]
            ok &= cyc
        rows.append(row)
    for dname, p in scen.distributions.items():
        rep = p.validate()
        out.say(f"distribution {dname}: {'valid' if rep else 'INVALID: ' + rep.message}")
        ok &= rep.ok
    out.table(["cochain", "degree", "group", "cocycle", "twisting", "bundle", "classifying", "trivial"], rows)
    return EXIT_OK if ok else EXIT_NO


def cmd_sections(args, scen, out) -> int:
    gamma = scen.cochain(args.cochain)
    n = count_sections(gamma)
    out.say(f"{n} sections")
    if n == 0:
        cert = trivialization_certificate(gamma)
        if cert is not None:
            weights = ", ".join(f"{s.name}:{w}" for s, w in cert.weights.items())
            out.say(f"obstruction mod {cert.modulus} (component {cert.component}): {weights}")
        return EXIT_NO
    if args.list:
        secs = sections(gamma, limit=args.limit)
        edges = [e.name for e in scen.complex.simplices(1)]
        out.table(["section"] + edges,
                  [[k] + [gamma.group.format(s.alpha(scen.complex.get(1, e))) for e in edges]
                   for k, s in enumerate(secs)])
    return EXIT_OK


def cmd_hrep(args, scen, out) -> int:
    gamma = scen.cochain(args.cochain)
    eta = TwistingFunction(gamma)
    pinned = None
    if args.pin:
        ctx = make_collapse(scen.complex, scen.subcomplex(args.pin), gamma)
        pinned = ctx.pinned_values()
    P = build_hrep(eta, pinned)
    out.say(f"{P.num_variables} variables, {len(P.rows)} equalities, affine dimension {P.affine_dimension()}")
    cols = ["label"] + [_var_name(P, k) for k in range(P.num_variables)] + ["rhs"]
    out.table(cols, [[r.label] + [r.coeffs.get(k, Fraction(0)) for k in range(P.num_variables)] + [r.rhs]
                     for r in P.rows])
    return EXIT_OK


def cmd_vertices(args, scen, out) -> int:
    gamma = scen.cochain(args.cochain)
    eta = TwistingFunction(gamma)
    pinned = None
    if args.pin:
        pinned = make_collapse(scen.complex, scen.subcomplex(args.pin), gamma).pinned_values()
    P = build_hrep(eta, pinned)
    V = enumerate_vertices(P, max_rays=args.max_rays)
    if V.status == "infeasible-equalities":
        out.say("the equality system is infeasible (empty polytope)")
        return EXIT_NO
    if V.status == "empty":
        out.say("the polytope is empty (equalities are feasible but not with non-negative weights)")
        return EXIT_NO
    out.say(f"{len(V)} vertices, dimension {V.dimension}" + (" (PARTIAL: ray cap reached)" if V.status == "partial" else ""))
    dists = V.distributions()
    orbit_of = {}
    if args.orbits:
        if not scen.symmetries:
            raise UsageError("scenario declares no symmetries")
        orbits = vertex_orbits(V, scen.symmetries)
        out.say(f"{len(orbits)} orbits of sizes {', '.join(str(len(o)) for o in orbits)}")
        orbit_of = {k: j for j, o in enumerate(orbits) for k in o}
    if args.brute_force:
        brute = brute_force_vertices(P)
        ours = sorted(tuple(round(float(a), 9) + 0.0 for a in v) for v in V.vertices)
        out.say(f"brute-force saturation search: {len(brute)} vertices, "
                f"{'agrees' if brute == ours else 'DISAGREES'}")
    cols = ["vertex"] + (["orbit"] if args.orbits else []) + ["deterministic"] + \
        [_var_name(P, k) for k in range(P.num_variables)]
    rows = []
    for k, (v, p) in enumerate(zip(V.vertices, dists)):
        rows.append([k] + ([orbit_of[k]] if args.orbits else []) + [p.is_deterministic()] + list(v))
    out.table(cols, rows)
    return EXIT_OK if V.status == "ok" else EXIT_NO


def cmd_contextual(args, scen, out) -> int:
    p = _distribution(scen, args.cochain, args.distribution, args.state, args.pauli)
    rep = p.validate()
    if not rep:
        raise UsageError(f"distribution is not valid: {rep.message}")
    secs = sections(p.cocycle, twisting=p.twisting) if count_sections(p.cocycle) else []
    cert = is_noncontextual(p, secs)
    if cert is not None:
        out.say(f"non-contextual: convex combination of {len(cert.weights)} deterministic distributions")
        out.table(["weight", "section"], [[w, _section_label(s)] for s, w in cert.items()])
        return EXIT_OK
    wit = contextuality_witness(p, secs)
    out.say(f"contextual: {wit.reason}")
    if wit.hyperplane is not None:
        w, c = wit.hyperplane
        out.say(f"hyperplane value on p: {wit.value(p)} (non-negative on all {len(secs)} deterministic points)")
        out.table(["variable", "weight"], [[f"{x.name}[{p.group.format_tuple(g)}]", wk]
                                           for wk, (x, g) in zip(w, wit.variables) if wk] + [["constant", c]])
    return EXIT_NO


def cmd_relative(args, scen, out) -> int:
    p = _distribution(scen, args.cochain, args.distribution, args.state, args.pauli)
    if args.search:
        seeds = [s.split(",") for s in args.subcomplex.split(";")]
        hit = relatively_deterministic(p, seeds, scen.symmetries)
        if hit is None:
            out.say("no relatively deterministic trivializing inclusion among the candidates")
            return EXIT_NO
        names, cert = hit
        out.say(f"deterministic along the inclusion of {{{', '.join(names)}}}")
        return EXIT_OK
    sub = scen.subcomplex(args.subcomplex)
    inc = scen.complex.inclusion_of(sub)
    cert = relative_noncontextual(p, inc)
    if cert is None:
        out.say("relatively contextual along the given inclusion")
        return EXIT_NO
    kind = "deterministic" if cert.is_point_mass() else "non-contextual"
    out.say(f"relatively {kind} along the given inclusion")
    out.table(["weight", "section"], [[w, _section_label(s)] for s, w in cert.items()])
    return EXIT_OK


def cmd_collapse(args, scen, out) -> int:
    gamma = scen.cochain(args.cochain)
    ctx = make_collapse(scen.complex, scen.subcomplex(args.subcomplex), gamma)
    Q = ctx.quotient
    q = Scenario(f"{scen.name}_collapsed", Q)
    q.cochains[args.cochain] = ctx.beta_bar
    text = serialize_scenario(q)
    nu = ", ".join(f"{e.name}={gamma.group.format(v)}" for e, v in sorted(ctx.nu.values.items())) or "0"
    header = f"# collapse of {{{args.subcomplex}}} with nu: {nu}\n"
    if out.fmt == "json-lines":
        out.say(header.strip("# \n"))
        out.table(["scenario"], [[text]])
    else:
        out.stream.write(header + text)
    return EXIT_OK


def cmd_convolve(args, scen, out) -> int:
    p = _distribution(scen, args.cochain1, args.dist1, args.state, args.pauli)
    q = _distribution(scen, args.cochain2, args.dist2, args.state, args.pauli)
    r = convolve(p, q)
    rep = r.validate()
    summed = ", ".join(f"{s.name}={r.group.format(v)}" for s, v in sorted(r.cocycle.values.items())) or "0"
    out.say(f"convolution over cocycle {{{summed}}}: {'valid' if rep else 'INVALID: ' + rep.message}")
    rows = [[x.name, r.group.format_tuple(g), w] for x in scen.complex.maximal_simplices() if x.dim
            for g, w in sorted(r.weights[x].items())]
    out.table(["simplex", "outcome", "weight"], rows)
    return EXIT_OK if rep else EXIT_NO


def cmd_quantum(args, scen, out) -> int:
    A = scen.pauli(args.pauli)
    X = scen.complex
    gamma = context_cocycle(X, A)
    signs = ", ".join(f"{t.name}={gamma(t)[0]}" for t in X.simplices(2))
    out.say(f"context signs: {signs}")
    for cname, c in scen.cochains.items():
        if c.degree == 2 and c.group == gamma.group:
            same = c == gamma
            coh = solve_trivialization(gamma - c) is not None
            out.say(f"  vs {cname}: {'equal' if same else ('cohomologous' if coh else 'different class')}")
    states = [args.state] if args.state else ["maximally-mixed"]

    def run(spec):
        p = born_distribution(X, A, _state(spec, A.qubits), gamma)
        return spec, p, p.validate()

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(run, states))
    ok = True
    rows = []
    for spec, p, rep in results:
        out.say(f"Born distribution for {spec}: {'valid' if rep else 'INVALID: ' + rep.message}"
                + ("" if getattr(p, "exact", True) else " (inexact)"))
        ok &= rep.ok
        rows += [[x.name, p.group.format_tuple(g), w] for x in X.maximal_simplices() if x.dim
                 for g, w in sorted(p.weights[x].items())]
    out.table(["simplex", "outcome", "probability"], rows)
    return EXIT_OK if ok else EXIT_NO


def cmd_equivariant(args, scen, out) -> int:
    p = _distribution(scen, args.cochain, args.distribution, args.state, args.pauli)
    pt = to_equivariant(p)
    eq = pt.is_equivariant()
    rep = pt.validate()
    back = from_equivariant(pt) == p
    out.say(f"equivariant form: {'equivariant' if eq else 'NOT equivariant'}, "
            f"{'compatible' if rep else 'INCOMPATIBLE: ' + rep.message}, round trip {'exact' if back else 'FAILS'}")
    ok = eq and rep.ok and back
    if args.distribution == "born":
        A = scen.pauli(args.pauli)
        qrep = equivariance_check(scen.complex, A, _state(args.state, A.qubits))
        out.say(f"phase action on projectors matches convolution shifts: {'yes' if qrep else qrep.message}")
        ok &= qrep.ok
    rows = [[x.name, p.group.format_tuple(k), p.group.format_tuple(h), w]
            for (k, x), dist in sorted(pt.weights.items(), key=lambda kv: (kv[0][1], kv[0][0]))
            if x.dim and x in scen.complex.maximal_simplices() for h, w in sorted(dist.items())]
    out.table(["simplex", "k", "outcome", "weight"], rows)
    return EXIT_OK if ok else EXIT_NO


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twistlab", description="Twisted simplicial distributions toolkit.")
    ap.add_argument("--version", action="version", version=f"twistlab {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["table", "csv", "json-lines"], default="table")
    common.add_argument("--jobs", type=int, default=1, help="worker bound for independent checks")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("scenario")
        p.set_defaults(func=fn)
        return p

    def dist_args(p):
        p.add_argument("cochain")
        p.add_argument("distribution", help="a named distribution, 'uniform', or 'born'")
        p.add_argument("--state", help="maximally-mixed | stabilizer:+XX,+ZZ | file:PATH")
        p.add_argument("--pauli", help="Pauli assignment name (default: the only one)")

    p = add("check", cmd_check, "validate the complex, cochains, bundles and distributions")
    p.add_argument("cochains", nargs="*")
    p = add("sections", cmd_sections, "count (and list) sections of a twisted bundle")
    p.add_argument("cochain")
    p.add_argument("--list", action="store_true")
    p.add_argument("--limit", type=int, default=1 << 16)
    p = add("hrep", cmd_hrep, "print the equality system of the distribution polytope")
    p.add_argument("cochain")
    p.add_argument("--pin", help="pin the restriction to a subcomplex to its deterministic point")
    p = add("vertices", cmd_vertices, "enumerate vertices by double description")
    p.add_argument("cochain")
    p.add_argument("--pin")
    p.add_argument("--orbits", action="store_true", help="group vertices by declared symmetries")
    p.add_argument("--brute-force", action="store_true", help="cross-check with a float saturation search")
    p.add_argument("--max-rays", type=int, default=200_000)
    p = add("contextual", cmd_contextual, "decide non-contextuality by exact LP")
    dist_args(p)
    p = add("relative-contextual", cmd_relative, "non-contextuality along a trivializing inclusion")
    dist_args(p)
    p.add_argument("subcomplex", help="comma-separated simplex names")
    p.add_argument("--search", action="store_true",
                   help="treat the subcomplex (';'-separated seeds) up to declared symmetries")
    p = add("collapse", cmd_collapse, "collapse a subcomplex and print the quotient scenario")
    p.add_argument("subcomplex")
    p.add_argument("cochain")
    p = add("convolve", cmd_convolve, "convolve two distributions")
    p.add_argument("cochain1")
    p.add_argument("dist1")
    p.add_argument("cochain2")
    p.add_argument("dist2")
    p.add_argument("--state")
    p.add_argument("--pauli")
    p = add("quantum", cmd_quantum, "context signs and Born distributions of a Pauli assignment")
    p.add_argument("--pauli")
    p.add_argument("--state")
    p = add("equivariant", cmd_equivariant, "equivariant form of a distribution and its round trip")
    dist_args(p)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    out = Output(args.format, args.command)
    try:
        return _run(args, out)
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


def _run(args, out) -> int:
    try:
        scen = load_scenario(args.scenario)
        code = args.func(args, scen, out)
    except (UsageError, ScenarioError, CochainError, DistributionError, QuantumError, CollapseError,
            NotTrivializingError, SymmetryError, SimplicialError, CapabilityError, CapacityError,
            GroupError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"twistlab: error: {msg}", file=sys.stderr)
        return EXIT_USAGE
    out.render()
    sys.stdout.flush()
    return code

if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
