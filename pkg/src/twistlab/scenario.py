"""Reader and writer for the line-oriented scenario format.

A scenario file lists a simplicial set by its non-degenerate simplices::

    [scenario square]
    [vertices]
    P A B
    [edges]          # name src dst   (src = d1, dst = d0)
    u A P
    [triangles]      # name d0 d1 d2
    sigma f h u
    [tetrahedra]     # name d0 d1 d2 d3
    [cochain beta deg=2 group=Z2]
    sigma=1
    [pauli mermin qubits=2]
    f=+ZX
    [distribution p over square:beta]
    sigma 0,1 1/4
    [symmetries]
    swap perm=u:h,h:u flip=u,v

Degenerate faces are written in normal form, e.g. ``s0(P)`` or ``s1s0(P)``.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

from .bundle import TwistingFunction
from .cochain import Cochain
from .dist import DistributionError, TwistedDistribution
from .geometry import EdgeSymmetry
from .groups import FiniteAbelianGroup, GroupError
from .quantum import PauliAssignment, QuantumError
from .simpset import EZForm, SimplexId, SimplicialError, SimplicialSet, check_simplicial

SECTION_DIMS = {"vertices": 0, "edges": 1, "triangles": 2, "tetrahedra": 3}
DIM_SECTIONS = {v: k for k, v in SECTION_DIMS.items()}


class ScenarioError(ValueError):
    def __init__(self, message, line=None, column=None, source=None):
        self.line, self.column, self.source = line, column, source
        where = ""
        if line is not None:
            where = f"{source or '<scenario>'}:{line}"
            if column is not None:
                where += f":{column}"
            where += ": "
        super().__init__(where + message)


@dataclass
class Scenario:
    name: str
    complex: SimplicialSet
    cochains: dict = field(default_factory=dict)
    paulis: dict = field(default_factory=dict)
    distributions: dict = field(default_factory=dict)
    symmetries: list = field(default_factory=list)
    source: str | None = None
    digest: str = ""

    def cochain(self, name: str) -> Cochain:
        if name not in self.cochains:
            raise ScenarioError(f"unknown cochain {name!r} (known: {', '.join(self.cochains) or 'none'})")
        return self.cochains[name]

    def pauli(self, name: str | None = None) -> PauliAssignment:
        if name is None:
            if len(self.paulis) != 1:
                raise ScenarioError("scenario does not have exactly one Pauli assignment; name one")
            return next(iter(self.paulis.values()))
        if name not in self.paulis:
            raise ScenarioError(f"unknown Pauli assignment {name!r}")
        return self.paulis[name]

    def distribution(self, name: str) -> TwistedDistribution:
        if name not in self.distributions:
            raise ScenarioError(f"unknown distribution {name!r}")
        return self.distributions[name]

    def subcomplex(self, spec: str) -> SimplicialSet:
        """A face-closed subcomplex from comma-separated simplex names."""
        names = [s.strip() for s in re.split(r"[,\s]+", spec.strip("{} ")) if s.strip()]
        try:
            return self.complex.subcomplex(names)
        except (KeyError, SimplicialError) as exc:
            raise ScenarioError(f"bad subcomplex {spec!r}: {exc}") from None


_FACE_RE = re.compile(r"((?:s\d+)+)\((\S+)\)")


def _header(line: str):
    m = re.fullmatch(r"\[\s*([a-z]+)\s*(.*?)\s*\]", line)
    if not m:
        return None
    return m.group(1), m.group(2)


def _options(text: str):
    words, opts = [], {}
    for tok in text.split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            opts[k] = v
        else:
            words.append(tok)
    return words, opts


def parse_scenario(text: str, source: str | None = None) -> Scenario:
    blocks = []
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            head = _header(line)
            if head is None:
                raise ScenarioError(f"malformed section header {line!r}", lineno, 1, source)
            current = (head[0], head[1], lineno, [])
            blocks.append(current)
        else:
            if current is None:
                raise ScenarioError("content before the first section header", lineno, 1, source)
            col = len(raw) - len(raw.lstrip()) + 1
            current[3].append((lineno, col, line))

    def err(msg, lineno=None, col=None):
        return ScenarioError(msg, lineno, col, source)

    known = set(SECTION_DIMS) | {"scenario", "cochain", "pauli", "distribution", "symmetries"}
    for kind, _, lineno, _ in blocks:
        if kind not in known:
            raise err(f"unknown section [{kind}]", lineno, 1)
    if not any(b[0] == "vertices" for b in blocks):
        raise err("no [vertices] section")

    name = Path(source).stem if source else "scenario"
    for kind, rest, lineno, _ in blocks:
        if kind == "scenario":
            if not rest:
                raise err("[scenario] needs a name", lineno)
            name = rest.split()[0]

    # --- complex
    simplices = {d: [] for d in range(4)}
    where = {}
    raw_faces = {}
    for kind, _, _, lines in blocks:
        if kind not in SECTION_DIMS:
            continue
        d = SECTION_DIMS[kind]
        for lineno, col, line in lines:
            toks = line.split()
            if d == 0:
                entries = [(t, ()) for t in toks]
            elif d == 1:
                if len(toks) != 3:
                    raise err("an edge line reads: name src dst", lineno, col)
                entries = [(toks[0], (toks[2], toks[1]))]
            else:
                if len(toks) != d + 2:
                    raise err(f"a {kind[:-1]} line reads: name d0 ... d{d}", lineno, col)
                entries = [(toks[0], tuple(toks[1:]))]
            for nm, fs in entries:
                if nm in where.get(d, {}):
                    raise err(f"duplicate {DIM_SECTIONS[d][:-1]} {nm!r}", lineno, col)
                where.setdefault(d, {})[nm] = (lineno, col)
                simplices[d].append(nm)
                if d:
                    raw_faces[SimplexId(d, nm)] = fs
    top = max((d for d in simplices if simplices[d]), default=0)

    def face_ref(text, dim, lineno, col):
        m = _FACE_RE.fullmatch(text)
        if m:
            idx = [int(i) for i in re.findall(r"s(\d+)", m.group(1))]
            degs = tuple(reversed(idx))
            base = m.group(2)
            bdim = dim - len(degs)
        else:
            degs, base, bdim = (), text, dim
        if base not in where.get(bdim, {}):
            raise err(f"dangling reference: no {bdim}-simplex named {base!r}", lineno, col)
        try:
            return EZForm(SimplexId(bdim, base), degs)
        except SimplicialError as exc:
            raise err(f"face {text!r} is not in normal form ({exc})", lineno, col) from None

    faces = {}
    for sid, fs in raw_faces.items():
        lineno, col = where[sid.dim][sid.name]
        faces[sid] = tuple(face_ref(f, sid.dim - 1, lineno, col) for f in fs)
    try:
        X = SimplicialSet({d: simplices[d] for d in range(top + 1)}, faces, name=name)
    except SimplicialError as exc:
        raise err(str(exc)) from None
    rep = check_simplicial(X)
    if not rep:
        raise err(f"simplicial identity violated: {rep.message}")
    scen = Scenario(name, X, source=source, digest=hashlib.sha256(text.encode()).hexdigest())

    # --- cochains and Pauli assignments
    for kind, rest, lineno, lines in blocks:
        if kind == "cochain":
            words, opts = _options(rest)
            if len(words) != 1 or "deg" not in opts or "group" not in opts:
                raise err("cochain header reads: [cochain name deg=k group=G]", lineno)
            try:
                H = FiniteAbelianGroup.parse(opts["group"])
                deg = int(opts["deg"])
            except (GroupError, ValueError) as exc:
                raise err(str(exc), lineno) from None
            values = {}
            for ln, col, line in lines:
                for tok in line.split():
                    if "=" not in tok:
                        raise err(f"expected simplex=value, got {tok!r}", ln, col)
                    k, v = tok.split("=", 1)
                    if k not in where.get(deg, {}):
                        raise err(f"dangling reference: no {deg}-simplex named {k!r}", ln, col)
                    try:
                        values[k] = H.element(v)
                    except (GroupError, ValueError) as exc:
                        raise err(str(exc), ln, col) from None
            scen.cochains[words[0]] = Cochain(X, deg, H, values, name=words[0])
        elif kind == "pauli":
            words, opts = _options(rest)
            if len(words) != 1 or "qubits" not in opts:
                raise err("pauli header reads: [pauli name qubits=n]", lineno)
            entries = {}
            for ln, col, line in lines:
                for tok in line.split():
                    k, _, v = tok.partition("=")
                    if k not in where.get(1, {}):
                        raise err(f"dangling reference: no edge named {k!r}", ln, col)
                    entries[k] = v
            try:
                scen.paulis[words[0]] = PauliAssignment.parse(int(opts["qubits"]), entries, words[0])
            except (QuantumError, ValueError) as exc:
                raise err(str(exc), lineno) from None
        elif kind == "symmetries":
            for ln, col, line in lines:
                words, opts = _options(line)
                if len(words) != 1 or set(opts) - {"perm", "flip"}:
                    raise err("symmetry line reads: name perm=a:b,... flip=e,...", ln, col)
                perm = {}
                for pair in filter(None, opts.get("perm", "").split(",")):
                    a, _, b = pair.partition(":")
                    for e in (a, b):
                        if e not in where.get(1, {}):
                            raise err(f"dangling reference: no edge named {e!r}", ln, col)
                    perm[a] = b
                flips = [e for e in opts.get("flip", "").split(",") if e]
                for e in flips:
                    if e not in where.get(1, {}):
                        raise err(f"dangling reference: no edge named {e!r}", ln, col)
                scen.symmetries.append(EdgeSymmetry.make(words[0], perm, flips))

    # --- distributions
    for kind, rest, lineno, lines in blocks:
        if kind != "distribution":
            continue
        m = re.fullmatch(r"(\S+)\s+over\s+(\S+):(\S+)", rest)
        if not m:
            raise err("distribution header reads: [distribution name over scenario:cochain]", lineno)
        dname, sname, cname = m.groups()
        if sname != name:
            raise err(f"dangling reference: scenario {sname!r} (this file is {name!r})", lineno)
        if cname not in scen.cochains:
            raise err(f"dangling reference: no cochain named {cname!r}", lineno)
        gamma = scen.cochains[cname]
        H = gamma.group
        given = {}
        for ln, col, line in lines:
            toks = line.split()
            if len(toks) != 3:
                raise err("a distribution line reads: simplex outcome weight", ln, col)
            try:
                sid = X.find(toks[0])
            except KeyError as exc:
                raise err(f"dangling reference: {exc}", ln, col) from None
            try:
                g = H.parse_tuple(toks[1])
                w = Fraction(toks[2])
            except (GroupError, ValueError, ZeroDivisionError) as exc:
                raise err(f"bad entry: {exc}", ln, col) from None
            if len(g) != sid.dim:
                raise err(f"outcome {toks[1]!r} has the wrong length for {sid.name}", ln, col)
            if w < 0:
                raise err("negative weight", ln, col)
            given.setdefault(sid, {})
            given[sid][g] = given[sid].get(g, 0) + w
        for sid, dist in given.items():
            if sum(dist.values()) != 1:
                raise err(f"weights on {sid.name} sum to {sum(dist.values())}, not 1", lineno)
        eta = TwistingFunction(gamma)
        try:
            top = {x: given[x] for x in X.maximal_simplices() if x.dim > 0}
            top.update({x: {(): 1} for x in X.maximal_simplices() if x.dim == 0})
            missing = [x.name for x in X.maximal_simplices() if x.dim > 0 and x not in given]
            if missing:
                raise err(f"no weights for {', '.join(missing)}", lineno)
            p = TwistedDistribution.from_top(eta, top, name=dname)
        except DistributionError as exc:
            raise err(str(exc), lineno) from None
        for sid, dist in given.items():
            if p.weights[sid] != {k: v for k, v in dist.items() if v}:
                raise err(f"weights on {sid.name} disagree with the marginals of its cofaces", lineno)
        rep = p.validate()
        if not rep:
            raise err(f"distribution {dname} is not compatible: {rep.message}", lineno)
        scen.distributions[dname] = p
    return scen


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text, source=str(path))


def serialize_scenario(scen: Scenario) -> str:
    X = scen.complex
    H_out = [f"[scenario {scen.name}]", "[vertices]", " ".join(s.name for s in X.simplices(0))]
    for d in range(1, X.max_dim + 1):
        if not X.simplices(d):
            continue
        H_out.append(f"[{DIM_SECTIONS[d]}]")
        for s in X.simplices(d):
            fs = [str(f) for f in X.face_table(s)]
            if d == 1:
                H_out.append(f"{s.name} {fs[1]} {fs[0]}")
            else:
                H_out.append(" ".join([s.name] + fs))
    for cname, c in scen.cochains.items():
        H_out.append(f"[cochain {cname} deg={c.degree} group={c.group}]")
        for sid in X.simplices(c.degree):
            if c(sid) != c.group.zero:
                H_out.append(f"{sid.name}={c.group.format(c(sid))}")
    for pname, A in scen.paulis.items():
        H_out.append(f"[pauli {pname} qubits={A.qubits}]")
        for e in X.simplices(1):
            if e.name in A.words:
                H_out.append(f"{e.name}={A.text(e.name)}")
    if scen.symmetries:
        H_out.append("[symmetries]")
        for s in scen.symmetries:
            line = s.name
            if s.perm:
                line += " perm=" + ",".join(f"{a}:{b}" for a, b in s.perm)
            if s.flips:
                line += " flip=" + ",".join(sorted(s.flips))
            H_out.append(line)
    for dname, p in scen.distributions.items():
        cname = next((k for k, c in scen.cochains.items() if c == p.cocycle), None)
        if cname is None:
            raise ScenarioError(f"distribution {dname} is over a cochain the scenario does not name")
        H_out.append(f"[distribution {dname} over {scen.name}:{cname}]")
        for x in X.maximal_simplices():
            if x.dim == 0:
                continue
            for g, w in sorted(p.weights[x].items()):
                H_out.append(f"{x.name} {p.group.format_tuple(g)} {w}")
    return "\n".join(H_out) + "\n"


def scenarios_equal(a: Scenario, b: Scenario) -> bool:
    """Semantic equality: same complex, cochain values, assignments, symmetries and weights."""
    X, Y = a.complex, b.complex
    if X.counts() != Y.counts() or a.name != b.name:
        return False
    for sid in X.all_ids():
        if sid not in Y:
            return False
        if sid.dim and X.face_table(sid) != Y.face_table(sid):
            return False
    if set(a.cochains) != set(b.cochains):
        return False
    for k, c in a.cochains.items():
        d = b.cochains[k]
        if c.degree != d.degree or c.group != d.group or c.as_dict() != d.as_dict():
            return False
    if {k: v.words for k, v in a.paulis.items()} != {k: v.words for k, v in b.paulis.items()}:
        return False
    if a.symmetries != b.symmetries or set(a.distributions) != set(b.distributions):
        return False
    for k, p in a.distributions.items():
        q = b.distributions[k]
        if {s.name: v for s, v in p.weights.items()} != {s.name: v for s, v in q.weights.items()}:
            return False
    return True


def mermin_path() -> Path:
    return Path(str(resources.files("twistlab.data").joinpath("mermin.scn")))


def load_mermin() -> Scenario:
    return load_scenario(mermin_path())
