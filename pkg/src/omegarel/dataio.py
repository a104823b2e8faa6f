"""File formats: weighted tables, diagram specs, network JSON, queries and datasets."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .diagram import Arrow, Degree, MultiDiagram, MultiGraph, lambda_description, vague_limit
from .errors import ColumnMismatch, DomainMismatch, NotAHomomorphism, OmegaRelError, SpecError
from .lattice import Flavor, Lattice, format_real, load_finite_lattice, make_flavor, make_lattice
from .lnn import LnnNetwork, Neuron
from .omega_object import OmegaObject
from .relation import Attribute, Relation, prime, rename

WEIGHT_COLUMN = "omega"


# ---------------------------------------------------------------------------
# values and weighted tables


def parse_value(text: str):
    """Domain value from text: int, then float, then the stripped string."""
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        value = float(text)
    except ValueError:
        return text
    return value if math.isfinite(value) else text


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_real(value)
    if isinstance(value, tuple):
        return ";".join(format_value(v) for v in value)
    return str(value)


def _sort_key(value):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return (0, float(value), "")
    return (1, 0.0, str(value))


def _rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ColumnMismatch(f"{path}: empty table (a header row is required)")
    header = [h.strip() for h in rows[0]]
    if not header or header[-1] != WEIGHT_COLUMN:
        raise ColumnMismatch(f"{path}: the last column must be {WEIGHT_COLUMN!r}")
    if len(set(header)) != len(header):
        raise ColumnMismatch(f"{path}: duplicate column names")
    body = rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ColumnMismatch(f"{path}:{i}: expected {len(header)} cells, got {len(r)}")
    return header[:-1], body


def _lookup(attr: Attribute, text: str) -> int:
    try:
        return attr.index(parse_value(text))
    except DomainMismatch:
        # a string domain value that happens to look like a number
        if text.strip() in attr._index:
            return attr._index[text.strip()]
        raise


def read_table(path, lattice: Lattice, attributes: Sequence[Attribute] | None = None,
               sources: Sequence[str] = ()) -> Relation:
    """Read a weighted table. Without ``attributes`` the domains are the values seen, sorted."""
    names, body = _rows(path)
    if attributes is None:
        seen = [dict.fromkeys(parse_value(r[i]) for r in body) for i in range(len(names))]
        for n, vals in zip(names, seen):
            if not vals:
                raise ColumnMismatch(f"{path}: column {n!r} has no values to infer a domain from")
        attrs = [Attribute(n, tuple(sorted(vals, key=_sort_key))) for n, vals in zip(names, seen)]
    else:
        by_name = {a.name: a for a in attributes}
        if set(by_name) != set(names):
            raise ColumnMismatch(
                f"{path}: columns ({', '.join(names)}) do not match ({', '.join(by_name)})")
        attrs = [by_name[n] for n in names]
    unknown = set(sources) - set(names)
    if unknown:
        raise ColumnMismatch(f"{path}: unknown source column(s) {', '.join(sorted(unknown))}")
    entries = {}
    for line, r in enumerate(body, start=2):
        try:
            key = tuple(_lookup(a, c) for a, c in zip(attrs, r[:-1]))
        except DomainMismatch as exc:
            raise DomainMismatch(f"{path}:{line}: {exc}") from None
        if key in entries:
            raise ColumnMismatch(f"{path}:{line}: duplicate tuple")
        entries[key] = lattice.parse(r[-1])
    arr = lattice.full(tuple(a.size for a in attrs), lattice.bottom)
    for key, w in entries.items():
        arr[key] = w
    rel = Relation((), attrs, arr, lattice)
    if sources:
        src = [a for a in attrs if a.name in sources]
        tgt = [a for a in attrs if a.name not in sources]
        rel = Relation(src, tgt, rel.aligned([a.name for a in src + tgt]), lattice)
    return rel


def table_text(rel: Relation) -> str:
    """CSV text of a relation: rows sorted by domain position, ⊥ rows left out."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rel.names) + [WEIGHT_COLUMN])
    lat = rel.lattice
    for values, w in rel.items():
        writer.writerow([format_value(v) for v in values] + [lat.format(w)])
    return buf.getvalue()


def write_table(rel: Relation, path) -> None:
    Path(path).write_text(table_text(rel), encoding="utf-8")


def read_similarity(path, attrs: Sequence[Attribute], lattice: Lattice) -> Relation:
    """Similarity table with columns ``<attr>_1 ... <attr>_2 ... omega``."""
    attrs = tuple(attrs)
    cols = [Attribute(a.name + "_1", a.domain) for a in attrs] + [Attribute(a.name + "_2", a.domain) for a in attrs]
    rel = read_table(path, lattice, cols)
    arr = rel.aligned([c.name for c in cols])
    return Relation(attrs, prime(attrs), arr, lattice)


def similarity_text(sim: Relation) -> str:
    mapping = {a.name: a.name + "_1" for a in sim.sources}
    mapping.update({t.name: s.name + "_2" for s, t in zip(sim.sources, sim.targets)})
    return table_text(rename(sim, mapping))


# ---------------------------------------------------------------------------
# builtin arrows


def gaussian_sum(sources: Sequence[Attribute], target: Attribute, lattice: Lattice) -> Relation:
    """Weight exp(-(w - Σ sources)² / 2) on the grid."""
    grids = np.meshgrid(*[np.asarray(a.domain, dtype=float) for a in sources], indexing="ij")
    total = sum(grids) if grids else np.zeros(())
    w = np.asarray(target.domain, dtype=float)
    arr = np.exp(-((w - total[..., None]) ** 2) / 2.0)
    return Relation(tuple(sources), (target,), arr, lattice)


def equality(source: Attribute, target: Attribute, lattice: Lattice) -> Relation:
    """Crisp equality of values across two attributes."""
    arr = lattice.full((source.size, target.size), lattice.bottom)
    for i, v in enumerate(source.domain):
        try:
            arr[i, target.index(v)] = lattice.top
        except DomainMismatch:
            pass
    return Relation((source,), (target,), arr, lattice)


BUILTINS = ("gaussian-sum", "equality")


# ---------------------------------------------------------------------------
# diagram specs


@dataclass
class DiagramSpec:
    path: Path | None
    lattice: str = ""
    flavor: tuple[str, str] = ("tensor", "join")
    allow_nondistributive: bool = False
    domains: dict[str, tuple] = field(default_factory=dict)
    vertices: list[tuple[str, str, str | None, str | None]] = field(default_factory=list)
    arrows: list[tuple[str, tuple[str, ...], tuple[str, ...], str, str]] = field(default_factory=list)
    sources: tuple[str, ...] | None = None


_NAME = r"[^\s,:=#{}()]+"
_RE_DOMAIN = re.compile(rf"^domain\s+({_NAME})\s*=\s*(.+)$")
_RE_GRID = re.compile(r"^grid\(\s*([^,]+),\s*([^,]+),\s*([^,]+)\)$")
_RE_VERTEX = re.compile(rf"^vertex\s+({_NAME})\s*:\s*({_NAME})\s*(.*)$")
_RE_ARROW = re.compile(rf"^arrow\s+({_NAME})\s*:\s*(.*?)\s*->\s*(.*?)\s+((?:table|builtin)=\S+)\s*$")


def _options(text: str, allowed: set[str], line: int, path) -> dict[str, str]:
    out = {}
    for tok in text.split():
        if tok in ("top", "identity"):
            key = "dist" if tok == "top" else "sim"
            out[key] = tok
            continue
        if "=" not in tok:
            raise SpecError(f"cannot read option {tok!r}", line, path)
        k, _, v = tok.partition("=")
        if k not in allowed:
            raise SpecError(f"unknown option {k!r}", line, path)
        out[k] = v
    return out


def grid_values(lo: float, hi: float, step: float) -> tuple[float, ...]:
    if step <= 0:
        raise ValueError("grid step must be positive")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    if count < 1:
        raise ValueError("empty grid")
    return tuple(float(np.round(lo + k * step, 12)) for k in range(count))


def _vertex_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def read_spec(path) -> DiagramSpec:
    """Parse a diagram spec file into its statements (no tables are loaded yet)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    spec = DiagramSpec(path)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip() if not raw.lstrip().startswith("#") else ""
        if not line:
            continue
        word = line.split()[0]
        rest = line[len(word):].strip()
        if word == "lattice":
            if not rest:
                raise SpecError("lattice needs a kind", lineno, path)
            spec.lattice = rest
        elif word == "flavor":
            fields = dict(tok.partition("=")[::2] for tok in rest.replace(",", " ").split())
            unknown = set(fields) - {"times", "plus", "nondistributive"}
            if unknown:
                raise SpecError(f"unknown flavor field(s) {', '.join(sorted(unknown))}", lineno, path)
            spec.flavor = (fields.get("times", "tensor"), fields.get("plus", "join"))
            spec.allow_nondistributive = fields.get("nondistributive", "reject") == "allow"
        elif word == "domain":
            m = _RE_DOMAIN.match(line)
            if not m:
                raise SpecError("expected 'domain <Name> = {..}' or '= grid(lo,hi,step)'", lineno, path)
            name, body = m.group(1), m.group(2).strip()
            if name in spec.domains:
                raise SpecError(f"domain {name!r} declared twice", lineno, path)
            g = _RE_GRID.match(body)
            try:
                if g:
                    values = grid_values(*(float(x) for x in g.groups()))
                elif body.startswith("{") and body.endswith("}"):
                    values = tuple(parse_value(v) for v in body[1:-1].split(",") if v.strip())
                else:
                    raise ValueError("expected {..} or grid(lo,hi,step)")
                Attribute(name, values)
            except ValueError as exc:
                raise SpecError(f"bad domain {name!r}: {exc}", lineno, path) from None
            spec.domains[name] = values
        elif word == "vertex":
            m = _RE_VERTEX.match(line)
            if not m:
                raise SpecError("expected 'vertex <V> : <Domain> [dist=..|top] [sim=..|identity]'", lineno, path)
            name, dom, opts = m.groups()
            if any(v[0] == name for v in spec.vertices):
                raise SpecError(f"vertex {name!r} declared twice", lineno, path)
            if dom not in spec.domains:
                raise SpecError(f"vertex {name!r} uses undeclared domain {dom!r}", lineno, path)
            o = _options(opts, {"dist", "sim"}, lineno, path)
            spec.vertices.append((name, dom, o.get("dist"), o.get("sim")))
        elif word == "arrow":
            m = _RE_ARROW.match(line)
            if not m:
                raise SpecError("expected 'arrow <name> : V1,V2 -> V3 table=<file>|builtin=<name>'", lineno, path)
            name, src, tgt, ref = m.groups()
            if any(a[0] == name for a in spec.arrows):
                raise SpecError(f"arrow {name!r} declared twice", lineno, path)
            known = {v[0] for v in spec.vertices}
            for v in _vertex_list(src) + _vertex_list(tgt):
                if v not in known:
                    raise SpecError(f"arrow {name!r} references undeclared vertex {v!r}", lineno, path)
            kind, _, target = ref.partition("=")
            if kind == "builtin" and target not in BUILTINS:
                raise SpecError(f"unknown builtin {target!r}", lineno, path)
            spec.arrows.append((name, _vertex_list(src), _vertex_list(tgt), kind, target))
        elif word == "sources":
            known = {v[0] for v in spec.vertices}
            vs = _vertex_list(rest)
            for v in vs:
                if v not in known:
                    raise SpecError(f"sources references undeclared vertex {v!r}", lineno, path)
            spec.sources = vs
        else:
            raise SpecError(f"unknown statement {word!r}", lineno, path)
    if not spec.lattice:
        raise SpecError("missing 'lattice' statement", None, path)
    return spec


def spec_lattice(spec: DiagramSpec) -> Lattice:
    text = spec.lattice
    if text.startswith("file="):
        base = spec.path.parent if spec.path else Path(".")
        return load_finite_lattice(base / text[len("file="):])
    return make_lattice(text)


def build_diagram(spec: DiagramSpec, flavor: Flavor | None = None) -> MultiDiagram:
    base = spec.path.parent if spec.path else Path(".")
    if flavor is None:
        lattice = spec_lattice(spec)
        flavor = make_flavor(lattice, *spec.flavor, allow_nondistributive=spec.allow_nondistributive)
    lattice = flavor.lattice
    attrs = {name: Attribute(name, spec.domains[dom]) for name, dom, _, _ in spec.vertices}
    objects = {}
    for name, _, dist, sim in spec.vertices:
        a = attrs[name]
        d = None if dist in (None, "top") else read_table(base / dist, lattice, [a])
        s = None if sim in (None, "identity") else read_similarity(base / sim, [a], lattice)
        objects[name] = OmegaObject.make([a], lattice, d, s)
    arrows = {}
    for name, src, tgt, kind, ref in spec.arrows:
        sa = [attrs[v] for v in src]
        ta = [attrs[v] for v in tgt]
        if kind == "table":
            rel = read_table(base / ref, lattice, sa + ta, sources=src)
        elif ref == "gaussian-sum":
            if len(ta) != 1:
                raise SpecError(f"builtin gaussian-sum on arrow {name!r} needs one target", None, spec.path)
            rel = gaussian_sum(sa, ta[0], lattice)
        else:
            if len(sa) != 1 or len(ta) != 1:
                raise SpecError(f"builtin equality on arrow {name!r} needs one source and one target",
                                None, spec.path)
            rel = equality(sa[0], ta[0], lattice)
        arrows[name] = (src, tgt, rel)
    return MultiDiagram.build(flavor, objects, arrows, sources=spec.sources)


def parse_spec(path, flavor_override: tuple[str, str] | None = None,
               allow_nondistributive: bool = False) -> tuple[DiagramSpec, MultiDiagram]:
    spec = read_spec(path)
    if flavor_override is not None:
        spec.flavor = flavor_override
    spec.allow_nondistributive = spec.allow_nondistributive or allow_nondistributive
    return spec, build_diagram(spec)


# ---------------------------------------------------------------------------
# networks


def load_network(path) -> LnnNetwork:
    """JSON with ``wires`` (objects with ``id`` and ``role``) and ``neurons``
    (objects with ``inputs``, ``weights``, ``bias``, ``output``)."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        wires = {w["id"]: w["role"] for w in data["wires"]}
        neurons = [Neuron(tuple(n["inputs"]), tuple(n["weights"]), n["bias"], n["output"])
                   for n in data["neurons"]]
    except (KeyError, TypeError) as exc:
        raise ColumnMismatch(f"{path}: malformed network file ({exc})") from None
    return LnnNetwork(wires, neurons)


def network_json(net: LnnNetwork) -> str:
    data = {
        "wires": [{"id": w, "role": r} for w, r in net.wires.items()],
        "neurons": [{"inputs": list(n.inputs), "weights": list(n.weights), "bias": n.bias, "output": n.output}
                    for n in net.neurons],
    }
    return json.dumps(data, indent=2)


# ---------------------------------------------------------------------------
# queries


@dataclass
class QueryMap:
    """A graph homomorphism from a query graph into a diagram's graph."""

    graph: MultiGraph
    vertex_map: dict[str, str]
    arrow_map: dict[str, str]

    def validate(self, target: MultiGraph) -> None:
        for q in self.graph.vertices:
            if self.vertex_map.get(q) not in target.vertices:
                raise NotAHomomorphism(f"query vertex {q!r} maps to unknown vertex {self.vertex_map.get(q)!r}")
        for a in self.graph.arrows:
            name = self.arrow_map.get(a.label)
            try:
                image = target.arrow(name)
            except KeyError:
                raise NotAHomomorphism(f"query arrow {a.label!r} maps to unknown arrow {name!r}", a.label) from None
            for side in ("sources", "targets"):
                ours = [self.vertex_map[v] for v in getattr(a, side)]
                theirs = getattr(image, side)
                if len(ours) != len(theirs) or set(ours) != set(theirs):
                    raise NotAHomomorphism(
                        f"query arrow {a.label!r}: {side} map to ({', '.join(ours)}) but arrow {name!r} "
                        f"has ({', '.join(theirs)})", a.label)


def identity_query(graph: MultiGraph) -> QueryMap:
    return QueryMap(graph, {v: v for v in graph.vertices}, {a.label: a.label for a in graph.arrows})


def read_query(path) -> QueryMap:
    """Lines ``vertex q = V`` and ``arrow qa : q1,q2 -> q3 = f``."""
    path = Path(path)
    vertex_map, arrow_map, arrows = {}, {}, []
    re_v = re.compile(rf"^vertex\s+({_NAME})\s*=\s*({_NAME})$")
    re_a = re.compile(rf"^arrow\s+({_NAME})\s*:\s*(.*?)\s*->\s*(.*?)\s*=\s*({_NAME})$")
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := re_v.match(line):
            vertex_map[m.group(1)] = m.group(2)
        elif m := re_a.match(line):
            label, src, tgt, image = m.groups()
            for v in _vertex_list(src) + _vertex_list(tgt):
                if v not in vertex_map:
                    raise SpecError(f"query arrow {label!r} uses undeclared vertex {v!r}", lineno, path)
            arrows.append(Arrow(label, _vertex_list(src), _vertex_list(tgt)))
            arrow_map[label] = image
        else:
            raise SpecError("expected 'vertex q = V' or 'arrow a : q1 -> q2 = f'", lineno, path)
    return QueryMap(MultiGraph(list(vertex_map), arrows), vertex_map, arrow_map)


def _query_name(q: str, v: str, attr: Attribute, single: bool) -> str:
    if q == v:
        return attr.name
    return q if single else f"{q}.{attr.name}"


def answer_query(D: MultiDiagram, Q: QueryMap) -> Relation:
    """Vague limit of the diagram pulled back along the query."""
    Q.validate(D.graph)
    names: dict[str, dict[str, str]] = {}
    objects = {}
    for q in Q.graph.vertices:
        v = Q.vertex_map[q]
        carrier = D.carrier(v)
        names[q] = {a.name: _query_name(q, v, a, len(carrier) == 1) for a in carrier}
        objects[q] = D.objects[v].renamed(names[q])
    relations = {}
    for a in Q.graph.arrows:
        mapping = {}
        for q in a.endpoints:
            mapping.update(names[q])
        rel = D.relations[Q.arrow_map[a.label]]
        relations[a.label] = rename(rel, {k: v for k, v in mapping.items() if k != v and k in rel.names})
    pulled = MultiDiagram(Q.graph, objects, relations, D.flavor)
    return vague_limit(pulled)


# ---------------------------------------------------------------------------
# datasets


@dataclass
class Dataset:
    dist: Relation
    similarity: Relation | None = None

    @property
    def columns(self) -> tuple[str, ...]:
        return self.dist.names


def load_dataset(path, lattice: Lattice, similarity=None) -> Dataset:
    dist = read_table(path, lattice)
    sim = None
    if similarity is not None:
        sim = read_similarity(similarity, dist.attributes, lattice)
    return Dataset(dist, sim)


def describe(D: MultiDiagram, data: Dataset, mapping: Mapping[str, str], threshold=None) -> Degree:
    """λ-description degree of a dataset by a diagram, using the dataset's own similarity."""
    return lambda_description(D, data.dist, mapping, data.similarity, threshold)


def parse_mapping(items: Sequence[str]) -> dict[str, str]:
    out = {}
    for item in items:
        for part in item.split(","):
            if not part.strip():
                continue
            col, sep, dest = part.partition("=")
            if not sep or not col.strip() or not dest.strip():
                raise ColumnMismatch(f"mapping entry {part!r} must look like column=vertex")
            out[col.strip()] = dest.strip()
    return out


def tuples_of(rel: Relation) -> list[tuple]:
    return list(itertools.product(*(a.domain for a in rel.attributes)))


__all__ = [
    "BUILTINS", "Dataset", "DiagramSpec", "OmegaRelError", "QueryMap", "answer_query", "build_diagram",
    "describe", "equality", "format_value", "gaussian_sum", "grid_values", "identity_query", "load_dataset",
    "load_network", "network_json", "parse_mapping", "parse_spec", "parse_value", "read_query",
    "read_similarity", "read_spec", "read_table", "similarity_text", "table_text", "write_table",
]
