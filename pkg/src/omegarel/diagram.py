"""Multi-graphs, multi-diagrams of weighted relations, and their vague limits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    ColumnMismatch,
    DanglingVertexObject,
    DomainMismatch,
    DuplicateAttribute,
    InconsistentLattice,
    LegMissing,
    NotInjective,
    SignatureMismatch,
    UnknownVertex,
)
from .lattice import Flavor
from .omega_object import OmegaObject, lambda_similar
from .relation import Attribute, Relation, contract, expand, reindex, rename, tabulate


@dataclass(frozen=True)
class Arrow:
    label: str
    sources: tuple[str, ...]
    targets: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "targets", tuple(self.targets))
        if not self.sources and not self.targets:
            raise ValueError(f"arrow {self.label!r} has no endpoints")
        if set(self.sources) & set(self.targets):
            raise ValueError(f"arrow {self.label!r} uses a vertex as both source and target")
        if len(set(self.sources)) != len(self.sources) or len(set(self.targets)) != len(self.targets):
            raise ValueError(f"arrow {self.label!r} repeats an endpoint")

    @property
    def endpoints(self) -> tuple[str, ...]:
        return self.sources + self.targets


class MultiGraph:
    """Vertices plus multi-arrows with sets of source and target vertices.

    The graph's own source set defaults to the vertices that are not the target
    of any arrow, and its target set to the vertices that are not the source of
    any arrow.
    """

    def __init__(self, vertices: Sequence[str], arrows: Sequence[Arrow] = (),
                 sources: Sequence[str] | None = None, targets: Sequence[str] | None = None):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("vertex labels must be unique")
        self.arrows = tuple(arrows)
        labels = [a.label for a in self.arrows]
        if len(set(labels)) != len(labels):
            raise ValueError("arrow labels must be unique")
        known = set(self.vertices)
        for a in self.arrows:
            for v in a.endpoints:
                if v not in known:
                    raise UnknownVertex(f"arrow {a.label!r} references unknown vertex {v!r}")
        hit_as_target = {v for a in self.arrows for v in a.targets}
        hit_as_source = {v for a in self.arrows for v in a.sources}
        self.sources = tuple(sources) if sources is not None else tuple(
            v for v in self.vertices if v not in hit_as_target)
        self.targets = tuple(targets) if targets is not None else tuple(
            v for v in self.vertices if v not in hit_as_source)
        for v in self.sources + self.targets:
            if v not in known:
                raise UnknownVertex(f"graph boundary references unknown vertex {v!r}")

    def arrow(self, label: str) -> Arrow:
        for a in self.arrows:
            if a.label == label:
                return a
        raise KeyError(label)

    @property
    def isolated(self) -> tuple[str, ...]:
        touched = {v for a in self.arrows for v in a.endpoints}
        return tuple(v for v in self.vertices if v not in touched)

    def __eq__(self, other):
        return (isinstance(other, MultiGraph) and self.vertices == other.vertices
                and self.arrows == other.arrows and self.sources == other.sources
                and self.targets == other.targets)

    def __repr__(self):
        arrows = ", ".join(f"{a.label}: {','.join(a.sources)}->{','.join(a.targets)}" for a in self.arrows)
        return f"MultiGraph(vertices={list(self.vertices)}, arrows=[{arrows}])"


def _fresh(label: str, taken: set[str]) -> str:
    k = 2
    while f"{label}#{k}" in taken:
        k += 1
    return f"{label}#{k}"


def glue(g1: MultiGraph, g2: MultiGraph) -> MultiGraph:
    """Identify equally labelled vertices of g1's targets and g2's sources.

    Other clashing vertex or arrow labels from g2 get a ``#k`` suffix.
    """
    glued = set(g1.targets) & set(g2.sources)
    taken = set(g1.vertices)
    vmap = {}
    for v in g2.vertices:
        if v in glued:
            vmap[v] = v
        elif v in taken:
            vmap[v] = _fresh(v, taken | set(g2.vertices))
            taken.add(vmap[v])
        else:
            vmap[v] = v
            taken.add(v)
    vertices = g1.vertices + tuple(vmap[v] for v in g2.vertices if v not in glued)
    arrow_taken = {a.label for a in g1.arrows}
    arrows = list(g1.arrows)
    for a in g2.arrows:
        label = a.label
        if label in arrow_taken:
            label = _fresh(label, arrow_taken | {b.label for b in g2.arrows})
        arrow_taken.add(label)
        arrows.append(Arrow(label, tuple(vmap[v] for v in a.sources), tuple(vmap[v] for v in a.targets)))
    s2 = [vmap[v] for v in g2.sources if v not in g1.targets]
    t1 = [v for v in g1.targets if v not in g2.sources]
    sources = list(dict.fromkeys(list(g1.sources) + s2))
    targets = list(dict.fromkeys([vmap[v] for v in g2.targets] + t1))
    return MultiGraph(vertices, arrows, sources, targets)


# ---------------------------------------------------------------------------


class MultiDiagram:
    """A multi-graph whose vertices carry Ω-objects and whose arrows carry relations.

    Each arrow's relation must run from the carriers of its source vertices to
    the carriers of its target vertices (attributes matched by name).
    """

    def __init__(self, graph: MultiGraph, objects: Mapping[str, OmegaObject],
                 relations: Mapping[str, Relation], flavor: Flavor, sources: Sequence[str] | None = None):
        self.graph = graph
        self.flavor = flavor
        self.objects = dict(objects)
        self.relations = dict(relations)
        self.sources = tuple(sources) if sources is not None else ()
        self._validate()

    @classmethod
    def build(cls, flavor: Flavor, objects: Mapping[str, OmegaObject],
              arrows: Mapping[str, tuple[Sequence[str], Sequence[str], Relation]] | None = None,
              sources: Sequence[str] | None = None) -> "MultiDiagram":
        """Assemble from ``{label: (source vertices, target vertices, relation)}``."""
        arrows = arrows or {}
        graph = MultiGraph(list(objects), [Arrow(k, tuple(s), tuple(t)) for k, (s, t, _) in arrows.items()])
        return cls(graph, objects, {k: r for k, (_, _, r) in arrows.items()}, flavor, sources)

    def _validate(self):
        g = self.graph
        lat = self.flavor.lattice
        for v in g.vertices:
            if v not in self.objects:
                raise DanglingVertexObject(f"vertex {v!r} has no Ω-object")
        for v in self.objects:
            if v not in g.vertices:
                raise DanglingVertexObject(f"Ω-object given for unknown vertex {v!r}")
        for a in g.arrows:
            if a.label not in self.relations:
                raise DanglingVertexObject(f"arrow {a.label!r} has no relation")
        for k in self.relations:
            if k not in {a.label for a in g.arrows}:
                raise DanglingVertexObject(f"relation given for unknown arrow {k!r}")
        for v in self.sources:
            if v not in g.vertices:
                raise UnknownVertex(f"source vertex {v!r} is not in the diagram")

        def same(other):
            return other is lat or other.name == lat.name

        owner = {}
        for v in g.vertices:
            obj = self.objects[v]
            if not same(obj.lattice):
                raise InconsistentLattice(f"vertex {v!r} uses lattice {obj.lattice.name}, flavor uses {lat.name}")
            for attr in obj.carrier:
                if attr.name in owner:
                    raise DuplicateAttribute(
                        f"attribute {attr.name!r} is carried by both {owner[attr.name]!r} and {v!r}")
                owner[attr.name] = v
        self._owner = owner
        for a in g.arrows:
            rel = self.relations[a.label]
            if not same(rel.lattice):
                raise InconsistentLattice(f"arrow {a.label!r} uses lattice {rel.lattice.name}, flavor uses {lat.name}")
            for side, verts, attrs in (("source", a.sources, rel.sources), ("target", a.targets, rel.targets)):
                expected = {x.name: x for v in verts for x in self.objects[v].carrier}
                got = {x.name: x for x in attrs}
                if set(expected) != set(got):
                    raise SignatureMismatch(
                        f"arrow {a.label!r}: {side} attributes ({', '.join(sorted(got))}) do not match "
                        f"the carriers of ({', '.join(verts)})")
                for name, attr in got.items():
                    if attr.domain != expected[name].domain:
                        raise SignatureMismatch(f"arrow {a.label!r}: attribute {name!r} has a different domain")

    @property
    def vertices(self) -> tuple[str, ...]:
        return self.graph.vertices

    @property
    def attributes(self) -> tuple[Attribute, ...]:
        return tuple(a for v in self.graph.vertices for a in self.objects[v].carrier)

    def carrier(self, vertex: str) -> tuple[Attribute, ...]:
        try:
            return self.objects[vertex].carrier
        except KeyError:
            raise UnknownVertex(f"unknown vertex {vertex!r}") from None

    def vertex_of(self, attribute: str) -> str:
        return self._owner[attribute]

    def with_flavor(self, flavor: Flavor) -> "MultiDiagram":
        return MultiDiagram(self.graph, self.objects, self.relations, flavor, self.sources)

    def with_arrow_order(self, labels: Sequence[str]) -> "MultiDiagram":
        arrows = [self.graph.arrow(k) for k in labels]
        graph = MultiGraph(self.graph.vertices, arrows, self.graph.sources, self.graph.targets)
        return MultiDiagram(graph, self.objects, self.relations, self.flavor, self.sources)

    def factors(self) -> list[Relation]:
        """Tabulated arrow relations plus the distributions of isolated vertices."""
        out = [tabulate(self.relations[a.label]) for a in self.graph.arrows]
        out += [self.objects[v].dist for v in self.graph.isolated]
        return out

    def __repr__(self):
        return f"<MultiDiagram {len(self.vertices)} vertices, {len(self.graph.arrows)} arrows, {self.flavor.label}>"


def vague_limit(D: MultiDiagram) -> Relation:
    """Flavor-times of every arrow's tabulation (extended to all carriers) and of isolated vertex distributions."""
    lat = D.flavor.lattice
    attrs = D.attributes
    names = [a.name for a in attrs]
    shape = tuple(a.size for a in attrs)
    out = lat.full(shape, lat.top)
    for factor in D.factors():
        out = D.flavor.times(out, expand(factor, names))
    return Relation._make((), attrs, np.array(np.broadcast_to(out, shape)), lat)


@dataclass
class Cone:
    """Apex elements and one crisp leg per vertex (a mapping or a callable)."""

    apex: Sequence
    legs: Mapping[str, Mapping | Callable]


def cone_distribution(cone: Cone, D: MultiDiagram) -> Relation:
    """Image of the top distribution on the apex under the tupling of the legs."""
    lat = D.flavor.lattice
    attrs = D.attributes
    arr = lat.full(tuple(a.size for a in attrs), lat.bottom)
    for v in D.vertices:
        if v not in cone.legs:
            raise LegMissing(f"cone has no leg to vertex {v!r}")
    for r in cone.apex:
        idx = []
        for v in D.vertices:
            leg = cone.legs[v]
            try:
                value = leg(r) if callable(leg) else leg[r]
            except KeyError:
                raise LegMissing(f"leg to {v!r} is undefined at apex element {r!r}") from None
            carrier = D.carrier(v)
            values = (value,) if len(carrier) == 1 else tuple(value)
            if len(values) != len(carrier):
                raise SignatureMismatch(f"leg to {v!r} returned {len(values)} values for {len(carrier)} attributes")
            idx.extend(a.index(x) for a, x in zip(carrier, values))
        idx = tuple(idx)
        arr[idx] = D.flavor.plus(arr[idx], lat.top)
    return Relation._make((), attrs, arr, lat)


def vertex_similarities(D: MultiDiagram) -> list[Relation]:
    return [D.objects[v].sim for v in D.vertices if D.objects[v].carrier]


@dataclass
class Degree:
    degree: object
    threshold: object = None
    holds: bool | None = None


def lambda_limit(D: MultiDiagram, cone: Cone, threshold=None) -> Degree:
    """Similarity of the vague limit and a cone's distribution under the product of vertex similarities."""
    lim = vague_limit(D)
    cd = cone_distribution(cone, D)
    degree = lambda_similar(lim, cd, vertex_similarities(D), D.flavor)
    return _verdict(D.flavor, degree, threshold)


def _verdict(flavor, degree, threshold) -> Degree:
    if threshold is None:
        return Degree(degree)
    lat = flavor.lattice
    return Degree(degree, threshold, bool(lat.leq(lat.asarray(threshold), lat.asarray(degree))))


@dataclass
class CommutativityReport:
    distribution: Relation
    sources: tuple[str, ...]
    flavor: Flavor
    degree: object = field(init=False)

    def __post_init__(self):
        lat = self.flavor.lattice
        self.degree = lat.scalar(lat.fold("meet", self.distribution.weights))

    @property
    def commutative(self) -> bool:
        lat = self.flavor.lattice
        return bool(np.all(lat.eq(self.distribution.weights, lat.top)))

    @property
    def universal(self) -> bool:
        return not self.sources

    def holds(self, threshold) -> bool:
        lat = self.flavor.lattice
        return bool(np.all(lat.leq(lat.asarray(threshold), self.distribution.weights)))


def commutativity_degree(D: MultiDiagram, sources: Sequence[str] | None = None) -> CommutativityReport:
    """Limit weights summed over every non-source vertex, kept as a distribution on the sources."""
    sources = tuple(D.sources if sources is None else sources)
    for v in sources:
        if v not in D.vertices:
            raise UnknownVertex(f"unknown source vertex {v!r}")
    keep = [a for v in D.vertices if v in sources for a in D.carrier(v)]
    dist = contract(D.factors(), keep, D.flavor, order=D.attributes)
    return CommutativityReport(dist, sources, D.flavor)


def restricted_limit(D: MultiDiagram, keep: Sequence[str]) -> Relation:
    """The vague limit with every attribute outside ``keep`` summed out."""
    attrs = [next(a for a in D.attributes if a.name == n) for n in keep]
    return contract(D.factors(), attrs, D.flavor, order=D.attributes)


def lambda_description(D: MultiDiagram, data: Relation, mapping: Mapping[str, str], similarity=None,
                       threshold=None) -> Degree:
    """How well the limit of ``D``, restricted along a column mapping, describes a weighted dataset.

    ``mapping`` sends each dataset column to a diagram attribute (or to a vertex
    with a single-attribute carrier). Dataset values must lie in the mapped
    attribute domains. ``similarity`` acts on the dataset columns.
    """
    if data.sources:
        raise ColumnMismatch("the dataset must be a distribution")
    columns = list(data.names)
    unmapped = [c for c in columns if c not in mapping]
    if unmapped:
        raise ColumnMismatch(f"dataset column(s) {', '.join(unmapped)} are not mapped into the diagram")
    extra = [c for c in mapping if c not in columns]
    if extra:
        raise ColumnMismatch(f"mapping mentions unknown column(s) {', '.join(extra)}")
    names = {a.name: a for a in D.attributes}
    target = {}
    for col in columns:
        dest = mapping[col]
        if dest not in names and dest in D.vertices and len(D.carrier(dest)) == 1:
            dest = D.carrier(dest)[0].name
        if dest not in names:
            raise ColumnMismatch(f"column {col!r} maps to {dest!r}, which is not a diagram attribute")
        target[col] = dest
    if len(set(target.values())) != len(target):
        raise NotInjective("two dataset columns map to the same diagram attribute")
    restricted = restricted_limit(D, [target[c] for c in columns])
    restricted = rename(restricted, {target[c]: c for c in columns if target[c] != c})
    try:
        data = reindex(data, [names[target[c]].renamed(c) for c in columns])
    except DomainMismatch as exc:
        raise ColumnMismatch(f"dataset values do not fit the diagram domains: {exc}") from None
    degree = lambda_similar(data, restricted, similarity, D.flavor)
    return _verdict(D.flavor, degree, threshold)
