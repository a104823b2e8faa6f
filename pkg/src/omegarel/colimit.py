"""Vague colimits: block similarities over the disjoint union of vertex families."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from networkx.utils import UnionFind

from .diagram import MultiDiagram
from .errors import NonCrispArrow, NonIdempotentPlus, NotReflexive, NotSymmetric
from .lattice import Flavor
from .omega_object import endo_matrix, product_similarity
from .relation import Attribute, Relation, compose, matmul


@dataclass(frozen=True)
class Block:
    """A family of vertices; its carrier is the product of their carriers."""

    vertices: tuple[str, ...]
    attributes: tuple[Attribute, ...]

    @property
    def label(self) -> str:
        return "+".join(self.vertices) if self.vertices else "()"

    @property
    def size(self) -> int:
        return int(np.prod([a.size for a in self.attributes], dtype=np.int64))

    def tuples(self) -> list[tuple]:
        return list(itertools.product(*(a.domain for a in self.attributes)))


@dataclass
class AggregatedDiagram:
    blocks: list[Block]
    morphisms: dict[tuple[int, int], Relation]
    flavor: Flavor
    vertex_order: tuple[str, ...] = ()
    carriers: dict[str, tuple[Attribute, ...]] = field(default_factory=dict)

    def matrix(self, j: int, l: int) -> np.ndarray:
        """Weights of the morphism between blocks j and l (⊥ when absent)."""
        lat = self.flavor.lattice
        rel = self.morphisms.get((j, l))
        if rel is None:
            return lat.full((self.blocks[j].size, self.blocks[l].size), lat.bottom)
        if j == l:
            return endo_matrix(rel, self.blocks[j].attributes)
        names = [a.name for a in self.blocks[j].attributes + self.blocks[l].attributes]
        return rel.aligned(names).reshape(self.blocks[j].size, self.blocks[l].size)

    def index_of(self, vertices) -> int | None:
        wanted = set(vertices)
        for i, b in enumerate(self.blocks):
            if set(b.vertices) == wanted:
                return i
        return None


def _require_idempotent(flavor: Flavor):
    if not flavor.plus_idempotent:
        raise NonIdempotentPlus(
            f"colimits need an idempotent plus (λ+λ=λ); flavor {flavor.label} does not have one")


def aggregate(D: MultiDiagram) -> AggregatedDiagram:
    """Group arrows by their source and target families, summing parallel ones."""
    flavor = D.flavor
    _require_idempotent(flavor)
    order = {v: i for i, v in enumerate(D.vertices)}

    def family(verts):
        return tuple(sorted(verts, key=order.__getitem__))

    fams: list[tuple[str, ...]] = []
    for a in D.graph.arrows:
        for fam in (family(a.sources), family(a.targets)):
            if fam not in fams:
                fams.append(fam)
    covered = {v for fam in fams for v in fam}
    fams += [(v,) for v in D.vertices if v not in covered]
    blocks = [Block(f, tuple(x for v in f for x in D.carrier(v))) for f in fams]
    index = {b.vertices: i for i, b in enumerate(blocks)}
    morphisms: dict[tuple[int, int], Relation] = {}
    for a in D.graph.arrows:
        key = (index[family(a.sources)], index[family(a.targets)])
        rel = D.relations[a.label]
        j, l = blocks[key[0]], blocks[key[1]]
        arr = rel.aligned([x.name for x in j.attributes + l.attributes])
        if key in morphisms:
            arr = flavor.plus(morphisms[key].weights, arr)
        morphisms[key] = Relation._make(j.attributes, l.attributes, np.array(arr), flavor.lattice)
    for i, b in enumerate(blocks):
        sims = [D.objects[v].sim for v in b.vertices if D.carrier(v)]
        if sims:
            morphisms[(i, i)] = product_similarity(sims, flavor)
        else:
            morphisms[(i, i)] = Relation.top((), (), flavor.lattice)
    carriers = {v: D.carrier(v) for v in D.vertices}
    return AggregatedDiagram(blocks, morphisms, flavor, tuple(D.vertices), carriers)


@dataclass
class Violation:
    first: tuple[str, str]
    second: tuple[str, str]
    witness: tuple


@dataclass
class ColimitObject:
    blocks: list[Block]
    carrier: Attribute
    relation: Relation
    flavor: Flavor
    precondition_ok: bool
    violations: list[Violation] = field(default_factory=list)
    transitive: bool = False
    closed: bool = False

    def matrix(self) -> np.ndarray:
        return self.relation.matrix()

    def closure(self) -> "ColimitObject":
        rel = similarity_closure(self.relation, self.flavor)
        return ColimitObject(self.blocks, self.carrier, rel, self.flavor, self.precondition_ok,
                             self.violations, transitive=True, closed=True)

    def top_classes(self) -> list[frozenset]:
        """Classes of carrier elements linked by ⊤ weights."""
        lat = self.relation.lattice
        uf = UnionFind(self.carrier.domain)
        mat = self.matrix()
        for i, j in np.argwhere(lat.eq(mat, lat.top)):
            uf.union(self.carrier.domain[i], self.carrier.domain[j])
        return _sorted_partition(uf.to_sets())


def _sorted_partition(sets) -> list[frozenset]:
    return sorted((frozenset(s) for s in sets), key=lambda s: sorted(map(repr, s)))


def _check_precondition(agg: AggregatedDiagram) -> list[Violation]:
    """Every forward composite of aggregated morphisms must stay below the morphism it lands on."""
    flavor = agg.flavor
    lat = flavor.lattice
    blocks = agg.blocks
    out = []
    for (j, l), (j2, l2) in itertools.product(list(agg.morphisms), repeat=2):
        mid = set(blocks[j2].vertices)
        if not mid or not mid <= set(blocks[l].vertices):
            continue
        rest = {v for v in blocks[l].vertices if v not in mid}
        if rest & set(blocks[l2].vertices):
            continue
        comp = compose(_tagged(agg, j, l, "in:", "mid:"), _tagged(agg, j2, l2, "mid:", "out:"), flavor)
        res = [v for v in agg.vertex_order if v in blocks[l2].vertices or v in rest]
        res_attrs, cols = [], []
        for v in res:
            tag = "out:" if v in blocks[l2].vertices else "mid:"
            for a in agg.carriers[v]:
                res_attrs.append(a)
                cols.append(tag + a.name)
        rows = ["in:" + a.name for a in blocks[j].attributes]
        got = comp.aligned(rows + cols).reshape(blocks[j].size, -1)
        k = agg.index_of(res)
        if k is None:
            bound = lat.full(got.shape, lat.bottom)
        else:
            bound = _bound(agg, j, k, res_attrs)
        bad = np.argwhere(~np.asarray(lat.leq(got, bound), dtype=bool))
        if bad.size:
            r, c = bad[0]
            witness = (_tuple_at(blocks[j].attributes, r), _tuple_at(res_attrs, c))
            out.append(Violation((blocks[j].label, blocks[l].label), (blocks[j2].label, blocks[l2].label), witness))
    return out


def _tuple_at(attrs, flat):
    if not attrs:
        return ()
    idx = np.unravel_index(int(flat), tuple(a.size for a in attrs))
    return tuple(a.domain[int(i)] for a, i in zip(attrs, idx))


def _tagged(agg, j, l, src_tag, tgt_tag) -> Relation:
    blocks = agg.blocks
    mat = agg.matrix(j, l)
    src = tuple(a.renamed(src_tag + a.name) for a in blocks[j].attributes)
    tgt = tuple(a.renamed(tgt_tag + a.name) for a in blocks[l].attributes)
    return Relation._make(src, tgt, mat.reshape([a.size for a in src + tgt]), agg.flavor.lattice)


def _bound(agg, j, k, res_attrs):
    mat = agg.matrix(j, k)
    blk = agg.blocks[k]
    names = [a.name for a in blk.attributes]
    perm = [names.index(a.name) for a in res_attrs]
    shaped = mat.reshape([agg.blocks[j].size] + [a.size for a in blk.attributes])
    moved = np.transpose(shaped, [0] + [p + 1 for p in perm])
    return moved.reshape(agg.blocks[j].size, -1)


def vague_colimit(D: MultiDiagram) -> ColimitObject:
    """Block relation c with c_{J,L} = f_{J,L} + f°_{L,J} on the tagged disjoint union of blocks."""
    agg = aggregate(D)
    flavor = agg.flavor
    lat = flavor.lattice
    blocks = agg.blocks
    offsets = np.cumsum([0] + [b.size for b in blocks])
    n = int(offsets[-1])
    c = lat.full((n, n), lat.bottom)
    for (j, l) in agg.morphisms:
        m = agg.matrix(j, l)
        rj = slice(offsets[j], offsets[j + 1])
        rl = slice(offsets[l], offsets[l + 1])
        c[rj, rl] = flavor.plus(c[rj, rl], m)
        c[rl, rj] = flavor.plus(c[rl, rj], m.T)
    elements = tuple((b.label, t) for b in blocks for t in b.tuples())
    carrier = Attribute("colim", elements)
    rel = Relation._make((carrier,), (carrier.primed(),), c, lat)
    violations = _check_precondition(agg)
    transitive = bool(np.all(lat.leq(matmul(c, c, flavor), c)))
    return ColimitObject(blocks, carrier, rel, flavor, not violations, violations, transitive)


def similarity_closure(c: Relation, flavor: Flavor) -> Relation:
    """Least transitive relation above a reflexive, symmetric c (iterating c ← c + c∘c)."""
    _require_idempotent(flavor)
    lat = flavor.lattice
    carrier = c.sources
    mat = endo_matrix(c, carrier)
    n = mat.shape[0]
    if not np.all(lat.eq(np.diagonal(mat), lat.top)):
        raise NotReflexive("closure needs a reflexive relation")
    if not np.all(lat.eq(mat, mat.T)):
        raise NotSymmetric("closure needs a symmetric relation")
    # squaring doubles the path length covered, so log2(n) rounds suffice
    for _ in range(max(1, int(np.ceil(np.log2(max(n, 2))))) + 1):
        nxt = flavor.plus(mat, matmul(mat, mat, flavor))
        if np.all(lat.eq(nxt, mat)):
            break
        mat = nxt
    shape = [a.size for a in c.attributes]
    return Relation._make(c.sources, c.targets, mat.reshape(shape), lat)


def set_colimit_oracle(D: MultiDiagram) -> list[frozenset]:
    """Classical colimit of a diagram of crisp functions: classes of the tagged disjoint union."""
    lat = D.flavor.lattice
    if lat.name != "boolean":
        raise NonCrispArrow("the set colimit needs the boolean lattice")
    elements = []
    for v in D.vertices:
        carrier = D.carrier(v)
        for t in itertools.product(*(a.domain for a in carrier)):
            elements.append((v, t[0] if len(t) == 1 else t))
    uf = UnionFind(elements)
    for a in D.graph.arrows:
        if len(a.sources) != 1 or len(a.targets) != 1:
            raise NonCrispArrow(f"arrow {a.label!r} is not a single-source, single-target function")
        (s,), (t,) = a.sources, a.targets
        src, tgt = D.carrier(s), D.carrier(t)
        rel = D.relations[a.label]
        mat = rel.aligned([x.name for x in src + tgt]).reshape(
            int(np.prod([x.size for x in src])), int(np.prod([x.size for x in tgt])))
        src_tuples = list(itertools.product(*(x.domain for x in src)))
        tgt_tuples = list(itertools.product(*(x.domain for x in tgt)))
        for i, row in enumerate(mat):
            hits = np.flatnonzero(lat.eq(row, lat.top))
            crisp = np.all(lat.eq(row, lat.top) | lat.eq(row, lat.bottom))
            if len(hits) != 1 or not crisp:
                raise NonCrispArrow(f"arrow {a.label!r} is not a function at {src_tuples[i]!r}")
            a_val = src_tuples[i][0] if len(src) == 1 else src_tuples[i]
            b_val = tgt_tuples[hits[0]][0] if len(tgt) == 1 else tgt_tuples[hits[0]]
            uf.union((s, a_val), (t, b_val))
    return _sorted_partition(uf.to_sets())
