"""Shared builders and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from omegarel import (
    Attribute, MultiDiagram, OmegaObject, Relation, boolean_lattice, make_flavor,
)


def crisp_flavor():
    return make_flavor(boolean_lattice(), "meet", "join")


def random_crisp_diagram(rng: np.random.Generator, functions: bool = False,
                         max_vertices: int = 4, max_domain: int = 5, max_arrows: int = 5) -> MultiDiagram:
    """Random diagram over the boolean lattice.

    With ``functions`` every arrow has one source and one target and is the
    graph of a random function; otherwise arrows are random crisp relations
    between random disjoint vertex sets.
    """
    flavor = crisp_flavor()
    lat = flavor.lattice
    n = int(rng.integers(1 if not functions else 1, max_vertices + 1))
    names = [f"V{i}" for i in range(n)]
    attrs = {v: Attribute(v, tuple(range(int(rng.integers(1, max_domain + 1))))) for v in names}
    objects = {v: OmegaObject.make([attrs[v]], lat) for v in names}
    arrows = {}
    k = int(rng.integers(0, max_arrows + 1)) if n > 1 else 0
    for i in range(k):
        if functions:
            s, t = rng.choice(n, size=2, replace=False)
            src, tgt = [names[s]], [names[t]]
            image = rng.integers(0, attrs[tgt[0]].size, size=attrs[src[0]].size)
            arr = np.zeros((attrs[src[0]].size, attrs[tgt[0]].size), dtype=np.int64)
            arr[np.arange(arr.shape[0]), image] = lat.top
        else:
            perm = list(rng.permutation(n))
            ns = int(rng.integers(1, n))
            nt = int(rng.integers(1, n - ns + 1))
            src = [names[j] for j in perm[:ns]]
            tgt = [names[j] for j in perm[ns:ns + nt]]
            shape = tuple(attrs[v].size for v in src + tgt)
            density = rng.uniform(0.2, 0.9)
            arr = (rng.random(shape) < density).astype(np.int64)
        rel = Relation([attrs[v] for v in src], [attrs[v] for v in tgt], arr, lat)
        arrows[f"a{i}"] = (src, tgt, rel)
    return MultiDiagram.build(flavor, objects, arrows)


def set_limit(D: MultiDiagram) -> set[tuple]:
    """Tuples of the product of all carriers satisfying every arrow relation."""
    attrs = D.attributes
    out = set()
    for t in itertools.product(*(a.domain for a in attrs)):
        env = dict(zip((a.name for a in attrs), t))
        ok = True
        for a in D.graph.arrows:
            rel = D.relations[a.label]
            if not rel.weight({n: env[n] for n in rel.names}):
                ok = False
                break
        if ok:
            out.add(t)
    return out


def partition_by_orbits(D: MultiDiagram) -> set[frozenset]:
    """Smallest equivalence on the tagged disjoint union containing every arrow's graph.

    Independent of any union-find: grows classes by repeated merging.
    """
    classes = [{(v, x)} for v in D.vertices for x in D.carrier(v)[0].domain]
    pairs = []
    for a in D.graph.arrows:
        (s,), (t,) = a.sources, a.targets
        rel = D.relations[a.label]
        for (x, y), w in rel.items():
            pairs.append(((s, x), (t, y)))
    changed = True
    while changed:
        changed = False
        for p, q in pairs:
            cp = next(c for c in classes if p in c)
            cq = next(c for c in classes if q in c)
            if cp is not cq:
                cp |= cq
                classes.remove(cq)
                changed = True
    return {frozenset(c) for c in classes}
