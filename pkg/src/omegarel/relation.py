"""Ω-valued relations over named finite attributes.

A relation stores a dense weight array with one axis per attribute, sources
first then targets; tuples that were never given a weight hold ⊥.
"""

from __future__ import annotations

import itertools
import numbers
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DomainMismatch,
    DuplicateAttribute,
    LatticeMismatch,
    NotASuperset,
    SignatureMismatch,
    UnknownAttribute,
)
from .lattice import Flavor, Lattice

PRIME = "'"


@dataclass(frozen=True)
class Attribute:
    name: str
    domain: tuple
    _index: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        dom = tuple(self.domain)
        if not dom:
            raise ValueError(f"attribute {self.name!r} has an empty domain")
        index = {v: i for i, v in enumerate(dom)}
        if len(index) != len(dom):
            raise ValueError(f"attribute {self.name!r} has duplicate domain values")
        object.__setattr__(self, "domain", dom)
        object.__setattr__(self, "_index", index)

    @property
    def size(self) -> int:
        return len(self.domain)

    def index(self, value) -> int:
        """Position of ``value``; numeric values match within 1e-9."""
        try:
            return self._index[value]
        except (KeyError, TypeError):
            pass
        if isinstance(value, numbers.Real):
            for i, v in enumerate(self.domain):
                if isinstance(v, numbers.Real) and abs(float(v) - float(value)) <= 1e-9:
                    return i
        raise DomainMismatch(f"{value!r} is not in the domain of attribute {self.name!r}")

    def renamed(self, name: str) -> "Attribute":
        return Attribute(name, self.domain)

    def primed(self) -> "Attribute":
        return Attribute(self.name + PRIME, self.domain)


def prime(attrs: Sequence[Attribute]) -> tuple[Attribute, ...]:
    return tuple(a.primed() for a in attrs)


class Relation:
    """Immutable weighted relation from the product of ``sources`` to that of ``targets``."""

    __slots__ = ("sources", "targets", "weights", "lattice")

    def __init__(self, sources: Sequence[Attribute], targets: Sequence[Attribute], weights, lattice: Lattice):
        sources = tuple(sources)
        targets = tuple(targets)
        names = [a.name for a in sources + targets]
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise DuplicateAttribute(f"attribute name(s) used twice in one signature: {', '.join(dup)}")
        arr = np.array(lattice.asarray(weights), copy=True)
        shape = tuple(a.size for a in sources + targets)
        if arr.shape != shape:
            try:
                arr = np.array(np.broadcast_to(arr, shape))
            except ValueError:
                raise SignatureMismatch(f"weights of shape {arr.shape} do not fit signature {shape}") from None
        self._set(sources, targets, arr, lattice)

    def _set(self, sources, targets, arr, lattice):
        arr.flags.writeable = False
        object.__setattr__(self, "sources", sources)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "weights", arr)
        object.__setattr__(self, "lattice", lattice)

    def __setattr__(self, key, value):
        raise AttributeError("relations are immutable")

    @classmethod
    def _make(cls, sources, targets, arr, lattice) -> "Relation":
        """Internal constructor that trusts its arguments."""
        rel = object.__new__(cls)
        arr = np.asarray(arr)
        if not arr.flags.c_contiguous:
            arr = arr.copy()
        rel._set(tuple(sources), tuple(targets), arr, lattice)
        return rel

    # construction ---------------------------------------------------------
    @classmethod
    def constant(cls, sources, targets, value, lattice) -> "Relation":
        sources = tuple(sources)
        targets = tuple(targets)
        shape = tuple(a.size for a in sources + targets)
        return cls._make(sources, targets, lattice.full(shape, lattice.asarray(value)), lattice)

    @classmethod
    def bottom(cls, sources, targets, lattice) -> "Relation":
        return cls.constant(sources, targets, lattice.bottom, lattice)

    @classmethod
    def top(cls, sources, targets, lattice) -> "Relation":
        return cls.constant(sources, targets, lattice.top, lattice)

    @classmethod
    def from_entries(cls, sources, targets, entries, lattice, dtype=None) -> "Relation":
        """Build from ``{tuple: weight}`` or ``(tuple, weight)`` pairs; tuples list sources then targets.

        Later entries for the same tuple replace earlier ones.
        """
        sources = tuple(sources)
        targets = tuple(targets)
        attrs = sources + targets
        items = entries.items() if isinstance(entries, Mapping) else entries
        keys, values = [], []
        for key, value in items:
            key = tuple(key) if isinstance(key, (tuple, list)) else (key,)
            if len(key) != len(attrs):
                raise SignatureMismatch(f"tuple {key!r} has {len(key)} values, expected {len(attrs)}")
            keys.append(tuple(a.index(v) for a, v in zip(attrs, key)))
            values.append(value)
        vals = lattice.asarray(values) if values else lattice.asarray(np.empty(0, dtype=lattice.dtype))
        shape = tuple(a.size for a in attrs)
        arr = lattice.full(shape, lattice.bottom, like=vals if vals.dtype == object else None)
        for idx, v in zip(keys, vals):
            arr[idx] = v
        return cls._make(sources, targets, arr, lattice)

    @classmethod
    def from_function(cls, sources, targets, fn, lattice) -> "Relation":
        """Crisp graph of ``fn``: ⊤ on (a, fn(*a)), ⊥ elsewhere.

        ``fn`` receives one value per source attribute and returns one value per
        target attribute (a bare value when there is a single target).
        """
        sources = tuple(sources)
        targets = tuple(targets)
        shape = tuple(a.size for a in sources + targets)
        arr = lattice.full(shape, lattice.bottom)
        for src in itertools.product(*(range(a.size) for a in sources)):
            out = fn(*(a.domain[i] for a, i in zip(sources, src)))
            if len(targets) == 1:
                out = (out,)
            tgt = tuple(a.index(v) for a, v in zip(targets, out))
            arr[src + tgt] = lattice.top
        return cls._make(sources, targets, arr, lattice)

    # views ------------------------------------------------------------------
    @property
    def attributes(self) -> tuple[Attribute, ...]:
        return self.sources + self.targets

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.attributes)

    @property
    def source_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.sources)

    @property
    def target_names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.targets)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.weights.shape

    @property
    def is_distribution(self) -> bool:
        return not self.sources

    def attribute(self, name: str) -> Attribute:
        for a in self.attributes:
            if a.name == name:
                return a
        raise UnknownAttribute(f"no attribute {name!r} in relation over {', '.join(self.names)}")

    def __getitem__(self, values):
        """Weight of one tuple, values listed in attribute order."""
        if not isinstance(values, tuple):
            values = (values,)
        if len(values) != len(self.attributes):
            raise SignatureMismatch(f"expected {len(self.attributes)} values, got {len(values)}")
        idx = tuple(a.index(v) for a, v in zip(self.attributes, values))
        return self.lattice.scalar(self.weights[idx])

    def weight(self, assignment: Mapping[str, object]):
        """Weight of the tuple given as ``{attribute name: value}``."""
        missing = set(self.names) - set(assignment)
        if missing:
            raise UnknownAttribute(f"assignment lacks {', '.join(sorted(missing))}")
        return self[tuple(assignment[n] for n in self.names)]

    def items(self, include_bottom: bool = False):
        """Yield ``(values, weight)`` in index order."""
        lat = self.lattice
        attrs = self.attributes
        for idx in itertools.product(*(range(a.size) for a in attrs)):
            w = self.weights[idx]
            if not include_bottom and bool(lat.eq(w, lat.bottom)):
                continue
            yield tuple(a.domain[i] for a, i in zip(attrs, idx)), lat.scalar(w)

    def support(self) -> set[tuple]:
        return {vals for vals, _ in self.items()}

    def top_support(self) -> set[tuple]:
        lat = self.lattice
        return {vals for vals, w in self.items() if bool(lat.eq(w, lat.top))}

    def aligned(self, names: Sequence[str]) -> np.ndarray:
        """Weights with axes permuted to ``names`` (which must be a permutation of ``self.names``)."""
        own = self.names
        if sorted(names) != sorted(own):
            raise SignatureMismatch(f"cannot align ({', '.join(own)}) to ({', '.join(names)})")
        return np.transpose(self.weights, [own.index(n) for n in names])

    def matrix(self) -> np.ndarray:
        """Two-dimensional view: rows index source tuples, columns target tuples."""
        rows = int(np.prod([a.size for a in self.sources], dtype=np.int64))
        cols = int(np.prod([a.size for a in self.targets], dtype=np.int64))
        return self.weights.reshape(rows, cols)

    def with_weights(self, arr) -> "Relation":
        return Relation(self.sources, self.targets, arr, self.lattice)

    def equals(self, other: "Relation") -> bool:
        """Same signature (as sets of sources and targets) and pointwise equal weights."""
        try:
            other_arr = _aligned_to(other, self)
        except SignatureMismatch:
            return False
        return bool(np.all(self.lattice.eq(self.weights, other_arr)))

    def __repr__(self):
        src = ",".join(self.source_names) or "∗"
        tgt = ",".join(self.target_names) or "∗"
        return f"<Relation {src} -> {tgt} over {self.lattice.name}>"


def _check_lattice(*items):
    lattices = [getattr(x, "lattice") for x in items]
    first = lattices[0]
    for lat in lattices[1:]:
        if lat is not first and lat.name != first.name:
            raise LatticeMismatch(f"lattices differ: {first.name} vs {lat.name}")


def _signature(rel: Relation):
    return ({a.name: a for a in rel.sources}, {a.name: a for a in rel.targets})


def _aligned_to(other: Relation, ref: Relation) -> np.ndarray:
    """``other``'s weights in ``ref``'s axis order, checking the signatures agree."""
    rs, rt = _signature(ref)
    os_, ot = _signature(other)
    if set(rs) != set(os_) or set(rt) != set(ot):
        raise SignatureMismatch(
            f"signatures differ: ({','.join(ref.source_names)} -> {','.join(ref.target_names)}) vs "
            f"({','.join(other.source_names)} -> {','.join(other.target_names)})")
    for name, attr in list(rs.items()) + list(rt.items()):
        theirs = os_.get(name) or ot.get(name)
        if theirs.domain != attr.domain:
            raise SignatureMismatch(f"attribute {name!r} has different domains")
    return other.aligned(ref.names)


def expand(rel: Relation, names: Sequence[str]) -> np.ndarray:
    """Weights laid out along ``names`` with singleton axes for attributes ``rel`` lacks."""
    own = rel.names
    missing = set(own) - set(names)
    if missing:
        raise UnknownAttribute(f"layout lacks {', '.join(sorted(missing))}")
    order = [n for n in names if n in own]
    arr = np.transpose(rel.weights, [own.index(n) for n in order])
    shape = [rel.attribute(n).size if n in own else 1 for n in names]
    return arr.reshape(shape)


def compose(f: Relation, g: Relation, flavor: Flavor) -> Relation:
    """Sum-product composition: f first, then g, over the attributes f's targets share with g's sources."""
    _check_lattice(f, g, flavor)
    g_src = {a.name: a for a in g.sources}
    shared = [a for a in f.targets if a.name in g_src]
    for a in shared:
        if a.domain != g_src[a.name].domain:
            raise DomainMismatch(f"shared attribute {a.name!r} has different domains on the two sides")
    shared_names = {a.name for a in shared}
    clash = (set(f.names) & set(g.names)) - shared_names
    if clash:
        raise DuplicateAttribute(
            f"attribute(s) {', '.join(sorted(clash))} appear on both sides without being glued; rename first")
    sources = f.sources + tuple(a for a in g.sources if a.name not in shared_names)
    targets = g.targets + tuple(a for a in f.targets if a.name not in shared_names)
    order = [a.name for a in sources + targets] + [a.name for a in shared]
    prod = flavor.times(expand(f, order), expand(g, order))
    k = len(shared)
    if k:
        prod = flavor.sum(prod, axis=tuple(range(len(order) - k, len(order))))
    full = tuple(a.size for a in sources + targets)
    if prod.shape != full:
        prod = np.broadcast_to(prod, full)
    return Relation._make(sources, targets, np.array(prod), f.lattice)


def external_product(f: Relation, value, flavor: Flavor) -> Relation:
    """Multiply every weight by a truth value."""
    _check_lattice(f, flavor)
    lam = f.lattice.asarray(value)
    if lam.ndim:
        raise LatticeMismatch("external product takes a single truth value")
    return Relation._make(f.sources, f.targets, np.array(flavor.times(f.weights, lam)), f.lattice)


def reverse(f: Relation) -> Relation:
    ns = len(f.sources)
    nt = len(f.targets)
    perm = list(range(ns, ns + nt)) + list(range(ns))
    return Relation._make(f.targets, f.sources, np.transpose(f.weights, perm), f.lattice)


def leq(f: Relation, g: Relation) -> bool:
    _check_lattice(f, g)
    other = _aligned_to(g, f)
    return bool(np.all(f.lattice.leq(f.weights, other)))


def tabulate(f: Relation) -> Relation:
    return Relation._make((), f.attributes, f.weights, f.lattice)


def untabulate(d: Relation, sources: Iterable[str]) -> Relation:
    """Split a relation's attributes into the named sources and the remaining targets."""
    wanted = list(sources)
    attrs = d.attributes
    unknown = set(wanted) - set(d.names)
    if unknown:
        raise UnknownAttribute(f"unknown attribute(s) {', '.join(sorted(unknown))}")
    src = tuple(a for a in attrs if a.name in wanted)
    tgt = tuple(a for a in attrs if a.name not in wanted)
    return Relation._make(src, tgt, d.aligned([a.name for a in src + tgt]), d.lattice)


def canonical_extension(d: Relation, bigger: Sequence[Attribute]) -> Relation:
    """Cylindrical extension of a distribution to a larger attribute set."""
    bigger = tuple(bigger)
    by_name = {a.name: a for a in bigger}
    if len(by_name) != len(bigger):
        raise DuplicateAttribute("duplicate attribute names in the extension target")
    for a in d.attributes:
        if a.name not in by_name:
            raise NotASuperset(f"attribute {a.name!r} is missing from the extension target")
        if by_name[a.name].domain != a.domain:
            raise DomainMismatch(f"attribute {a.name!r} has a different domain in the extension target")
    arr = expand(d, [a.name for a in bigger])
    arr = np.broadcast_to(arr, tuple(a.size for a in bigger))
    return Relation._make((), bigger, np.array(arr), d.lattice)


def sum_out(d: Relation, attrs: Iterable[str], flavor: Flavor) -> Relation:
    """Eliminate the named attributes by flavor-plus."""
    _check_lattice(d, flavor)
    drop = set(a.name if isinstance(a, Attribute) else a for a in attrs)
    unknown = drop - set(d.names)
    if unknown:
        raise UnknownAttribute(f"cannot sum out unknown attribute(s) {', '.join(sorted(unknown))}")
    if not drop:
        return d
    axes = tuple(i for i, n in enumerate(d.names) if n in drop)
    arr = flavor.sum(d.weights, axis=axes)
    src = tuple(a for a in d.sources if a.name not in drop)
    tgt = tuple(a for a in d.targets if a.name not in drop)
    return Relation._make(src, tgt, np.array(arr), d.lattice)


def rename(f: Relation, mapping: Mapping[str, str]) -> Relation:
    unknown = set(mapping) - set(f.names)
    if unknown:
        raise UnknownAttribute(f"cannot rename unknown attribute(s) {', '.join(sorted(unknown))}")

    def ren(a):
        return a.renamed(mapping[a.name]) if a.name in mapping else a

    return Relation(tuple(map(ren, f.sources)), tuple(map(ren, f.targets)), f.weights, f.lattice)


def add(f: Relation, g: Relation, flavor: Flavor) -> Relation:
    """Pointwise flavor-plus of two parallel relations."""
    _check_lattice(f, g, flavor)
    return Relation._make(f.sources, f.targets, np.array(flavor.plus(f.weights, _aligned_to(g, f))), f.lattice)


def identity(attrs: Sequence[Attribute], lattice: Lattice, targets: Sequence[Attribute] | None = None) -> Relation:
    """⊤ on the diagonal, ⊥ elsewhere; targets default to primed copies of ``attrs``."""
    attrs = tuple(attrs)
    targets = prime(attrs) if targets is None else tuple(targets)
    if [a.domain for a in attrs] != [a.domain for a in targets]:
        raise DomainMismatch("identity needs matching domains on both sides")
    n = int(np.prod([a.size for a in attrs], dtype=np.int64))
    mat = lattice.full((n, n), lattice.bottom)
    mat[np.arange(n), np.arange(n)] = lattice.top
    shape = tuple(a.size for a in attrs + targets)
    return Relation._make(attrs, targets, mat.reshape(shape), lattice)


def reindex(d: Relation, attrs: Sequence[Attribute]) -> Relation:
    """Move a relation onto new domains for the same attribute names, by value.

    Every tuple with a non-⊥ weight must have its values in the new domains.
    """
    new = {a.name: a for a in attrs}
    missing = set(d.names) - set(new)
    if missing:
        raise SignatureMismatch(f"no new domain for {', '.join(sorted(missing))}")
    src = tuple(new[a.name] for a in d.sources)
    tgt = tuple(new[a.name] for a in d.targets)
    lat = d.lattice
    arr = lat.full(tuple(a.size for a in src + tgt), lat.bottom, like=d.weights)
    for values, w in d.items():
        idx = tuple(a.index(v) for a, v in zip(src + tgt, values))
        arr[idx] = lat.join(arr[idx], w) if lat.dtype.names is None else w
    return Relation._make(src, tgt, arr, lat)


def matmul(a: np.ndarray, b: np.ndarray, flavor: Flavor) -> np.ndarray:
    """Semiring matrix product of two 2-D weight arrays."""
    prod = flavor.times(a[:, :, None], b[None, :, :])
    return flavor.sum(prod, axis=1)


def contract(factors: Sequence[Relation], keep: Sequence[Attribute], flavor: Flavor,
             order: Sequence[Attribute] | None = None) -> Relation:
    """Flavor-times of all factors, flavor-plus over every attribute not in ``keep``.

    With a distributive flavor the eliminated attributes are summed out one at a
    time in ``order`` (default: first appearance across the factors). Otherwise
    the full product is materialized before summing.
    """
    lat = flavor.lattice
    for f in factors:
        _check_lattice(f, flavor)
    attrs: dict[str, Attribute] = {}
    for a in list(order or []) + [a for f in factors for a in f.attributes] + list(keep):
        prev = attrs.setdefault(a.name, a)
        if prev.domain != a.domain:
            raise DomainMismatch(f"attribute {a.name!r} appears with different domains")
    keep = tuple(keep)
    keep_names = {a.name for a in keep}
    elim = [n for n in attrs if n not in keep_names]
    tables = [tabulate(f) for f in factors]
    # an attribute mentioned by no factor still ranges over its domain
    mentioned = {n for t in tables for n in t.names}
    for n in elim:
        if n not in mentioned:
            tables.append(Relation.top((), (attrs[n],), lat))
    if not flavor.distributive:
        names = list(attrs)
        full = _product(tables, names, flavor, lat)
        joint = Relation._make((), tuple(attrs[n] for n in names), full, lat)
        return _finish(sum_out(joint, elim, flavor), keep, lat)
    for name in elim:
        touching = [t for t in tables if name in t.names]
        rest = [t for t in tables if name not in t.names]
        names = []
        for t in touching:
            names.extend(n for n in t.names if n not in names)
        joint = Relation._make((), tuple(attrs[n] for n in names), _product(touching, names, flavor, lat), lat)
        tables = rest + [sum_out(joint, [name], flavor)]
    names = []
    for t in tables:
        names.extend(n for n in t.names if n not in names)
    joint = Relation._make((), tuple(attrs[n] for n in names), _product(tables, names, flavor, lat), lat)
    return _finish(joint, keep, lat)


def _product(tables, names, flavor, lat):
    shape = tuple(next(t.attribute(n).size for t in tables if n in t.names) for n in names)
    out = None
    for t in tables:
        part = expand(t, names)
        out = part if out is None else flavor.times(out, part)
    if out is None:
        return lat.full(shape, lat.top)
    return np.array(np.broadcast_to(out, shape))


def _finish(joint: Relation, keep, lat) -> Relation:
    return canonical_extension(joint, keep) if keep else joint
