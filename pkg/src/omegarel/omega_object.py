"""Ω-objects (carrier, membership distribution, similarity) and the checks around them.

Endo-relations on a carrier are stored with the carrier as sources and primed
copies of the carrier attributes as targets. Most checks here run on the
matrix view of relations, with rows and columns ordered by the carrier.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import NonPositiveDefiniteKernel, SignatureMismatch
from .lattice import Flavor, Lattice, make_lattice
from .relation import Attribute, Relation, identity, matmul, prime


def _names(attrs):
    return [a.name for a in attrs]


def _unravel(attrs: Sequence[Attribute], flat: int) -> tuple:
    if not attrs:
        return ()
    idx = np.unravel_index(flat, tuple(a.size for a in attrs))
    vals = tuple(a.domain[int(i)] for a, i in zip(attrs, idx))
    return vals[0] if len(vals) == 1 else vals


def _check_domains(expected: Sequence[Attribute], rel: Relation, what: str):
    for a in expected:
        if rel.attribute(a.name).domain != a.domain:
            raise SignatureMismatch(f"{what}: attribute {a.name!r} has a different domain")


def vector(d: Relation, carrier: Sequence[Attribute]) -> np.ndarray:
    """Flat weight vector of a distribution, ordered by ``carrier``."""
    if d.sources:
        raise SignatureMismatch("expected a distribution (no source attributes)")
    if sorted(d.names) != sorted(_names(carrier)):
        raise SignatureMismatch(
            f"distribution over ({', '.join(d.names)}) does not match carrier ({', '.join(_names(carrier))})")
    _check_domains(carrier, d, "distribution")
    return d.aligned(_names(carrier)).reshape(-1)


def endo_matrix(alpha: Relation, carrier: Sequence[Attribute]) -> np.ndarray:
    """Square matrix of an endo-relation on ``carrier``.

    Targets are matched to sources by priming (``A`` -> ``A'``) when possible,
    otherwise positionally.
    """
    carrier = tuple(carrier)
    src = _names(carrier)
    if sorted(alpha.source_names) != sorted(src) or len(alpha.targets) != len(carrier):
        raise SignatureMismatch(
            f"relation ({','.join(alpha.source_names)} -> {','.join(alpha.target_names)}) "
            f"is not an endo-relation on ({','.join(src)})")
    _check_domains(carrier, alpha, "similarity")
    primed = [n + "'" for n in src]
    if sorted(alpha.target_names) == sorted(primed):
        tgt = primed
    else:
        pos = {n: i for i, n in enumerate(alpha.source_names)}
        tgt = [alpha.target_names[pos[n]] for n in src]
    for a, t in zip(carrier, tgt):
        if alpha.attribute(t).domain != a.domain:
            raise SignatureMismatch(f"similarity target {t!r} has a different domain from {a.name!r}")
    n = int(np.prod([a.size for a in carrier], dtype=np.int64))
    return alpha.aligned(src + tgt).reshape(n, n)


def _endo_carrier(alpha: Relation) -> tuple[Attribute, ...]:
    if len(alpha.sources) != len(alpha.targets):
        raise SignatureMismatch("not an endo-relation: source and target counts differ")
    return alpha.sources


def identity_matrix(n: int, lattice: Lattice, like=None) -> np.ndarray:
    mat = lattice.full((n, n), lattice.bottom, like=like)
    mat[np.arange(n), np.arange(n)] = lattice.top
    return mat


def _first_bad(mask: np.ndarray):
    bad = np.argwhere(~np.asarray(mask, dtype=bool))
    return None if bad.size == 0 else tuple(int(i) for i in bad[0])


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OmegaObject:
    carrier: tuple[Attribute, ...]
    dist: Relation
    sim: Relation

    def __post_init__(self):
        carrier = tuple(self.carrier)
        object.__setattr__(self, "carrier", carrier)
        if self.dist.lattice is not self.sim.lattice and self.dist.lattice.name != self.sim.lattice.name:
            raise SignatureMismatch("distribution and similarity use different lattices")
        vector(self.dist, carrier)
        endo_matrix(self.sim, carrier)

    @classmethod
    def make(cls, carrier: Sequence[Attribute], lattice: Lattice, dist: Relation | None = None,
             sim: Relation | None = None) -> "OmegaObject":
        """Defaults: ⊤ membership and the identity similarity."""
        carrier = tuple(carrier)
        if dist is None:
            dist = Relation.top((), carrier, lattice)
        if sim is None:
            sim = identity(carrier, lattice)
        return cls(carrier, dist, sim)

    @property
    def lattice(self) -> Lattice:
        return self.dist.lattice

    @property
    def names(self) -> list[str]:
        return _names(self.carrier)

    def dist_vector(self) -> np.ndarray:
        return vector(self.dist, self.carrier)

    def sim_matrix(self) -> np.ndarray:
        return endo_matrix(self.sim, self.carrier)

    def renamed(self, mapping: Mapping[str, str]) -> "OmegaObject":
        """Same object with carrier attributes renamed (similarity targets follow with a prime)."""
        carrier = tuple(a.renamed(mapping.get(a.name, a.name)) for a in self.carrier)
        n = len(carrier)
        dist = Relation((), carrier, self.dist_vector().reshape([a.size for a in carrier]), self.lattice)
        sim = Relation(carrier, prime(carrier), self.sim_matrix().reshape([a.size for a in carrier] * 2),
                       self.lattice) if n else identity(carrier, self.lattice)
        return OmegaObject(carrier, dist, sim)


# ---------------------------------------------------------------------------
# similarity axioms


@dataclass
class SimilarityReport:
    reflexive: bool
    symmetric: bool
    transitive: bool
    equivalence: bool
    failures: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.reflexive and self.symmetric and self.transitive

    def __bool__(self):
        return self.ok


def check_similarity(alpha: Relation, flavor: Flavor) -> SimilarityReport:
    """Report reflexivity, symmetry, transitivity and whether α∘α = α."""
    carrier = _endo_carrier(alpha)
    mat = endo_matrix(alpha, carrier)
    lat = alpha.lattice
    failures = {}
    diag = np.diagonal(mat)
    pos = _first_bad(lat.eq(diag, lat.top))
    if pos is not None:
        a = _unravel(carrier, pos[0])
        failures["reflexive"] = (a, a)
    pos = _first_bad(lat.eq(mat, mat.T))
    if pos is not None:
        failures["symmetric"] = (_unravel(carrier, pos[0]), _unravel(carrier, pos[1]))
    sq = matmul(mat, mat, flavor)
    pos = _first_bad(lat.leq(sq, mat))
    if pos is not None:
        failures["transitive"] = (_unravel(carrier, pos[0]), _unravel(carrier, pos[1]))
    equivalence = bool(np.all(lat.eq(sq, mat)))
    return SimilarityReport("reflexive" not in failures, "symmetric" not in failures,
                            "transitive" not in failures, equivalence, failures)


def similarity_from_function(attr: Attribute, fn: Callable, lattice: Lattice | None = None) -> Relation:
    """Endo-relation on one attribute with weight ``fn(a, b)``."""
    lattice = lattice or make_lattice("product")
    mat = [[fn(a, b) for b in attr.domain] for a in attr.domain]
    return Relation((attr,), (attr.primed(),), mat, lattice)


def product_similarity(sims: Sequence[Relation], flavor: Flavor) -> Relation:
    """Similarity on the concatenated carriers, weight = flavor-times of the component weights."""
    lat = flavor.lattice
    carriers = [_endo_carrier(s) for s in sims]
    carrier = tuple(a for c in carriers for a in c)
    sizes = [a.size for a in carrier]
    out = lat.full(sizes + sizes, lat.top)
    offset = 0
    k = len(carrier)
    for s, c in zip(sims, carriers):
        m = endo_matrix(s, c).reshape([a.size for a in c] * 2)
        shape = [1] * (2 * k)
        for j, a in enumerate(c):
            shape[offset + j] = a.size
            shape[k + offset + j] = a.size
        out = flavor.times(out, m.reshape(shape))
        offset += len(c)
    return Relation(carrier, prime(carrier), out, lat)


def _resolve_similarity(sim, carrier, flavor) -> tuple[str, object]:
    """Normalize the accepted similarity forms to ('identity'|'full'|'factored', payload)."""
    if sim is None:
        return "identity", None
    if isinstance(sim, Relation):
        return "full", endo_matrix(sim, carrier)
    if isinstance(sim, Mapping):
        sims = []
        for a in carrier:
            s = sim.get(a.name)
            sims.append(s if s is not None else identity((a,), flavor.lattice))
        sim = sims
    sims = list(sim)
    names = [n for s in sims for n in s.source_names]
    if sorted(names) != sorted(_names(carrier)):
        raise SignatureMismatch("component similarities do not cover the carrier exactly once")
    return "factored", sims


def lambda_similar(x: Relation, y: Relation, sim, flavor: Flavor):
    """Degree to which two distributions agree: plus over (a,b) of y(b)×α(a,b)×x(a).

    ``sim`` may be ``None`` (identity), one similarity on the whole carrier, or a
    sequence / name-keyed mapping of per-attribute similarities combined as a
    product similarity.
    """
    carrier = x.attributes
    if x.sources or y.sources:
        raise SignatureMismatch("lambda_similar compares distributions")
    xv = vector(x, carrier)
    yv = vector(y, carrier)
    lat = flavor.lattice
    kind, payload = _resolve_similarity(sim, carrier, flavor)
    if kind == "identity":
        return lat.scalar(flavor.sum(flavor.times(xv, yv)))
    if kind == "full":
        mat = payload
        terms = flavor.times(flavor.times(xv[:, None], mat), yv[None, :])
        return lat.scalar(flavor.sum(terms))
    sims = payload
    if not flavor.distributive:
        full = product_similarity(sims, flavor)
        order = [n for s in sims for n in s.source_names]
        xs = vector(x, [x.attribute(n) for n in order])
        ys = vector(y, [x.attribute(n) for n in order])
        mat = endo_matrix(full, full.sources)
        terms = flavor.times(flavor.times(xs[:, None], mat), ys[None, :])
        return lat.scalar(flavor.sum(terms))
    # push x through each component similarity in turn, then pair with y
    names = _names(carrier)
    t = x.aligned(names)
    for s in sims:
        comp = _endo_carrier(s)
        axes = [names.index(a.name) for a in comp]
        m = endo_matrix(s, comp)
        moved = np.moveaxis(t, axes, range(len(axes)))
        rest = moved.shape[len(axes):]
        flat = moved.reshape(m.shape[0], -1)
        pushed = matmul(m.T, flat, flavor)
        t = np.moveaxis(pushed.reshape(tuple(a.size for a in comp) + rest), range(len(axes)), axes)
    terms = flavor.times(t, y.aligned(names))
    return lat.scalar(flavor.sum(terms))


def lambda_similar_relations(f: Relation, g: Relation, sim, flavor: Flavor):
    """Agreement degree of two parallel relations through their tabulations."""
    if sorted(f.source_names) != sorted(g.source_names) or sorted(f.target_names) != sorted(g.target_names):
        raise SignatureMismatch("lambda_similar_relations needs parallel relations")
    fx = Relation._make((), f.attributes, f.weights, f.lattice)
    gy = Relation._make((), f.attributes, g.aligned(f.names), g.lattice)
    for a in f.attributes:
        if g.attribute(a.name).domain != a.domain:
            raise SignatureMismatch(f"attribute {a.name!r} has different domains")
    return lambda_similar(fx, gy, sim, flavor)


# ---------------------------------------------------------------------------
# bimodules, maps, refinement


@dataclass
class BimoduleReport:
    membership: bool
    source_similarity: bool
    target_similarity: bool
    failures: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.membership and self.source_similarity and self.target_similarity

    def __bool__(self):
        return self.ok


def _relation_matrix(f: Relation, src: Sequence[Attribute], tgt: Sequence[Attribute]) -> np.ndarray:
    if sorted(f.source_names) != sorted(_names(src)) or sorted(f.target_names) != sorted(_names(tgt)):
        raise SignatureMismatch(
            f"relation ({','.join(f.source_names)} -> {','.join(f.target_names)}) does not run from "
            f"({','.join(_names(src))}) to ({','.join(_names(tgt))})")
    _check_domains(tuple(src) + tuple(tgt), f, "relation")
    rows = int(np.prod([a.size for a in src], dtype=np.int64))
    cols = int(np.prod([a.size for a in tgt], dtype=np.int64))
    return f.aligned(_names(src) + _names(tgt)).reshape(rows, cols)


def check_bimodule(f: Relation, src: OmegaObject, tgt: OmegaObject, flavor: Flavor) -> BimoduleReport:
    """Check that f pushes x̄ below ȳ and absorbs both similarities (α then f, f then β)."""
    lat = flavor.lattice
    F = _relation_matrix(f, src.carrier, tgt.carrier)
    x = src.dist_vector()
    y = tgt.dist_vector()
    failures = {}
    pushed = matmul(x[None, :], F, flavor)[0]
    pos = _first_bad(lat.leq(pushed, y))
    if pos is not None:
        failures["membership"] = (_unravel(tgt.carrier, pos[0]),)
    pos = _first_bad(lat.leq(matmul(src.sim_matrix(), F, flavor), F))
    if pos is not None:
        failures["source_similarity"] = (_unravel(src.carrier, pos[0]), _unravel(tgt.carrier, pos[1]))
    pos = _first_bad(lat.leq(matmul(F, tgt.sim_matrix(), flavor), F))
    if pos is not None:
        failures["target_similarity"] = (_unravel(src.carrier, pos[0]), _unravel(tgt.carrier, pos[1]))
    return BimoduleReport("membership" not in failures, "source_similarity" not in failures,
                          "target_similarity" not in failures, failures)


def check_extensional(obj: OmegaObject, flavor: Flavor) -> bool:
    """Optional side condition: pushing x̄ through α stays below x̄."""
    x = obj.dist_vector()
    pushed = matmul(x[None, :], obj.sim_matrix(), flavor)[0]
    return bool(np.all(flavor.lattice.leq(pushed, x)))


@dataclass
class MapReport:
    entire: bool
    simple: bool
    source_composite: np.ndarray
    target_composite: np.ndarray

    @property
    def is_map(self) -> bool:
        return self.entire and self.simple

    def __bool__(self):
        return self.is_map


def classify_map(f: Relation, flavor: Flavor) -> MapReport:
    """Entire: identity ≤ f then f° on the sources. Simple: f° then f ≤ identity on the targets."""
    lat = flavor.lattice
    F = f.matrix()
    src_comp = matmul(F, F.T, flavor)
    tgt_comp = matmul(F.T, F, flavor)
    entire = bool(np.all(lat.leq(identity_matrix(F.shape[0], lat, like=F), src_comp)))
    simple = bool(np.all(lat.leq(tgt_comp, identity_matrix(F.shape[1], lat, like=F))))
    return MapReport(entire, simple, src_comp, tgt_comp)


@dataclass
class RefinementReport:
    faithful: bool
    membership: bool
    similarity: bool
    failures: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.faithful and self.membership and self.similarity

    def __bool__(self):
        return self.ok


def check_refinement(f: Relation, frm: OmegaObject, to: OmegaObject, flavor: Flavor) -> RefinementReport:
    """Check that f presents ``to`` as a refinement (quotient-like image) of ``frm``.

    Conditions: f° then f is the identity on the target carrier, pushing x̄
    through f gives exactly ȳ, and f° then α then f gives exactly β.
    """
    lat = flavor.lattice
    F = _relation_matrix(f, frm.carrier, to.carrier)
    failures = {}
    back = matmul(F.T, F, flavor)
    pos = _first_bad(lat.eq(back, identity_matrix(F.shape[1], lat, like=F)))
    if pos is not None:
        failures["faithful"] = (_unravel(to.carrier, pos[0]), _unravel(to.carrier, pos[1]))
    pushed = matmul(frm.dist_vector()[None, :], F, flavor)[0]
    pos = _first_bad(lat.eq(pushed, to.dist_vector()))
    if pos is not None:
        failures["membership"] = (_unravel(to.carrier, pos[0]),)
    induced = matmul(matmul(F.T, frm.sim_matrix(), flavor), F, flavor)
    pos = _first_bad(lat.eq(induced, to.sim_matrix()))
    if pos is not None:
        failures["similarity"] = (_unravel(to.carrier, pos[0]), _unravel(to.carrier, pos[1]))
    return RefinementReport("faithful" not in failures, "membership" not in failures,
                            "similarity" not in failures, failures)


# ---------------------------------------------------------------------------
# kernel similarities


def _kernel(name: str, params: Mapping[str, float]) -> Callable[[np.ndarray, np.ndarray], float]:
    key = name.strip().lower().replace("_", "-")
    if key == "linear":
        return lambda u, v: float(u @ v)
    if key in ("normalized-linear", "cosine"):
        def cos(u, v):
            nu = np.linalg.norm(u)
            nv = np.linalg.norm(v)
            if nu == 0 or nv == 0:
                raise ValueError("normalized-linear kernel is undefined at the zero vector")
            return float(u @ v) / (nu * nv)
        return cos
    if key == "polynomial":
        shift = float(params.get("l", 1.0))
        power = float(params.get("p", 2))
        return lambda u, v: float((u @ v + shift) ** power)
    if key in ("gaussian-rbf", "rbf", "gaussian"):
        width = float(params.get("l", 1.0))
        return lambda u, v: math.exp(-width * float((u - v) @ (u - v)))
    raise ValueError(f"unknown kernel {name!r}")


def kernel_distance(points: Attribute, kernel: str, **params) -> np.ndarray:
    """Matrix of kernel-induced distances sqrt(k(x,x) - 2k(x,y) + k(y,y))."""
    k = _kernel(kernel, params)
    vecs = [np.atleast_1d(np.asarray(p, dtype=float)) for p in points.domain]
    n = len(vecs)
    gram = np.array([[k(vecs[i], vecs[j]) for j in range(n)] for i in range(n)])
    sq = np.diag(gram)[:, None] - 2 * gram + np.diag(gram)[None, :]
    scale = max(1.0, float(np.max(np.abs(gram))))
    noisy = sq < -1e-12 * scale
    if noisy.any():
        i, j = np.argwhere(noisy)[0]
        warnings.warn(
            f"kernel {kernel!r} gave a negative squared distance {sq[i, j]:.3g} between "
            f"{points.domain[i]!r} and {points.domain[j]!r}; clamped to 0",
            NonPositiveDefiniteKernel, stacklevel=2)
    return np.sqrt(np.clip(sq, 0.0, None))


def kernel_similarity(points: Attribute, kernel: str, base: float = math.e,
                      lattice: Lattice | None = None, **params) -> Relation:
    """Similarity base**(-d) for the distance d induced by a kernel on numeric points."""
    if base <= 1:
        raise ValueError("the base of a kernel similarity must exceed 1")
    lattice = lattice or make_lattice("product")
    dist = kernel_distance(points, kernel, **params)
    sim = np.power(float(base), -dist)
    return Relation((points,), (points.primed(),), np.clip(sim, 0.0, 1.0), lattice)
