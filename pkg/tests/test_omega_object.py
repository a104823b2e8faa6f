import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omegarel.errors import NonPositiveDefiniteKernel, SignatureMismatch
from omegarel.lattice import boolean_lattice, make_flavor, make_lattice
from omegarel.omega_object import (
    OmegaObject, check_bimodule, check_extensional, check_refinement, check_similarity, classify_map,
    kernel_distance, kernel_similarity, lambda_similar, lambda_similar_relations, product_similarity,
    similarity_from_function,
)
from omegarel.relation import Attribute, Relation, compose, identity, matmul

PROD = make_lattice("product")
PF = make_flavor(PROD, "tensor", "join")
BOOL = boolean_lattice()
BF = make_flavor(BOOL, "meet", "join")
A = Attribute("A", (0, 1, 2))
B = Attribute("B", ("p", "q"))


def dist(attr, weights, lat=PROD):
    return Relation((), (attr,), np.asarray(weights), lat)


def sim(attr, mat, lat=PROD):
    return Relation((attr,), (attr.primed(),), np.asarray(mat), lat)


# -- similarity axioms --------------------------------------------------------------

def test_identity_is_equivalence():
    rep = check_similarity(identity([A], PROD), PF)
    assert rep.ok and rep.equivalence


def test_asymmetry_witness():
    rep = check_similarity(sim(B, [[1, 0.9], [0.8, 1]]), PF)
    assert not rep.symmetric
    assert rep.failures["symmetric"] in {("p", "q"), ("q", "p")}


def test_reflexivity_witness():
    rep = check_similarity(sim(B, [[1, 0], [0, 0.5]]), PF)
    assert not rep.reflexive and rep.failures["reflexive"] == ("q", "q")


def test_squared_distance_gaussian_on_three_points():
    # independent oracle: compare every direct weight with the best two-step path
    pts = (0.0, 0.5, 1.0)
    X = Attribute("X", pts)

    def s(a, b):
        return math.exp(-((a - b) ** 2))

    oracle = all(s(a, c) >= max(s(a, b) * s(b, c) for b in pts) - 1e-12 for a in pts for c in pts)
    rep = check_similarity(similarity_from_function(X, s), PF)
    assert rep.reflexive and rep.symmetric
    assert rep.transitive == oracle
    assert oracle is False  # e^-1 < e^-0.25 · e^-0.25
    assert rep.failures["transitive"] in {(0.0, 1.0), (1.0, 0.0)}


def test_product_similarity_weights():
    sa = sim(Attribute("A", (0, 1)), [[1, 0.5], [0.5, 1]])
    sb = sim(B, [[1, 0.25], [0.25, 1]])
    ps = product_similarity([sa, sb], PF)
    assert ps.source_names == ("A", "B")
    assert ps[(0, "p", 1, "q")] == 0.125
    assert check_similarity(ps, PF).ok


# -- similarity of distributions --------------------------------------------------------

def test_point_distributions():
    x = dist(A, [0, 1, 0])
    y = dist(A, [0, 0, 1])
    assert float(lambda_similar(x, x, None, PF)) == 1.0
    assert float(lambda_similar(x, y, None, PF)) == 0.0


def test_lambda_similar_value():
    X = Attribute("X", (0, 1))
    assert float(lambda_similar(dist(X, [1, 0.5]), dist(X, [0.5, 1]), None, PF)) == 0.5


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_lambda_similar_symmetry_and_routes(seed):
    rng = np.random.default_rng(seed)
    carrier = (Attribute("A", (0, 1, 2)), B)
    x = Relation((), carrier, rng.integers(0, 9, size=(3, 2)) / 8, PROD)
    y = Relation((), carrier, rng.integers(0, 9, size=(3, 2)) / 8, PROD)
    sa = similarity_from_function(carrier[0], lambda a, b: 0.5 ** abs(a - b))
    sb = sim(B, [[1, 0.25], [0.25, 1]])
    full = product_similarity([sa, sb], PF)
    via_full = float(lambda_similar(x, y, full, PF))
    via_parts = float(lambda_similar(x, y, {"A": sa, "B": sb}, PF))
    assert math.isclose(via_full, via_parts, abs_tol=1e-12)
    assert math.isclose(via_full, float(lambda_similar(y, x, full, PF)), abs_tol=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_lambda_similar_chain_bound_through_a_point(seed):
    rng = np.random.default_rng(seed)
    s = similarity_from_function(A, lambda a, b: 0.5 ** abs(a - b))
    x = dist(A, rng.integers(0, 9, size=3) / 8)
    z = dist(A, rng.integers(0, 9, size=3) / 8)
    y = dist(A, np.eye(3)[int(rng.integers(3))])
    lhs = PF.times(lambda_similar(x, y, s, PF), lambda_similar(y, z, s, PF))
    assert float(lhs) <= float(lambda_similar(x, z, s, PF)) + 1e-12


def test_lambda_similar_rejects_relations():
    f = Relation.bottom((A,), (B,), PROD)
    with pytest.raises(SignatureMismatch):
        lambda_similar(f, f, None, PF)


def test_relation_similarity_crisp():
    f = Relation.from_function([A], [B], lambda a: "p" if a < 2 else "q", BOOL)
    g = Relation.from_function([A], [B], lambda a: "q" if a < 2 else "p", BOOL)
    assert int(lambda_similar_relations(f, f, None, BF)) == 1
    assert int(lambda_similar_relations(f, g, None, BF)) == 0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_relation_similarity_symmetric(seed):
    rng = np.random.default_rng(seed)
    f = Relation((A,), (B,), rng.integers(0, 9, size=(3, 2)) / 8, PROD)
    g = Relation((A,), (B,), rng.integers(0, 9, size=(3, 2)) / 8, PROD)
    assert lambda_similar_relations(f, g, None, PF) == lambda_similar_relations(g, f, None, PF)


# -- bimodules ---------------------------------------------------------------------------

def test_identity_bimodule_with_identity_similarity():
    obj = OmegaObject.make([A], PROD, dist(A, [1, 0.5, 0.25]))
    ident = identity([A], PROD, targets=[A.renamed("A2")])
    tgt = obj.renamed({"A": "A2"})
    assert check_bimodule(ident, obj, tgt, PF).ok


def test_identity_is_not_a_bimodule_for_a_coarser_similarity():
    s = similarity_from_function(A, lambda a, b: 0.5 ** abs(a - b))
    obj = OmegaObject.make([A], PROD, sim=s)
    tgt = obj.renamed({"A": "A2"})
    ident = identity([A], PROD, targets=[A.renamed("A2")])
    rep = check_bimodule(ident, obj, tgt, PF)
    assert rep.membership and not rep.source_similarity


def test_top_relation_breaks_membership():
    X = OmegaObject.make([A], PROD)
    Y = OmegaObject.make([B], PROD, dist(B, [1, 0.5]))
    rep = check_bimodule(Relation.top((A,), (B,), PROD), X, Y, PF)
    assert not rep.membership and rep.failures["membership"] == ("q",)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_bimodules_compose(seed):
    rng = np.random.default_rng(seed)
    attrs = [Attribute(n, tuple(range(int(rng.integers(1, 4))))) for n in "XYZ"]
    sims = [similarity_from_function(a, lambda u, v: 0.5 ** abs(u - v)) for a in attrs]
    objs = [OmegaObject.make([a], PROD, sim=s) for a, s in zip(attrs, sims)]

    def absorbing(i, j):
        F = rng.integers(0, 9, size=(attrs[i].size, attrs[j].size)) / 8
        F = matmul(matmul(objs[i].sim_matrix(), F, PF), objs[j].sim_matrix(), PF)
        return Relation((attrs[i],), (attrs[j],), F, PROD)

    f, g = absorbing(0, 1), absorbing(1, 2)
    assert check_bimodule(f, objs[0], objs[1], PF).ok
    assert check_bimodule(g, objs[1], objs[2], PF).ok
    assert check_bimodule(compose(f, g, PF), objs[0], objs[2], PF).ok


def test_extensional():
    s = similarity_from_function(A, lambda a, b: 0.5 ** abs(a - b))
    assert check_extensional(OmegaObject.make([A], PROD, sim=s), PF)
    assert not check_extensional(OmegaObject.make([A], PROD, dist(A, [1, 0, 0]), s), PF)


# -- maps -----------------------------------------------------------------------------------

def test_boolean_function_is_map():
    f = Relation.from_function([A], [B], lambda a: "p" if a else "q", BOOL)
    assert classify_map(f, BF).is_map


def test_scalar_map_iff_top():
    for lam, expected in [(1.0, True), (0.5, False), (0.0, False)]:
        scalar = Relation((), (), np.array(lam), PROD)
        assert classify_map(scalar, PF).is_map is expected


def test_non_function_relation():
    f = Relation((A,), (B,), np.array([[1, 1], [0, 1], [1, 0]]), BOOL)
    rep = classify_map(f, BF)
    assert rep.entire and not rep.simple


# -- refinement -----------------------------------------------------------------------------

def _quotient(classes, extra=0):
    Q = Attribute("Q", tuple(range(len(classes) + extra)))
    A4 = Attribute("A", (0, 1, 2, 3))
    which = {a: k for k, cls in enumerate(classes) for a in cls}
    f = Relation.from_function([A4], [Q], lambda a: which[a], BOOL)
    R = np.array([[1 if which[a] == which[b] else 0 for b in A4.domain] for a in A4.domain])
    frm = OmegaObject.make([A4], BOOL, sim=Relation((A4,), (A4.primed(),), R, BOOL))
    to = OmegaObject.make([Q], BOOL)
    return f, frm, to


def test_quotient_is_refinement():
    for classes in ([{0, 1}, {2}, {3}], [{0, 1, 2, 3}], [{0}, {1}, {2}, {3}], [{0, 3}, {1, 2}]):
        f, frm, to = _quotient(classes)
        assert check_refinement(f, frm, to, BF).ok


def test_class_not_hit_fails_with_witness():
    f, frm, to = _quotient([{0, 1}, {2, 3}], extra=1)
    rep = check_refinement(f, frm, to, BF)
    assert not rep.similarity and rep.failures["similarity"] == (2, 2)


def test_identity_refines_itself():
    obj = OmegaObject.make([A], PROD, dist(A, [1, 0.5, 0.25]))
    tgt = obj.renamed({"A": "A2"})
    assert check_refinement(identity([A], PROD, targets=[A.renamed("A2")]), obj, tgt, PF).ok


# -- kernels -----------------------------------------------------------------------------

def test_kernel_similarity_is_reflexive():
    X = Attribute("X", (0.0, 0.3, 1.0, 2.5))
    s = kernel_similarity(X, "gaussian-rbf", l=0.7)
    assert np.allclose(np.diagonal(s.matrix()), 1.0)


def test_rbf_distance_closed_form():
    pts = (0.0, 0.4, 1.5)
    X = Attribute("X", pts)
    d = kernel_distance(X, "gaussian-rbf", l=2.0)
    for (i, a), (j, b) in itertools.product(enumerate(pts), repeat=2):
        assert math.isclose(d[i, j], math.sqrt(max(0.0, 2 - 2 * math.exp(-2.0 * (a - b) ** 2))), abs_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(pts=st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=6, unique=True),
       kernel=st.sampled_from(["gaussian-rbf", "linear"]))
def test_kernel_similarity_transitive_under_product(pts, kernel):
    X = Attribute("X", tuple(pts))
    s = kernel_similarity(X, kernel, base=2.0)
    m = s.matrix()
    for i, j, k in itertools.product(range(len(pts)), repeat=3):
        assert m[i, k] >= m[i, j] * m[j, k] - 1e-9


def test_non_positive_kernel_warns():
    X = Attribute("X", (0.0, 1.0))
    with pytest.warns(NonPositiveDefiniteKernel):
        kernel_distance(X, "polynomial", l=-1.0, p=2)


def test_kernel_base_must_exceed_one():
    with pytest.raises(ValueError):
        kernel_similarity(Attribute("X", (0.0, 1.0)), "linear", base=1.0)
