import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omegarel import data_path, parse_spec
from omegarel.diagram import (
    Arrow, Cone, MultiDiagram, MultiGraph, commutativity_degree, cone_distribution, glue, lambda_description,
    lambda_limit, restricted_limit, vague_limit,
)
from omegarel.errors import (
    ColumnMismatch, DanglingVertexObject, DuplicateAttribute, InconsistentLattice, LegMissing, NotInjective,
    SignatureMismatch, UnknownVertex,
)
from omegarel.lattice import boolean_lattice, make_flavor, make_lattice
from omegarel.omega_object import OmegaObject
from omegarel.relation import Attribute, Relation

PROD = make_lattice("product")
PF = make_flavor(PROD, "tensor", "join")
BOOL = boolean_lattice()
BF = make_flavor(BOOL, "meet", "join")


def attr(name, n):
    return Attribute(name, tuple(range(n)))


def objects(attrs, lat=PROD, dists=None):
    dists = dists or {}
    return {a.name: OmegaObject.make([a], lat, dists.get(a.name)) for a in attrs}


# -- graphs -------------------------------------------------------------------------

def test_default_sources_and_targets():
    g = MultiGraph(["X", "Y", "Z"], [Arrow("f", ("X",), ("Y",)), Arrow("g", ("Y",), ("Z",))])
    assert g.sources == ("X",) and g.targets == ("Z",)
    assert MultiGraph(["X"]).isolated == ("X",)


def test_arrow_validation():
    with pytest.raises(ValueError):
        Arrow("f", ("X",), ("X",))
    with pytest.raises(ValueError):
        Arrow("f", (), ())


def test_glue_with_empty_graph():
    g = MultiGraph(["X", "Y"], [Arrow("f", ("X",), ("Y",))])
    assert glue(g, MultiGraph([])) == g


def test_glue_chain():
    g1 = MultiGraph(["X", "Y"], [Arrow("f", ("X",), ("Y",))])
    g2 = MultiGraph(["Y", "Z"], [Arrow("g", ("Y",), ("Z",))])
    out = glue(g1, g2)
    assert out.vertices == ("X", "Y", "Z")
    assert out.sources == ("X",) and out.targets == ("Z",)


def test_glue_disjoint_union():
    g1 = MultiGraph(["X", "Y"], [Arrow("f", ("X",), ("Y",))])
    g2 = MultiGraph(["U", "V"], [Arrow("g", ("U",), ("V",))])
    out = glue(g1, g2)
    assert set(out.sources) == {"X", "U"} and set(out.targets) == {"Y", "V"}


def test_glue_renames_unglued_duplicates():
    g1 = MultiGraph(["X", "Y"], [Arrow("f", ("X",), ("Y",))])
    g2 = MultiGraph(["X", "Z"], [Arrow("f", ("X",), ("Z",))])
    out = glue(g1, g2)
    assert "X#2" in out.vertices
    assert {a.label for a in out.arrows} == {"f", "f#2"}
    assert out.arrow("f#2").sources == ("X#2",)


# -- diagram validation ---------------------------------------------------------------

def test_validation_errors():
    A, B = attr("A", 2), attr("B", 2)
    objs = objects([A, B])
    with pytest.raises(SignatureMismatch):
        MultiDiagram.build(PF, objs, {"f": (["A"], ["B"], Relation.bottom([A], [attr("B", 3)], PROD))})
    with pytest.raises(InconsistentLattice):
        MultiDiagram.build(PF, objs, {"f": (["A"], ["B"], Relation.bottom([A], [B], make_lattice("goedel")))})
    with pytest.raises(UnknownVertex):
        MultiDiagram.build(PF, objs, sources=["Q"])
    g = MultiGraph(["A", "B", "C"])
    with pytest.raises(DanglingVertexObject):
        MultiDiagram(g, objs, {}, PF)
    twin = {"A": objs["A"], "B2": objs["A"]}
    with pytest.raises(DuplicateAttribute):
        MultiDiagram.build(PF, twin)


# -- limits ----------------------------------------------------------------------------

def test_joint_limit_values():
    D = parse_spec(data_path("joint.spec"))[1]
    lim = vague_limit(D)
    expected = {(1, 0, 0, 0, 1): 0.0, (1, 1, 0, 1, 1): 0.125, (0, 1, 0, 1, 1): 0.5,
                (0, 0, 0, 1, 1): 1.0, (1, 1, 1, 0, 1): 0.25}
    for t, w in expected.items():
        assert math.isclose(float(lim[t]), w, abs_tol=1e-12)


def test_discrete_limit_is_product():
    A, B = attr("A", 2), attr("B", 3)
    x = Relation((), [A], np.array([1.0, 0.5]), PROD)
    y = Relation((), [B], np.array([0.25, 1.0, 0.0]), PROD)
    D = MultiDiagram.build(PF, objects([A, B], dists={"A": x, "B": y}))
    lim = vague_limit(D)
    for a, b in itertools.product(A.domain, B.domain):
        assert lim[(a, b)] == x[(a,)] * y[(b,)]


def test_parallel_pair_limit():
    rng = np.random.default_rng(0)
    A, B = attr("A", 2), attr("B", 3)
    f = Relation([A], [B], rng.random((2, 3)), PROD)
    g = Relation([A], [B], rng.random((2, 3)), PROD)
    D = MultiDiagram.build(PF, objects([A, B]), {"f": (["A"], ["B"], f), "g": (["A"], ["B"], g)})
    assert np.allclose(vague_limit(D).weights, f.weights * g.weights)


def test_pullback_limit():
    rng = np.random.default_rng(1)
    A, B, C = attr("A", 2), attr("B", 2), attr("C", 3)
    f = Relation([A], [C], rng.random((2, 3)), PROD)
    g = Relation([B], [C], rng.random((2, 3)), PROD)
    D = MultiDiagram.build(PF, objects([A, B, C]), {"f": (["A"], ["C"], f), "g": (["B"], ["C"], g)})
    lim = vague_limit(D)
    for a, b, c in itertools.product(A.domain, B.domain, C.domain):
        assert math.isclose(float(lim[(a, b, c)]), f[(a, c)] * g[(b, c)])


def test_empty_diagram_limit_is_top():
    D = MultiDiagram.build(PF, {})
    lim = vague_limit(D)
    assert lim.weights.shape == () and float(lim.weights) == 1.0


# -- cones ------------------------------------------------------------------------------

def _one_arrow():
    A, B = attr("A", 3), attr("B", 2)
    f = Relation.from_function([A], [B], lambda a: a % 2, BOOL)
    return MultiDiagram.build(BF, objects([A, B], BOOL), {"f": (["A"], ["B"], f)})


def test_cone_singleton_is_point():
    D = _one_arrow()
    cd = cone_distribution(Cone(["r"], {"A": {"r": 2}, "B": {"r": 0}}), D)
    assert cd.top_support() == {(2, 0)}


def test_cone_identity_legs_give_top():
    A = attr("A", 3)
    D = MultiDiagram.build(PF, objects([A]))
    cd = cone_distribution(Cone(list(A.domain), {"A": lambda r: r}), D)
    assert np.all(cd.weights == 1.0)


def test_cone_duplicate_images():
    D = _one_arrow()
    one = cone_distribution(Cone(["r"], {"A": {"r": 1}, "B": {"r": 1}}), D)
    two = cone_distribution(Cone(["r", "s"], {"A": {"r": 1, "s": 1}, "B": {"r": 1, "s": 1}}), D)
    assert one.equals(two)


def test_cone_missing_leg():
    D = _one_arrow()
    with pytest.raises(LegMissing):
        cone_distribution(Cone(["r"], {"A": {"r": 1}}), D)


def test_lambda_limit_cases():
    D = _one_arrow()
    classical = Cone([0, 1, 2], {"A": lambda a: a, "B": lambda a: a % 2})
    assert int(lambda_limit(D, classical).degree) == 1
    assert int(lambda_limit(D, Cone([], {"A": {}, "B": {}})).degree) == 0
    J = parse_spec(data_path("joint.spec"))[1]
    point = Cone(["r"], {v: {"r": x} for v, x in zip("ABCDE", (0, 0, 0, 1, 1))})
    res = lambda_limit(J, point, threshold=1.0)
    assert float(res.degree) == 1.0 and res.holds


# -- commutativity ------------------------------------------------------------------------

def _triangle(sizes, f, g, h):
    A, B, C = attr("A", sizes[0]), attr("B", sizes[1]), attr("C", sizes[2])
    arrows = {
        "f": (["A"], ["B"], Relation.from_function([A], [B], lambda a: f[a], BOOL)),
        "g": (["B"], ["C"], Relation.from_function([B], [C], lambda b: g[b], BOOL)),
        "h": (["A"], ["C"], Relation.from_function([A], [C], lambda a: h[a], BOOL)),
    }
    return MultiDiagram.build(BF, objects([A, B, C], BOOL), arrows, sources=["A"])


@settings(max_examples=80, deadline=None)
@given(data=st.data())
def test_triangle_commutativity_matches_brute_force(data):
    sizes = [data.draw(st.integers(1, 3)) for _ in range(3)]
    f = [data.draw(st.integers(0, sizes[1] - 1)) for _ in range(sizes[0])]
    g = [data.draw(st.integers(0, sizes[2] - 1)) for _ in range(sizes[1])]
    h = [data.draw(st.integers(0, sizes[2] - 1)) for _ in range(sizes[0])]
    rep = commutativity_degree(_triangle(sizes, f, g, h))
    commutes = all(g[f[a]] == h[a] for a in range(sizes[0]))
    assert rep.commutative == commutes
    for (a,), w in rep.distribution.items(include_bottom=True):
        assert bool(w) == (g[f[a]] == h[a])


def test_commuting_triangle():
    rep = commutativity_degree(_triangle((3, 2, 2), [0, 1, 1], [1, 0], [1, 0, 0]))
    assert rep.commutative and not rep.universal


def test_all_vertices_as_sources_returns_limit():
    D = parse_spec(data_path("joint.spec"))[1]
    rep = commutativity_degree(D, list(D.vertices))
    assert np.allclose(rep.distribution.aligned(vague_limit(D).names), vague_limit(D).weights)


def test_unknown_source_vertex():
    D = parse_spec(data_path("joint.spec"))[1]
    with pytest.raises(UnknownVertex):
        commutativity_degree(D, ["Q"])


def test_restricted_limit():
    D = parse_spec(data_path("joint.spec"))[1]
    r = restricted_limit(D, ["A", "E"])
    assert r.names == ("A", "E")
    assert float(r[(0, 1)]) == 1.0 and float(r[(1, 1)]) == 0.25


# -- descriptions -----------------------------------------------------------------------------

def test_description_of_own_limit():
    D = _one_arrow()
    lim = vague_limit(D)
    assert int(lambda_description(D, lim, {"A": "A", "B": "B"}).degree) == 1


def test_description_disjoint_support():
    D = _one_arrow()
    A, B = D.carrier("A")[0], D.carrier("B")[0]
    data = Relation.from_entries((), [A, B], {(0, 1): 1, (1, 0): 1}, BOOL)
    assert int(lambda_description(D, data, {"A": "A", "B": "B"}).degree) == 0


def test_description_mapping_errors():
    D = _one_arrow()
    A, B = D.carrier("A")[0], D.carrier("B")[0]
    data = Relation.top((), [A.renamed("x"), B.renamed("y")], BOOL)
    with pytest.raises(NotInjective):
        lambda_description(D, data, {"x": "A", "y": "A"})
    with pytest.raises(ColumnMismatch):
        lambda_description(D, data, {"x": "A"})
    with pytest.raises(ColumnMismatch):
        lambda_description(D, data, {"x": "A", "y": "Q"})


def test_description_renames_columns():
    D = _one_arrow()
    A, B = D.carrier("A")[0], D.carrier("B")[0]
    data = Relation.from_entries((), [A.renamed("x"), B.renamed("y")], {(2, 0): 1}, BOOL)
    assert int(lambda_description(D, data, {"x": "A", "y": "B"}, threshold=1).holds)
