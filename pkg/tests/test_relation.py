import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from omegarel.errors import (
    DomainMismatch, DuplicateAttribute, LatticeMismatch, NotASuperset, SignatureMismatch, UnknownAttribute,
)
from omegarel.lattice import boolean_lattice, make_flavor, make_lattice
from omegarel.relation import (
    Attribute, Relation, add, canonical_extension, compose, contract, external_product, identity, leq,
    rename, reindex, reverse, sum_out, tabulate, untabulate,
)

PROD = make_lattice("product")
PF = make_flavor(PROD, "tensor", "join")
A = Attribute("A", (0, 1))
B = Attribute("B", ("x", "y", "z"))
C = Attribute("C", (0, 1))
D = Attribute("D", (10, 20))


def rand_rel(rng, sources, targets, lat=PROD):
    shape = tuple(a.size for a in tuple(sources) + tuple(targets))
    return Relation(sources, targets, rng.integers(0, 9, size=shape) / 8.0, lat)


def brute_compose(f, g, flavor):
    """Loop-level sum-product over the shared attributes."""
    shared = [a for a in f.targets if a.name in g.source_names]
    sources = list(f.sources) + [a for a in g.sources if a not in shared]
    targets = list(g.targets) + [a for a in f.targets if a not in shared]
    out = {}
    for st_vals in itertools.product(*(a.domain for a in sources + targets)):
        env = dict(zip((a.name for a in sources + targets), st_vals))
        acc = flavor.zero
        for mid in itertools.product(*(a.domain for a in shared)):
            env2 = dict(env, **dict(zip((a.name for a in shared), mid)))
            term = flavor.times(f.weight({n: env2[n] for n in f.names}), g.weight({n: env2[n] for n in g.names}))
            acc = flavor.plus(acc, term)
        out[st_vals] = float(acc)
    return [a.name for a in sources + targets], out


# -- construction ---------------------------------------------------------------

def test_attribute_validation():
    with pytest.raises(ValueError):
        Attribute("A", ())
    with pytest.raises(ValueError):
        Attribute("A", (1, 1))
    assert A.index(1) == 1
    assert Attribute("R", (0.1, 0.2)).index(0.1 + 1e-12) == 0
    with pytest.raises(DomainMismatch):
        A.index(5)


def test_duplicate_attribute_names():
    with pytest.raises(DuplicateAttribute):
        Relation([A], [A], np.zeros((2, 2)), PROD)


def test_weight_lookup_and_errors():
    f = Relation.from_entries([A], [B], {(1, "y"): 0.7}, PROD)
    assert f[(1, "y")] == 0.7
    assert f.weight({"B": "y", "A": 1}) == 0.7
    assert f[(0, "x")] == 0.0
    with pytest.raises(UnknownAttribute):
        f.weight({"A": 1})


def test_from_function_is_crisp_graph():
    f = Relation.from_function([A], [C], lambda a: 1 - a, boolean_lattice())
    assert f.top_support() == {(0, 1), (1, 0)}


# -- composition ------------------------------------------------------------------

def test_identity_law_boolean():
    lat = boolean_lattice()
    fl = make_flavor(lat, "meet", "join")
    rng = np.random.default_rng(0)
    ident = identity([A], lat, targets=[A.renamed("B")])
    g = Relation([A.renamed("B")], [C], rng.integers(0, 2, size=(2, 2)), lat)
    out = compose(ident, g, fl)
    assert out.source_names == ("A",) and out.target_names == ("C",)
    assert np.array_equal(out.weights, g.weights)


def test_compose_disjoint_is_external_product():
    rng = np.random.default_rng(1)
    f = rand_rel(rng, [A], [B])
    g = rand_rel(rng, [C], [D])
    out = compose(f, g, PF)
    assert out.source_names == ("A", "C") and out.target_names == ("D", "B")
    for a, c, d, b in itertools.product(A.domain, C.domain, D.domain, B.domain):
        assert out[(a, c, d, b)] == f[(a, b)] * g[(c, d)]


def test_lukasiewicz_composition_value():
    luk = make_lattice("lukasiewicz")
    fl = make_flavor(luk, "tensor", "oplus", allow_nondistributive=True)
    Bb = Attribute("B", ("b1", "b2"))
    Cc = Attribute("C", ("c",))
    f = Relation.from_entries([Attribute("A", ("a",))], [Bb], {("a", "b1"): 0.8, ("a", "b2"): 0.7}, luk)
    g = Relation.from_entries([Bb], [Cc], {("b1", "c"): 0.9, ("b2", "c"): 0.5}, luk)
    assert math.isclose(float(compose(f, g, fl)[("a", "c")]), 0.9, abs_tol=1e-12)


def test_compose_rejects_unglued_clash():
    f = Relation.bottom([A], [B], PROD)
    g = Relation.bottom([C], [A], PROD)
    with pytest.raises(DuplicateAttribute):
        compose(f, g, PF)


def test_compose_rejects_lattice_mix():
    f = Relation.bottom([A], [B], PROD)
    g = Relation.bottom([B], [C], make_lattice("goedel"))
    with pytest.raises(LatticeMismatch):
        compose(f, g, PF)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from(["product", "goedel", "lukasiewicz"]))
def test_compose_matches_brute_force(seed, kind):
    rng = np.random.default_rng(seed)
    lat = make_lattice(kind)
    fl = make_flavor(lat, "tensor", "join")
    f = rand_rel(rng, [A], [B, C], lat)
    g = rand_rel(rng, [B], [D], lat)
    out = compose(f, g, fl)
    names, oracle = brute_compose(f, g, fl)
    assert list(out.names) == names
    for vals, w in oracle.items():
        assert math.isclose(float(out[vals]), w, abs_tol=1e-12)


def test_boolean_compose_matches_classical_on_all_small_relations():
    lat = boolean_lattice()
    fl = make_flavor(lat, "meet", "join")
    X, Y, Z = Attribute("X", (0, 1)), Attribute("Y", (0, 1)), Attribute("Z", (0,))
    for bits_f in itertools.product([0, 1], repeat=4):
        f = Relation([X], [Y], np.array(bits_f).reshape(2, 2), lat)
        for bits_g in itertools.product([0, 1], repeat=2):
            g = Relation([Y], [Z], np.array(bits_g).reshape(2, 1), lat)
            out = compose(f, g, fl)
            for x in X.domain:
                classical = any(f[(x, y)] and g[(y, 0)] for y in Y.domain)
                assert bool(out[(x, 0)]) == classical


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), lam=st.integers(0, 8))
def test_external_product_laws(seed, lam):
    rng = np.random.default_rng(seed)
    lam = lam / 8
    f = rand_rel(rng, [A], [B])
    g = rand_rel(rng, [B], [C])
    fg = compose(f, g, PF)
    left = external_product(fg, lam, PF)
    assert np.allclose(left.weights, compose(external_product(f, lam, PF), g, PF).weights)
    assert np.allclose(left.weights, compose(f, external_product(g, lam, PF), PF).weights)
    assert np.array_equal(external_product(f, 1.0, PF).weights, f.weights)
    a2 = 0.5
    twice = external_product(external_product(f, lam, PF), a2, PF)
    assert np.allclose(twice.weights, external_product(f, lam * a2, PF).weights)


def test_external_product_value():
    f = Relation.from_entries([A], [C], {(0, 1): 0.5}, PROD)
    assert external_product(f, 0.5, PF)[(0, 1)] == 0.25


# -- reverse, order -----------------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_reverse_laws(seed):
    rng = np.random.default_rng(seed)
    f = rand_rel(rng, [A], [B])
    g = rand_rel(rng, [B], [C])
    assert reverse(reverse(f)).equals(f)
    lhs = reverse(compose(f, g, PF))
    rhs = compose(reverse(g), reverse(f), PF)
    assert np.allclose(lhs.aligned(rhs.names), rhs.weights)


def test_reverse_single_entry_and_symmetric():
    f = Relation.from_entries([A], [B], {(1, "z"): 0.3}, PROD)
    r = reverse(f)
    assert r.source_names == ("B",) and r[("z", 1)] == 0.3
    sim = Relation([A], [A.primed()], np.array([[1, 0.4], [0.4, 1]]), PROD)
    assert np.array_equal(reverse(sim).weights, sim.weights)


def test_leq_cases():
    rng = np.random.default_rng(2)
    f = rand_rel(rng, [A], [B])
    assert leq(f, f)
    assert leq(Relation.bottom([A], [B], PROD), f)
    g = f.with_weights(np.where(f.weights == f.weights.max(), f.weights - 0.1, f.weights))
    assert not leq(f, g)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_composition_is_monotone(seed):
    rng = np.random.default_rng(seed)
    f = rand_rel(rng, [B], [C])
    g = f.with_weights(np.maximum(f.weights, rng.integers(0, 9, size=f.weights.shape) / 8))
    i = rand_rel(rng, [A], [B])
    h = rand_rel(rng, [C], [D])
    lo = compose(compose(i, f, PF), h, PF)
    hi = compose(compose(i, g, PF), h, PF)
    assert leq(lo, hi)


# -- tabulation and extension --------------------------------------------------------

def test_tabulate_round_trip():
    f = Relation.from_entries([A], [B], {(0, "y"): 0.7}, PROD)
    d = tabulate(f)
    assert d.sources == () and d.names == ("A", "B") and d[(0, "y")] == 0.7
    assert untabulate(d, ["A"]).equals(f)
    assert tabulate(d).equals(d)


def test_canonical_extension():
    d = Relation((), [A], np.array([0.25, 1.0]), PROD)
    assert canonical_extension(d, [A]).equals(d)
    e = canonical_extension(d, [A, B])
    for a, b in itertools.product(A.domain, B.domain):
        assert e[(a, b)] == d[(a,)]
    with pytest.raises(NotASuperset):
        canonical_extension(d, [B])


def test_extension_then_sum_recovers_boolean():
    lat = boolean_lattice()
    fl = make_flavor(lat, "meet", "join")
    for na, nb in itertools.product(range(1, 5), repeat=2):
        X, Y = Attribute("X", tuple(range(na))), Attribute("Y", tuple(range(nb)))
        rng = np.random.default_rng(na * 10 + nb)
        d = Relation((), [X], rng.integers(0, 2, size=na), lat)
        back = sum_out(canonical_extension(d, [X, Y]), ["Y"], fl)
        assert back.equals(d)


def test_sum_out_cases():
    lat = boolean_lattice()
    fl = make_flavor(lat, "meet", "join")
    d = Relation((), [A, C], np.array([[0, 1], [0, 0]]), lat)
    assert sum_out(d, [], fl).equals(d)
    out = sum_out(d, ["C"], fl)
    assert out[(0,)] == 1 and out[(1,)] == 0
    p = Relation((), [A, C], np.array([[0.5, 1.0], [0.125, 0.25]]), PROD)
    assert sum_out(p, ["C"], PF)[(0,)] == 1.0


# -- helpers ------------------------------------------------------------------------

def test_rename_add_reindex():
    f = Relation.from_entries([A], [C], {(0, 1): 0.5}, PROD)
    g = rename(f, {"C": "E"})
    assert g.target_names == ("E",)
    h = add(f, Relation.from_entries([A], [C], {(0, 1): 0.75, (1, 0): 0.25}, PROD), PF)
    assert h[(0, 1)] == 0.75 and h[(1, 0)] == 0.25
    wider = reindex(tabulate(f), [Attribute("A", (0, 1, 2)), C])
    assert wider[(0, 1)] == 0.5 and wider[(2, 1)] == 0.0
    with pytest.raises(DomainMismatch):
        reindex(tabulate(f), [Attribute("A", (5,)), C])


def test_add_needs_parallel():
    with pytest.raises(SignatureMismatch):
        add(Relation.bottom([A], [C], PROD), Relation.bottom([A], [B], PROD), PF)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from(["product", "goedel"]))
def test_contract_matches_full_product(seed, kind):
    lat = make_lattice(kind)
    fl = make_flavor(lat, "tensor", "join")
    rng = np.random.default_rng(seed)
    factors = [rand_rel(rng, (), [A, B], lat), rand_rel(rng, (), [B, C], lat), rand_rel(rng, (), [C, D], lat)]
    out = contract(factors, [A, D], fl)
    for a, d in itertools.product(A.domain, D.domain):
        best = 0.0
        for b, c in itertools.product(B.domain, C.domain):
            w = factors[0][(a, b)]
            w = fl.times(w, factors[1][(b, c)])
            w = fl.times(w, factors[2][(c, d)])
            best = max(best, float(w))
        assert math.isclose(float(out.weight({"A": a, "D": d})), best, abs_tol=1e-12)
    assert out.attributes == (A, D)


def test_contract_empty_keep_is_scalar():
    rng = np.random.default_rng(7)
    f = rand_rel(rng, (), [A, B])
    out = contract([f], [], PF)
    assert out.weights.shape == ()
    assert math.isclose(float(out.weights), float(f.weights.max()))
