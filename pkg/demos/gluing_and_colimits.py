# Colimits of weighted diagrams: coequalizers and pushouts.
#
# The colimit relation glues the blocks of a diagram together along its
# arrows. For crisp functions over the boolean lattice its top classes match
# the usual set-theoretic quotient, which we compare with a union-find oracle.

import numpy as np

from omegarel import MultiDiagram, OmegaObject, Relation, boolean_lattice, make_flavor, make_lattice
from omegarel import set_colimit_oracle, similarity_closure, vague_colimit
from omegarel.relation import Attribute

B = boolean_lattice()
flavor = make_flavor(B, "meet", "join")

A = Attribute("A", (0, 1))
T = Attribute("T", (0, 1, 2))
f = Relation.from_function([A], [T], lambda a: a, B)
g = Relation.from_function([A], [T], lambda a: a + 1, B)
objs = {"A": OmegaObject.make([A], B), "T": OmegaObject.make([T], B)}

# Coequalizer of a -> a and a -> a + 1: everything collapses into one class.
D = MultiDiagram.build(flavor, objs, {"f": (["A"], ["T"], f), "g": (["A"], ["T"], g)})
col = vague_colimit(D)
print("carrier:", col.carrier.domain)
print(np.asarray(col.matrix(), dtype=int))
print("transitive before closure:", col.transitive)

closed = col.closure()
print("classes after closure:")
for cls in closed.top_classes():
    print("  ", sorted(cls))
print("set oracle:")
for cls in set_colimit_oracle(D):
    print("  ", sorted(cls))

# A fuzzy similarity chain closes up with the min t-norm: a~b at 0.6 and
# b~c at 0.8 give a~c at 0.6.
G = make_lattice("goedel")
X = Attribute("X", ("a", "b", "c"))
base = np.array([[1, 0.6, 0], [0.6, 1, 0.8], [0, 0.8, 1]])
sim = similarity_closure(Relation((X,), (X.primed(),), base, G), make_flavor(G, "meet", "join"))
print(sim.matrix())
