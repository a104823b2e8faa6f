# Vague limit of a small diagram of weighted multi-arrows.
#
# Five binary attributes A..E, three arrows f, g, h read from csv tables,
# weights in [0,1] combined with the product t-norm.

import numpy as np

from omegarel import commutativity_degree, data_path, parse_spec, vague_limit

spec, D = parse_spec(data_path("joint.spec"))
print("vertices:", D.vertices)
print("arrows:", [a.label for a in D.graph.arrows])

# The limit is a weighted table over all five attributes.
lim = vague_limit(D)
for values, w in lim.items():
    print(values, w)

# Most weight sits on a single tuple; everything else is a partial match.
best = max(lim.items(), key=lambda item: item[1])
print("heaviest tuple:", best)

# How well does the diagram commute when we start from A alone?
report = commutativity_degree(D, ["A"])
print("per-source degrees:")
for values, w in report.distribution.items(include_bottom=True):
    print("  A =", values[0], "->", w)
print("degree:", report.degree, "commutative:", report.commutative)
print("0.25-commutative:", report.holds(0.25))

# Swapping the tensor for min changes how evidence accumulates along a tuple.
_, Dmin = parse_spec(data_path("joint.spec"), flavor_override=("meet", "join"))
diff = np.abs(vague_limit(Dmin).weights - lim.weights)
print("largest change under min:", diff.max())
