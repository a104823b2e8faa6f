# From a small Łukasiewicz network to a readable rule, then back to data.
#
# Every neuron with weights of +1/-1 and the right bias reads as a
# conjunction or disjunction of literals. We extract the rule for the
# output, check it against the network on a grid, and measure how well it
# describes a weighted table of observations.

from fractions import Fraction

from omegarel import data_path, load_dataset, load_network, make_lattice
from omegarel.lnn import (
    classify_neuron, description_fit, evaluate, extract_formula, format_formulas, network_function_table,
)

net = load_network(data_path("six_inputs.json"))
for n in net.neurons:
    print(n.output, classify_neuron(n).kind, n.weights, n.bias)

formulas = extract_formula(net)
print(format_formulas(formulas))

# Exact agreement on {0, 1/3, 2/3, 1}^6, using fractions to avoid rounding.
grid = [Fraction(k, 3) for k in range(4)]
f = formulas["y"]
table = network_function_table(net, grid)
agree = sum(out == evaluate(f, dict(zip(net.inputs, xs))) for xs, (out,) in table.items())
print(f"agreement: {agree}/{len(table)}")

# Description degree of the observations by the extracted rule.
data = load_dataset(data_path("observations.csv"), make_lattice("product"))
fit = description_fit(formulas, data.dist, inputs=net.inputs, threshold=1.0)
print("description degree:", fit.degree, "holds at 1:", fit.holds)

# Which observed rows sit exactly on the rule?
for values, w in data.dist.items():
    env = dict(zip(data.columns, values))
    print(values, "rule:", round(float(evaluate(f, env)), 3), "observed y:", env["y"])
