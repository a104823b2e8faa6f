"""Łukasiewicz neural networks: evaluation, classification, formula extraction, diagrams."""

from __future__ import annotations

import bisect
import itertools
import logging
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Mapping, Sequence, Union

from .diagram import Degree, MultiDiagram, lambda_description
from .errors import ArityMismatch, EmptyGrid, UnclassifiableNeuron
from .lattice import Flavor, make_flavor, make_lattice
from .omega_object import OmegaObject
from .relation import Attribute, Relation

log = logging.getLogger(__name__)

ROLES = ("input", "hidden", "output")


@dataclass(frozen=True)
class Neuron:
    inputs: tuple[str, ...]
    weights: tuple[float, ...]
    bias: float
    output: str

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "weights", tuple(self.weights))
        if len(self.inputs) != len(self.weights):
            raise ArityMismatch(f"neuron {self.output!r}: {len(self.inputs)} inputs but {len(self.weights)} weights")
        if len(set(self.inputs)) != len(self.inputs):
            raise ValueError(f"neuron {self.output!r} reads the same wire twice")
        if not any(w != 0 for w in self.weights):
            raise ValueError(f"neuron {self.output!r} has no nonzero weight")


def eval_neuron(n: Neuron, inputs: Sequence) -> float:
    """min(1, max(0, Σ w·x + b)); exact when inputs are Fractions."""
    if len(inputs) != len(n.weights):
        raise ArityMismatch(f"neuron {n.output!r} takes {len(n.weights)} inputs, got {len(inputs)}")
    total = n.bias
    for w, x in zip(n.weights, inputs):
        total = total + w * x
    return min(1, max(0, total))


class LnnNetwork:
    def __init__(self, wires: Mapping[str, str], neurons: Sequence[Neuron]):
        self.wires = dict(wires)
        for w, role in self.wires.items():
            if role not in ROLES:
                raise ValueError(f"wire {w!r} has unknown role {role!r}")
        self.neurons = list(neurons)
        producers: dict[str, Neuron] = {}
        for n in self.neurons:
            if n.output not in self.wires:
                raise ValueError(f"neuron writes undeclared wire {n.output!r}")
            if self.wires[n.output] == "input":
                raise ValueError(f"neuron writes input wire {n.output!r}")
            if n.output in producers:
                raise ValueError(f"wire {n.output!r} is produced by two neurons")
            producers[n.output] = n
            for w in n.inputs:
                if w not in self.wires:
                    raise ValueError(f"neuron {n.output!r} reads undeclared wire {w!r}")
        for w, role in self.wires.items():
            if role != "input" and w not in producers:
                raise ValueError(f"{role} wire {w!r} is not produced by any neuron")
        self.producers = producers
        graph = {n.output: set(n.inputs) for n in self.neurons}
        try:
            order = list(TopologicalSorter(graph).static_order())
        except CycleError as exc:
            raise ValueError(f"network wiring has a cycle through {exc.args[1]}") from None
        self.order = [producers[w] for w in order if w in producers]

    def wires_with(self, role: str) -> list[str]:
        return [w for w, r in self.wires.items() if r == role]

    @property
    def inputs(self) -> list[str]:
        return self.wires_with("input")

    @property
    def hidden(self) -> list[str]:
        return self.wires_with("hidden")

    @property
    def outputs(self) -> list[str]:
        return self.wires_with("output")

    def evaluate(self, values: Mapping[str, object], snap: Sequence | None = None) -> dict:
        """Values on every wire; with ``snap`` each neuron output is snapped to that grid."""
        env = dict(values)
        for n in self.order:
            out = eval_neuron(n, [env[w] for w in n.inputs])
            env[n.output] = snap_to_grid(out, snap) if snap is not None else out
        return env


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Neg:
    arg: "Formula"

    def __str__(self):
        inner = str(self.arg)
        return f"~{inner}" if isinstance(self.arg, (Var, Neg)) else f"~({inner})"


@dataclass(frozen=True)
class Conj:
    args: tuple["Formula", ...]

    def __str__(self):
        return " & ".join(_wrap(a) for a in self.args)


@dataclass(frozen=True)
class Disj:
    args: tuple["Formula", ...]

    def __str__(self):
        return " | ".join(_wrap(a) for a in self.args)


Formula = Union[Var, Neg, Conj, Disj]


def _wrap(f) -> str:
    return f"({f})" if isinstance(f, (Conj, Disj)) else str(f)


def variables(f) -> list[str]:
    if isinstance(f, Var):
        return [f.name]
    if isinstance(f, Neg):
        return variables(f.arg)
    out = []
    for a in f.args:
        out.extend(v for v in variables(a) if v not in out)
    return out


def evaluate(f, env: Mapping[str, object]):
    """Łukasiewicz semantics: ~x = 1-x, & = max(0, Σ-(k-1)), | = min(1, Σ)."""
    if isinstance(f, Var):
        return env[f.name]
    if isinstance(f, Neg):
        return 1 - evaluate(f.arg, env)
    vals = [evaluate(a, env) for a in f.args]
    if isinstance(f, Conj):
        return max(0, sum(vals) - (len(vals) - 1))
    return min(1, sum(vals))


@dataclass(frozen=True)
class NeuronClass:
    kind: str  # conjunctive | disjunctive | both | unclassified
    literals: tuple[tuple[str, bool], ...] = field(default=())  # (wire, negated)

    @property
    def conjunctive(self) -> bool:
        return self.kind in ("conjunctive", "both")

    @property
    def disjunctive(self) -> bool:
        return self.kind in ("disjunctive", "both")


def classify_neuron(n: Neuron) -> NeuronClass:
    """Read a neuron with ±1 weights as a conjunction or disjunction of literals."""
    live = [(w, x) for w, x in zip(n.weights, n.inputs) if w != 0]
    if any(w not in (1, -1) for w, _ in live):
        return NeuronClass("unclassified")
    literals = tuple((x, w == -1) for w, x in live)
    neg = sum(1 for w, _ in live if w == -1)
    pos = len(live) - neg
    conj = n.bias == 1 - pos
    disj = n.bias == neg
    if conj and disj:
        return NeuronClass("both", literals)
    if conj:
        return NeuronClass("conjunctive", literals)
    if disj:
        return NeuronClass("disjunctive", literals)
    return NeuronClass("unclassified", literals)


def neuron_formula(n: Neuron, resolve=None):
    """Formula of one classified neuron; ``resolve`` maps a wire to the formula it carries."""
    cls = classify_neuron(n)
    if cls.kind == "unclassified":
        raise UnclassifiableNeuron(n.output)
    resolve = resolve or Var
    lits = []
    for wire, negated in cls.literals:
        sub = resolve(wire)
        lits.append(Neg(sub) if negated else sub)
    if len(lits) == 1:
        return lits[0]
    return Conj(tuple(lits)) if cls.kind == "conjunctive" else Disj(tuple(lits))


def extract_formula(net: LnnNetwork) -> dict[str, Formula]:
    """Formula over input wires for every output wire."""
    carried: dict[str, Formula] = {w: Var(w) for w in net.inputs}
    for n in net.order:
        carried[n.output] = neuron_formula(n, lambda w: carried[w])
    return {w: carried[w] for w in net.outputs}


def format_formulas(formulas: Mapping[str, Formula]) -> str:
    return "\n".join(f"{w} = {f}" for w, f in formulas.items())


# ---------------------------------------------------------------------------
# grids and diagrams


def make_grid(values: Sequence) -> list:
    grid = sorted(set(values))
    if not grid:
        raise EmptyGrid("the grid has no points")
    for v in grid:
        if not 0 <= v <= 1:
            raise ValueError(f"grid point {v} lies outside [0,1]")
    return grid


def snap_to_grid(value, grid: Sequence):
    """Nearest grid point; ties go to the lower point."""
    if not grid:
        raise EmptyGrid("the grid has no points")
    i = bisect.bisect_left(grid, value)
    if i == 0:
        return grid[0]
    if i == len(grid):
        return grid[-1]
    lo, hi = grid[i - 1], grid[i]
    return lo if value - lo <= hi - value else hi


@dataclass
class Snap:
    wire: str
    inputs: tuple
    value: float
    snapped: float


def _snap_logged(value, grid, wire, inputs, snaps, tol=1e-9):
    out = snap_to_grid(value, grid)
    if abs(float(out) - float(value)) > tol:
        snap = Snap(wire, tuple(inputs), value, out)
        log.info("snapped %s%r: %s -> %s", wire, tuple(inputs), value, out)
        if snaps is not None:
            snaps.append(snap)
    return out


def default_flavor() -> Flavor:
    return make_flavor(make_lattice("product"), "tensor", "join")


def _grid_objects(wires, grid, lattice):
    return {w: OmegaObject.make([Attribute(w, tuple(grid))], lattice) for w in wires}


def network_to_diagram(net: LnnNetwork, grid: Sequence, flavor: Flavor | None = None,
                       snaps: list | None = None) -> MultiDiagram:
    """One vertex per wire over the grid, one crisp arrow per neuron (outputs snapped to the grid)."""
    grid = make_grid(grid)
    flavor = flavor or default_flavor()
    lat = flavor.lattice
    objects = _grid_objects(list(net.wires), grid, lat)
    arrows = {}
    for n in net.order:
        src = [objects[w].carrier[0] for w in n.inputs]
        tgt = objects[n.output].carrier[0]

        def fn(*xs, n=n):
            return _snap_logged(eval_neuron(n, xs), grid, n.output, xs, snaps)

        arrows[n.output] = (list(n.inputs), [n.output], Relation.from_function(src, [tgt], fn, lat))
    return MultiDiagram.build(flavor, objects, arrows, sources=net.inputs)


def formula_to_diagram(formulas: Mapping[str, Formula], grid: Sequence, inputs: Sequence[str] | None = None,
                       flavor: Flavor | None = None, snaps: list | None = None) -> MultiDiagram:
    """One crisp arrow per output formula, from its variables to the output wire.

    ``inputs`` lists every input wire (including ones no formula mentions).
    """
    grid = make_grid(grid)
    flavor = flavor or default_flavor()
    lat = flavor.lattice
    used = []
    for f in formulas.values():
        used.extend(v for v in variables(f) if v not in used)
    inputs = list(inputs) if inputs is not None else used
    missing = [v for v in used if v not in inputs]
    if missing:
        raise ValueError(f"formula variables {', '.join(missing)} are not listed as inputs")
    objects = _grid_objects(inputs + list(formulas), grid, lat)
    arrows = {}
    for out, f in formulas.items():
        vs = variables(f)
        src = [objects[v].carrier[0] for v in vs]

        def fn(*xs, f=f, vs=vs, out=out):
            return _snap_logged(evaluate(f, dict(zip(vs, xs))), grid, out, xs, snaps)

        arrows[out] = (vs, [out], Relation.from_function(src, [objects[out].carrier[0]], fn, lat))
    return MultiDiagram.build(flavor, objects, arrows, sources=inputs)


def description_fit(model, dataset: Relation, similarity=None, flavor: Flavor | None = None,
                    grid: Sequence | None = None, mapping: Mapping[str, str] | None = None,
                    inputs: Sequence[str] | None = None, threshold=None) -> Degree:
    """Degree to which a network (or extracted formulas) describes a weighted dataset.

    ``model`` is an :class:`LnnNetwork`, a ``{output wire: formula}`` mapping, or a
    ready :class:`MultiDiagram`. Columns map to wires by ``mapping`` (default: same name).
    Hidden wires and unmapped wires are summed out of the limit.
    """
    flavor = flavor or default_flavor()
    if isinstance(model, MultiDiagram):
        D = model
    else:
        if grid is None:
            grid = sorted({v for col in dataset.attributes for v in col.domain})
        if isinstance(model, LnnNetwork):
            D = network_to_diagram(model, grid, flavor)
        else:
            D = formula_to_diagram(model, grid, inputs, flavor)
    mapping = dict(mapping) if mapping else {c: c for c in dataset.names}
    return lambda_description(D, dataset, mapping, similarity, threshold)


def network_function_table(net: LnnNetwork, grid: Sequence) -> dict[tuple, tuple]:
    """Unsnapped outputs of the network on every grid input."""
    out = {}
    for xs in itertools.product(grid, repeat=len(net.inputs)):
        env = net.evaluate(dict(zip(net.inputs, xs)))
        out[xs] = tuple(env[w] for w in net.outputs)
    return out

