"""Relations valued in a residuated lattice, with vague limits and colimits of multi-diagrams."""

from importlib.resources import files

from .colimit import ColimitObject, aggregate, set_colimit_oracle, similarity_closure, vague_colimit
from .dataio import (
    Dataset, DiagramSpec, QueryMap, answer_query, identity_query, load_dataset, load_network, parse_spec,
    read_query, read_similarity, read_table, table_text, write_table,
)
from .diagram import (
    Arrow, Cone, MultiDiagram, MultiGraph, commutativity_degree, cone_distribution, glue, lambda_description,
    lambda_limit, restricted_limit, vague_limit,
)
from .errors import OmegaRelError
from .lattice import (
    Flavor, FiniteLattice, Goedel, Lukasiewicz, ProductLattice, ProductLogic, boolean_lattice,
    load_finite_lattice, make_flavor, make_lattice, product_lattice,
)
from .lnn import (
    LnnNetwork, Neuron, classify_neuron, description_fit, eval_neuron, extract_formula, format_formulas,
    formula_to_diagram, network_to_diagram, snap_to_grid,
)
from .omega_object import (
    OmegaObject, check_bimodule, check_refinement, check_similarity, classify_map, kernel_similarity,
    lambda_similar, lambda_similar_relations, product_similarity, similarity_from_function,
)
from .relation import (
    Attribute, Relation, canonical_extension, compose, contract, external_product, identity, reverse,
    sum_out, tabulate, untabulate,
)

__version__ = "0.1.0"


def data_path(name: str):
    """Path of a bundled data file (specs, tables, the sample network)."""
    return files(__name__) / "data" / name


__all__ = [n for n in dir() if not n.startswith("_") and n != "files"]
