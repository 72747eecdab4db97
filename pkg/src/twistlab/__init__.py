"""Twisted simplicial distributions: bundles, polytopes, collapse and quantum models."""

__version__ = "0.1.0"

from .groups import FiniteAbelianGroup, GroupError, Z
from .simpset import (CapabilityError, EZForm, SimplexId, SimplicialError, SimplicialMap, SimplicialSet,
                      check_simplicial, nerve, quotient, standard_simplex)
from .cochain import (Cochain, CochainError, coboundary, is_cocycle, pull_back, solve_trivialization,
                      trivialization_certificate)
from .bundle import (BundleIsomorphism, CapacityError, Section, TwistedBundle, TwistingFunction,
                     classifying_map, count_sections, sections, total_space, twisted_product,
                     twistings_equivalent)
from .dist import (DistributionError, EquivariantDistribution, TwistedDistribution, classical_embed,
                   convolve, delta, from_equivariant, mixture, restrict_along, to_equivariant, uniform)
from .geometry import (ContextualityWitness, NoncontextualCertificate, NotTrivializingError, PolytopeH,
                       PolytopeV, build_hrep, contextuality_witness, enumerate_vertices, is_noncontextual,
                       relative_noncontextual, relatively_deterministic)
from .reduce import CollapseContext, CollapseError, make_collapse
from .quantum import (Operator, PauliAssignment, QuantumError, born_distribution, context_cocycle,
                      maximally_mixed, stabilizer_state)
from .scenario import Scenario, ScenarioError, load_mermin, load_scenario, parse_scenario, serialize_scenario
