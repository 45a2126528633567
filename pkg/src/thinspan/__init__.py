"""Rigid derivations of simply-typed terms and their polarized symmetries.

The package interprets a simply-typed term at a point (a multiset context
and result type), enumerates the rigid derivations witnessing the point,
partitions them under the groupoid of derivation morphisms, and checks that
the resulting counts agree with the weighted-relational coefficient.
"""

from .syntax import (
    ParseError, TypeCheckError, TypingContext,
    annotate, beta_normalize, parse_context, parse_simple_type, parse_term,
    term_to_text, type_to_text, typecheck,
)
from .rigidtypes import (
    PointSpec, RefinementError, ResourceContext,
    canonicalize_point, parse_itype, parse_mit, parse_mset, point_from_json,
)
from .symmetry import (
    MorphismError, Polarity,
    enumerate_homs_it, polar_factorize_it, polarity_it, sym_degrees_ctx, sym_degrees_it,
)
from .derivation import (
    BudgetRequiredError, DerivationError, WitnessSet,
    derivation_to_resource, enumerate_derivation_morphisms, enumerate_witnesses,
    multiset_collapse_term, partition_by_symmetry, resource_to_text, symmetric,
)
from .wrel import NatInf, rel_inhabited, wrel_coefficient
from .collapse import (
    WitnessReport, positive_witnesses, verify_identities, weight_by_classes,
)

__version__ = "0.1.0"
