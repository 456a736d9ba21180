"""Exact twisted logarithmic modules of the Heisenberg vertex algebra."""
from .scalars import Scalar, ZetaPoly, root_of_unity
from .twist import TwistPair, build_even_block, build_odd_block, direct_sum
from .fock import BlockSpec, FockModule, ModuleSpec
from .fields import LogField, field_of, identity_field, nth_product, normally_ordered
from .virasoro import VirasoroFamily, jordan_structure, spectrum

__all__ = [
    "Scalar", "ZetaPoly", "root_of_unity",
    "TwistPair", "build_even_block", "build_odd_block", "direct_sum",
    "BlockSpec", "ModuleSpec", "FockModule",
    "LogField", "field_of", "identity_field", "nth_product", "normally_ordered",
    "VirasoroFamily", "jordan_structure", "spectrum",
]
