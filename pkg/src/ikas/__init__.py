"""Key-derivation graphs for interval and hyperrectangle access policies."""

from .catalog import Built, build, verify
from .core import (
    HyperRect,
    Interval,
    PolicySpace,
    authorized_leaves,
    contains,
    decode_node_id,
    encode_node_id,
    format_node_id,
    parse_node_id,
)
from .full import DiamondGrid, diamond_scheme, full_triangle_scheme
from .geo import E1, E2, geo_multikey, rect_grid, square_grid
from .graph import ALL_NODES, LEAVES, DerivationGraph, component_count, derivation_depth, stats
from .hyper import hypercube, hypercube_multikey, recurrence_solver
from .kas import (
    IntegrityError,
    NotAuthorizedError,
    PublicInfo,
    RandomSource,
    SecretStore,
    UserCredential,
    decrypt_object,
    derive,
    encrypt_object,
    issue,
    setup,
)
from .multikey import SpecialNodeScheme, four_key, three_key, two_key, two_key_one_hop
from .temporal import FactorSchedule, binary_decomposition, loglog, multiplicative, one_hop
from .verify import check_enforcing, check_multikey, default_report, formula_table

__version__ = "0.1.0"

__all__ = [
    "Built",
    "build",
    "verify",
    "HyperRect",
    "Interval",
    "PolicySpace",
    "authorized_leaves",
    "contains",
    "decode_node_id",
    "encode_node_id",
    "format_node_id",
    "parse_node_id",
    "DiamondGrid",
    "diamond_scheme",
    "full_triangle_scheme",
    "E1",
    "E2",
    "geo_multikey",
    "rect_grid",
    "square_grid",
    "ALL_NODES",
    "LEAVES",
    "DerivationGraph",
    "component_count",
    "derivation_depth",
    "stats",
    "hypercube",
    "hypercube_multikey",
    "recurrence_solver",
    "IntegrityError",
    "NotAuthorizedError",
    "PublicInfo",
    "RandomSource",
    "SecretStore",
    "UserCredential",
    "decrypt_object",
    "derive",
    "encrypt_object",
    "issue",
    "setup",
    "SpecialNodeScheme",
    "four_key",
    "three_key",
    "two_key",
    "two_key_one_hop",
    "FactorSchedule",
    "binary_decomposition",
    "loglog",
    "multiplicative",
    "one_hop",
    "check_enforcing",
    "check_multikey",
    "default_report",
    "formula_table",
]
