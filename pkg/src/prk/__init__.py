"""Generic rigidity of periodic orbit frameworks on partially variable tori."""

from .core import (
    Edge,
    GainGroup,
    GraphError,
    OrbitGraph,
    TorusModel,
    derive,
    gain_group,
    net_gain,
    parse,
    serialize,
    t_gain_procedure,
)
from .gains import is_angle_constructive, is_constructive, is_Tx_constructive, model_condition
from .henneberg import (
    ConstructionCertificate,
    Move,
    NotReducible,
    apply_move,
    decide,
    generate,
    reduce,
    verify_certificate,
)
from .linear import build_matrix, generic_rank, is_inf_rigid, motion_space
from .sparsity import is_p21, is_sparse, is_tight, pebble_game, tree_map_decompose

__version__ = "0.1.0"
