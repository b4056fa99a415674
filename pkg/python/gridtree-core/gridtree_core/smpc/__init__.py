"""Secure multi-party building blocks over a simulated party network."""

from .cipher import (  # noqa: F401
    CommutativeGroup,
    CommutativeKey,
    ItemKind,
    commutative_decrypt,
    commutative_encrypt,
    generate_key,
    hash_into_group,
    make_safe_prime,
)
from .circuits import (  # noqa: F401
    CircuitBackend,
    IdealCircuitBackend,
    IdealCircuitSpec,
    all_zero_except_one_circuit,
    argmax_circuit,
    ideal_circuit_eval,
    is_zero_circuit,
    pick_max,
)
from .domains import FixedPointRing, Share, SumDomain, reconstruct  # noqa: F401
from .sets import (  # noqa: F401
    ABSTAIN,
    BOTTOM,
    ClassVerdict,
    EncryptedUnion,
    PaddedItemSet,
    secure_intersection_size,
    secure_union,
    secure_union_class_variant,
    secure_union_encrypted,
)
from .sums import (  # noqa: F401
    secure_sum,
    secure_sum_shares,
    split_secure_sum,
    split_secure_sum_shares,
    split_value,
)
from .xlnx import ln_series, ln_shares, mult_shares, x_ln_x, xlnx_ring  # noqa: F401
