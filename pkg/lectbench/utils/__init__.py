from .decorators import requires_mode, finite_result
from .seeding import derive_seed, stage_rng, splitmix64
from .hashing import canonical_json, sha256_json, sha256_array
