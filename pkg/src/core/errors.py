"""Common error messages used across qfalab."""

NOT_PRIME = "p is not prime"
OUT_OF_RANGE = "value out of supported range"
FACTORIZE_TOO_SMALL = "factorize requires n >= 2"
ZERO_HAS_NO_INVERSE = "0 has no inverse modulo p"
NOT_PRIMITIVE_ROOT = "g is not a primitive root modulo p"
EPS_OUT_OF_RANGE = "eps must lie strictly between 0 and 1"
EMPTY_SEQUENCE = "sequence length d must be at least 1"
RESIDUE_OUT_OF_RANGE = "sequence element outside 0..p-1"
CYCLIC_TOO_LONG = "cyclic sequence length must satisfy 1 <= d < p"
CYCLIC_MISMATCH = "sequence does not match g^i mod p"
EMPTY_PRIME_INTERVAL = "no primes in the AIKPS window; p is too small"
AIKPS_DEGENERATE = "AIKPS set T covers all nonzero residues; p is too small"
EMPTY_T = "set T must be nonempty"
NOT_UNIT_VECTOR = "vector must have unit norm"
NOT_UNITARY = "matrix is not unitary"
NOT_NORMALIZED = "state vector lost unit norm"
TOO_FEW_TRIALS = "not enough trials for this experiment"
EMPTY_RANGE = "prime range is empty"
EMPTY_GRID = "sample grid is empty"
MISSING_PARAMETER = "missing required parameter"
NO_REFERENCE_GENERATOR = "no reference generator for p; pass --g-list"
WRITE_FAILED = "failed to write report"
