//! Fixed inputs for the kernel benchmarks, one per regime.

/// `(n, r)` cells: small `r`, saddle-point regime and Dickman regime.
pub const CELLS: [(u64, u64); 3] = [(10_000, 5), (10_000, 100), (10_000, 2_500)];

/// Depth of the benchmarked coefficient tables.
pub const COEFF_R: [u64; 3] = [2, 8, 32];
