//! Synthetic inputs for the benchmarks: a square lattice with rook
//! contiguity and a smooth-plus-noise table on it.

use nalgebra::DMatrix;
use smva_core::{row_standardize, Connectivity, Dataset, SpatialWeights};

/// Row-standardized rook weights on a `side × side` lattice.
pub fn lattice_weights(side: usize) -> SpatialWeights {
    let mut pairs = Vec::new();
    for r in 0..side {
        for c in 0..side {
            let i = r * side + c;
            if c + 1 < side {
                pairs.push((i, i + 1));
            }
            if r + 1 < side {
                pairs.push((i, i + side));
            }
        }
    }
    let conn = Connectivity::from_index_pairs(side * side, &pairs).expect("lattice graph");
    row_standardize(&conn).expect("lattice has no islands")
}

/// `side² × p` table whose columns mix a spatial gradient with a
/// deterministic pseudo-random component.
pub fn lattice_dataset(side: usize, p: usize) -> Dataset {
    let n = side * side;
    let mut state = 0x2545_f491_4f6c_dd1d_u64;
    let mut noise = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let values = DMatrix::from_fn(n, p, |i, j| {
        let (r, c) = ((i / side) as f64, (i % side) as f64);
        let t = (j + 1) as f64;
        (r * t * 0.3).sin() + (c / t).cos() + noise()
    });
    let ids = (0..n).map(|i| format!("s{i}")).collect();
    let labels = (0..p).map(|j| format!("v{j}")).collect();
    Dataset::new(ids, labels, values).expect("finite synthetic table")
}
