//! Moran's eigenvector maps.
//!
//! MEM are the eigenvectors of the doubly centered weight matrix
//! `Ω = H W H`, `H = I − 11ᵀ/n`. The constant vector lies in the kernel of Ω
//! for structural reasons, so the decomposition is done directly in an
//! orthonormal basis of the centered subspace and yields exactly `n − 1`
//! vectors. The Moran coefficient of the k-th MEM is `λ_k · n / 1ᵀW1`.

use nalgebra::DMatrix;

use crate::diagram::{sorted_spectrum, symmetrize as symmetrize_dense, RANK_TOLERANCE};
use crate::error::{Error, Result};
use crate::graph::{symmetrize, SpatialWeights};

#[derive(Debug, Clone)]
pub struct MemBasis {
    /// Eigenvalues of Ω in decreasing order, length n − 1.
    pub eigenvalues: Vec<f64>,
    /// Unit-norm centered eigenvectors, n × (n − 1).
    pub vectors: DMatrix<f64>,
    /// `1ᵀ W 1`
    pub total_weight: f64,
}

impl MemBasis {
    pub fn n(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Moran coefficient of each MEM.
    pub fn moran_values(&self) -> Vec<f64> {
        let scale = self.n() as f64 / self.total_weight;
        self.eigenvalues.iter().map(|l| l * scale).collect()
    }
}

/// Orthonormal basis of the complement of `1ₙ`: the last n − 1 columns of
/// the Householder reflector that maps `e₁` onto `1ₙ/√n`.
fn centered_basis(n: usize) -> DMatrix<f64> {
    let u = 1.0 / (n as f64).sqrt();
    let mut v = vec![-u; n];
    v[0] += 1.0;
    let vv: f64 = v.iter().map(|a| a * a).sum();
    DMatrix::from_fn(n, n - 1, |i, k| {
        let j = k + 1;
        let delta = if i == j { 1.0 } else { 0.0 };
        delta - 2.0 * v[i] * v[j] / vv
    })
}

fn centered_spectrum(w: &SpatialWeights) -> Result<(Vec<f64>, DMatrix<f64>, f64)> {
    let n = w.n();
    if n < 2 {
        return Err(Error::InvalidInput("need at least 2 spatial units".into()));
    }
    if !(w.total_weight() > 0.0) {
        return Err(Error::InvalidInput("weights sum to zero".into()));
    }
    let sym = if w.is_symmetric(1e-12) {
        w.clone()
    } else {
        symmetrize(w)
    };
    let dense = sym.to_dense();
    let basis = centered_basis(n);
    let reduced = symmetrize_dense(&(basis.transpose() * &dense * &basis));
    let (mut values, vectors, _) = sorted_spectrum(&reduced);
    let scale = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    for v in values.iter_mut() {
        if v.abs() < RANK_TOLERANCE * scale {
            *v = 0.0;
        }
    }
    let mut maps = basis * vectors;
    for mut col in maps.column_iter_mut() {
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.neg_mut();
        }
    }
    Ok((values, maps, sym.total_weight()))
}

/// Eigen-decomposition of `H W H`, symmetrizing `W` first when needed.
pub fn mem_basis(w: &SpatialWeights) -> Result<MemBasis> {
    if w.n() < 3 {
        return Err(Error::InvalidInput(format!(
            "MEM need at least 3 spatial units, got {}",
            w.n()
        )));
    }
    let (eigenvalues, vectors, total_weight) = centered_spectrum(w)?;
    Ok(MemBasis {
        eigenvalues,
        vectors,
        total_weight,
    })
}

/// Attainable range `(λ_min · n/1ᵀW1, λ_max · n/1ᵀW1)` of Moran's
/// coefficient, from the extreme eigenvalues of Ω on the centered subspace.
pub fn mc_bounds(w: &SpatialWeights) -> Result<(f64, f64)> {
    let (values, _, total) = centered_spectrum(w)?;
    let scale = w.n() as f64 / total;
    let upper = values[0] * scale;
    let lower = values[values.len() - 1] * scale;
    Ok((lower, upper))
}

/// The first `k` MEM, by decreasing eigenvalue.
pub fn select_mem(basis: &MemBasis, k: usize) -> Result<DMatrix<f64>> {
    if k < 1 || k > basis.len() {
        return Err(Error::OutOfRange {
            what: "MEM count",
            value: k,
            min: 1,
            max: basis.len(),
        });
    }
    Ok(basis.vectors.columns(0, k).into_owned())
}
