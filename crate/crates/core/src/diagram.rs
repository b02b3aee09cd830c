//! Duality diagram engine.
//!
//! A statistical triplet `(X, Q, D)` couples an `n × p` table with a column
//! metric `Q` and row weights `D`. Its analysis is the eigen-decomposition of
//! `X Q Xᵀ D` (principal components `K`) or, equivalently, of `Xᵀ D X Q`
//! (principal axes `A`). Both share the same nonzero eigenvalues.
//!
//! The decomposition is carried out on the smaller of the two symmetrized
//! operators, `Q^½ Xᵀ D X Q^½` (p × p) or `D^½ X Q Xᵀ D^½` (n × n), and the
//! other side is recovered through the transition formulas.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative threshold below which an eigenvalue counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;
/// Relative tolerance for symmetry and positive semi-definiteness checks.
pub const METRIC_TOLERANCE: f64 = 1e-12;

/// A symmetric metric, stored either as its diagonal or as a full matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum Metric {
    Diagonal(DVector<f64>),
    Full(DMatrix<f64>),
}

impl Metric {
    pub fn identity(dim: usize) -> Self {
        Metric::Diagonal(DVector::from_element(dim, 1.0))
    }

    /// Uniform weights `1/n` on the diagonal.
    pub fn uniform(n: usize) -> Self {
        Metric::Diagonal(DVector::from_element(n, 1.0 / n as f64))
    }

    pub fn dim(&self) -> usize {
        match self {
            Metric::Diagonal(d) => d.len(),
            Metric::Full(m) => m.nrows(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Metric::Diagonal(d) => DMatrix::from_diagonal(d),
            Metric::Full(m) => m.clone(),
        }
    }

    /// `self · m`
    pub fn left_mul(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Metric::Diagonal(d) => {
                let mut out = m.clone();
                for (i, mut row) in out.row_iter_mut().enumerate() {
                    row *= d[i];
                }
                out
            }
            Metric::Full(q) => q * m,
        }
    }

    /// `m · self`
    pub fn right_mul(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            Metric::Diagonal(d) => {
                let mut out = m.clone();
                for (j, mut col) in out.column_iter_mut().enumerate() {
                    col *= d[j];
                }
                out
            }
            Metric::Full(q) => m * q,
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        match self {
            Metric::Diagonal(d) => {
                if d.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(name.to_string()));
                }
                let max = d.iter().fold(0.0_f64, |a, &b| a.max(b));
                if let Some(min) = d.iter().copied().reduce(f64::min) {
                    if min < -METRIC_TOLERANCE * max.max(0.0) {
                        return Err(Error::NotPsd {
                            name: name.to_string(),
                            detail: format!("diagonal entry {min:e}"),
                        });
                    }
                }
                Ok(())
            }
            Metric::Full(m) => {
                if !m.is_square() {
                    return Err(Error::Dimension(format!("{name} must be square")));
                }
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(name.to_string()));
                }
                let scale = m.amax();
                for i in 0..m.nrows() {
                    for j in 0..i {
                        if (m[(i, j)] - m[(j, i)]).abs() > METRIC_TOLERANCE * scale {
                            return Err(Error::NotPsd {
                                name: name.to_string(),
                                detail: format!("asymmetric at ({i}, {j})"),
                            });
                        }
                    }
                }
                let eig = SymmetricEigen::new(symmetrize(m));
                let max = eig.eigenvalues.max();
                let min = eig.eigenvalues.min();
                if min < -METRIC_TOLERANCE * max.max(0.0) {
                    return Err(Error::NotPsd {
                        name: name.to_string(),
                        detail: format!("eigenvalue {min:e}"),
                    });
                }
                Ok(())
            }
        }
    }

    /// Symmetric square root and pseudo-inverse square root.
    fn sqrt_pair(&self) -> (Metric, Metric) {
        match self {
            Metric::Diagonal(d) => {
                let max = d.max().max(0.0);
                let root = d.map(|v| v.max(0.0).sqrt());
                let inv = d.map(|v| {
                    if v > METRIC_TOLERANCE * max {
                        1.0 / v.sqrt()
                    } else {
                        0.0
                    }
                });
                (Metric::Diagonal(root), Metric::Diagonal(inv))
            }
            Metric::Full(m) => {
                let eig = SymmetricEigen::new(symmetrize(m));
                let max = eig.eigenvalues.max().max(0.0);
                let root = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
                let inv = eig.eigenvalues.map(|v| {
                    if v > METRIC_TOLERANCE * max {
                        1.0 / v.sqrt()
                    } else {
                        0.0
                    }
                });
                let u = &eig.eigenvectors;
                let rebuild = |s: &DVector<f64>| {
                    let scaled = Metric::Diagonal(s.clone()).right_mul(u);
                    symmetrize(&(scaled * u.transpose()))
                };
                (Metric::Full(rebuild(&root)), Metric::Full(rebuild(&inv)))
            }
        }
    }
}

/// Statistical triplet `(X, Q, D)`.
#[derive(Debug, Clone)]
pub struct Triplet {
    x: DMatrix<f64>,
    q: Metric,
    d: Metric,
}

impl Triplet {
    pub fn new(x: DMatrix<f64>, q: Metric, d: Metric) -> Result<Self> {
        let (n, p) = x.shape();
        if n < 2 || p < 1 {
            return Err(Error::Dimension(format!(
                "triplet needs n >= 2 rows and p >= 1 columns, got {n} x {p}"
            )));
        }
        if q.dim() != p {
            return Err(Error::Dimension(format!(
                "Q is {0}x{0}, X has {p} columns",
                q.dim()
            )));
        }
        if d.dim() != n {
            return Err(Error::Dimension(format!(
                "D is {0}x{0}, X has {n} rows",
                d.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("X".into()));
        }
        q.validate("Q")?;
        d.validate("D")?;
        Ok(Triplet { x, q, d })
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn q(&self) -> &Metric {
        &self.q
    }

    pub fn d(&self) -> &Metric {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }
}

/// Outcome of a triplet analysis.
#[derive(Debug, Clone)]
pub struct DiagramResult {
    /// Nonzero eigenvalues in decreasing order.
    pub eigenvalues: Vec<f64>,
    /// `A`, Q-orthonormal, p × r.
    pub principal_axes: DMatrix<f64>,
    /// `K`, D-orthonormal, n × r.
    pub principal_components: DMatrix<f64>,
    /// `R = X Q A`
    pub row_scores: DMatrix<f64>,
    /// `C = Xᵀ D K`
    pub column_scores: DMatrix<f64>,
    pub rank: usize,
    /// Sum of all eigenvalues, including axes dropped by truncation.
    pub total_inertia: f64,
}

impl DiagramResult {
    /// Share of the total inertia carried by each retained axis.
    pub fn shares(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .map(|l| l / self.total_inertia)
            .collect()
    }

    /// Leading `k` columns of the row scores.
    pub fn leading_row_scores(&self, k: usize) -> DMatrix<f64> {
        let k = k.min(self.rank);
        self.row_scores.columns(0, k).into_owned()
    }
}

/// Eigen-analysis of a triplet.
///
/// Returns every axis whose eigenvalue exceeds `RANK_TOLERANCE · λ_max`,
/// truncated to `max_axes` when given. Axes are oriented so that the column
/// score of largest magnitude is positive.
pub fn decompose(triplet: &Triplet, max_axes: Option<usize>) -> Result<DiagramResult> {
    let (n, p) = triplet.x.shape();
    let x = &triplet.x;
    let q = &triplet.q;
    let d = &triplet.d;

    let mut result = if p <= n {
        let (q_root, q_inv_root) = q.sqrt_pair();
        let xtdx = x.transpose() * d.left_mul(x);
        let op = symmetrize(&q_root.right_mul(&q_root.left_mul(&xtdx)));
        let (values, vectors, total) = sorted_spectrum(&op);
        let r = retained(&values, max_axes)?;
        let axes = q_inv_root.left_mul(&vectors.columns(0, r).into_owned());
        let rows = q.right_mul(x) * &axes;
        let mut comps = rows.clone();
        for k in 0..r {
            let mut c = comps.column_mut(k);
            c /= values[k].sqrt();
        }
        let cols = x.transpose() * d.left_mul(&comps);
        DiagramResult {
            eigenvalues: values[..r].to_vec(),
            principal_axes: axes,
            principal_components: comps,
            row_scores: rows,
            column_scores: cols,
            rank: r,
            total_inertia: total,
        }
    } else {
        let (d_root, d_inv_root) = d.sqrt_pair();
        let xqxt = q.right_mul(x) * x.transpose();
        let op = symmetrize(&d_root.right_mul(&d_root.left_mul(&xqxt)));
        let (values, vectors, total) = sorted_spectrum(&op);
        let r = retained(&values, max_axes)?;
        let comps = d_inv_root.left_mul(&vectors.columns(0, r).into_owned());
        let cols = x.transpose() * d.left_mul(&comps);
        let mut axes = cols.clone();
        for k in 0..r {
            let mut c = axes.column_mut(k);
            c /= values[k].sqrt();
        }
        let rows = q.right_mul(x) * &axes;
        DiagramResult {
            eigenvalues: values[..r].to_vec(),
            principal_axes: axes,
            principal_components: comps,
            row_scores: rows,
            column_scores: cols,
            rank: r,
            total_inertia: total,
        }
    };
    orient_axes(&mut result);
    Ok(result)
}

/// Analysis of `(X, Q, S)` where the row operator `S` is symmetric but may be
/// indefinite (spatially weighted analyses).
///
/// Eigenvalues are kept when `|λ| > RANK_TOLERANCE · max|λ|` and returned in
/// decreasing order, so negative ones come last. Components are scaled by
/// `|λ|^-½`, giving `Kᵀ S K = sign(Λ)`.
pub fn decompose_signed(
    x: &DMatrix<f64>,
    q: &Metric,
    s: &DMatrix<f64>,
    max_axes: Option<usize>,
) -> Result<DiagramResult> {
    let (n, p) = x.shape();
    if q.dim() != p || s.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "X is {n}x{p}, Q is {0}x{0}, S is {1}x{2}",
            q.dim(),
            s.nrows(),
            s.ncols()
        )));
    }
    if x.iter().chain(s.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("X or S".into()));
    }
    q.validate("Q")?;
    let (q_root, q_inv_root) = q.sqrt_pair();
    let xtsx = x.transpose() * symmetrize(s) * x;
    let op = symmetrize(&q_root.right_mul(&q_root.left_mul(&xtsx)));
    let eig = SymmetricEigen::new(op);
    let total = eig.eigenvalues.sum();
    let scale = eig.eigenvalues.amax();
    let mut order: Vec<usize> = (0..p)
        .filter(|&i| eig.eigenvalues[i].abs() > RANK_TOLERANCE * scale)
        .collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    if let Some(m) = max_axes {
        order.truncate(m);
    }
    if order.is_empty() {
        return Err(Error::RankDeficient(
            "operator has no nonzero eigenvalue".into(),
        ));
    }
    let r = order.len();
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let u = DMatrix::from_fn(p, r, |i, k| eig.eigenvectors[(i, order[k])]);
    let axes = q_inv_root.left_mul(&u);
    let rows = q.right_mul(x) * &axes;
    let mut comps = rows.clone();
    for k in 0..r {
        let mut c = comps.column_mut(k);
        c /= values[k].abs().sqrt();
    }
    let cols = x.transpose() * s * &comps;
    let mut result = DiagramResult {
        eigenvalues: values,
        principal_axes: axes,
        principal_components: comps,
        row_scores: rows,
        column_scores: cols,
        rank: r,
        total_inertia: total,
    };
    orient_axes(&mut result);
    Ok(result)
}

/// Supplementary rows: `Y Q A`.
pub fn project_rows(
    triplet: &Triplet,
    result: &DiagramResult,
    y: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if y.ncols() != triplet.p() {
        return Err(Error::Dimension(format!(
            "supplementary rows have {} columns, triplet has {}",
            y.ncols(),
            triplet.p()
        )));
    }
    Ok(triplet.q.right_mul(y) * &result.principal_axes)
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigenpairs sorted by decreasing eigenvalue (stable among ties), plus the trace.
pub(crate) fn sorted_spectrum(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>, f64) {
    let eig = SymmetricEigen::new(m.clone());
    let dim = m.nrows();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(dim, dim, |i, k| eig.eigenvectors[(i, order[k])]);
    (values, vectors, eig.eigenvalues.sum())
}

fn retained(values: &[f64], max_axes: Option<usize>) -> Result<usize> {
    let top = values.first().copied().unwrap_or(0.0);
    if !(top > 0.0) {
        return Err(Error::RankDeficient(
            "diagram has no positive eigenvalue".into(),
        ));
    }
    let mut r = values
        .iter()
        .take_while(|&&v| v > RANK_TOLERANCE * top)
        .count();
    if let Some(m) = max_axes {
        r = r.min(m);
    }
    if r == 0 {
        return Err(Error::InvalidInput("max_axes must be at least 1".into()));
    }
    Ok(r)
}

/// Flip every axis so that its largest-magnitude column score is positive.
fn orient_axes(res: &mut DiagramResult) {
    for k in 0..res.rank {
        let col = res.column_scores.column(k);
        let mut best = 0;
        for j in 1..col.len() {
            if col[j].abs() > col[best].abs() {
                best = j;
            }
        }
        if col[best] < 0.0 {
            for m in [
                &mut res.principal_axes,
                &mut res.principal_components,
                &mut res.row_scores,
                &mut res.column_scores,
            ] {
                let mut c = m.column_mut(k);
                c.neg_mut();
            }
        }
    }
}
