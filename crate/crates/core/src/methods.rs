//! PCA-family analyses expressed as triplets.
//!
//! All methods share the same table: z-scores of the dataset (population
//! variance, divisor `n`), column metric `Q = I` and uniform row weights
//! `D = I/n`. Ratios such as the between-class or explained share are taken
//! against the total inertia of that PCA, which equals the number of
//! variables.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::autocorr::moran_generalized;
use crate::dataset::Dataset;
use crate::diagram::{decompose, decompose_signed, project_rows, DiagramResult, Metric, Triplet};
use crate::error::{Error, Result};
use crate::graph::{SpatialWeights, WeightsKind};
use crate::mem::{mem_basis, select_mem};

/// Relative tolerance of the pivoted orthogonalization of predictors.
pub const COLLINEARITY_TOLERANCE: f64 = 1e-9;

/// Group membership of every observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    groups: Vec<String>,
    membership: Vec<usize>,
}

impl Partition {
    /// Groups are numbered in sorted label order.
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidInput("empty partition".into()));
        }
        let mut index: BTreeMap<&str, usize> = BTreeMap::new();
        for l in labels {
            index.entry(l.as_ref()).or_insert(0);
        }
        let groups: Vec<String> = index.keys().map(|s| s.to_string()).collect();
        for (k, v) in index.values_mut().enumerate() {
            *v = k;
        }
        let membership = labels.iter().map(|l| index[l.as_ref()]).collect();
        Ok(Partition { groups, membership })
    }

    pub fn n(&self) -> usize {
        self.membership.len()
    }

    /// Number of groups.
    pub fn g(&self) -> usize {
        self.groups.len()
    }

    pub fn group_names(&self) -> &[String] {
        &self.groups
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.g()];
        for &m in &self.membership {
            sizes[m] += 1;
        }
        sizes
    }

    /// Dummy matrix `Y`, n × g.
    pub fn dummy(&self) -> DMatrix<f64> {
        let mut y = DMatrix::zeros(self.n(), self.g());
        for (i, &m) in self.membership.iter().enumerate() {
            y[(i, m)] = 1.0;
        }
        y
    }
}

/// Column-centered (and optionally standardized) table, variance divisor `n`.
pub fn prepare_table(data: &Dataset, standardize: bool, center: bool) -> Result<DMatrix<f64>> {
    let n = data.n() as f64;
    let mut x = data.values().clone();
    for (j, mut col) in x.column_iter_mut().enumerate() {
        let mean = col.sum() / n;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        if center {
            col.add_scalar_mut(-mean);
        }
        if standardize {
            let scale = col.amax().max(mean.abs());
            if !(sd > 1e-14 * scale) {
                return Err(Error::ZeroVariance(format!(
                    "variable `{}` is constant",
                    data.labels()[j]
                )));
            }
            col /= sd;
        }
    }
    Ok(x)
}

/// z-scores of every variable.
pub fn standardized(data: &Dataset) -> Result<DMatrix<f64>> {
    prepare_table(data, true, true)
}

/// The PCA triplet `(X, I, I/n)`.
pub fn pca_triplet(data: &Dataset, standardize: bool, center: bool) -> Result<Triplet> {
    Triplet::new(
        prepare_table(data, standardize, center)?,
        Metric::identity(data.p()),
        Metric::uniform(data.n()),
    )
}

/// Principal component analysis; `standardize` selects the correlation PCA.
pub fn pca(data: &Dataset, standardize: bool, center: bool) -> Result<DiagramResult> {
    decompose(&pca_triplet(data, standardize, center)?, None)
}

#[derive(Debug, Clone)]
pub struct BcaResult {
    /// Analysis of the group-means triplet `(A, Q, D_Y)`.
    pub diagram: DiagramResult,
    /// `A`, g × p.
    pub group_means: DMatrix<f64>,
    /// Diagonal of `D_Y = Yᵀ D Y`.
    pub group_weights: Vec<f64>,
    /// Between-groups inertia over total inertia.
    pub between_ratio: f64,
    /// Observations projected on the BCA axes, `X Q A`.
    pub row_projections: DMatrix<f64>,
    /// Every group holds a single observation.
    pub degenerate: bool,
}

/// Between-class analysis.
pub fn bca(data: &Dataset, partition: &Partition) -> Result<BcaResult> {
    if partition.n() != data.n() {
        return Err(Error::Dimension(format!(
            "partition covers {} observations, dataset has {}",
            partition.n(),
            data.n()
        )));
    }
    if partition.g() < 2 {
        return Err(Error::InvalidInput(
            "between-class analysis needs at least 2 groups".into(),
        ));
    }
    let full = pca_triplet(data, true, true)?;
    let total = decompose(&full, None)?.total_inertia;
    let x = full.x();
    let d = vec![1.0 / data.n() as f64; data.n()];
    let g = partition.g();
    let mut weights = vec![0.0; g];
    let mut means = DMatrix::zeros(g, data.p());
    for (i, &m) in partition.membership().iter().enumerate() {
        weights[m] += d[i];
        let mut row = means.row_mut(m);
        row += x.row(i) * d[i];
    }
    for (m, &wm) in weights.iter().enumerate() {
        if !(wm > 0.0) {
            return Err(Error::InvalidInput(format!(
                "group `{}` is empty",
                partition.group_names()[m]
            )));
        }
        let mut row = means.row_mut(m);
        row /= wm;
    }
    let degenerate = partition.group_sizes().iter().all(|&s| s == 1);
    if degenerate {
        log::warn!("every group holds a single observation; BCA reduces to PCA");
    }
    let triplet = Triplet::new(
        means.clone(),
        Metric::identity(data.p()),
        Metric::Diagonal(DVector::from_vec(weights.clone())),
    )?;
    let diagram = decompose(&triplet, None)?;
    let row_projections = project_rows(&full, &diagram, x)?;
    Ok(BcaResult {
        between_ratio: diagram.total_inertia / total,
        diagram,
        group_means: means,
        group_weights: weights,
        row_projections,
        degenerate,
    })
}

/// D-orthonormal basis of the column space of `z`, built by modified
/// Gram–Schmidt with column pivoting. Columns whose remaining D-norm falls
/// below `COLLINEARITY_TOLERANCE` times the largest original norm are
/// reported as dropped.
pub fn d_orthonormal_basis(z: &DMatrix<f64>, d: &[f64]) -> Result<(DMatrix<f64>, Vec<usize>)> {
    let (n, q) = z.shape();
    if d.len() != n {
        return Err(Error::Dimension(format!(
            "{} row weights for {n} rows",
            d.len()
        )));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("predictors".into()));
    }
    let dnorm = |v: &DVector<f64>| v.iter().zip(d).map(|(a, w)| a * a * w).sum::<f64>().sqrt();
    let ddot = |a: &DVector<f64>, b: &DVector<f64>| {
        a.iter()
            .zip(b.iter())
            .zip(d)
            .map(|((x, y), w)| x * y * w)
            .sum::<f64>()
    };
    let mut work: Vec<DVector<f64>> = (0..q).map(|j| z.column(j).into_owned()).collect();
    let scale = work.iter().map(&dnorm).fold(0.0_f64, f64::max);
    let mut remaining: Vec<usize> = (0..q).collect();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    while !remaining.is_empty() {
        let (pos, norm) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &j)| (pos, dnorm(&work[j])))
            .fold(
                (0, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if !(norm > COLLINEARITY_TOLERANCE * scale) {
            break;
        }
        let j = remaining.remove(pos);
        let mut u = work[j].clone() / norm;
        // second pass against the accepted basis
        for b in &basis {
            let c = ddot(b, &u);
            u -= b * c;
        }
        let un = dnorm(&u);
        u /= un;
        for &k in &remaining {
            let c = ddot(&u, &work[k]);
            work[k] -= &u * c;
        }
        basis.push(u);
    }
    if basis.is_empty() {
        return Err(Error::RankDeficient("predictor matrix has rank 0".into()));
    }
    remaining.sort_unstable();
    if !remaining.is_empty() {
        log::warn!("dropped collinear predictor columns {remaining:?}");
    }
    Ok((DMatrix::from_columns(&basis), remaining))
}

/// The D-orthogonal projector `P_Z = Z (Zᵀ D Z)⁻ Zᵀ D`, n × n.
pub fn projector(z: &DMatrix<f64>, d: &[f64]) -> Result<DMatrix<f64>> {
    let (u, _) = d_orthonormal_basis(z, d)?;
    let ud = Metric::Diagonal(DVector::from_column_slice(d)).right_mul(&u.transpose());
    Ok(&u * ud)
}

#[derive(Debug, Clone)]
pub struct PcaivResult {
    /// Analysis of `(X̂, Q, D)`.
    pub diagram: DiagramResult,
    /// Inertia explained by the predictors over total inertia.
    pub explained_ratio: f64,
    /// Predictor columns retained after the collinearity check.
    pub predictors: DMatrix<f64>,
    /// Indices of predictor columns dropped as collinear.
    pub dropped_columns: Vec<usize>,
    /// `X̂ = P_Z X`
    pub fitted: DMatrix<f64>,
    /// Observations projected on the PCAIV axes, `X Q A`.
    pub row_projections: DMatrix<f64>,
}

/// PCA with respect to instrumental variables (redundancy analysis).
pub fn pcaiv(data: &Dataset, z: &DMatrix<f64>) -> Result<PcaivResult> {
    if z.nrows() != data.n() {
        return Err(Error::Dimension(format!(
            "predictors have {} rows, dataset has {}",
            z.nrows(),
            data.n()
        )));
    }
    let full = pca_triplet(data, true, true)?;
    let total = decompose(&full, None)?.total_inertia;
    let d = vec![1.0 / data.n() as f64; data.n()];
    let (u, dropped) = d_orthonormal_basis(z, &d)?;
    let x = full.x();
    let coef = u.transpose() * Metric::Diagonal(DVector::from_vec(d)).left_mul(x);
    let fitted = &u * coef;
    let kept: Vec<usize> = (0..z.ncols()).filter(|j| !dropped.contains(j)).collect();
    let predictors = z.select_columns(&kept);
    let triplet = Triplet::new(
        fitted.clone(),
        Metric::identity(data.p()),
        Metric::uniform(data.n()),
    )?;
    let diagram = decompose(&triplet, None)?;
    let row_projections = project_rows(&full, &diagram, x)?;
    Ok(PcaivResult {
        explained_ratio: diagram.total_inertia / total,
        diagram,
        predictors,
        dropped_columns: dropped,
        fitted,
        row_projections,
    })
}

/// Orthogonal polynomial of the coordinates.
///
/// Coordinates are centered and scaled (D-weighted), the monomials are
/// formed in the order `x, y, x², xy, y², x³, x²y, xy², y³`, then
/// D-orthogonalized against the constant and each other in that order and
/// D-normalized. Degree 2 yields 5 columns.
pub fn ortho_poly(coords: &DMatrix<f64>, degree: usize, d: &[f64]) -> Result<DMatrix<f64>> {
    if !(1..=3).contains(&degree) {
        return Err(Error::OutOfRange {
            what: "polynomial degree",
            value: degree,
            min: 1,
            max: 3,
        });
    }
    let n = coords.nrows();
    if coords.ncols() != 2 || d.len() != n {
        return Err(Error::Dimension(format!(
            "coordinates must be n x 2 with n row weights, got {}x{} and {}",
            n,
            coords.ncols(),
            d.len()
        )));
    }
    if coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("coordinates".into()));
    }
    let dsum: f64 = d.iter().sum();
    let ddot = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .zip(d)
            .map(|((x, y), w)| x * y * w)
            .sum::<f64>()
    };
    let mut scaled = [vec![0.0; n], vec![0.0; n]];
    for (k, out) in scaled.iter_mut().enumerate() {
        let col: Vec<f64> = coords.column(k).iter().copied().collect();
        let mean = col.iter().zip(d).map(|(a, w)| a * w).sum::<f64>() / dsum;
        let centered: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let sd = (ddot(&centered, &centered) / dsum).sqrt();
        let spread = col.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let inv = if sd > 1e-14 * spread { 1.0 / sd } else { 0.0 };
        *out = centered.iter().map(|v| v * inv).collect();
    }
    let (x, y) = (&scaled[0], &scaled[1]);
    let mut terms: Vec<(String, Vec<f64>)> = Vec::new();
    for deg in 1..=degree {
        for a in (0..=deg).rev() {
            let b = deg - a;
            let col = (0..n)
                .map(|i| x[i].powi(a as i32) * y[i].powi(b as i32))
                .collect();
            terms.push((format!("x^{a} y^{b}"), col));
        }
    }
    let unit = (1.0 / dsum).sqrt();
    let mut basis: Vec<Vec<f64>> = vec![vec![unit; n]];
    let mut kept = Vec::new();
    for (name, raw) in terms {
        let raw_norm = ddot(&raw, &raw).sqrt();
        let mut v = raw;
        for _ in 0..2 {
            for b in &basis {
                let c = ddot(b, &v);
                v.iter_mut().zip(b).for_each(|(vi, bi)| *vi -= c * bi);
            }
        }
        let norm = ddot(&v, &v).sqrt();
        if !(norm > COLLINEARITY_TOLERANCE * raw_norm) || raw_norm == 0.0 {
            log::warn!("polynomial term {name} is collinear with lower-order terms; dropped");
            continue;
        }
        v.iter_mut().for_each(|vi| *vi /= norm);
        basis.push(v.clone());
        kept.push(v);
    }
    if kept.is_empty() {
        return Err(Error::RankDeficient(
            "coordinates do not support any polynomial term".into(),
        ));
    }
    Ok(DMatrix::from_fn(n, kept.len(), |i, k| kept[k][i]))
}

/// PCAIV on an orthogonal polynomial of the coordinates.
pub fn pcaiv_poly(data: &Dataset, coords: &DMatrix<f64>, degree: usize) -> Result<PcaivResult> {
    let d = vec![1.0 / data.n() as f64; data.n()];
    pcaiv(data, &ortho_poly(coords, degree, &d)?)
}

/// PCAIV on the first `k` Moran's eigenvector maps of `w`.
pub fn pcaiv_mem(data: &Dataset, w: &SpatialWeights, k: usize) -> Result<PcaivResult> {
    check_weights(data, w)?;
    pcaiv(data, &select_mem(&mem_basis(w)?, k)?)
}

#[derive(Debug, Clone)]
pub struct MultispatiResult {
    /// Positive-eigenvalue axes of `(X, Q, ½(WᵀD + DW))`.
    pub diagram: DiagramResult,
    /// Full nonzero spectrum, negative eigenvalues included.
    pub all_eigenvalues: Vec<f64>,
    /// `‖r_k‖²_D` per axis.
    pub axis_variance: Vec<f64>,
    /// Generalized Moran coefficient of each axis score.
    pub axis_mc: Vec<f64>,
    /// `W R`
    pub lag_scores: DMatrix<f64>,
}

fn check_weights(data: &Dataset, w: &SpatialWeights) -> Result<()> {
    if w.n() != data.n() {
        return Err(Error::Dimension(format!(
            "weights are {0}x{0}, dataset has {1} rows",
            w.n(),
            data.n()
        )));
    }
    Ok(())
}

/// Multivariate spatial analysis based on Moran's index.
///
/// Each axis maximizes `MC_D(r) · ‖r‖²_D` for `r = X Q a`.
pub fn multispati(data: &Dataset, w: &SpatialWeights) -> Result<MultispatiResult> {
    check_weights(data, w)?;
    if w.kind() != WeightsKind::RowStandardized {
        log::warn!("MULTISPATI on weights that are not row-standardized");
    }
    let n = data.n();
    let x = standardized(data)?;
    let d = vec![1.0 / n as f64; n];
    let wd = w.to_dense();
    let dm = Metric::Diagonal(DVector::from_vec(d.clone()));
    let s = (wd.transpose().scale(1.0 / n as f64) + dm.left_mul(&wd)) * 0.5;
    let full = decompose_signed(&x, &Metric::identity(data.p()), &s, None)?;
    let positive = full.eigenvalues.iter().filter(|&&l| l > 0.0).count();
    if positive == 0 {
        return Err(Error::Numerical("no positive spatial structure".into()));
    }
    let diagram = DiagramResult {
        eigenvalues: full.eigenvalues[..positive].to_vec(),
        principal_axes: full.principal_axes.columns(0, positive).into_owned(),
        principal_components: full.principal_components.columns(0, positive).into_owned(),
        row_scores: full.row_scores.columns(0, positive).into_owned(),
        column_scores: full.column_scores.columns(0, positive).into_owned(),
        rank: positive,
        total_inertia: full.total_inertia,
    };
    let mut axis_variance = Vec::with_capacity(positive);
    let mut axis_mc = Vec::with_capacity(positive);
    for k in 0..positive {
        let r: Vec<f64> = diagram.row_scores.column(k).iter().copied().collect();
        axis_variance.push(r.iter().zip(&d).map(|(a, w)| a * a * w).sum());
        axis_mc.push(moran_generalized(&r, w, &d)?);
    }
    let lag_scores = w.lag_matrix(&diagram.row_scores)?;
    Ok(MultispatiResult {
        diagram,
        all_eigenvalues: full.eigenvalues,
        axis_variance,
        axis_mc,
        lag_scores,
    })
}

/// Spatially lagged scores `W R`.
pub fn lag_scores(scores: &DMatrix<f64>, w: &SpatialWeights) -> Result<DMatrix<f64>> {
    w.lag_matrix(scores)
}
