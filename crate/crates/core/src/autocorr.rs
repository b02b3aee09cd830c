//! Moran's coefficient, its permutation test and the Moran scatterplot.

use crate::error::{Error, Result};
use crate::graph::{SpatialWeights, WeightsKind};
use crate::permutation::{self, Alternative, NullSummary};

/// Outcome of a Moran permutation test.
#[derive(Debug, Clone, PartialEq)]
pub struct MoranResult {
    pub mc: f64,
    pub n_perm: usize,
    pub p_value: f64,
    pub alternative: Alternative,
    pub seed: u64,
    pub null_summary: NullSummary,
}

/// Data of the Moran scatterplot of a variable.
#[derive(Debug, Clone, PartialEq)]
pub struct MoranScatter {
    /// Centered values.
    pub z: Vec<f64>,
    /// `W z`
    pub z_lag: Vec<f64>,
    /// Least-squares slope of `z_lag` on `z`.
    pub slope: f64,
    /// Cook's distance of each point in that regression.
    pub cooks_d: Vec<f64>,
}

impl MoranScatter {
    /// Index of the most influential observation.
    pub fn max_cooks_d(&self) -> usize {
        let mut best = 0;
        for (i, &d) in self.cooks_d.iter().enumerate() {
            if d > self.cooks_d[best] {
                best = i;
            }
        }
        best
    }
}

fn centered(x: &[f64], w: &SpatialWeights) -> Result<(Vec<f64>, f64)> {
    if x.len() != w.n() {
        return Err(Error::Dimension(format!(
            "vector has length {}, weights are {}x{}",
            x.len(),
            w.n(),
            w.n()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("variable".into()));
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let z: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let zz: f64 = z.iter().map(|v| v * v).sum();
    let scale = x
        .iter()
        .fold(0.0_f64, |a, v| a.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    if zz <= (1e-14 * scale).powi(2) * x.len() as f64 {
        return Err(Error::ZeroVariance("variable is constant".into()));
    }
    if !(w.total_weight() > 0.0) {
        return Err(Error::InvalidInput("weights sum to zero".into()));
    }
    Ok((z, zz))
}

/// Moran's coefficient `(n / 1ᵀW1) · zᵀWz / zᵀz`.
pub fn moran(x: &[f64], w: &SpatialWeights) -> Result<f64> {
    let (z, zz) = centered(x, w)?;
    Ok(x.len() as f64 / w.total_weight() * w.quadratic_form(&z) / zz)
}

/// Moran's coefficient under general diagonal row weights `D`:
/// `(1ᵀD1 / 1ᵀDW1) · rᵀDWr / rᵀDr` on the D-centered `r`.
///
/// For row-standardized `W` the leading factor is 1, and with uniform
/// weights the value coincides with [`moran`].
pub fn moran_generalized(r: &[f64], w: &SpatialWeights, d: &[f64]) -> Result<f64> {
    let n = w.n();
    if r.len() != n || d.len() != n {
        return Err(Error::Dimension(format!(
            "r has length {}, D has length {}, weights are {n}x{n}",
            r.len(),
            d.len()
        )));
    }
    if d.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::NotPsd {
            name: "D".into(),
            detail: "row weights must be finite and nonnegative".into(),
        });
    }
    centered(r, w)?;
    let dsum: f64 = d.iter().sum();
    let mean = r.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() / dsum;
    let z: Vec<f64> = r.iter().map(|v| v - mean).collect();
    let lag = w.lag_unchecked(&z);
    let num: f64 = (0..n).map(|i| z[i] * d[i] * lag[i]).sum();
    let den: f64 = (0..n).map(|i| z[i] * d[i] * z[i]).sum();
    if !(den > 0.0) {
        return Err(Error::ZeroVariance("D-weighted variance is zero".into()));
    }
    let ones = vec![1.0; n];
    let dw1: f64 = w
        .lag_unchecked(&ones)
        .iter()
        .zip(d)
        .map(|(a, b)| a * b)
        .sum();
    Ok(dsum / dw1 * num / den)
}

/// Monte-Carlo test of Moran's coefficient: values are permuted over
/// locations `n_perm` times.
pub fn moran_test(
    x: &[f64],
    w: &SpatialWeights,
    n_perm: usize,
    seed: u64,
    alternative: Alternative,
) -> Result<MoranResult> {
    if n_perm == 0 {
        return Err(Error::InvalidInput("n_perm must be at least 1".into()));
    }
    let (z, zz) = centered(x, w)?;
    let factor = x.len() as f64 / w.total_weight();
    let mc = factor * w.quadratic_form(&z) / zz;
    let null = permutation::null_distribution(z.len(), n_perm, seed, |perm| {
        let zp: Vec<f64> = perm.iter().map(|&i| z[i]).collect();
        factor * w.quadratic_form(&zp) / zz
    });
    Ok(MoranResult {
        mc,
        n_perm,
        p_value: permutation::p_value(mc, &null, alternative),
        alternative,
        seed,
        null_summary: NullSummary::from_values(&null),
    })
}

/// Moran scatterplot: centered values against their spatial lag, with the
/// regression slope and Cook's distances.
pub fn moran_scatter(x: &[f64], w: &SpatialWeights) -> Result<MoranScatter> {
    if w.kind() != WeightsKind::RowStandardized {
        log::warn!(
            "Moran scatterplot on weights that are not row-standardized; slope differs from MC"
        );
    }
    let (z, zz) = centered(x, w)?;
    let n = z.len();
    if n < 3 {
        return Err(Error::InvalidInput(
            "Moran scatterplot needs at least 3 units".into(),
        ));
    }
    let z_lag = w.lag_unchecked(&z);
    let slope = z.iter().zip(&z_lag).map(|(a, b)| a * b).sum::<f64>() / zz;
    let intercept = z_lag.iter().sum::<f64>() / n as f64;
    let resid: Vec<f64> = z
        .iter()
        .zip(&z_lag)
        .map(|(zi, li)| li - intercept - slope * zi)
        .collect();
    let sse: f64 = resid.iter().map(|e| e * e).sum();
    let s2 = sse / (n - 2) as f64;
    let cooks_d = z
        .iter()
        .zip(&resid)
        .map(|(zi, e)| {
            let h = 1.0 / n as f64 + zi * zi / zz;
            if s2 > 0.0 {
                e * e * h / (2.0 * s2 * (1.0 - h).powi(2))
            } else {
                0.0
            }
        })
        .collect();
    Ok(MoranScatter {
        z,
        z_lag,
        slope,
        cooks_d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{from_edge_list, row_standardize, Connectivity};
    use approx::assert_relative_eq;

    fn path(n: usize) -> SpatialWeights {
        let pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        row_standardize(&Connectivity::from_index_pairs(n, &pairs).unwrap()).unwrap()
    }

    /// Double-sum definition, O(n²).
    fn moran_double_sum(x: &[f64], w: &SpatialWeights) -> f64 {
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let (mut num, mut s0) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let wij = w.get(i, j);
                    num += wij * (x[i] - mean) * (x[j] - mean);
                    s0 += wij;
                }
            }
        }
        let den: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
        n as f64 * num / (s0 * den)
    }

    #[test]
    fn alternating_path_matches_double_sum() {
        let w = path(4);
        let x = [1.0, -1.0, 1.0, -1.0];
        let mc = moran(&x, &w).unwrap();
        assert_relative_eq!(mc, moran_double_sum(&x, &w), max_relative = 1e-12);
        // every neighbour has the opposite sign
        assert_relative_eq!(mc, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_variable_is_rejected() {
        assert!(matches!(
            moran(&[2.0; 4], &path(4)),
            Err(Error::ZeroVariance(_))
        ));
        assert!(matches!(
            moran(&[1.0, 2.0], &path(4)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn generalized_reduces_to_classical_with_uniform_weights() {
        let w = path(6);
        let x = [3.0, 1.0, 4.0, 1.0, 5.0, 9.0];
        let d = vec![1.0 / 6.0; 6];
        assert_relative_eq!(
            moran_generalized(&x, &w, &d).unwrap(),
            moran(&x, &w).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn single_permutation_p_value() {
        // path with a monotone trend: the observed value is the maximum
        // possible for any permutation but one tie, so p = 1/2 when the
        // single permuted value is lower.
        let w = path(8);
        let x: Vec<f64> = (0..8).map(|i| i as f64).collect();
        let res = moran_test(&x, &w, 1, 11, Alternative::Greater).unwrap();
        assert!(res.null_summary.max < res.mc);
        assert_eq!(res.p_value, 0.5);
        assert!(moran_test(&x, &w, 0, 11, Alternative::Greater).is_err());
    }

    #[test]
    fn seeded_test_is_reproducible() {
        let w = path(10);
        let x = [0.3, 1.2, -0.7, 2.2, 0.1, -1.5, 0.9, 0.4, -0.2, 1.1];
        let a = moran_test(&x, &w, 199, 5, Alternative::TwoSided).unwrap();
        let b = moran_test(&x, &w, 199, 5, Alternative::TwoSided).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scatter_slope_one_when_lag_equals_value() {
        // two separate adjacent pairs with equal values inside each pair
        let c = from_edge_list(&[("a", "b"), ("c", "d")], &["a", "b", "c", "d"]).unwrap();
        let w = row_standardize(&c).unwrap();
        let s = moran_scatter(&[1.0, 1.0, -1.0, -1.0], &w).unwrap();
        assert_relative_eq!(s.slope, 1.0, epsilon = 1e-12);
        assert_eq!(s.z, s.z_lag);
        assert!(s.cooks_d.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn scatter_slope_equals_moran() {
        let w = path(7);
        let x = [2.0, 3.5, 1.0, 0.0, 4.0, 4.5, 3.0];
        let s = moran_scatter(&x, &w).unwrap();
        assert_relative_eq!(s.slope, moran(&x, &w).unwrap(), max_relative = 1e-12);
    }
}
