//! Procrustes concordance between two score configurations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::permutation::{self, Alternative, NullSummary};

#[derive(Debug, Clone, PartialEq)]
pub struct ProcrustesResult {
    pub statistic: f64,
    pub n_perm: usize,
    pub p_value: f64,
    pub seed: u64,
    pub alternative: Alternative,
    pub null_summary: NullSummary,
}

/// Center columns and scale to unit total sum of squares.
fn normalize(s: &DMatrix<f64>, name: &str) -> Result<DMatrix<f64>> {
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(name.into()));
    }
    let n = s.nrows() as f64;
    let mut c = s.clone();
    for mut col in c.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
    let ss = c.norm_squared();
    let scale = s.amax().max(f64::MIN_POSITIVE);
    if !(ss.sqrt() > 1e-14 * scale * n.sqrt()) {
        return Err(Error::ZeroVariance(format!(
            "configuration {name} has no spread"
        )));
    }
    Ok(c / ss.sqrt())
}

fn check_shapes(s1: &DMatrix<f64>, s2: &DMatrix<f64>) -> Result<()> {
    if s1.shape() != s2.shape() {
        return Err(Error::Dimension(format!(
            "configurations are {}x{} and {}x{}",
            s1.nrows(),
            s1.ncols(),
            s2.nrows(),
            s2.ncols()
        )));
    }
    if s1.ncols() == 0 || s1.nrows() <= s1.ncols() {
        return Err(Error::Dimension(format!(
            "need more rows than columns, got {}x{}",
            s1.nrows(),
            s1.ncols()
        )));
    }
    Ok(())
}

fn trace_norm(m: DMatrix<f64>) -> f64 {
    m.singular_values().sum()
}

/// Procrustes correlation: sum of the singular values of `S1ᵀS2` after both
/// configurations are centered and scaled to unit sum of squares.
pub fn procrustes_stat(s1: &DMatrix<f64>, s2: &DMatrix<f64>) -> Result<f64> {
    check_shapes(s1, s2)?;
    let a = normalize(s1, "S1")?;
    let b = normalize(s2, "S2")?;
    Ok(trace_norm(a.transpose() * b))
}

/// Permutation test of the Procrustes correlation: rows of `S2` are
/// shuffled, alternative greater.
pub fn procrustes_test(
    s1: &DMatrix<f64>,
    s2: &DMatrix<f64>,
    n_perm: usize,
    seed: u64,
) -> Result<ProcrustesResult> {
    check_shapes(s1, s2)?;
    if n_perm == 0 {
        return Err(Error::InvalidInput("n_perm must be at least 1".into()));
    }
    let a = normalize(s1, "S1")?;
    let b = normalize(s2, "S2")?;
    let at = a.transpose();
    let statistic = trace_norm(&at * &b);
    let null = permutation::null_distribution(b.nrows(), n_perm, seed, |perm| {
        trace_norm(&at * b.select_rows(perm))
    });
    let alternative = Alternative::Greater;
    Ok(ProcrustesResult {
        statistic,
        n_perm,
        p_value: permutation::p_value(statistic, &null, alternative),
        seed,
        alternative,
        null_summary: NullSummary::from_values(&null),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            8,
            2,
            &[
                0.3, 1.1, -0.4, 0.2, 1.7, -0.9, 0.5, 0.5, -1.2, 0.8, 0.9, -1.6, -0.1, 0.0, 2.1, 0.4,
            ],
        )
    }

    fn other() -> DMatrix<f64> {
        DMatrix::from_row_slice(
            8,
            2,
            &[
                1.0, 0.2, 0.1, -0.3, 1.2, -1.1, -0.2, 0.9, -0.8, 0.1, 1.4, -0.7, 0.3, 0.6, 1.6, 1.5,
            ],
        )
    }

    /// Residual sum of squares of the best rotation or reflection of `b`
    /// onto `a`, both normalized, found by scanning the rotation angle.
    fn brute_force_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        let a = normalize(a, "a").unwrap();
        let b = normalize(b, "b").unwrap();
        let fit = |theta: f64, flip: f64| {
            let r = DMatrix::from_row_slice(
                2,
                2,
                &[
                    theta.cos(),
                    -flip * theta.sin(),
                    theta.sin(),
                    flip * theta.cos(),
                ],
            );
            (&b * r).dot(&a)
        };
        let mut best = f64::NEG_INFINITY;
        for flip in [1.0, -1.0] {
            let steps = 20_000;
            let mut theta_best = 0.0;
            let mut value_best = f64::NEG_INFINITY;
            for s in 0..steps {
                let t = s as f64 / steps as f64 * std::f64::consts::TAU;
                let v = fit(t, flip);
                if v > value_best {
                    value_best = v;
                    theta_best = t;
                }
            }
            // golden-section refinement around the grid optimum
            let h = std::f64::consts::TAU / steps as f64;
            let (mut lo, mut hi) = (theta_best - h, theta_best + h);
            let g = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..100 {
                let m1 = hi - g * (hi - lo);
                let m2 = lo + g * (hi - lo);
                if fit(m1, flip) > fit(m2, flip) {
                    hi = m2;
                } else {
                    lo = m1;
                }
            }
            best = best.max(fit(0.5 * (lo + hi), flip));
        }
        // with the optimal scaling c = best the residual is 1 − best²
        1.0 - best * best
    }

    #[test]
    fn matches_rotation_search() {
        let stat = procrustes_stat(&sample(), &other()).unwrap();
        let m2 = brute_force_residual(&sample(), &other());
        assert_relative_eq!(stat * stat, 1.0 - m2, epsilon = 1e-10);
    }

    #[test]
    fn perfect_match_under_similarity() {
        let s = sample();
        let r = DMatrix::from_row_slice(2, 2, &[0.6, -0.8, 0.8, 0.6]);
        let t = (&s * r) * 3.5;
        assert_relative_eq!(procrustes_stat(&s, &t).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn shape_and_degeneracy_errors() {
        let s = sample();
        assert!(matches!(
            procrustes_stat(&s, &s.rows(0, 7).into_owned()),
            Err(Error::Dimension(_))
        ));
        let flat = DMatrix::from_element(8, 2, 4.0);
        assert!(matches!(
            procrustes_stat(&s, &flat),
            Err(Error::ZeroVariance(_))
        ));
        let wide = DMatrix::from_element(2, 2, 1.0);
        assert!(procrustes_stat(&wide, &wide).is_err());
    }

    #[test]
    fn exhaustive_permutations_of_three_rows() {
        let s1 = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, 3.0]);
        let s2 = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 3.0]);
        let observed = procrustes_stat(&s1, &s2).unwrap();
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let hits = perms
            .iter()
            .filter(|p| {
                procrustes_stat(&s1, &s2.select_rows(p.iter())).unwrap() >= observed - 1e-12
            })
            .count();
        let exact = hits as f64 / 6.0;
        let n_perm = 6000;
        let res = procrustes_test(&s1, &s2, n_perm, 9).unwrap();
        assert_relative_eq!(res.statistic, observed, epsilon = 1e-15);
        assert!(
            (res.p_value - exact).abs() < 0.03,
            "{} vs {exact}",
            res.p_value
        );
    }

    #[test]
    fn single_permutation_of_perfect_match() {
        let s = sample();
        let res = procrustes_test(&s, &s, 1, 0).unwrap();
        assert_eq!(res.p_value, 0.5);
        assert!(procrustes_test(&s, &s, 0, 0).is_err());
    }
}
