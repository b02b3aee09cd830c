//! Randomized property checks shared by the property tests and the
//! acceptance runner.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::Rng;

use smva_core::diagram::{decompose, Metric, Triplet};
use smva_core::methods::projector;
use smva_core::permutation::substream;
use smva_core::{
    bca, mc_bounds, mem_basis, moran, moran_scatter, moran_test, multispati, pca, pcaiv,
    procrustes_stat, procrustes_test, row_standardize, Alternative, Connectivity, Dataset,
    Partition, SpatialWeights,
};

pub type Check = Result<(), TestCaseError>;

/// Run `test` on `cases` inputs drawn from `strategy` with a fixed seed.
pub fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Check,
) -> Result<(), String>
where
    S::Value: std::fmt::Debug,
{
    let config = Config {
        cases,
        failure_persistence: None,
        rng_algorithm: proptest::test_runner::RngAlgorithm::ChaCha,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(
        config,
        proptest::test_runner::TestRng::from_seed(
            proptest::test_runner::RngAlgorithm::ChaCha,
            &[7; 32],
        ),
    );
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn close(a: f64, b: f64, tol: f64, what: &str) -> Check {
    if (a - b).abs() <= tol {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!(
            "{what}: {a} vs {b} (tol {tol})"
        )))
    }
}

fn matrix_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64, what: &str) -> Check {
    let diff = (a - b).amax();
    if diff <= tol {
        Ok(())
    } else {
        Err(TestCaseError::fail(format!("{what}: max deviation {diff}")))
    }
}

// ---------------------------------------------------------------- inputs

#[derive(Debug, Clone)]
pub struct TripletCase {
    pub x: DMatrix<f64>,
    pub q: Metric,
    pub d: Metric,
}

impl TripletCase {
    pub fn triplet(&self) -> Triplet {
        Triplet::new(self.x.clone(), self.q.clone(), self.d.clone()).unwrap()
    }
}

pub fn triplet_case() -> impl Strategy<Value = TripletCase> {
    (2usize..=12, 1usize..=6, any::<bool>()).prop_flat_map(|(n, p, full_q)| {
        (
            prop::collection::vec(-5.0..5.0f64, n * p),
            prop::collection::vec(0.1..3.0f64, p * p),
            prop::collection::vec(0.05..2.0f64, n),
        )
            .prop_map(move |(xv, qv, dv)| {
                let x = DMatrix::from_vec(n, p, xv);
                let q = if full_q {
                    let m = DMatrix::from_vec(p, p, qv);
                    Metric::Full(&m * m.transpose() + DMatrix::identity(p, p) * 0.1)
                } else {
                    Metric::Diagonal(DVector::from_iterator(p, qv.into_iter().take(p)))
                };
                TripletCase {
                    x,
                    q,
                    d: Metric::Diagonal(DVector::from_vec(dv)),
                }
            })
    })
}

/// Connected graph: a path through all nodes plus random chords.
#[derive(Debug, Clone)]
pub struct GraphCase {
    pub n: usize,
    pub pairs: Vec<(usize, usize)>,
    pub x: Vec<f64>,
    pub seed: u64,
}

impl GraphCase {
    pub fn connectivity(&self) -> Connectivity {
        Connectivity::from_index_pairs(self.n, &self.pairs).unwrap()
    }

    pub fn row_weights(&self) -> SpatialWeights {
        row_standardize(&self.connectivity()).unwrap()
    }

    pub fn binary_weights(&self) -> SpatialWeights {
        SpatialWeights::binary(&self.connectivity())
    }
}

pub fn graph_case(min_n: usize, max_n: usize) -> impl Strategy<Value = GraphCase> {
    (min_n..=max_n).prop_flat_map(|n| {
        (
            prop::collection::vec((0..n, 0..n), 0..2 * n),
            prop::collection::vec(-10.0..10.0f64, n),
            any::<u64>(),
        )
            .prop_map(move |(extra, x, seed)| {
                let mut pairs: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
                pairs.extend(extra.into_iter().filter(|(a, b)| a != b));
                GraphCase { n, pairs, x, seed }
            })
            .prop_filter("non-constant values", |c| {
                let m = c.x.iter().sum::<f64>() / c.n as f64;
                c.x.iter().map(|v| (v - m).powi(2)).sum::<f64>() > 1e-6
            })
    })
}

fn dataset(values: DMatrix<f64>) -> Dataset {
    let ids = (0..values.nrows()).map(|i| format!("o{i}")).collect();
    let labels = (0..values.ncols()).map(|j| format!("v{j}")).collect();
    Dataset::new(ids, labels, values).unwrap()
}

#[derive(Debug, Clone)]
pub struct TableCase {
    pub graph: GraphCase,
    pub values: DMatrix<f64>,
    pub z: DMatrix<f64>,
    pub groups: Vec<usize>,
}

impl TableCase {
    pub fn dataset(&self) -> Dataset {
        dataset(self.values.clone())
    }
}

pub fn table_case() -> impl Strategy<Value = TableCase> {
    (graph_case(6, 16), 2usize..=5, 1usize..=5).prop_flat_map(|(graph, p, q)| {
        let n = graph.n;
        (
            prop::collection::vec(-3.0..3.0f64, n * p),
            prop::collection::vec(-2.0..2.0f64, n * q),
            prop::collection::vec(0usize..3, n),
        )
            .prop_map(move |(xv, zv, mut groups)| {
                // every one of the three groups is represented
                groups[0] = 0;
                groups[1] = 1;
                groups[2] = 2;
                TableCase {
                    graph: graph.clone(),
                    values: DMatrix::from_vec(n, p, xv),
                    z: DMatrix::from_vec(n, q, zv),
                    groups,
                }
            })
            .prop_filter("non-degenerate columns", |c| {
                c.values.column_iter().all(|col| col.variance() > 1e-3)
            })
    })
}

// ------------------------------------------------------------ oracles

/// Real parts of the nonzero eigenvalues of a general square matrix, sorted
/// in decreasing order.
fn general_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.complex_eigenvalues().iter().map(|c| c.re).collect();
    let top = v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    v.retain(|l| l.abs() > 1e-9 * top);
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

/// Moran's coefficient from its double-sum definition.
pub fn moran_double_sum(x: &[f64], w: &SpatialWeights) -> f64 {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let (mut num, mut s0) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            let wij = w.get(i, j);
            num += wij * (x[i] - mean) * (x[j] - mean);
            s0 += wij;
        }
    }
    let den: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    n as f64 * num / (s0 * den)
}

// --------------------------------------------------------- properties

pub fn duality(c: TripletCase) -> Check {
    let t = c.triplet();
    let q = c.q.to_dense();
    let d = c.d.to_dense();
    let small = general_spectrum(&(c.x.transpose() * &d * &c.x * &q));
    let large = general_spectrum(&(&c.x * &q * c.x.transpose() * &d));
    prop_assert_eq!(small.len(), large.len());
    let scale = small.first().copied().unwrap_or(1.0).max(1e-300);
    for (a, b) in small.iter().zip(&large) {
        close(*a / scale, *b / scale, 1e-9, "operator spectra")?;
    }
    if let Ok(res) = decompose(&t, None) {
        prop_assert_eq!(res.rank, small.len());
        for (a, b) in res.eigenvalues.iter().zip(&small) {
            close(*a / scale, *b / scale, 1e-9, "decomposition vs operator")?;
        }
    }
    Ok(())
}

pub fn orthonormality(c: TripletCase) -> Check {
    let t = c.triplet();
    let Ok(res) = decompose(&t, None) else {
        return Ok(());
    };
    let r = res.rank;
    let ktdk = res.principal_components.transpose() * c.d.left_mul(&res.principal_components);
    let ataq = res.principal_axes.transpose() * c.q.left_mul(&res.principal_axes);
    matrix_close(&ktdk, &DMatrix::identity(r, r), 1e-9, "KᵀDK")?;
    matrix_close(&ataq, &DMatrix::identity(r, r), 1e-9, "AᵀQA")
}

pub fn maximization(c: TripletCase) -> Check {
    let t = c.triplet();
    let Ok(res) = decompose(&t, None) else {
        return Ok(());
    };
    let q = c.q.to_dense();
    let op = &q * c.x.transpose() * c.d.left_mul(&c.x) * &q;
    let lambda = res.eigenvalues[0];
    let mut rng = substream(c.x.nrows() as u64, c.x.ncols() as u64);
    for _ in 0..1000 {
        let a = DVector::from_fn(t.p(), |_, _| rng.random_range(-1.0..1.0));
        let norm = (a.transpose() * &q * &a)[(0, 0)];
        if norm < 1e-12 {
            continue;
        }
        let value = (a.transpose() * &op * &a)[(0, 0)] / norm;
        prop_assert!(
            value <= lambda * (1.0 + 1e-9) + 1e-9,
            "probe {value} exceeds {lambda}"
        );
    }
    Ok(())
}

pub fn lag_linearity(c: GraphCase) -> Check {
    let w = c.row_weights();
    let y: Vec<f64> = c.x.iter().rev().map(|v| v * 0.5 - 1.0).collect();
    let (alpha, beta) = (1.7, -0.3);
    let combo: Vec<f64> =
        c.x.iter()
            .zip(&y)
            .map(|(a, b)| alpha * a + beta * b)
            .collect();
    let lhs = w.lag(&combo).unwrap();
    let lx = w.lag(&c.x).unwrap();
    let ly = w.lag(&y).unwrap();
    for i in 0..c.n {
        close(
            lhs[i],
            alpha * lx[i] + beta * ly[i],
            1e-12 * (1.0 + lhs[i].abs()),
            "lag",
        )?;
    }
    Ok(())
}

pub fn row_sums(c: GraphCase) -> Check {
    for s in c.row_weights().row_sums() {
        close(s, 1.0, 1e-12, "row sum")?;
    }
    let dense = c.connectivity().to_dense();
    matrix_close(&dense, &dense.transpose(), 0.0, "connectivity symmetry")
}

pub fn moran_forms(c: GraphCase) -> Check {
    for w in [c.row_weights(), c.binary_weights()] {
        let m = moran(&c.x, &w).unwrap();
        close(m, moran_double_sum(&c.x, &w), 1e-10, "matrix vs double sum")?;
    }
    Ok(())
}

pub fn moran_affine(c: GraphCase) -> Check {
    let w = c.row_weights();
    let base = moran(&c.x, &w).unwrap();
    for (alpha, beta) in [(2.5, 3.0), (-0.7, -11.0), (1e3, 1e2)] {
        let y: Vec<f64> = c.x.iter().map(|v| alpha * v + beta).collect();
        close(moran(&y, &w).unwrap(), base, 1e-10, "affine")?;
    }
    Ok(())
}

pub fn moran_bounds(c: GraphCase) -> Check {
    for w in [c.row_weights(), c.binary_weights()] {
        let (lo, hi) = mc_bounds(&w).unwrap();
        let m = moran(&c.x, &w).unwrap();
        prop_assert!(m >= lo - 1e-9 && m <= hi + 1e-9, "{m} outside [{lo}, {hi}]");
    }
    Ok(())
}

pub fn scatter_slope(c: GraphCase) -> Check {
    let w = c.row_weights();
    let s = moran_scatter(&c.x, &w).unwrap();
    close(s.slope, moran(&c.x, &w).unwrap(), 1e-12, "slope")
}

pub fn mem_identity(c: GraphCase) -> Check {
    for w in [c.row_weights(), c.binary_weights()] {
        let basis = mem_basis(&w).unwrap();
        let m = basis.len();
        let gram = basis.vectors.transpose() * &basis.vectors;
        matrix_close(&gram, &DMatrix::identity(m, m), 1e-9, "MEM orthonormality")?;
        for (k, mc) in basis.moran_values().iter().enumerate() {
            let v: Vec<f64> = basis.vectors.column(k).iter().copied().collect();
            close(v.iter().sum::<f64>(), 0.0, 1e-9, "MEM centering")?;
            close(moran(&v, &w).unwrap(), *mc, 1e-8, "MEM Moran identity")?;
        }
    }
    Ok(())
}

pub fn mem_probes(c: GraphCase) -> Check {
    let w = c.row_weights();
    let (_, hi) = mc_bounds(&w).unwrap();
    let mut rng = substream(c.seed, 0);
    for _ in 0..1000 {
        let v: Vec<f64> = (0..c.n).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Ok(m) = moran(&v, &w) {
            prop_assert!(m <= hi + 1e-8, "probe {m} above {hi}");
        }
    }
    Ok(())
}

pub fn projector_properties(c: TableCase) -> Check {
    let n = c.graph.n;
    let d: Vec<f64> = (0..n).map(|i| 0.5 + (i % 4) as f64 * 0.25).collect();
    let p = projector(&c.z, &d).unwrap();
    matrix_close(&(&p * &p), &p, 1e-9, "idempotence")?;
    let dm = DMatrix::from_diagonal(&DVector::from_vec(d));
    let dp = &dm * &p;
    matrix_close(&dp.transpose(), &dp, 1e-9, "D-self-adjointness")
}

pub fn pcaiv_nesting(c: TableCase) -> Check {
    let data = c.dataset();
    let total = pca(&data, true, true).unwrap().total_inertia;
    let mut previous = 0.0;
    for k in 1..=c.z.ncols() {
        let z = c.z.columns(0, k).into_owned();
        let Ok(res) = pcaiv(&data, &z) else { continue };
        prop_assert!(res.diagram.total_inertia <= total + 1e-9);
        prop_assert!(
            res.explained_ratio >= previous - 1e-9,
            "not monotone at k={k}"
        );
        previous = res.explained_ratio;
    }
    Ok(())
}

pub fn bca_dummies(c: TableCase) -> Check {
    let data = c.dataset();
    let labels: Vec<String> = c.groups.iter().map(|g| format!("g{g}")).collect();
    let part = Partition::from_labels(&labels).unwrap();
    let b = bca(&data, &part).unwrap();
    let iv = pcaiv(&data, &part.dummy()).unwrap();
    prop_assert_eq!(b.diagram.rank, iv.diagram.rank);
    for (x, y) in b.diagram.eigenvalues.iter().zip(&iv.diagram.eigenvalues) {
        close(*x, *y, 1e-9 * x.abs().max(1e-12), "BCA vs PCAIV")?;
    }
    Ok(())
}

pub fn multispati_identity(c: TableCase) -> Check {
    let data = c.dataset();
    let w = c.graph.row_weights();
    let Ok(ms) = multispati(&data, &w) else {
        return Ok(());
    };
    for k in 0..ms.diagram.rank {
        let lambda = ms.diagram.eigenvalues[k];
        close(
            lambda,
            ms.axis_variance[k] * ms.axis_mc[k],
            1e-9 * lambda.abs(),
            "eigenvalue equals variance times MC",
        )?;
    }
    let p = pca(&data, true, true).unwrap();
    prop_assert!(ms.axis_variance[0] <= p.eigenvalues[0] + 1e-9);
    let first: Vec<f64> = p.row_scores.column(0).iter().copied().collect();
    prop_assert!(ms.axis_mc[0] >= moran(&first, &w).unwrap() - 1e-9);
    Ok(())
}

#[derive(Debug, Clone)]
pub struct ConfigPair {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub angle: f64,
    pub shift: (f64, f64),
    pub scale: f64,
}

pub fn config_pair() -> impl Strategy<Value = ConfigPair> {
    (4usize..=20).prop_flat_map(|n| {
        (
            prop::collection::vec(-4.0..4.0f64, 2 * n),
            prop::collection::vec(-4.0..4.0f64, 2 * n),
            0.0..std::f64::consts::TAU,
            (-50.0..50.0f64, -50.0..50.0f64),
            0.01..100.0f64,
        )
            .prop_map(move |(av, bv, angle, shift, scale)| ConfigPair {
                a: DMatrix::from_vec(n, 2, av),
                b: DMatrix::from_vec(n, 2, bv),
                angle,
                shift,
                scale,
            })
            .prop_filter("spread", |c| {
                c.a.column_iter().all(|v| v.variance() > 1e-3)
                    && c.b.column_iter().all(|v| v.variance() > 1e-3)
            })
    })
}

pub fn procrustes_properties(c: ConfigPair) -> Check {
    let base = procrustes_stat(&c.a, &c.b).unwrap();
    prop_assert!((-1e-12..=1.0 + 1e-12).contains(&base), "range {base}");
    close(
        procrustes_stat(&c.b, &c.a).unwrap(),
        base,
        1e-12,
        "symmetry",
    )?;
    let (s, co) = c.angle.sin_cos();
    let rot = DMatrix::from_row_slice(2, 2, &[co, -s, s, co]);
    let refl = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let mut moved = (&c.b * &rot * &refl) * c.scale;
    for mut row in moved.row_iter_mut() {
        row[0] += c.shift.0;
        row[1] += c.shift.1;
    }
    close(
        procrustes_stat(&c.a, &moved).unwrap(),
        base,
        1e-10,
        "invariance",
    )?;
    close(
        procrustes_stat(&c.b, &moved).unwrap(),
        1.0,
        1e-10,
        "perfect match",
    )
}

pub fn parallel_determinism(c: GraphCase) -> Check {
    let w = c.row_weights();
    let pool = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
    };
    let run = |threads| {
        pool(threads).install(|| {
            let m = moran_test(&c.x, &w, 99, c.seed, Alternative::TwoSided).unwrap();
            let s1 = DMatrix::from_fn(c.n, 2, |i, j| c.x[(i + j) % c.n]);
            let s2 = DMatrix::from_fn(c.n, 2, |i, j| c.x[(i * 3 + j + 1) % c.n] + i as f64);
            let p = procrustes_test(&s1, &s2, 99, c.seed).ok();
            format!("{m:?}|{p:?}")
        })
    };
    let single = run(1);
    prop_assert_eq!(&single, &run(4));
    prop_assert_eq!(&single, &run(3));
    Ok(())
}
