//! Neighbourhood graphs and spatial weighting matrices.

use std::collections::{BTreeSet, HashMap};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Binary symmetric neighbourhood relation with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Connectivity {
    ids: Vec<String>,
    /// Sorted neighbour indices per unit.
    neighbors: Vec<Vec<usize>>,
}

impl Connectivity {
    /// Build from index pairs on `n` units. Duplicates are collapsed.
    pub fn from_index_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let ids = (0..n).map(|i| i.to_string()).collect::<Vec<_>>();
        Self::build(ids, pairs.iter().copied())
    }

    fn build(ids: Vec<String>, pairs: impl Iterator<Item = (usize, usize)>) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty id list".into()));
        }
        let mut sets = vec![BTreeSet::new(); n];
        for (a, b) in pairs {
            if a >= n {
                return Err(Error::UnknownId(a.to_string()));
            }
            if b >= n {
                return Err(Error::UnknownId(b.to_string()));
            }
            if a == b {
                return Err(Error::SelfLoop(ids[a].clone()));
            }
            sets[a].insert(b);
            sets[b].insert(a);
        }
        let neighbors = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        Ok(Connectivity { ids, neighbors })
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn n_edges(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.n_edges());
        for (i, nb) in self.neighbors.iter().enumerate() {
            out.extend(nb.iter().filter(|&&j| j > i).map(|&j| (i, j)));
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut c = DMatrix::zeros(n, n);
        for (i, nb) in self.neighbors.iter().enumerate() {
            for &j in nb {
                c[(i, j)] = 1.0;
            }
        }
        c
    }
}

/// Build the connectivity matrix of an edge list expressed with unit ids.
pub fn from_edge_list<S: AsRef<str>>(edges: &[(S, S)], ids: &[S]) -> Result<Connectivity> {
    if ids.is_empty() {
        return Err(Error::InvalidInput("empty id list".into()));
    }
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.as_ref(), i).is_some() {
            return Err(Error::DuplicateId(id.as_ref().to_string()));
        }
    }
    let mut pairs = Vec::with_capacity(edges.len());
    for (a, b) in edges {
        let ia = *index
            .get(a.as_ref())
            .ok_or_else(|| Error::UnknownId(a.as_ref().to_string()))?;
        let ib = *index
            .get(b.as_ref())
            .ok_or_else(|| Error::UnknownId(b.as_ref().to_string()))?;
        pairs.push((ia, ib));
    }
    let owned = ids.iter().map(|s| s.as_ref().to_string()).collect();
    Connectivity::build(owned, pairs.into_iter())
}

/// Parse an edge file: one edge per line, two id tokens separated by a comma
/// or whitespace. Blank lines and lines starting with `#` are skipped.
pub fn parse_edge_list(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        match tokens.as_slice() {
            [a, b] => out.push((a.to_string(), b.to_string())),
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected two id tokens, found {}", tokens.len()),
                })
            }
        }
    }
    Ok(out)
}

/// How a weight matrix was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightsKind {
    Binary,
    RowStandardized,
    Symmetrized,
    Custom,
}

/// Sparse nonnegative spatial weighting matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialWeights {
    /// `(column, weight)` lists per row, sorted by column.
    rows: Vec<Vec<(usize, f64)>>,
    kind: WeightsKind,
    total_weight: f64,
}

impl SpatialWeights {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>, kind: WeightsKind) -> Self {
        let total_weight = rows.iter().flatten().map(|&(_, w)| w).sum();
        SpatialWeights {
            rows,
            kind,
            total_weight,
        }
    }

    /// Binary weights `w_ij = c_ij`.
    pub fn binary(c: &Connectivity) -> Self {
        let rows = c
            .neighbors
            .iter()
            .map(|nb| nb.iter().map(|&j| (j, 1.0)).collect())
            .collect();
        Self::from_rows(rows, WeightsKind::Binary)
    }

    /// Arbitrary weights from a dense matrix. Entries must be finite and
    /// nonnegative, and the diagonal zero.
    pub fn from_dense(w: &DMatrix<f64>) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::Dimension("weight matrix must be square".into()));
        }
        let n = w.nrows();
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::new();
            for j in 0..n {
                let v = w[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite("weight matrix".into()));
                }
                if v < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "negative weight at ({i}, {j})"
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(Error::InvalidInput(format!("nonzero diagonal at {i}")));
                }
                if v != 0.0 {
                    row.push((j, v));
                }
            }
            rows.push(row);
        }
        Ok(Self::from_rows(rows, WeightsKind::Custom))
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn kind(&self) -> WeightsKind {
        self.kind
    }

    /// `1ᵀ W 1`
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(_, w)| w).sum())
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |&(c, _)| c)
            .map(|k| self.rows[i][k].1)
            .unwrap_or(0.0)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows.iter().enumerate().all(|(i, r)| {
            r.iter()
                .all(|&(j, w)| (w - self.get(j, i)).abs() <= tol * w.abs().max(1.0))
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut w = DMatrix::zeros(n, n);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, v) in r {
                w[(i, j)] = v;
            }
        }
        w
    }

    /// `W x`
    pub fn lag(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n() {
            return Err(Error::Dimension(format!(
                "vector has length {}, weights are {}x{}",
                x.len(),
                self.n(),
                self.n()
            )));
        }
        Ok(self.lag_unchecked(x))
    }

    pub(crate) fn lag_unchecked(&self, x: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, w)| w * x[j]).sum())
            .collect()
    }

    /// `zᵀ W z` without materializing `W z`.
    pub(crate) fn quadratic_form(&self, z: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(z)
            .map(|(r, &zi)| zi * r.iter().map(|&(j, w)| w * z[j]).sum::<f64>())
            .sum()
    }

    /// `W M`, column by column.
    pub fn lag_matrix(&self, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if m.nrows() != self.n() {
            return Err(Error::Dimension(format!(
                "matrix has {} rows, weights are {}x{}",
                m.nrows(),
                self.n(),
                self.n()
            )));
        }
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for k in 0..m.ncols() {
            let col: Vec<f64> = m.column(k).iter().copied().collect();
            out.set_column(k, &DVector::from_vec(self.lag_unchecked(&col)));
        }
        Ok(out)
    }
}

/// Row-sum standardization `w_ij = c_ij / Σ_j c_ij`.
pub fn row_standardize(c: &Connectivity) -> Result<SpatialWeights> {
    if let Some(i) = c.neighbors.iter().position(Vec::is_empty) {
        return Err(Error::Island(c.ids[i].clone()));
    }
    let rows = c
        .neighbors
        .iter()
        .map(|nb| {
            let w = 1.0 / nb.len() as f64;
            nb.iter().map(|&j| (j, w)).collect()
        })
        .collect();
    Ok(SpatialWeights::from_rows(
        rows,
        WeightsKind::RowStandardized,
    ))
}

/// `(W + Wᵀ) / 2`
pub fn symmetrize(w: &SpatialWeights) -> SpatialWeights {
    let n = w.n();
    let mut acc: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, r) in w.rows.iter().enumerate() {
        for &(j, _) in r {
            acc[i].insert(j);
            acc[j].insert(i);
        }
    }
    let rows = acc
        .into_iter()
        .enumerate()
        .map(|(i, cols)| {
            cols.into_iter()
                .map(|j| (j, 0.5 * (w.get(i, j) + w.get(j, i))))
                .collect()
        })
        .collect();
    let mut out = SpatialWeights::from_rows(rows, WeightsKind::Symmetrized);
    out.total_weight = w.total_weight;
    out
}
