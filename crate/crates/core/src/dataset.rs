//! Tabular inputs: the quantitative dataset and the per-observation side
//! files (partition labels, coordinates).

use std::collections::{HashMap, HashSet};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `n × p` table of finite values with observation ids and variable labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    ids: Vec<String>,
    labels: Vec<String>,
    values: DMatrix<f64>,
}

impl Dataset {
    pub fn new(ids: Vec<String>, labels: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != ids.len() || values.ncols() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} ids and {} labels for a {}x{} table",
                ids.len(),
                labels.len(),
                values.nrows(),
                values.ncols()
            )));
        }
        if ids.len() < 3 {
            return Err(Error::InvalidInput(format!(
                "dataset needs at least 3 observations, got {}",
                ids.len()
            )));
        }
        if labels.is_empty() {
            return Err(Error::InvalidInput("dataset has no variables".into()));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset".into()));
        }
        Ok(Dataset {
            ids,
            labels,
            values,
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }

    pub fn column(&self, label: &str) -> Option<Vec<f64>> {
        let j = self.labels.iter().position(|l| l == label)?;
        Some(self.values.column(j).iter().copied().collect())
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|i| i == id)
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

/// Parse a dataset: header row, id in the first column, one numeric column
/// per variable. `.` is the only decimal separator.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let mut rdr = reader(text);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.len() < 2 {
        return Err(Error::Parse {
            line: 1,
            msg: "header needs an id column and at least one variable".into(),
        });
    }
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut ids = Vec::new();
    let mut data = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        let line = row + 2;
        if rec.len() != header.len() {
            return Err(Error::Parse {
                line,
                msg: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(Error::MissingValue {
                row: row + 1,
                column: header[0].to_string(),
            });
        }
        for (j, cell) in rec.iter().enumerate().skip(1) {
            if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
                return Err(Error::MissingValue {
                    row: row + 1,
                    column: header[j].to_string(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                line,
                msg: format!("non-numeric value `{cell}` in column `{}`", &header[j]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    msg: format!("non-finite value `{cell}` in column `{}`", &header[j]),
                });
            }
            data.push(v);
        }
        ids.push(id);
    }
    let values = DMatrix::from_row_slice(ids.len(), labels.len(), &data);
    Dataset::new(ids, labels, values)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_dataset(&std::fs::read_to_string(path)?)
}

/// Map each id to its row in a keyed file and check coverage of `ids`.
fn keyed_rows(text: &str, ids: &[String], width: usize) -> Result<Vec<Vec<String>>> {
    let mut rdr = reader(text);
    rdr.headers().map_err(csv_error)?;
    let mut map: HashMap<String, Vec<String>> = HashMap::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_error)?;
        if rec.len() != width {
            return Err(Error::Parse {
                line: row + 2,
                msg: format!("expected {width} fields, found {}", rec.len()),
            });
        }
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        let id = fields[0].clone();
        if map.insert(id.clone(), fields).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    let known: HashSet<&str> = ids.iter().map(String::as_str).collect();
    if let Some(extra) = map.keys().find(|k| !known.contains(k.as_str())) {
        return Err(Error::UnknownId(extra.clone()));
    }
    ids.iter()
        .map(|id| {
            map.remove(id).ok_or_else(|| Error::MissingValue {
                row: 0,
                column: format!("entry for id `{id}`"),
            })
        })
        .collect()
}

/// Parse a partition file (`id,group`) into group labels aligned with `ids`.
pub fn parse_partition(text: &str, ids: &[String]) -> Result<Vec<String>> {
    Ok(keyed_rows(text, ids, 2)?
        .into_iter()
        .map(|mut r| r.swap_remove(1))
        .collect())
}

/// Parse a coordinates file (`id,x,y`) into an `n × 2` matrix aligned with `ids`.
pub fn parse_coordinates(text: &str, ids: &[String]) -> Result<DMatrix<f64>> {
    let rows = keyed_rows(text, ids, 3)?;
    let mut out = DMatrix::zeros(ids.len(), 2);
    for (i, r) in rows.iter().enumerate() {
        for k in 0..2 {
            out[(i, k)] = r[k + 1].parse().map_err(|_| Error::Parse {
                line: 0,
                msg: format!("non-numeric coordinate `{}` for id `{}`", r[k + 1], r[0]),
            })?;
        }
    }
    Ok(out)
}
