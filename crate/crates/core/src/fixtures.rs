//! The bundled 85-département dataset: six moral-statistics variables,
//! a five-region partition, centroid coordinates and the queen contiguity
//! graph. Files are checksummed at load.

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::dataset::{parse_coordinates, parse_dataset, parse_partition, Dataset};
use crate::error::{Error, Result};
use crate::graph::{from_edge_list, parse_edge_list, Connectivity};

pub const DATASET_CSV: &str = include_str!("../data/guerry.csv");
pub const REGIONS_CSV: &str = include_str!("../data/regions.csv");
pub const CENTROIDS_CSV: &str = include_str!("../data/centroids.csv");
pub const BORDERS_TXT: &str = include_str!("../data/borders.txt");

const CHECKSUMS: [(&str, &str); 4] = [
    (
        "guerry.csv",
        "f21d747619a43f006f6513987d026569eec7e6f83f3da5268f2c9b69a33ab0f1",
    ),
    (
        "regions.csv",
        "1e9154b66f1bbbba9ecab40acce33efe99df5a3b3469031323361c442f9eb8a9",
    ),
    (
        "centroids.csv",
        "c75ed7d0e7254c55315137ba8e6ff01113f6b2b35fd5a886c9826e7adf6194af",
    ),
    (
        "borders.txt",
        "b4a919921ed7b80745b96865be38140c1a7e97e52d0f275ca6fe3879c7ac85d7",
    ),
];

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn verify(name: &str, text: &str) -> Result<()> {
    let expected = CHECKSUMS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, h)| *h)
        .unwrap_or_default();
    let actual = sha256_hex(text.as_bytes());
    if actual != expected {
        return Err(Error::Checksum {
            name: name.into(),
            expected: expected.into(),
            actual,
        });
    }
    Ok(())
}

/// Every input of the bundled example, aligned on the dataset ids.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub data: Dataset,
    pub connectivity: Connectivity,
    pub regions: Vec<String>,
    pub coords: DMatrix<f64>,
}

pub fn guerry_dataset() -> Result<Dataset> {
    verify("guerry.csv", DATASET_CSV)?;
    parse_dataset(DATASET_CSV)
}

pub fn guerry() -> Result<Fixture> {
    let data = guerry_dataset()?;
    verify("regions.csv", REGIONS_CSV)?;
    verify("centroids.csv", CENTROIDS_CSV)?;
    verify("borders.txt", BORDERS_TXT)?;
    let regions = parse_partition(REGIONS_CSV, data.ids())?;
    let coords = parse_coordinates(CENTROIDS_CSV, data.ids())?;
    let edges = parse_edge_list(BORDERS_TXT)?;
    let connectivity = from_edge_list(&edges, data.ids())?;
    Ok(Fixture {
        data,
        connectivity,
        regions,
        coords,
    })
}
