//! Headerless numeric CSV for distance matrices, point sets, embeddings and masks.
//!
//! Values are written with Rust's shortest round-trip formatting, so reading a
//! written file reproduces every `f64` bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::metric::{matrix_from_rows, DistanceMatrix, Embedding, FilterMask};

/// Relative tolerance for the symmetry check on loaded distance matrices.
pub const SYMMETRY_REL_TOL: f64 = 1e-9;

pub fn read_matrix<R: Read>(reader: R) -> Result<DMatrix<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|e| Error::Parse {
                    line: line + 1,
                    message: format!("{field:?}: {e}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    matrix_from_rows(&rows)
}

pub fn write_matrix<W: Write>(writer: W, m: &DMatrix<f64>) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..m.nrows() {
        wtr.write_record(m.row(i).iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads an `N x N` distance matrix, symmetrizing entries that agree within
/// [`SYMMETRY_REL_TOL`].
pub fn read_distance_matrix<R: Read>(reader: R) -> Result<DistanceMatrix> {
    DistanceMatrix::symmetrized(read_matrix(reader)?, SYMMETRY_REL_TOL)
}

pub fn load_distance_matrix(path: impl AsRef<Path>) -> Result<DistanceMatrix> {
    read_distance_matrix(File::open(path)?)
}

pub fn save_distance_matrix(path: impl AsRef<Path>, d: &DistanceMatrix) -> Result<()> {
    write_matrix(File::create(path)?, d.as_matrix())
}

/// Reads an `N x d` point set.
pub fn load_points(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    read_matrix(File::open(path)?)
}

pub fn save_points(path: impl AsRef<Path>, points: &DMatrix<f64>) -> Result<()> {
    write_matrix(File::create(path)?, points)
}

pub fn load_embedding(path: impl AsRef<Path>) -> Result<Embedding> {
    Embedding::new(load_points(path)?)
}

pub fn save_embedding(path: impl AsRef<Path>, x: &Embedding) -> Result<()> {
    save_points(path, x.coords())
}

/// Writes a mask as integer 0/1 entries (1 = kept).
pub fn write_mask<W: Write>(writer: W, mask: &FilterMask) -> Result<()> {
    let n = mask.n();
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    for i in 0..n {
        wtr.write_record((0..n).map(|j| if mask.keep(i, j) { "1" } else { "0" }))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn save_mask(path: impl AsRef<Path>, mask: &FilterMask) -> Result<()> {
    write_mask(File::create(path)?, mask)
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<FilterMask> {
    FilterMask::from_keep_matrix(&read_matrix(File::open(path)?)?)
}
