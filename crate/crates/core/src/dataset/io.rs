use std::collections::HashSet;
use std::fs::File;
use std::path::Path;

use serde::Deserialize;

use super::{CatalogEntry, RawInteraction};
use crate::error::{PupError, Result};

const INTERACTIONS_HEADER: [&str; 3] = ["user_id", "item_id", "timestamp"];
const CATALOG_HEADER: [&str; 3] = ["item_id", "category_id", "price"];

fn open_csv(path: &Path, expected: &[&str]) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| PupError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(|e| PupError::MalformedRow {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })?;
    // An empty file has no header at all; treat it as zero rows.
    if !headers.is_empty() && headers.iter().ne(expected.iter().copied()) {
        return Err(PupError::MalformedRow {
            path: path.to_path_buf(),
            line: 1,
            message: format!(
                "expected header {:?}, got {:?}",
                expected.join(","),
                headers
            ),
        });
    }
    Ok(reader)
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path, expected: &[&str]) -> Result<Vec<T>> {
    let mut reader = open_csv(path, expected)?;
    let mut out = Vec::new();
    for record in reader.deserialize::<T>() {
        let row = record.map_err(|e| PupError::MalformedRow {
            path: path.to_path_buf(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        out.push(row);
    }
    Ok(out)
}

pub fn load_interactions(path: impl AsRef<Path>) -> Result<Vec<RawInteraction>> {
    read_rows(path.as_ref(), &INTERACTIONS_HEADER)
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Vec<CatalogEntry>> {
    read_rows(path.as_ref(), &CATALOG_HEADER)
}

/// Load both CSVs (rows in file order) and check every interacted item exists
/// in the catalog.
pub fn load_dataset(
    interactions_path: impl AsRef<Path>,
    catalog_path: impl AsRef<Path>,
) -> Result<(Vec<RawInteraction>, Vec<CatalogEntry>)> {
    let catalog = load_catalog(catalog_path)?;
    let interactions = load_interactions(interactions_path)?;
    let known: HashSet<&str> = catalog.iter().map(|c| c.item_id.as_str()).collect();
    if let Some(missing) = interactions
        .iter()
        .find(|r| !known.contains(r.item_id.as_str()))
    {
        return Err(PupError::UnknownItem(missing.item_id.clone()));
    }
    Ok((interactions, catalog))
}

pub fn write_interactions(path: impl AsRef<Path>, rows: &[RawInteraction]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(INTERACTIONS_HEADER)
        .map_err(|e| csv_io(path, e))?;
    for r in rows {
        w.write_record([
            r.user_id.as_str(),
            r.item_id.as_str(),
            &r.timestamp.to_string(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| PupError::io(path, e))
}

pub fn write_catalog(path: impl AsRef<Path>, rows: &[CatalogEntry]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(CATALOG_HEADER)
        .map_err(|e| csv_io(path, e))?;
    for r in rows {
        w.write_record([
            r.item_id.as_str(),
            r.category_id.as_str(),
            &r.price.to_string(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| PupError::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> PupError {
    PupError::io(path, std::io::Error::other(e))
}
