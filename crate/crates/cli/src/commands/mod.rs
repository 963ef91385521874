mod classical;
mod ergotropy;
mod geometric;
mod identities;
mod otm;

use std::path::Path;

use ergokit::io::MatrixJson;
use ergokit::quantum::{DensityMatrix, HermitianOperator};
use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::CliError;

pub(crate) use classical::classical;
pub(crate) use ergotropy::ergotropy;
pub(crate) use geometric::geometric_z;
pub(crate) use identities::verify_identities;
pub(crate) use otm::otm;

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn hermitian(m: &MatrixJson) -> Result<HermitianOperator, CliError> {
    Ok(HermitianOperator::new(m.to_matrix()?)?)
}

fn density(m: &MatrixJson) -> Result<DensityMatrix, CliError> {
    Ok(DensityMatrix::new(m.to_matrix()?)?)
}

/// Serializes a report struct into a JSON object.
fn object<T: serde::Serialize>(value: &T) -> Map<String, Value> {
    match serde_json::to_value(value).expect("report types serialize") {
        Value::Object(m) => m,
        other => panic!("expected an object, got {other}"),
    }
}

fn check(failures: &mut Vec<String>, name: &str, deviation: f64, tolerance: f64) {
    if !(deviation <= tolerance) {
        failures.push(format!("{name}: deviation {deviation:e} exceeds {tolerance:e}"));
    }
}
