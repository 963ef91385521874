use ergokit::geometric::{geometric_partition_function, projective_volume, qubit_partition_function};
use ergokit::io::MatrixJson;
use ergokit::quantum::HermitianOperator;
use serde_json::{json, Map, Value};

use super::{hermitian, read_json};
use crate::{CliError, Common, Outcome, Table};

/// Largest accepted distance from the closed form, in standard errors.
const MAX_Z_SCORE: f64 = 4.0;

pub(crate) fn geometric_z(common: &Common) -> Result<Outcome, CliError> {
    let h = match &common.input {
        Some(path) => hermitian(&read_json::<MatrixJson>(path)?)?,
        None => {
            let d = common.dim.unwrap_or(2);
            if d < 2 {
                return Err(CliError::Config("--dim must be at least 2".into()));
            }
            HermitianOperator::from_real_diagonal(&(0..d).map(|k| k as f64).collect::<Vec<_>>())?
        }
    };
    let beta = common.beta;
    let z = geometric_partition_function(&h, beta, common.samples, common.seed)?;

    let mut failures = Vec::new();
    let (closed, score) = if h.dim() == 2 {
        let exact = qubit_partition_function(&h, beta)?;
        let score = if z.std_error > 0.0 {
            (z.estimate - exact) / z.std_error
        } else if z.estimate == exact {
            0.0
        } else {
            f64::INFINITY
        };
        if !(score.abs() <= MAX_Z_SCORE) {
            failures.push(format!(
                "Monte Carlo estimate {} is {score:.2} standard errors from the closed form {exact}",
                z.estimate
            ));
        }
        (json!(exact), json!(score))
    } else {
        (Value::Null, Value::Null)
    };

    let mut report = Map::new();
    report.insert("dim".into(), json!(h.dim()));
    report.insert("beta".into(), json!(beta));
    report.insert("samples".into(), json!(z.n_samples));
    report.insert("seed".into(), json!(common.seed));
    report.insert("estimate".into(), json!(z.estimate));
    report.insert("std_error".into(), json!(z.std_error));
    report.insert("volume".into(), json!(projective_volume(h.dim())));
    report.insert("closed_form".into(), closed.clone());
    report.insert("z_score".into(), score);

    let mut table = Table::new(&["dim", "beta", "samples", "estimate", "std_error", "closed_form"]);
    table.push(vec![json!(h.dim()), json!(beta), json!(z.n_samples), json!(z.estimate), json!(z.std_error), closed]);
    Ok(Outcome { report, table, failures })
}
