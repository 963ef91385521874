use ergokit::ergotropy::ergotropy_report;
use ergokit::geometric::ergotropy_geometric;
use ergokit::io::MatrixJson;
use ergokit::random::{random_density, random_hermitian, stream_rng};
use serde::Deserialize;
use serde_json::json;

use super::{check, density, hermitian, object, read_json};
use crate::{CliError, Common, Outcome, Table};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateInput {
    rho: MatrixJson,
    hamiltonian: MatrixJson,
}

pub(crate) fn ergotropy(common: &Common) -> Result<Outcome, CliError> {
    let (rho, h) = match &common.input {
        Some(path) => {
            let input: StateInput = read_json(path)?;
            (density(&input.rho)?, hermitian(&input.hamiltonian)?)
        }
        None => {
            let d = common.dim.unwrap_or(2);
            if d == 0 {
                return Err(CliError::Config("--dim must be at least 1".into()));
            }
            let mut rng = stream_rng(common.seed, 0);
            (random_density(d, &mut rng), random_hermitian(d, &mut rng))
        }
    };
    let report = ergotropy_report(&rho, &h, common.beta)?;
    let geometric = ergotropy_geometric(&rho, &h, common.beta)?;

    let mut failures = Vec::new();
    let tol = common.tolerance;
    check(&mut failures, "direct vs entropies", (report.total - report.via_entropies).abs(), tol);
    check(&mut failures, "direct vs geometric", (report.total - geometric).abs(), tol);
    check(&mut failures, "ergotropy is nonnegative", (-report.total).max(0.0), tol);

    let mut out = object(&report);
    out.insert("geometric".into(), json!(geometric));
    out.insert("dim".into(), json!(h.dim()));
    out.insert("seed".into(), json!(common.seed));
    out.insert("from_input".into(), json!(common.input.is_some()));

    let mut table = Table::new(&[
        "total",
        "via_entropies",
        "geometric",
        "coherent",
        "incoherent",
        "dephased_ergotropy",
        "passive_energy",
        "beta",
    ]);
    table.push(vec![
        json!(report.total),
        json!(report.via_entropies),
        json!(geometric),
        json!(report.coherent),
        json!(report.incoherent),
        json!(report.dephased_ergotropy),
        json!(report.passive_energy),
        json!(report.beta_used),
    ]);
    Ok(Outcome { report: out, table, failures })
}
