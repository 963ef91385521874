use ergokit::ergotropy::{coherent_ergotropy, ergotropy_direct, ergotropy_via_entropies, optimal_alignment_unitary};
use ergokit::geometric::ergotropy_geometric;
use ergokit::quantum::{
    coherence_relative_entropy, dephase, gibbs_state, quantum_relative_entropy, spectral_relative_entropy,
};
use ergokit::random::{random_density_rank, random_hermitian, stream_rng};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::{CliError, Common, Outcome, Table};

const CHECKS: [&str; 6] = [
    "direct_vs_entropies",
    "direct_vs_geometric",
    "coherent_vs_total",
    "relative_entropy_chain",
    "aligned_divergence",
    "divergence_below_relative_entropy",
];

struct Trial {
    rank: usize,
    deviations: [f64; 6],
}

fn trial(d: usize, beta: f64, seed: u64, k: usize) -> Result<Trial, ergokit::Error> {
    let mut rng = stream_rng(seed, k as u64);
    let rank = 1 + k % d;
    let rho = random_density_rank(d, rank, &mut rng);
    let h = random_hermitian(d, &mut rng);
    let eq = gibbs_state(&h, beta)?;

    let direct = ergotropy_direct(&rho, &h)?;
    let entropic = ergotropy_via_entropies(&rho, &h, beta)?;
    let geometric = ergotropy_geometric(&rho, &h, beta)?;
    let coherent = coherent_ergotropy(&rho, &h, beta)?;
    let s = quantum_relative_entropy(&rho, eq.rho())?;
    let c = coherence_relative_entropy(&rho, &h)?;
    let population = quantum_relative_entropy(&dephase(&rho, &h)?, eq.rho())?;
    let d_spec = spectral_relative_entropy(&rho, eq.rho())?;
    let aligned = optimal_alignment_unitary(&rho, eq.rho())?.apply(&rho)?;
    let s_aligned = quantum_relative_entropy(&aligned, eq.rho())?;

    Ok(Trial {
        rank,
        deviations: [
            (direct - entropic).abs(),
            (direct - geometric).abs(),
            (coherent - direct).abs(),
            (s - c - population).abs(),
            (s_aligned - d_spec).abs(),
            (d_spec - s).max(0.0),
        ],
    })
}

pub(crate) fn verify_identities(common: &Common) -> Result<Outcome, CliError> {
    let d = common.dim.unwrap_or(3);
    if d < 2 {
        return Err(CliError::Config("--dim must be at least 2".into()));
    }
    let trials: Vec<Trial> = (0..common.trials)
        .into_par_iter()
        .map(|k| trial(d, common.beta, common.seed, k))
        .collect::<Result<_, _>>()
        .map_err(CliError::Compute)?;

    let tol = common.tolerance;
    let mut failures = Vec::new();
    let mut checks = Map::new();
    for (i, name) in CHECKS.iter().enumerate() {
        let devs: Vec<f64> = trials.iter().map(|t| t.deviations[i]).collect();
        let max = devs.iter().copied().fold(0.0, f64::max);
        let failed = devs.iter().filter(|&&x| !(x <= tol)).count();
        if failed > 0 {
            failures.push(format!("{name}: {failed} of {} trials exceed {tol:e} (max {max:e})", devs.len()));
        }
        checks.insert(
            name.to_string(),
            json!({ "max_deviation": max, "passed": devs.len() - failed, "failed": failed }),
        );
    }

    let mut report = Map::new();
    report.insert("checks".into(), Value::Object(checks));
    report.insert("dim".into(), json!(d));
    report.insert("trials".into(), json!(common.trials));
    report.insert("seed".into(), json!(common.seed));
    report.insert("beta".into(), json!(common.beta));
    report.insert("tolerance".into(), json!(tol));

    let mut headers = vec!["trial", "rank"];
    headers.extend(CHECKS);
    let mut table = Table::new(&headers);
    for (k, t) in trials.iter().enumerate() {
        let mut row = vec![json!(k), json!(t.rank)];
        row.extend(t.deviations.iter().map(|x| json!(x)));
        table.push(row);
    }
    Ok(Outcome { report, table, failures })
}
