use std::path::Path;

use ergokit::classical::{
    classical_ergotropy, classical_relative_entropy, ergotropy_via_phi, grid_gibbs, inhomogeneity_phi, joint_from_kernel,
    joint_relative_entropy, permutation_min_bruteforce, sorted_pairing_kl, stationarity_probe, GridDistribution,
    PhaseGrid, Surface, TransitionKernel, MAX_BRUTEFORCE_CELLS,
};
use ergokit::io::kernel_from_json;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::{check, read_json, read_text};
use crate::{ClassicalArgs, CliError, Common, Outcome, Table};

/// Allowed `|Delta D| / eps^2` when the initial distribution is uniform.
const SECOND_ORDER_FACTOR: f64 = 10.0;

#[derive(Debug, Deserialize)]
struct GridRow {
    index: usize,
    #[serde(rename = "E_A")]
    e_a: f64,
    #[serde(rename = "E_B")]
    e_b: f64,
    weight: f64,
}

fn read_grid(path: &Path) -> Result<(PhaseGrid, GridDistribution), CliError> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let rows = reader
        .deserialize::<GridRow>()
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if let Some((k, r)) = rows.iter().enumerate().find(|(k, r)| r.index != *k) {
        return Err(CliError::Parse(format!("{}: row {k} has index {}", path.display(), r.index)));
    }
    let grid = PhaseGrid::new(rows.iter().map(|r| r.e_a).collect(), rows.iter().map(|r| r.e_b).collect(), 1.0)?;
    let p_a = GridDistribution::new(rows.iter().map(|r| r.weight).collect())?;
    Ok((grid, p_a))
}

fn default_grid(n: usize) -> Result<(PhaseGrid, GridDistribution), CliError> {
    if n < 2 {
        return Err(CliError::Config("--dim must be at least 2".into()));
    }
    let grid = PhaseGrid::uniform_cells((0..n).map(|k| k as f64).collect())?;
    Ok((grid, GridDistribution::point_mass(n, n - 1)?))
}

/// Sends the k-th heaviest cell to the k-th lowest final energy.
fn sorting_kernel(grid: &PhaseGrid, p_a: &GridDistribution) -> Result<TransitionKernel, CliError> {
    let n = p_a.len();
    let mut by_weight: Vec<usize> = (0..n).collect();
    by_weight.sort_by(|&a, &b| p_a.weights()[b].total_cmp(&p_a.weights()[a]));
    let mut by_energy: Vec<usize> = (0..n).collect();
    let e = grid.energies(Surface::B);
    by_energy.sort_by(|&a, &b| e[a].total_cmp(&e[b]));
    let mut perm = vec![0; n];
    for (src, dst) in by_weight.into_iter().zip(by_energy) {
        perm[src] = dst;
    }
    Ok(TransitionKernel::from_permutation(&perm)?)
}

pub(crate) fn classical(common: &Common, args: &ClassicalArgs) -> Result<Outcome, CliError> {
    let (grid, p_a) = match &common.input {
        Some(path) => read_grid(path)?,
        None => default_grid(common.dim.unwrap_or(4))?,
    };
    let kernel = match &args.kernel {
        Some(path) => kernel_from_json(&read_json::<Vec<Vec<f64>>>(path)?)?,
        None => sorting_kernel(&grid, &p_a)?,
    };
    let beta = common.beta;
    let tol = common.tolerance;
    let p_eq = grid_gibbs(&grid, Surface::B, beta)?;
    let joint = joint_from_kernel(&p_a, &kernel)?;
    let ergotropy = classical_ergotropy(&joint, &p_a, &p_eq, beta)?;
    let phi = inhomogeneity_phi(&joint, &p_a)?;
    let mut failures = Vec::new();

    let via_phi = if joint.is_deterministic() {
        let v = ergotropy_via_phi(&joint, &p_a, &grid)?;
        check(&mut failures, "relative-entropy vs phi_B route", (ergotropy - v).abs(), tol);
        json!(v)
    } else {
        Value::Null
    };

    let bruteforce = if p_a.len() <= MAX_BRUTEFORCE_CELLS {
        let (minimum, perm) = permutation_min_bruteforce(&p_a, &p_eq)?;
        let sorted = sorted_pairing_kl(&p_a, &p_eq)?;
        check(&mut failures, "brute-force minimum vs sorted pairing", (minimum - sorted).abs(), tol);
        json!({ "minimum": minimum, "permutation": perm, "sorted_pairing": sorted })
    } else {
        Value::Null
    };

    let probe = stationarity_probe(&joint, &p_a, &grid, beta, common.trials, args.epsilon, common.seed)?;
    let worst = probe.delta_d.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let second_order_limit = SECOND_ORDER_FACTOR * args.epsilon * args.epsilon;
    if probe.uniform_initial && worst > second_order_limit {
        failures.push(format!(
            "stationarity with uniform initial weights: max |Delta D| = {worst:e} exceeds {SECOND_ORDER_FACTOR} eps^2 = {second_order_limit:e}"
        ));
    }

    let mut report = Map::new();
    report.insert("n_cells".into(), json!(p_a.len()));
    report.insert("beta".into(), json!(beta));
    report.insert("seed".into(), json!(common.seed));
    report.insert("kernel_deterministic".into(), json!(kernel.is_deterministic()));
    report.insert("classical_ergotropy".into(), json!(ergotropy));
    report.insert("ergotropy_via_phi".into(), via_phi);
    report.insert("phi_B".into(), json!(phi));
    report.insert("initial_divergence".into(), json!(classical_relative_entropy(&p_a, &p_eq)?));
    report.insert("joint_divergence".into(), json!(joint_relative_entropy(&joint, &p_eq)?));
    report.insert("bruteforce".into(), bruteforce);
    report.insert(
        "stationarity".into(),
        json!({
            "epsilon": probe.epsilon,
            "n_perturbations": probe.n_perturbations,
            "min": probe.min,
            "max": probe.max,
            "mean": probe.mean,
            "mean_abs": probe.mean_abs,
            "n_negative": probe.n_negative,
            "uniform_initial": probe.uniform_initial,
            "second_order_limit": second_order_limit,
        }),
    );

    let mut table = Table::new(&["index", "E_A", "E_B", "initial", "final", "phi_B"]);
    let finals = joint.final_marginal();
    for k in 0..p_a.len() {
        table.push(vec![
            json!(k),
            json!(grid.energies(Surface::A)[k]),
            json!(grid.energies(Surface::B)[k]),
            json!(p_a.weights()[k]),
            json!(finals[k]),
            json!(phi[k]),
        ]);
    }
    Ok(Outcome { report, table, failures })
}
