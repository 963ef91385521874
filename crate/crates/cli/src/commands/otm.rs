use ergokit::io::MatrixJson;
use ergokit::quantum::HermitianOperator;
use ergokit::workbench::{
    evolve_unitary_converged, sharpened_bound_report, DrivingPath, DrivingProtocol, Knot, WorkReport, REFINEMENT_TOL,
};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::{hermitian, object, read_json};
use crate::{CliError, Common, OtmArgs, Outcome, Table};

const MAX_DOUBLINGS: u32 = 20;

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum PathKind {
    Sudden,
    LinearRamp,
    Schedule,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct KnotInput {
    time: f64,
    hamiltonian: MatrixJson,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProtocolInput {
    h_a: MatrixJson,
    h_b: MatrixJson,
    path: PathKind,
    #[serde(default)]
    tau: f64,
    #[serde(default)]
    knots: Vec<KnotInput>,
}

fn endpoints_and_protocol(common: &Common, args: &OtmArgs) -> Result<(HermitianOperator, HermitianOperator, Option<DrivingProtocol>), CliError> {
    let Some(path) = &common.input else {
        let h_a = HermitianOperator::from_real_diagonal(&[0.0, 1.0])?;
        let h_b = HermitianOperator::from_real_rows(&[vec![0.0, 0.5], vec![0.5, 1.0]])?;
        return Ok((h_a, h_b, None));
    };
    let input: ProtocolInput = read_json(path)?;
    let (h_a, h_b) = (hermitian(&input.h_a)?, hermitian(&input.h_b)?);
    let protocol = match input.path {
        PathKind::Sudden => DrivingProtocol::sudden(h_a.clone(), h_b.clone())?,
        PathKind::LinearRamp => DrivingProtocol::linear_ramp(h_a.clone(), h_b.clone(), input.tau)?,
        PathKind::Schedule => {
            let knots = input
                .knots
                .iter()
                .map(|k| Ok(Knot { time: k.time, hamiltonian: hermitian(&k.hamiltonian)? }))
                .collect::<Result<Vec<_>, CliError>>()?;
            DrivingProtocol::schedule_between(&h_a, &h_b, knots)?
        }
    };
    // an explicit sweep overrides the file's path
    let keep = args.taus.is_empty();
    Ok((h_a, h_b, keep.then_some(protocol)))
}

fn ramp(h_a: &HermitianOperator, h_b: &HermitianOperator, tau: f64) -> Result<DrivingProtocol, CliError> {
    if tau < 0.0 || !tau.is_finite() {
        return Err(CliError::Config(format!("durations must be nonnegative, got {tau}")));
    }
    Ok(if tau == 0.0 {
        DrivingProtocol::sudden(h_a.clone(), h_b.clone())?
    } else {
        DrivingProtocol::linear_ramp(h_a.clone(), h_b.clone(), tau)?
    })
}

struct Point {
    tau: f64,
    path: &'static str,
    n_steps: usize,
    last_change: f64,
    report: WorkReport,
}

fn evaluate(protocol: &DrivingProtocol, steps: usize, beta: f64) -> Result<Point, CliError> {
    let prop = evolve_unitary_converged(protocol, steps, REFINEMENT_TOL, MAX_DOUBLINGS).map_err(CliError::Compute)?;
    let report = sharpened_bound_report(protocol, &prop.unitary, beta)?;
    let path = match protocol.path() {
        DrivingPath::Sudden => "sudden",
        DrivingPath::LinearRamp => "linear_ramp",
        DrivingPath::Schedule(_) => "schedule",
    };
    Ok(Point { tau: protocol.tau(), path, n_steps: prop.n_steps, last_change: prop.last_change, report })
}

pub(crate) fn otm(common: &Common, args: &OtmArgs) -> Result<Outcome, CliError> {
    let (h_a, h_b, fixed) = endpoints_and_protocol(common, args)?;
    let protocols = match fixed {
        Some(p) => vec![p],
        None if args.taus.is_empty() => vec![ramp(&h_a, &h_b, args.tau)?],
        None => args.taus.iter().map(|&t| ramp(&h_a, &h_b, t)).collect::<Result<_, _>>()?,
    };
    let points: Vec<Point> = protocols
        .par_iter()
        .map(|p| evaluate(p, args.steps, common.beta))
        .collect::<Result<_, _>>()?;

    let mut failures = Vec::new();
    let mut entries = Vec::new();
    let mut table = Table::new(&[
        "tau",
        "n_steps",
        "avg_work",
        "delta_F",
        "w_irr",
        "beta_w_irr",
        "bound",
        "incoherent",
        "coherence",
        "population",
        "jensen_slack",
    ]);
    for pt in &points {
        for v in pt.report.violations(common.tolerance) {
            failures.push(format!("tau = {}: {v}", pt.tau));
        }
        let mut entry = object(&pt.report);
        entry.insert("tau".into(), json!(pt.tau));
        entry.insert("path".into(), json!(pt.path));
        entry.insert("n_steps".into(), json!(pt.n_steps));
        entry.insert("last_change".into(), json!(pt.last_change));
        entries.push(Value::Object(entry));

        let (w, b) = (&pt.report.work, &pt.report.bound_terms);
        table.push(vec![
            json!(pt.tau),
            json!(pt.n_steps),
            json!(w.avg_work),
            json!(w.delta_f),
            json!(w.w_irr),
            json!(w.beta * w.w_irr),
            json!(pt.report.bound),
            json!(b.incoherent),
            json!(b.coherence),
            json!(b.population),
            json!(pt.report.jensen_slack),
        ]);
    }

    let mut report = Map::new();
    report.insert("beta".into(), json!(common.beta));
    report.insert("dim".into(), json!(h_a.dim()));
    report.insert("tolerance".into(), json!(common.tolerance));
    report.insert("points".into(), Value::Array(entries));
    Ok(Outcome { report, table, failures })
}
