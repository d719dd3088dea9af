use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use isotensor::basis::RepresentationModel;
use isotensor::closure::{
    dual_path_check, frame_residual, verify_rivlin_identity, ClosureCoefficients, TraceMode,
};
use isotensor::delta::{
    gen_kronecker, verify_grouped_expansion, GenKroneckerSpec, GroupedIdentity,
};
use isotensor::json::TensorJson;
use isotensor::sampling;
use isotensor::DenseTensor;

use crate::{read_file, to_pretty, CliError, CliResult, Identity, Outcome};

enum Job {
    Determinant {
        size: usize,
        dim: usize,
    },
    Grouped {
        which: GroupedIdentity,
        t: DenseTensor,
    },
    Rivlin {
        t: DenseTensor,
        s: DenseTensor,
        mode: TraceMode,
    },
    DualPath {
        model: RepresentationModel,
        t: DenseTensor,
        u: DenseTensor,
    },
    Frame {
        a: ClosureCoefficients,
        t: DenseTensor,
        u: DenseTensor,
    },
}

impl Job {
    fn describe(&self) -> Value {
        match self {
            Job::Determinant { size, dim } => json!({"size": size, "dim": dim}),
            Job::Grouped { t, .. } => json!({"T": t}),
            Job::Rivlin { t, s, .. } => json!({"T": t, "S": s}),
            Job::DualPath { model, t, u } => {
                json!({"representation": model.to_json(), "T": t, "U": u})
            }
            Job::Frame { a, t, u } => json!({"coefficients": a.to_json(), "T": t, "U": u}),
        }
    }

    /// Nonzero residual entries and, when available, the residual itself.
    fn run(&self) -> isotensor::Result<(usize, Option<DenseTensor>)> {
        let with = |r: DenseTensor| (r.count_nonzero(), Some(r));
        Ok(match self {
            Job::Determinant { size, dim } => {
                let upper: Vec<usize> = (0..*size).map(|n| 2 * n).collect();
                let lower: Vec<usize> = (0..*size).map(|n| 2 * n + 1).collect();
                let g = gen_kronecker(&GenKroneckerSpec::new(upper, lower)?, *dim)?;
                (g.count_nonzero(), None)
            }
            Job::Grouped { which, t } => with(verify_grouped_expansion(*which, t)?),
            Job::Rivlin { t, s, mode } => with(verify_rivlin_identity(t, s, *mode)?),
            Job::DualPath { model, t, u } => {
                let d = dual_path_check(model, t, u)?;
                with(d.lhs.try_sub(&d.rhs)?)
            }
            Job::Frame { a, t, u } => (frame_residual(a, t, u)?, None),
        })
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Fixture {
    samples: Vec<FixtureSample>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FixtureSample {
    #[serde(rename = "T")]
    t: TensorJson,
    #[serde(rename = "S", default)]
    s: Option<TensorJson>,
}

fn identity_name(identity: Identity) -> &'static str {
    match identity {
        Identity::Det4 => "det4",
        Identity::Eq110 => "eq1_10",
        Identity::Eq111 => "eq1_11",
        Identity::A4 => "a4",
        Identity::DualPath => "dual_path",
        Identity::Frame => "frame",
    }
}

fn grouped(identity: Identity) -> Option<GroupedIdentity> {
    match identity {
        Identity::Eq110 => Some(GroupedIdentity::Eq110),
        Identity::Eq111 => Some(GroupedIdentity::Eq111),
        _ => None,
    }
}

fn fixture_jobs(identity: Identity, path: &Path) -> CliResult<Vec<Job>> {
    let text = read_file(path)?;
    let fixture: Fixture = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let mut jobs = Vec::new();
    for sample in &fixture.samples {
        let t = DenseTensor::try_from(&sample.t)?;
        let job = match (identity, &sample.s) {
            (Identity::A4, Some(s)) => Job::Rivlin {
                t,
                s: DenseTensor::try_from(s)?,
                mode: TraceMode::Lenient,
            },
            (Identity::Eq110 | Identity::Eq111, None) => Job::Grouped {
                which: grouped(identity).unwrap(),
                t,
            },
            _ => {
                return Err(CliError::Usage(format!(
                    "fixture samples for {} need {}",
                    identity_name(identity),
                    if identity == Identity::A4 {
                        "\"T\" and \"S\""
                    } else {
                        "only \"T\""
                    }
                )))
            }
        };
        jobs.push(job);
    }
    if jobs.is_empty() {
        return Err(CliError::Usage("fixture has no samples".to_string()));
    }
    Ok(jobs)
}

fn random_jobs(identity: Identity, trials: usize, seed: u64) -> Vec<Job> {
    let mut rng = sampling::rng(seed);
    let ts: Vec<DenseTensor> = sampling::degenerate_symmetric()
        .into_iter()
        .chain((0..trials).map(|_| sampling::random_symmetric(&mut rng)))
        .collect();
    match identity {
        Identity::Det4 => vec![
            Job::Determinant { size: 4, dim: 3 },
            Job::Determinant { size: 3, dim: 2 },
        ],
        Identity::Eq110 | Identity::Eq111 => ts
            .into_iter()
            .map(|t| Job::Grouped {
                which: grouped(identity).unwrap(),
                t,
            })
            .collect(),
        Identity::A4 => ts
            .into_iter()
            .map(|t| Job::Rivlin {
                t,
                s: sampling::random_trace_free_symmetric(&mut rng),
                mode: TraceMode::Strict,
            })
            .collect(),
        Identity::DualPath => ts
            .into_iter()
            .map(|t| {
                let model = RepresentationModel::new(
                    sampling::random_rationals(&mut rng, 9),
                    sampling::random_rationals(&mut rng, 19),
                )
                .unwrap();
                Job::DualPath {
                    model,
                    t,
                    u: sampling::random_trace_free(&mut rng),
                }
            })
            .collect(),
        Identity::Frame => ts
            .into_iter()
            .map(|t| Job::Frame {
                a: ClosureCoefficients::new(sampling::random_rationals(&mut rng, 13)).unwrap(),
                t,
                u: sampling::random_trace_free(&mut rng),
            })
            .collect(),
    }
}

pub fn cmd_verify(
    identity: Identity,
    trials: usize,
    seed: u64,
    fixture: Option<&Path>,
) -> CliResult<Outcome> {
    let jobs = match fixture {
        Some(path) => {
            if !matches!(identity, Identity::A4 | Identity::Eq110 | Identity::Eq111) {
                return Err(CliError::Usage(format!(
                    "--fixture is not supported for {}",
                    identity_name(identity)
                )));
            }
            fixture_jobs(identity, path)?
        }
        None => random_jobs(identity, trials, seed),
    };
    let results: Vec<isotensor::Result<(usize, Option<DenseTensor>)>> =
        jobs.par_iter().map(Job::run).collect();
    let mut worst = 0;
    let mut failing = None;
    for (job, result) in jobs.iter().zip(results) {
        let (nonzero, residual) = result?;
        worst = worst.max(nonzero);
        if nonzero > 0 && failing.is_none() {
            let mut sample = job.describe();
            if let Some(r) = residual {
                sample["residual"] = json!(r);
            }
            failing = Some(sample);
        }
    }
    let pass = failing.is_none();
    let mut report = json!({
        "identity": identity_name(identity),
        "trials": jobs.len(),
        "seed": seed,
        "max_residual_entries_nonzero": worst,
        "pass": pass,
    });
    if let Some(sample) = failing {
        report["failing_sample"] = sample;
    }
    Ok(Outcome {
        text: to_pretty(&report),
        pass,
    })
}
