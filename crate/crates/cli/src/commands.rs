//! Subcommand definitions and their execution.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use intrinsic_metrics::bounds::{self, BoundConfig, BoundError, BoundReport, Verdict};
use intrinsic_metrics::experiments::{
    self, CompletionRow, ExperimentError, InvarianceRow, SweepRow, SweepSummary, Variant,
};
use intrinsic_metrics::metrics::{self, Estimate, Method, MetricError, SamplerConfig};
use intrinsic_metrics::num_kernels;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::body_spec::{load_spec, SpecError};
use crate::output::{render, Envelope, Format};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_UNDECIDED: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "imetric",
    version,
    about = "Intrinsic L_p metrics of convex bodies"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Base seed of the Gaussian stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(100..))]
    pub samples: u64,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write results here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricKind {
    Intrinsic,
    Classical,
    Hausdorff,
}

fn doubling(from: usize, to: usize) -> Vec<usize> {
    std::iter::successors(Some(from), |n| Some(n * 2))
        .take_while(|&n| n <= to)
        .collect()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One distance between two bodies.
    Metric {
        /// Body spec: inline JSON or a file path.
        a: String,
        b: String,
        #[arg(long, value_enum, default_value_t = MetricKind::Intrinsic)]
        metric: MetricKind,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Deterministic quadrature instead of sampling (dimension <= 3).
        #[arg(long)]
        quadrature: bool,
        #[arg(long, default_value_t = metrics::DEFAULT_MESH_TARGET)]
        mesh_target: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Checks the lower bound on the intrinsic metric for one pair.
    BoundCheck {
        a: String,
        b: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = metrics::DEFAULT_MESH_TARGET)]
        mesh_target: f64,
        /// Cap for automatic sample doubling.
        #[arg(long, default_value_t = bounds::DEFAULT_MAX_SAMPLES)]
        max_samples: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// The bound on random pairs for every dimension and exponent.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3])]
        dims: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0])]
        ps: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        pairs: usize,
        #[arg(long, default_value_t = metrics::DEFAULT_MESH_TARGET)]
        mesh_target: f64,
        #[arg(long, default_value_t = bounds::DEFAULT_MAX_SAMPLES)]
        max_samples: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Embedding and rotation checks for one pair.
    Invariance {
        a: String,
        b: String,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0, 1, 2])]
        extra_dims: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        rotations: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Truncated coordinate hulls with weights (ln(n+1))^(-1/2).
    Completion {
        #[arg(long, value_delimiter = ',', default_values_t = doubling(16, 4096))]
        head_ns: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = doubling(16, 4096))]
        tail_ns: Vec<usize>,
        #[arg(long, default_value_t = 1 << 13)]
        work_dim: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Table of the factor relating the intrinsic and classical metrics.
    Factor {
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0, 4.0])]
        ps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = 1..=10)]
        dims: Vec<usize>,
        #[command(flatten)]
        run: RunArgs,
    },
}

impl Command {
    pub fn run_args(&self) -> &RunArgs {
        match self {
            Command::Metric { run, .. }
            | Command::BoundCheck { run, .. }
            | Command::Sweep { run, .. }
            | Command::Invariance { run, .. }
            | Command::Completion { run, .. }
            | Command::Factor { run, .. } => run,
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
    #[error("serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

/// Rendered output and the process exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub exit: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub metric: String,
    pub p: f64,
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub method: Method,
    pub n_samples: u64,
    pub seed: u64,
    pub bracket_width: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionSummary {
    /// Spearman correlation of tail index against tail spread.
    pub tail_std_spearman: Option<f64>,
    /// Spearman correlation of head index against the pairwise metric.
    pub head_metric_spearman: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorRow {
    pub p: f64,
    pub d: usize,
    pub factor: f64,
}

fn sampler(run: &RunArgs) -> SamplerConfig {
    SamplerConfig::new(run.seed, run.samples as usize)
}

fn envelope<R, S>(
    command: &str,
    run: &RunArgs,
    rows: Vec<R>,
    summary: Option<S>,
) -> Envelope<R, S> {
    Envelope {
        command: command.into(),
        seed: run.seed,
        samples: run.samples as usize,
        rows,
        summary,
    }
}

fn check_p(p: f64) -> Result<(), CliError> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(CliError::Usage(format!(
            "--p must be a finite number >= 1, got {p}"
        )));
    }
    Ok(())
}

fn load_pair(
    a: &str,
    b: &str,
) -> Result<
    (
        intrinsic_metrics::bodies::Body,
        intrinsic_metrics::bodies::Body,
    ),
    CliError,
> {
    let (_, ka) = load_spec(a)?;
    let (_, kb) = load_spec(b)?;
    if ka.dim() != kb.dim() {
        return Err(CliError::Usage(format!(
            "bodies have different dimensions ({} and {})",
            ka.dim(),
            kb.dim()
        )));
    }
    Ok((ka, kb))
}

fn verdict_exit(v: Verdict) -> u8 {
    match v {
        Verdict::Holds | Verdict::Vacuous => EXIT_OK,
        Verdict::Violated => EXIT_VIOLATION,
        Verdict::Undecided => EXIT_UNDECIDED,
    }
}

fn sweep_placeholder() -> SweepRow {
    SweepRow {
        pair_id: 0,
        d: 0,
        p: 0.0,
        body_kinds: String::new(),
        delta: 0.0,
        delta_method: Method::Exact,
        v1_hull: 0.0,
        v1_used: 0.0,
        lhs: 0.0,
        lhs_ci_low: 0.0,
        rhs_eq3: 0.0,
        rhs_eq5: 0.0,
        ratio: None,
        m_value: None,
        raw_mean: 0.0,
        raw_std_error: 0.0,
        chain_lower: 0.0,
        holds_chain: true,
        n_samples: 0,
        verdict: Verdict::Vacuous,
    }
}

/// Runs a parsed command. Thread-pool setup is left to the caller.
pub fn execute(command: &Command) -> Result<Outcome, CliError> {
    let run = command.run_args();
    match command {
        Command::Metric {
            a,
            b,
            metric,
            p,
            quadrature,
            mesh_target,
            ..
        } => {
            check_p(*p)?;
            let (ka, kb) = load_pair(a, b)?;
            let cfg = sampler(run);
            let est: Estimate = match (metric, quadrature) {
                (MetricKind::Intrinsic, false) => metrics::intrinsic_lp(&ka, &kb, *p, &cfg)?,
                (MetricKind::Intrinsic, true) => metrics::intrinsic_lp_quadrature(&ka, &kb, *p)?,
                (MetricKind::Classical, false) => metrics::classical_lp(&ka, &kb, *p, &cfg)?,
                (MetricKind::Classical, true) => metrics::classical_lp_quadrature(&ka, &kb, *p)?,
                (MetricKind::Hausdorff, _) => metrics::hausdorff(&ka, &kb, *mesh_target)?,
            };
            let rec = MetricRecord {
                metric: metric
                    .to_possible_value()
                    .expect("named")
                    .get_name()
                    .to_string(),
                p: *p,
                value: est.value,
                std_error: est.std_error,
                ci_low: est.ci_low,
                ci_high: est.ci_high,
                method: est.method,
                n_samples: est.n_samples,
                seed: run.seed,
                bracket_width: est.bracket_width,
                converged: est.converged,
            };
            let env = envelope::<_, ()>("metric", run, vec![rec], None);
            Ok(Outcome {
                text: render(run.format, &env, None)?,
                exit: EXIT_OK,
            })
        }
        Command::BoundCheck {
            a,
            b,
            p,
            mesh_target,
            max_samples,
            ..
        } => {
            check_p(*p)?;
            let (ka, kb) = load_pair(a, b)?;
            let cfg = BoundConfig {
                sampler: sampler(run),
                max_samples: (*max_samples).max(run.samples as usize),
                mesh_target: *mesh_target,
            };
            let report: BoundReport = bounds::check_theorem2_with(&ka, &kb, *p, &cfg)?;
            let exit = verdict_exit(report.verdict);
            let env = envelope::<_, ()>("bound-check", run, vec![report], None);
            Ok(Outcome {
                text: render(run.format, &env, None)?,
                exit,
            })
        }
        Command::Sweep {
            dims,
            ps,
            pairs,
            mesh_target,
            max_samples,
            ..
        } => {
            if let Some(d) = dims.iter().find(|&&d| !(1..=8).contains(&d)) {
                return Err(CliError::Usage(format!(
                    "--dims entries must lie in [1, 8], got {d}"
                )));
            }
            if let Some(p) = ps.iter().find(|&&p| !(1.0..=8.0).contains(&p)) {
                return Err(CliError::Usage(format!(
                    "--ps entries must lie in [1, 8], got {p}"
                )));
            }
            let cfg = BoundConfig {
                sampler: sampler(run),
                max_samples: (*max_samples).max(run.samples as usize),
                mesh_target: *mesh_target,
            };
            let rows = experiments::bound_sweep(dims, ps, *pairs, &cfg)?;
            let summary = SweepSummary::of(&rows);
            let exit = if summary.violated > 0 {
                EXIT_VIOLATION
            } else if summary.undecided > 0 {
                EXIT_UNDECIDED
            } else {
                EXIT_OK
            };
            let env = envelope("sweep", run, rows, Some(summary));
            Ok(Outcome {
                text: render(run.format, &env, Some(&sweep_placeholder()))?,
                exit,
            })
        }
        Command::Invariance {
            a,
            b,
            p,
            extra_dims,
            rotations,
            ..
        } => {
            check_p(*p)?;
            let (ka, kb) = load_pair(a, b)?;
            let rows: Vec<InvarianceRow> =
                experiments::invariance_suite(&ka, &kb, *p, extra_dims, *rotations, &sampler(run))?;
            let exit = if rows.iter().all(|r| r.passes) {
                EXIT_OK
            } else {
                EXIT_VIOLATION
            };
            let env = envelope::<_, ()>("invariance", run, rows, None);
            Ok(Outcome {
                text: render(run.format, &env, None)?,
                exit,
            })
        }
        Command::Completion {
            head_ns,
            tail_ns,
            work_dim,
            p,
            ..
        } => {
            check_p(*p)?;
            let rows: Vec<CompletionRow> =
                experiments::completion_experiment(head_ns, tail_ns, *work_dim, *p, &sampler(run))?;
            let corr = |variant: Variant, y: &dyn Fn(&CompletionRow) -> Option<f64>| {
                let (x, y): (Vec<f64>, Vec<f64>) = rows
                    .iter()
                    .filter(|r| r.variant == variant)
                    .filter_map(|r| y(r).map(|v| (r.n_index as f64, v)))
                    .unzip();
                (x.len() >= 2).then(|| experiments::spearman(&x, &y))
            };
            let summary = CompletionSummary {
                tail_std_spearman: corr(Variant::Tail, &|r| Some(r.std_support)),
                head_metric_spearman: corr(Variant::Head, &|r| r.pairwise_metric.map(|e| e.value)),
            };
            let env = envelope("completion", run, rows, Some(summary));
            Ok(Outcome {
                text: render(run.format, &env, None)?,
                exit: EXIT_OK,
            })
        }
        Command::Factor { ps, dims, .. } => {
            let mut rows = Vec::new();
            for &p in ps {
                check_p(p)?;
                for &d in dims {
                    let factor = num_kernels::intrinsic_factor(p, d).map_err(MetricError::from)?;
                    rows.push(FactorRow { p, d, factor });
                }
            }
            let env = envelope::<_, ()>("factor", run, rows, None);
            Ok(Outcome {
                text: render(run.format, &env, None)?,
                exit: EXIT_OK,
            })
        }
    }
}
