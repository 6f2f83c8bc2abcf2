use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cfa_core::experiment::{run_experiment, FittedReduction};
use cfa_core::genlin::{make_bernoulli_family, make_gaussian_family};
use cfa_core::io::{load_csv_as, write_csv, write_table};
use cfa_core::synth::{gen_dataset, to_centered_classification};
use cfa_core::theory::{run_suite, Suite};
use cfa_core::{
    AggregationSpec, Algorithm, Error, ExperimentConfig, GenerativeSpec, ReductionConfig, Registry, Scaling, Task,
    TransformSpec,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cfa", version, about = "Supervised feature aggregation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Linear,
    Quadratic,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Nonlincfa,
    Genlincfa,
    Lincfa,
}

#[derive(Clone, Copy, ValueEnum)]
enum TaskArg {
    Regression,
    Classification,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    Center,
    Standardize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Gaussian,
    Bernoulli,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset as CSV (features x1..xD, target y).
    Synth {
        #[arg(long, value_enum, default_value = "linear")]
        form: FormArg,
        #[arg(long)]
        dims: usize,
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Threshold the mean-centered target into 0/1 classes.
        #[arg(long)]
        classification: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a partition on a CSV and write it with the reduced data.
    Reduce {
        #[arg(long, value_enum)]
        algo: AlgoArg,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        epsilon: f64,
        #[arg(long, default_value = "mean")]
        agg: String,
        #[arg(long, default_value = "identity")]
        transform: String,
        #[arg(long, value_enum, default_value = "regression")]
        task: TaskArg,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long, value_enum, default_value = "standardize")]
        scaling: ScalingArg,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        out_partition: PathBuf,
        #[arg(long)]
        out_reduced: PathBuf,
    },
    /// Run an experiment from a JSON config.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Flat per-row CSV next to the JSON report.
        #[arg(long)]
        out_rows: Option<PathBuf>,
    },
    /// Run Monte Carlo checks of the bias/variance/deviance formulas.
    VerifyTheory {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 2000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<(), Error> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn synth(
    form: FormArg,
    dims: usize,
    sigma: f64,
    n: usize,
    seed: u64,
    classification: bool,
    out: &Path,
) -> Result<(), Error> {
    let spec = match form {
        FormArg::Linear => GenerativeSpec::linear(dims, sigma, seed),
        FormArg::Quadratic => GenerativeSpec::quadratic(dims, sigma, seed),
    };
    let mut ds = gen_dataset(&spec, n)?;
    if classification {
        ds = to_centered_classification(ds)?;
    }
    write_csv(&ds, out)
}

#[allow(clippy::too_many_arguments)]
fn reduce(
    algo: AlgoArg,
    epsilon: f64,
    agg: &str,
    transform: &str,
    task: TaskArg,
    family: Option<FamilyArg>,
    scaling: ScalingArg,
    input: &Path,
    target: &str,
    out_partition: &Path,
    out_reduced: &Path,
) -> Result<(), Error> {
    let task = match task {
        TaskArg::Regression => Task::Regression,
        TaskArg::Classification => Task::Classification,
    };
    let ds = load_csv_as(input, target, task)?;
    let family = match (family, task) {
        (Some(FamilyArg::Bernoulli), _) | (None, Task::Classification) => make_bernoulli_family(),
        _ => make_gaussian_family(),
    };
    let algorithm = match algo {
        AlgoArg::Nonlincfa => Algorithm::NonLinCfa,
        AlgoArg::Genlincfa => Algorithm::GenLinCfa,
        AlgoArg::Lincfa => Algorithm::LinCfa,
    };
    let config = ReductionConfig::new(epsilon)
        .with_aggregation(AggregationSpec::parse(agg))
        .with_transform(TransformSpec::parse(transform))
        .with_family(family);
    let scaling = match scaling {
        ScalingArg::Center => Scaling::Center,
        ScalingArg::Standardize => Scaling::Standardize,
    };
    let reg = Registry::default();
    let fitted = FittedReduction::fit(&ds, algorithm, &config, scaling, &reg)?;
    let file = fitted
        .partition
        .to_file(ds.column_names(), &fitted.aggregation, &fitted.transform);
    write_json(&file, out_partition)?;
    let reduced = fitted.partition.representatives();
    write_table(
        fs::File::create(out_reduced)?,
        &fitted.reduced_names(),
        reduced,
        Some((ds.target_name(), ds.target())),
    )?;
    eprintln!("{} inputs reduced to {}", ds.n_features(), fitted.partition.n_clusters());
    Ok(())
}

fn evaluate(config: &Path, out: &Path, out_rows: Option<&Path>) -> Result<(), Error> {
    let cfg = ExperimentConfig::from_json(&fs::read_to_string(config)?)?;
    let report = run_experiment(&cfg, &Registry::default())?;
    write_json(&report, out)?;
    if let Some(p) = out_rows {
        fs::write(p, report.rows_csv())?;
    }
    for s in &report.summary {
        let setting = match (s.epsilon, s.k) {
            (Some(e), _) => format!("eps={e}"),
            (_, Some(k)) => format!("k={k}"),
            _ => "default".into(),
        };
        eprintln!(
            "{setting}: d = {:.2} ± {:.2}, {} = {:.4} ± {:.4}",
            s.d_mean, s.d_half_width, report.metadata.score, s.score_mean, s.score_half_width
        );
    }
    Ok(())
}

/// Returns whether every check passed.
fn verify(suite: &str, reps: usize, seed: u64, out: Option<&Path>) -> Result<bool, Error> {
    let report = run_suite(Suite::parse(suite)?, seed, reps)?;
    for c in &report.checks {
        eprintln!(
            "{} {}: {:.6} vs {:.6} (tol {:.2e})",
            if c.passed { "ok  " } else { "FAIL" },
            c.name,
            c.estimate,
            c.expected,
            c.tolerance
        );
    }
    match out {
        Some(p) => write_json(&report, p)?,
        None => println!("{}", serde_json::to_string_pretty(&report)?),
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let result = match cli.command {
        Command::Synth {
            form,
            dims,
            sigma,
            n,
            seed,
            classification,
            out,
        } => synth(form, dims, sigma, n, seed, classification, &out).map(|_| true),
        Command::Reduce {
            algo,
            epsilon,
            agg,
            transform,
            task,
            family,
            scaling,
            input,
            target,
            out_partition,
            out_reduced,
        } => reduce(
            algo,
            epsilon,
            &agg,
            &transform,
            task,
            family,
            scaling,
            &input,
            &target,
            &out_partition,
            &out_reduced,
        )
        .map(|_| true),
        Command::Evaluate { config, out, out_rows } => evaluate(&config, &out, out_rows.as_deref()).map(|_| true),
        Command::VerifyTheory { suite, reps, seed, out } => verify(&suite, reps, seed, out.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: verification failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
