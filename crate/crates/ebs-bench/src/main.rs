use std::collections::BTreeSet;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ebs_bench::fit::{aggregate, fit_power_law, median};
use ebs_bench::records::{read_records, write_records};
use ebs_bench::runner::{
    default_sweep_grid, load_instance, run_trials, EstimatorKind, Instance, TrialParams,
};
use ebs_bench::{BenchError, BenchResult};
use ebs_core::hoeffding_rounds;

/// Adaptive-shot energy estimation benchmarks on exact simulated states.
#[derive(Parser)]
#[command(name = "ebs-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    /// One measurement round per commuting group per sample.
    Grouped,
    /// One measurement round per sample, on one coefficient-weighted term.
    SingleShot,
}

impl From<EstimatorArg> for EstimatorKind {
    fn from(a: EstimatorArg) -> Self {
        match a {
            EstimatorArg::Grouped => EstimatorKind::Grouped,
            EstimatorArg::SingleShot => EstimatorKind::SingleShot,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the measurement grouping of a Hamiltonian file.
    Group {
        file: PathBuf,
        /// Reference accuracy for the printed Hoeffding budget, in energy
        /// units.
        #[arg(long, default_value_t = 1.6e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
    },
    /// Run repeated adaptive estimations at one accuracy and emit CSV.
    Estimate {
        file: PathBuf,
        /// Target accuracy in energy units; the default is chemical
        /// accuracy.
        #[arg(long, default_value_t = 1.6e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1.1)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Grouped)]
        estimator: EstimatorArg,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        min_samples: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads for independent trials; all cores when omitted.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run both estimators across a grid of accuracies and emit CSV.
    Sweep {
        file: PathBuf,
        /// Accuracy values, as fractions of the coefficient one-norm unless
        /// --absolute is set. Default: seven points from 1e-4 to 1e-1.
        #[arg(long = "epsilon", num_args = 1.., value_name = "EPSILON")]
        epsilons: Option<Vec<f64>>,
        /// Interpret the accuracy values as absolute energies.
        #[arg(long)]
        absolute: bool,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1.1)]
        beta: f64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        min_samples: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Fit a power law per estimator to a records CSV ('-' reads standard
    /// input).
    Fit {
        file: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Estimate every file in a directory and emit one aggregated row per
    /// file label.
    Curve {
        dir: PathBuf,
        #[arg(long, default_value_t = 1.6e-3)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1.1)]
        beta: f64,
        #[arg(long, value_enum, default_value_t = EstimatorArg::Grouped)]
        estimator: EstimatorArg,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        min_samples: u64,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> BenchResult<()> {
    match command {
        Command::Group {
            file,
            epsilon,
            delta,
        } => cmd_group(&file, epsilon, delta),
        Command::Estimate {
            file,
            epsilon,
            delta,
            beta,
            estimator,
            trials,
            seed,
            min_samples,
            output,
            workers,
        } => {
            let params = TrialParams {
                epsilon,
                delta,
                beta,
                min_samples,
                trials,
                base_seed: seed,
            };
            validate(&[epsilon], delta, beta, trials, min_samples)?;
            with_pool(workers, || {
                cmd_estimate(&file, estimator.into(), &params, output.as_deref())
            })
        }
        Command::Sweep {
            file,
            epsilons,
            absolute,
            delta,
            beta,
            trials,
            seed,
            min_samples,
            output,
            workers,
        } => {
            let requested = epsilons.unwrap_or_else(default_sweep_grid);
            validate(&requested, delta, beta, trials, min_samples)?;
            let params = TrialParams {
                epsilon: f64::NAN,
                delta,
                beta,
                min_samples,
                trials,
                base_seed: seed,
            };
            with_pool(workers, || {
                cmd_sweep(&file, &requested, absolute, &params, output.as_deref())
            })
        }
        Command::Fit { file, output } => cmd_fit(&file, output.as_deref()),
        Command::Curve {
            dir,
            epsilon,
            delta,
            beta,
            estimator,
            trials,
            seed,
            min_samples,
            output,
            workers,
        } => {
            validate(&[epsilon], delta, beta, trials, min_samples)?;
            let params = TrialParams {
                epsilon,
                delta,
                beta,
                min_samples,
                trials,
                base_seed: seed,
            };
            with_pool(workers, || {
                cmd_curve(&dir, estimator.into(), &params, output.as_deref())
            })
        }
    }
}

fn validate(
    epsilons: &[f64],
    delta: f64,
    beta: f64,
    trials: u64,
    min_samples: u64,
) -> BenchResult<()> {
    if epsilons.is_empty() {
        return Err(BenchError::Usage("at least one --epsilon is required".into()));
    }
    for &e in epsilons {
        if e <= 0.0 || !e.is_finite() {
            return Err(BenchError::Usage(format!(
                "--epsilon must be positive and finite, got {e}"
            )));
        }
    }
    if delta.is_nan() || delta <= 0.0 || delta >= 0.5 {
        return Err(BenchError::Usage(format!(
            "--delta must lie strictly between 0 and 0.5, got {delta}"
        )));
    }
    if beta <= 1.0 || !beta.is_finite() {
        return Err(BenchError::Usage(format!(
            "--beta must exceed 1, got {beta}"
        )));
    }
    if trials == 0 {
        return Err(BenchError::Usage("--trials must be at least 1".into()));
    }
    if min_samples == 0 {
        return Err(BenchError::Usage("--min-samples must be at least 1".into()));
    }
    Ok(())
}

fn with_pool(workers: Option<usize>, f: impl FnOnce() -> BenchResult<()> + Send) -> BenchResult<()> {
    match workers {
        None => f(),
        Some(0) => Err(BenchError::Usage("--workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| BenchError::Numerical(e.to_string()))?
            .install(f),
    }
}

fn write_output(output: Option<&Path>, bytes: &[u8]) -> BenchResult<()> {
    match output {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(bytes)?;
        }
    }
    Ok(())
}

fn base_preamble(command: &str) -> Vec<(String, String)> {
    vec![
        ("tool".into(), "ebs-bench".into()),
        ("version".into(), env!("CARGO_PKG_VERSION").into()),
        ("command".into(), command.into()),
    ]
}

fn instance_preamble(instance: &Instance) -> Vec<(String, String)> {
    vec![
        ("hamiltonian".into(), instance.label.clone()),
        ("qubits".into(), instance.hamiltonian.n().to_string()),
        ("terms".into(), instance.hamiltonian.num_terms().to_string()),
        ("groups".into(), instance.grouping.num_groups().to_string()),
        ("one_norm".into(), instance.hamiltonian.one_norm().to_string()),
        ("exact_energy".into(), instance.exact_energy.to_string()),
    ]
}

fn params_preamble(params: &TrialParams) -> Vec<(String, String)> {
    vec![
        ("delta".into(), params.delta.to_string()),
        ("beta".into(), params.beta.to_string()),
        ("min_samples".into(), params.min_samples.to_string()),
        ("trials".into(), params.trials.to_string()),
        ("seed".into(), params.base_seed.to_string()),
    ]
}

fn cmd_group(file: &Path, epsilon: f64, delta: f64) -> BenchResult<()> {
    validate(&[epsilon], delta, 1.1, 1, 1)?;
    let instance = load_instance(file)?;
    let h = &instance.hamiltonian;
    let mut out = String::new();
    out.push_str(&format!("file: {}\n", file.display()));
    out.push_str(&format!("qubits: {}\n", h.n()));
    out.push_str(&format!("terms: {}\n", h.num_terms()));
    out.push_str(&format!("one_norm: {}\n", h.one_norm()));
    out.push_str(&format!("offset: {}\n", h.offset()));
    out.push_str(&format!("groups: {}\n", instance.grouping.num_groups()));
    for (i, group) in instance.grouping.groups().iter().enumerate() {
        let members: Vec<String> = group.members.iter().map(|m| m.to_string()).collect();
        out.push_str(&format!(
            "group {i}: basis {}, members [{}]\n",
            group.basis,
            members.join(", ")
        ));
    }
    out.push_str(&format!(
        "hoeffding_rounds(epsilon={epsilon}, delta={delta}): {}\n",
        hoeffding_rounds(h, epsilon, delta)?
    ));
    write_output(None, out.as_bytes())
}

fn cmd_estimate(
    file: &Path,
    kind: EstimatorKind,
    params: &TrialParams,
    output: Option<&Path>,
) -> BenchResult<()> {
    let instance = load_instance(file)?;
    let records = run_trials(&instance, kind, params)?;
    let mut preamble = base_preamble("estimate");
    preamble.push(("file".into(), file.display().to_string()));
    preamble.extend(instance_preamble(&instance));
    preamble.push(("estimator".into(), kind.as_str().into()));
    preamble.push(("epsilon".into(), params.epsilon.to_string()));
    preamble.extend(params_preamble(params));
    preamble.push((
        "cap_rounds".into(),
        hoeffding_rounds(&instance.hamiltonian, params.epsilon, params.delta)?.to_string(),
    ));
    let mut bytes = Vec::new();
    write_records(&mut bytes, &preamble, &records)?;
    write_output(output, &bytes)
}

fn cmd_sweep(
    file: &Path,
    requested: &[f64],
    absolute: bool,
    params: &TrialParams,
    output: Option<&Path>,
) -> BenchResult<()> {
    let instance = load_instance(file)?;
    let scale = if absolute {
        1.0
    } else {
        instance.hamiltonian.one_norm()
    };
    let mut epsilons: Vec<f64> = requested.iter().map(|e| e * scale).collect();
    epsilons.sort_by(|a, b| a.partial_cmp(b).expect("validated finite"));
    let mut records = Vec::new();
    for &epsilon in &epsilons {
        for kind in [EstimatorKind::Grouped, EstimatorKind::SingleShot] {
            let pt = TrialParams { epsilon, ..*params };
            records.extend(run_trials(&instance, kind, &pt)?);
        }
    }
    let mut preamble = base_preamble("sweep");
    preamble.push(("file".into(), file.display().to_string()));
    preamble.extend(instance_preamble(&instance));
    preamble.push((
        "epsilon_mode".into(),
        if absolute { "absolute" } else { "relative" }.into(),
    ));
    let rendered: Vec<String> = epsilons.iter().map(|e| e.to_string()).collect();
    preamble.push(("epsilons".into(), rendered.join(" ")));
    preamble.extend(params_preamble(params));
    let mut bytes = Vec::new();
    write_records(&mut bytes, &preamble, &records)?;
    write_output(output, &bytes)
}

#[derive(Serialize)]
struct FitRow {
    estimator: String,
    amplitude: f64,
    exponent: f64,
    residual: f64,
    points: usize,
}

fn cmd_fit(file: &Path, output: Option<&Path>) -> BenchResult<()> {
    let records = if file.as_os_str() == "-" {
        let mut text = String::new();
        std::io::stdin().lock().read_to_string(&mut text)?;
        read_records(text.as_bytes())?
    } else {
        read_records(std::fs::File::open(file)?)?
    };
    if records.is_empty() {
        return Err(BenchError::Numerical("no records to fit".into()));
    }
    let curves = aggregate(&records);
    let mut rows = Vec::new();
    for (estimator, points) in curves {
        let fit = fit_power_law(&points)?;
        rows.push(FitRow {
            estimator,
            amplitude: fit.amplitude,
            exponent: fit.exponent,
            residual: fit.residual,
            points: fit.points,
        });
    }
    let mut preamble = base_preamble("fit");
    preamble.push(("input".into(), file.display().to_string()));
    let mut bytes = Vec::new();
    for (key, value) in &preamble {
        bytes.extend_from_slice(format!("# {key}: {value}\n").as_bytes());
    }
    let mut writer = csv::Writer::from_writer(&mut bytes);
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    drop(writer);
    write_output(output, &bytes)
}

#[derive(Serialize)]
struct CurveRow {
    distance: String,
    exact_energy: f64,
    median_estimate: f64,
    median_rounds: f64,
    hoeffding_rounds: u64,
    ratio: f64,
}

fn cmd_curve(
    dir: &Path,
    kind: EstimatorKind,
    params: &TrialParams,
    output: Option<&Path>,
) -> BenchResult<()> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|entry| Ok(entry?.path()))
        .collect::<BenchResult<Vec<_>>>()?
        .into_iter()
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(BenchError::Usage(format!(
            "no instance files in {}",
            dir.display()
        )));
    }
    let mut labels = BTreeSet::new();
    let mut rows = Vec::new();
    for file in &files {
        let instance = load_instance(file)?;
        if !labels.insert(instance.label.clone()) {
            return Err(BenchError::Usage(format!(
                "duplicate instance label {}",
                instance.label
            )));
        }
        let records = run_trials(&instance, kind, params)?;
        let rounds: Vec<f64> = records.iter().map(|r| r.rounds_used as f64).collect();
        let estimates: Vec<f64> = records.iter().map(|r| r.estimate).collect();
        let budget = hoeffding_rounds(&instance.hamiltonian, params.epsilon, params.delta)?;
        let median_rounds = median(&rounds);
        rows.push(CurveRow {
            distance: instance.label.clone(),
            exact_energy: instance.exact_energy,
            median_estimate: median(&estimates),
            median_rounds,
            hoeffding_rounds: budget,
            ratio: median_rounds / budget as f64,
        });
    }
    let mut preamble = base_preamble("curve");
    preamble.push(("directory".into(), dir.display().to_string()));
    preamble.push(("files".into(), files.len().to_string()));
    preamble.push(("estimator".into(), kind.as_str().into()));
    preamble.push(("epsilon".into(), params.epsilon.to_string()));
    preamble.extend(params_preamble(params));
    let mut bytes = Vec::new();
    for (key, value) in &preamble {
        bytes.extend_from_slice(format!("# {key}: {value}\n").as_bytes());
    }
    let mut writer = csv::Writer::from_writer(&mut bytes);
    for row in &rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    drop(writer);
    write_output(output, &bytes)
}
