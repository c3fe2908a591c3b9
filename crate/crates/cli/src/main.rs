//! `gcims`: generate, validate, evaluate, train, predict and render.
//!
//! Exit codes: 0 success, 2 validation or data failure, 3 invalid
//! configuration, 4 missing input.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gcims_core::container::{read_model, write_model};
use gcims_core::eval::{evaluate_all, AlgorithmPlan, EvalOptions};
use gcims_core::features::FeatureConfig;
use gcims_core::io::{inspect_dataset, load_dataset, read_imsx, write_dataset, METADATA_FILE_NAME};
use gcims_core::render::write_pgm;
use gcims_core::synth::{generate, SynthConfig};
use gcims_core::{ClassifierKind, ClassifierSpec, Error, PreprocessConfig, Result, TrainedPipeline};

use config::RunConfig;

#[derive(Parser)]
#[command(name = "gcims", version, about = "GC-IMS infection screening toolkit")]
struct Cli {
    /// Master seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// `key = value` file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset (IMSX files plus metadata.csv).
    Generate(GenerateArgs),
    /// Check every record and spectrum; one line per sample.
    Validate(DataArgs),
    /// Compare classifiers with a held-out split and cross-validated tuning.
    Evaluate(EvaluateArgs),
    /// Fit one classifier on all admitted samples and save a model file.
    Train(TrainArgs),
    /// Classify one spectrum with a saved model.
    Predict(PredictArgs),
    /// Render a spectrum as a binary PGM image.
    Render(RenderArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    separation: Option<f64>,
}

#[derive(Args)]
struct DataArgs {
    /// Directory of .imsx files.
    #[arg(long)]
    data: PathBuf,
    /// Metadata table; defaults to metadata.csv inside --data.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    /// Preprocessing steps file; the standard chain when absent.
    #[arg(long)]
    preprocess: Option<PathBuf>,
    /// PCA components requested (clamped to the data rank).
    #[arg(long)]
    components: Option<usize>,
    /// Top-k feature count applied to every algorithm.
    #[arg(long)]
    k_features: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// `all` or a comma-separated list (dt, lr, rf, svm, plsda).
    #[arg(long)]
    algorithms: Option<String>,
    #[arg(long)]
    cv: Option<usize>,
    #[arg(long)]
    test_fraction: Option<f64>,
    /// JSON report path; a CSV table is written next to it.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    sample: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    sample: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Scale log10(1 + x) instead of x.
    #[arg(long)]
    log: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigInvalid(_) | Error::KTooLarge { .. } => 3,
        Error::MissingMetadataFile(_) => 4,
        Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 4,
        _ => 2,
    }
}

const SYNTH_KEYS: [&str; 12] = [
    "n",
    "rows",
    "cols",
    "separation",
    "noise_sigma",
    "baseline_drift",
    "background",
    "biomarker_amplitude",
    "infected_fraction",
    "n_common_peaks",
    "n_biomarker_peaks",
    "out",
];
const PIPELINE_KEYS: [&str; 5] = ["preprocess", "components", "standardize", "k_features", "meta"];
const EVAL_KEYS: [&str; 4] = ["algorithms", "cv", "test_fraction", "report"];

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    let mut known: Vec<&str> = vec!["seed"];
    known.extend(SYNTH_KEYS);
    known.extend(PIPELINE_KEYS);
    known.extend(EVAL_KEYS);
    known.push("algorithm");
    cfg.reject_unknown(&known, &["model."])?;
    let seed = cfg.get_or(cli.seed, "seed", 42u64)?;
    match cli.command {
        Command::Generate(a) => cmd_generate(&cfg, a, seed),
        Command::Validate(a) => cmd_validate(&cfg, &a),
        Command::Evaluate(a) => cmd_evaluate(&cfg, a, seed),
        Command::Train(a) => cmd_train(&cfg, a, seed),
        Command::Predict(a) => cmd_predict(&a),
        Command::Render(a) => cmd_render(&a),
    }
}

fn cmd_generate(cfg: &RunConfig, a: GenerateArgs, seed: u64) -> Result<u8> {
    let d = SynthConfig::default();
    let config = SynthConfig {
        n_samples: cfg.get_or(a.n, "n", d.n_samples)?,
        rows: cfg.get_or(a.rows, "rows", d.rows)?,
        cols: cfg.get_or(a.cols, "cols", d.cols)?,
        separation: cfg.get_or(a.separation, "separation", d.separation)?,
        noise_sigma: cfg.get_or(None, "noise_sigma", d.noise_sigma)?,
        baseline_drift: cfg.get_or(None, "baseline_drift", d.baseline_drift)?,
        background: cfg.get_or(None, "background", d.background)?,
        biomarker_amplitude: cfg.get_or(None, "biomarker_amplitude", d.biomarker_amplitude)?,
        infected_fraction: cfg.get_or(None, "infected_fraction", d.infected_fraction)?,
        n_common_peaks: cfg.get_or(None, "n_common_peaks", d.n_common_peaks)?,
        n_biomarker_peaks: cfg.get_or(None, "n_biomarker_peaks", d.n_biomarker_peaks)?,
        seed,
    };
    config.check()?;
    let ds = generate(&config)?;
    write_dataset(&a.out, &ds)?;
    let infected = ds.labels()?.iter().filter(|l| l.is_infected()).count();
    println!(
        "wrote {} spectra ({} infected, {}x{}) and {} to {}",
        ds.len(),
        infected,
        config.rows,
        config.cols,
        METADATA_FILE_NAME,
        a.out.display()
    );
    Ok(0)
}

fn cmd_validate(cfg: &RunConfig, a: &DataArgs) -> Result<u8> {
    let inspection = inspect_dataset(&a.data, meta_path(cfg, a)?)?;
    let mut failed = 0;
    for r in &inspection.reports {
        if r.passed() {
            println!("{} PASS", r.sample_id);
        } else {
            failed += 1;
            let names: Vec<&str> = r.failed_checks().map(|c| c.name.as_str()).collect();
            println!("{} FAIL {}", r.sample_id, names.join(","));
            for c in r.failed_checks() {
                log::info!("{}: {}: {}", r.sample_id, c.name, c.message);
            }
        }
    }
    eprintln!("{} of {} samples passed", inspection.reports.len() - failed, inspection.reports.len());
    Ok(if failed == 0 { 0 } else { 2 })
}

fn preprocess_config(cfg: &RunConfig, p: &PipelineArgs) -> Result<PreprocessConfig> {
    match cfg.pick(p.preprocess.clone(), "preprocess")? {
        None => Ok(PreprocessConfig::standard()),
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Io { path, source: e })?;
            let config: PreprocessConfig = text.parse()?;
            config.steps.iter().try_for_each(|s| s.check())?;
            Ok(config)
        }
    }
}

fn feature_config(cfg: &RunConfig, p: &PipelineArgs) -> Result<FeatureConfig> {
    let d = FeatureConfig::default();
    let config = FeatureConfig {
        standardize: cfg.get_or(None, "standardize", d.standardize)?,
        n_components: cfg.get_or(p.components, "components", d.n_components)?,
    };
    if config.n_components == 0 {
        return Err(Error::ConfigInvalid("components must be >= 1".into()));
    }
    Ok(config)
}

fn k_features(cfg: &RunConfig, p: &PipelineArgs) -> Result<Option<usize>> {
    let k = cfg.pick(p.k_features, "k_features")?;
    if k == Some(0) {
        return Err(Error::ConfigInvalid("k_features must be >= 1".into()));
    }
    Ok(k)
}

fn parse_algorithms(list: &str) -> Result<Vec<ClassifierKind>> {
    if list.trim().eq_ignore_ascii_case("all") {
        return Ok(ClassifierKind::ALL.to_vec());
    }
    let mut kinds: Vec<ClassifierKind> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if kinds.is_empty() {
        return Err(Error::ConfigInvalid("no algorithms given".into()));
    }
    kinds.sort();
    kinds.dedup();
    Ok(kinds)
}

fn meta_path(cfg: &RunConfig, a: &DataArgs) -> Result<PathBuf> {
    Ok(cfg.pick(a.meta.clone(), "meta")?.unwrap_or_else(|| a.data.join(METADATA_FILE_NAME)))
}

fn cmd_evaluate(cfg: &RunConfig, a: EvaluateArgs, seed: u64) -> Result<u8> {
    let kinds = parse_algorithms(&cfg.get_or(a.algorithms.clone(), "algorithms", "all".to_string())?)?;
    let options = EvalOptions {
        cv_folds: cfg.get_or(a.cv, "cv", 5)?,
        test_fraction: cfg.get_or(a.test_fraction, "test_fraction", 0.2)?,
    };
    if options.cv_folds < 2 {
        return Err(Error::ConfigInvalid(format!("cv must be >= 2, got {}", options.cv_folds)));
    }
    if !(options.test_fraction > 0.0 && options.test_fraction < 1.0) {
        return Err(Error::ConfigInvalid(format!("test fraction {} outside (0, 1)", options.test_fraction)));
    }
    let preprocess = preprocess_config(cfg, &a.pipeline)?;
    let features = feature_config(cfg, &a.pipeline)?;
    let k = k_features(cfg, &a.pipeline)?;
    let report_path = cfg.pick(a.report.clone(), "report")?;

    let started = Instant::now();
    let (dataset, reports) = load_dataset(&a.data.data, meta_path(cfg, &a.data)?)?;
    let rejected = reports.iter().filter(|r| !r.passed()).count();
    if rejected > 0 {
        log::warn!("{rejected} samples failed validation and were excluded");
    }
    let plans: Vec<AlgorithmPlan> = kinds.iter().map(|&kind| AlgorithmPlan::standard(kind, k)).collect();
    let report = evaluate_all(&dataset, &preprocess, &features, &plans, &options, seed)?;
    log::info!("evaluation took {:.1?}", started.elapsed());

    println!("algorithm            cv_mean  cv_std  test_acc  precision  recall  f1     roc_auc");
    for r in &report.rows {
        let t = &r.test;
        println!(
            "{:<20} {:.3}    {:.3}   {:.3}     {:.3}      {:.3}   {:.3}  {}",
            r.algorithm.as_str(),
            r.cv_mean_accuracy,
            r.cv_std,
            t.accuracy,
            t.precision,
            t.recall,
            t.f1,
            t.roc_auc.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into())
        );
    }
    if let Some(path) = report_path {
        let (json, csv) = report_paths(&path);
        write_text(&json, &report.to_json())?;
        write_text(&csv, &report.to_csv())?;
        eprintln!("report written to {} and {}", json.display(), csv.display());
    }
    Ok(0)
}

fn report_paths(path: &Path) -> (PathBuf, PathBuf) {
    if path.extension().is_some_and(|e| e == "csv") {
        (path.with_extension("json"), path.to_path_buf())
    } else {
        (path.to_path_buf(), path.with_extension("csv"))
    }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn cmd_train(cfg: &RunConfig, a: TrainArgs, seed: u64) -> Result<u8> {
    let kind: ClassifierKind = cfg
        .get_or(a.algorithm.clone(), "algorithm", "random_forest".to_string())?
        .parse()?;
    let spec = ClassifierSpec::from_pairs(kind, &cfg.prefixed("model."))?;
    let preprocess = preprocess_config(cfg, &a.pipeline)?;
    let features = feature_config(cfg, &a.pipeline)?;
    let selection = AlgorithmPlan::standard(kind, k_features(cfg, &a.pipeline)?).selection;

    let (dataset, _) = load_dataset(&a.data.data, meta_path(cfg, &a.data)?)?;
    let labels = dataset.labels()?;
    let spectra: Vec<_> = dataset.ordered_spectra().collect();
    let pipeline = TrainedPipeline::train(&spectra, &labels, &preprocess, &features, &spec, selection, seed)?;
    let bytes = write_model(&pipeline, &a.model)?;
    println!(
        "trained {} on {} samples ({} features); wrote {} bytes to {}",
        spec,
        labels.len(),
        pipeline.mask.len(),
        bytes,
        a.model.display()
    );
    Ok(0)
}

fn cmd_predict(a: &PredictArgs) -> Result<u8> {
    let pipeline = read_model(&a.model)?;
    let spectrum = read_imsx(&a.sample)?;
    let (label, score) = pipeline.predict_spectrum(&spectrum)?;
    println!("{} {} {}", spectrum.sample_id(), label, score);
    Ok(0)
}

fn cmd_render(a: &RenderArgs) -> Result<u8> {
    let spectrum = read_imsx(&a.sample)?;
    write_pgm(spectrum.intensity(), a.log, &a.out)?;
    let (rows, cols) = spectrum.shape();
    println!("{} {}x{} -> {}", spectrum.sample_id(), cols, rows, a.out.display());
    Ok(0)
}
