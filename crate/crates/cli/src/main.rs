//! Command-line entry point for the breathms pipeline: synthetic-cohort
//! generation, ingestion checks, preprocessing exports, dataset augmentation,
//! cross-validated evaluation and single-file prediction.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use breathms_core::augment::{build_training_matrix, test_time_aggregate};
use breathms_core::config::RunConfig;
use breathms_core::dataset::save_dataset;
use breathms_core::eval::{cross_validate, predict_aggregated, train_full, TrainedPipeline};
use breathms_core::ingest::{
    load_cohort, parse_acquisition_file, read_manifest, Cohort, Label, PatientRecord,
};
use breathms_core::preprocess::process_cohort;
use breathms_core::synth::{generate_cohort, SynthSpec};

#[derive(Parser)]
#[command(name = "breathms", version, about = "Breath mass-spectrometry classification pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic cohort with a ground-truth sidecar.
    GenSynth(GenSynthArgs),
    /// Validate a cohort manifest and report label counts.
    Ingest(IngestArgs),
    /// Preprocess a cohort and export spectra, TIC curves and the discard log.
    Preprocess(PipelineArgs),
    /// Build and save a training matrix (averaged or augmented).
    Augment(AugmentArgs),
    /// Run grouped cross-validation and write the evaluation report.
    Evaluate(EvaluateArgs),
    /// Apply a trained model to an acquisition file.
    Predict(PredictArgs),
}

#[derive(Args)]
struct GenSynthArgs {
    /// Output directory for manifest.json, truth.json and acquisition files.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    patients: usize,
    #[arg(long, default_value_t = 0.3)]
    positive_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.08)]
    noise: f64,
    #[arg(long, default_value_t = 0.15)]
    baseline: f64,
    #[arg(long, default_value_t = 0.3)]
    mz_jitter: f64,
    #[arg(long, default_value_t = 0.25)]
    sample_step: f64,
    #[arg(long, default_value_t = 0.2)]
    peak_variation: f64,
    #[arg(long, default_value_t = 10)]
    acq_min: usize,
    #[arg(long, default_value_t = 20)]
    acq_max: usize,
    #[arg(long, default_value_t = 1)]
    ramp_min: usize,
    #[arg(long, default_value_t = 3)]
    ramp_max: usize,
    #[arg(long, default_value_t = 0.0)]
    outlier_rate: f64,
    #[arg(long, default_value_t = 0.0)]
    no_plateau_rate: f64,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    manifest: PathBuf,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline overrides, e.g. --set scaler=standard --set folds=5.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Global seed shorthand (same as --set seed=N).
    #[arg(long)]
    seed: Option<u64>,
    /// Skip the Savitzky-Golay and threshold stages.
    #[arg(long)]
    no_filter: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = RunConfig::default();
        if let Some(path) = &self.config {
            config.apply_file(path).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        for pair in &self.set {
            let (key, value) = pair
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("--set '{pair}' is not key=value")))?;
            config
                .apply_kv(key.trim(), value.trim())
                .map_err(|e| CliError::Usage(e.to_string()))?;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if self.no_filter {
            config.filter.filter_enabled = false;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output dataset file (versioned JSON container).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory for report.json and report.txt.
    #[arg(long)]
    out: PathBuf,
    /// Additionally fit the configured models on the full cohort and save
    /// the frozen pipeline for `predict`.
    #[arg(long)]
    save_model: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct PredictArgs {
    /// Trained model file from `evaluate --save-model`.
    #[arg(long)]
    model: PathBuf,
    /// Acquisition CSV to classify.
    #[arg(long)]
    input: PathBuf,
    /// Optional output CSV (defaults to stdout only).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Usage and input-validation problems exit 2; pipeline failures exit 1.
enum CliError {
    Usage(String),
    Pipeline(String),
}

impl CliError {
    fn pipeline(e: impl std::fmt::Display) -> Self {
        Self::Pipeline(e.to_string())
    }

    fn usage(e: impl std::fmt::Display) -> Self {
        Self::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenSynth(args) => cmd_gen_synth(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Preprocess(args) => cmd_preprocess(args),
        Command::Augment(args) => cmd_augment(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Predict(args) => cmd_predict(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Pipeline(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn cmd_gen_synth(args: GenSynthArgs) -> Result<(), CliError> {
    let spec = SynthSpec {
        seed: args.seed,
        n_patients: args.patients,
        positive_fraction: args.positive_fraction,
        acq_min: args.acq_min,
        acq_max: args.acq_max,
        ramp_min: args.ramp_min,
        ramp_max: args.ramp_max,
        noise: args.noise,
        baseline_amp: args.baseline,
        mz_jitter: args.mz_jitter,
        sample_step: args.sample_step,
        peak_variation: args.peak_variation,
        outlier_rate: args.outlier_rate,
        no_plateau_rate: args.no_plateau_rate,
    };
    let cohort = generate_cohort(&spec).map_err(CliError::usage)?;
    cohort.write_to_dir(&args.out).map_err(CliError::pipeline)?;
    let (pos, neg) = cohort.cohort.label_counts();
    println!(
        "wrote {} patients ({pos} positive, {neg} negative) to {}",
        cohort.cohort.patients.len(),
        args.out.display()
    );
    Ok(())
}

fn load_validated_cohort(manifest_path: &Path) -> Result<Cohort, CliError> {
    let manifest = read_manifest(manifest_path).map_err(CliError::usage)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    load_cohort(&manifest, base).map_err(CliError::usage)
}

fn cmd_ingest(args: IngestArgs) -> Result<(), CliError> {
    let cohort = load_validated_cohort(&args.manifest)?;
    let (pos, neg) = cohort.label_counts();
    let acquisitions: usize = cohort
        .patients
        .iter()
        .map(|p| p.acquisitions.iter().map(Vec::len).sum::<usize>())
        .sum();
    println!(
        "{} patients: {pos} positive, {neg} negative; {acquisitions} acquisitions",
        cohort.patients.len()
    );
    Ok(())
}

fn cmd_preprocess(args: PipelineArgs) -> Result<(), CliError> {
    let config = args.config.resolve()?;
    let cohort = load_validated_cohort(&args.manifest)?;
    if cohort.patients.is_empty() {
        return Err(CliError::Usage("manifest lists no patients".into()));
    }
    let processing =
        process_cohort(&cohort, &config.filter, config.scope).map_err(CliError::pipeline)?;
    std::fs::create_dir_all(&args.out).map_err(CliError::pipeline)?;

    // processed spectra in the delimited acquisition format
    let mut spectra = String::from("patient_id,range,acq_index,mz,intensity\n");
    let range_label = config.scope.spectrum_range().label();
    for patient in &processing.patients {
        let vector =
            test_time_aggregate(patient, config.scope).map_err(CliError::pipeline)?;
        let lo = config.scope.spectrum_range().lo();
        for (i, v) in vector.iter().enumerate() {
            let _ = writeln!(
                spectra,
                "{},{},0,{},{}",
                patient.patient_id,
                range_label,
                lo + i as u32,
                v
            );
        }
    }
    std::fs::write(args.out.join("spectra.csv"), spectra).map_err(CliError::pipeline)?;

    // per-acquisition TIC series for external plotting
    let mut tic = String::from("patient_id,range,acq_index,tic\n");
    for patient in &processing.patients {
        for range in breathms_core::ingest::MassRangeId::ALL {
            if let Some(pr) = patient.range(range) {
                for (i, v) in pr.tic.values.iter().enumerate() {
                    let _ = writeln!(tic, "{},{},{},{}", patient.patient_id, range, i, v);
                }
            }
        }
    }
    std::fs::write(args.out.join("tic.csv"), tic).map_err(CliError::pipeline)?;

    let mut discards = String::from("patient_id,reason\n");
    for d in &processing.discarded {
        let _ = writeln!(discards, "{},{}", d.patient_id, d.reason.label());
    }
    std::fs::write(args.out.join("discards.csv"), discards).map_err(CliError::pipeline)?;

    println!(
        "retained {} patients, discarded {}; outputs in {}",
        processing.patients.len(),
        processing.discarded.len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_augment(args: AugmentArgs) -> Result<(), CliError> {
    let config = args.config.resolve()?;
    let cohort = load_validated_cohort(&args.manifest)?;
    if cohort.patients.is_empty() {
        return Err(CliError::Usage("manifest lists no patients".into()));
    }
    let processing =
        process_cohort(&cohort, &config.filter, config.scope).map_err(CliError::pipeline)?;
    let matrix =
        build_training_matrix(&processing.patients, config.scope, config.mode, config.augment_cap)
            .map_err(CliError::pipeline)?;
    save_dataset(&matrix, &args.out).map_err(CliError::pipeline)?;
    println!("wrote {} rows x {} features to {}", matrix.n_rows(), matrix.n_features(), args.out.display());
    Ok(())
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), CliError> {
    let config = args.config.resolve()?;
    let cohort = load_validated_cohort(&args.manifest)?;
    if cohort.patients.is_empty() {
        return Err(CliError::Usage("manifest lists no patients".into()));
    }
    let processing =
        process_cohort(&cohort, &config.filter, config.scope).map_err(CliError::pipeline)?;
    let report = cross_validate(&processing, &config).map_err(CliError::pipeline)?;

    std::fs::create_dir_all(&args.out).map_err(CliError::pipeline)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(CliError::pipeline)?;
    std::fs::write(args.out.join("report.json"), json).map_err(CliError::pipeline)?;
    let table = report.render_table();
    std::fs::write(args.out.join("report.txt"), &table).map_err(CliError::pipeline)?;
    print!("{table}");

    if let Some(model_path) = &args.save_model {
        let trained = train_full(&processing, &config).map_err(CliError::pipeline)?;
        let json = serde_json::to_string(&trained).map_err(CliError::pipeline)?;
        std::fs::write(model_path, json).map_err(CliError::pipeline)?;
        println!("saved model to {}", model_path.display());
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| CliError::Usage(format!("cannot read model {}: {e}", args.model.display())))?;
    let trained: TrainedPipeline =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad model file: {e}")))?;

    let acqs = parse_acquisition_file(&args.input).map_err(CliError::usage)?;
    if acqs.is_empty() {
        return Err(CliError::Usage("input file holds no acquisitions".into()));
    }
    // group by patient, preserving file order of first appearance
    let mut patients: Vec<String> = Vec::new();
    let mut grouped: BTreeMap<String, Vec<breathms_core::ingest::RawAcquisition>> = BTreeMap::new();
    for acq in acqs {
        if !grouped.contains_key(&acq.patient_id) {
            patients.push(acq.patient_id.clone());
        }
        grouped.entry(acq.patient_id.clone()).or_default().push(acq);
    }

    let mut out = String::from("patient_id,label,p_pos\n");
    for id in &patients {
        // the frozen preprocessing chain runs per patient; labels are unknown
        // and the placeholder is never used
        let mut record = PatientRecord::new(id.clone(), Label::Negative);
        for acq in grouped.remove(id).unwrap() {
            record.acquisitions[acq.range.index()].push(acq);
        }
        let single = Cohort { patients: vec![record] };
        let processing = process_cohort(&single, &trained.config.filter, trained.config.scope)
            .map_err(CliError::pipeline)?;
        match processing.patients.first() {
            Some(patient) => {
                let vector = test_time_aggregate(patient, trained.config.scope)
                    .map_err(CliError::pipeline)?;
                let (label, p_pos) =
                    predict_aggregated(&trained, &vector).map_err(CliError::pipeline)?;
                let _ = writeln!(out, "{id},{label},{p_pos}");
            }
            None => {
                let reason = processing
                    .discarded
                    .first()
                    .map(|d| d.reason.label())
                    .unwrap_or("unknown");
                let _ = writeln!(out, "{id},{reason},");
            }
        }
    }
    print!("{out}");
    if let Some(path) = &args.out {
        std::fs::write(path, &out).map_err(CliError::pipeline)?;
    }
    Ok(())
}
