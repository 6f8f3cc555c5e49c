use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use smest::domain::Date;
use smest::experiments::report::{render_table, LAG_CURVE_CSV, RESULTS_MD};
use smest::experiments::{
    emit_report, generate_synthetic, read_results, run_experiment, EmbeddingMode, ExperimentKind, RunConfig,
    SynthConfig,
};
use smest::features::FeatureMatrix;
use smest::forest::{Forest, ForestParams, MaxFeatures};
use smest::ingestion::{load_dataset, DataPaths, LoadOptions};
use smest::{Error, Result};

/// Soil-moisture estimation from Sentinel-1/2 patches, ERA5 and embeddings.
#[derive(Parser)]
#[command(name = "smest", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate a dataset directory, then print a summary.
    IngestValidate {
        #[arg(long)]
        data_dir: PathBuf,
        #[arg(long, default_value_t = 32)]
        window: usize,
    },
    /// Write a synthetic dataset with a known generative model.
    SynthGen {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        stations: usize,
        /// Standard deviation of the soil-moisture noise (m³/m³).
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        /// Precipitation memory in days.
        #[arg(long, default_value_t = 6)]
        true_lag: usize,
        #[arg(long, default_value_t = 240)]
        days: usize,
        #[arg(long, default_value_t = 32)]
        patch_size: usize,
        /// scramble, zero or none.
        #[arg(long, default_value = "scramble")]
        embeddings: String,
    },
    /// Modality and temporal-matching grid.
    RunE1(RunArgs),
    /// ERA5 lookback sweep.
    RunE2(RunArgs),
    /// Embeddings versus hand-crafted features.
    RunE3(RunArgs),
    /// Print the results table of a report directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Fit a forest on a dumped feature CSV and save it.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 100)]
        trees: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// third, sqrt, all or a count.
        #[arg(long, default_value = "third")]
        max_features: String,
    },
    /// Predict soil moisture for a feature CSV with a saved forest.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    trees: Option<usize>,
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory receiving one feature CSV per grid row.
    #[arg(long)]
    dump_features: Option<PathBuf>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        match (&self.data_dir, &self.config) {
            (Some(d), _) => cfg.data_dir = d.clone(),
            (None, None) => return Err(Error::Config("--data-dir or --config is required".into())),
            (None, Some(_)) => {}
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(k) = self.folds {
            cfg.folds = k;
        }
        if let Some(t) = self.trees {
            cfg.forest.n_trees = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<()> {
    let cfg = args.resolve()?;
    let report = run_experiment(kind, &cfg, args.dump_features.as_deref())?;
    emit_report(&report, &args.out)?;
    let md = args.out.join(RESULTS_MD);
    print!("{}", std::fs::read_to_string(&md).map_err(|e| Error::io(&md, e))?);
    Ok(())
}

fn print_report(dir: &Path) -> Result<()> {
    let lines = read_results(dir)?;
    print!("{}", render_table(&lines));
    let curve = dir.join(LAG_CURVE_CSV);
    if curve.is_file() {
        println!();
        print!("{}", std::fs::read_to_string(&curve).map_err(|e| Error::io(&curve, e))?);
    }
    Ok(())
}

fn write_predictions(path: &Path, matrix: &FeatureMatrix, predictions: &[f64]) -> Result<()> {
    let mut body = String::from("station_id,date,sm_pred\n");
    for ((station, date), p) in matrix.provenance().iter().zip(predictions) {
        body.push_str(&format!("{station},{date},{p}\n"));
    }
    std::fs::write(path, body).map_err(|e| Error::io(path, e))
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::IngestValidate { data_dir, window } => {
            let opts = LoadOptions {
                window,
                ..LoadOptions::default()
            };
            let data = load_dataset(&DataPaths::in_dir(&data_dir), &opts)?;
            let s = &data.summary;
            println!("vegetated stations: {}", s.vegetated_stations);
            println!("retained stations: {}", s.retained_stations);
            println!("measurements: {}", s.measurements);
            println!("rows for unknown stations: {}", s.unknown_station_rows);
            println!("S2 patches: {}", s.s2_patches);
            println!("S1 patches: {}", s.s1_patches);
            println!("ERA5 records: {}", s.era5_records);
            println!("embedding records: {}", s.embedding_records);
            Ok(())
        }
        Command::SynthGen {
            out,
            seed,
            stations,
            noise,
            true_lag,
            days,
            patch_size,
            embeddings,
        } => {
            let cfg = SynthConfig {
                stations,
                seed,
                noise,
                true_lag,
                days,
                patch_size,
                embeddings: EmbeddingMode::parse(&embeddings)?,
                start: Date::from_ymd(2019, 1, 1)?,
                ..SynthConfig::default()
            };
            generate_synthetic(&cfg, &out)
        }
        Command::RunE1(a) => run(ExperimentKind::E1, &a),
        Command::RunE2(a) => run(ExperimentKind::E2, &a),
        Command::RunE3(a) => run(ExperimentKind::E3, &a),
        Command::Report { input } => print_report(&input),
        Command::Train {
            features,
            model,
            trees,
            seed,
            max_features,
        } => {
            let (matrix, targets) = FeatureMatrix::read_csv(&features)?;
            let params = ForestParams {
                n_trees: trees,
                seed,
                max_features: MaxFeatures::parse(&max_features)?,
                ..ForestParams::default()
            };
            Forest::fit(&matrix, &targets, &params)?.save(&model)
        }
        Command::Predict { model, features, out } => {
            let forest = Forest::load(&model)?;
            let (matrix, _) = FeatureMatrix::read_csv(&features)?;
            let predictions = forest.predict(&matrix)?;
            write_predictions(&out, &matrix, &predictions)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
