//! `vowelmark` command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 consistency failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vowelmark::audio::{read_manifest, segment_recordings, Vowel};
use vowelmark::config::CONFIG_ENV;
use vowelmark::functionals::{read_matrix, write_matrix};
use vowelmark::pipeline::extract_batch;
use vowelmark::report::{boxplot_entries, checktables_text, compare, write_compare};
use vowelmark::stats::{only_known_anomaly, published_rows, table_consistency_check, GroupingSpec, Method, DEFAULT_TOLERANCE};
use vowelmark::synth::{write_recordings, SynthRequest};
use vowelmark::{Config, Error, Execution};

#[derive(Parser)]
#[command(name = "vowelmark", version, about = "Acoustic feature screening of sustained vowels")]
struct Cli {
    /// Worker threads for extraction and synthesis (default: logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the 88-feature matrix for every manifest row.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank features by group separation and write tables and boxplot data.
    Compare {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Effect-size cutoff for the tables.
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, value_parser = ["approx", "exact"])]
        method: Option<String>,
        /// Comma-separated grouping labels (a,e,i,o,u,ie,uo,all).
        #[arg(long, value_delimiter = ',')]
        groupings: Vec<String>,
    },
    /// Recompute r from p and N for every bundled published row.
    Checktables {
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Synthesize a recording or a labeled cohort as WAV files plus manifest.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print boxplot statistics of one feature on one vowel as JSON.
    Boxplot {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        feature: String,
        #[arg(long)]
        vowel: String,
    },
}

enum Failure {
    Usage(String),
    Data(String),
    Consistency(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Consistency(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Consistency(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Usage(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn load_config() -> Result<Config, Failure> {
    match std::env::var_os(CONFIG_ENV) {
        Some(path) => Config::load(Path::new(&path)).map_err(|e| Failure::Usage(format!("{CONFIG_ENV}: {e}"))),
        None => Ok(Config::default()),
    }
}

fn setup_pool(jobs: Option<usize>) -> Result<Execution, Failure> {
    match jobs {
        Some(0) => Err(Failure::Usage("--jobs must be at least 1".into())),
        Some(1) => Ok(Execution::Sequential),
        Some(n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| Failure::Usage(format!("--jobs {n}: {e}")))?;
            #[cfg(not(feature = "parallel"))]
            let _ = n;
            Ok(Execution::Parallel)
        }
        None => Ok(Execution::Parallel),
    }
}

fn read_features(path: &Path) -> Result<vowelmark::functionals::FeatureMatrix, Failure> {
    let file = fs::File::open(path).map_err(|e| Failure::Data(format!("cannot read {}: {e}", path.display())))?;
    Ok(read_matrix(file)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let exec = setup_pool(cli.jobs)?;
    let mut cfg = load_config()?;
    match cli.command {
        Command::Extract { manifest, out } => {
            let entries = read_manifest(&manifest)?;
            let recordings = segment_recordings(&entries, exec)?;
            let matrix = extract_batch(&recordings, &cfg, exec)?;
            fs::create_dir_all(&out).map_err(Error::from)?;
            let path = out.join("features.csv");
            write_matrix(fs::File::create(&path).map_err(Error::from)?, &matrix)?;
            println!("{} recordings -> {}", matrix.rows.len(), path.display());
        }
        Command::Compare {
            features,
            out,
            threshold,
            method,
            groupings,
        } => {
            if let Some(t) = threshold {
                if !(0.0..=1.0).contains(&t) {
                    return Err(Failure::Usage(format!("--threshold {t} outside [0, 1]")));
                }
                cfg.threshold = t;
            }
            if let Some(m) = method {
                cfg.stats_method = m.parse::<Method>()?;
            }
            let specs = if groupings.is_empty() {
                GroupingSpec::canonical()
            } else {
                groupings
                    .iter()
                    .map(|l| GroupingSpec::by_label(l).ok_or_else(|| Failure::Usage(format!("unknown grouping {l:?}"))))
                    .collect::<Result<Vec<_>, _>>()?
            };
            let matrix = read_features(&features)?;
            let result = compare(&matrix, &specs, &cfg, exec)?;
            write_compare(&out, &result)?;
            for g in &result.results {
                let kept: Vec<String> = g.above(result.threshold).take(3).map(|f| format!("{} ({:.2})", f.name, f.r)).collect();
                println!(
                    "{:>4}: {} features with r > {}{}{}",
                    g.grouping.label,
                    g.above(result.threshold).count(),
                    result.threshold,
                    if kept.is_empty() { "" } else { "; top: " },
                    kept.join(", ")
                );
            }
        }
        Command::Checktables { tolerance } => {
            if !(tolerance >= 0.0) {
                return Err(Failure::Usage(format!("--tolerance {tolerance} must be non-negative")));
            }
            let verdicts = table_consistency_check(&published_rows(), tolerance);
            print!("{}", checktables_text(&verdicts, tolerance));
            if !only_known_anomaly(&verdicts) {
                return Err(Failure::Consistency("rows beyond the known anomaly are inconsistent".into()));
            }
        }
        Command::Synth { spec, out, seed } => {
            let text = fs::read_to_string(&spec).map_err(|e| Failure::Data(format!("cannot read {}: {e}", spec.display())))?;
            let request = SynthRequest::from_json(&text)?;
            let recordings = request.run(seed, exec)?;
            let manifest = write_recordings(&out, &recordings)?;
            println!("{} recordings -> {}", recordings.len(), manifest.display());
        }
        Command::Boxplot { features, feature, vowel } => {
            let vowel: Vowel = vowel.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let matrix = read_features(&features)?;
            let column = matrix
                .column_index(&feature)
                .ok_or_else(|| Failure::Usage(format!("no feature named {feature:?}")))?;
            let entries = boxplot_entries(&matrix, column, vowel);
            let json = serde_json::to_string_pretty(&entries).map_err(Error::from)?;
            println!("{json}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
