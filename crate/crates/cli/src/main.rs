use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mmwave_mc::experiments::{
    run_campaign, DesignPoint, Experiment, METRIC_AVAILABLE, METRIC_DETACH, METRIC_DISTANCE,
};
use mmwave_mc::initial_access::{delay_table, format_ms, DelayRow};
use mmwave_mc::SimConfig64;

#[derive(Parser)]
#[command(
    name = "mmwave-mc",
    version,
    about = "Uplink multi-connectivity simulator for mmWave networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Initial-access scan counts and delays per beamforming architecture.
    IaDelay {
        /// Period between synchronization signals / preambles, seconds.
        #[arg(long, default_value_t = 200e-6)]
        t_per: f64,
        #[arg(long, default_value_t = 16)]
        n_bs: usize,
        #[arg(long, default_value_t = 8)]
        n_ue: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo campaign over the SCell density grid.
    SweepDensity {
        /// TOML config; defaults are used for missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides `n_trials`.
        #[arg(long)]
        trials: Option<usize>,
        /// Worker threads (default: all cores). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Curve file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Additional JSON copy of the curves.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Format of `--output` / stdout.
        #[arg(long, value_enum, default_value_t = CurveFormat::Csv)]
        format: CurveFormat,
    },
    /// One trial as a JSON trace: deployment, report tables, CRT, decision
    /// and control messages.
    SingleTrial {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0)]
        trial_index: u64,
        /// SCell density; the first grid value when omitted.
        #[arg(long)]
        lambda: Option<f64>,
        /// Signal duration in seconds; `t_sig_s` when omitted.
        #[arg(long)]
        t_sig: Option<f64>,
        /// Include the sampled links and the tables after every sweep.
        #[arg(long)]
        trace: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveFormat {
    Csv,
    Json,
}

type CliResult<T> = Result<T, String>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::IaDelay {
            t_per,
            n_bs,
            n_ue,
            format,
            output,
        } => {
            let rows = delay_table(n_bs, n_ue, t_per).map_err(|e| e.to_string())?;
            let text = match format {
                Format::Text => delay_text(&rows),
                Format::Csv => delay_csv(&rows),
                Format::Json => {
                    serde_json::to_string_pretty(&rows).map_err(|e| e.to_string())? + "\n"
                }
            };
            emit(output.as_deref(), &text)
        }
        Command::SweepDensity {
            config,
            seed,
            trials,
            threads,
            output,
            json,
            format,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(n) = trials {
                cfg.n_trials = n;
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| e.to_string())?;
            let result = pool
                .install(|| run_campaign(&cfg))
                .map_err(|e| e.to_string())?;

            let body = match format {
                CurveFormat::Csv => result.to_csv(),
                CurveFormat::Json => result.to_json() + "\n",
            };
            emit(output.as_deref(), &body)?;
            if let Some(path) = json {
                write_file(&path, &(result.to_json() + "\n"))?;
            }
            if output.is_some() {
                print!("{}", campaign_summary(&result));
            }
            Ok(())
        }
        Command::SingleTrial {
            config,
            seed,
            trial_index,
            lambda,
            t_sig,
            trace,
            output,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let experiment = Experiment::new(cfg).map_err(|e| e.to_string())?;
            let default = experiment.default_point();
            let point = DesignPoint {
                lambda_bs: lambda.unwrap_or(default.lambda_bs),
                t_sig_s: t_sig.unwrap_or(default.t_sig_s),
            };
            let result = experiment
                .trace_trial(point, trial_index, trace)
                .map_err(|e| e.to_string())?;
            let body = serde_json::to_string_pretty(&result).map_err(|e| e.to_string())? + "\n";
            emit(output.as_deref(), &body)
        }
    }
}

fn load_config(path: Option<&Path>) -> CliResult<SimConfig64> {
    match path {
        None => Ok(SimConfig64::default()),
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
            SimConfig64::from_toml_str(&text).map_err(|e| format!("{}: {e}", p.display()))
        }
    }
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn emit(path: Option<&Path>, body: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn arch_label(row: &DelayRow<f64>) -> (String, String) {
    let name = |a| format!("{a:?}");
    (name(row.architectures.scell), name(row.architectures.ue))
}

fn delay_text(rows: &[DelayRow<f64>]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<8} {:<8} {:>22} {:>22}",
        "SCell", "UE", "DL-based", "UL-based"
    );
    for row in rows {
        let (bs, ue) = arch_label(row);
        let cell = |c: &mmwave_mc::initial_access::DelayCell<f64>| {
            format!("{} ({} ms)", c.scans, format_ms(c.delay_s))
        };
        let _ = writeln!(
            out,
            "{bs:<8} {ue:<8} {:>22} {:>22}",
            cell(&row.downlink),
            cell(&row.uplink)
        );
    }
    out
}

fn delay_csv(rows: &[DelayRow<f64>]) -> String {
    let mut out = String::from("scell_bf,ue_bf,design,simultaneous_directions,scans,delay_ms\n");
    for row in rows {
        let (bs, ue) = arch_label(row);
        for c in [&row.downlink, &row.uplink] {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                bs.to_lowercase(),
                ue.to_lowercase(),
                c.design.label(),
                c.simultaneous_directions,
                c.scans,
                format_ms(c.delay_s)
            );
        }
    }
    out
}

fn campaign_summary(result: &mmwave_mc::CampaignResult64) -> String {
    let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
    let mut out = format!(
        "seed {}, {} trials per point\n",
        result.seed, result.n_trials
    );
    let _ = writeln!(
        out,
        "{:>8} {:>12} {:>10} {:>10}",
        "lambda", "distance_m", "detach", "available"
    );
    let distance = result.curve(METRIC_DISTANCE);
    let detach = result.curve(METRIC_DETACH);
    let available = result.curve(METRIC_AVAILABLE);
    for ((r, d), a) in distance.iter().zip(&detach).zip(&available) {
        let _ = writeln!(
            out,
            "{:>8} {:>12} {:>10} {:>10}",
            r.lambda_bs,
            fmt(r.mean),
            fmt(d.mean),
            fmt(a.mean)
        );
    }
    out
}
