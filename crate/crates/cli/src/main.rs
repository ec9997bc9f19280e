use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use djcm::entanglement::{concurrence, steady_pair_local, steady_pair_nonlocal};
use djcm::scenario::{
    evolve, format_sig, validate_scenario, OutputFormat, Preset, ScenarioConfig, ValidationReport,
};
use djcm::{DjcmError, JcmParams, ReductionTarget, STEADY_THRESHOLD_R};

#[derive(Parser)]
#[command(
    name = "djcm",
    version,
    about = "Entanglement dynamics of two atom-cavity pairs in non-Markovian reservoirs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Concurrence trajectories of all six pairs from the closed-form solution.
    Evolve(EvolveArgs),
    /// Regenerate the data behind one of the figure presets.
    Figure {
        /// Preset name (fig2a, fig2b, fig2c, fig3a, fig3b, fig3c, fig4, fig5).
        name: String,
        /// Write one CSV per trajectory into this directory instead of stdout.
        #[arg(long)]
        outdir: Option<PathBuf>,
    },
    /// Compare the closed-form solution against the numerical oracles.
    Validate {
        /// Preset to validate; all single-trajectory presets when omitted.
        #[arg(long)]
        preset: Option<String>,
        /// Scenario file to validate instead of a preset.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
    },
    /// Long-time reduced state of a pair and its concurrence.
    Steady {
        #[arg(long)]
        r: f64,
        #[arg(long, value_enum)]
        which: Which,
    },
}

#[derive(Parser)]
struct EvolveArgs {
    /// Atom-cavity coupling Ω in units of γ0.
    #[arg(long)]
    omega: Option<f64>,
    /// Reservoir spectral width λ in units of γ0.
    #[arg(long)]
    lambda: Option<f64>,
    /// Bare transition frequency ω0 in units of γ0.
    #[arg(long)]
    omega0: Option<f64>,
    /// Purity of the initial Werner state of the cavities.
    #[arg(long)]
    r: Option<f64>,
    /// Final time γ0 t.
    #[arg(long)]
    tmax: Option<f64>,
    /// Number of grid points including both ends.
    #[arg(long)]
    samples: Option<usize>,
    /// Comma-separated subset of AB,ab,Aa,Bb,Ab,aB.
    #[arg(long, value_delimiter = ',')]
    targets: Option<Vec<String>>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON scenario file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a gnuplot script for the output file instead of computing data.
    #[arg(long)]
    gnuplot_snippet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Local,
    Nonlocal,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

/// Failure carrying its exit status.
enum Failure {
    BadInput(anyhow::Error),
    Validation(String),
    Runtime(anyhow::Error),
}

impl From<DjcmError> for Failure {
    fn from(e: DjcmError) -> Self {
        match e {
            DjcmError::InvalidParams(_)
            | DjcmError::PurityOutOfRange(_)
            | DjcmError::NegativeTime(_) => Failure::BadInput(e.into()),
            other => Failure::Runtime(other.into()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn bad(e: impl Into<anyhow::Error>) -> Failure {
    Failure::BadInput(e.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Figure { name, outdir } => cmd_figure(&name, outdir.as_deref()),
        Command::Validate { preset, config } => cmd_validate(preset.as_deref(), config.as_deref()),
        Command::Steady { r, which } => cmd_steady(r, which),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::BadInput(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn read_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(bad)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(bad)
}

fn build_config(args: &EvolveArgs) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => read_config(path)?,
        None => {
            let need = |name: &str, v: Option<f64>| {
                v.ok_or_else(|| bad(anyhow!("--{name} is required without --config")))
            };
            let p = JcmParams::scaled(need("omega", args.omega)?, need("lambda", args.lambda)?)?;
            ScenarioConfig {
                params_a: p,
                params_b: p,
                r: need("r", args.r)?,
                t_max: need("tmax", args.tmax)?,
                samples: args
                    .samples
                    .ok_or_else(|| bad(anyhow!("--samples is required without --config")))?,
                targets: ReductionTarget::ALL.to_vec(),
                format: OutputFormat::Csv,
            }
        }
    };
    for p in [&mut cfg.params_a, &mut cfg.params_b] {
        if let Some(x) = args.omega {
            p.omega = x * p.gamma0;
        }
        if let Some(x) = args.lambda {
            p.lambda = x * p.gamma0;
        }
        if let Some(x) = args.omega0 {
            p.omega0 = x * p.gamma0;
        }
    }
    if let Some(r) = args.r {
        cfg.r = r;
    }
    if let Some(t) = args.tmax {
        cfg.t_max = t;
    }
    if let Some(n) = args.samples {
        cfg.samples = n;
    }
    if let Some(names) = &args.targets {
        cfg.targets = names
            .iter()
            .map(|s| s.trim().parse())
            .collect::<Result<_, DjcmError>>()?;
    }
    if let Some(f) = args.format {
        cfg.format = f.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p)
                .with_context(|| format!("creating {}", p.display()))
                .map_err(Failure::Runtime)?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_table(cfg: &ScenarioConfig, out: &mut dyn Write) -> Result<(), Failure> {
    let table = evolve(cfg)?;
    match cfg.format {
        OutputFormat::Csv => table.write_csv(&mut *out)?,
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &table)
                .map_err(|e| Failure::Runtime(e.into()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn gnuplot_snippet(cfg: &ScenarioConfig, data: &str) -> String {
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set xlabel 'gamma0 t'\n");
    s.push_str("set ylabel 'concurrence'\n");
    s.push_str(&format!("set xrange [0:{}]\n", format_sig(cfg.t_max, 12)));
    s.push_str("set yrange [0:1]\n");
    let plots: Vec<String> = (0..cfg.targets.len())
        .map(|j| format!("'{data}' using 1:{} with lines", j + 2))
        .collect();
    s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    s
}

fn cmd_evolve(args: EvolveArgs) -> Result<(), Failure> {
    let cfg = build_config(&args)?;
    if args.gnuplot_snippet {
        let data = args
            .out
            .as_deref()
            .map(|p| p.display().to_string())
            .unwrap_or_else(|| "djcm.csv".into());
        print!("{}", gnuplot_snippet(&cfg, &data));
        return Ok(());
    }
    let mut out = open_output(args.out.as_deref())?;
    write_table(&cfg, &mut *out)
}

fn sweep_file_name(preset: Preset, r: f64) -> String {
    format!("{}_r{}.csv", preset.name(), format_sig(r, 6))
}

fn cmd_figure(name: &str, outdir: Option<&Path>) -> Result<(), Failure> {
    let preset: Preset = name.parse()?;
    let base = preset.config();
    let runs: Vec<ScenarioConfig> = preset.purities().iter().map(|&r| base.with_r(r)).collect();

    if let Some(dir) = outdir {
        fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(Failure::Runtime)?;
        let results: Vec<Result<(), Failure>> = std::thread::scope(|scope| {
            let handles: Vec<_> = runs
                .iter()
                .map(|cfg| {
                    let file = if preset.is_sweep() {
                        dir.join(sweep_file_name(preset, cfg.r))
                    } else {
                        dir.join(format!("{}.csv", preset.name()))
                    };
                    scope.spawn(move || {
                        let mut out = open_output(Some(&file))?;
                        write_table(cfg, &mut *out)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker thread panicked"))
                .collect()
        });
        return results.into_iter().collect();
    }

    let mut out = open_output(None)?;
    if !preset.is_sweep() {
        return write_table(&runs[0], &mut *out);
    }
    let tables: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = runs
            .iter()
            .map(|cfg| scope.spawn(move || evolve(cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    let mut header_done = false;
    for (cfg, table) in runs.iter().zip(tables) {
        let table = table?;
        if !header_done {
            writeln!(out, "r,{}", table.header().join(","))?;
            header_done = true;
        }
        let r = format_sig(cfg.r, 12);
        for (t, row) in table.times.iter().zip(&table.rows) {
            let values: Vec<String> = row.iter().map(|v| format_sig(*v, 12)).collect();
            writeln!(out, "{r},{},{}", format_sig(*t, 12), values.join(","))?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct NamedReport<'a> {
    name: &'a str,
    #[serde(flatten)]
    report: ValidationReport,
}

fn cmd_validate(preset: Option<&str>, config: Option<&Path>) -> Result<(), Failure> {
    let jobs: Vec<(String, ScenarioConfig)> = match (preset, config) {
        (Some(name), _) => {
            let p: Preset = name.parse()?;
            vec![(p.name().to_string(), p.config())]
        }
        (None, Some(path)) => {
            let cfg = read_config(path)?;
            cfg.validate()?;
            vec![(path.display().to_string(), cfg)]
        }
        (None, None) => Preset::ALL
            .iter()
            .filter(|p| !p.is_sweep())
            .map(|p| (p.name().to_string(), p.config()))
            .collect(),
    };
    let reports: Vec<Result<ValidationReport, DjcmError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|(_, cfg)| scope.spawn(move || validate_scenario(cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker thread panicked"))
            .collect()
    });
    let mut named = Vec::with_capacity(jobs.len());
    for ((name, _), report) in jobs.iter().zip(reports) {
        named.push(NamedReport {
            name,
            report: report?,
        });
    }
    let failed: Vec<&str> = named
        .iter()
        .filter(|n| !n.report.pass)
        .map(|n| n.name)
        .collect();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if named.len() == 1 {
        serde_json::to_writer_pretty(&mut out, &named[0])
            .map_err(|e| Failure::Runtime(e.into()))?;
    } else {
        serde_json::to_writer_pretty(&mut out, &named).map_err(|e| Failure::Runtime(e.into()))?;
    }
    writeln!(out)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Validation(failed.join(", ")))
    }
}

#[derive(Serialize)]
struct SteadyReport {
    which: &'static str,
    r: f64,
    labels: [&'static str; 4],
    matrix: Vec<Vec<f64>>,
    concurrence: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold_r: Option<f64>,
}

fn cmd_steady(r: f64, which: Which) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&r) {
        return Err(DjcmError::PurityOutOfRange(r).into());
    }
    let (name, pair, threshold) = match which {
        Which::Local => ("local", steady_pair_local(), None),
        Which::Nonlocal => (
            "nonlocal",
            steady_pair_nonlocal(r)?,
            Some(STEADY_THRESHOLD_R),
        ),
    };
    let m = pair.matrix();
    let report = SteadyReport {
        which: name,
        r,
        labels: ["11", "10", "01", "00"],
        matrix: (0..4)
            .map(|i| (0..4).map(|j| m[(i, j)].re).collect())
            .collect(),
        concurrence: concurrence(&pair)?,
        threshold_r: threshold,
    };
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, &report).map_err(|e| Failure::Runtime(e.into()))?;
    writeln!(out)?;
    Ok(())
}
