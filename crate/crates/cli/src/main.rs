//! `noma`: sweeps, density dumps, reproductions and self-validation.
//!
//! Exit codes: 0 success, 1 runtime error, 2 configuration error,
//! 3 a gated check failed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use noma_core::config::{Resolved, Settings};
use noma_core::montecarlo::{histogram_distance, simulate_bpsk_branch_stats, HistVariable};
use noma_core::postsic_bpsk::{CurveBranch, PdfCurve, DEFAULT_CURVE_POINTS};
use noma_core::reproduce::{reproduce, ReproduceOptions, Target};
use noma_core::scenario::ConstellationPoint;
use noma_core::sweep::{run_sweep, Metric, RunManifest, SweepSpec};
use noma_core::validate::{run_validation, Level};
use noma_core::{Error, Execution, Result};

const MASS_TOLERANCE: f64 = 1e-4;

#[derive(Parser)]
#[command(name = "noma", version, about = "Exact post-SIC analysis of two-user downlink NOMA over Rayleigh fading")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outage probability sweep: exact, legacy and optional simulation columns.
    OpSweep(SweepArgs),
    /// Ergodic capacity sweep: exact, closed-form approximation, legacy and
    /// optional simulation columns.
    EcSweep(SweepArgs),
    /// Conditional and unconditional densities of the fading gain and noise.
    PdfDump(PdfArgs),
    /// Recompute a published table or figure and check it.
    Reproduce(ReproduceArgs),
    /// Run the built-in identity, quadrature and simulation checks.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ExecArg {
    Sequential,
    Parallel,
}

impl From<ExecArg> for Execution {
    fn from(e: ExecArg) -> Self {
        match e {
            ExecArg::Sequential => Execution::Sequential,
            ExecArg::Parallel => Execution::Parallel,
        }
    }
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Csv,
    Table,
}

/// Settings shared by every command. Flags override the `--config` file,
/// which overrides the built-in defaults.
#[derive(Args)]
struct Common {
    #[arg(long)]
    alpha1: Option<f64>,
    #[arg(long)]
    snr_db: Option<f64>,
    /// Target rate in bit/s/Hz.
    #[arg(long)]
    rate: Option<f64>,
    /// Residual-interference factor of the legacy model.
    #[arg(long)]
    zeta: Option<f64>,
    /// Mean fading power.
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    execution: Option<ExecArg>,
    /// Flat TOML file with any of the flag names (underscored) as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the resolved settings as TOML and exit.
    #[arg(long)]
    print_config: bool,
}

impl Common {
    fn settings(&self) -> Settings {
        Settings {
            alpha1: self.alpha1,
            snr_db: self.snr_db,
            rate: self.rate,
            zeta: self.zeta,
            omega: self.omega,
            samples: self.samples,
            seed: self.seed,
            execution: self.execution.map(Execution::from),
            ..Settings::default()
        }
    }

    fn resolve(&self, extra: Settings) -> Result<Resolved> {
        let file = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        extra.over(self.settings()).over(file).resolve()
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// snr, alpha1 or zeta.
    #[arg(long)]
    axis: Option<String>,
    /// start:step:stop, where stop may be `auto` on the zeta axis.
    #[arg(long)]
    grid: Option<String>,
    /// Add simulated mean and standard error columns.
    #[arg(long)]
    mc: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct PdfArgs {
    #[command(flatten)]
    common: Common,
    /// Transmitted superposed symbol, X00, X01, X10 or X11.
    #[arg(long, default_value = "X11")]
    point: String,
    #[arg(long, default_value_t = DEFAULT_CURVE_POINTS)]
    points: usize,
    /// Also write simulated histograms next to each curve.
    #[arg(long)]
    mc: bool,
    #[arg(long)]
    bins: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Fail unless every curve integrates to one.
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    /// table2, table3, fig6 ... fig12, or all.
    target: String,
    #[command(flatten)]
    common: Common,
    /// Directory for the underlying data tables as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, value_enum, default_value = "fast")]
    level: LevelArg,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum)]
    execution: Option<ExecArg>,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.jsonl")
}

fn print_config(r: &Resolved) -> Result<bool> {
    print!("{}", r.to_toml()?);
    Ok(true)
}

fn sweep(metric: Metric, args: &SweepArgs) -> Result<bool> {
    let started = Instant::now();
    let extra = Settings {
        axis: args.axis.clone(),
        grid: args.grid.clone(),
        mc: args.mc.then_some(true),
        ..Settings::default()
    };
    let r = args.common.resolve(extra)?;
    if args.common.print_config {
        return print_config(&r);
    }
    let spec = SweepSpec {
        metric,
        scenario: r.scenario,
        zeta: r.zeta,
        axis: r.axis,
        grid: r.grid,
        mc: r.mc.then_some(r.mc_config),
        execution: r.execution,
    };
    let table = run_sweep(&spec)?;
    let mut out = output(args.out.as_deref())?;
    match args.format {
        Format::Csv => table.write_csv(&mut out)?,
        Format::Table => out.write_all(table.to_text().as_bytes())?,
    }
    out.flush()?;
    if let Some(p) = &args.out {
        let command = match metric {
            Metric::Outage => "op-sweep",
            Metric::Capacity => "ec-sweep",
        };
        RunManifest::new(command, &spec, spec.mc.as_ref(), table.rows.len(), started)?.append_to(&manifest_path(p))?;
    }
    Ok(true)
}

fn parse_point(label: &str) -> Result<(u8, u8)> {
    let bits: Vec<u8> = label
        .trim_start_matches(['X', 'x'])
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(()),
        })
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Parse(format!("point `{label}`: expected X00, X01, X10 or X11")))?;
    match bits[..] {
        [i, j] => Ok((i, j)),
        _ => Err(Error::Parse(format!("point `{label}`: expected X00, X01, X10 or X11"))),
    }
}

fn branch_name(b: CurveBranch) -> &'static str {
    match b {
        CurveBranch::Success => "success",
        CurveBranch::Failure => "failure",
        CurveBranch::Unconditional => "unconditional",
    }
}

fn pdf_dump(args: &PdfArgs) -> Result<bool> {
    let started = Instant::now();
    let extra = Settings {
        bins: args.bins,
        mc: args.mc.then_some(true),
        ..Settings::default()
    };
    let r = args.common.resolve(extra)?;
    if args.common.print_config {
        return print_config(&r);
    }
    let (i, j) = parse_point(&args.point)?;
    let x = ConstellationPoint::new(&r.scenario, i, j)?;
    std::fs::create_dir_all(&args.out)?;
    let stats = match r.mc {
        true => Some(simulate_bpsk_branch_stats(&r.scenario, &x, &r.mc_config)?),
        false => None,
    };
    let mut ok = true;
    for (variable, hist_variable) in [("fading", HistVariable::Fading), ("noise", HistVariable::NoiseReal)] {
        for branch in [CurveBranch::Unconditional, CurveBranch::Success, CurveBranch::Failure] {
            let curve = match hist_variable {
                HistVariable::Fading => PdfCurve::fading(&r.scenario, &x, branch, args.points),
                _ => PdfCurve::noise(&r.scenario, &x, branch, args.points),
            };
            let stem = format!("{variable}_{}", branch_name(branch));
            curve.write_csv(BufWriter::new(File::create(args.out.join(format!("{stem}.csv")))?))?;
            let mass = curve.trapezoid_mass();
            let mut line = format!("{stem}: mass {mass:.8}");
            if args.check && (mass - 1.0).abs() > MASS_TOLERANCE {
                ok = false;
                line.push_str(" FAIL");
            }
            if let Some(h) = stats.as_ref().and_then(|s| s.histograms.get(branch, hist_variable)) {
                h.write_csv(BufWriter::new(File::create(args.out.join(format!("hist_{stem}.csv")))?))?;
                if h.total() > 0 {
                    let d = histogram_distance(h, &curve)?;
                    line.push_str(&format!(", histogram sup {:.3e}, l1 {:.3e}", d.sup, d.l1));
                }
            }
            println!("{line}");
        }
    }
    let points = if r.mc { 6 * 2 } else { 6 };
    RunManifest::new("pdf-dump", &r, r.mc.then_some(&r.mc_config), points, started)?
        .append_to(&args.out.join("manifest.jsonl"))?;
    Ok(ok)
}

fn reproduce_cmd(args: &ReproduceArgs) -> Result<bool> {
    let targets: Vec<Target> = match args.target.as_str() {
        "all" => Target::ALL.to_vec(),
        t => vec![t.parse()?],
    };
    let r = args.common.resolve(Settings::default())?;
    if args.common.print_config {
        return print_config(&r);
    }
    let opts = ReproduceOptions {
        mc: r.mc_config,
        execution: r.execution,
    };
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
    }
    let mut ok = true;
    for t in targets {
        let started = Instant::now();
        let rep = reproduce(t, &opts)?;
        println!("== {t}");
        print!("{}", rep.render());
        ok &= rep.passed();
        if let Some(dir) = &args.out {
            for (name, table) in &rep.tables {
                table.write_csv(BufWriter::new(File::create(dir.join(format!("{t}_{name}.csv")))?))?;
            }
            RunManifest::new("reproduce", &t, Some(&opts.mc), rep.tables.len(), started)?
                .append_to(&dir.join("manifest.jsonl"))?;
        }
    }
    Ok(ok)
}

fn validate_cmd(args: &ValidateArgs) -> Result<bool> {
    let level = match args.level {
        LevelArg::Fast => Level::Fast,
        LevelArg::Full => Level::Full,
    };
    let execution = args.execution.map(Execution::from).unwrap_or_default();
    let report = run_validation(level, args.seed, execution)?;
    let json = report.to_json()?;
    if args.json {
        println!("{json}");
    } else {
        print!("{}", report.render());
    }
    if let Some(p) = &args.out {
        std::fs::write(p, format!("{json}\n"))?;
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::OpSweep(a) => sweep(Metric::Outage, a),
        Command::EcSweep(a) => sweep(Metric::Capacity, a),
        Command::PdfDump(a) => pdf_dump(a),
        Command::Reproduce(a) => reproduce_cmd(a),
        Command::Validate(a) => validate_cmd(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}
