//! Command-line interface.

use std::path::{Path, PathBuf};

use agn_core::ensemble::ResponseModel;
use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use crate::manifest::{sha256_hex, RunManifest};
use crate::output::{Format, Table};
use crate::runs::{self, McOptions};
use crate::scenario::{load_scenario, ConfigError, Loaded};
use crate::svg::{self, PlotSpec};

#[derive(Debug, Parser)]
#[command(
    name = "agn",
    version,
    about = "Atomic granularity noise in vapor-cell electrometers"
)]
pub struct Cli {
    /// Bundled scenario name or path to a TOML file.
    #[arg(long, global = true, default_value = "paper-operating-point")]
    pub scenario: String,
    /// Overrides the scenario's Monte Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t)]
    pub format: Format,
    /// Overrides the scenario's response model.
    #[arg(long, global = true, value_enum)]
    pub response: Option<ResponseArg>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ResponseArg {
    WeakProbe,
    Full,
}

impl From<ResponseArg> for ResponseModel {
    fn from(r: ResponseArg) -> Self {
        match r {
            ResponseArg::WeakProbe => ResponseModel::WeakProbe,
            ResponseArg::Full => ResponseModel::Full,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scenario echo, fluxes, resource ratio and J.
    Fluxes,
    /// Relative noise against the resource ratio.
    ScalingSweep,
    /// Sensitivity over probe power and beam waist, plus a fixed-waist inset.
    SensitivityMap,
    /// Relative noise for several Mandel Q values and the Fock-state boundary.
    QuantumSweep,
    /// Monte Carlo check of the scaling law. Exits with 1 when it fails.
    McValidate {
        /// Trials per grid point.
        #[arg(long)]
        trials: Option<usize>,
        /// Scales the analytic J before comparison (self-test of the checker).
        #[arg(long, hide = true, default_value_t = 1.0)]
        inject_j_factor: f64,
    },
    /// Renders a CSV table as SVG.
    EmitSvg {
        input: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Color column; makes the plot a heatmap.
        #[arg(long)]
        z: Option<String>,
        #[arg(long)]
        group: Option<String>,
        #[arg(long)]
        log_x: bool,
        #[arg(long)]
        log_y: bool,
        #[arg(long)]
        title: Option<String>,
        /// Defaults to the input name with an .svg extension in --out.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Fluxes => "fluxes",
            Command::ScalingSweep => "scaling-sweep",
            Command::SensitivityMap => "sensitivity-map",
            Command::QuantumSweep => "quantum-sweep",
            Command::McValidate { .. } => "mc-validate",
            Command::EmitSvg { .. } => "emit-svg",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The run completed but a validation check failed.
    CheckFailed,
}

/// Process exit code for a run result: 0 success, 1 failed check or runtime
/// error, 2 bad configuration.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::CheckFailed) => 1,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => 2,
        Err(_) => 1,
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    if cli.threads == Some(0) {
        return Err(ConfigError::new("--threads", "must be at least 1").into());
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building the thread pool")?;
    pool.install(|| execute(&cli))
}

struct Writer<'a> {
    cli: &'a Cli,
    manifest: RunManifest,
}

impl Writer<'_> {
    fn table(&mut self, stem: &str, t: &Table) -> Result<PathBuf> {
        let name = format!("{stem}.{}", self.cli.format.extension());
        self.manifest
            .write_output(&self.cli.out, &name, &t.encode(self.cli.format)?)
    }

    fn finish(self) -> Result<()> {
        let path = self.cli.out.join(format!("{}.manifest.json", self.manifest.command));
        self.manifest.save(&path)
    }
}

fn writer<'a>(cli: &'a Cli, loaded: &Loaded, input: &[u8]) -> Result<Writer<'a>> {
    std::fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let mut manifest = RunManifest::new(
        cli.command.name(),
        &loaded.scenario.name,
        &loaded.source,
        loaded.scenario.digest(),
        input,
    );
    manifest.threads = Some(rayon::current_num_threads());
    Ok(Writer { cli, manifest })
}

fn execute(cli: &Cli) -> Result<Outcome> {
    if let Command::EmitSvg { .. } = cli.command {
        return emit_svg(cli);
    }
    let mut loaded = load_scenario(&cli.scenario)?;
    if let Some(r) = cli.response {
        loaded.scenario.response = r.into();
    }
    let bytes = loaded.bytes.clone();
    let mut w = writer(cli, &loaded, &bytes)?;
    let s = &loaded.scenario;
    let mut outcome = Outcome::Success;
    match &cli.command {
        Command::Fluxes => {
            let (t, notes) = runs::fluxes(s)?;
            w.table("fluxes", &t)?;
            print_table(&t);
            w.manifest.notes = notes;
        }
        Command::ScalingSweep => {
            let t = runs::scaling_sweep(s)?;
            w.table("scaling-sweep", &t)?;
            println!("{} rows", t.rows.len());
        }
        Command::SensitivityMap => {
            let (map, inset) = runs::sensitivity_map_run(s)?;
            w.table("sensitivity-map", &map)?;
            w.table("sensitivity-map-inset", &inset)?;
            let missing = map.rows.iter().filter(|r| r[2] == crate::output::Cell::Missing).count();
            println!("{} grid points, {missing} missing", map.rows.len());
        }
        Command::QuantumSweep => {
            let (t, r_crit) = runs::quantum_sweep(s)?;
            w.table("quantum-sweep", &t)?;
            let note = format!("R_crit = {r_crit:.10e}");
            println!("{note}");
            w.manifest.notes.push(note);
        }
        Command::McValidate {
            trials,
            inject_j_factor,
        } => {
            let opts = McOptions {
                seed: cli.seed,
                trials: *trials,
                analytic_j_factor: *inject_j_factor,
            };
            let (t, report, seed) = runs::mc_validate(s, &opts)?;
            w.manifest.seed = Some(seed);
            w.table("mc-validate", &t)?;
            for p in &report.points {
                println!(
                    "R = {:.3e}  empirical {:.5} [{:.5}, {:.5}]  analytic {:.5}  dev {:.2}%  {}",
                    p.r_target,
                    p.empirical_ratio,
                    p.ratio_ci_low,
                    p.ratio_ci_high,
                    p.analytic_ratio,
                    100.0 * p.relative_deviation,
                    if p.pass { "pass" } else { "FAIL" }
                );
            }
            let slope = report.agn_slope.map_or("n/a".to_string(), |s| format!("{s:.4}"));
            let verdict = if report.pass { "PASS" } else { "FAIL" };
            let note = format!("J = {:.6e}, AGN-branch slope = {slope}, overall {verdict}", report.j);
            println!("{note}");
            w.manifest.notes.push(note);
            if !report.pass {
                outcome = Outcome::CheckFailed;
            }
        }
        Command::EmitSvg { .. } => unreachable!(),
    }
    w.finish()?;
    Ok(outcome)
}

fn print_table(t: &Table) {
    if let Ok(bytes) = t.to_csv() {
        print!("{}", String::from_utf8_lossy(&bytes));
    }
}

fn emit_svg(cli: &Cli) -> Result<Outcome> {
    let Command::EmitSvg {
        input,
        x,
        y,
        z,
        group,
        log_x,
        log_y,
        title,
        output,
    } = &cli.command
    else {
        unreachable!()
    };
    let bytes = std::fs::read(input).with_context(|| format!("reading {}", input.display()))?;
    let spec = PlotSpec {
        x: x.clone(),
        y: y.clone(),
        z: z.clone(),
        group: group.clone(),
        log_x: *log_x,
        log_y: *log_y,
        title: title.clone(),
    };
    let svg = if spec.z.is_some() {
        svg::heatmap(&bytes, &spec)?
    } else {
        svg::line_plot(&bytes, &spec)?
    };
    let target = match output {
        Some(p) => p.clone(),
        None => {
            let stem = input
                .file_stem()
                .map_or("plot".into(), |s| s.to_string_lossy().into_owned());
            cli.out.join(format!("{stem}.svg"))
        }
    };
    let dir = target
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = target
        .file_name()
        .context("output path has no file name")?
        .to_string_lossy()
        .into_owned();
    let config = sha256_hex(format!("{spec:?}").as_bytes());
    let mut manifest = RunManifest::new("emit-svg", "", &input.display().to_string(), config, &bytes);
    manifest.write_output(dir, &name, svg.as_bytes())?;
    manifest.save(&dir.join("emit-svg.manifest.json"))?;
    println!("{}", target.display());
    Ok(Outcome::Success)
}
