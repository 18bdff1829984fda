use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rde3::analysis::{check_semicycle_rule, classify_oscillation_of, semicycles_of};
use rde3::bounds::audit_bounds;
use rde3::convergence::{estimate_rate, perron_rate, RateSettings, DEFAULT_BURN_IN};
use rde3::dynamics::{simulate, simulate_deviations, Deviations, Params};
use rde3::report;
use rde3::scenario::{run_sweep, AxisRange, Scenario, SweepSpec};
use rde3::stability;
use rde3::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rde3",
    version,
    about = "Simulate and analyse the system x' = a + (y/y'')^p, y' = a + (x/x'')^q"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate a scenario and write the orbit as `n,x,y`.
    Simulate(Common),
    /// Semi-cycle table and oscillation report.
    Analyze(Common),
    /// Audit an orbit against the persistence bound and the geometric envelope.
    Bounds(Common),
    /// Eigenvalues, certificate and stability classification.
    Stability {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        q: Option<f64>,
    },
    /// Convergence rate of a converging orbit, matched against the spectrum.
    Rate {
        #[command(flatten)]
        common: Common,
        /// Read error norms (one per line, index 0 first) instead of simulating.
        #[arg(long, value_name = "FILE", conflicts_with_all = ["preset", "config"])]
        norms: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BURN_IN)]
        burn_in: usize,
        /// Number of trailing ratios to average; all ratios after burn-in by default.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Classify every node of an (alpha, p, q) grid.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Built-in scenario: example1, example2, example3 or example4.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Scenario JSON file (a sweep spec for `sweep`).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the number of steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Text,
}

impl Common {
    fn scenario(&self) -> Result<Scenario> {
        let mut scenario = match (&self.preset, &self.config) {
            (Some(name), _) => Scenario::preset(name)?,
            (None, Some(path)) => Scenario::load(path)?,
            (None, None) => {
                return Err(Error::invalid(
                    "scenario",
                    "pass --preset <name> or --config <path>",
                ))
            }
        };
        if let Some(n) = self.steps {
            if n < 10 {
                return Err(Error::invalid(
                    "steps",
                    format!("must be at least 10, got {n}"),
                ));
            }
            scenario.n_steps = n;
        }
        Ok(scenario)
    }

    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn emit(&self, body: &str) -> Result<()> {
        match &self.out {
            Some(path) => write_file(path, body),
            None => {
                let mut stdout = std::io::stdout().lock();
                // a closed pipe is not worth an error
                let _ = stdout.write_all(body.as_bytes());
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Deviations from the exact recurrence, cut to the length of the stored
/// orbit so the two never disagree on where the data ends.
fn deviations_for(scenario: &Scenario, orbit_len: usize) -> Deviations {
    let mut dev = simulate_deviations(&scenario.params, &scenario.init, scenario.n_steps);
    dev.dx.truncate(orbit_len);
    dev.dy.truncate(orbit_len);
    dev
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let sc = common.scenario()?;
            let orbit = simulate(&sc.params, &sc.init, sc.n_steps, sc.cap);
            let summary = report::orbit_summary(
                &orbit,
                &sc.params.equilibrium(),
                sc.tolerances.convergence_tol,
            );
            match common.format_or(Format::Csv) {
                Format::Csv => {
                    common.emit(&report::orbit_csv(&orbit))?;
                    eprint!("{summary}");
                }
                Format::Text => common.emit(&summary)?,
            }
        }
        Command::Analyze(common) => {
            let sc = common.scenario()?;
            let orbit = simulate(&sc.params, &sc.init, sc.n_steps, sc.cap);
            let dev = deviations_for(&sc, orbit.len());
            let cycles = semicycles_of(&dev);
            match common.format_or(Format::Text) {
                Format::Csv => common.emit(&report::semicycles_csv(&cycles))?,
                Format::Text => {
                    let rule = check_semicycle_rule(&cycles.joint);
                    let osc = classify_oscillation_of(&dev);
                    let mut text = report::termination_text(orbit.termination());
                    text.insert_str(0, "termination: ");
                    text.push('\n');
                    text.push_str(&report::analysis_text(
                        &cycles,
                        &osc,
                        rule.holds,
                        rule.violation_start,
                    ));
                    common.emit(&text)?
                }
            }
        }
        Command::Bounds(common) => {
            let sc = common.scenario()?;
            let orbit = simulate(&sc.params, &sc.init, sc.n_steps, sc.cap);
            let audit = audit_bounds(&orbit, &sc.params, sc.tolerances.bound_slack)?;
            match common.format_or(Format::Text) {
                Format::Csv => common.emit(&report::bounds_csv(&audit))?,
                Format::Text => common.emit(&report::bounds_text(&audit))?,
            }
        }
        Command::Stability {
            common,
            alpha,
            p,
            q,
        } => {
            let (params, eigen_tol) = match (alpha, p, q) {
                (Some(a), Some(p), Some(q))
                    if common.preset.is_none() && common.config.is_none() =>
                {
                    (Params::new(a, p, q)?, stability::poly::ROOT_TOL)
                }
                (None, None, None) => {
                    let sc = common.scenario()?;
                    (sc.params, sc.tolerances.eigen_tol)
                }
                _ => {
                    return Err(Error::invalid(
                        "parameters",
                        "give all of --alpha, --p, --q, or a scenario via --preset/--config",
                    ))
                }
            };
            let rep = stability::classify_with(&params, eigen_tol, stability::RADIUS_MARGIN)?;
            match common.format_or(Format::Text) {
                Format::Csv => common.emit(&report::stability_csv(&rep))?,
                Format::Text => common.emit(&report::stability_text(&rep))?,
            }
        }
        Command::Rate {
            common,
            norms,
            burn_in,
            window,
        } => {
            let rate = match norms {
                Some(path) => {
                    estimate_rate(&report::parse_norms(&read_file(&path)?)?, burn_in, window)?
                }
                None => {
                    let sc = common.scenario()?;
                    let settings = RateSettings {
                        n_steps: common.steps.unwrap_or(RateSettings::default().n_steps),
                        burn_in,
                        window,
                        convergence_tol: sc.tolerances.convergence_tol,
                    };
                    perron_rate(&sc.params, &sc.init, &settings)?
                }
            };
            match common.format_or(Format::Text) {
                Format::Csv => common.emit(&report::rate_csv(&rate))?,
                Format::Text => common.emit(&report::rate_text(&rate))?,
            }
        }
        Command::Sweep(common) => {
            let spec = match (&common.preset, &common.config) {
                (Some(name), _) => {
                    let params = Scenario::preset(name)?.params;
                    SweepSpec {
                        alpha: AxisRange::single(params.alpha()),
                        p: AxisRange::single(params.p()),
                        q: AxisRange::single(params.q()),
                        simulate_steps: common.steps,
                    }
                }
                (None, Some(path)) => {
                    let mut spec = SweepSpec::load(path)?;
                    spec.simulate_steps = common.steps.or(spec.simulate_steps);
                    spec
                }
                (None, None) => {
                    return Err(Error::invalid(
                        "spec",
                        "pass --config <sweep.json> or --preset <name>",
                    ))
                }
            };
            let rows = run_sweep(&spec)?;
            match common.format_or(Format::Csv) {
                Format::Csv => common.emit(&report::sweep_csv(&rows))?,
                Format::Text => common.emit(&report::sweep_text(&rows))?,
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
