use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pulseflow::harness::{
    compile_program, exhaustive_sweep, export_vcd, margin_sweep, run_program, staircase_pattern, MarginOptions, Pacing,
    SweepOptions,
};
use pulseflow::kernel::{self, SimConfig};
use pulseflow::netlist::has_errors;
use pulseflow::{build_shifter, check_design, parse_design, print_design, CellKind, Circuit, ClockFlow, ShifterConfig, TimeFs};

/// Event-driven simulator and test harness for SFQ bit-serial shifters.
#[derive(Parser)]
#[command(name = "pulseflow", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a shifter netlist.
    Gen {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the design-rule check on a netlist file.
    Check { file: PathBuf },
    /// Simulate a netlist against a stimulus file of `<time_fs> <input>` lines.
    Sim {
        file: PathBuf,
        #[arg(long)]
        stimulus: PathBuf,
        #[arg(long)]
        vcd: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Walk one bit across every output and back.
    Staircase {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        vcd: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Spacing between operation periods; defaults to the master clock.
        #[arg(long)]
        pacing_ps: Option<f64>,
    },
    /// Every word, shift amount and direction against the reference model.
    Exhaustive {
        #[command(flatten)]
        shape: Shape,
        /// Register or generator cell to disable.
        #[arg(long)]
        fail_cell: Option<String>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        pacing_ps: Option<f64>,
    },
    /// Repeat the sweep with randomly perturbed cell delays.
    Margins {
        #[command(flatten)]
        shape: Shape,
        #[arg(long, default_value_t = 20.0)]
        perturb_pct: f64,
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Shape {
    #[arg(long, default_value_t = 8)]
    width: usize,
    #[arg(long, default_value_t = 30.0)]
    loop_delay_ps: f64,
    #[arg(long, default_value_t = 2.0)]
    skew_ps: f64,
    /// Distribute the shift clock in the direction of data motion.
    #[arg(long)]
    co_flow: bool,
}

fn ps_to_fs(ps: f64, what: &str) -> Result<u64> {
    if !ps.is_finite() || ps <= 0.0 {
        bail!("{what} must be a positive number of picoseconds, got {ps}");
    }
    Ok((ps * 1000.0).round() as u64)
}

impl Shape {
    fn config(&self) -> Result<ShifterConfig> {
        let cfg = ShifterConfig {
            loop_delay_fs: ps_to_fs(self.loop_delay_ps, "--loop-delay-ps")?,
            clock_skew_fs: ps_to_fs(self.skew_ps, "--skew-ps")?,
            clock_flow: if self.co_flow {
                ClockFlow::CoFlow
            } else {
                ClockFlow::CounterFlow
            },
            ..ShifterConfig::for_width(self.width)
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

fn pacing(ps: Option<f64>, default: Pacing) -> Result<Pacing> {
    Ok(match ps {
        Some(ps) => Pacing {
            period_fs: ps_to_fs(ps, "--pacing-ps")?,
        },
        None => default,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Write the report to `path`, or to stdout without one.
fn emit(path: Option<&Path>, json: &str) -> Result<()> {
    match path {
        Some(p) => write(p, json),
        None => {
            println!("{json}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_design(path: &Path) -> Result<pulseflow::Design> {
    let text = read(path)?;
    parse_design(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_stimulus(text: &str) -> Result<Vec<(TimeFs, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(t), Some(name), None) = (parts.next(), parts.next(), parts.next()) else {
            bail!("stimulus line {}: expected `<time_fs> <input>`", n + 1);
        };
        let t: u64 = t
            .parse()
            .with_context(|| format!("stimulus line {}: bad time `{t}`", n + 1))?;
        out.push((TimeFs(t), name.to_string()));
    }
    out.sort_by_key(|(t, _)| *t);
    Ok(out)
}

fn gen(shape: &Shape, out: Option<&Path>) -> Result<bool> {
    let text = print_design(&build_shifter(&shape.config()?)?);
    match out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(true)
}

fn check(file: &Path) -> Result<bool> {
    let diags = match parse_design(&read(file)?) {
        Ok(design) => check_design(&design),
        Err(e) => e.diagnostics,
    };
    for d in &diags {
        eprintln!("{}: {d}", file.display());
    }
    let errors = diags.iter().filter(|d| d.is_error()).count();
    eprintln!("{errors} error(s), {} warning(s)", diags.len() - errors);
    Ok(!has_errors(&diags))
}

fn sim(file: &Path, stimulus: &Path, vcd: Option<&Path>, report: Option<&Path>) -> Result<bool> {
    let circuit = Circuit::compile(&load_design(file)?)?;
    let stim = parse_stimulus(&read(stimulus)?)?;
    let res = kernel::run(&circuit, &stim, SimConfig::default())?;
    if let Some(p) = vcd {
        write(p, &export_vcd(&res.trace, &circuit))?;
    }
    let outputs: serde_json::Map<_, _> = circuit
        .outputs()
        .map(|(name, id)| (name.to_string(), json!(res.trace.pulses_on(id).count())))
        .collect();
    let converters: serde_json::Map<_, _> = circuit
        .cells()
        .filter(|&(_, _, kind)| kind == CellKind::SfqDc)
        .map(|(id, name, _)| {
            (
                name.to_string(),
                json!({
                    "level": res.final_states[id.0 as usize].level(),
                    "toggles": res.trace.levels_of(id).count(),
                }),
            )
        })
        .collect();
    let diagnostics: Vec<String> = res
        .diagnostics
        .iter()
        .map(|d| format!("{} at {} t={}", d.kind, circuit.cell_name(d.cell), d.time.0))
        .collect();
    let pass = diagnostics.is_empty();
    let body = json!({
        "pass": pass,
        "delivered": res.delivered,
        "final_time_fs": res.trace.records.last().map_or(0, |r| r.time.0),
        "outputs": outputs,
        "converters": converters,
        "diagnostics": diagnostics,
    });
    emit(report, &serde_json::to_string_pretty(&body)?)?;
    Ok(pass)
}

fn staircase(shape: &Shape, vcd: Option<&Path>, report: Option<&Path>, pacing_ps: Option<f64>) -> Result<bool> {
    let cfg = shape.config()?;
    let circuit = Circuit::compile(&build_shifter(&cfg)?)?;
    let compiled = compile_program(&staircase_pattern(cfg.width), &cfg, pacing(pacing_ps, Pacing::master())?)?;
    let (run, result) = run_program(&circuit, &cfg, &compiled)?;
    if let Some(p) = vcd {
        write(p, &export_vcd(&result.trace, &circuit))?;
    }
    eprintln!("{}", run.summary());
    emit(report, &run.to_json())?;
    Ok(run.pass())
}

fn exhaustive(
    shape: &Shape,
    fail_cell: Option<String>,
    jobs: usize,
    report: Option<&Path>,
    pacing_ps: Option<f64>,
) -> Result<bool> {
    let cfg = shape.config()?;
    let opts = SweepOptions {
        jobs,
        pacing: pacing(pacing_ps, Pacing::relaxed())?,
        fail_cell,
    };
    let run = exhaustive_sweep(&cfg, &opts)?;
    eprintln!("{}", run.summary());
    emit(report, &run.to_json())?;
    Ok(run.pass())
}

fn margins(shape: &Shape, options: MarginOptions, report: Option<&Path>) -> Result<bool> {
    let cfg = shape.config()?;
    let run = margin_sweep(&cfg, &options)?;
    let failed = run.trials.iter().filter(|t| !t.pass).count();
    eprintln!(
        "{}: {} trials at ±{}%, {failed} failed, settling inequality {}",
        if run.pass { "PASS" } else { "FAIL" },
        run.trials.len(),
        run.perturb_pct,
        if run.settling_holds { "holds" } else { "violated" }
    );
    emit(report, &run.to_json())?;
    Ok(run.pass)
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Gen { shape, out } => gen(&shape, out.as_deref()),
        Command::Check { file } => check(&file),
        Command::Sim {
            file,
            stimulus,
            vcd,
            report,
        } => sim(&file, &stimulus, vcd.as_deref(), report.as_deref()),
        Command::Staircase {
            shape,
            vcd,
            report,
            pacing_ps,
        } => staircase(&shape, vcd.as_deref(), report.as_deref(), pacing_ps),
        Command::Exhaustive {
            shape,
            fail_cell,
            jobs,
            report,
            pacing_ps,
        } => exhaustive(&shape, fail_cell, jobs, report.as_deref(), pacing_ps),
        Command::Margins {
            shape,
            perturb_pct,
            trials,
            seed,
            jobs,
            report,
        } => margins(
            &shape,
            MarginOptions {
                perturb_pct,
                trials,
                seed,
                jobs,
                ..MarginOptions::default()
            },
            report.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
