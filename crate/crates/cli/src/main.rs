mod config;
mod ops;
mod report;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use levyme::mc::{SimConfig, Simulator};
use levyme::{Error, ExitClass, Result, ScaleEval64};
use serde::Serialize;

use config::{Format, HorizonSpec, RunConfig};

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

/// Fluctuation identities of spectrally negative Lévy processes killed at
/// a matrix-exponential time.
#[derive(Debug, Parser)]
#[command(name = "levyme", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print Φ(−T) and its residual.
    Phi(Common),
    /// Evaluate an operation over a grid.
    Curve(CurveArgs),
    /// Run the invariant and simulation checks; exit 4 on any failure.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// stable:α | bm:σ,γ | cl:c,λ,μ[,σ]
    #[arg(long)]
    model: Option<String>,
    /// paper-sec7 | worked-example | exp:q | erlang:k,rate | file:PATH
    #[arg(long, conflicts_with = "builtin")]
    horizon: Option<String>,
    /// Built-in horizon by name.
    #[arg(long)]
    builtin: Option<String>,
    /// Write here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, Debug, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct SimArgs {
    /// Number of simulated paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Seed; beats both LEVYME_SEED and the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Simulation grid step.
    #[arg(long)]
    step_size: Option<f64>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sim: SimArgs,
    /// Operation name; see the list below.
    #[arg(long)]
    op: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long)]
    step: Option<f64>,
    /// Operation parameter as NAME=VALUE; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Add simulation columns for operations marked [mc].
    #[arg(long)]
    mc: bool,
    /// Also write simulated paths as CSV (path_id,time,value).
    #[arg(long)]
    dump_paths: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    dump_count: usize,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    sim: SimArgs,
    /// Only run the deterministic checks.
    #[arg(long)]
    skip_mc: bool,
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("'{s}' is not NAME=VALUE"))?;
    let v = v.trim().parse::<f64>().map_err(|e| format!("'{v}': {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn load(common: &Common) -> Result<RunConfig> {
    let mut c = match &common.config {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &common.model {
        c.model = Some(m.clone());
    }
    if let Some(h) = common.horizon.as_ref().or(common.builtin.as_ref()) {
        c.horizon = Some(HorizonSpec::Named(h.clone()));
    }
    if let Some(p) = &common.output {
        c.output.path = Some(p.clone());
    }
    if let Some(f) = common.format {
        c.output.format = Some(match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        });
    }
    Ok(c)
}

fn sim_config(c: &mut RunConfig, args: &SimArgs) -> Result<SimConfig> {
    if let Some(p) = args.paths {
        c.mc.paths = Some(p);
    }
    if let Some(h) = args.step_size {
        c.mc.step = Some(h);
    }
    let mut sim = c.sim_config()?;
    if let Some(s) = args.seed {
        sim.seed = s;
    }
    Ok(sim)
}

fn context(c: &RunConfig) -> Result<ScaleEval64> {
    ScaleEval64::new(c.model()?, c.horizon()?)
}

fn sink(c: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &c.output.path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(out: &mut dyn Write, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| num(*v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct PhiOutput {
    model: String,
    horizon: String,
    phi: Vec<Vec<f64>>,
    residual: f64,
    phase_type: bool,
    /// Present for phase-type horizons: whether `−Φ(−T)` is a sub-intensity matrix.
    #[serde(skip_serializing_if = "Option::is_none")]
    sub_intensity: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sub_intensity_defect: Option<f64>,
}

fn describe(c: &RunConfig) -> (String, String) {
    let model = c.model.clone().unwrap_or_else(|| "stable:1.5".into());
    let horizon = match &c.horizon {
        None => "paper-sec7".into(),
        Some(HorizonSpec::Named(s)) => s.clone(),
        Some(HorizonSpec::Inline { .. }) => "inline".into(),
    };
    (model, horizon)
}

fn cmd_phi(common: &Common) -> Result<()> {
    let c = load(common)?;
    let ev = context(&c)?;
    let phi = ev.phi()?;
    let rows = phi.value.real_rows();
    let mut out = sink(&c)?;
    match c.output.format.unwrap_or(Format::Json) {
        Format::Csv => {
            let header: Vec<String> = (0..rows.len()).map(|j| format!("c{j}")).collect();
            write_csv(&mut out, &header, &rows)?;
        }
        Format::Json => {
            let pt = ev.horizon()?.is_phase_type();
            let defect = levyme::validation::sub_intensity_defect(&phi.value);
            let (model, horizon) = describe(&c);
            write_json(
                &mut out,
                &PhiOutput {
                    model,
                    horizon,
                    phi: rows,
                    residual: phi.residual,
                    phase_type: pt,
                    sub_intensity: pt.then(|| phi.is_sub_intensity(1e-9)),
                    sub_intensity_defect: pt.then_some(defect),
                },
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Grid from `from` to `to` inclusive; the last point snaps to `to`.
fn grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(to >= from) || !from.is_finite() || !to.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "grid needs from ≤ to and step > 0 (got {from}, {to}, {step})"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| from + k as f64 * step).collect())
}

#[derive(Serialize)]
struct CurveOutput<'a> {
    op: &'a str,
    model: String,
    horizon: String,
    params: &'a ops::Params,
    columns: &'a [String],
    rows: &'a [Vec<f64>],
}

fn cmd_curve(a: &CurveArgs) -> Result<()> {
    let mut c = load(&a.common)?;
    if let Some(op) = &a.op {
        c.query.op = Some(op.clone());
    }
    for (k, v) in &a.params {
        c.query.params.insert(k.clone(), *v);
    }
    let simulate = a.mc || c.mc.enabled.unwrap_or(false);
    let sim_cfg = sim_config(&mut c, &a.sim)?;
    let name = c
        .query
        .op
        .clone()
        .ok_or_else(|| Error::InvalidParameter("no operation given (--op)".into()))?;
    let op = ops::find(&name)?;
    let params = ops::resolve_params(op, &c.query.params)?;
    let xs = grid(
        a.from.or(c.query.from).unwrap_or(0.0),
        a.to.or(c.query.to).unwrap_or(1.0),
        a.step.or(c.query.step).unwrap_or(0.05),
    )?;
    let ev = context(&c)?;

    let mut header = vec![op.arg.to_string()];
    header.extend((op.columns)(ev.dim()));
    let mut rows = xs
        .iter()
        .map(|x| {
            let mut r = vec![*x];
            r.extend((op.eval)(&ev, *x, &params)?);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;

    if simulate || a.dump_paths.is_some() {
        let sim = Simulator::new(ev.model().clone(), sim_cfg)?;
        if let Some(path) = &a.dump_paths {
            sim.dump_paths(ev.horizon()?, a.dump_count, BufWriter::new(File::create(path)?))?;
        }
        if simulate {
            let mc = op.mc.ok_or_else(|| {
                Error::InvalidParameter(format!("'{}' has no simulation estimator", op.name))
            })?;
            let est = mc(&sim, &ev, &xs, &params)?;
            header.extend(["mc_estimate".to_string(), "mc_se".to_string()]);
            for (r, e) in rows.iter_mut().zip(est) {
                r.extend([e.value, e.se]);
            }
        }
    }

    let mut out = sink(&c)?;
    match c.format() {
        Format::Csv => write_csv(&mut out, &header, &rows)?,
        Format::Json => {
            let (model, horizon) = describe(&c);
            write_json(
                &mut out,
                &CurveOutput {
                    op: op.name,
                    model,
                    horizon,
                    params: &params,
                    columns: &header,
                    rows: &rows,
                },
            )?
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_validate(a: &ValidateArgs) -> Result<bool> {
    let mut c = load(&a.common)?;
    let sim = sim_config(&mut c, &a.sim)?;
    let ev = context(&c)?;
    let (model, horizon) = describe(&c);
    let reference = model == "stable:1.5" && matches!(horizon.as_str(), "paper-sec7" | "worked-example");
    let report = report::run(&report::Setup {
        ev: &ev,
        model,
        horizon,
        reference,
        simulate: !a.skip_mc && !c.mc.enabled.is_some_and(|e| !e),
        sim,
    })?;
    let mut out = sink(&c)?;
    write_json(&mut out, &report)?;
    out.flush()?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cmd = Cli::command()
        .after_help(ops::listing())
        .mut_subcommand("curve", |s| s.after_help(ops::listing()));
    let cli = match Cli::from_arg_matches(&cmd.get_matches()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let outcome = match &cli.command {
        Command::Phi(c) => cmd_phi(c).map(|_| true),
        Command::Curve(a) => cmd_curve(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_VALIDATION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.exit_class() {
                ExitClass::Input => EXIT_INPUT,
                ExitClass::Numeric => EXIT_NUMERIC,
            })
        }
    }
}
