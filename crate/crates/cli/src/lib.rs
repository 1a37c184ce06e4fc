//! Subcommand implementations for the `dilation` binary.
//!
//! Each command reads an instance file, runs one pipeline stage and returns
//! a [`Report`]. The command's artifact is embedded in the report, or written
//! to `--out` when given.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::value::RawValue;

use dilation_core::format::{
    matrix_to_json, minimality_checks, ArgsFile, Check, InstanceFile, IntertwinerJson,
    MinimalityJson, Report,
};
use dilation_core::genlab::GeneratorSpec;
use dilation_core::stinespring::phi_equal;
use dilation_core::{
    construct_intertwiners, is_minimal, reduce_to_minimal, Error, MapInstance, TolerancePolicy,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_SHAPE: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "dilation",
    version,
    about = "Stinespring data: evaluation, minimal reduction, intertwiners"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Relative rank cutoff (overrides the instance file).
    #[arg(long = "tolerance-rank", global = true)]
    pub tolerance_rank: Option<f64>,
    /// Absolute equality tolerance (overrides the instance file).
    #[arg(long = "tolerance-eq", global = true)]
    pub tolerance_eq: Option<f64>,
    /// Seed override for generator specs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the artifact here instead of embedding it in the report.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Pretty,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the map on the elements listed in an args file.
    Evaluate {
        instance: PathBuf,
        #[arg(long)]
        args: PathBuf,
    },
    /// Reduce each representation to a minimal one.
    Reduce { instance: PathBuf },
    /// Report span dimensions and minimality per slot.
    CheckMinimal { instance: PathBuf },
    /// Build intertwiners between the two representations of an instance.
    Intertwine { instance: PathBuf },
    /// Materialize a generator spec (JSON) as an explicit instance file.
    Generate { spec: PathBuf },
}

/// A failure that ends the command before a report exists.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn schema(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_SCHEMA,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_) | Error::NotUnital { .. } => EXIT_SCHEMA,
            Error::Shape(_) => EXIT_SHAPE,
            _ => EXIT_PRECONDITION,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Output of a command: the report plus the serialized artifact.
pub struct Outcome {
    pub report: Report,
    pub artifact: String,
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::schema(format!("cannot read {}: {e}", path.display())))
}

fn load_instance_file(path: &Path, global: &GlobalArgs) -> CliResult<InstanceFile> {
    let text = read_text(path)?;
    let mut file = InstanceFile::parse(&text)
        .map_err(|e| CliError::schema(format!("{}: {e}", path.display())))?;
    if let (Some(seed), Some(spec)) = (global.seed, &file.generator) {
        file.generator = Some(spec.with_seed(seed));
    }
    Ok(file)
}

/// Flags over file values over defaults.
pub fn effective_tolerance(
    file: Option<&InstanceFile>,
    global: &GlobalArgs,
) -> CliResult<TolerancePolicy> {
    let base = match file {
        Some(f) => f.tolerance_policy()?,
        None => TolerancePolicy::DEFAULT,
    };
    Ok(TolerancePolicy::new(
        global.tolerance_rank.unwrap_or(base.rank_rtol),
        global.tolerance_eq.unwrap_or(base.eq_atol),
    )?)
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("artifacts always serialize")
}

pub fn cmd_evaluate(
    file: &InstanceFile,
    inst: &MapInstance,
    args: &ArgsFile,
    pol: &TolerancePolicy,
) -> CliResult<Outcome> {
    let elements = args.to_elements();
    let value = inst.representation_a.evaluate(&elements)?;
    let mut checks = vec![Check::flag(
        "finite",
        dilation_core::numerics::is_finite(&value),
    )];
    if let Some(b) = &inst.representation_b {
        let other = b.evaluate(&elements)?;
        checks.push(Check::residual(
            "representations_agree",
            dilation_core::numerics::max_abs(&(&value - other)),
            pol.eq_atol,
        ));
    }
    Ok(Outcome {
        report: Report::new("evaluate", file.digest(), checks),
        artifact: to_json(&matrix_to_json(&value)),
    })
}

pub fn cmd_reduce(
    file: &InstanceFile,
    inst: &MapInstance,
    pol: &TolerancePolicy,
) -> CliResult<Outcome> {
    let mut checks = Vec::new();
    let mut reduced = Vec::new();
    let sides: Vec<(&str, _)> = std::iter::once(("A", &inst.representation_a))
        .chain(inst.representation_b.as_ref().map(|b| ("B", b)))
        .collect();
    for (name, data) in sides {
        let red = reduce_to_minimal(data, pol)?;
        let cmp = phi_equal(data, &red.data, pol)?;
        checks.push(Check::residual(
            format!("{name}.phi_equal"),
            cmp.max_residual,
            pol.eq_atol,
        ));
        let prefix = format!("{name}.");
        checks.extend(minimality_checks(&prefix, &is_minimal(&red.data, pol)));
        reduced.push(red.data);
    }
    let mut it = reduced.into_iter();
    let a = it.next().expect("side A is always present");
    let out = MapInstance::new(inst.algebras.clone(), a, it.next())?;
    let out_file = InstanceFile::from_instance(&out, file.tolerance);
    Ok(Outcome {
        report: Report::new("reduce", file.digest(), checks),
        artifact: out_file.to_canonical_json(),
    })
}

pub fn cmd_check_minimal(
    file: &InstanceFile,
    inst: &MapInstance,
    pol: &TolerancePolicy,
) -> CliResult<Outcome> {
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    let sides: Vec<(&str, _)> = std::iter::once(("A", &inst.representation_a))
        .chain(inst.representation_b.as_ref().map(|b| ("B", b)))
        .collect();
    for (name, data) in sides {
        let rep = is_minimal(data, pol);
        checks.extend(minimality_checks(&format!("{name}."), &rep));
        reports.push(MinimalityJson::from(&rep));
    }
    Ok(Outcome {
        report: Report::new("check-minimal", file.digest(), checks),
        artifact: to_json(&reports),
    })
}

pub fn cmd_intertwine(
    file: &InstanceFile,
    inst: &MapInstance,
    pol: &TolerancePolicy,
) -> CliResult<Outcome> {
    let res = construct_intertwiners(inst, pol)?;
    let mut checks: Vec<Check> = res
        .residual_families()
        .into_iter()
        .map(|(name, r)| Check::residual(name, r, pol.eq_atol))
        .collect();
    checks.push(Check::residual(
        "unitarity",
        res.max_unitarity_res(),
        pol.eq_atol,
    ));
    for (s, slot) in res.slots.iter().enumerate() {
        checks.push(Check::flag(
            format!("generic_position[{s}]"),
            slot.generic_position.pass,
        ));
        checks.push(Check::residual(
            format!("halmos[{s}]"),
            slot.halmos_res,
            pol.eq_atol,
        ));
        checks.push(Check::residual(
            format!("graph_containment[{s}]"),
            slot.containment_res,
            pol.eq_atol,
        ));
    }
    Ok(Outcome {
        report: Report::new("intertwine", file.digest(), checks),
        artifact: to_json(&IntertwinerJson::from(&res)),
    })
}

pub fn cmd_generate(
    spec: &GeneratorSpec,
    pol: &TolerancePolicy,
) -> CliResult<(InstanceFile, Outcome)> {
    let inst = dilation_core::genlab::generate(spec, pol)?;
    inst.validate(pol)?;
    let file = InstanceFile::from_instance(&inst, None);
    let checks = vec![Check::flag("generated", true)];
    let artifact = file.to_canonical_json();
    let report = Report::new("generate", file.digest(), checks);
    Ok((file, Outcome { report, artifact }))
}

/// Run one parsed command line. Returns the report (with wall time set) and
/// the artifact text.
pub fn execute(cli: &Cli) -> CliResult<Outcome> {
    let started = Instant::now();
    let global = &cli.global;
    let mut outcome = match &cli.command {
        Command::Generate { spec } => {
            let text = read_text(spec)?;
            let mut spec: GeneratorSpec = serde_json::from_str(&text)
                .map_err(|e| CliError::schema(format!("generator spec: {e}")))?;
            if let Some(seed) = global.seed {
                spec = spec.with_seed(seed);
            }
            let pol = effective_tolerance(None, global)?;
            cmd_generate(&spec, &pol)?.1
        }
        Command::Evaluate { instance, args } => {
            let file = load_instance_file(instance, global)?;
            let pol = effective_tolerance(Some(&file), global)?;
            let inst = file.to_instance(&pol)?;
            let args: ArgsFile = serde_json::from_str(&read_text(args)?)
                .map_err(|e| CliError::schema(format!("args file: {e}")))?;
            cmd_evaluate(&file, &inst, &args, &pol)?
        }
        Command::Reduce { instance } => with_instance(instance, global, cmd_reduce)?,
        Command::CheckMinimal { instance } => with_instance(instance, global, cmd_check_minimal)?,
        Command::Intertwine { instance } => with_instance(instance, global, cmd_intertwine)?,
    };
    outcome.report.wall_time = started.elapsed().as_secs_f64();
    Ok(outcome)
}

fn with_instance(
    path: &Path,
    global: &GlobalArgs,
    f: impl FnOnce(&InstanceFile, &MapInstance, &TolerancePolicy) -> CliResult<Outcome>,
) -> CliResult<Outcome> {
    let file = load_instance_file(path, global)?;
    let pol = effective_tolerance(Some(&file), global)?;
    let inst = file.to_instance(&pol)?;
    f(&file, &inst, &pol)
}

/// Execute, write outputs, and return the process exit code.
pub fn run(cli: &Cli, stdout: &mut impl std::io::Write, stderr: &mut impl std::io::Write) -> i32 {
    let mut outcome = match execute(cli) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            return e.code;
        }
    };
    match &cli.global.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &outcome.artifact) {
                let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
                return EXIT_SCHEMA;
            }
        }
        None => {
            outcome.report.artifact = Some(
                RawValue::from_string(outcome.artifact.clone()).expect("artifact is valid JSON"),
            );
        }
    }
    let text = match cli.global.format {
        OutputFormat::Json => serde_json::to_string(&outcome.report),
        OutputFormat::Pretty => serde_json::to_string_pretty(&outcome.report),
    }
    .expect("reports always serialize");
    let _ = writeln!(stdout, "{text}");
    for check in outcome.report.checks.iter().filter(|c| !c.pass) {
        let _ = writeln!(
            stderr,
            "check failed: {} (residual {:e} > threshold {:e})",
            check.name, check.residual, check.threshold
        );
    }
    if outcome.report.pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}
