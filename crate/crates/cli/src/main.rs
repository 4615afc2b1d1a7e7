//! `thinlie`: build, verify, detect, round-trip, deflate, draw and export
//! Nottingham algebras from family names, pattern files or centralizer
//! sequences.

mod diagram;
mod input;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use thinlie::patterns::check_distances;
use thinlie::{
    classify_regularity, deflate, detect, roundtrip_check, roundtrip_margin, verify_lemma_suite,
    GradedAlgebra, GUARD, SCHEMA_VERSION,
};

use input::{Input, Source};

/// Default ceiling on the number of degrees any job may build.
const DEFAULT_MAX_DEGREE: usize = 1000;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("degree budget exceeded: the job needs degree {needed}, the limit is {limit} (set THINLIE_MAX_DEGREE to raise it)")]
    Budget { needed: usize, limit: usize },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] thinlie::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 1 check failed, 2 malformed input, 3 budget, 4 computation error, 5 io.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) | CliError::Json(_) => 2,
            CliError::Budget { .. } => 3,
            CliError::Io { .. } => 5,
            CliError::Core(e) => core_exit_code(e),
        }
    }
}

fn core_exit_code(e: &thinlie::Error) -> u8 {
    use thinlie::Error as E;
    match e {
        E::Stage { source, .. } => core_exit_code(source),
        E::ValidationFailed { .. } => 1,
        E::InvalidField(_)
        | E::InvalidQ { .. }
        | E::InvalidPattern(_)
        | E::InvalidSequence(_)
        | E::PatternTooShort { .. }
        | E::Json(_) => 2,
        E::DegreeOverflow { .. } => 3,
        _ => 4,
    }
}

#[derive(Parser)]
#[command(name = "thinlie", version, about = "Exact computation with Nottingham algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct and validate an algebra; writes structure constants and the report.
    Build(Common),
    /// Run the axiom checks, the lemma suite and the distance checks.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Check::All)]
        check: Check,
    },
    /// Detect the diamond pattern.
    Detect(Common),
    /// Extract the algebra of maximal class and rebuild through the tensor construction.
    Roundtrip(Common),
    /// Deflate the input down to degree N.
    Deflate(Common),
    /// Double-grading diagram with diamond types.
    Diagram(Common),
    /// Structure-constant export without validation.
    Export(Common),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    All,
    Jacobi,
    Lemmas,
    Distance,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
    Txt,
}

#[derive(Args)]
struct Common {
    /// Family name: a, b, c, d, e, L1q, L0q, tq2, uniqueness or nqr.
    #[arg(long, group = "src")]
    family: Option<String>,
    /// Diamond pattern file (JSON).
    #[arg(long, group = "src")]
    pattern: Option<PathBuf>,
    /// Centralizer sequence file (JSON), or a literal such as YYYX.
    #[arg(long, group = "src")]
    sequence: Option<String>,
    /// Family spec file (JSON).
    #[arg(long, group = "src")]
    spec: Option<PathBuf>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long, default_value_t = 7)]
    q: u64,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    r: Option<u64>,
    /// Progression parameter: third type for family b, second type for family d.
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<i64>,
    #[arg(long = "N", default_value_t = 100)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

fn max_degree() -> Result<usize, CliError> {
    match std::env::var("THINLIE_MAX_DEGREE") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("THINLIE_MAX_DEGREE={v:?} is not a number"))),
        Err(_) => Ok(DEFAULT_MAX_DEGREE),
    }
}

fn write_output(common: &Common, text: &str) -> Result<(), CliError> {
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io {
                    path: "<stdout>".into(),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

fn to_text(v: &Value) -> Result<String, CliError> {
    Ok(serde_json::to_string_pretty(v)?)
}

fn validation_summary(report: &thinlie::ValidationReport) -> String {
    match report.first_failure() {
        Some(c) => format!("{} (first failure in degree {:?})", c.name, c.first_failure_degree),
        None => "all checks passed".into(),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let limit = max_degree()?;
    match cli.command {
        Command::Build(c) => {
            let input = Input::from_common(&c)?;
            let alg = input.build_unchecked(c.n, limit)?;
            let report = alg.validate();
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "source": input.describe(),
                "structure": alg.to_json(),
                "validation": report,
                "pass": report.passed(),
            });
            write_output(&c, &to_text(&doc)?)?;
            if !report.passed() {
                return Err(CliError::Validation(validation_summary(&report)));
            }
        }
        Command::Verify { common: c, check } => {
            let input = Input::from_common(&c)?;
            let alg = input.build_unchecked(c.n, limit)?;
            let (doc, pass) = verify(&alg, check)?;
            let doc = json!({"schema_version": SCHEMA_VERSION, "source": input.describe(), "report": doc, "pass": pass});
            write_output(&c, &to_text(&doc)?)?;
            if !pass {
                return Err(CliError::Validation("the report contains failed checks".into()));
            }
        }
        Command::Detect(c) => {
            let input = Input::from_common(&c)?;
            let alg = input.build(c.n, limit)?;
            let det = detect(&alg)?;
            let text = match c.format {
                Format::Txt => diagram::pattern_text(&det.pattern),
                _ => to_text(&json!({
                    "schema_version": SCHEMA_VERSION,
                    "source": input.describe(),
                    "pattern": det.pattern,
                    "report": det.report,
                }))?,
            };
            write_output(&c, &text)?;
        }
        Command::Roundtrip(c) => {
            let input = Input::from_common(&c)?;
            let alg = input.build(c.n + roundtrip_margin(c.q), limit)?;
            let report = roundtrip_check(&alg, c.n)?;
            write_output(&c, &to_text(&serde_json::to_value(&report)?)?)?;
            if !report.pass {
                return Err(CliError::Validation("round trip patterns differ".into()));
            }
        }
        Command::Deflate(c) => {
            let input = Input::from_common(&c)?;
            let p = input.p() as usize;
            let source_degree = p * (c.n + GUARD) + 1 + GUARD;
            let alg = input.build(source_degree, limit)?;
            let down = deflate(&alg, c.n)?;
            let det = detect(&down)?;
            let regularity = classify_regularity(&down)?;
            let doc = json!({
                "schema_version": SCHEMA_VERSION,
                "source": input.describe(),
                "source_degree": source_degree,
                "pattern": det.pattern,
                "regularity": regularity,
                "structure": down.to_json(),
            });
            write_output(&c, &to_text(&doc)?)?;
        }
        Command::Diagram(c) => {
            let input = Input::from_common(&c)?;
            let alg = input.build(c.n, limit)?;
            let pattern = detect(&alg)?.pattern;
            let text = match c.format {
                Format::Txt => diagram::text(&alg, &pattern),
                _ => diagram::dot(&alg, &pattern),
            };
            write_output(&c, &text)?;
        }
        Command::Export(c) => {
            let input = Input::from_common(&c)?;
            let alg = input.build_unchecked(c.n, limit)?;
            write_output(&c, &to_text(&alg.to_json())?)?;
        }
    }
    Ok(())
}

fn verify(alg: &GradedAlgebra, check: Check) -> Result<(Value, bool), CliError> {
    let mut doc = serde_json::Map::new();
    let mut pass = true;
    if matches!(check, Check::All | Check::Jacobi) {
        let report = if check == Check::All {
            alg.validate()
        } else {
            alg.validate_lie()
        };
        pass &= report.passed();
        doc.insert("validation".into(), serde_json::to_value(&report)?);
    }
    if matches!(check, Check::All | Check::Distance) {
        let pattern = detect(alg)?.pattern;
        let out = check_distances(alg, &pattern);
        pass &= out.passed;
        doc.insert("distance".into(), serde_json::to_value(&out)?);
    }
    if matches!(check, Check::All | Check::Lemmas) {
        let report = verify_lemma_suite(alg)?;
        pass &= report.passed();
        let failures: Vec<_> = report.failures().cloned().collect();
        doc.insert(
            "lemmas".into(),
            json!({"checked": report.instances.len(), "failures": failures}),
        );
    }
    Ok((Value::Object(doc), pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("thinlie: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl Input {
    fn describe(&self) -> Value {
        match &self.source {
            Source::Family(f) => json!({"p": self.p(), "q": self.q, "family": f}),
            Source::Nqr { r } => json!({"p": self.p(), "q": self.q, "family": "nqr", "r": r}),
            Source::Pattern(_) => json!({"p": self.p(), "q": self.q, "pattern": true}),
        }
    }
}
