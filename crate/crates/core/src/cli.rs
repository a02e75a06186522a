//! The `lls` command-line front end.
//!
//! Exit codes: 0 when every check passes, 1 on a mathematical failure,
//! 2 on bad input.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{build_extension, verify_exact, verify_extends, ChoiceStrategy, ExtensionGrid};
use crate::instance::{instance_to_json, load_instance, monomial_instance, random_refined, validate, SequenceSpec};
use crate::kernel::{interval_index, KernelModel, RefinedSeries};
use crate::par::Execution;
use crate::report::{CheckRecord, Report};
use crate::scalar::Field;
use crate::uniqueness::{decide_unique, region};

#[derive(Debug, Parser)]
#[command(name = "lls", version, about = "Exact extensions of refined limit linear series on a chain of three rational curves")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalOpts,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Seed for every random choice (ChaCha8, one stream per grid cell).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Seeded builds used to probe for non-uniqueness.
    #[arg(long, global = true, default_value_t = 10)]
    pub trials: usize,
    /// `rational` or `prime:P`; overrides the field of the instance file.
    #[arg(long, global = true)]
    pub field: Option<Field>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Run every stage on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Deterministic,
    Seeded,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance with prescribed vanishing orders for V_X2.
    Gen(GenArgs),
    /// Run every kernel-space check, and optionally verify a grid file.
    Check {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Build an exact extension and verify it.
    Build {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Strategy::Deterministic)]
        strategy: Strategy,
        /// Write the step trace here as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Decide uniqueness of the exact extension.
    Unique {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Table of dim K_il with region membership.
    Grid {
        #[arg(long)]
        instance: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub d: usize,
    /// Checked against the sequence lengths when given.
    #[arg(long)]
    pub r: Option<usize>,
    /// Orders at A, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "monomial", requires = "bprime")]
    pub b: Vec<usize>,
    /// Orders at B, comma separated.
    #[arg(long, value_delimiter = ',', conflicts_with = "monomial", requires = "b")]
    pub bprime: Vec<usize>,
    /// Exponents of a monomial V_X2, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub monomial: Vec<usize>,
}

/// Exit status for a finished run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    MathFailure,
    InputError,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::MathFailure => 1,
            Status::InputError => 2,
        }
    }
}

pub fn error_status(e: &Error) -> Status {
    match e {
        Error::Prerequisite { .. }
        | Error::Closure(_)
        | Error::Replay { .. }
        | Error::Inconsistent(_)
        | Error::NotContained
        | Error::NotInImage
        | Error::EnumerationLimit(_) => Status::MathFailure,
        _ => Status::InputError,
    }
}

struct Ctx<'a> {
    g: &'a GlobalOpts,
    log: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn exec(&self) -> Execution {
        if self.g.sequential {
            Execution::Sequential
        } else {
            Execution::default()
        }
    }

    fn emit(&mut self, content: &str) -> Result<()> {
        match &self.g.out {
            Some(p) => write_file(p, content),
            None => Ok(self.log.write_all(content.as_bytes())?),
        }
    }

    fn note(&mut self, line: &str) -> Result<()> {
        if self.g.out.is_some() {
            writeln!(self.log, "{line}")?;
        }
        Ok(())
    }

    fn json_only(&self, cmd: &str) -> Result<()> {
        if self.g.format == Format::Csv {
            return Err(Error::Parse(format!("`{cmd}` only writes JSON")));
        }
        Ok(())
    }

    fn load(&self, path: &Path) -> Result<RefinedSeries> {
        load_instance(&fs::read_to_string(path)?, self.g.field)
    }

    fn model(&self, path: &Path) -> Result<KernelModel> {
        KernelModel::new(self.load(path)?, self.exec())
    }
}

fn write_file(path: &Path, content: &str) -> Result<()> {
    Ok(fs::write(path, content)?)
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes") + "\n"
}

fn report_csv(report: &Report) -> String {
    let mut s = String::from("i,l,check,pass\n");
    for r in &report.records {
        let _ = writeln!(s, "{},{},{},{}", r.point[0], r.point[1], r.check, r.pass);
    }
    s
}

fn status_of(report: &Report) -> Status {
    if report.all_pass() {
        Status::Pass
    } else {
        Status::MathFailure
    }
}

fn seq(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn cmd_gen(ctx: &mut Ctx, args: &GenArgs) -> Result<Status> {
    ctx.json_only("gen")?;
    let field = ctx.g.field.unwrap_or(Field::Rational);
    if let Field::Prime(p) = field {
        if p as usize <= args.d {
            return Err(Error::InvalidField(format!("prime {p} must exceed d = {}", args.d)));
        }
    }
    let h = if !args.monomial.is_empty() {
        let spec = SequenceSpec::monomial(args.d, &args.monomial)?;
        check_r(args.r, &spec)?;
        monomial_instance(&spec, &args.monomial, field)?
    } else if !args.b.is_empty() {
        let spec = SequenceSpec::new(args.d, args.b.clone(), args.bprime.clone())?;
        check_r(args.r, &spec)?;
        random_refined(&spec, field, ctx.g.seed)?
    } else {
        return Err(Error::Parse("gen needs --monomial or --b with --bprime".into()));
    };
    ctx.emit(&instance_to_json(&h))?;
    let line = format!("a={} b={} bprime={} c={}", seq(h.a()), seq(h.b()), seq(h.bprime()), seq(h.c()));
    ctx.note(&line)?;
    Ok(Status::Pass)
}

fn check_r(r: Option<usize>, spec: &SequenceSpec) -> Result<()> {
    match r {
        Some(r) if r != spec.r => Err(Error::InvalidInstance(format!(
            "--r {r} disagrees with {} orders",
            spec.r + 1
        ))),
        _ => Ok(()),
    }
}

fn cmd_check(ctx: &mut Ctx, instance: &Path, grid: Option<&Path>) -> Result<Status> {
    let m = ctx.model(instance)?;
    let mut report = validate(&m.h);
    report.merge(m.check_all());
    if let Some(path) = grid {
        let g = ExtensionGrid::from_json(&fs::read_to_string(path)?, m.h.curve().field(), m.h.d())?;
        report.merge(verify_exact(&m, &g));
        report.push(CheckRecord::new((0, 0), "extends", verify_extends(&m, &g)));
    }
    let out = match ctx.g.format {
        Format::Json => json(&report),
        Format::Csv => report_csv(&report),
    };
    ctx.emit(&out)?;
    let status = status_of(&report);
    ctx.note(&format!("{} checks, {} failed", report.len(), report.failures().len()))?;
    Ok(status)
}

fn cmd_build(ctx: &mut Ctx, instance: &Path, strategy: Strategy, trace: Option<&Path>) -> Result<Status> {
    ctx.json_only("build")?;
    let m = ctx.model(instance)?;
    let strategy = match strategy {
        Strategy::Deterministic => ChoiceStrategy::Deterministic,
        Strategy::Seeded => ChoiceStrategy::Seeded(ctx.g.seed),
    };
    let grid = build_extension(&m, strategy)?;
    let mut report = verify_exact(&m, &grid);
    report.push(CheckRecord::new((0, 0), "extends", verify_extends(&m, &grid)));
    ctx.emit(&json(&grid))?;
    if let Some(p) = trace {
        write_file(p, &grid.trace_lines())?;
    }
    ctx.note(&format!("digest {}", grid.digest()))?;
    Ok(status_of(&report))
}

fn cmd_unique(ctx: &mut Ctx, instance: &Path) -> Result<Status> {
    ctx.json_only("unique")?;
    let m = ctx.model(instance)?;
    let verdict = decide_unique(&m, ctx.g.seed, ctx.g.trials, ctx.exec())?;
    ctx.emit(&json(&verdict))?;
    ctx.note(if verdict.unique { "unique" } else { "not unique" })?;
    Ok(Status::Pass)
}

#[derive(Serialize)]
struct GridRow {
    i: usize,
    l: usize,
    #[serde(rename = "dimK")]
    dim_k: usize,
    j: Option<usize>,
    k: Option<usize>,
    in_region: bool,
}

#[derive(Serialize)]
struct GridTable {
    d: usize,
    r: usize,
    b: Vec<usize>,
    bprime: Vec<usize>,
    cells: Vec<GridRow>,
}

fn cmd_grid(ctx: &mut Ctx, instance: &Path) -> Result<Status> {
    let m = ctx.model(instance)?;
    let h = &m.h;
    let in_region: BTreeSet<(usize, usize)> = region(h).iter().map(|p| (p.i, p.l)).collect();
    let cells: Vec<GridRow> = m
        .grid
        .keys()
        .into_iter()
        .map(|(i, l)| GridRow {
            i,
            l,
            dim_k: m.grid.dim(i, l),
            j: interval_index(h.b(), i),
            k: interval_index(h.bprime(), l),
            in_region: in_region.contains(&(i, l)),
        })
        .collect();
    let out = match ctx.g.format {
        Format::Json => json(&GridTable { d: h.d(), r: h.r(), b: h.b().to_vec(), bprime: h.bprime().to_vec(), cells }),
        Format::Csv => {
            let opt = |x: Option<usize>| x.map_or(String::new(), |v| v.to_string());
            let mut s = String::from("i,l,dimK,j,k,in_region\n");
            for c in &cells {
                let _ = writeln!(s, "{},{},{},{},{},{}", c.i, c.l, c.dim_k, opt(c.j), opt(c.k), c.in_region);
            }
            s
        }
    };
    ctx.emit(&out)?;
    Ok(Status::Pass)
}

/// Runs a parsed command. Primary output goes to `--out` or `stdout`;
/// summaries go to `stdout` only when `--out` is set.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<Status> {
    let mut ctx = Ctx { g: &cli.global, log: stdout };
    match &cli.command {
        Command::Gen(args) => cmd_gen(&mut ctx, args),
        Command::Check { instance, grid } => cmd_check(&mut ctx, instance, grid.as_deref()),
        Command::Build { instance, strategy, trace } => cmd_build(&mut ctx, instance, *strategy, trace.as_deref()),
        Command::Unique { instance } => cmd_unique(&mut ctx, instance),
        Command::Grid { instance } => cmd_grid(&mut ctx, instance),
    }
}

/// Parses arguments, runs, reports errors on `stderr`, and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Status::InputError.code() } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("error: {e}");
            error_status(&e).code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("lls").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_parse() {
        let cli = parse(&["unique", "--instance", "x.json", "--field", "prime:7", "--trials", "3"]);
        assert_eq!(cli.global.field, Some(Field::Prime(7)));
        assert_eq!(cli.global.trials, 3);
        let cli = parse(&["gen", "--d", "4", "--monomial", "0,4"]);
        let Command::Gen(g) = cli.command else { panic!() };
        assert_eq!(g.monomial, vec![0, 4]);
        assert!(Cli::try_parse_from(["lls", "gen", "--d", "4", "--b", "0,2"]).is_err());
        assert!(Cli::try_parse_from(["lls", "grid", "--instance", "x", "--field", "prime:4"]).is_err());
    }

    #[test]
    fn gen_to_stdout() {
        let cli = parse(&["gen", "--d", "4", "--monomial", "0,4"]);
        let mut buf = Vec::new();
        assert_eq!(execute(&cli, &mut buf).unwrap(), Status::Pass);
        let text = String::from_utf8(buf).unwrap();
        assert!(load_instance(&text, None).is_ok());
        let cli = parse(&["gen", "--d", "4", "--monomial", "0,4", "--format", "csv"]);
        assert_eq!(error_status(&execute(&cli, &mut Vec::new()).unwrap_err()), Status::InputError);
    }

    #[test]
    fn status_mapping() {
        assert_eq!(error_status(&Error::Inconsistent("x".into())), Status::MathFailure);
        assert_eq!(error_status(&Error::Parse("x".into())), Status::InputError);
        assert_eq!(Status::InputError.code(), 2);
    }
}
