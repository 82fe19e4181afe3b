//! `interfere`: transition probabilities, identity suites, naturalness scans,
//! generating-function cross-checks and dilation checks from the command line.
//!
//! Exit codes: 0 success, 1 an identity failed, 2 malformed input, 3 a budget
//! or size limit was exceeded.

mod error;
mod render;
mod source;
mod suite;

use std::io::{self, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use interfere_core::combinat::enumerate_subsets;
use interfere_core::genfunc::{gf_closed_form, gf_minor_expansion, gf_truncated_series, DualVariables};
use interfere_core::identities::{
    check_theorem2_via_dilation, is_two_particle_binary, naturalness, IdentityReport, DEFAULT_TIE_EPS,
};
use interfere_core::transition::{clamp_for_display, transition_triple};
use interfere_core::{Budget, OccupationVector, PatternPair, UnitaryMatrix};

use error::{CliError, CliResult, Flag, EXIT_IDENTITY_FAILED, EXIT_OK};
use render::{json_pattern, num, JsonObject, Record, REPORT_CSV_HEADER};
use source::MatrixSpec;

const THREADS_ENV: &str = "INTERFERE_THREADS";

#[derive(Parser)]
#[command(name = "interfere", version, about = "Boson, fermion and classical interference in linear interferometers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// file:PATH, fourier:N, beamsplitter, permutation:T1,T2,... (1-based targets),
    /// haar:N[:SEED], or random:N[:SEED] (embed only)
    #[arg(long)]
    matrix: String,
    /// Maximum number of particles in any pattern
    #[arg(long, default_value_t = 4)]
    budget: usize,
    /// Pass threshold on normalized residuals
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Seed for haar: and random: matrices given without one
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads, or `auto`; INTERFERE_THREADS takes precedence
    #[arg(long, default_value = "auto")]
    threads: String,
}

#[derive(Subcommand)]
enum Command {
    /// Boson, fermion and classical probabilities for one transition
    Compute {
        #[command(flatten)]
        common: Common,
        /// Input occupation, e.g. 1,1,0
        #[arg(long = "in")]
        input: String,
        /// Output occupation
        #[arg(long = "out")]
        output: String,
    },
    /// Run identity checks over every pattern within the budget
    Verify {
        #[command(flatten)]
        common: Common,
        /// `all` or a comma-separated list of identity names
        #[arg(long, default_value = "all")]
        suite: String,
    },
    /// Probabilities for every one-particle-per-mode transition
    Scan {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        particles: usize,
    },
    /// Generating function by closed form, minor expansion and truncated series
    Gf {
        #[command(flatten)]
        common: Common,
        /// Input duals in [0, 1), comma-separated; one value applies to every mode
        #[arg(long)]
        x: String,
        /// Output duals in [0, 1)
        #[arg(long)]
        z: String,
        /// Largest particle number kept in the series
        #[arg(long, default_value_t = 14)]
        cutoff: usize,
    },
    /// Check the arbitrary-matrix identity directly and through a unitary dilation
    Embed {
        #[command(flatten)]
        common: Common,
        /// Input occupation (default: one particle per mode)
        #[arg(long = "in")]
        input: Option<String>,
        #[arg(long = "out")]
        output: Option<String>,
        /// Dilation size (default: twice the matrix size)
        #[arg(long)]
        size: Option<usize>,
    },
}

struct Context {
    spec: MatrixSpec,
    max_particles: usize,
    tolerance: f64,
    seed: u64,
    format: Format,
}

fn thread_count(flag: &str) -> CliResult<usize> {
    let (source, text) = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => (THREADS_ENV, v),
        _ => ("--threads", flag.to_string()),
    };
    match text.trim() {
        "auto" => Ok(0),
        t => match t.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::input(format!("{source}: expected a positive integer or `auto`, got `{t}`"))),
        },
    }
}

impl Context {
    fn new(common: &Common) -> CliResult<Self> {
        let spec = MatrixSpec::parse(&common.matrix)?;
        if common.budget == 0 {
            return Err(CliError::input("--budget: must be at least 1"));
        }
        let cap = Budget::default().max_particles;
        if common.budget > cap {
            return Err(CliError::budget(format!("--budget: {} particles exceed the limit of {cap}", common.budget)));
        }
        if !(common.tolerance.is_finite() && common.tolerance > 0.0) {
            return Err(CliError::input(format!("--tolerance: must be positive, got {}", common.tolerance)));
        }
        let threads = thread_count(&common.threads)?;
        // only fails if a pool already exists, which cannot happen before the first command
        #[cfg(feature = "parallel")]
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        #[cfg(not(feature = "parallel"))]
        let _ = threads;
        Ok(Self { spec, max_particles: common.budget, tolerance: common.tolerance, seed: common.seed, format: common.format })
    }

    fn unitary(&self) -> CliResult<UnitaryMatrix> {
        self.spec.load_unitary(self.seed)
    }

    fn pattern(&self, flag: &str, text: &str, dim: usize) -> CliResult<OccupationVector> {
        let v: OccupationVector = text.parse::<OccupationVector>().flag(flag)?;
        if v.dim() != dim {
            return Err(CliError::input(format!("{flag}: pattern has {} modes but the matrix has {dim}", v.dim())));
        }
        if v.total() > self.max_particles {
            return Err(CliError::budget(format!(
                "{flag}: {} particles exceed --budget {}",
                v.total(),
                self.max_particles
            )));
        }
        Ok(v)
    }
}

fn shown(label: &str, value: f64) -> f64 {
    let (v, anomalous) = clamp_for_display(value);
    if anomalous {
        eprintln!("warning: {label} = {value:e} lies outside [0, 1]; showing the raw value");
    }
    v
}

fn cmd_compute(ctx: &Context, input: &str, output: &str, out: &mut impl Write) -> CliResult<i32> {
    let u = ctx.unitary()?;
    let i = ctx.pattern("--in", input, u.dim())?;
    let n = ctx.pattern("--out", output, u.dim())?;
    if !i.is_binary() || !n.is_binary() {
        eprintln!("warning: a mode holds more than one particle; the fermion probability is 0 by exclusion");
    }
    let p = PatternPair::new(i, n).flag("--in")?;
    let t = transition_triple(&u, &p).flag("--in")?;
    let (b, f, c) = (shown("B", t.boson), shown("F", t.fermion), shown("C", t.classical));
    let label = is_two_particle_binary(&p).then(|| naturalness(t.boson, t.classical, t.fermion, DEFAULT_TIE_EPS).name());
    match ctx.format {
        Format::Json => {
            let obj = JsonObject::new()
                .int("N", u.dim())
                .raw("input", json_pattern(&p.input))
                .raw("output", json_pattern(&p.output))
                .num("B", b)
                .num("F", f)
                .num("C", c)
                .raw("label", label.map_or_else(|| "null".to_string(), render::json_str));
            writeln!(out, "{}", obj.render())
        }
        Format::Csv => writeln!(
            out,
            "in,out,B,F,C,label\n{},{},{},{},{},{}",
            p.input.token(),
            p.output.token(),
            num(b),
            num(f),
            num(c),
            label.unwrap_or("")
        ),
    }
    .map_err(io_error)?;
    Ok(EXIT_OK)
}

fn emit_records(ctx: &Context, records: &[Record], out: &mut impl Write) -> CliResult<()> {
    if ctx.format == Format::Csv {
        writeln!(out, "{REPORT_CSV_HEADER}").map_err(io_error)?;
    }
    for r in records {
        match ctx.format {
            Format::Json => writeln!(out, "{}", r.json().render()),
            Format::Csv => writeln!(out, "{}", r.csv()),
        }
        .map_err(io_error)?;
    }
    Ok(())
}

fn exit_for(reports: impl IntoIterator<Item = bool>) -> i32 {
    if reports.into_iter().all(|passed| passed) {
        EXIT_OK
    } else {
        EXIT_IDENTITY_FAILED
    }
}

fn cmd_verify(ctx: &Context, suite_text: &str, out: &mut impl Write) -> CliResult<i32> {
    let ids = suite::parse_suite(suite_text)?;
    let u = ctx.unitary()?;
    let mut records = suite::run_suite(&u, &ids, ctx.max_particles)?;
    for r in &mut records {
        r.report = r.report.clone().with_tolerance(ctx.tolerance);
    }
    emit_records(ctx, &records, out)?;
    Ok(exit_for(records.iter().map(|r| r.report.passed)))
}

fn cmd_scan(ctx: &Context, particles: usize, out: &mut impl Write) -> CliResult<i32> {
    let u = ctx.unitary()?;
    let n = u.dim();
    if particles == 0 || particles > n {
        return Err(CliError::input(format!("--particles: expected 1 to {n} for a {n}-mode matrix, got {particles}")));
    }
    if particles > ctx.max_particles {
        return Err(CliError::budget(format!("--particles: {particles} exceeds --budget {}", ctx.max_particles)));
    }
    let subsets: Vec<OccupationVector> =
        enumerate_subsets(n, particles).iter().map(OccupationVector::indicator).collect();
    let pairs: Vec<PatternPair> =
        subsets.iter().flat_map(|i| subsets.iter().map(|o| PatternPair { input: i.clone(), output: o.clone() })).collect();
    let triples = interfere_core::parallel::try_map_ordered(&pairs, |p| transition_triple(&u, p)).flag("--matrix")?;

    if ctx.format == Format::Csv {
        writeln!(out, "in,out,B,F,C,S,D,label").map_err(io_error)?;
    }
    for (p, t) in pairs.iter().zip(&triples) {
        let label = if particles == 2 { naturalness(t.boson, t.classical, t.fermion, DEFAULT_TIE_EPS).name() } else { "" };
        let (b, f, c) = (shown("B", t.boson), shown("F", t.fermion), shown("C", t.classical));
        match ctx.format {
            Format::Csv => writeln!(
                out,
                "{},{},{},{},{},{},{},{label}",
                p.input.token(),
                p.output.token(),
                num(b),
                num(f),
                num(c),
                num(t.sum()),
                num(t.difference())
            ),
            Format::Json => {
                let obj = JsonObject::new()
                    .raw("in", json_pattern(&p.input))
                    .raw("out", json_pattern(&p.output))
                    .num("B", b)
                    .num("F", f)
                    .num("C", c)
                    .num("S", t.sum())
                    .num("D", t.difference())
                    .raw("label", if label.is_empty() { "null".to_string() } else { render::json_str(label) });
                writeln!(out, "{}", obj.render())
            }
        }
        .map_err(io_error)?;
    }
    Ok(EXIT_OK)
}

fn parse_duals(flag: &str, text: &str, dim: usize) -> CliResult<Vec<f64>> {
    let values = text
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| CliError::input(format!("{flag}: `{t}` is not a number"))))
        .collect::<CliResult<Vec<_>>>()?;
    let values = if values.len() == 1 { vec![values[0]; dim] } else { values };
    if values.len() != dim {
        return Err(CliError::input(format!("{flag}: {} values for a {dim}-mode matrix", values.len())));
    }
    if let Some(bad) = values.iter().find(|v| !(0.0..1.0).contains(*v)) {
        return Err(CliError::input(format!("{flag}: {bad} is outside [0, 1)")));
    }
    Ok(values)
}

fn cmd_gf(ctx: &Context, x: &str, z: &str, cutoff: usize, out: &mut impl Write) -> CliResult<i32> {
    let u = ctx.unitary()?;
    let duals = DualVariables::new(parse_duals("--x", x, u.dim())?, parse_duals("--z", z, u.dim())?).flag("--x")?;
    let closed = gf_closed_form(&u, &duals).flag("--x")?;
    let minor = gf_minor_expansion(&u, &duals).flag("--x")?;
    let series = gf_truncated_series(&u, &duals, cutoff).flag("--cutoff")?;
    let rows = [
        ("closed_form", closed),
        ("minor_expansion", minor),
        ("truncated_series", series.value),
        ("delta_closed_minor", (closed - minor).abs()),
        ("delta_closed_series", (closed - series.value).abs()),
        ("delta_minor_series", (minor - series.value).abs()),
        ("tail_bound", series.tail_bound),
    ];
    match ctx.format {
        Format::Json => {
            let mut obj = JsonObject::new().int("N", u.dim()).int("cutoff", cutoff);
            for (k, v) in rows {
                obj = obj.num(k, v);
            }
            writeln!(out, "{}", obj.bool("tail_bound_advisory", true).render())
        }
        Format::Csv => {
            let mut text = String::from("quantity,value\n");
            for (k, v) in rows {
                text.push_str(&format!("{k},{}\n", num(v)));
            }
            write!(out, "{text}")
        }
    }
    .map_err(io_error)?;
    Ok(EXIT_OK)
}

fn cmd_embed(
    ctx: &Context,
    input: Option<&str>,
    output: Option<&str>,
    size: Option<usize>,
    out: &mut impl Write,
) -> CliResult<i32> {
    let a = ctx.spec.load_raw(ctx.seed)?;
    if !a.is_square() {
        return Err(CliError::input(format!("--matrix: embedding needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    let ones = vec!["1"; n].join(",");
    let i = ctx.pattern("--in", input.unwrap_or(&ones), n)?;
    let o = ctx.pattern("--out", output.unwrap_or(&ones), n)?;
    let size = size.unwrap_or(2 * n);
    let p = PatternPair::new(i, o).flag("--in")?;
    let check = check_theorem2_via_dilation(&a, &p, size).flag("--size")?;
    let judged = |r: &IdentityReport| r.clone().with_tolerance(ctx.tolerance);
    let (direct, dilated, rescaled) = (judged(&check.direct), judged(&check.dilated), judged(&check.dilated_rescaled));
    let consistent = direct.passed == dilated.passed;
    let record = |report: IdentityReport| Record { modes: n, input: Some(p.input.clone()), output: Some(p.output.clone()), report };
    let reports = [record(direct.clone()), record(dilated.clone()), record(rescaled)];
    match ctx.format {
        Format::Json => {
            let obj = JsonObject::new()
                .int("N", n)
                .raw("input", json_pattern(&p.input))
                .raw("output", json_pattern(&p.output))
                .num("epsilon", check.epsilon)
                .int("dilation_size", check.dilation_size)
                .raw("direct", reports[0].json().render())
                .raw("dilated", reports[1].json().render())
                .raw("dilated_rescaled", reports[2].json().render())
                .bool("consistent", consistent);
            writeln!(out, "{}", obj.render()).map_err(io_error)?;
        }
        Format::Csv => emit_records(ctx, &reports, out)?,
    }
    Ok(exit_for([direct.passed, dilated.passed, consistent]))
}

fn io_error(e: io::Error) -> CliError {
    CliError::input(format!("output: {e}"))
}

fn run(cli: Cli) -> CliResult<i32> {
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let code = match &cli.command {
        Command::Compute { common, input, output } => cmd_compute(&Context::new(common)?, input, output, &mut out),
        Command::Verify { common, suite } => cmd_verify(&Context::new(common)?, suite, &mut out),
        Command::Scan { common, particles } => cmd_scan(&Context::new(common)?, *particles, &mut out),
        Command::Gf { common, x, z, cutoff } => cmd_gf(&Context::new(common)?, x, z, *cutoff, &mut out),
        Command::Embed { common, input, output, size } => {
            cmd_embed(&Context::new(common)?, input.as_deref(), output.as_deref(), *size, &mut out)
        }
    }?;
    out.flush().map_err(io_error)?;
    Ok(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
