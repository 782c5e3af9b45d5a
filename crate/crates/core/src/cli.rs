//! The `pgn` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation failure, 3 computation
//! error.

use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::One;

use crate::diagnostics::{analyze, analyze_profile, compare_system_profile, Thresholds};
use crate::minima::{minima_profile, parse_grid, BoundPolicy, GaugeBody, ProfileTable};
use crate::plot::{render_svg, Marker, PlotSpec};
use crate::pwl::PiecewiseLinearMap;
use crate::scalar::{format_scalar, int, parse_scalar, to_f64, ExactScalar, GapFunction};
use crate::system_file::{from_json, to_json};
use crate::template::{
    build_system, default_roy_constant, derive_alpha_beta, BetaMode, NextBlockRule, SystemMeta, TemplateParams,
};
use crate::validator::validate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pgn", version, about = "Exact n-systems, their validation, and certified successive minima")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a template system block by block.
    Build(BuildArgs),
    /// Check a system file against the axioms; `-` reads standard input.
    Validate { input: String },
    /// Successive minima profile of a linear form or a simultaneous body.
    Minima(MinimaArgs),
    /// Margins, exponent estimate and verdicts for a system or a profile.
    Diagnose(DiagnoseArgs),
    /// Distance between a system and a minima profile on the profile grid.
    Compare(CompareArgs),
    /// Render a system or profile as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BetaModeArg {
    Bounded,
    Log,
}

#[derive(Debug, Args)]
struct BuildArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    w: String,
    /// Dirichlet margin; derived from --epsilon when omitted.
    #[arg(long)]
    alpha: Option<String>,
    /// Diophantine margin for bounded mode; derived from --nu when omitted.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long, value_enum, default_value = "bounded")]
    beta_mode: BetaModeArg,
    #[arg(long, default_value = "1/2")]
    delta: String,
    #[arg(long)]
    q1: String,
    #[arg(long)]
    blocks: usize,
    /// System JSON output; standard output when omitted or `-`.
    #[arg(long)]
    out: Option<String>,
    /// Also render the system as SVG.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Breakpoint table as CSV.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Use the literal block-end formula instead of the closure value.
    #[arg(long)]
    paper_qk1: bool,
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    /// Transfer constant R_n; defaults to 5(n+1)^2(n+10).
    #[arg(long)]
    roy_constant: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    LinearForm,
    Simultaneous,
}

#[derive(Debug, Args)]
struct MinimaArgs {
    #[arg(long, value_enum, default_value = "linear-form")]
    mode: ModeArg,
    /// Comma-separated rational coordinates of the target.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Number of coordinates in simultaneous mode; must match --x.
    #[arg(long)]
    m: Option<usize>,
    /// `start:stop:step`.
    #[arg(long)]
    grid: String,
    /// `auto` or a fixed box bound.
    #[arg(long, default_value = "auto")]
    bound: String,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    /// A system JSON file or a profile CSV.
    #[arg(long)]
    input: String,
    /// Dimension; read from the input when omitted.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    w: String,
    /// Dirichlet threshold.
    #[arg(long)]
    epsilon: Option<String>,
    /// Diophantine threshold (also accepted as --dw-epsilon).
    #[arg(long, alias = "dw-epsilon")]
    nu: Option<String>,
    #[arg(long)]
    tail_from: Option<String>,
    /// Target of a profile, enabling the exact form-kernel check.
    #[arg(long, allow_hyphen_values = true)]
    x: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    system: String,
    #[arg(long)]
    profile: String,
    /// Defaults to 5(n+1)^2(n+10).
    #[arg(long)]
    roy_constant: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// A system JSON file or a profile CSV.
    #[arg(long)]
    input: String,
    #[arg(long)]
    out: String,
    /// Plot block k of a template system, with labelled breakpoints.
    #[arg(long)]
    block: Option<usize>,
    /// Dotted delta = 0 and delta = 1 variants of the block.
    #[arg(long)]
    overlays: bool,
    /// Exponent for the q/(w+1) guide; read from the system meta when present.
    #[arg(long)]
    w: Option<String>,
    #[arg(long, default_value_t = 800)]
    width: u32,
    #[arg(long, default_value_t = 500)]
    height: u32,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
    fn invalid(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_INVALID, message: message.to_string() }
    }
    fn compute(message: impl std::fmt::Display) -> Self {
        Self { code: EXIT_COMPUTE, message: message.to_string() }
    }
}

type Outcome = Result<i32, Failure>;

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let gap = match GapFunction::from_env() {
        Ok(g) => g,
        Err(e) => {
            eprintln!("pgn: {e}");
            return EXIT_USAGE;
        }
    };
    let outcome = match cli.command {
        Command::Build(a) => build(a, gap),
        Command::Validate { input } => validate_cmd(&input),
        Command::Minima(a) => minima(a, gap),
        Command::Diagnose(a) => diagnose(a, gap),
        Command::Compare(a) => compare(a),
        Command::Plot(a) => plot(a, gap),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("pgn: {}", f.message);
            f.code
        }
    }
}

fn scalar(flag: &str, text: &str) -> Result<ExactScalar, Failure> {
    parse_scalar(text).map_err(|e| Failure::usage(format!("--{flag}: {e}")))
}

fn opt_scalar(flag: &str, text: &Option<String>) -> Result<Option<ExactScalar>, Failure> {
    text.as_deref().map(|t| scalar(flag, t)).transpose()
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut text = String::new();
        std::io::stdin().read_to_string(&mut text).map_err(|e| Failure::compute(format!("stdin: {e}")))?;
        return Ok(text);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::compute(format!("{path}: {e}")))
}

/// Writes next to the destination, then renames over it.
fn write_atomic(path: &Path, contents: &str) -> Result<(), Failure> {
    let name = path.file_name().ok_or_else(|| Failure::usage(format!("{}: not a file path", path.display())))?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let io = |e: std::io::Error| Failure::compute(format!("{}: {e}", path.display()));
    std::fs::write(&tmp, contents).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

fn emit(out: Option<&str>, contents: &str) -> Result<(), Failure> {
    match out {
        None | Some("-") => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::compute(format!("stdout: {e}")))
        }
        Some(path) => write_atomic(Path::new(path), contents),
    }
}

fn build(a: BuildArgs, gap: GapFunction) -> Outcome {
    let w = scalar("w", &a.w)?;
    let roy = match &a.roy_constant {
        Some(r) => scalar("roy-constant", r)?,
        None => default_roy_constant(a.n),
    };
    let (eps, nu) = (opt_scalar("epsilon", &a.epsilon)?, opt_scalar("nu", &a.nu)?);
    let derived = match (&eps, &nu) {
        (Some(e), Some(v)) => Some(derive_alpha_beta(e, v, &roy, a.n, &w, gap).map_err(|e| Failure::usage(e.to_string()))?),
        (None, None) => None,
        _ => return Err(Failure::usage("--epsilon and --nu must be given together")),
    };
    let alpha = match (opt_scalar("alpha", &a.alpha)?, &derived) {
        (Some(alpha), _) => alpha,
        (None, Some((alpha, _))) => alpha.clone(),
        (None, None) => return Err(Failure::usage("--alpha (or --epsilon with --nu) is required")),
    };
    let beta_mode = match a.beta_mode {
        BetaModeArg::Log => {
            if a.beta.is_some() {
                return Err(Failure::usage("--beta conflicts with --beta-mode log"));
            }
            BetaMode::LogGrowth
        }
        BetaModeArg::Bounded => match (opt_scalar("beta", &a.beta)?, &derived) {
            (Some(beta), _) => BetaMode::Bounded(beta),
            (None, Some((_, beta))) => BetaMode::Bounded(beta.clone()),
            (None, None) => return Err(Failure::usage("bounded mode needs --beta (or --epsilon with --nu)")),
        },
    };
    let params = TemplateParams {
        n: a.n,
        w,
        alpha,
        beta_mode,
        delta: scalar("delta", &a.delta)?,
        q1: scalar("q1", &a.q1)?,
        blocks: a.blocks,
        gap,
        next_rule: if a.paper_qk1 { NextBlockRule::Printed } else { NextBlockRule::Closure },
    };
    let built = build_system(&params).map_err(Failure::compute)?;
    if let Some(path) = &a.table {
        write_atomic(path, &built.breakpoint_table_csv())?;
    }
    if let Some(path) = &a.svg {
        let mut spec = PlotSpec::new(built.map.clone()).with_guides(params.n, &params.w);
        spec.markers = built
            .q_sequence()
            .iter()
            .enumerate()
            .map(|(i, q)| Marker { label: format!("q_{}", i + 1), at: q.clone() })
            .collect();
        write_atomic(path, &render_svg(&spec).map_err(Failure::compute)?)?;
    }
    emit(a.out.as_deref(), &to_json(&built.map, Some(&params.to_meta())))?;
    Ok(EXIT_OK)
}

fn validate_cmd(input: &str) -> Outcome {
    let text = read_input(input)?;
    let (map, _) = from_json(&text).map_err(Failure::invalid)?;
    let report = validate(&map).map_err(Failure::invalid)?;
    emit(None, &report.to_json_lines())?;
    Ok(if report.is_system { EXIT_OK } else { EXIT_INVALID })
}

fn parse_x(text: &str) -> Result<Vec<ExactScalar>, Failure> {
    text.split(',').map(|t| scalar("x", t.trim())).collect()
}

fn minima(a: MinimaArgs, gap: GapFunction) -> Outcome {
    let x = parse_x(&a.x)?;
    let body = match a.mode {
        ModeArg::LinearForm => {
            if a.m.is_some() {
                return Err(Failure::usage("--m applies to simultaneous mode only"));
            }
            GaugeBody::linear_form(x)
        }
        ModeArg::Simultaneous => {
            if a.m.is_some_and(|m| m != x.len()) {
                return Err(Failure::usage(format!("--m {} but --x has {} coordinates", a.m.unwrap_or(0), x.len())));
            }
            GaugeBody::simultaneous(x)
        }
    }
    .map_err(|e| Failure::usage(e.to_string()))?;
    let grid = parse_grid(&a.grid).map_err(|e| Failure::usage(format!("--grid: {e}")))?;
    let policy = match a.bound.as_str() {
        "auto" => BoundPolicy::Auto,
        b => BoundPolicy::Fixed(
            b.parse::<u64>().ok().filter(|&b| b > 0).ok_or_else(|| Failure::usage("--bound must be auto or a positive integer"))?,
        ),
    };
    let denominators = body.denominator_scale();
    if !denominators.is_one() {
        let d = ExactScalar::from_integer(denominators.clone());
        let horizon = gap.ln(&d).map(|h| to_f64(&h)).unwrap_or(f64::NAN);
        eprintln!(
            "pgn: validity horizon: results describe the rational target with denominators up to {denominators}; \
             as a proxy they are faithful only for e^q well below that scale (q well below {horizon:.3})"
        );
    }
    let profile = minima_profile(&body, &grid, policy, gap).map_err(Failure::compute)?;
    let mut failed = 0;
    for (q, point) in grid.iter().zip(&profile.points) {
        if let Err(e) = point {
            failed += 1;
            eprintln!("pgn: q = {}: {e}", format_scalar(q));
        }
    }
    if failed == grid.len() {
        return Err(Failure::compute("no grid point could be certified"));
    }
    emit(a.out.as_deref(), &profile.to_csv())?;
    Ok(EXIT_OK)
}

enum Subject {
    System(PiecewiseLinearMap, Option<SystemMeta>),
    Profile(ProfileTable),
}

fn load_subject(path: &str) -> Result<Subject, Failure> {
    let text = read_input(path)?;
    let looks_csv = path.ends_with(".csv") || text.trim_start().starts_with("q,");
    if looks_csv {
        Ok(Subject::Profile(ProfileTable::parse(&text).map_err(Failure::invalid)?))
    } else {
        let (map, meta) = from_json(&text).map_err(Failure::invalid)?;
        Ok(Subject::System(map, meta))
    }
}

fn diagnose(a: DiagnoseArgs, gap: GapFunction) -> Outcome {
    let w = scalar("w", &a.w)?;
    let thresholds = Thresholds { epsilon: opt_scalar("epsilon", &a.epsilon)?, nu: opt_scalar("nu", &a.nu)? };
    let tail = opt_scalar("tail-from", &a.tail_from)?;
    let report = match load_subject(&a.input)? {
        Subject::System(map, _) => {
            if a.x.is_some() {
                return Err(Failure::usage("--x applies to profile inputs only"));
            }
            let n = map.components() - 1;
            if a.n.is_some_and(|given| given != n) {
                return Err(Failure::usage(format!("--n does not match the system dimension {n}")));
            }
            analyze(&map, n, &w, tail.as_ref(), &thresholds, gap)
        }
        Subject::Profile(table) => {
            if a.n.is_some_and(|given| given + 1 != table.dim) {
                return Err(Failure::usage(format!("--n does not match the profile rank {}", table.dim)));
            }
            let body = a.x.as_deref().map(parse_x).transpose()?.map(GaugeBody::linear_form).transpose();
            let body = body.map_err(|e| Failure::usage(e.to_string()))?;
            if body.as_ref().is_some_and(|b| b.dim() != table.dim) {
                return Err(Failure::usage("--x does not match the profile rank"));
            }
            analyze_profile(&table, body.as_ref(), &w, tail.as_ref(), &thresholds, gap)
        }
    }
    .map_err(Failure::compute)?;
    emit(a.out.as_deref(), &report.to_json())?;
    Ok(EXIT_OK)
}

fn compare(a: CompareArgs) -> Outcome {
    let Subject::System(map, _) = load_subject(&a.system)? else {
        return Err(Failure::usage("--system must be a system JSON file"));
    };
    let Subject::Profile(table) = load_subject(&a.profile)? else {
        return Err(Failure::usage("--profile must be a profile CSV"));
    };
    let roy = match &a.roy_constant {
        Some(r) => scalar("roy-constant", r)?,
        None => default_roy_constant(map.components() - 1),
    };
    let cmp = compare_system_profile(&map, &table, Some(&roy)).map_err(Failure::compute)?;
    let mut text = serde_json::to_string_pretty(&cmp).expect("comparison serializes");
    text.push('\n');
    emit(a.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn plot(a: PlotArgs, gap: GapFunction) -> Outcome {
    let w_flag = opt_scalar("w", &a.w)?;
    let mut spec = match load_subject(&a.input)? {
        Subject::System(map, meta) => {
            let params = meta
                .as_ref()
                .map(|m| TemplateParams::from_meta(map.components() - 1, m))
                .transpose()
                .map_err(Failure::invalid)?;
            match (a.block, params) {
                (Some(k), Some(params)) => {
                    let built = build_system(&TemplateParams { gap, ..params.clone() }).map_err(Failure::compute)?;
                    let bp = built.blocks.get(k.wrapping_sub(1)).ok_or_else(|| Failure::usage(format!("no block {k}")))?;
                    PlotSpec::for_block(&built.params, k, &bp.q_k, a.overlays).map_err(Failure::compute)?
                }
                (Some(_), None) => return Err(Failure::usage("--block needs a system file with template meta")),
                (None, params) => {
                    if a.overlays {
                        return Err(Failure::usage("--overlays needs --block"));
                    }
                    let n = map.components() - 1;
                    let w = w_flag.clone().or(params.map(|p| p.w));
                    let spec = PlotSpec::new(map);
                    match w {
                        Some(w) => spec.with_guides(n, &w),
                        None => spec,
                    }
                }
            }
        }
        Subject::Profile(table) => {
            if a.block.is_some() || a.overlays {
                return Err(Failure::usage("--block and --overlays apply to template systems"));
            }
            let map = table.interpolant().map_err(Failure::invalid)?;
            let n = table.dim - 1;
            let mut spec = PlotSpec::new(map);
            spec.markers.clear();
            match &w_flag {
                Some(w) => spec.with_guides(n, w),
                None => {
                    spec.guides = vec![(int(n as i64 + 1), "q/(n+1)".into())];
                    spec
                }
            }
        }
    };
    spec.width = a.width;
    spec.height = a.height;
    let svg = render_svg(&spec).map_err(Failure::compute)?;
    write_atomic(Path::new(&a.out), &svg)?;
    Ok(EXIT_OK)
}
