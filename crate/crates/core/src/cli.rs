//! Command-line front end.
//!
//! Exit codes: 0 ok or feasible, 1 input error, 2 infeasible or axiom
//! failure, 3 forced run that did not converge.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::axioms::{check_all, AxiomReport, CheckConfig, DEFAULT_SAMPLES};
use crate::capacity::{
    compare_regions, export_cloud, export_inequalities, sample_region, Predicate, RegionSpec, Relation,
};
use crate::config::{region_predicate, ScenarioConfig};
use crate::engine::{contraction_modulus, export_trace, solve, SolveConfig};
use crate::error::{Error, Result};
use crate::rules::{squared_l1, HolderExponent, HolderNorm, NormOfNorms, VectorFn, WeightedAbsSum};
use crate::scenarios::{McComparison, Model};
use crate::types::{FeasibilityReport, PowerVector};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "powcap", version, about = "Power-control feasibility, fixed points and capacity regions")]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Contraction certificate for a scenario.
    Check { config: PathBuf },
    /// Fixed point by successive approximation.
    Solve {
        config: PathBuf,
        /// Write the iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Iterate even when the system is not certified.
        #[arg(long)]
        force: bool,
        /// Start point: one value for every terminal, or a comma-separated vector.
        #[arg(long, value_name = "P")]
        init: Option<String>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        max_iter: Option<usize>,
    },
    /// Sample the capacity region on a grid.
    Region {
        config: PathBuf,
        #[arg(long, default_value_t = 41)]
        resolution: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        compare: Option<Baseline>,
        /// Receiver count for the baseline; defaults to the scenario's.
        #[arg(long)]
        hanly_k: Option<usize>,
        /// Upper grid bound per axis; defaults to the receiver count.
        #[arg(long)]
        alpha_max: Option<f64>,
        /// Allow grids above four terminals.
        #[arg(long)]
        force_dim: bool,
        /// Write the region's linear inequalities as CSV.
        #[arg(long)]
        inequalities: Option<PathBuf>,
    },
    /// Test a built-in function family against the quasi-semi-normal axioms.
    Axioms {
        /// holder:P | weighted:A1,A2,... | norm-of-norms:FILE | squared-l1
        #[arg(long)]
        function: String,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    Hanly,
}

/// Parses `args` (including the program name) and runs one command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Check { config } => cmd_check(config, cli.json, out),
        Command::Solve { config, trace, force, init, tolerance, max_iter } => {
            let opts = SolveOpts {
                trace: trace.as_deref(),
                force: *force,
                init: init.as_deref(),
                tolerance: *tolerance,
                max_iter: *max_iter,
            };
            cmd_solve(config, &opts, cli.json, out, err)
        }
        Command::Region { config, resolution, out: path, compare, hanly_k, alpha_max, force_dim, inequalities } => {
            let opts = RegionOpts {
                resolution: *resolution,
                out: path.as_deref(),
                compare: *compare,
                hanly_k: *hanly_k,
                alpha_max: *alpha_max,
                force_dim: *force_dim,
                inequalities: inequalities.as_deref(),
            };
            cmd_region(config, &opts, cli.json, out)
        }
        Command::Axioms { function, dim, seed, samples } => cmd_axioms(function, *dim, *seed, *samples, cli.json, out),
    }
}

fn io(e: std::io::Error) -> Error {
    Error::Io { path: PathBuf::from("<stdout>"), source: e }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))?;
    writeln!(out, "{text}").map_err(io)
}

fn load(config: &Path) -> Result<(ScenarioConfig, Model)> {
    let cfg = ScenarioConfig::load(config)?;
    let model = cfg.to_model()?;
    Ok((cfg, model))
}

/// Twelve significant digits, printed without trailing zeros.
pub fn sig12(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    format!("{rounded}")
}

fn verdict_code(feasible: bool) -> i32 {
    if feasible {
        EXIT_OK
    } else {
        EXIT_INFEASIBLE
    }
}

#[derive(Serialize)]
struct CheckOutput<'a> {
    model: &'a Model,
    report: &'a FeasibilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    multi_connection: Option<McComparison>,
}

pub fn cmd_check(config: &Path, json: bool, out: &mut dyn Write) -> Result<i32> {
    let (_, model) = load(config)?;
    let sys = model.build()?;
    let report = contraction_modulus(&sys)?;
    let mc = match &model {
        Model::McExact(m) | Model::McBounded(m) => Some(McComparison::new(m)),
        _ => None,
    };
    if json {
        emit_json(out, &CheckOutput { model: &model, report: &report, multi_connection: mc })?;
    } else {
        writeln!(out, "coordinates: {}", model.coordinates()).map_err(io)?;
        writeln!(out, "{report}").map_err(io)?;
        if let Some(c) = mc {
            writeln!(out, "exact condition:   lambda = {} ({})", c.exact.lambda, feasible_word(c.exact.feasible))
                .map_err(io)?;
            writeln!(out, "bounded condition: lambda = {} ({})", c.bounded.lambda, feasible_word(c.bounded.feasible))
                .map_err(io)?;
            if !c.agree() {
                writeln!(out, "note: the exact and bounded conditions disagree").map_err(io)?;
            }
        }
    }
    Ok(verdict_code(report.feasible))
}

fn feasible_word(f: bool) -> &'static str {
    if f {
        "feasible"
    } else {
        "infeasible"
    }
}

pub struct SolveOpts<'a> {
    pub trace: Option<&'a Path>,
    pub force: bool,
    pub init: Option<&'a str>,
    pub tolerance: Option<f64>,
    pub max_iter: Option<usize>,
}

fn parse_init(text: &str, n: usize) -> Result<PowerVector> {
    let vals = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::invalid(format!("--init: cannot parse {s:?}"))))
        .collect::<Result<Vec<_>>>()?;
    let vals = match vals.len() {
        1 => vec![vals[0]; n],
        m if m == n => vals,
        m => return Err(Error::Dimension { expected: n, got: m }),
    };
    PowerVector::new(vals)
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    coordinates: &'static str,
    power: &'a [f64],
    iterations: usize,
    residual: f64,
    certified: bool,
    report: &'a FeasibilityReport,
}

pub fn cmd_solve(config: &Path, opts: &SolveOpts, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (cfg, model) = load(config)?;
    let sys = model.build()?;
    let mut sc: SolveConfig = cfg.solve_config()?;
    if let Some(t) = opts.tolerance {
        sc.tolerance = t;
    }
    if let Some(m) = opts.max_iter {
        sc.max_iter = m;
    }
    if let Some(text) = opts.init {
        sc.initial = Some(parse_init(text, sys.len())?);
    }
    sc.force = opts.force;
    let report = contraction_modulus(&sys)?;
    if !report.feasible && !opts.force {
        if json {
            emit_json(out, &report)?;
        } else {
            writeln!(out, "{report}").map_err(io)?;
            writeln!(out, "not iterating: no contraction certificate (use --force to override)").map_err(io)?;
        }
        return Ok(EXIT_INFEASIBLE);
    }
    match solve(&sys, &sc) {
        Ok(sol) => {
            if let Some(path) = opts.trace {
                export_trace(&sol.trace, path)?;
            }
            let residual = sys.residual(&sol.power)?;
            if json {
                emit_json(
                    out,
                    &SolveOutput {
                        coordinates: model.coordinates(),
                        power: &sol.power,
                        iterations: sol.trace.iterations_used,
                        residual,
                        certified: sol.trace.certified,
                        report: &sol.report,
                    },
                )?;
            } else {
                writeln!(out, "coordinates: {}", model.coordinates()).map_err(io)?;
                let parts: Vec<String> = sol.power.iter().map(|v| sig12(*v)).collect();
                writeln!(out, "p* = ({})", parts.join(", ")).map_err(io)?;
                writeln!(out, "iterations: {}", sol.trace.iterations_used).map_err(io)?;
                writeln!(out, "residual: {residual:e}").map_err(io)?;
                if !sol.trace.certified {
                    writeln!(out, "warning: uncertified run (lambda = {})", sol.report.lambda).map_err(io)?;
                }
            }
            Ok(verdict_code(sol.report.feasible))
        }
        Err(Error::NonConvergence { trace }) => {
            if let Some(path) = opts.trace {
                export_trace(&trace, path)?;
            }
            let last = trace.deltas.last().copied().unwrap_or(f64::NAN);
            writeln!(
                err,
                "no convergence after {} iterations (last delta {last:e}){}",
                trace.iterations_used,
                if trace.certified { "" } else { "; run was uncertified" }
            )
            .map_err(io)?;
            if json {
                emit_json(out, &*trace)?;
            }
            Ok(EXIT_NO_CONVERGENCE)
        }
        Err(e) => Err(e),
    }
}

pub struct RegionOpts<'a> {
    pub resolution: usize,
    pub out: Option<&'a Path>,
    pub compare: Option<Baseline>,
    pub hanly_k: Option<usize>,
    pub alpha_max: Option<f64>,
    pub force_dim: bool,
    pub inequalities: Option<&'a Path>,
}

#[derive(Serialize)]
struct RegionOutput {
    predicate: String,
    points: usize,
    feasible: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<ComparisonOutput>,
}

#[derive(Serialize)]
struct ComparisonOutput {
    baseline: String,
    relation: Relation,
    statement: String,
    scenario_only: Option<Vec<f64>>,
    baseline_only: Option<Vec<f64>>,
    scenario_only_count: usize,
    baseline_only_count: usize,
    witnesses_verified: bool,
}

pub fn cmd_region(config: &Path, opts: &RegionOpts, json: bool, out: &mut dyn Write) -> Result<i32> {
    let (_, model) = load(config)?;
    let predicate = region_predicate(&model);
    let n = model.alphas().len();
    let k = model.receivers();
    let alpha_max = opts.alpha_max.unwrap_or(k as f64);
    let mut spec = RegionSpec::new(predicate.clone(), n, alpha_max, opts.resolution)?;
    spec.allow_large = opts.force_dim;
    let cloud = sample_region(&spec)?;
    if let Some(path) = opts.out {
        export_cloud(&cloud, path)?;
    }
    if let Some(path) = opts.inequalities {
        export_inequalities(&predicate, n, path)?;
    }
    let comparison = match opts.compare {
        None => None,
        Some(Baseline::Hanly) => {
            let hk = opts.hanly_k.unwrap_or(k);
            let base = Predicate::Hanly { receivers: hk };
            let mut bspec = RegionSpec::new(base.clone(), n, alpha_max, opts.resolution)?;
            bspec.allow_large = opts.force_dim;
            let bcloud = sample_region(&bspec)?;
            let c = compare_regions(&cloud, &bcloud)?;
            // re-evaluate witnesses rather than trusting the grid flags
            let verified = c.a_only.iter().all(|w| predicate.feasible(w) && !base.feasible(w))
                && c.b_only.iter().all(|w| !predicate.feasible(w) && base.feasible(w));
            let statement = match c.relation {
                Relation::Equal => format!("scenario = {base}"),
                Relation::ASubsetB => format!("scenario ⊂ {base}"),
                Relation::BSubsetA => format!("{base} ⊂ scenario"),
                Relation::Incomparable => "incomparable".to_string(),
            };
            Some(ComparisonOutput {
                baseline: base.to_string(),
                relation: c.relation,
                statement,
                scenario_only: c.a_only,
                baseline_only: c.b_only,
                scenario_only_count: c.a_only_count,
                baseline_only_count: c.b_only_count,
                witnesses_verified: verified,
            })
        }
    };
    let summary = RegionOutput {
        predicate: predicate.to_string(),
        points: cloud.len(),
        feasible: cloud.feasible_count(),
        comparison,
    };
    if json {
        emit_json(out, &summary)?;
    } else {
        writeln!(out, "predicate: {}", summary.predicate).map_err(io)?;
        writeln!(out, "grid: {n} axes, {} values on [0, {alpha_max}]", opts.resolution).map_err(io)?;
        writeln!(out, "points: {} ({} feasible)", summary.points, summary.feasible).map_err(io)?;
        if let Some(c) = &summary.comparison {
            writeln!(out, "relation: {}", c.statement).map_err(io)?;
            if let Some(w) = &c.scenario_only {
                writeln!(out, "witness in scenario only: {} ({} points)", fmt_point(w), c.scenario_only_count)
                    .map_err(io)?;
            }
            if let Some(w) = &c.baseline_only {
                writeln!(out, "witness in {} only: {} ({} points)", c.baseline, fmt_point(w), c.baseline_only_count)
                    .map_err(io)?;
            }
            if !c.witnesses_verified {
                writeln!(out, "warning: a witness failed re-evaluation").map_err(io)?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
    format!("({})", parts.join(", "))
}

/// Parses a function spec into a boxed function of the requested dimension.
pub fn parse_function(spec: &str, dim: Option<usize>) -> Result<Box<dyn VectorFn>> {
    let (family, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let need_dim = || dim.ok_or_else(|| Error::invalid(format!("--dim is required for {family}")));
    let check_dim = |got: usize| match dim {
        Some(d) if d != got => Err(Error::Dimension { expected: d, got }),
        _ => Ok(()),
    };
    let f: Box<dyn VectorFn> = match family {
        "holder" => {
            let p: HolderExponent = arg.parse()?;
            Box::new(HolderNorm::new(p, need_dim()?))
        }
        "weighted" => {
            let w = arg
                .split(',')
                .map(|s| s.trim().parse::<f64>().map_err(|_| Error::invalid(format!("bad weight {s:?}"))))
                .collect::<Result<Vec<_>>>()?;
            check_dim(w.len())?;
            Box::new(WeightedAbsSum::new(w)?)
        }
        "norm-of-norms" => {
            let path = Path::new(arg);
            let text =
                std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
            let f: NormOfNorms =
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            check_dim(f.dim())?;
            Box::new(f)
        }
        "squared-l1" => Box::new(squared_l1(need_dim()?)),
        other => return Err(Error::invalid(format!("unknown function family {other:?}"))),
    };
    if f.dim() == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    Ok(f)
}

pub fn cmd_axioms(
    function: &str,
    dim: Option<usize>,
    seed: u64,
    samples: usize,
    json: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let f = parse_function(function, dim)?;
    let cfg = CheckConfig::new(samples, seed)?;
    let report: AxiomReport = check_all(f.as_ref(), &cfg)?;
    if json {
        emit_json(out, &report)?;
    } else {
        writeln!(out, "function: {function} (dim {})", f.dim()).map_err(io)?;
        writeln!(out, "{report}").map_err(io)?;
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_INFEASIBLE })
}
