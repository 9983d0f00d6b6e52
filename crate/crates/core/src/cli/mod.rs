//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation or run failure, 2 usage error.
//! `CRSLAB_SEED` supplies the seed when `--seed` is absent.

pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::error::{Error, Result};
use crate::geometry::{affine_plane, plane_instance, random_order_instance, tightness_instance};
use crate::guarantees::{curve_values, solve_partite_alpha, solve_standard_alpha};
use crate::lp::fluid_lp;
use crate::model::{
    load_instance, random_instance, save_instance, validate, Instance, RandomInstanceParams,
};
use crate::ocrs::{
    exact_policy, mc_trials, simulate_ocrs_mc_with, MonteCarloConfig, OcrsPolicy, OcrsScheme,
};
use crate::oracles::{
    estimate_selectability, estimate_selectability_z, exhaustive_acceptance_probs,
    mean_offline_optimum, optimal_online_dp,
};
use crate::rcrs::{
    rcrs_random_element_guarantee, solve_selection_function, AttenuateGreedy, Greedy, RecursiveRcrs,
};
use crate::reduction::{
    build_relaxation_lp, load_system, online_algorithm, preprocess, OnlineContext, RecourseOracle,
    RemapOracle, TableOracle,
};
use crate::sim::Scheme;
use crate::stats::{normal_quantile_two_sided, Proportion, Z95};
use report::{opt, profile_csv, selectability_csv, sig6, write_atomic, Csv};

pub const SEED_ENV: &str = "CRSLAB_SEED";

#[derive(Parser, Debug)]
#[command(
    name = "crslab",
    version,
    about = "Contention resolution schemes for L-bounded products"
)]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated instance.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Check an instance or system document.
    Validate(ValidateArgs),
    /// Solve the fluid LP of an instance.
    Lp {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Guarantee curves and root-found constants.
    Guarantees {
        /// A single L or an inclusive range `a..b`.
        #[arg(long = "L", default_value = "2..10")]
        l: String,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run an OCRS or RCRS.
    Simulate {
        #[command(subcommand)]
        kind: SimulateKind,
    },
    /// Tabulate the selection function.
    SelectionFunction {
        #[arg(long = "L")]
        l: usize,
        #[arg(long, default_value_t = 4000)]
        grid: usize,
        #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
        out: DataFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Reduce a substitutable system to a unit-inventory instance.
    Reduce {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Simulate the online algorithm on a substitutable system.
    RunOnline(RunOnlineArgs),
    /// Reference computations.
    Oracle {
        #[command(subcommand)]
        kind: OracleKind,
    },
    /// Statistical checks with pass/fail exit codes.
    Verify {
        #[command(subcommand)]
        kind: VerifyKind,
    },
}

#[derive(Subcommand, Debug)]
enum GenerateKind {
    Tightness {
        #[arg(long = "L")]
        l: u64,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    RandomOrder {
        #[arg(long = "L")]
        l: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Plane instance with the same `x` and reward on every line.
    Plane {
        #[arg(long = "L")]
        l: u64,
        /// Defaults to 1/(1+L).
        #[arg(long)]
        x: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        reward: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    Random {
        #[arg(long = "L")]
        l: usize,
        #[arg(long, default_value_t = 8)]
        items: usize,
        #[arg(long, default_value_t = 5)]
        batches: usize,
        #[arg(long, default_value_t = 3)]
        max_batch_size: usize,
        #[arg(long)]
        tight: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(long, conflicts_with = "system", required_unless_present = "system")]
    instance: Option<PathBuf>,
    #[arg(long)]
    system: Option<PathBuf>,
    #[arg(long, default_value_t = crate::model::DEFAULT_TOL)]
    tol: f64,
}

#[derive(Subcommand, Debug)]
enum SimulateKind {
    Ocrs {
        #[arg(long)]
        instance: PathBuf,
        /// `auto`, `partite`, `baseline` or a number.
        #[arg(long, default_value = "auto")]
        alpha: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        /// Monte Carlo trials per batch; defaults to the sample-complexity formula.
        #[arg(long)]
        trials: Option<u64>,
        /// Extra sample paths for an empirical selectability estimate.
        #[arg(long, default_value_t = 0)]
        paths: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    Rcrs {
        #[arg(long, value_enum)]
        scheme: RcrsArg,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        /// Phases of the recursive scheme; defaults to ceil(4L/c(1)).
        #[arg(long = "K")]
        k: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        sub_trials: u64,
        #[arg(long, default_value_t = 4000)]
        grid: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct RunOnlineArgs {
    #[arg(long)]
    system: PathBuf,
    #[arg(long, default_value = "auto")]
    alpha: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = OracleArg::Table)]
    recourse: OracleArg,
    #[arg(long, default_value_t = 100_000)]
    paths: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum OracleKind {
    Dp {
        #[arg(long)]
        instance: PathBuf,
    },
    Offline {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        paths: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    Enumerate {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "auto")]
        alpha: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyKind {
    /// Simulates the exact-selection OCRS and checks that α lies in every
    /// per-product interval (Bonferroni-corrected 95%).
    Selectability {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value = "auto")]
        alpha: String,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TableFormat {
    Csv,
    Table,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DataFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RcrsArg {
    Attenuate,
    Recursive,
    Greedy,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleArg {
    Table,
    Remap,
}

/// What a command produced: the report, diagnostics and the exit code.
struct Outcome {
    report: String,
    output: Option<PathBuf>,
    notes: String,
    code: i32,
}

impl Outcome {
    fn ok(report: String, output: Option<PathBuf>) -> Self {
        Self {
            report,
            output,
            notes: String::new(),
            code: 0,
        }
    }

    fn note(mut self, line: impl AsRef<str>) -> Self {
        self.notes.push_str(line.as_ref());
        self.notes.push('\n');
        self
    }
}

/// Runs the CLI on `argv` (program name first) with the process streams.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_command_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_command_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::invalid("threads", "must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::pre(e.to_string()))
            .and_then(|pool| pool.install(|| execute(cli.command))),
        None => execute(cli.command),
    };
    match result.and_then(|o| deliver(o, out)) {
        Ok((notes, code)) => {
            let _ = err.write_all(notes.as_bytes());
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidArgument { .. } => 2,
                _ => 1,
            }
        }
    }
}

fn deliver(o: Outcome, out: &mut dyn Write) -> Result<(String, i32)> {
    match &o.output {
        Some(path) => write_atomic(path, &o.report)?,
        None => out.write_all(o.report.as_bytes())?,
    }
    Ok((o.notes, o.code))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::pre(format!("cannot read {}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<Instance> {
    load_instance(&read(path)?)
}

fn seed(arg: Option<u64>) -> Result<u64> {
    if let Some(s) = arg {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::invalid("seed", format!("{SEED_ENV}={v} is not an unsigned integer"))
        }),
        Err(_) => Ok(0),
    }
}

/// `auto` picks the improved constant for standard instances and
/// `1/(1+L)` otherwise; `partite` and `baseline` force a choice.
pub fn resolve_alpha(spec: &str, instance: &Instance) -> Result<f64> {
    let l = instance.l();
    let base = 1.0 / (1.0 + l as f64);
    match spec {
        "auto" if instance.is_standard() && l >= 2 => Ok(solve_standard_alpha(l)?.value()),
        "auto" | "baseline" => Ok(base),
        "partite" if l >= 2 => Ok(solve_partite_alpha(l)?.value()),
        "partite" => Ok(base),
        v => match v.parse::<f64>() {
            Ok(a) if (0.0..=1.0).contains(&a) => Ok(a),
            _ => Err(Error::invalid(
                "alpha",
                format!("`{v}` is not auto, partite, baseline or a number in [0, 1]"),
            )),
        },
    }
}

fn parse_range(spec: &str) -> Result<(usize, usize)> {
    let bad = || Error::invalid("L", format!("`{spec}` is not an integer or range a..b"));
    let (a, b) = match spec.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (spec, spec),
    };
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b < a {
        return Err(bad());
    }
    Ok((a, b))
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Generate { kind } => generate(kind),
        Command::Validate(args) => validate_cmd(args),
        Command::Lp { instance, output } => lp_cmd(&instance, output),
        Command::Guarantees { l, format, output } => guarantees_cmd(&l, format, output),
        Command::Simulate { kind } => simulate(kind),
        Command::SelectionFunction {
            l,
            grid,
            out,
            output,
        } => selection_cmd(l, grid, out, output),
        Command::Reduce { system, output } => reduce_cmd(&system, output),
        Command::RunOnline(args) => run_online_cmd(args),
        Command::Oracle { kind } => oracle_cmd(kind),
        Command::Verify { kind } => verify_cmd(kind),
    }
}

fn generate(kind: GenerateKind) -> Result<Outcome> {
    let (inst, output) = match kind {
        GenerateKind::Tightness { l, eps, output } => (tightness_instance(l, eps)?, output),
        GenerateKind::RandomOrder { l, output } => (random_order_instance(l)?, output),
        GenerateKind::Plane {
            l,
            x,
            reward,
            output,
        } => {
            let x = x.unwrap_or(1.0 / (1.0 + l as f64));
            (plane_instance(&affine_plane(l)?, |_| (x, reward))?, output)
        }
        GenerateKind::Random {
            l,
            items,
            batches,
            max_batch_size,
            tight,
            seed: s,
            output,
        } => {
            let params = RandomInstanceParams {
                l,
                num_items: items,
                num_batches: batches,
                max_batch_size,
                tight,
                seed: seed(s)?,
            };
            (random_instance(params)?, output)
        }
    };
    Ok(Outcome::ok(save_instance(&inst) + "\n", output))
}

fn validate_cmd(args: ValidateArgs) -> Result<Outcome> {
    if let Some(path) = args.system {
        return Ok(match load_system(&read(&path)?) {
            Ok(sys) => Outcome::ok(String::new(), None).note(format!(
                "ok: {} periods, {} products, {} items",
                sys.periods(),
                sys.products.len(),
                sys.items.len()
            )),
            Err(e) => Outcome {
                code: 1,
                ..Outcome::ok(String::new(), None)
            }
            .note(format!("invalid: {e}")),
        });
    }
    let path = args
        .instance
        .expect("clap enforces one of --instance/--system");
    let inst = match read_instance(&path) {
        Ok(i) => i,
        Err(e) => {
            return Ok(Outcome {
                code: 1,
                ..Outcome::ok(String::new(), None)
            }
            .note(format!("invalid: {e}")))
        }
    };
    let rep = validate(&inst, args.tol);
    let mut csv = Csv::new(&["constraint", "id", "magnitude"]);
    for v in &rep.violations {
        csv.row(vec![
            v.constraint.name().into(),
            v.id.clone(),
            sig6(v.magnitude),
        ]);
    }
    let o = Outcome {
        code: if rep.ok { 0 } else { 1 },
        ..Outcome::ok(csv.render(), None)
    };
    Ok(if rep.ok {
        o.note("ok")
    } else {
        o.note(format!("{} violations", rep.violations.len()))
    })
}

fn lp_cmd(path: &Path, output: Option<PathBuf>) -> Result<Outcome> {
    let inst = read_instance(path)?;
    let sol = fluid_lp(&inst).solve()?;
    let mut text = format!(
        "status,{}\nobjective,{}\n",
        sol.status.name(),
        sig6(sol.objective)
    );
    let mut csv = Csv::new(&["product_id", "x"]);
    for (p, v) in inst.products().iter().zip(&sol.values) {
        csv.row(vec![p.id.clone(), sig6(*v)]);
    }
    text.push_str(&csv.render());
    Ok(Outcome::ok(text, output))
}

const GUARANTEE_HEADER: [&str; 11] = [
    "L",
    "baseline",
    "offline_ub",
    "integrality_gap",
    "poisson",
    "standard_alpha",
    "standard_excess",
    "partite_alpha",
    "partite_excess",
    "rcrs_random_element",
    "rcrs_standard_integral",
];

fn guarantees_cmd(spec: &str, format: TableFormat, output: Option<PathBuf>) -> Result<Outcome> {
    let (a, b) = parse_range(spec)?;
    let mut csv = Csv::new(&GUARANTEE_HEADER);
    let mut rows = Vec::new();
    for l in a..=b {
        let g = curve_values(l)?;
        let row = vec![
            l.to_string(),
            sig6(g.baseline),
            sig6(g.offline_ub),
            sig6(g.integrality_gap),
            sig6(g.poisson),
            opt(g.standard_alpha.map(|a| a.value())),
            opt(g.standard_alpha.map(|a| a.excess)),
            opt(g.partite_alpha.map(|a| a.value())),
            opt(g.partite_alpha.map(|a| a.excess)),
            opt(g.rcrs_random_element_alpha),
            opt(g.rcrs_standard_integral),
        ];
        rows.push(row.clone());
        csv.row(row);
    }
    let text = match format {
        TableFormat::Csv => csv.render(),
        TableFormat::Table => {
            let widths: Vec<usize> = (0..GUARANTEE_HEADER.len())
                .map(|c| {
                    rows.iter()
                        .map(|r| r[c].len())
                        .chain([GUARANTEE_HEADER[c].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let mut s = String::new();
            let header: Vec<String> = GUARANTEE_HEADER.iter().map(|h| h.to_string()).collect();
            for r in std::iter::once(&header).chain(&rows) {
                let cells: Vec<String> = r
                    .iter()
                    .zip(&widths)
                    .map(|(c, &w)| format!("{c:>w$}"))
                    .collect();
                s.push_str(cells.join("  ").trim_end());
                s.push('\n');
            }
            s
        }
    };
    Ok(Outcome::ok(text, output))
}

fn with_estimate(
    base: &crate::ocrs::AcceptanceProfile,
    est: &crate::ocrs::AcceptanceProfile,
) -> crate::ocrs::AcceptanceProfile {
    let mut out = base.clone();
    for (e, s) in out.entries.iter_mut().zip(&est.entries) {
        e.ratio = s.ratio;
        e.ratio_ci = s.ratio_ci;
    }
    out
}

fn simulate(kind: SimulateKind) -> Result<Outcome> {
    match kind {
        SimulateKind::Ocrs {
            instance,
            alpha,
            mode,
            eps,
            trials,
            paths,
            seed: s,
            output,
        } => {
            let inst = read_instance(&instance)?;
            let s = seed(s)?;
            let (policy, profile, header) = match mode {
                ModeArg::Exact => {
                    let a = resolve_alpha(&alpha, &inst)?;
                    let (p, prof) = exact_policy(&inst, a)?;
                    (p, prof, format!("alpha={} mode=exact", sig6(a)))
                }
                ModeArg::Mc => {
                    if alpha != "auto" {
                        return Err(Error::invalid(
                            "alpha",
                            "Monte Carlo mode uses alpha = (1-eps)/(1+L)",
                        ));
                    }
                    let k = match trials {
                        Some(k) => k,
                        None => mc_trials(inst.l(), inst.num_batches(), inst.items().len(), eps)?,
                    };
                    let cfg = MonteCarloConfig {
                        eps,
                        trials: k,
                        seed: s,
                    };
                    let (p, prof) = simulate_ocrs_mc_with(&inst, &cfg)?;
                    let a = p.alpha;
                    (p, prof, format!("alpha={} mode=mc trials={k}", sig6(a)))
                }
            };
            let mut o;
            if paths > 0 {
                let scheme = OcrsScheme {
                    instance: &inst,
                    policy: &policy,
                };
                let est = estimate_selectability(&inst, &scheme, paths, s)?;
                let tally = crate::sim::simulate(&scheme, paths, s, crate::rng::Tag::Estimate);
                o = Outcome::ok(profile_csv(&with_estimate(&profile, &est)), output).note(&header);
                o = o.note(format!(
                    "reward={} half_width={} paths={paths}",
                    sig6(tally.mean_reward()),
                    sig6(tally.reward_half_width())
                ));
            } else {
                o = Outcome::ok(profile_csv(&profile), output).note(&header);
            }
            Ok(o.note(format!(
                "min_ratio={}",
                opt(profile_min(&profile, paths > 0))
            )))
        }
        SimulateKind::Rcrs {
            scheme,
            instance,
            paths,
            k,
            sub_trials,
            grid,
            seed: s,
            output,
        } => {
            let inst = read_instance(&instance)?;
            let s = seed(s)?;
            let (profile, note) = match scheme {
                RcrsArg::Attenuate => {
                    let sch = AttenuateGreedy::new(&inst)?;
                    let bound = rcrs_random_element_guarantee(inst.l().max(2))?;
                    (
                        run_scheme(&inst, &sch, paths, s)?,
                        format!("guarantee={}", sig6(bound)),
                    )
                }
                RcrsArg::Greedy => (
                    run_scheme(&inst, &Greedy::new(&inst)?, paths, s)?,
                    String::new(),
                ),
                RcrsArg::Recursive => {
                    let sf = solve_selection_function(inst.l().max(2), grid)?;
                    let k = k.unwrap_or((4.0 * inst.l() as f64 / sf.c_one()).ceil() as usize);
                    let sch = RecursiveRcrs::new(&inst, &sf, k, sub_trials, s)?;
                    let bound = (1.0 - inst.l() as f64 / (k as f64 * sf.c_one())) * sf.integral;
                    (
                        run_scheme(&inst, &sch, paths, s)?,
                        format!("K={k} guarantee={}", sig6(bound)),
                    )
                }
            };
            let o = Outcome::ok(selectability_csv(&profile), output)
                .note(format!("min_ratio={}", opt(profile.min_ratio())));
            Ok(if note.is_empty() { o } else { o.note(note) })
        }
    }
}

fn profile_min(p: &crate::ocrs::AcceptanceProfile, estimated: bool) -> Option<f64> {
    if estimated {
        p.min_ratio()
    } else {
        p.entries
            .iter()
            .filter(|e| e.x > 0.0)
            .filter_map(|e| e.ratio)
            .min_by(f64::total_cmp)
    }
}

fn run_scheme(
    inst: &Instance,
    scheme: &dyn Scheme,
    paths: u64,
    s: u64,
) -> Result<crate::ocrs::AcceptanceProfile> {
    estimate_selectability(inst, scheme, paths, s)
}

fn selection_cmd(
    l: usize,
    grid: usize,
    format: DataFormat,
    output: Option<PathBuf>,
) -> Result<Outcome> {
    let sf = solve_selection_function(l, grid)?;
    let text = match format {
        DataFormat::Csv => {
            let mut csv = Csv::new(&["y", "c", "S"]);
            for k in 0..sf.grid.len() {
                csv.row(vec![
                    sig6(sf.grid[k]),
                    sig6(sf.c_values[k]),
                    sig6(sf.s_values[k]),
                ]);
            }
            csv.render()
        }
        DataFormat::Json => {
            let doc = json!({
                "L": l,
                "grid": grid,
                "integral": sf.integral,
                "c_one": sf.c_one(),
                "residual": sf.residual,
                "y": sf.grid,
                "c": sf.c_values,
                "S": sf.s_values,
            });
            serde_json::to_string_pretty(&doc).expect("json") + "\n"
        }
    };
    Ok(Outcome::ok(text, output).note(format!(
        "integral={} c(1)={} residual={:e}",
        sig6(sf.integral),
        sig6(sf.c_one()),
        sf.residual
    )))
}

fn reduce_cmd(path: &Path, output: Option<PathBuf>) -> Result<Outcome> {
    let sys = load_system(&read(path)?)?;
    let lp = build_relaxation_lp(&sys).solve()?;
    let red = preprocess(&sys, &lp)?;
    let rep = validate(&red.instance, crate::model::DEFAULT_TOL);
    let inst: serde_json::Value =
        serde_json::from_str(&save_instance(&red.instance)).expect("instance json");
    let mapping: Vec<_> = red
        .mapping
        .iter()
        .map(|c| json!({"copy_id": c.copy_id, "product_id": sys.products[c.product].id, "period": c.period}))
        .collect();
    let doc = json!({
        "lp_value": red.lp_value,
        "valid": rep.ok,
        "dummies": red.dummies,
        "mapping": mapping,
        "instance": inst,
    });
    let o = Outcome::ok(
        serde_json::to_string_pretty(&doc).expect("json") + "\n",
        output,
    );
    Ok(if rep.ok {
        o
    } else {
        Outcome { code: 1, ..o }.note("reduced instance fails validation")
    })
}

fn run_online_cmd(args: RunOnlineArgs) -> Result<Outcome> {
    let sys = load_system(&read(&args.system)?)?;
    let s = seed(args.seed)?;
    let lp = build_relaxation_lp(&sys).solve()?;
    let red = preprocess(&sys, &lp)?;
    let policy: OcrsPolicy = match args.mode {
        ModeArg::Exact => {
            exact_policy(&red.instance, resolve_alpha(&args.alpha, &red.instance)?)?.0
        }
        ModeArg::Mc => {
            let cfg = MonteCarloConfig::for_instance(&red.instance, args.eps, s)?;
            simulate_ocrs_mc_with(&red.instance, &cfg)?.0
        }
    };
    let oracle: &dyn RecourseOracle = match args.recourse {
        OracleArg::Table => &TableOracle,
        OracleArg::Remap => &RemapOracle,
    };
    let ctx = OnlineContext {
        system: &sys,
        reduction: &red,
        policy: &policy,
        oracle,
    };
    let rep = online_algorithm(&ctx, args.paths, s)?;
    let mut csv = Csv::new(&[
        "copy_id",
        "product_id",
        "period",
        "x",
        "target",
        "sale_freq",
        "ci_lo",
        "ci_hi",
    ]);
    for (c, info) in red.mapping.iter().enumerate() {
        let prop = Proportion::new(rep.copy_sales[c], rep.paths);
        let ci = prop.wilson(Z95);
        let x = red.instance.products()[c].active_prob;
        csv.row(vec![
            info.copy_id.clone(),
            sys.products[info.product].id.clone(),
            info.period.to_string(),
            sig6(x),
            sig6(policy.alpha * x),
            opt(prop.estimate()),
            opt(ci.map(|c| c.0)),
            opt(ci.map(|c| c.1)),
        ]);
    }
    Ok(Outcome::ok(csv.render(), args.output).note(format!(
        "alpha={} lp={} reward={} half_width={} alpha_lp={}",
        sig6(policy.alpha),
        sig6(rep.lp_value),
        sig6(rep.mean_reward),
        sig6(rep.reward_half_width),
        sig6(policy.alpha * rep.lp_value)
    )))
}

fn oracle_cmd(kind: OracleKind) -> Result<Outcome> {
    match kind {
        OracleKind::Dp { instance } => {
            let inst = read_instance(&instance)?;
            let dp = optimal_online_dp(&inst)?;
            let lp = fluid_lp(&inst).solve()?.objective;
            let mut csv = Csv::new(&["value", "lp", "ratio"]);
            csv.row(vec![
                sig6(dp.value),
                sig6(lp),
                sig6(if lp > 0.0 { dp.value / lp } else { f64::NAN }),
            ]);
            Ok(Outcome::ok(csv.render(), None))
        }
        OracleKind::Offline {
            instance,
            paths,
            seed: s,
        } => {
            let inst = read_instance(&instance)?;
            let (mean, hw) = mean_offline_optimum(&inst, paths, seed(s)?)?;
            let lp = fluid_lp(&inst).solve()?.objective;
            let mut csv = Csv::new(&["mean", "half_width", "lp", "ratio"]);
            csv.row(vec![
                sig6(mean),
                sig6(hw),
                sig6(lp),
                sig6(if lp > 0.0 { mean / lp } else { f64::NAN }),
            ]);
            Ok(Outcome::ok(csv.render(), None))
        }
        OracleKind::Enumerate {
            instance,
            alpha,
            output,
        } => {
            let inst = read_instance(&instance)?;
            let a = resolve_alpha(&alpha, &inst)?;
            let (policy, _) = exact_policy(&inst, a)?;
            let prof = exhaustive_acceptance_probs(&inst, &policy)?;
            Ok(Outcome::ok(profile_csv(&prof), output).note(format!("alpha={}", sig6(a))))
        }
    }
}

fn verify_cmd(kind: VerifyKind) -> Result<Outcome> {
    match kind {
        VerifyKind::Selectability {
            instance,
            alpha,
            paths,
            seed: s,
            output,
        } => {
            let inst = read_instance(&instance)?;
            let a = resolve_alpha(&alpha, &inst)?;
            let (policy, exact) = exact_policy(&inst, a)?;
            let tested = inst
                .products()
                .iter()
                .filter(|p| p.active_prob > 0.0)
                .count()
                .max(1);
            let z = normal_quantile_two_sided(0.05 / tested as f64);
            let scheme = OcrsScheme {
                instance: &inst,
                policy: &policy,
            };
            let est = estimate_selectability_z(&inst, &scheme, paths, seed(s)?, z)?;
            let misses: Vec<&str> = est
                .entries
                .iter()
                .filter(|e| matches!(e.ratio_ci, Some((lo, hi)) if a < lo || a > hi))
                .map(|e| e.id.as_str())
                .collect();
            let capped = exact.any_capped();
            let pass = misses.is_empty() && !capped;
            let mut o = Outcome {
                code: if pass { 0 } else { 1 },
                ..Outcome::ok(selectability_csv(&est), output)
            }
            .note(format!("alpha={} z={} paths={paths}", sig6(a), sig6(z)));
            if capped {
                o = o.note("cap engaged: some product has feasibility probability below alpha");
            }
            if !misses.is_empty() {
                o = o.note(format!("alpha outside interval for: {}", misses.join(" ")));
            }
            Ok(o.note(if pass { "PASS" } else { "FAIL" }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("crslab").chain(args.iter().copied());
        let code = run_command_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(&["guarantees", "--bogus"]).0, 2);
        assert_eq!(run(&[]).0, 2);
        assert_eq!(run(&["guarantees", "--L", "x"]).0, 2);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn guarantees_rows() {
        let (code, out, _) = run(&["guarantees", "--L", "2..5"]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 5);
        assert!(lines[0].starts_with("L,baseline,offline_ub,integrality_gap,poisson"));
        assert!(
            lines[1].starts_with("2,0.333333,0.481481,0.666667,"),
            "{}",
            lines[1]
        );
        let (_, table, _) = run(&["guarantees", "--L", "2", "--format", "table"]);
        assert_eq!(table.lines().count(), 2);
    }

    #[test]
    fn alpha_rules() {
        let inst = tightness_instance(2, 0.1).unwrap();
        assert_eq!(resolve_alpha("auto", &inst).unwrap(), 1.0 / 3.0);
        assert_eq!(resolve_alpha("0.25", &inst).unwrap(), 0.25);
        assert!(resolve_alpha("2", &inst).is_err());
        assert!(resolve_alpha("partite", &inst).unwrap() > 1.0 / 3.0);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2..10").unwrap(), (2, 10));
        assert_eq!(parse_range("3").unwrap(), (3, 3));
        assert_eq!(parse_range("2..=4").unwrap(), (2, 4));
        assert!(parse_range("5..2").is_err());
    }
}
