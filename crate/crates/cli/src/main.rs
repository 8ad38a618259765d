#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use sticky::config::{ComposedRates, ModelConfig};
use sticky::discretize::{generator_of, DiscreteInstance};
use sticky::numerics::log_grid;
use sticky::ratefn::{PsiTransform, RateFunction};
use sticky::semigroup::{
    check_kernel_bound, check_tail_bound, check_tt1_forward, check_xi_bound, decay_csv, decay_svg, decay_table,
    line_chart_svg,
};
use sticky::verify::{
    alpha_hat_grid, beta_hat_grid, calibrate, check_super_poincare, check_weak_poincare, with_poincare_limit,
    with_unit_floor,
};
use sticky::{mc, SpectralData};

#[derive(Parser)]
#[command(name = "sticky", about = "Functional inequalities and semigroup checks for sticky-reflected diffusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partition constants, theta and collar constants as JSON.
    ModelInfo(Common),
    /// Composed super and weak Poincaré rates on the r-grid.
    Bounds(Common),
    /// Randomized check of the super Poincaré inequality plus the beta oracle.
    VerifySp(Common),
    /// Randomized check of the weak Poincaré inequality plus the alpha oracle.
    VerifyWp(Common),
    /// Decay table and semigroup bound checks.
    Semigroup(Common),
    /// Jump-chain simulation of the occupation fraction.
    Mc(Common),
    /// Every stage above into one directory.
    Report(Common),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `a:b:n`, log-spaced.
    #[arg(long, default_value = "1e-3:10:9")]
    r_grid: String,
    /// `a:b:n`, log-spaced.
    #[arg(long, default_value = "1e-2:10:10")]
    t_grid: String,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    svg: bool,
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Trajectory length; defaults to about 10^6 expected jumps.
    #[arg(long)]
    horizon: Option<f64>,
    /// Multiplies the composed rates before checking.
    #[arg(long, default_value_t = 1.0)]
    rate_scale: f64,
}

/// Bad input (exit 2) versus a failed check (exit 1).
enum Failure {
    Config(anyhow::Error),
    Check(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.into())
    }
}

type Outcome = Result<Vec<String>, Failure>;
type Stage = fn(&Ctx) -> Outcome;

struct Ctx {
    args: Common,
    cfg: ModelConfig,
    r_grid: Vec<f64>,
    t_grid: Vec<f64>,
}

fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [a, b, n] = parts[..] else {
        bail!("grid must be a:b:n, got {spec:?}");
    };
    let (a, b): (f64, f64) = (a.parse()?, b.parse()?);
    let n: usize = n.parse()?;
    if n == 0 || !(a > 0.0) || !(b >= a) || !b.is_finite() {
        bail!("grid {spec:?} must be nonempty with 0 < a <= b");
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok(log_grid(a, b, n))
}

impl Ctx {
    fn new(args: Common) -> Result<Self, Failure> {
        let cfg = ModelConfig::from_path(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
        let r_grid = parse_grid(&args.r_grid).context("--r-grid")?;
        let t_grid = parse_grid(&args.t_grid).context("--t-grid")?;
        if args.restarts < 8 || args.trials == 0 || !(args.rate_scale > 0.0) {
            return Err(Failure::Config(anyhow!("need --restarts >= 8, --trials >= 1 and --rate-scale > 0")));
        }
        std::fs::create_dir_all(&args.out)?;
        Ok(Self { args, cfg, r_grid, t_grid })
    }

    fn write(&self, name: &str, body: &str) -> anyhow::Result<()> {
        let path = self.args.out.join(name);
        std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
    }

    fn rates(&self) -> anyhow::Result<ComposedRates> {
        let mut r = self.cfg.composed()?;
        if self.args.rate_scale != 1.0 {
            r.beta = r.beta.map(|b| b.scaled(self.args.rate_scale));
            r.alpha = r.alpha.map(|a| a.scaled(self.args.rate_scale));
        }
        Ok(r)
    }

    fn instance(&self) -> anyhow::Result<DiscreteInstance<f64>> {
        Ok(self.cfg.instance()?)
    }
}

fn json_string<S: Serialize>(value: &S) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn model_info(ctx: &Ctx) -> Outcome {
    let summary = ctx.cfg.summary()?;
    let model = ctx.cfg.model()?;
    let constants = ctx.cfg.constants().map_err(|e| e.to_string());
    let doc = json!({
        "Z_V": summary.z_v,
        "Z_W": summary.z_w_boundary,
        "theta": summary.theta,
        "collar_s0": ctx.cfg.s0()?,
        "constants": constants.as_ref().ok(),
        "constants_error": constants.as_ref().err(),
        "boundary_dimension": model.domain.boundary_dimension(),
        "warnings": model.warnings(),
    });
    let text = json_string(&doc)?;
    print!("{text}");
    ctx.write("model_info.json", &text)?;
    Ok(vec![format!("theta = {}", summary.theta)])
}

fn bounds(ctx: &Ctx) -> Outcome {
    let rates = ctx.rates()?;
    let mut csv = String::from("r,beta,alpha\n");
    let cell = |f: &Option<RateFunction<f64>>, r: f64| f.as_ref().map_or(String::new(), |f| format!("{:e}", f.eval(r)));
    for &r in &ctx.r_grid {
        let _ = writeln!(csv, "{r:e},{},{}", cell(&rates.beta, r), cell(&rates.alpha, r));
    }
    ctx.write("bounds.csv", &csv)?;
    ctx.write("rates.json", &json_string(&rates)?)?;
    let labels = rates
        .regime
        .as_ref()
        .map(|r| r.labels().iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", "))
        .unwrap_or_else(|| "unclassified".into());
    Ok(vec![
        format!("beta path {}, alpha path {}", rates.beta_path.label(), rates.alpha_path.label()),
        format!("regime: {labels}"),
    ])
}

/// Coarse calibration grid: geometric midpoints of every other pair of fine points.
fn coarse_grid(fine: &[f64]) -> Vec<f64> {
    fine.windows(2).step_by(2).map(|w| (w[0] * w[1]).sqrt()).collect()
}

fn pick(weak: bool) -> fn(&ComposedRates) -> Option<RateFunction<f64>> {
    if weak {
        |r| r.alpha.clone()
    } else {
        |r| r.beta.clone()
    }
}

fn oracle(
    ctx: &Ctx,
    inst: &DiscreteInstance<f64>,
    grid: &[f64],
    weak: bool,
) -> anyhow::Result<Vec<sticky::OracleResult>> {
    Ok(if weak {
        alpha_hat_grid(inst, grid, ctx.args.restarts, ctx.args.seed)?
    } else {
        beta_hat_grid(inst, grid, ctx.args.restarts, ctx.args.seed)?
    })
}

/// The composed rate with its constant, calibrated against oracle values on
/// the coarse grid when the config fixes none, then scaled by `--rate-scale`.
fn validated(ctx: &Ctx, inst: &DiscreteInstance<f64>, weak: bool) -> anyhow::Result<Option<(f64, RateFunction<f64>)>> {
    let pick = pick(weak);
    if pick(&ctx.cfg.composed()?).is_none() {
        return Ok(None);
    }
    let (c, rate) = match ctx.cfg.calibration {
        Some(c) => (c, pick(&ctx.cfg.composed()?).expect("checked above")),
        None => {
            let coarse: Vec<f64> = coarse_grid(&ctx.r_grid).into_iter().filter(|&r| !weak || r < 1.0).collect();
            let hat = oracle(ctx, inst, &coarse, weak)?;
            let targets: Vec<(f64, f64)> = hat.iter().map(|o| (o.r, o.value)).collect();
            let targets = if weak { with_poincare_limit(inst, &targets)? } else { with_unit_floor(&targets) };
            let family = |c: f64| -> sticky::Result<RateFunction<f64>> {
                pick(&ctx.cfg.with_calibration(c).composed()?).ok_or(sticky::Error::Unclassified)
            };
            calibrate(&family, &targets)?
        }
    };
    Ok(Some((c, rate.scaled(ctx.args.rate_scale))))
}

fn verify(ctx: &Ctx, weak: bool) -> Outcome {
    let inst = ctx.instance()?;
    let seed = ctx.args.seed;
    let fine: Vec<f64> = ctx.r_grid.iter().copied().filter(|&r| !weak || r < 1.0).collect();
    if fine.is_empty() {
        return Err(Failure::Config(anyhow!("r-grid has no point below 1")));
    }
    let name = if weak { "alpha" } else { "beta" };
    let Some((c, rate)) = validated(ctx, &inst, weak)? else {
        return Err(Failure::Config(anyhow!("the model has no composed {name}")));
    };
    let report = if weak {
        check_weak_poincare(&inst, &rate, &fine, ctx.args.trials, seed)?
    } else {
        check_super_poincare(&inst, &rate, &fine, ctx.args.trials, seed)?
    };
    let fine_hat = oracle(ctx, &inst, &fine, weak)?;
    let mut csv = format!("r,{name}_hat,multi_start_spread,{name}\n");
    let mut refuted = 0;
    for o in &fine_hat {
        let bound = rate.eval(o.r);
        if sticky::verify::violation(o.value, bound).0 {
            refuted += 1;
        }
        let _ = writeln!(csv, "{:e},{:e},{:e},{:e}", o.r, o.value, o.status.multi_start_spread, bound);
    }
    let stem = if weak { "verify_wp" } else { "verify_sp" };
    ctx.write(&format!("{stem}.csv"), &csv)?;
    ctx.write(
        &format!("{stem}.json"),
        &json_string(&json!({"calibration": c, "rate": rate, "report": report, "oracle_exceeds_bound": refuted}))?,
    )?;
    let mut lines = vec![
        format!("calibrated c = {c:e}"),
        format!(
            "{} violations in {} trials ({} checks), worst margin {:e}",
            report.violations, report.trials, report.checks, report.worst_margin
        ),
        format!("{name}_hat above the bound at {refuted} of {} points", fine_hat.len()),
    ];
    if ctx.args.svg {
        let series = vec![
            (name, "#d62728", fine_hat.iter().map(|o| (o.r, rate.eval(o.r))).collect()),
            ("oracle", "#1f77b4", fine_hat.iter().map(|o| (o.r, o.value)).collect()),
        ];
        ctx.write(&format!("{stem}.svg"), &line_chart_svg(&series))?;
    }
    if report.passed() && refuted == 0 {
        Ok(lines)
    } else {
        lines.push("verification failed".into());
        Err(Failure::Check(lines.join("\n")))
    }
}

fn semigroup(ctx: &Ctx) -> Outcome {
    let inst = ctx.instance()?;
    let spec = SpectralData::new(&inst)?;
    let beta = validated(ctx, &inst, false)?.map(|v| v.1);
    let alpha = validated(ctx, &inst, true)?.map(|v| v.1);
    let seed = ctx.args.seed;
    let rows = decay_table(&spec, alpha.as_ref(), &ctx.t_grid, 64, seed);
    ctx.write("decay.csv", &decay_csv(&rows))?;
    if ctx.args.svg {
        ctx.write("decay.svg", &decay_svg(&rows))?;
    }
    let mut lines = vec![format!("lambda_1 = {:e}", spec.gap())];
    let mut failed = false;
    let mut note = |what: &str, rep: &sticky::verify::ViolationReport| {
        failed |= !rep.passed();
        lines.push(format!("{what}: {} violations of {} checks", rep.violations, rep.checks));
    };
    let trials = ctx.args.trials;
    if let Some(beta) = &beta {
        let r5: Vec<f64> = log_grid(ctx.r_grid[0], *ctx.r_grid.last().unwrap(), 5.min(ctx.r_grid.len()).max(1));
        let t5: Vec<f64> = log_grid(ctx.t_grid[0], *ctx.t_grid.last().unwrap(), 5.min(ctx.t_grid.len()).max(1));
        note("semigroup super Poincaré bound", &check_tt1_forward(&inst, &spec, beta, &r5, &t5, trials, seed)?);
        note("tail bound", &check_tail_bound(&inst, &spec, beta, &r5, &t5, trials, seed)?);
        if PsiTransform::new(beta).is_ok() {
            note("kernel bound", &check_kernel_bound(&spec, beta, &ctx.t_grid)?);
        }
    }
    if let Some(alpha) = &alpha {
        note("xi bound", &check_xi_bound(&spec, alpha, &ctx.t_grid, 64, seed)?);
    }
    if failed {
        lines.push("verification failed".into());
        return Err(Failure::Check(lines.join("\n")));
    }
    Ok(lines)
}

fn run_mc(ctx: &Ctx) -> Outcome {
    let inst = ctx.instance()?;
    let gen = generator_of(&inst)?;
    let horizon = match ctx.args.horizon {
        Some(h) => h,
        None => 1e6 / mc::expected_jumps(&gen, &inst.m, 1.0),
    };
    let stats = mc::simulate(&gen, 0, horizon, ctx.args.seed)?;
    let theta = inst.theta();
    ctx.write("mc.csv", &mc::batches_csv(&stats))?;
    ctx.write("mc.json", &json_string(&json!({"theta": theta, "horizon": horizon, "stats": stats}))?)?;
    let z = (stats.occupation_fraction - theta).abs() / stats.standard_error;
    let line = format!(
        "occupation {:.6} vs theta {:.6} ({:.2} standard errors, {} jumps)",
        stats.occupation_fraction, theta, z, stats.jump_count
    );
    if z <= 3.0 {
        Ok(vec![line])
    } else {
        Err(Failure::Check(line))
    }
}

fn report(ctx: &Ctx) -> Outcome {
    let stages: [(&str, Stage); 6] = [
        ("model-info", model_info),
        ("bounds", bounds),
        ("verify-sp", |c| verify(c, false)),
        ("verify-wp", |c| verify(c, true)),
        ("semigroup", semigroup),
        ("mc", run_mc),
    ];
    let rates = ctx.cfg.composed()?;
    let mut lines = Vec::new();
    let mut summary = Vec::new();
    let mut failed = false;
    for (name, stage) in stages {
        let skip = (name == "verify-sp" && rates.beta.is_none()) || (name == "verify-wp" && rates.alpha.is_none());
        let (status, detail) = if skip {
            ("skipped", vec!["no composed rate".to_string()])
        } else {
            match stage(ctx) {
                Ok(l) => ("pass", l),
                Err(Failure::Check(msg)) => {
                    failed = true;
                    ("fail", vec![msg])
                }
                Err(Failure::Config(e)) => return Err(Failure::Config(e.context(name))),
            }
        };
        lines.push(format!("[{name}] {status}"));
        lines.extend(detail.iter().map(|l| format!("  {l}")));
        summary.push(json!({"stage": name, "status": status, "detail": detail}));
    }
    ctx.write("report.json", &json_string(&summary)?)?;
    if failed {
        Err(Failure::Check(lines.join("\n")))
    } else {
        Ok(lines)
    }
}

fn dispatch(cli: Cli) -> Outcome {
    let (args, f): (Common, fn(&Ctx) -> Outcome) = match cli.command {
        Command::ModelInfo(a) => (a, model_info),
        Command::Bounds(a) => (a, bounds),
        Command::VerifySp(a) => (a, |c| verify(c, false)),
        Command::VerifyWp(a) => (a, |c| verify(c, true)),
        Command::Semigroup(a) => (a, semigroup),
        Command::Mc(a) => (a, run_mc),
        Command::Report(a) => (a, report),
    };
    let ctx = Ctx::new(args)?;
    f(&ctx)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(lines) => {
            for l in lines {
                eprintln!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Check(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
