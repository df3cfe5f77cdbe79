//! Command-line experiment runner.
//!
//! Every invocation is `reserve-lab <command> [flags]`; the full configuration
//! (minus `--threads`, which must never change results) is echoed inside the
//! artifact so any output file doubles as a reproduction recipe via
//! `--config`. Artifacts are UTF-8 with LF endings and are byte-identical for
//! identical configurations.

use std::fs;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::curve::{self, monopoly};
use crate::dist::Dist;
use crate::error::{ModelError, Result};
use crate::eval::{self, Benchmark, Threads};
use crate::info::{self, PairKind};
use crate::strategy::Strategy;

pub const CSV_VERSION: &str = "reserve-lab csv v1";

/// Everything a command needs, JSON-serializable for `--config` and for the
/// artifact echo. Thread count is deliberately not part of the configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<Dist>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Epsilon targets: the sweep visits all of them; pair commands take one.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub epsilons: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub benchmark: Option<Benchmark>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

impl ExperimentConfig {
    fn new(command: &str) -> Self {
        ExperimentConfig {
            command: command.into(),
            distribution: None,
            strategy: None,
            m: None,
            trials: None,
            seed: 0,
            epsilons: Vec::new(),
            delta: None,
            epsilon0: None,
            alpha: None,
            kind: None,
            lemma: None,
            grid: None,
            c_grid: None,
            benchmark: None,
            confidence: None,
            output: None,
            format: None,
        }
    }
}

pub fn usage() -> String {
    "\
reserve-lab <command> [flags]

commands
  eval          expected revenue of a strategy vs a benchmark
  sweep         least batch size reaching ratio 1-eps, per eps target
  curve-dump    revenue curve q, v(q), q*v(q) plus the optimum
  scaled-curve  exact ratio of the scaled single-sample rule over a c grid
  lemma-check   revenue-gap margins on a grid (exit 3 if any < -1e-9)
  lb-pair       hard distribution pair with KL sums and price components
  classify      likelihood-ratio classifier experiment on a hard pair

flags
  --dist SPEC        exp:RATE | uni:LO:HI | er | pm:V | texp:KNEE:PLATEAU |
                     gp:SHAPE:SCALE | mix:GAMMA | genlb:DELTA:EPS:WHICH |
                     reglb:EPS0:WHICH | mhrlb:EPS0:WHICH | inline JSON | @file
  --strategy SPEC    er | guarded:C | identity | scaled:C | fixed:P |
                     inline JSON | @file
  --m N              batch size (eval; classify sample count)
  --trials N         Monte-Carlo trials
  --seed N           root seed (default 0)
  --eps LIST         comma-separated epsilon targets
  --delta X          general pair spacing parameter (atoms reach 1/delta)
  --epsilon0 X       step parameter of the mhr pair
  --alpha X          strong-regularity constant for lemma-check
  --kind K           pair kind: general | regular | mhr
  --lemma L          mhr-quadratic | streg-quadratic | postpeak
  --grid N           grid points (default 1000)
  --c-grid SPEC      LO:HI:STEP or comma list (default 0:1:0.01)
  --benchmark B      monopoly | restricted:DELTA (default monopoly)
  --confidence X     sweep acceptance confidence (default 0.95)
  --config PATH      load an ExperimentConfig JSON; flags override it
  --output PATH      write the artifact to a file instead of stdout
  --format F         json (default) | csv
  --threads N        worker threads (never changes results)
"
    .into()
}

/// Parse a distribution spec: shorthand, inline JSON, or `@file` JSON.
pub fn parse_dist_spec(spec: &str) -> Result<Dist> {
    let d: Dist = if let Some(path) = spec.strip_prefix('@') {
        serde_json::from_str(&fs::read_to_string(path)?)?
    } else if spec.trim_start().starts_with('{') {
        serde_json::from_str(spec)?
    } else {
        shorthand_dist(spec)?
    };
    d.validate()?;
    Ok(d)
}

fn shorthand_dist(spec: &str) -> Result<Dist> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || ModelError::Usage(format!("malformed distribution spec '{spec}'"));
    let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
    let which = |s: &str| s.parse::<u8>().map_err(|_| bad());
    let d = match (parts[0], parts.len()) {
        ("er", 1) => Dist::EqualRevenue,
        ("exp", 2) => Dist::Exponential { rate: num(parts[1])? },
        ("uni", 3) => Dist::UniformInterval { lo: num(parts[1])?, hi: num(parts[2])? },
        ("pm", 2) => Dist::PointMass { value: num(parts[1])? },
        ("gp", 3) => Dist::GeneralizedPareto { shape: num(parts[1])?, scale: num(parts[2])? },
        ("texp", 3) => Dist::TruncatedExponential {
            knee_quantile: num(parts[1])?,
            plateau_width: num(parts[2])?,
        },
        ("mix", 2) => Dist::ExpMixture { gamma: num(parts[1])? },
        ("genlb", 4) => Dist::GeneralLbMember {
            delta: num(parts[1])?,
            epsilon: num(parts[2])?,
            which: which(parts[3])?,
        },
        ("reglb", 3) => {
            Dist::RegularLbMember { epsilon0: num(parts[1])?, which: which(parts[2])? }
        }
        ("mhrlb", 3) => {
            Dist::MhrLbMember { epsilon0: num(parts[1])?, which: which(parts[2])? }
        }
        (family, _) => {
            return Err(ModelError::Usage(format!(
                "unknown distribution family '{family}' in '{spec}'"
            )));
        }
    };
    Ok(d)
}

/// Parse a strategy spec: shorthand, inline JSON, or `@file` JSON.
pub fn parse_strategy_spec(spec: &str) -> Result<Strategy> {
    let s: Strategy = if let Some(path) = spec.strip_prefix('@') {
        serde_json::from_str(&fs::read_to_string(path)?)?
    } else if spec.trim_start().starts_with('{') {
        serde_json::from_str(spec)?
    } else {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || ModelError::Usage(format!("malformed strategy spec '{spec}'"));
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
        match (parts[0], parts.len()) {
            ("er", 1) => Strategy::EmpiricalReserve,
            ("guarded", 2) => Strategy::GuardedEmpiricalReserve { guard: num(parts[1])? },
            ("identity", 1) => Strategy::Identity,
            ("scaled", 2) => Strategy::Scaled { factor: num(parts[1])? },
            ("fixed", 2) => Strategy::Fixed { price: num(parts[1])? },
            (kind, _) => {
                return Err(ModelError::Usage(format!(
                    "unknown strategy '{kind}' in '{spec}'"
                )));
            }
        }
    };
    s.validate()?;
    Ok(s)
}

fn parse_benchmark(spec: &str) -> Result<Benchmark> {
    if spec == "monopoly" {
        return Ok(Benchmark::Monopoly);
    }
    if let Some(d) = spec.strip_prefix("restricted:") {
        let delta = d
            .parse::<f64>()
            .map_err(|_| ModelError::Usage(format!("malformed benchmark '{spec}'")))?;
        return Ok(Benchmark::Restricted { delta });
    }
    Err(ModelError::Usage(format!("unknown benchmark '{spec}'")))
}

/// `LO:HI:STEP` inclusive range (endpoints snapped) or a comma list.
pub fn parse_value_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || ModelError::Usage(format!("malformed grid spec '{spec}'"));
    let nums = |parts: &[&str]| -> Result<Vec<f64>> {
        parts.iter().map(|p| p.parse::<f64>().map_err(|_| bad())).collect()
    };
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let v = nums(&parts)?;
        let (lo, hi, step) = (v[0], v[1], v[2]);
        if !(step > 0.0 && hi >= lo) {
            return Err(bad());
        }
        let n = ((hi - lo) / step).round() as usize;
        let mut grid: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
        if let Some(last) = grid.last_mut() {
            if (*last - hi).abs() < 1e-9 {
                *last = hi;
            }
        }
        return Ok(grid);
    }
    nums(&spec.split(',').collect::<Vec<_>>())
}

fn parse_eps_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|p| {
            p.parse::<f64>()
                .map_err(|_| ModelError::Usage(format!("malformed epsilon list '{spec}'")))
        })
        .collect()
}

const COMMANDS: [&str; 7] =
    ["eval", "sweep", "curve-dump", "scaled-curve", "lemma-check", "lb-pair", "classify"];

/// Parse `<command> [flags]` into a configuration plus the thread request,
/// which stays outside the configuration on purpose.
pub fn parse_args(args: &[String]) -> Result<(ExperimentConfig, Threads)> {
    let command = args
        .first()
        .ok_or_else(|| ModelError::Usage("missing command; try --help".into()))?;
    if !COMMANDS.contains(&command.as_str()) {
        return Err(ModelError::Usage(format!(
            "unknown command '{command}'; expected one of {}",
            COMMANDS.join(", ")
        )));
    }
    let mut cfg = ExperimentConfig::new(command);
    let mut threads: Threads = None;
    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        let mut value = || {
            it.next()
                .map(|s| s.as_str())
                .ok_or_else(|| ModelError::Usage(format!("flag {flag} needs a value")))
        };
        match flag.as_str() {
            "--config" => {
                let loaded: ExperimentConfig = serde_json::from_str(&fs::read_to_string(
                    value()?,
                )?)?;
                // the positional command always wins over the file's
                let command = cfg.command.clone();
                cfg = loaded;
                cfg.command = command;
            }
            "--dist" => cfg.distribution = Some(parse_dist_spec(value()?)?),
            "--strategy" => cfg.strategy = Some(parse_strategy_spec(value()?)?),
            "--m" => cfg.m = Some(parse_int(value()?, flag)?),
            "--trials" => cfg.trials = Some(parse_int(value()?, flag)?),
            "--seed" => cfg.seed = parse_int(value()?, flag)?,
            "--eps" => cfg.epsilons = parse_eps_list(value()?)?,
            "--delta" => cfg.delta = Some(parse_float(value()?, flag)?),
            "--epsilon0" => cfg.epsilon0 = Some(parse_float(value()?, flag)?),
            "--alpha" => cfg.alpha = Some(parse_float(value()?, flag)?),
            "--kind" => cfg.kind = Some(value()?.to_string()),
            "--lemma" => cfg.lemma = Some(value()?.to_string()),
            "--grid" => cfg.grid = Some(parse_int(value()?, flag)? as usize),
            "--c-grid" => cfg.c_grid = Some(value()?.to_string()),
            "--benchmark" => cfg.benchmark = Some(parse_benchmark(value()?)?),
            "--confidence" => cfg.confidence = Some(parse_float(value()?, flag)?),
            "--output" => cfg.output = Some(value()?.to_string()),
            "--format" => {
                let f = value()?.to_string();
                if f != "json" && f != "csv" {
                    return Err(ModelError::Usage(format!("unknown format '{f}'")));
                }
                cfg.format = Some(f);
            }
            "--threads" => threads = Some(parse_int(value()?, flag)? as usize),
            other => {
                return Err(ModelError::Usage(format!("unknown flag '{other}'")));
            }
        }
    }
    Ok((cfg, threads))
}

fn parse_int(s: &str, flag: &str) -> Result<u64> {
    s.parse::<u64>()
        .map_err(|_| ModelError::Usage(format!("{flag} expects a non-negative integer, got '{s}'")))
}

fn parse_float(s: &str, flag: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| ModelError::Usage(format!("{flag} expects a number, got '{s}'")))
}

/// What `run` hands back: the finished artifact plus an optional failed
/// numerical check that should flip the exit status to 3 after the artifact
/// is written.
pub struct RunOutcome {
    pub artifact: String,
    pub summary: String,
    pub assertion_failure: Option<String>,
}

struct CsvTable {
    columns: &'static str,
    rows: Vec<String>,
}

fn require<T: Clone>(opt: &Option<T>, what: &str, cmd: &str) -> Result<T> {
    opt.clone().ok_or_else(|| ModelError::Usage(format!("{cmd} needs {what}")))
}

/// Execute a parsed configuration and assemble the artifact.
pub fn run(cfg: &ExperimentConfig, threads: Threads) -> Result<RunOutcome> {
    let (result, table, summary, failure) = match cfg.command.as_str() {
        "eval" => cmd_eval(cfg, threads)?,
        "sweep" => cmd_sweep(cfg, threads)?,
        "curve-dump" => cmd_curve_dump(cfg)?,
        "scaled-curve" => cmd_scaled_curve(cfg)?,
        "lemma-check" => cmd_lemma_check(cfg)?,
        "lb-pair" => cmd_lb_pair(cfg)?,
        "classify" => cmd_classify(cfg, threads)?,
        other => return Err(ModelError::Usage(format!("unknown command '{other}'"))),
    };
    let format = cfg.format.as_deref().unwrap_or("json");
    let artifact = match format {
        "json" => {
            let mut s = serde_json::to_string_pretty(&json!({
                "config": cfg,
                "result": result,
            }))?;
            s.push('\n');
            s
        }
        "csv" => {
            let table = table.ok_or_else(|| {
                ModelError::Usage(format!("{} emits JSON only", cfg.command))
            })?;
            let mut s = format!("# {CSV_VERSION} command={}\n{}\n", cfg.command, table.columns);
            for row in table.rows {
                s.push_str(&row);
                s.push('\n');
            }
            s
        }
        other => return Err(ModelError::Usage(format!("unknown format '{other}'"))),
    };
    Ok(RunOutcome { artifact, summary, assertion_failure: failure })
}

type CommandOutput = (serde_json::Value, Option<CsvTable>, String, Option<String>);

fn cmd_eval(cfg: &ExperimentConfig, threads: Threads) -> Result<CommandOutput> {
    let d = require(&cfg.distribution, "--dist", "eval")?;
    let s = require(&cfg.strategy, "--strategy", "eval")?;
    let m = cfg.m.unwrap_or(1);
    let trials = cfg.trials.unwrap_or(10_000);
    let benchmark = cfg.benchmark.unwrap_or(Benchmark::Monopoly);
    let rep = eval::eval_strategy(&d, s, m, benchmark, trials, cfg.seed, threads)?;
    let method = serde_json::to_value(rep.method)?;
    let row = format!(
        "{},{},{},{},{},{},{},{}",
        rep.ratio,
        rep.revenue,
        rep.benchmark,
        rep.ci95,
        rep.trials,
        method.as_str().unwrap_or("?"),
        rep.seed,
        rep.benchmark_attained
    );
    let summary = format!(
        "ratio {:.6} (revenue {:.6} / benchmark {:.6}), ci95 {:.2e}",
        rep.ratio, rep.revenue, rep.benchmark, rep.ci95
    );
    Ok((
        serde_json::to_value(rep)?,
        Some(CsvTable {
            columns: "ratio,revenue,benchmark,ci95,trials,method,seed,benchmarkAttained",
            rows: vec![row],
        }),
        summary,
        None,
    ))
}

fn cmd_sweep(cfg: &ExperimentConfig, threads: Threads) -> Result<CommandOutput> {
    let d = require(&cfg.distribution, "--dist", "sweep")?;
    let s = cfg.strategy.unwrap_or(Strategy::EmpiricalReserve);
    if cfg.epsilons.is_empty() {
        return Err(ModelError::Usage("sweep needs --eps".into()));
    }
    let trials = cfg.trials.unwrap_or(20_000);
    let confidence = cfg.confidence.unwrap_or(0.95);
    let benchmark = cfg.benchmark.unwrap_or(Benchmark::Monopoly);
    let sweep = eval::sweep_sample_complexity(
        &d,
        s,
        &cfg.epsilons,
        trials,
        confidence,
        cfg.seed,
        benchmark,
        threads,
    )?;
    let rows = sweep
        .rows
        .iter()
        .map(|r| format!("{},{},{},{}", r.epsilon, r.m_found, r.ratio_at_m, r.seed))
        .collect();
    let smoothed = sweep.smoothed_m();
    let summary = sweep
        .rows
        .iter()
        .map(|r| format!("eps {} -> m {}", r.epsilon, r.m_found))
        .collect::<Vec<_>>()
        .join(", ");
    let mut result = serde_json::to_value(&sweep)?;
    result["smoothedM"] = serde_json::to_value(smoothed)?;
    Ok((
        result,
        Some(CsvTable { columns: "epsilon,mFound,ratioAtM,seed", rows }),
        summary,
        None,
    ))
}

fn cmd_curve_dump(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = require(&cfg.distribution, "--dist", "curve-dump")?;
    d.validate()?;
    let n = cfg.grid.unwrap_or(1000).max(1);
    let mut points = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for k in 1..=n {
        let q = k as f64 / (n + 1) as f64;
        let v = d.value_at_quantile(q)?;
        let r = q * v;
        points.push(json!({"q": q, "value": v, "revenue": r}));
        rows.push(format!("{q},{v},{r}"));
    }
    let opt = monopoly(&d);
    let summary = format!(
        "optimum r* {:.6} at q* {:.6} ({}), {} grid points",
        opt.r_star,
        opt.q_star,
        if opt.attained { "attained" } else { "supremum" },
        n
    );
    Ok((
        json!({"optimum": opt, "points": points}),
        Some(CsvTable { columns: "q,value,revenue", rows }),
        summary,
        None,
    ))
}

fn cmd_scaled_curve(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = require(&cfg.distribution, "--dist", "scaled-curve")?;
    let grid = parse_value_grid(cfg.c_grid.as_deref().unwrap_or("0:1:0.01"))?;
    let curve = eval::scaled_ratio_curve(&d, &grid)?;
    let (best_c, best) = curve
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((0.0, 0.0));
    let points: Vec<serde_json::Value> =
        curve.iter().map(|(c, r)| json!({"c": c, "ratio": r})).collect();
    let rows = curve.iter().map(|(c, r)| format!("{c},{r}")).collect();
    Ok((
        json!({"points": points}),
        Some(CsvTable { columns: "c,ratio", rows }),
        format!("best ratio {best:.6} at c={best_c}"),
        None,
    ))
}

fn cmd_lemma_check(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let d = require(&cfg.distribution, "--dist", "lemma-check")?;
    d.validate()?;
    let lemma = require(&cfg.lemma, "--lemma", "lemma-check")?;
    let n = cfg.grid.unwrap_or(1000).max(1);
    let opt = monopoly(&d);
    let margin_at: Box<dyn Fn(f64) -> Result<f64>> = match lemma.as_str() {
        "mhr-quadratic" => Box::new(|q| curve::lemma_gap_mhr(&d, q)),
        "streg-quadratic" => {
            let alpha = match (cfg.alpha, &d) {
                (Some(a), _) => a,
                (None, Dist::GeneralizedPareto { shape, .. }) => 1.0 - shape,
                (None, _) => {
                    return Err(ModelError::Usage(
                        "streg-quadratic needs --alpha for this family".into(),
                    ));
                }
            };
            Box::new(move |q| curve::lemma_gap_streg(&d, q, alpha))
        }
        "postpeak" => Box::new(|q| curve::postpeak_dominates_exponential(&d, q)),
        other => {
            return Err(ModelError::Usage(format!(
                "unknown lemma '{other}'; expected mhr-quadratic, streg-quadratic or postpeak"
            )));
        }
    };
    let mut rows = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut min_margin = f64::INFINITY;
    let mut argmin = f64::NAN;
    for k in 1..=n {
        let t = k as f64 / (n + 1) as f64;
        // the postpeak statement only covers quantiles past the optimum
        let q = if lemma == "postpeak" { opt.q_star + (1.0 - opt.q_star) * t } else { t };
        let margin = margin_at(q)?;
        if margin < min_margin {
            min_margin = margin;
            argmin = q;
        }
        points.push(json!({"q": q, "margin": margin}));
        rows.push(format!("{q},{margin}"));
    }
    let pass = min_margin >= -1e-9;
    let failure = if pass {
        None
    } else {
        Some(format!("{lemma} margin {min_margin:.3e} at q={argmin} (below -1e-9)"))
    };
    Ok((
        json!({
            "lemma": lemma,
            "grid": n,
            "minMargin": min_margin,
            "argmin": argmin,
            "pass": pass,
            "points": points,
        }),
        Some(CsvTable { columns: "q,margin", rows }),
        format!("{lemma}: min margin {min_margin:.3e} at q={argmin:.6} ({})",
            if pass { "pass" } else { "FAIL" }),
        failure,
    ))
}

fn pair_kind_from(cfg: &ExperimentConfig) -> Result<PairKind> {
    let cmd = cfg.command.as_str();
    let kind = require(&cfg.kind, "--kind", cmd)?;
    let eps = |what: &str| -> Result<f64> {
        match cfg.epsilons.as_slice() {
            [e] => Ok(*e),
            [] => Err(ModelError::Usage(format!("{cmd} needs --eps {what}"))),
            _ => Err(ModelError::Usage(format!("{cmd} takes a single --eps value"))),
        }
    };
    match kind.as_str() {
        "general" => Ok(PairKind::General {
            delta: require(&cfg.delta, "--delta", cmd)?,
            epsilon: eps("(mass skew)")?,
        }),
        "regular" => Ok(PairKind::Regular { epsilon: eps("(epsilon0 is 3 eps)")? }),
        "mhr" => Ok(PairKind::Mhr {
            epsilon0: require(&cfg.epsilon0, "--epsilon0", cmd)?,
            epsilon: eps("(price-set level 1 - 3 eps)")?,
        }),
        other => Err(ModelError::Usage(format!(
            "unknown pair kind '{other}'; expected general, regular or mhr"
        ))),
    }
}

fn cmd_lb_pair(cfg: &ExperimentConfig) -> Result<CommandOutput> {
    let pair = info::make_lb_pair(pair_kind_from(cfg)?)?;
    let mut result = serde_json::to_value(&pair)?;
    result["reductionSamplesClosedForm"] =
        serde_json::to_value(pair.reduction_samples_closed_form())?;
    result["priceSetsDisjoint"] = serde_json::to_value(pair.price_sets_disjoint())?;
    let summary = format!(
        "klSum numeric {:.6e} / closed {:.6e}, reduction {:.3} samples, price sets {}",
        pair.kl_sum_numeric,
        pair.kl_sum_closed_form,
        pair.reduction_samples,
        if pair.price_sets_disjoint() { "disjoint" } else { "OVERLAP" }
    );
    Ok((result, None, summary, None))
}

fn cmd_classify(cfg: &ExperimentConfig, threads: Threads) -> Result<CommandOutput> {
    let pair = info::make_lb_pair(pair_kind_from(cfg)?)?;
    let m = match cfg.m {
        Some(m) => m,
        // the sample count the reduction says is necessary
        None => ((4.0 / 9.0 / pair.kl_sum_numeric).floor() as u64).max(1),
    };
    let trials = cfg.trials.unwrap_or(10_000);
    let rep = info::classify_lr(&pair, m, trials, cfg.seed, threads)?;
    let summary = format!(
        "success {:.4} +- {:.4} vs cap {:.4} at m={m}",
        rep.success_rate, rep.ci_half_width, rep.theoretical_cap
    );
    Ok((serde_json::to_value(rep)?, None, summary, None))
}

/// Full front end: parse, run, write the artifact, report. Returns the
/// process exit code: 0 success, 2 bad input, 3 failed numerical assertion.
pub fn main_with_args(args: &[String]) -> i32 {
    if args.is_empty() {
        eprint!("{}", usage());
        return 2;
    }
    if args[0] == "--help" || args[0] == "-h" || args[0] == "help" {
        print!("{}", usage());
        return 0;
    }
    let outcome = parse_args(args).and_then(|(cfg, threads)| {
        let out = run(&cfg, threads)?;
        Ok((cfg, out))
    });
    match outcome {
        Ok((cfg, out)) => {
            match &cfg.output {
                Some(path) => {
                    if let Err(e) = fs::write(path, &out.artifact) {
                        eprintln!("error: cannot write {path}: {e}");
                        return 2;
                    }
                    println!("{} -> {path}", out.summary);
                }
                None => {
                    print!("{}", out.artifact);
                    eprintln!("{}", out.summary);
                }
            }
            match out.assertion_failure {
                Some(msg) => {
                    eprintln!("error: numerical assertion failed: {msg}");
                    3
                }
                None => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
