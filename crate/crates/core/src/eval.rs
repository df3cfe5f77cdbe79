//! Strategy evaluation against analytic benchmarks.
//!
//! Two engines share one report type: exact quadrature in quantile space for
//! the single-sample deterministic rules, and a seeded Monte-Carlo engine for
//! everything else. The Monte-Carlo estimator is Rao-Blackwellized: each
//! trial draws a sample batch, posts a price, and scores the *analytic*
//! expected revenue of that price, never a buyer draw. Results are
//! bit-identical for a given seed regardless of thread count.

use serde::{Deserialize, Serialize};

use crate::curve::{monopoly, restricted_optimal};
use crate::dist::Dist;
use crate::error::{ModelError, Result};
use crate::pool::{par_map, thread_count};
use crate::quad::{integrate_split, inverse_normal_cdf, kahan_sum};
use crate::rng::Stream;
use crate::strategy::Strategy;

/// Revenue target a strategy is scored against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Benchmark {
    /// Unrestricted optimum `R*` (supremum when unattained).
    Monopoly,
    /// `R*_delta`, the optimum over sale probabilities at least `delta`.
    Restricted { delta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Method {
    Quadrature,
    MonteCarlo,
}

/// Worker count for the parallel engines; `None` defers to the
/// `RESERVE_LAB_THREADS` environment variable, then to the machine.
pub type Threads = Option<usize>;

/// Outcome of one evaluation. `ci95` is the normal-approximation 95%
/// half-width of `ratio` (zero for quadrature); `revenue` equals
/// `ratio * benchmark` by construction. `benchmark_attained` is false when
/// the target is a supremum (then the ratio is measured against it).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalReport {
    pub ratio: f64,
    pub revenue: f64,
    pub benchmark: f64,
    pub ci95: f64,
    pub trials: u64,
    pub method: Method,
    pub seed: u64,
    pub benchmark_attained: bool,
}

fn benchmark_value(d: &Dist, benchmark: Benchmark) -> Result<(f64, bool)> {
    match benchmark {
        Benchmark::Monopoly => {
            let s = monopoly(d);
            Ok((s.r_star, s.attained))
        }
        Benchmark::Restricted { delta } => Ok((restricted_optimal(d, delta)?, true)),
    }
}

/// Exact expected revenue of the single-sample rule "post `factor` times the
/// sample": integrates the analytic revenue of the posted price over the
/// sample's quantile. Splits are seeded at the distribution's own quantile
/// breakpoints and wherever the posted price crosses a density breakpoint.
fn scaled_revenue_quadrature(d: &Dist, factor: f64) -> Result<f64> {
    if factor == 0.0 {
        return Ok(0.0);
    }
    let g = |q: f64| {
        let v = d.value_at_quantile(q).expect("interior quantile");
        d.revenue_at_price(factor * v)
    };
    let mut splits = d.quantile_breakpoints();
    for b in d.breakpoints() {
        // price factor*v(q) crosses the breakpoint b at this quantile
        let q = d.quantile_of_value(b / factor);
        if q > 0.0 && q < 1.0 {
            splits.push(q);
        }
    }
    let lo = if d.is_unbounded() { 1e-12 } else { 0.0 };
    Ok(integrate_split(g, lo, 1.0, &splits, 1e-9))
}

/// Evaluate `s` on batches of size `m` from `d`. Quadrature (exact) for the
/// single-sample deterministic rules with `m = 1`; seeded Monte Carlo
/// otherwise.
pub fn eval_strategy(
    d: &Dist,
    s: Strategy,
    m: u64,
    benchmark: Benchmark,
    trials: u64,
    seed: u64,
    threads: Threads,
) -> Result<EvalReport> {
    d.validate()?;
    s.validate()?;
    if m == 0 {
        return Err(ModelError::Usage("batch size m must be at least 1".into()));
    }
    if m == 1 {
        if let Strategy::Identity | Strategy::Scaled { .. } = s {
            let factor = match s {
                Strategy::Scaled { factor } => factor,
                _ => 1.0,
            };
            let (bench, attained) = benchmark_value(d, benchmark)?;
            let revenue = scaled_revenue_quadrature(d, factor)?;
            return Ok(EvalReport {
                ratio: revenue / bench,
                revenue,
                benchmark: bench,
                ci95: 0.0,
                trials: 0,
                method: Method::Quadrature,
                seed,
                benchmark_attained: attained,
            });
        }
    }
    eval_strategy_mc(d, s, m, benchmark, trials, seed, threads)
}

/// Monte-Carlo engine, usable directly even where `eval_strategy` would pick
/// quadrature. Each trial's randomness comes from `child(trialIndex)` of the
/// seed stream, so the estimate is independent of thread count.
pub fn eval_strategy_mc(
    d: &Dist,
    s: Strategy,
    m: u64,
    benchmark: Benchmark,
    trials: u64,
    seed: u64,
    threads: Threads,
) -> Result<EvalReport> {
    d.validate()?;
    s.validate()?;
    if m == 0 || trials == 0 {
        return Err(ModelError::Usage("need m >= 1 and trials >= 1".into()));
    }
    if s.needs_single_sample() && m != 1 {
        return Err(ModelError::Usage(format!("single-sample strategy got m={m}")));
    }
    let (bench, attained) = benchmark_value(d, benchmark)?;
    let root = Stream::new(seed);
    let revenues = par_map(trials as usize, thread_count(threads), |t| {
        let values = d.sample_at(root.child(t as u64), m as usize);
        let batch_price = s
            .post_price(&crate::dist::SampleBatch::new(values, seed).expect("sampled batch"))
            .expect("strategy was validated");
        d.revenue_at_price(batch_price)
    });
    let mean = kahan_sum(revenues.iter().copied()) / trials as f64;
    let ci95 = if trials > 1 {
        let var = kahan_sum(revenues.iter().map(|r| (r - mean) * (r - mean)))
            / (trials as f64 - 1.0);
        inverse_normal_cdf(0.975) * (var / trials as f64).sqrt() / bench
    } else {
        0.0
    };
    Ok(EvalReport {
        ratio: mean / bench,
        revenue: mean,
        benchmark: bench,
        ci95,
        trials,
        method: Method::MonteCarlo,
        seed,
        benchmark_attained: attained,
    })
}

/// Exact ratio of the scaled single-sample rule at each factor in `c_grid`,
/// against the monopoly benchmark (supremum when unattained).
pub fn scaled_ratio_curve(d: &Dist, c_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    d.validate()?;
    let bench = monopoly(d).r_star;
    let mut out = Vec::with_capacity(c_grid.len());
    for &c in c_grid {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(ModelError::Usage(format!("scale factor {c} must be >= 0")));
        }
        out.push((c, scaled_revenue_quadrature(d, c)? / bench));
    }
    Ok(out)
}

/// One row of a sample-complexity sweep: the least batch size (within 10%)
/// whose lower confidence bound on the ratio clears `1 - epsilon`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRow {
    pub epsilon: f64,
    pub m_found: u64,
    pub ratio_at_m: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub schedule: String,
}

impl SweepResult {
    /// Rows sorted by epsilon descending with the running maximum of
    /// `m_found`: the monotone envelope that smooths search noise.
    pub fn smoothed_m(&self) -> Vec<(f64, u64)> {
        let mut rows: Vec<&SweepRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
        let mut best = 0;
        rows.iter()
            .map(|r| {
                best = best.max(r.m_found);
                (r.epsilon, best)
            })
            .collect()
    }
}

const SWEEP_M_CAP: u64 = 1 << 22;

/// For each target `epsilon`, search the least `m` (within 10% relative) such
/// that the Monte-Carlo ratio minus its CI half-width reaches `1 - epsilon`.
/// Doubling finds a bracket, bisection tightens it. Errors if the trial
/// budget leaves CI half-widths above `epsilon / 5`.
#[allow(clippy::too_many_arguments)]
pub fn sweep_sample_complexity(
    d: &Dist,
    s: Strategy,
    eps_list: &[f64],
    trials: u64,
    confidence: f64,
    seed: u64,
    benchmark: Benchmark,
    threads: Threads,
) -> Result<SweepResult> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(ModelError::Usage(format!("confidence {confidence} outside (0,1)")));
    }
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
        return Err(ModelError::Usage("epsilon targets must lie in (0,1)".into()));
    }
    if s.needs_single_sample() {
        return Err(ModelError::Usage(
            "sample-complexity sweeps need a strategy defined for every m".into(),
        ));
    }
    let z = inverse_normal_cdf(0.5 + confidence / 2.0);
    let z95 = inverse_normal_cdf(0.975);
    let mut rows = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let attempt = |m: u64| -> Result<(bool, f64)> {
            let rep = eval_strategy_mc(d, s, m, benchmark, trials, seed, threads)?;
            let half = rep.ci95 / z95 * z;
            if half >= eps / 5.0 {
                return Err(ModelError::InsufficientTrials(format!(
                    "CI half-width {half:.3e} at m={m} exceeds epsilon/5 = {:.3e}; raise trials",
                    eps / 5.0
                )));
            }
            Ok((rep.ratio - half >= 1.0 - eps, rep.ratio))
        };
        let (mut ok, mut ratio) = attempt(1)?;
        let mut hi = 1u64;
        let mut lo = 0u64;
        while !ok {
            lo = hi;
            hi *= 2;
            if hi > SWEEP_M_CAP {
                return Err(ModelError::Usage(format!(
                    "no m up to {SWEEP_M_CAP} reaches ratio 1 - {eps} at this trial budget"
                )));
            }
            (ok, ratio) = attempt(hi)?;
        }
        while lo > 0 && hi as f64 / lo as f64 > 1.1 && hi > lo + 1 {
            let mid = lo + (hi - lo) / 2;
            let (mid_ok, mid_ratio) = attempt(mid)?;
            if mid_ok {
                hi = mid;
                ratio = mid_ratio;
            } else {
                lo = mid;
            }
        }
        rows.push(SweepRow { epsilon: eps, m_found: hi, ratio_at_m: ratio, seed });
    }
    Ok(SweepResult {
        rows,
        schedule: format!(
            "doubling from m=1 then bisection to 10% relative, cap {SWEEP_M_CAP}, \
             acceptance at confidence {confidence}"
        ),
    })
}

/// Revenue functional of a pricing curve against the exponential-mixture
/// adversary: `gamma * integral of p(v) / (v + p(v) + gamma)^2 dv`, with
/// `p` piecewise-linear through `points` (sorted by value here) and zero
/// revenue credited beyond the last grid value.
pub fn mixture_objective(points: &[(f64, f64)], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(ModelError::InvalidParameter(format!("gamma {gamma} must be > 0")));
    }
    if points.len() < 2 {
        return Err(ModelError::InvalidParameter("need at least two grid points".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for &(v, p) in &pts {
        if !(v.is_finite() && p.is_finite() && v >= 0.0) {
            return Err(ModelError::InvalidParameter(format!("bad grid point ({v}, {p})")));
        }
        if p < 0.0 || p > v + 1e-12 {
            return Err(ModelError::InvalidParameter(format!(
                "best-response domain violated at v={v}: p={p}"
            )));
        }
    }
    if pts.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(ModelError::InvalidParameter("duplicate grid values".into()));
    }
    let price = |v: f64| -> f64 {
        // binary search for the segment, then linear interpolation
        let i = pts.partition_point(|(gv, _)| *gv <= v).clamp(1, pts.len() - 1);
        let (v0, p0) = pts[i - 1];
        let (v1, p1) = pts[i];
        p0 + (p1 - p0) * (v - v0) / (v1 - v0)
    };
    let f = |v: f64| {
        let p = price(v);
        p / (v + p + gamma).powi(2)
    };
    let splits: Vec<f64> = pts[1..pts.len() - 1].iter().map(|(v, _)| *v).collect();
    Ok(gamma * integrate_split(f, pts[0].0, pts[pts.len() - 1].0, &splits, 1e-9))
}
