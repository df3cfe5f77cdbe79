//! C ABI over the pricing toolkit: opaque handles, status codes, and a
//! thread-local error message.
//!
//! Contract, mirrored in the generated header:
//! - every function returns `RlStatus`; on anything nonzero the output
//!   parameters are untouched and `rl_last_error_message` holds the detail
//!   until the next failing call on the same thread;
//! - handles from `rl_dist_parse` / `rl_strategy_parse` are released with the
//!   matching `_free`; strings returned through `out` parameters are owned by
//!   the caller and released with `rl_string_free`;
//! - null pointers are rejected, never dereferenced.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use reserve_lab::cli::{parse_dist_spec, parse_strategy_spec};
use reserve_lab::curve::{monopoly, restricted_optimal};
use reserve_lab::dist::SampleBatch;
use reserve_lab::eval::{self, Benchmark, Method};
use reserve_lab::info::{self, PairKind};
use reserve_lab::rng::Stream;
use reserve_lab::{Dist, ModelError, Strategy};

/// Call outcome; anything nonzero leaves a message for
/// `rl_last_error_message`.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RlStatus {
    Ok = 0,
    /// Null pointer, malformed spec, or a parameter outside its domain.
    InvalidArgument = 2,
    /// A numerical guarantee failed while computing.
    NumericalAssertion = 3,
}

/// Opaque valuation distribution handle.
pub struct RlDist {
    inner: Dist,
}

/// Opaque pricing strategy handle.
pub struct RlStrategy {
    inner: Strategy,
}

/// Evaluation report: benchmark-relative ratio plus the Monte-Carlo
/// confidence half-width (zero on the exact quadrature path).
#[repr(C)]
pub struct RlEvalReport {
    pub ratio: f64,
    pub revenue: f64,
    pub benchmark: f64,
    pub ci95: f64,
    pub trials: u64,
    pub seed: u64,
    pub used_quadrature: bool,
    pub benchmark_attained: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: RlStatus, msg: String) -> RlStatus {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = msg);
    status
}

fn fail_model(e: ModelError) -> RlStatus {
    let status = if e.exit_code() == 3 {
        RlStatus::NumericalAssertion
    } else {
        RlStatus::InvalidArgument
    };
    fail(status, e.to_string())
}

fn fail_null(what: &str) -> RlStatus {
    fail(RlStatus::InvalidArgument, format!("{what} is null"))
}

/// Run a body with a panic fence so unwinding never crosses the boundary.
fn fenced<F: FnOnce() -> RlStatus>(f: F) -> RlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in library call".into());
            fail(RlStatus::NumericalAssertion, msg)
        }
    }
}

fn read_spec(spec: *const c_char, what: &str) -> Result<String, RlStatus> {
    if spec.is_null() {
        return Err(fail_null(what));
    }
    let raw = unsafe { CStr::from_ptr(spec) };
    raw.to_str().map(str::to_owned).map_err(|_| {
        fail(RlStatus::InvalidArgument, format!("{what} is not valid UTF-8"))
    })
}

fn dist_ref<'a>(d: *const RlDist) -> Result<&'a Dist, RlStatus> {
    unsafe { d.as_ref() }.map(|w| &w.inner).ok_or_else(|| fail_null("distribution handle"))
}

fn strategy_ref<'a>(s: *const RlStrategy) -> Result<&'a Strategy, RlStatus> {
    unsafe { s.as_ref() }.map(|w| &w.inner).ok_or_else(|| fail_null("strategy handle"))
}

fn write_out<T>(out: *mut T, value: T, what: &str) -> RlStatus {
    if out.is_null() {
        return fail_null(what);
    }
    unsafe { out.write(value) };
    RlStatus::Ok
}

fn write_string(out: *mut *mut c_char, s: String, what: &str) -> RlStatus {
    if out.is_null() {
        return fail_null(what);
    }
    match CString::new(s) {
        Ok(c) => {
            unsafe { out.write(c.into_raw()) };
            RlStatus::Ok
        }
        Err(_) => fail(RlStatus::InvalidArgument, "string contains a NUL byte".into()),
    }
}

/// Message from the most recent failing call on this thread; borrowed, valid
/// until the next failure, never null.
#[no_mangle]
pub extern "C" fn rl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Release a string returned through an `out` parameter. Null is a no-op.
///
/// # Safety
/// `s` must be a string this library handed out through an `out` parameter
/// and not yet freed; the call takes ownership, so the pointer is dead after.
#[no_mangle]
pub unsafe extern "C" fn rl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

/// Parse a distribution spec (shorthand like `exp:1`, or a JSON object) into
/// a handle.
#[no_mangle]
pub extern "C" fn rl_dist_parse(spec: *const c_char, out: *mut *mut RlDist) -> RlStatus {
    fenced(|| {
        let spec = match read_spec(spec, "distribution spec") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_dist_spec(&spec) {
            Ok(inner) => {
                let handle = Box::into_raw(Box::new(RlDist { inner }));
                write_out(out, handle, "distribution out-pointer")
            }
            Err(e) => fail_model(e),
        }
    })
}

/// Release a distribution handle. Null is a no-op.
///
/// # Safety
/// `d` must come from `rl_dist_parse` and not yet be freed; the call takes
/// ownership, so the handle is dead after.
#[no_mangle]
pub unsafe extern "C" fn rl_dist_free(d: *mut RlDist) {
    if !d.is_null() {
        drop(unsafe { Box::from_raw(d) });
    }
}

/// Compact spec of the handle, parseable by `rl_dist_parse`.
#[no_mangle]
pub extern "C" fn rl_dist_shorthand(d: *const RlDist, out: *mut *mut c_char) -> RlStatus {
    fenced(|| match dist_ref(d) {
        Ok(dist) => write_string(out, dist.shorthand(), "shorthand out-pointer"),
        Err(status) => status,
    })
}

fn dist_scalar<F>(d: *const RlDist, out: *mut f64, f: F) -> RlStatus
where
    F: FnOnce(&Dist) -> Result<f64, ModelError>,
{
    fenced(|| {
        let dist = match dist_ref(d) {
            Ok(dist) => dist,
            Err(status) => return status,
        };
        match f(dist) {
            Ok(v) => write_out(out, v, "value out-pointer"),
            Err(e) => fail_model(e),
        }
    })
}

/// `P(V <= v)`.
#[no_mangle]
pub extern "C" fn rl_dist_cdf(d: *const RlDist, v: f64, out: *mut f64) -> RlStatus {
    dist_scalar(d, out, |dist| Ok(dist.cdf(v)))
}

/// Sale probability `P(V >= p)` of posting price `p`.
#[no_mangle]
pub extern "C" fn rl_dist_survival(d: *const RlDist, p: f64, out: *mut f64) -> RlStatus {
    dist_scalar(d, out, |dist| Ok(dist.survival_at_least(p)))
}

/// Density at `v`; fails for families with an atom there.
#[no_mangle]
pub extern "C" fn rl_dist_pdf(d: *const RlDist, v: f64, out: *mut f64) -> RlStatus {
    dist_scalar(d, out, |dist| dist.pdf(v))
}

/// Value `v(q)` whose sale probability is `q`; fails at `q = 0` for
/// unbounded families.
#[no_mangle]
pub extern "C" fn rl_dist_value_at_quantile(
    d: *const RlDist,
    q: f64,
    out: *mut f64,
) -> RlStatus {
    dist_scalar(d, out, |dist| dist.value_at_quantile(q))
}

/// Sale probability of the value `v` (left limit at atoms).
#[no_mangle]
pub extern "C" fn rl_dist_quantile_of_value(
    d: *const RlDist,
    v: f64,
    out: *mut f64,
) -> RlStatus {
    dist_scalar(d, out, |dist| Ok(dist.quantile_of_value(v)))
}

/// Expected revenue `p * P(V >= p)` of posting `p`.
#[no_mangle]
pub extern "C" fn rl_dist_revenue_at_price(
    d: *const RlDist,
    p: f64,
    out: *mut f64,
) -> RlStatus {
    dist_scalar(d, out, |dist| Ok(dist.revenue_at_price(p)))
}

/// Draw `m` samples in descending order into `out` (capacity `m`),
/// reproducible from the seed alone.
///
/// # Safety
/// `out` must point to writable storage for at least `m` doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_dist_sample(
    d: *const RlDist,
    seed: u64,
    m: usize,
    out: *mut f64,
) -> RlStatus {
    fenced(|| {
        let dist = match dist_ref(d) {
            Ok(dist) => dist,
            Err(status) => return status,
        };
        if m == 0 {
            return fail(RlStatus::InvalidArgument, "sample count must be positive".into());
        }
        if out.is_null() {
            return fail_null("sample buffer");
        }
        let values = dist.sample_at(Stream::new(seed), m);
        unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), out, m) };
        RlStatus::Ok
    })
}

/// Optimal posted price summary: quantile, value, revenue, and whether the
/// optimum is attained (false means the revenue is a supremum).
#[no_mangle]
pub extern "C" fn rl_monopoly(
    d: *const RlDist,
    q_star: *mut f64,
    v_star: *mut f64,
    r_star: *mut f64,
    attained: *mut bool,
) -> RlStatus {
    fenced(|| {
        let dist = match dist_ref(d) {
            Ok(dist) => dist,
            Err(status) => return status,
        };
        let s = monopoly(dist);
        for (ptr, value) in [(q_star, s.q_star), (v_star, s.v_star), (r_star, s.r_star)] {
            let status = write_out(ptr, value, "monopoly out-pointer");
            if status != RlStatus::Ok {
                return status;
            }
        }
        write_out(attained, s.attained, "monopoly out-pointer")
    })
}

/// Best revenue over prices selling with probability at least `delta`.
#[no_mangle]
pub extern "C" fn rl_restricted_optimal(
    d: *const RlDist,
    delta: f64,
    out: *mut f64,
) -> RlStatus {
    fenced(|| {
        let dist = match dist_ref(d) {
            Ok(dist) => dist,
            Err(status) => return status,
        };
        match restricted_optimal(dist, delta) {
            Ok(v) => write_out(out, v, "revenue out-pointer"),
            Err(e) => fail_model(e),
        }
    })
}

/// Parse a strategy spec (shorthand like `guarded:0.37`, or a JSON object)
/// into a handle.
#[no_mangle]
pub extern "C" fn rl_strategy_parse(
    spec: *const c_char,
    out: *mut *mut RlStrategy,
) -> RlStatus {
    fenced(|| {
        let spec = match read_spec(spec, "strategy spec") {
            Ok(s) => s,
            Err(status) => return status,
        };
        match parse_strategy_spec(&spec) {
            Ok(inner) => {
                let handle = Box::into_raw(Box::new(RlStrategy { inner }));
                write_out(out, handle, "strategy out-pointer")
            }
            Err(e) => fail_model(e),
        }
    })
}

/// Release a strategy handle. Null is a no-op.
///
/// # Safety
/// `s` must come from `rl_strategy_parse` and not yet be freed; the call
/// takes ownership, so the handle is dead after.
#[no_mangle]
pub unsafe extern "C" fn rl_strategy_free(s: *mut RlStrategy) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Price the strategy posts for a batch of `m` sample values (any order).
///
/// # Safety
/// `values` must point to at least `m` readable doubles.
#[no_mangle]
pub unsafe extern "C" fn rl_post_price(
    s: *const RlStrategy,
    values: *const f64,
    m: usize,
    out: *mut f64,
) -> RlStatus {
    fenced(|| {
        let strategy = match strategy_ref(s) {
            Ok(strategy) => strategy,
            Err(status) => return status,
        };
        if values.is_null() {
            return fail_null("sample values");
        }
        let values = unsafe { std::slice::from_raw_parts(values, m) }.to_vec();
        let price = SampleBatch::new(values, 0).and_then(|b| strategy.post_price(&b));
        match price {
            Ok(p) => write_out(out, p, "price out-pointer"),
            Err(e) => fail_model(e),
        }
    })
}

/// Expected revenue of the strategy on `m`-sample batches, relative to the
/// monopoly benchmark (`restricted_delta <= 0`) or to the best price selling
/// with probability at least `restricted_delta`. Exact quadrature when
/// available, seeded Monte-Carlo otherwise; `threads = 0` picks the machine
/// default and never changes the numbers.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub extern "C" fn rl_eval_strategy(
    d: *const RlDist,
    s: *const RlStrategy,
    m: u64,
    trials: u64,
    seed: u64,
    threads: usize,
    restricted_delta: f64,
    out: *mut RlEvalReport,
) -> RlStatus {
    fenced(|| {
        let dist = match dist_ref(d) {
            Ok(dist) => dist,
            Err(status) => return status,
        };
        let strategy = match strategy_ref(s) {
            Ok(strategy) => *strategy,
            Err(status) => return status,
        };
        let benchmark = if restricted_delta > 0.0 {
            Benchmark::Restricted { delta: restricted_delta }
        } else {
            Benchmark::Monopoly
        };
        let threads = if threads == 0 { None } else { Some(threads) };
        match eval::eval_strategy(dist, strategy, m, benchmark, trials, seed, threads) {
            Ok(rep) => write_out(
                out,
                RlEvalReport {
                    ratio: rep.ratio,
                    revenue: rep.revenue,
                    benchmark: rep.benchmark,
                    ci95: rep.ci95,
                    trials: rep.trials,
                    seed: rep.seed,
                    used_quadrature: rep.method == Method::Quadrature,
                    benchmark_attained: rep.benchmark_attained,
                },
                "report out-pointer",
            ),
            Err(e) => fail_model(e),
        }
    })
}

/// Exact ratio of the scaled single-sample rule at factor `c`.
#[no_mangle]
pub extern "C" fn rl_scaled_ratio(d: *const RlDist, c: f64, out: *mut f64) -> RlStatus {
    fenced(|| {
        let dist = match dist_ref(d) {
            Ok(dist) => dist,
            Err(status) => return status,
        };
        match eval::scaled_ratio_curve(dist, &[c]) {
            Ok(points) => write_out(out, points[0].1, "ratio out-pointer"),
            Err(e) => fail_model(e),
        }
    })
}

/// Build a hard distribution pair and return its report as a JSON string:
/// members, divergences, reduction sample counts, price components and their
/// disjointness. `kind` is `general` (uses `delta` and `epsilon`), `regular`
/// (uses `epsilon`), or `mhr` (uses `epsilon0` and `epsilon`); unused
/// parameters are ignored.
#[no_mangle]
pub extern "C" fn rl_lb_pair_json(
    kind: *const c_char,
    delta: f64,
    epsilon0: f64,
    epsilon: f64,
    out: *mut *mut c_char,
) -> RlStatus {
    fenced(|| {
        let kind = match read_spec(kind, "pair kind") {
            Ok(k) => k,
            Err(status) => return status,
        };
        let kind = match kind.as_str() {
            "general" => PairKind::General { delta, epsilon },
            "regular" => PairKind::Regular { epsilon },
            "mhr" => PairKind::Mhr { epsilon0, epsilon },
            other => {
                return fail(
                    RlStatus::InvalidArgument,
                    format!("unknown pair kind '{other}'; expected general, regular or mhr"),
                );
            }
        };
        let pair = match info::make_lb_pair(kind) {
            Ok(pair) => pair,
            Err(e) => return fail_model(e),
        };
        let mut result = match serde_json::to_value(&pair) {
            Ok(v) => v,
            Err(e) => return fail(RlStatus::NumericalAssertion, e.to_string()),
        };
        result["reductionSamplesClosedForm"] =
            pair.reduction_samples_closed_form().into();
        result["priceSetsDisjoint"] = pair.price_sets_disjoint().into();
        write_string(out, result.to_string(), "json out-pointer")
    })
}
