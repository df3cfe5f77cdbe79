//! Valuation distribution families with closed-form quantile structure.
//!
//! Everything downstream works in quantile space: `q(v)` is the probability
//! that a buyer accepts price `v` (survival with left limits, so a price equal
//! to an atom sells), and `v(q)` is its inverse. Each family implements both
//! directions exactly, plus CDF/density and an inverse-transform sampler.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::rng::Stream;

/// A parameterized valuation distribution.
///
/// Construct directly and call [`Dist::validate`] (the CLI and FFI do this for
/// every external input); library code assumes validated parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "family",
    content = "params",
    rename_all = "camelCase",
    rename_all_fields = "camelCase"
)]
pub enum Dist {
    /// Rate-`rate` exponential on `[0, inf)`.
    Exponential { rate: f64 },
    /// Uniform on `[lo, hi]`, `0 <= lo < hi`.
    UniformInterval { lo: f64, hi: f64 },
    /// `F(v) = 1 - 1/(v+1)`: every price earns `v/(v+1)`, supremum 1.
    EqualRevenue,
    /// All mass at one positive value.
    PointMass { value: f64 },
    /// Survival `(1 + shape*v/scale)^(-1/shape)`, `shape` in `[0,1)`.
    /// At `shape = 0` this is the exponential with rate `1/scale`.
    GeneralizedPareto { shape: f64, scale: f64 },
    /// Exponential rescaled so `v(kneeQuantile) = 1`, then a uniform plateau
    /// of width `plateauWidth` above it: `v(q) = ln q / ln q*` for `q >= q*`,
    /// `v(q) = 1 + plateauWidth*(1 - q/q*)` for `q <= q*`.
    TruncatedExponential { knee_quantile: f64, plateau_width: f64 },
    /// Member of the three-atom pair on `{1, 2, H = 1/delta}`: the top atom
    /// has mass `(1 +- 3*epsilon)/H` (sign by `which`), the middle atom the
    /// opposite sign, and the bottom atom `1 - 2/H`.
    GeneralLbMember { delta: f64, epsilon: f64, which: u8 },
    /// Member of the regular pair: `which = 1` is `EqualRevenue`; `which = 2`
    /// matches it up to the breakpoint `(1-2e)/(2e)` (writing `e = epsilon0`)
    /// and continues with `F(v) = 1 - (1-2e)^2/(v-(1-2e))` beyond.
    RegularLbMember { epsilon0: f64, which: u8 },
    /// Member of the MHR pair on `[1,2]`: `which = 1` is uniform; `which = 2`
    /// has density `1 - 2*sqrt(e)` on `[1, 1+sqrt(e)]` and
    /// `1 + 2e/(1-sqrt(e))` above (writing `e = epsilon0`).
    MhrLbMember { epsilon0: f64, which: u8 },
    /// Compound of exponentials: rate drawn from `Exponential(gamma)`, then
    /// the value from an exponential with that rate. Marginal CDF
    /// `F(v) = 1 - gamma/(gamma+v)`.
    ExpMixture { gamma: f64 },
}

/// Sorted samples plus the seed that produced them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SampleBatch {
    values: Vec<f64>,
    source_seed: u64,
}

impl SampleBatch {
    /// Build a batch from raw values (sorted here; must be nonempty, finite,
    /// nonnegative).
    pub fn new(mut values: Vec<f64>, source_seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(ModelError::EmptyBatch);
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ModelError::InvalidParameter(
                "sample values must be finite and nonnegative".into(),
            ));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(SampleBatch { values, source_seed })
    }

    /// Values in descending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn source_seed(&self) -> u64 {
        self.source_seed
    }
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter(msg.into()))
    }
}

impl Dist {
    /// Check parameter ranges; every externally supplied distribution goes
    /// through here before use.
    pub fn validate(&self) -> Result<()> {
        use Dist::*;
        match *self {
            Exponential { rate } => require(rate.is_finite() && rate > 0.0, "rate must be > 0"),
            UniformInterval { lo, hi } => require(
                lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi,
                "need 0 <= lo < hi",
            ),
            EqualRevenue => Ok(()),
            PointMass { value } => {
                require(value.is_finite() && value > 0.0, "point mass must be > 0")
            }
            GeneralizedPareto { shape, scale } => require(
                (0.0..1.0).contains(&shape) && scale.is_finite() && scale > 0.0,
                "need shape in [0,1) and scale > 0",
            ),
            TruncatedExponential { knee_quantile, plateau_width } => require(
                knee_quantile > 0.0
                    && knee_quantile < 1.0
                    && plateau_width.is_finite()
                    && plateau_width > 0.0,
                "need kneeQuantile in (0,1) and plateauWidth > 0",
            ),
            GeneralLbMember { delta, epsilon, which } => require(
                delta > 0.0 && delta < 0.5 && epsilon > 0.0 && epsilon < 1.0 / 6.0
                    && (which == 1 || which == 2),
                "need delta in (0,1/2), epsilon in (0,1/6), which in {1,2}",
            ),
            RegularLbMember { epsilon0, which } => require(
                epsilon0 > 0.0 && epsilon0 < 0.5 && (which == 1 || which == 2),
                "need epsilon0 in (0,1/2), which in {1,2}",
            ),
            MhrLbMember { epsilon0, which } => require(
                epsilon0 > 0.0 && epsilon0 < 0.25 && (which == 1 || which == 2),
                "need epsilon0 in (0,1/4), which in {1,2}",
            ),
            ExpMixture { gamma } => require(gamma.is_finite() && gamma > 0.0, "gamma must be > 0"),
        }
    }

    /// Support as `(min, max)`; `max` may be infinite.
    pub fn support(&self) -> (f64, f64) {
        use Dist::*;
        match *self {
            Exponential { .. } | EqualRevenue | ExpMixture { .. } => (0.0, f64::INFINITY),
            GeneralizedPareto { .. } => (0.0, f64::INFINITY),
            UniformInterval { lo, hi } => (lo, hi),
            PointMass { value } => (value, value),
            TruncatedExponential { plateau_width, .. } => (0.0, 1.0 + plateau_width),
            GeneralLbMember { delta, .. } => (1.0, 1.0 / delta),
            RegularLbMember { .. } => (0.0, f64::INFINITY),
            MhrLbMember { .. } => (1.0, 2.0),
        }
    }

    pub fn is_unbounded(&self) -> bool {
        self.support().1.is_infinite()
    }

    /// Atoms as `(value, mass)` in ascending value order; empty when
    /// continuous.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        use Dist::*;
        match *self {
            PointMass { value } => vec![(value, 1.0)],
            GeneralLbMember { delta, epsilon, which } => {
                let h = 1.0 / delta;
                let (top, mid) = general_lb_masses(h, epsilon, which);
                vec![(1.0, 1.0 - 2.0 / h), (2.0, mid), (h, top)]
            }
            _ => Vec::new(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        !self.atoms().is_empty()
    }

    /// Right-continuous CDF.
    pub fn cdf(&self, v: f64) -> f64 {
        use Dist::*;
        match *self {
            Exponential { rate } => {
                if v < 0.0 {
                    0.0
                } else {
                    -(-rate * v).exp_m1()
                }
            }
            UniformInterval { lo, hi } => ((v - lo) / (hi - lo)).clamp(0.0, 1.0),
            EqualRevenue => {
                if v < 0.0 {
                    0.0
                } else {
                    v / (v + 1.0)
                }
            }
            PointMass { value } => {
                if v < value {
                    0.0
                } else {
                    1.0
                }
            }
            GeneralizedPareto { shape, scale } => {
                if v < 0.0 {
                    0.0
                } else {
                    1.0 - gp_survival(shape, scale, v)
                }
            }
            TruncatedExponential { knee_quantile, plateau_width } => {
                let lambda = -knee_quantile.ln();
                if v < 0.0 {
                    0.0
                } else if v <= 1.0 {
                    -(-lambda * v).exp_m1()
                } else if v <= 1.0 + plateau_width {
                    1.0 - knee_quantile * (1.0 + plateau_width - v) / plateau_width
                } else {
                    1.0
                }
            }
            GeneralLbMember { .. } => {
                let mut below = 0.0;
                for (a, mass) in self.atoms() {
                    if a <= v {
                        below += mass;
                    }
                }
                below.min(1.0)
            }
            RegularLbMember { epsilon0, which } => {
                if v < 0.0 {
                    return 0.0;
                }
                let one = 1.0 - 2.0 * epsilon0;
                if which == 1 || v <= one / (2.0 * epsilon0) {
                    v / (v + 1.0)
                } else {
                    1.0 - one * one / (v - one)
                }
            }
            MhrLbMember { epsilon0, which } => {
                if v < 1.0 {
                    return 0.0;
                }
                if v >= 2.0 {
                    return 1.0;
                }
                if which == 1 {
                    v - 1.0
                } else {
                    let r = epsilon0.sqrt();
                    if v <= 1.0 + r {
                        (1.0 - 2.0 * r) * (v - 1.0)
                    } else {
                        (r - 2.0 * epsilon0)
                            + (1.0 + 2.0 * epsilon0 / (1.0 - r)) * (v - 1.0 - r)
                    }
                }
            }
            ExpMixture { gamma } => {
                if v < 0.0 {
                    0.0
                } else {
                    v / (gamma + v)
                }
            }
        }
    }

    /// `P(V >= p)`: survival with a left limit at atoms, so posting a price
    /// equal to an atom sells. For continuous families this equals `1 - F(p)`.
    pub fn survival_at_least(&self, p: f64) -> f64 {
        use Dist::*;
        match *self {
            PointMass { value } => {
                if p <= value {
                    1.0
                } else {
                    0.0
                }
            }
            GeneralLbMember { .. } => {
                let mut s = 0.0;
                for (v, mass) in self.atoms() {
                    if v >= p {
                        s += mass;
                    }
                }
                s.min(1.0)
            }
            _ => 1.0 - self.cdf(p),
        }
    }

    /// Sale probability of posting price `v`; the quantile coordinate.
    pub fn quantile_of_value(&self, v: f64) -> f64 {
        self.survival_at_least(v)
    }

    /// Expected revenue of posting price `p`.
    pub fn revenue_at_price(&self, p: f64) -> f64 {
        p * self.survival_at_least(p)
    }

    /// Value at quantile `q in [0,1]`: the price whose sale probability is `q`
    /// (highest such value on ties at atoms). `q = 0` errors for families with
    /// unbounded support and returns the support maximum otherwise.
    pub fn value_at_quantile(&self, q: f64) -> Result<f64> {
        use Dist::*;
        if !(0.0..=1.0).contains(&q) {
            return Err(ModelError::Usage(format!("quantile {q} outside [0,1]")));
        }
        if q == 0.0 {
            return if self.is_unbounded() {
                Err(ModelError::UnboundedValue)
            } else {
                Ok(self.support().1)
            };
        }
        Ok(match *self {
            Exponential { rate } => -q.ln() / rate,
            UniformInterval { lo, hi } => hi - q * (hi - lo),
            EqualRevenue => 1.0 / q - 1.0,
            PointMass { value } => value,
            GeneralizedPareto { shape, scale } => {
                if shape == 0.0 {
                    -scale * q.ln()
                } else {
                    scale * (q.powf(-shape) - 1.0) / shape
                }
            }
            TruncatedExponential { knee_quantile, plateau_width } => {
                if q >= knee_quantile {
                    q.ln() / knee_quantile.ln()
                } else {
                    1.0 + plateau_width * (1.0 - q / knee_quantile)
                }
            }
            GeneralLbMember { delta, epsilon, which } => {
                let h = 1.0 / delta;
                let (top, _mid) = general_lb_masses(h, epsilon, which);
                if q <= top {
                    h
                } else if q <= 2.0 / h {
                    2.0
                } else {
                    1.0
                }
            }
            RegularLbMember { epsilon0, which } => {
                let one = 1.0 - 2.0 * epsilon0;
                if which == 1 || q >= 2.0 * epsilon0 {
                    1.0 / q - 1.0
                } else {
                    one + one * one / q
                }
            }
            MhrLbMember { epsilon0, which } => {
                if which == 1 {
                    2.0 - q
                } else {
                    let r = epsilon0.sqrt();
                    let q_knee = 1.0 - r + 2.0 * epsilon0;
                    if q >= q_knee {
                        1.0 + (1.0 - q) / (1.0 - 2.0 * r)
                    } else {
                        1.0 + r + (q_knee - q) / (1.0 + 2.0 * epsilon0 / (1.0 - r))
                    }
                }
            }
            ExpMixture { gamma } => gamma * (1.0 / q - 1.0),
        })
    }

    /// Density at continuity points; the value at a declared breakpoint is the
    /// right limit. Errors for discrete families.
    pub fn pdf(&self, v: f64) -> Result<f64> {
        use Dist::*;
        match *self {
            PointMass { .. } | GeneralLbMember { .. } => Err(ModelError::NoDensity(v)),
            Exponential { rate } => Ok(if v < 0.0 { 0.0 } else { rate * (-rate * v).exp() }),
            UniformInterval { lo, hi } => {
                Ok(if v < lo || v > hi { 0.0 } else { 1.0 / (hi - lo) })
            }
            EqualRevenue => Ok(if v < 0.0 { 0.0 } else { (v + 1.0).powi(-2) }),
            GeneralizedPareto { shape, scale } => Ok(if v < 0.0 {
                0.0
            } else if shape == 0.0 {
                (-v / scale).exp() / scale
            } else {
                (1.0 + shape * v / scale).powf(-1.0 / shape - 1.0) / scale
            }),
            TruncatedExponential { knee_quantile, plateau_width } => {
                let lambda = -knee_quantile.ln();
                Ok(if v < 0.0 || v > 1.0 + plateau_width {
                    0.0
                } else if v < 1.0 {
                    lambda * (-lambda * v).exp()
                } else {
                    knee_quantile / plateau_width
                })
            }
            RegularLbMember { epsilon0, which } => {
                if v < 0.0 {
                    return Ok(0.0);
                }
                let one = 1.0 - 2.0 * epsilon0;
                Ok(if which == 1 || v < one / (2.0 * epsilon0) {
                    (v + 1.0).powi(-2)
                } else {
                    (one / (v - one)).powi(2)
                })
            }
            MhrLbMember { epsilon0, which } => {
                if !(1.0..=2.0).contains(&v) {
                    return Ok(0.0);
                }
                if which == 1 {
                    return Ok(1.0);
                }
                let r = epsilon0.sqrt();
                Ok(if v < 1.0 + r {
                    1.0 - 2.0 * r
                } else {
                    1.0 + 2.0 * epsilon0 / (1.0 - r)
                })
            }
            ExpMixture { gamma } => Ok(if v < 0.0 { 0.0 } else { gamma / (gamma + v).powi(2) }),
        }
    }

    /// Interior density breakpoints in value space.
    pub fn breakpoints(&self) -> Vec<f64> {
        use Dist::*;
        match *self {
            TruncatedExponential { .. } => vec![1.0],
            RegularLbMember { epsilon0, which: 2 } => {
                vec![(1.0 - 2.0 * epsilon0) / (2.0 * epsilon0)]
            }
            MhrLbMember { epsilon0, which: 2 } => vec![1.0 + epsilon0.sqrt()],
            _ => Vec::new(),
        }
    }

    /// Interior breakpoints of `q -> v(q)` in quantile space (atom boundaries
    /// for discrete families).
    pub fn quantile_breakpoints(&self) -> Vec<f64> {
        use Dist::*;
        match *self {
            TruncatedExponential { knee_quantile, .. } => vec![knee_quantile],
            RegularLbMember { epsilon0, which: 2 } => vec![2.0 * epsilon0],
            MhrLbMember { epsilon0, which: 2 } => {
                vec![1.0 - epsilon0.sqrt() + 2.0 * epsilon0]
            }
            GeneralLbMember { delta, epsilon, which } => {
                let h = 1.0 / delta;
                let (top, _) = general_lb_masses(h, epsilon, which);
                vec![top, 2.0 / h]
            }
            _ => Vec::new(),
        }
    }

    /// Draw `m` values by inverse-CDF transform of the stream's uniforms at
    /// indices `0..m`, sorted descending.
    pub fn sample_at(&self, stream: Stream, m: usize) -> Vec<f64> {
        let mut out: Vec<f64> = (0..m as u64)
            .map(|i| {
                self.value_at_quantile(stream.unit_at(i))
                    .expect("uniform draw is inside (0,1)")
            })
            .collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }

    /// Seeded i.i.d. sample of size `m`, sorted descending; deterministic in
    /// `(self, seed, m)`.
    pub fn sample(&self, seed: u64, m: usize) -> Result<SampleBatch> {
        if m == 0 {
            return Err(ModelError::EmptyBatch);
        }
        Ok(SampleBatch { values: self.sample_at(Stream::new(seed), m), source_seed: seed })
    }

    /// Two-stage sampler for [`Dist::ExpMixture`]: draw a rate from
    /// `Exponential(gamma)`, then the value from an exponential with that
    /// rate. Same law as the closed-form marginal.
    pub fn sample_mixture_two_stage(&self, seed: u64, m: usize) -> Result<SampleBatch> {
        let Dist::ExpMixture { gamma } = *self else {
            return Err(ModelError::Usage("two-stage sampler is mixture-only".into()));
        };
        if m == 0 {
            return Err(ModelError::EmptyBatch);
        }
        let stream = Stream::new(seed);
        let mut values: Vec<f64> = (0..m as u64)
            .map(|i| {
                let draws = stream.child(i);
                let lambda = -draws.unit_at(0).ln() / gamma;
                -draws.unit_at(1).ln() / lambda
            })
            .collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(SampleBatch { values, source_seed: seed })
    }

    /// Compact textual form (`exp:1`, `texp:0.43:0.74`, ...); parsed back by
    /// the CLI.
    pub fn shorthand(&self) -> String {
        use Dist::*;
        match *self {
            Exponential { rate } => format!("exp:{rate}"),
            UniformInterval { lo, hi } => format!("uni:{lo}:{hi}"),
            EqualRevenue => "er".into(),
            PointMass { value } => format!("pm:{value}"),
            GeneralizedPareto { shape, scale } => format!("gp:{shape}:{scale}"),
            TruncatedExponential { knee_quantile, plateau_width } => {
                format!("texp:{knee_quantile}:{plateau_width}")
            }
            GeneralLbMember { delta, epsilon, which } => {
                format!("genlb:{delta}:{epsilon}:{which}")
            }
            RegularLbMember { epsilon0, which } => format!("reglb:{epsilon0}:{which}"),
            MhrLbMember { epsilon0, which } => format!("mhrlb:{epsilon0}:{which}"),
            ExpMixture { gamma } => format!("mix:{gamma}"),
        }
    }
}

/// Catalog of MHR-declared instances used by the benchmark suites:
/// exponentials, uniform intervals over an `(offset, width)` grid, truncated
/// exponentials over a `(knee, plateau)` grid, and step-density pair members.
/// Truncated exponentials with a plateau too wide for the MHR slope bound are
/// included deliberately; shape-sensitive suites filter by `class_check`.
pub fn mhr_suite() -> Vec<Dist> {
    let mut suite = Vec::new();
    for rate in [0.5, 1.0, 2.0, 4.0] {
        suite.push(Dist::Exponential { rate });
    }
    for lo in [0.0, 0.5, 1.0, 2.0] {
        for width in [0.5, 1.0, 2.0] {
            suite.push(Dist::UniformInterval { lo, hi: lo + width });
        }
    }
    for knee_quantile in [0.2, 0.35, 0.5, 0.65, 0.8] {
        for plateau_width in [0.1, 0.5, 1.0, 1.5, 2.0] {
            suite.push(Dist::TruncatedExponential { knee_quantile, plateau_width });
        }
    }
    for epsilon0 in [0.01, 0.04, 0.09, 0.16] {
        for which in [1, 2] {
            suite.push(Dist::MhrLbMember { epsilon0, which });
        }
    }
    suite
}

/// Strongly-regular instances: the shape parameter trades off tail weight, and
/// the strong-regularity constant is `1 - shape`.
pub fn gp_suite() -> Vec<Dist> {
    let mut suite = Vec::new();
    for shape in [0.1, 0.25, 0.5, 0.75, 0.9] {
        for scale in [0.5, 1.0, 2.0] {
            suite.push(Dist::GeneralizedPareto { shape, scale });
        }
    }
    suite
}

fn gp_survival(shape: f64, scale: f64, v: f64) -> f64 {
    if shape == 0.0 {
        (-v / scale).exp()
    } else {
        (1.0 + shape * v / scale).powf(-1.0 / shape)
    }
}

/// Masses of the top (`H`) and middle (`2`) atoms for a pair member.
fn general_lb_masses(h: f64, epsilon: f64, which: u8) -> (f64, f64) {
    let bump = 3.0 * epsilon;
    if which == 1 {
        ((1.0 + bump) / h, (1.0 - bump) / h)
    } else {
        ((1.0 - bump) / h, (1.0 + bump) / h)
    }
}
