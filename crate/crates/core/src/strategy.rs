//! Pricing strategies: deterministic maps from a sample batch to a posted
//! price.
//!
//! The workhorse is the empirical reserve: with samples sorted descending,
//! post the sample value `v_i` maximizing `i * v_i` (the monopoly price of
//! the empirical distribution). The guarded variant only considers ranks
//! `i >= ceil(c * m)`, trading a little revenue for robustness against
//! heavy upper tails.

use serde::{Deserialize, Serialize};

use crate::dist::{Dist, SampleBatch};
use crate::error::{ModelError, Result};

/// A pricing rule. `Identity` and `Scaled` are single-sample strategies and
/// reject batches with `m != 1` at evaluation time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StrategyRepr", into = "StrategyRepr")]
pub enum Strategy {
    /// Post `v_i` maximizing `i * v_i` (ties to the larger price).
    EmpiricalReserve,
    /// Empirical reserve restricted to ranks `i >= ceil(guard * m)`,
    /// `guard` in `(0, 1]`.
    GuardedEmpiricalReserve { guard: f64 },
    /// Post the single sample itself.
    Identity,
    /// Post `factor` times the single sample, `factor` in `(0, 1]`.
    Scaled { factor: f64 },
    /// Post a constant price, ignoring the batch.
    Fixed { price: f64 },
}

/// Wire form: `{"kind": "...", "param": number?}`.
#[derive(Serialize, Deserialize)]
struct StrategyRepr {
    kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    param: Option<f64>,
}

impl From<Strategy> for StrategyRepr {
    fn from(s: Strategy) -> StrategyRepr {
        let (kind, param) = match s {
            Strategy::EmpiricalReserve => ("empiricalReserve", None),
            Strategy::GuardedEmpiricalReserve { guard } => {
                ("guardedEmpiricalReserve", Some(guard))
            }
            Strategy::Identity => ("identity", None),
            Strategy::Scaled { factor } => ("scaled", Some(factor)),
            Strategy::Fixed { price } => ("fixed", Some(price)),
        };
        StrategyRepr { kind: kind.into(), param }
    }
}

impl TryFrom<StrategyRepr> for Strategy {
    type Error = String;

    fn try_from(r: StrategyRepr) -> std::result::Result<Strategy, String> {
        let need = |name: &str| r.param.ok_or(format!("strategy {name} needs \"param\""));
        let none = |s: Strategy| match r.param {
            Some(_) => Err(format!("strategy {} takes no \"param\"", r.kind)),
            None => Ok(s),
        };
        match r.kind.as_str() {
            "empiricalReserve" => none(Strategy::EmpiricalReserve),
            "identity" => none(Strategy::Identity),
            "guardedEmpiricalReserve" => {
                Ok(Strategy::GuardedEmpiricalReserve { guard: need("guardedEmpiricalReserve")? })
            }
            "scaled" => Ok(Strategy::Scaled { factor: need("scaled")? }),
            "fixed" => Ok(Strategy::Fixed { price: need("fixed")? }),
            other => Err(format!("unknown strategy kind \"{other}\"")),
        }
    }
}

impl Strategy {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Strategy::EmpiricalReserve | Strategy::Identity => true,
            Strategy::GuardedEmpiricalReserve { guard } => guard > 0.0 && guard <= 1.0,
            Strategy::Scaled { factor } => factor > 0.0 && factor <= 1.0,
            Strategy::Fixed { price } => price.is_finite() && price >= 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidParameter(format!("strategy parameter out of range: {self:?}")))
        }
    }

    /// True for the single-sample rules that reject `m != 1`.
    pub fn needs_single_sample(&self) -> bool {
        matches!(self, Strategy::Identity | Strategy::Scaled { .. })
    }

    /// Compact textual form (`er`, `guarded:0.37`, ...); parsed back by the
    /// CLI.
    pub fn shorthand(&self) -> String {
        match *self {
            Strategy::EmpiricalReserve => "er".into(),
            Strategy::GuardedEmpiricalReserve { guard } => format!("guarded:{guard}"),
            Strategy::Identity => "identity".into(),
            Strategy::Scaled { factor } => format!("scaled:{factor}"),
            Strategy::Fixed { price } => format!("fixed:{price}"),
        }
    }

    /// Apply the rule to a batch (values descending by construction).
    pub fn post_price(&self, batch: &SampleBatch) -> Result<f64> {
        self.validate()?;
        let v = batch.values();
        let m = v.len();
        match *self {
            Strategy::EmpiricalReserve => Ok(empirical_reserve(v, 1)),
            Strategy::GuardedEmpiricalReserve { guard } => {
                // nudge below the product so ceil(c*m) is exact when c*m is
                // an integer up to rounding (e.g. 0.2 * 5)
                let start = (guard * m as f64 - 1e-9).ceil() as usize;
                Ok(empirical_reserve(v, start.clamp(1, m)))
            }
            Strategy::Identity | Strategy::Scaled { .. } if m != 1 => Err(ModelError::Usage(
                format!("single-sample strategy got a batch of {m}"),
            )),
            Strategy::Identity => Ok(v[0]),
            Strategy::Scaled { factor } => Ok(factor * v[0]),
            Strategy::Fixed { price } => Ok(price),
        }
    }
}

/// Maximize `i * v_i` over ranks `i >= start` (1-based, values descending);
/// strict improvement keeps the first maximizer, i.e. the larger price.
fn empirical_reserve(v: &[f64], start: usize) -> f64 {
    let mut best_rank = start;
    let mut best = start as f64 * v[start - 1];
    for i in start + 1..=v.len() {
        let product = i as f64 * v[i - 1];
        if product > best {
            best = product;
            best_rank = i;
        }
    }
    v[best_rank - 1]
}

/// Expected revenue of posting `p`: `p * P(V >= p)` in closed form (a price
/// equal to an atom sells).
pub fn expected_revenue_of_price(d: &Dist, p: f64) -> f64 {
    d.revenue_at_price(p)
}
