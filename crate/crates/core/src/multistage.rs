//! Two-stage game over several fields.
//!
//! Both players first split their budgets over the fields, then the
//! single-field game is played on each. The first stage has payoff
//! `H = sum_i phi_i(B_i / R_i)`, which is not convex in Red's split, so only
//! bounds are available: an upper bound from Red's stationary split and a
//! lower bound from the dominated game in which every `phi_i(1/x)` is replaced
//! by its lower convex envelope.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{check_finite, LottoError, Result};

/// Detection probability at which the envelope of `psi` changes shape.
pub const ENVELOPE_SEAM: f64 = 2.0 - SQRT_2;

/// Size of the shift applied to `u_i` when `B/R` sits exactly on its kink.
pub const KINK_PERTURBATION: f64 = 1e-9;

/// Smallest per-field allocation the bound operations are checked against.
pub const ALLOCATION_FLOOR: f64 = 1e-9;

const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Field {
    #[serde(rename = "w")]
    pub worth: f64,
    #[serde(rename = "u")]
    pub detect_prob: f64,
}

impl Field {
    pub fn new(worth: f64, detect_prob: f64) -> Result<Self> {
        check_finite("worth", worth)?;
        check_finite("detect_prob", detect_prob)?;
        if worth <= 0.0 {
            return Err(LottoError::InvalidParameter {
                name: "worth",
                value: worth,
                reason: "must be positive",
            });
        }
        if !(0.0..=1.0).contains(&detect_prob) {
            return Err(LottoError::InvalidParameter {
                name: "detect_prob",
                value: detect_prob,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(Self { worth, detect_prob })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultistageInstance {
    blue_budget: f64,
    red_budget: f64,
    fields: Vec<Field>,
}

impl MultistageInstance {
    pub fn new(blue_budget: f64, red_budget: f64, fields: Vec<Field>) -> Result<Self> {
        for (name, v) in [("blue_budget", blue_budget), ("red_budget", red_budget)] {
            check_finite(name, v)?;
            if v <= 0.0 {
                return Err(LottoError::InvalidParameter { name, value: v, reason: "must be positive" });
            }
        }
        if fields.len() < 2 {
            return Err(LottoError::InvalidInstance(format!(
                "need at least two fields, got {}",
                fields.len()
            )));
        }
        let fields = fields
            .into_iter()
            .map(|f| Field::new(f.worth, f.detect_prob))
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = fields.iter().map(|f| f.worth).sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(LottoError::InvalidInstance(format!(
                "field worths must satisfy sum w_i = 1 (within 1e-9), got {total}"
            )));
        }
        Ok(Self { blue_budget, red_budget, fields })
    }

    pub fn blue_budget(&self) -> f64 {
        self.blue_budget
    }

    pub fn red_budget(&self) -> f64 {
        self.red_budget
    }

    pub fn fields(&self) -> &[Field] {
        &self.fields
    }

    pub fn ratio(&self) -> f64 {
        self.blue_budget / self.red_budget
    }
}

/// Per-field payoff as a function of the local ratio `x = B_i / R_i`.
pub fn phi(x: f64, field: &Field) -> f64 {
    let u = field.detect_prob;
    let v = if x <= u {
        x
    } else if x <= 1.0 {
        0.5 * (x + u)
    } else {
        1.0 - (1.0 - u).powi(2) / (2.0 * (x - u))
    };
    field.worth * v
}

/// Right derivative of [`phi`].
pub fn phi_prime(x: f64, field: &Field) -> f64 {
    let u = field.detect_prob;
    let d = if x < u {
        1.0
    } else if x < 1.0 {
        0.5
    } else if u >= 1.0 {
        0.0
    } else {
        (1.0 - u).powi(2) / (2.0 * (x - u).powi(2))
    };
    field.worth * d
}

fn require_positive(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(LottoError::OutOfDomain(format!("argument must be positive and finite, got {x}")))
    }
}

/// `phi(1/x)` written out branch by branch.
pub fn psi(x: f64, field: &Field) -> Result<f64> {
    require_positive(x)?;
    let u = field.detect_prob;
    let v = if x <= 1.0 {
        if u >= 1.0 {
            1.0
        } else {
            1.0 - x * (1.0 - u).powi(2) / (2.0 * (1.0 - u * x))
        }
    } else if u * x <= 1.0 {
        0.5 * u + 0.5 / x
    } else {
        1.0 / x
    };
    Ok(field.worth * v)
}

/// Breakpoints `(alpha, beta, gamma)` of the four-piece envelope, defined for
/// `0 < u < 2 - sqrt(2)`. At the seam and above the two-piece envelope is used.
pub fn envelope_breakpoints(field: &Field) -> Option<(f64, f64, f64)> {
    let u = field.detect_prob;
    if u <= 0.0 || u >= ENVELOPE_SEAM {
        return None;
    }
    Some(breakpoints_unchecked(u))
}

fn breakpoints_unchecked(u: f64) -> (f64, f64, f64) {
    (2.0 / (2.0 - u), 2.0 * (SQRT_2 - 1.0) / u, 2.0 * (2.0 - SQRT_2) / u)
}

enum Regime {
    NoScouting,
    Small { alpha: f64, beta: f64, gamma: f64 },
    Large,
}

fn regime(field: &Field) -> Regime {
    if field.detect_prob == 0.0 {
        Regime::NoScouting
    } else if let Some((alpha, beta, gamma)) = envelope_breakpoints(field) {
        Regime::Small { alpha, beta, gamma }
    } else {
        Regime::Large
    }
}

/// Lower convex envelope of [`psi`].
pub fn psi_dagger(x: f64, field: &Field) -> Result<f64> {
    require_positive(x)?;
    let v = match regime(field) {
        Regime::NoScouting => return psi(x, field),
        Regime::Small { alpha, beta, gamma } => {
            let u = field.detect_prob;
            if x <= alpha {
                1.0 - x / (2.0 * alpha * alpha)
            } else if x <= beta {
                0.5 * u + 0.5 / x
            } else if x <= gamma {
                (2.0 * gamma - x) / (gamma * gamma)
            } else {
                1.0 / x
            }
        }
        Regime::Large => {
            if x <= 2.0 { 1.0 - 0.25 * x } else { 1.0 / x }
        }
    };
    Ok(field.worth * v)
}

/// `psi_dagger(1/x)`: concave, dominated by [`phi`], with `phi_dagger(0) = 0`.
pub fn phi_dagger(x: f64, field: &Field) -> f64 {
    let v = match regime(field) {
        Regime::NoScouting => return phi(x, field),
        Regime::Small { alpha, beta, gamma } => {
            let u = field.detect_prob;
            if x <= 1.0 / gamma {
                x
            } else if x <= 1.0 / beta {
                (2.0 * gamma * x - 1.0) / (gamma * gamma * x)
            } else if x <= 1.0 / alpha {
                0.5 * (u + x)
            } else {
                1.0 - 1.0 / (2.0 * alpha * alpha * x)
            }
        }
        Regime::Large => {
            if x <= 0.5 { x } else { 1.0 - 0.25 / x }
        }
    };
    field.worth * v
}

/// Right derivative of [`phi_dagger`].
pub fn phi_dagger_prime(x: f64, field: &Field) -> f64 {
    let d = match regime(field) {
        Regime::NoScouting => {
            if x < 1.0 { 0.5 } else { 0.5 / (x * x) }
        }
        Regime::Small { alpha, beta, gamma } => {
            if x < 1.0 / gamma {
                1.0
            } else if x < 1.0 / beta {
                1.0 / (gamma * gamma * x * x)
            } else if x < 1.0 / alpha {
                0.5
            } else {
                1.0 / (2.0 * alpha * alpha * x * x)
            }
        }
        Regime::Large => {
            if x < 0.5 { 1.0 } else { 0.25 / (x * x) }
        }
    };
    field.worth * d
}

/// Upper bound `sum_i phi_i(B/R)` and Red's stationary split
/// `R_i proportional to phi_i'(B/R)`.
///
/// A field whose kink sits exactly at `B/R` takes its derivative with `u_i`
/// moved by [`KINK_PERTURBATION`]. A field that is already won outright
/// (`u_i = 1`, `B/R > 1`) has zero derivative and receives nothing.
pub fn upper_bound(inst: &MultistageInstance) -> (f64, Vec<f64>) {
    let x = inst.ratio();
    let value = inst.fields.iter().map(|f| phi(x, f)).sum();
    let slopes: Vec<f64> = inst
        .fields
        .iter()
        .map(|f| {
            if x == f.detect_prob {
                let u = if f.detect_prob >= KINK_PERTURBATION {
                    f.detect_prob - KINK_PERTURBATION
                } else {
                    f.detect_prob + KINK_PERTURBATION
                };
                phi_prime(x, &Field { detect_prob: u, ..*f })
            } else {
                phi_prime(x, f)
            }
        })
        .collect();
    (value, split(inst.red_budget, &slopes, &inst.fields))
}

fn split(total: f64, slopes: &[f64], fields: &[Field]) -> Vec<f64> {
    let sum: f64 = slopes.iter().sum();
    if sum > 0.0 {
        slopes.iter().map(|s| total * s / sum).collect()
    } else {
        // Every field is won regardless of the split.
        fields.iter().map(|f| total * f.worth).collect()
    }
}

/// Sorted closed form of the upper bound for `B/R < 1`:
/// `1/2 sum_{i<=k} w_i u_i + (B/R)(1 - w_(k)/2)` where `k` counts the fields
/// with `u_i < B/R` and `w_(k)` is their total worth.
pub fn closed_form_upper_sorted(inst: &MultistageInstance) -> Result<f64> {
    let x = inst.ratio();
    if x >= 1.0 {
        return Err(LottoError::OutOfDomain(format!(
            "sorted closed form needs B/R < 1, got {x}"
        )));
    }
    if inst.fields.iter().any(|f| f.detect_prob == x) {
        return Err(LottoError::OutOfDomain(format!(
            "sorted closed form needs B/R distinct from every u_i, got {x}"
        )));
    }
    let mut fields = inst.fields.clone();
    fields.sort_by(|a, b| a.detect_prob.total_cmp(&b.detect_prob));
    let k = fields.partition_point(|f| f.detect_prob < x);
    let lead = &fields[..k];
    let weighted_u: f64 = lead.iter().map(|f| f.worth * f.detect_prob).sum();
    let w_k: f64 = lead.iter().map(|f| f.worth).sum();
    Ok(0.5 * weighted_u + x * (1.0 - 0.5 * w_k))
}

/// Lower bound from the dominated game: value `sum_i phi_dagger_i(B/R)` at the
/// split `(c_i B, c_i R)` with `c_i` proportional to `phi_dagger_i'(B/R)`.
pub fn lower_bound(inst: &MultistageInstance) -> (f64, Vec<(f64, f64)>) {
    let x = inst.ratio();
    let value = inst.fields.iter().map(|f| phi_dagger(x, f)).sum();
    let slopes: Vec<f64> = inst.fields.iter().map(|f| phi_dagger_prime(x, f)).collect();
    let sum: f64 = slopes.iter().sum();
    let alloc = slopes
        .iter()
        .map(|s| {
            let c = s / sum;
            (c * inst.blue_budget, c * inst.red_budget)
        })
        .collect();
    (value, alloc)
}

/// Which coincidence condition a field meets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoincideClause {
    /// `u_i = 0`.
    NoScouting,
    /// `0 < u_i <= 2 - sqrt(2)` and `B/R <= u_i / (2(2 - sqrt(2)))`.
    SmallUBelowGamma,
    /// `0 < u_i <= 2 - sqrt(2)` and `u_i / (2(sqrt(2) - 1)) <= B/R <= 1 - u_i/2`.
    SmallUMiddleBand,
    /// `u_i >= 2 - sqrt(2)` and `B/R <= 1/2`.
    LargeULowRatio,
    /// No condition holds.
    Fails,
}

pub fn field_clause(ratio: f64, field: &Field) -> CoincideClause {
    let u = field.detect_prob;
    if u == 0.0 {
        return CoincideClause::NoScouting;
    }
    if u <= ENVELOPE_SEAM {
        let (alpha, beta, gamma) = breakpoints_unchecked(u);
        if ratio <= 1.0 / gamma {
            return CoincideClause::SmallUBelowGamma;
        }
        if 1.0 / beta <= ratio && ratio <= 1.0 / alpha {
            return CoincideClause::SmallUMiddleBand;
        }
    }
    if u >= ENVELOPE_SEAM && ratio <= 0.5 {
        return CoincideClause::LargeULowRatio;
    }
    CoincideClause::Fails
}

/// True when every field meets one of the coincidence conditions, in which
/// case both bounds equal the game value.
pub fn bounds_coincide(inst: &MultistageInstance) -> (bool, Vec<CoincideClause>) {
    let x = inst.ratio();
    let labels: Vec<CoincideClause> = inst.fields.iter().map(|f| field_clause(x, f)).collect();
    (labels.iter().all(|c| *c != CoincideClause::Fails), labels)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsResult {
    pub upper: f64,
    pub lower: f64,
    pub coincide: bool,
    pub red_upper_allocation: Vec<f64>,
    pub dagger_allocation: Vec<(f64, f64)>,
    pub coincide_reasons: Vec<CoincideClause>,
}

pub fn bounds(inst: &MultistageInstance) -> BoundsResult {
    let (upper, red_upper_allocation) = upper_bound(inst);
    let (lower, dagger_allocation) = lower_bound(inst);
    let (coincide, coincide_reasons) = bounds_coincide(inst);
    BoundsResult { upper, lower, coincide, red_upper_allocation, dagger_allocation, coincide_reasons }
}
