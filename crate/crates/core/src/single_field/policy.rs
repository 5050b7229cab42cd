use std::fmt;

use serde::Serialize;

use super::allocation::MixedAllocation;
use crate::error::{LottoError, Result};
use crate::numfmt::format_sig;

/// Piecewise-constant call probability `t(x)`.
///
/// `values[0]` applies on `[0, breakpoints[0])`, `values[i]` on
/// `[breakpoints[i-1], breakpoints[i])` and the last value on the final
/// unbounded piece. The function is right-continuous.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CallPolicy {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl CallPolicy {
    pub fn constant(value: f64) -> Result<Self> {
        Self::piecewise(vec![], vec![value])
    }

    pub fn piecewise(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.len() != breakpoints.len() + 1 {
            return Err(LottoError::InvalidPolicy(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(LottoError::InvalidPolicy(format!("call probability {v} outside [0, 1]")));
        }
        if breakpoints.iter().any(|b| !(b.is_finite() && *b > 0.0))
            || breakpoints.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(LottoError::InvalidPolicy(
                "breakpoints must be positive, finite and strictly increasing".into(),
            ));
        }
        Ok(Self { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn as_constant(&self) -> Option<f64> {
        self.breakpoints.is_empty().then(|| self.values[0])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.breakpoints.partition_point(|&b| b <= x);
        self.values[idx]
    }

    /// Pieces as `(lo, hi, value)` with `hi` possibly infinite.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let n = self.values.len();
        (0..n).map(move |i| {
            let lo = if i == 0 { f64::NEG_INFINITY } else { self.breakpoints[i - 1] };
            let hi = if i + 1 == n { f64::INFINITY } else { self.breakpoints[i] };
            (lo, hi, self.values[i])
        })
    }

    /// `E[t(X)]`.
    pub fn expected_call(&self, red: &MixedAllocation) -> f64 {
        self.pieces().map(|(lo, hi, v)| v * red.mass_in(lo, hi)).sum()
    }

    /// `E[t(X) X]`.
    pub fn expected_call_cost(&self, red: &MixedAllocation) -> f64 {
        self.pieces().map(|(lo, hi, v)| v * red.partial_mean(lo, hi)).sum()
    }
}

impl fmt::Display for CallPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(v) = self.as_constant() {
            return write!(f, "t = {}", format_sig(v));
        }
        write!(f, "t piecewise over {} pieces", self.values.len())
    }
}
