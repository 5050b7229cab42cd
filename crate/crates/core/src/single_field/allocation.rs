use std::fmt;

use serde::Serialize;

use crate::error::{LottoError, Result};
use crate::numfmt::format_sig;

/// Weights below this are dropped when a mixture is built.
pub const WEIGHT_EPS: f64 = 1e-12;

/// Tolerance on the sum of the raw weights handed to [`MixedAllocation::new`].
const WEIGHT_SUM_TOL: f64 = 1e-9;

/// One building block of a randomized allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    /// Point mass.
    Atom { point: f64 },
    /// Uniform law on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
}

impl Component {
    pub fn atom(point: f64) -> Result<Self> {
        if !(point.is_finite() && point >= 0.0) {
            return Err(LottoError::InvalidAllocation(format!(
                "atom point must be finite and nonnegative, got {point}"
            )));
        }
        Ok(Component::Atom { point })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
            return Err(LottoError::InvalidAllocation(format!(
                "uniform interval requires 0 <= lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Component::Uniform { lo, hi })
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Component::Atom { point } => point,
            Component::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    /// `P(A <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Component::Atom { point } => if x >= point { 1.0 } else { 0.0 },
            Component::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
        }
    }

    /// `P(A < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match *self {
            Component::Atom { point } => if x > point { 1.0 } else { 0.0 },
            Component::Uniform { .. } => self.cdf(x),
        }
    }

    /// `P(a <= A < b)`.
    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        match *self {
            Component::Atom { point } => {
                if a <= point && point < b { 1.0 } else { 0.0 }
            }
            Component::Uniform { lo, hi } => {
                let (p, q) = (a.max(lo), b.min(hi));
                if q > p { (q - p) / (hi - lo) } else { 0.0 }
            }
        }
    }

    /// `E[A; a <= A < b]`.
    pub fn partial_mean(&self, a: f64, b: f64) -> f64 {
        match *self {
            Component::Atom { point } => {
                if a <= point && point < b { point } else { 0.0 }
            }
            Component::Uniform { lo, hi } => {
                let (p, q) = (a.max(lo), b.min(hi));
                if q > p {
                    (q - p) * 0.5 * (p + q) / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    pub fn support_max(&self) -> f64 {
        match *self {
            Component::Atom { point } => point,
            Component::Uniform { hi, .. } => hi,
        }
    }

    /// `P(Z >= X)` for independent `Z ~ self`, `X ~ other`. Ties go to `Z`.
    pub fn prob_ge(&self, other: &Component) -> f64 {
        match (*self, *other) {
            (Component::Atom { point: a }, Component::Atom { point: b }) => {
                if a >= b { 1.0 } else { 0.0 }
            }
            (Component::Uniform { lo, hi }, Component::Atom { point: b }) => {
                ((hi - b) / (hi - lo)).clamp(0.0, 1.0)
            }
            (Component::Atom { point: a }, Component::Uniform { lo, hi }) => {
                ((a - lo) / (hi - lo)).clamp(0.0, 1.0)
            }
            (Component::Uniform { lo: zl, hi: zh }, Component::Uniform { lo: xl, hi: xh }) => {
                // Average of the survival function of Z over the support of X.
                let below = (xh.min(zl) - xl).max(0.0);
                let (p, q) = (xl.max(zl), xh.min(zh));
                let ramp = if q > p {
                    ((zh - p).powi(2) - (zh - q).powi(2)) / (2.0 * (zh - zl))
                } else {
                    0.0
                };
                ((below + ramp) / (xh - xl)).clamp(0.0, 1.0)
            }
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Component::Atom { point } => write!(f, "Atom({})", format_sig(point)),
            Component::Uniform { lo, hi } => {
                write!(f, "U[{}, {}]", format_sig(lo), format_sig(hi))
            }
        }
    }
}

/// A finite mixture of atoms and uniform intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixedAllocation {
    components: Vec<(f64, Component)>,
}

impl MixedAllocation {
    /// Builds a normalized mixture. Weights below [`WEIGHT_EPS`] are dropped and
    /// the rest rescaled to sum to one.
    pub fn new(components: Vec<(f64, Component)>) -> Result<Self> {
        if components.is_empty() {
            return Err(LottoError::InvalidAllocation("mixture has no components".into()));
        }
        let mut total = 0.0;
        for &(w, _) in &components {
            if !(w.is_finite() && (0.0..=1.0 + WEIGHT_SUM_TOL).contains(&w)) {
                return Err(LottoError::InvalidAllocation(format!(
                    "weight {w} outside [0, 1]"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(LottoError::InvalidAllocation(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        let kept: Vec<(f64, Component)> =
            components.into_iter().filter(|&(w, _)| w >= WEIGHT_EPS).collect();
        let kept_total: f64 = kept.iter().map(|&(w, _)| w).sum();
        if kept.is_empty() {
            return Err(LottoError::InvalidAllocation("all weights are negligible".into()));
        }
        let components = kept.into_iter().map(|(w, c)| (w / kept_total, c)).collect();
        Ok(Self { components })
    }

    pub fn single(component: Component) -> Self {
        Self { components: vec![(1.0, component)] }
    }

    pub fn atom(point: f64) -> Result<Self> {
        Component::atom(point).map(Self::single)
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Component::uniform(lo, hi).map(Self::single)
    }

    /// `weight` on `first`, the remainder on `second`.
    pub fn two_point(weight: f64, first: Component, second: Component) -> Result<Self> {
        Self::new(vec![(weight, first), (1.0 - weight, second)])
    }

    pub fn components(&self) -> &[(f64, Component)] {
        &self.components
    }

    pub fn mean(&self) -> f64 {
        self.components.iter().map(|(w, c)| w * c.mean()).sum()
    }

    /// `P(A <= x)`, right-continuous.
    pub fn cdf(&self, x: f64) -> f64 {
        self.weighted(|c| c.cdf(x))
    }

    /// `P(A < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.weighted(|c| c.cdf_left(x))
    }

    /// `P(A >= x)`.
    pub fn survival(&self, x: f64) -> f64 {
        1.0 - self.cdf_left(x)
    }

    pub fn mass_in(&self, a: f64, b: f64) -> f64 {
        self.weighted(|c| c.mass_in(a, b))
    }

    pub fn partial_mean(&self, a: f64, b: f64) -> f64 {
        self.weighted(|c| c.partial_mean(a, b))
    }

    pub fn support_max(&self) -> f64 {
        self.components
            .iter()
            .map(|(_, c)| c.support_max())
            .fold(0.0, f64::max)
    }

    /// Locations of point masses.
    pub fn atoms(&self) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().filter_map(|(_, c)| match *c {
            Component::Atom { point } => Some(point),
            Component::Uniform { .. } => None,
        })
    }

    /// Every location where the law has an atom or a density kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .components
            .iter()
            .flat_map(|(_, c)| match *c {
                Component::Atom { point } => vec![point],
                Component::Uniform { lo, hi } => vec![lo, hi],
            })
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// `P(Z >= X)` for independent `Z ~ self` and `X ~ other`; ties go to `Z`.
    pub fn prob_ge(&self, other: &MixedAllocation) -> f64 {
        let mut acc = 0.0;
        for (wz, z) in &self.components {
            for (wx, x) in &other.components {
                acc += wz * wx * z.prob_ge(x);
            }
        }
        acc
    }

    fn weighted(&self, f: impl Fn(&Component) -> f64) -> f64 {
        self.components.iter().map(|(w, c)| w * f(c)).sum()
    }
}

impl fmt::Display for MixedAllocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let [(_, c)] = self.components.as_slice() {
            return write!(f, "{c}");
        }
        for (i, (w, c)) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*{}", format_sig(*w), c)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(lo: f64, hi: f64) -> Component {
        Component::uniform(lo, hi).unwrap()
    }

    fn a(p: f64) -> Component {
        Component::atom(p).unwrap()
    }

    #[test]
    fn means() {
        assert_eq!(MixedAllocation::atom(1.0).unwrap().mean(), 1.0);
        let m = MixedAllocation::new(vec![(1.0 / 3.0, u(0.0, 6.0)), (2.0 / 3.0, a(0.0))]).unwrap();
        assert!((m.mean() - 1.0).abs() < 1e-15);
        let m = MixedAllocation::new(vec![(0.5, u(0.0, 2.0)), (0.5, a(3.0))]).unwrap();
        assert_eq!(m.mean(), 2.0);
    }

    #[test]
    fn cdf_examples() {
        assert_eq!(MixedAllocation::uniform(0.0, 2.0).unwrap().cdf(1.0), 0.5);
        let m = MixedAllocation::new(vec![(2.0 / 3.0, a(0.0)), (1.0 / 3.0, u(0.0, 6.0))]).unwrap();
        assert!((m.cdf(0.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(MixedAllocation::atom(1.0).unwrap().cdf(0.999), 0.0);
        assert_eq!(MixedAllocation::atom(1.0).unwrap().cdf(1.0), 1.0);
        assert_eq!(MixedAllocation::atom(1.0).unwrap().cdf_left(1.0), 0.0);
    }

    #[test]
    fn rejects_bad_components() {
        assert!(Component::atom(-1.0).is_err());
        assert!(Component::uniform(1.0, 1.0).is_err());
        assert!(Component::uniform(-0.5, 1.0).is_err());
        assert!(MixedAllocation::new(vec![]).is_err());
        assert!(MixedAllocation::new(vec![(0.5, a(0.0)), (0.3, a(1.0))]).is_err());
        assert!(MixedAllocation::new(vec![(1.5, a(0.0)), (-0.5, a(1.0))]).is_err());
    }

    #[test]
    fn negligible_weights_are_dropped() {
        let m = MixedAllocation::two_point(1.0 - 1e-13, u(0.0, 2.0), a(0.0)).unwrap();
        assert_eq!(m.components().len(), 1);
        assert_eq!(m.components()[0].0, 1.0);
    }

    #[test]
    fn pairwise_tie_goes_to_blue() {
        assert_eq!(a(0.0).prob_ge(&a(0.0)), 1.0);
        assert_eq!(a(0.5).prob_ge(&a(1.0)), 0.0);
        assert_eq!(u(0.0, 2.0).prob_ge(&a(0.5)), 0.75);
        assert_eq!(a(0.5).prob_ge(&u(0.0, 2.0)), 0.25);
        assert_eq!(u(0.0, 2.0).prob_ge(&a(3.0)), 0.0);
    }

    #[test]
    fn uniform_vs_uniform_matches_quadrature() {
        let cases = [
            (u(0.0, 2.0), u(0.0, 2.0)),
            (u(0.0, 6.0), u(0.0, 2.0)),
            (u(1.0, 3.0), u(0.0, 2.0)),
            (u(0.0, 1.0), u(2.0, 3.0)),
            (u(2.0, 3.0), u(0.0, 1.0)),
            (u(0.5, 1.5), u(0.0, 4.0)),
        ];
        for (z, x) in cases {
            // midpoint rule over the support of X
            let Component::Uniform { lo, hi } = x else { unreachable!() };
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            let quad: f64 = (0..n)
                .map(|i| z.prob_ge(&a(lo + (i as f64 + 0.5) * h)))
                .sum::<f64>()
                / n as f64;
            assert!((z.prob_ge(&x) - quad).abs() < 1e-9, "{z} vs {x}");
        }
        assert!((u(0.0, 2.0).prob_ge(&u(0.0, 2.0)) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn partial_moments_split_the_mean() {
        let m = MixedAllocation::new(vec![(0.25, a(1.0)), (0.75, u(0.0, 4.0))]).unwrap();
        let edges = [0.0, 0.5, 1.0, 1.7, 3.0, 4.5];
        let mass: f64 = edges.windows(2).map(|e| m.mass_in(e[0], e[1])).sum();
        let mean: f64 = edges.windows(2).map(|e| m.partial_mean(e[0], e[1])).sum();
        assert!((mass - 1.0).abs() < 1e-15);
        assert!((mean - m.mean()).abs() < 1e-14);
        assert!(m.mass_in(1.0, 1.0 + 1e-12) > 0.25);
    }
}
