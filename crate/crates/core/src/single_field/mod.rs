//! Single-field General Lotto with scouts.
//!
//! Red commits to a random allocation `X` with `E[X] <= R`. With probability
//! `u` Blue observes the realized `x` and calls (matches it) with probability
//! `t(x)`; otherwise Blue plays a fallback allocation `Z` drawn without
//! information. Blue's budget binds in expectation over both branches and
//! ties go to Blue.

mod allocation;
mod policy;

use std::fmt;

use serde::Serialize;

pub use allocation::{Component, MixedAllocation, WEIGHT_EPS};
pub use policy::CallPolicy;

use crate::error::{check_finite, LottoError, Result};

/// Slack allowed when validating user strategies against a budget.
pub const BUDGET_SLACK: f64 = 1e-9;

/// Budgets and detection probability of a single-field game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameParams {
    blue_budget: f64,
    red_budget: f64,
    detect_prob: f64,
}

impl GameParams {
    pub fn new(blue_budget: f64, red_budget: f64, detect_prob: f64) -> Result<Self> {
        check_finite("blue_budget", blue_budget)?;
        check_finite("red_budget", red_budget)?;
        check_finite("detect_prob", detect_prob)?;
        if blue_budget < 0.0 {
            return Err(LottoError::InvalidParameter {
                name: "blue_budget",
                value: blue_budget,
                reason: "must be nonnegative",
            });
        }
        if red_budget <= 0.0 {
            return Err(LottoError::InvalidParameter {
                name: "red_budget",
                value: red_budget,
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
        Ok(Self { blue_budget, red_budget, detect_prob })
    }

    pub fn blue_budget(&self) -> f64 {
        self.blue_budget
    }

    pub fn red_budget(&self) -> f64 {
        self.red_budget
    }

    pub fn detect_prob(&self) -> f64 {
        self.detect_prob
    }

    /// Resource ratio `B/R`.
    pub fn ratio(&self) -> f64 {
        self.blue_budget / self.red_budget
    }
}

/// Regime of the single-field solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Case {
    /// `B/R <= u`: Blue cannot afford to call every revealed allocation.
    InfoRich,
    /// `u < B/R <= 1`.
    Contested,
    /// `B/R > 1`.
    BlueDominant,
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Case::InfoRich => "InfoRich",
            Case::Contested => "Contested",
            Case::BlueDominant => "BlueDominant",
        };
        f.write_str(s)
    }
}

/// Blue's call policy and uninformed fallback allocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlueStrategy {
    pub call: CallPolicy,
    pub fallback: MixedAllocation,
}

impl BlueStrategy {
    pub fn new(call: CallPolicy, fallback: MixedAllocation) -> Self {
        Self { call, fallback }
    }

    /// Checks the expected spend against one Red strategy, with [`BUDGET_SLACK`].
    pub fn is_feasible_against(&self, red: &MixedAllocation, u: f64, budget: f64) -> bool {
        blue_budget_usage(self, red, u) <= budget + BUDGET_SLACK
    }
}

/// Closed-form equilibrium of one game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub case: Case,
    pub value: f64,
    pub red: MixedAllocation,
    pub blue: BlueStrategy,
    /// Probability Blue's fallback is active when contested.
    pub p: Option<f64>,
    /// Probability Red allocates anything when Blue dominates.
    pub q: Option<f64>,
    /// Half-width of the uniform used when Blue dominates.
    pub c: Option<f64>,
}

pub fn classify_case(params: &GameParams) -> Case {
    let ratio = params.ratio();
    if ratio <= params.detect_prob {
        Case::InfoRich
    } else if ratio <= 1.0 {
        Case::Contested
    } else {
        Case::BlueDominant
    }
}

/// Equilibrium probability that Blue wins.
pub fn game_value(params: &GameParams) -> f64 {
    let ratio = params.ratio();
    let u = params.detect_prob;
    match classify_case(params) {
        Case::InfoRich => ratio,
        Case::Contested => 0.5 * (u + ratio),
        Case::BlueDominant => 1.0 - (1.0 - u).powi(2) / (2.0 * (ratio - u)),
    }
}

pub fn solve(params: &GameParams) -> Solution {
    let (b, r, u) = (params.blue_budget, params.red_budget, params.detect_prob);
    let ratio = params.ratio();
    let case = classify_case(params);
    let value = game_value(params);
    let atom = |x: f64| Component::Atom { point: x };
    let uniform = |hi: f64| Component::Uniform { lo: 0.0, hi };

    let (red, blue, p, q, c) = match case {
        Case::InfoRich => {
            // u = 0 forces B = 0 here, so the call probability is zero.
            let t = if b == 0.0 { 0.0 } else { (b / (u * r)).min(1.0) };
            let blue = BlueStrategy::new(constant_policy(t), MixedAllocation::single(atom(0.0)));
            (MixedAllocation::single(atom(r)), blue, None, None, None)
        }
        Case::Contested => {
            let p = (ratio - u) / (1.0 - u);
            let fallback = mixture(p, uniform(2.0 * r), atom(0.0));
            let blue = BlueStrategy::new(constant_policy(1.0), fallback);
            (MixedAllocation::single(uniform(2.0 * r)), blue, Some(p), None, None)
        }
        Case::BlueDominant if u >= 1.0 => {
            // Red is always seen; any law with mean R loses for sure.
            let blue = BlueStrategy::new(constant_policy(1.0), MixedAllocation::single(atom(0.0)));
            (MixedAllocation::single(atom(r)), blue, None, Some(0.0), None)
        }
        Case::BlueDominant => {
            let q = (1.0 - u) / (ratio - u);
            let c = r / q;
            let fallback = MixedAllocation::single(uniform(2.0 * c));
            let blue = BlueStrategy::new(constant_policy(1.0), fallback);
            // Below the weight floor the mixture would lose its mean; every
            // law supported on [0, 2C] earns the value against Z, so use R.
            let red = if q < WEIGHT_EPS {
                MixedAllocation::single(atom(r))
            } else {
                mixture(q, uniform(2.0 * c), atom(0.0))
            };
            (red, blue, None, Some(q), Some(c))
        }
    };
    Solution { case, value, red, blue, p, q, c }
}

fn constant_policy(t: f64) -> CallPolicy {
    CallPolicy::constant(t.clamp(0.0, 1.0)).expect("clamped call probability")
}

fn mixture(weight: f64, first: Component, second: Component) -> MixedAllocation {
    let weight = weight.clamp(0.0, 1.0);
    MixedAllocation::two_point(weight, first, second).expect("weights in [0, 1] sum to one")
}

/// Expected payoff to Blue: `u E[t(X)] + (1-u) P(Z >= X)`.
pub fn payoff_exact(blue: &BlueStrategy, red: &MixedAllocation, u: f64) -> f64 {
    u * blue.call.expected_call(red) + (1.0 - u) * blue.fallback.prob_ge(red)
}

/// Blue's expected spend `u E[t(X) X] + (1-u) E[Z]` against a given Red law.
pub fn blue_budget_usage(blue: &BlueStrategy, red: &MixedAllocation, u: f64) -> f64 {
    u * blue.call.expected_call_cost(red) + (1.0 - u) * blue.fallback.mean()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(b: f64, r: f64, u: f64) -> GameParams {
        GameParams::new(b, r, u).unwrap()
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_case(&params(0.3, 1.0, 0.5)), Case::InfoRich);
        assert_eq!(classify_case(&params(1.0, 1.0, 0.0)), Case::Contested);
        assert_eq!(classify_case(&params(2.0, 1.0, 0.5)), Case::BlueDominant);
        assert_eq!(classify_case(&params(0.5, 1.0, 0.5)), Case::InfoRich);
        assert_eq!(classify_case(&params(1.0, 1.0, 1.0)), Case::InfoRich);
    }

    #[test]
    fn value_examples() {
        assert_eq!(game_value(&params(0.5, 1.0, 0.0)), 0.25);
        assert_eq!(game_value(&params(0.3, 1.0, 0.5)), 0.3);
        assert!((game_value(&params(0.6, 1.0, 0.4)) - 0.5).abs() < 1e-15);
        assert!((game_value(&params(2.0, 1.0, 0.5)) - 11.0 / 12.0).abs() < 1e-15);
        assert_eq!(game_value(&params(1.0, 1.0, 1.0)), 1.0);
        assert_eq!(game_value(&params(3.0, 1.0, 1.0)), 1.0);
        assert_eq!(game_value(&params(0.0, 1.0, 0.0)), 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(GameParams::new(1.0, 0.0, 0.0).is_err());
        assert!(GameParams::new(-1.0, 1.0, 0.0).is_err());
        assert!(GameParams::new(1.0, 1.0, 1.5).is_err());
        assert!(GameParams::new(f64::NAN, 1.0, 0.5).is_err());
        assert!(GameParams::new(0.0, 1.0, 0.0).is_ok());
    }

    #[test]
    fn info_rich_strategy() {
        let s = solve(&params(0.3, 1.0, 0.5));
        assert_eq!(s.red, MixedAllocation::atom(1.0).unwrap());
        assert!((s.blue.call.as_constant().unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(s.blue.fallback, MixedAllocation::atom(0.0).unwrap());
    }

    #[test]
    fn contested_strategy() {
        let s = solve(&params(0.6, 1.0, 0.4));
        assert_eq!(s.case, Case::Contested);
        assert_eq!(s.red, MixedAllocation::uniform(0.0, 2.0).unwrap());
        assert_eq!(s.blue.call.as_constant(), Some(1.0));
        let p = s.p.unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-15);
        let comps = s.blue.fallback.components();
        assert_eq!(comps.len(), 2);
        assert!((comps[0].0 - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(comps[0].1, Component::Uniform { lo: 0.0, hi: 2.0 });
        assert_eq!(comps[1].1, Component::Atom { point: 0.0 });
    }

    #[test]
    fn blue_dominant_strategy() {
        let s = solve(&params(2.0, 1.0, 0.5));
        assert!((s.q.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.c.unwrap() - 3.0).abs() < 1e-14);
        let comps = s.red.components();
        assert!((comps[0].0 - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(comps[0].1, Component::Uniform { lo, hi } if lo == 0.0 && (hi - 6.0).abs() < 1e-13));
        assert_eq!(comps[1].1, Component::Atom { point: 0.0 });
        assert!(matches!(s.blue.fallback.components()[0].1, Component::Uniform { hi, .. } if (hi - 6.0).abs() < 1e-13));
    }

    #[test]
    fn parity_collapses_degenerate_weights() {
        // B = R: p(u) = 1, fallback is a pure uniform.
        let s = solve(&params(1.0, 1.0, 0.3));
        assert_eq!(s.case, Case::Contested);
        assert_eq!(s.blue.fallback.components().len(), 1);
    }

    #[test]
    fn payoff_examples() {
        let s = solve(&params(0.6, 1.0, 0.4));
        let red = MixedAllocation::uniform(0.0, 2.0).unwrap();
        assert!((payoff_exact(&s.blue, &red, 0.4) - 0.5).abs() < 1e-12);

        let blue = BlueStrategy::new(
            CallPolicy::constant(1.0).unwrap(),
            MixedAllocation::atom(0.0).unwrap(),
        );
        assert_eq!(payoff_exact(&blue, &MixedAllocation::atom(0.0).unwrap(), 0.0), 1.0);

        let s = solve(&params(2.0, 1.0, 0.5));
        let hand = 0.5 + 0.5 * (1.0 - 1.0 / 6.0);
        let v = payoff_exact(&s.blue, &MixedAllocation::atom(1.0).unwrap(), 0.5);
        assert!((v - hand).abs() < 1e-12);
        assert!((v - 11.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn budget_usage_examples() {
        let s = solve(&params(0.6, 1.0, 0.4));
        assert!((blue_budget_usage(&s.blue, &s.red, 0.4) - 0.6).abs() < 1e-12);
        let s = solve(&params(0.3, 1.0, 0.5));
        assert!((blue_budget_usage(&s.blue, &s.red, 0.5) - 0.3).abs() < 1e-12);
        let idle = BlueStrategy::new(
            CallPolicy::constant(0.0).unwrap(),
            MixedAllocation::atom(0.0).unwrap(),
        );
        for u in [0.0, 0.3, 1.0] {
            assert_eq!(blue_budget_usage(&idle, &s.red, u), 0.0);
        }
    }

    #[test]
    fn perfect_information_with_surplus() {
        let s = solve(&params(3.0, 1.0, 1.0));
        assert_eq!(s.case, Case::BlueDominant);
        assert_eq!(s.value, 1.0);
        assert_eq!(s.red.mean(), 1.0);
        assert_eq!(payoff_exact(&s.blue, &s.red, 1.0), 1.0);
        // Calling is the only way to spend; R is all that can be used.
        assert_eq!(blue_budget_usage(&s.blue, &s.red, 1.0), 1.0);
    }

    #[test]
    fn zero_blue_budget() {
        for u in [0.0, 0.5, 1.0] {
            let s = solve(&params(0.0, 2.0, u));
            assert_eq!(s.value, 0.0);
            assert_eq!(payoff_exact(&s.blue, &s.red, u), 0.0);
        }
    }
}
