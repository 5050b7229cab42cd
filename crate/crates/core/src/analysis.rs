//! Marginal value of information against marginal value of resources, the
//! resource ratio needed for a target value, and the optimal split of a fixed
//! budget between resources and information.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{check_finite, LottoError, Result};
use crate::numfmt::format_sig;
use crate::single_field::{game_value, GameParams};

/// Right derivative of the value in the detection probability.
pub fn value_partial_u(params: &GameParams) -> f64 {
    let (r, u) = (params.ratio(), params.detect_prob());
    if r <= u {
        0.0
    } else if r <= 1.0 {
        0.5
    } else {
        (1.0 - u) * (2.0 * r - 1.0 - u) / (2.0 * (r - u).powi(2))
    }
}

/// Right derivative of the value in Blue's budget.
pub fn value_partial_b(params: &GameParams) -> f64 {
    let (r, u, red) = (params.ratio(), params.detect_prob(), params.red_budget());
    if r < u {
        1.0 / red
    } else if r < 1.0 {
        0.5 / red
    } else if u >= 1.0 {
        0.0
    } else {
        (1.0 - u).powi(2) / (2.0 * red * (r - u).powi(2))
    }
}

/// `(1/R) V_u / V_B`. Infinite when `u = 1` and Blue outspends Red, where
/// extra resources are worthless but the last bit of information is not.
pub fn influence_ratio(params: &GameParams) -> f64 {
    let (r, u) = (params.ratio(), params.detect_prob());
    if r <= u {
        0.0
    } else if r <= 1.0 {
        1.0
    } else if u >= 1.0 {
        f64::INFINITY
    } else {
        1.0 + 2.0 * (r - 1.0) / (1.0 - u)
    }
}

/// Resource ratio `B/R` at which the value equals `target`.
///
/// `target = 1` is reachable only with `u = 1` (ratio 1); for `u < 1` the
/// ratio diverges and `+inf` is returned.
pub fn required_ratio(target: f64, u: f64) -> Result<f64> {
    check_finite("target", target)?;
    check_finite("u", u)?;
    if !(0.0..=1.0).contains(&target) {
        return Err(LottoError::InvalidParameter { name: "target", value: target, reason: "must lie in [0, 1]" });
    }
    if !(0.0..=1.0).contains(&u) {
        return Err(LottoError::InvalidParameter { name: "u", value: u, reason: "must lie in [0, 1]" });
    }
    Ok(if u >= target {
        target
    } else if u >= 2.0 * target - 1.0 {
        2.0 * target - u
    } else {
        u + (1.0 - u).powi(2) / (2.0 * (1.0 - target))
    })
}

/// Budget `D` to be split as `B + c u <= D` against a Red budget of 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetProblem {
    pub total_budget: f64,
    pub info_cost: f64,
}

impl BudgetProblem {
    pub fn new(total_budget: f64, info_cost: f64) -> Result<Self> {
        for (name, v) in [("total_budget", total_budget), ("info_cost", info_cost)] {
            check_finite(name, v)?;
            if v <= 0.0 {
                return Err(LottoError::InvalidParameter { name, value: v, reason: "must be positive" });
            }
        }
        Ok(Self { total_budget, info_cost })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixSolution {
    pub value: f64,
    pub blue_budget: f64,
    pub info: f64,
    pub unused: f64,
}

const MIX_GRID_STEP: f64 = 1e-4;
const GOLDEN_TOL: f64 = 1e-13;
const TIE_TOL: f64 = 1e-12;

fn mix_value(prob: &BudgetProblem, u: f64) -> f64 {
    let b = (prob.total_budget - prob.info_cost * u).max(0.0);
    value_at(b, u)
}

fn value_at(b: f64, u: f64) -> f64 {
    // Both arguments are in range by construction.
    game_value(&GameParams::new(b, 1.0, u.clamp(0.0, 1.0)).expect("valid budget point"))
}

/// Maximizer of a concave function on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > GOLDEN_TOL {
        if fa >= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Best split of the budget. The value is concave in `u` on each of the (at
/// most three) pieces cut by the kinks `B = u` and `B = 1`; each piece is
/// scanned on a `1e-4` grid and refined by golden section around the best
/// grid point. Among equal values the smallest `u` wins.
pub fn weapons_mix(prob: &BudgetProblem) -> MixSolution {
    let (d, c) = (prob.total_budget, prob.info_cost);
    if d >= 1.0 + c {
        return MixSolution { value: 1.0, blue_budget: 1.0, info: 1.0, unused: d - 1.0 - c };
    }
    let u_max = (d / c).min(1.0);
    let mut cuts = vec![0.0, u_max];
    for k in [d / (1.0 + c), (d - 1.0) / c] {
        if k > 0.0 && k < u_max {
            cuts.push(k);
        }
    }
    cuts.sort_by(f64::total_cmp);

    let f = |u: f64| mix_value(prob, u);
    let mut candidates: Vec<f64> = cuts.clone();
    for piece in cuts.windows(2) {
        let (lo, hi) = (piece[0], piece[1]);
        let steps = ((hi - lo) / MIX_GRID_STEP).ceil().max(1.0) as usize;
        let at = |i: usize| if i == steps { hi } else { lo + (hi - lo) * i as f64 / steps as f64 };
        let best = (0..=steps)
            .map(|i| (i, f(at(i))))
            .fold((0, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc })
            .0;
        let (a, b) = (at(best.saturating_sub(1)), at((best + 1).min(steps)));
        candidates.push(at(best));
        candidates.push(golden_max(f, a, b));
    }
    let best_value = candidates.iter().map(|&u| f(u)).fold(f64::NEG_INFINITY, f64::max);
    let info = candidates
        .iter()
        .copied()
        .filter(|&u| f(u) >= best_value - TIE_TOL)
        .fold(f64::INFINITY, f64::min);
    let blue_budget = (d - c * info).max(0.0);
    MixSolution { value: value_at(blue_budget, info), blue_budget, info, unused: 0.0 }
}

/// A validated, strictly increasing list of grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis(Vec<f64>);

impl Axis {
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LottoError::InvalidAxis("axis is empty".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LottoError::InvalidAxis("axis has a non-finite entry".into()));
        }
        if values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LottoError::InvalidAxis("axis is not strictly increasing".into()));
        }
        Ok(Self(values))
    }

    /// `n` evenly spaced points from `start` to `end` inclusive.
    pub fn linspace(start: f64, end: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(LottoError::InvalidAxis("axis is empty".into()));
        }
        if n == 1 {
            return Self::from_values(vec![start]);
        }
        let last = (n - 1) as f64;
        Self::from_values((0..n).map(|i| start + (end - start) * i as f64 / last).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Outer axis `u`, inner axis `B/R`. Columns `u,ratio,value`.
    ValueVsRatio,
    /// Outer axis `B/R`, inner axis `u`. Columns `ratio,u,value`.
    ValueVsU,
    /// Same layout as [`SweepKind::ValueVsU`], meant for a dense grid.
    ValueHeatmap,
    /// Outer axis `B` (with `R = 1`), inner axis `u`. Columns `B,u,ir`.
    IrHeatmap,
    /// Outer axis target value, inner axis `u`. Columns `ratio,u,value`.
    Contours,
    /// Outer axis info cost `c`, inner axis budget `D`.
    /// Columns `D,c,value,u_star,B_star,unused`.
    BudgetCurves,
}

impl SweepKind {
    pub fn columns(&self) -> &'static [&'static str] {
        match self {
            SweepKind::ValueVsRatio => &["u", "ratio", "value"],
            SweepKind::ValueVsU | SweepKind::ValueHeatmap | SweepKind::Contours => &["ratio", "u", "value"],
            SweepKind::IrHeatmap => &["B", "u", "ir"],
            SweepKind::BudgetCurves => &["D", "c", "value", "u_star", "B_star", "unused"],
        }
    }
}

/// Rectangular numeric table with named columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        debug_assert!(rows.iter().all(|r| r.len() == columns.len()));
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// CSV with a header row; numbers carry 12 significant digits.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format_sig(*v)))?;
        }
        w.flush()
    }
}

fn game_point(b: f64, r: f64, u: f64) -> Result<GameParams> {
    GameParams::new(b, r, u)
}

/// Evaluates `kind` on the product of `outer` and `inner`, outer axis major.
pub fn sweep(kind: SweepKind, outer: &Axis, inner: &Axis) -> Result<Table> {
    let inner = inner.values();
    let rows: Result<Vec<Vec<Vec<f64>>>> = outer
        .values()
        .par_iter()
        .map(|&o| {
            inner
                .iter()
                .map(|&i| -> Result<Vec<f64>> {
                    Ok(match kind {
                        SweepKind::ValueVsRatio => vec![o, i, game_value(&game_point(i, 1.0, o)?)],
                        SweepKind::ValueVsU | SweepKind::ValueHeatmap => {
                            vec![o, i, game_value(&game_point(o, 1.0, i)?)]
                        }
                        SweepKind::IrHeatmap => vec![o, i, influence_ratio(&game_point(o, 1.0, i)?)],
                        SweepKind::Contours => vec![required_ratio(o, i)?, i, o],
                        SweepKind::BudgetCurves => {
                            let m = weapons_mix(&BudgetProblem::new(i, o)?);
                            vec![i, o, m.value, m.info, m.blue_budget, m.unused]
                        }
                    })
                })
                .collect()
        })
        .collect();
    Ok(Table::new(kind.columns(), rows?.into_iter().flatten().collect()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(b: f64, r: f64, u: f64) -> GameParams {
        GameParams::new(b, r, u).unwrap()
    }

    #[test]
    fn partial_u_examples() {
        assert_eq!(value_partial_u(&gp(0.3, 1.0, 0.5)), 0.0);
        assert_eq!(value_partial_u(&gp(0.6, 1.0, 0.4)), 0.5);
        assert!((value_partial_u(&gp(2.0, 1.0, 0.5)) - 0.5 * 2.5 / 4.5).abs() < 1e-15);
    }

    #[test]
    fn partial_b_examples() {
        assert_eq!(value_partial_b(&gp(0.3, 1.0, 0.5)), 1.0);
        assert_eq!(value_partial_b(&gp(0.6, 1.0, 0.4)), 0.5);
        assert!((value_partial_b(&gp(2.0, 1.0, 0.5)) - 0.25 / 4.5).abs() < 1e-15);
        assert_eq!(value_partial_b(&gp(2.0, 1.0, 1.0)), 0.0);
    }

    #[test]
    fn influence_examples() {
        assert_eq!(influence_ratio(&gp(0.5, 1.0, 0.7)), 0.0);
        assert_eq!(influence_ratio(&gp(0.5, 1.0, 0.2)), 1.0);
        assert!((influence_ratio(&gp(2.0, 1.0, 0.5)) - 5.0).abs() < 1e-14);
        assert!((influence_ratio(&gp(1.5, 1.0, 0.9)) - 11.0).abs() < 1e-12);
        assert_eq!(influence_ratio(&gp(2.0, 1.0, 1.0)), f64::INFINITY);
    }

    #[test]
    fn influence_is_ratio_of_partials() {
        for (b, r, u) in [(0.2, 1.0, 0.5), (0.7, 2.0, 0.1), (3.0, 1.5, 0.3), (1.0, 0.5, 0.8)] {
            let p = gp(b, r, u);
            let expect = value_partial_u(&p) / (r * value_partial_b(&p));
            assert!((influence_ratio(&p) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn required_ratio_examples() {
        assert_eq!(required_ratio(0.5, 0.8).unwrap(), 0.5);
        assert_eq!(required_ratio(0.75, 0.5).unwrap(), 1.0);
        assert!((required_ratio(0.9, 0.5).unwrap() - 1.75).abs() < 1e-14);
        assert!((game_value(&gp(1.75, 1.0, 0.5)) - 0.9).abs() < 1e-12);
        assert_eq!(required_ratio(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(required_ratio(1.0, 0.5).unwrap(), f64::INFINITY);
        assert!(required_ratio(1.2, 0.5).is_err());
        assert!(required_ratio(0.5, -0.1).is_err());
    }

    #[test]
    fn mix_full_budget() {
        for c in [0.5, 1.0, 2.0, 100.0] {
            let m = weapons_mix(&BudgetProblem::new(1.0 + c, c).unwrap());
            assert_eq!((m.value, m.blue_budget, m.info, m.unused), (1.0, 1.0, 1.0, 0.0));
            let m = weapons_mix(&BudgetProblem::new(3.0 + c, c).unwrap());
            assert!((m.unused - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mix_expensive_information_is_skipped() {
        let m = weapons_mix(&BudgetProblem::new(0.5, 100.0).unwrap());
        assert_eq!(m.info, 0.0);
        assert_eq!(m.blue_budget, 0.5);
        assert!((m.value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn mix_cheap_information_buys_both() {
        let m = weapons_mix(&BudgetProblem::new(0.5, 0.01).unwrap());
        assert!(m.info > 0.0 && m.blue_budget > 0.0);
        // Optimum sits on the line B = u.
        assert!((m.info - 0.5 / 1.01).abs() < 1e-9);
    }

    #[test]
    fn mix_budget_identity() {
        for (d, c) in [(0.3, 0.5), (1.2, 2.0), (2.5, 4.0), (0.9, 1.0)] {
            let m = weapons_mix(&BudgetProblem::new(d, c).unwrap());
            assert!((m.blue_budget + c * m.info + m.unused - d).abs() < 1e-9);
            assert!((m.value - game_value(&gp(m.blue_budget, 1.0, m.info))).abs() < 1e-9);
        }
    }

    #[test]
    fn mix_flat_piece_prefers_resources() {
        // c = 1 makes the contested piece flat; the smallest u is reported.
        let m = weapons_mix(&BudgetProblem::new(0.8, 1.0).unwrap());
        assert_eq!(m.info, 0.0);
    }

    #[test]
    fn axis_validation() {
        assert!(Axis::from_values(vec![]).is_err());
        assert!(Axis::from_values(vec![0.0, 0.0]).is_err());
        assert!(Axis::from_values(vec![1.0, 0.5]).is_err());
        assert!(Axis::linspace(0.0, 1.0, 0).is_err());
        assert!(Axis::linspace(1.0, 1.0, 3).is_err());
        let a = Axis::linspace(0.0, 3.0, 301).unwrap();
        assert_eq!(a.values()[100], 1.0);
        assert_eq!(a.values()[300], 3.0);
    }

    #[test]
    fn sweep_examples() {
        let t = sweep(
            SweepKind::ValueVsRatio,
            &Axis::from_values(vec![0.0]).unwrap(),
            &Axis::from_values(vec![1.0]).unwrap(),
        )
        .unwrap();
        assert_eq!(t.rows, vec![vec![0.0, 1.0, 0.5]]);
        let t = sweep(
            SweepKind::IrHeatmap,
            &Axis::from_values(vec![1.5]).unwrap(),
            &Axis::from_values(vec![0.9]).unwrap(),
        )
        .unwrap();
        assert!((t.rows[0][2] - 11.0).abs() < 1e-12);
        let t = sweep(
            SweepKind::BudgetCurves,
            &Axis::from_values(vec![100.0]).unwrap(),
            &Axis::linspace(0.05, 1.0, 20).unwrap(),
        )
        .unwrap();
        assert!(t.column("u_star").unwrap().iter().all(|&u| u == 0.0));
    }

    #[test]
    fn sweep_rejects_out_of_range_points() {
        let t = sweep(
            SweepKind::ValueVsRatio,
            &Axis::from_values(vec![1.5]).unwrap(),
            &Axis::from_values(vec![1.0]).unwrap(),
        );
        assert!(t.is_err());
    }

    #[test]
    fn csv_output() {
        let t = Table::new(&["a", "b"], vec![vec![1.0, 11.0 / 12.0], vec![f64::INFINITY, 0.0]]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,0.916666666667\ninf,0\n");
    }
}
