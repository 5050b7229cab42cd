//! Discretized best responses against a fixed opponent.

use std::cmp::Ordering;

use serde::Serialize;

use super::hull::{upper_concave_hull, LowerEnvelope};
use crate::error::{check_finite, LottoError, Result};
use crate::single_field::{
    game_value, payoff_exact, solve, BlueStrategy, CallPolicy, Component, GameParams,
    MixedAllocation,
};

/// Smallest grid the oracles accept.
pub const MIN_GRID_SIZE: usize = 100;

/// Grid size used when none is given.
pub const DEFAULT_GRID_SIZE: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BestResponseReport {
    pub oracle_payoff: f64,
    pub reference_value: f64,
    /// Improvement of the oracle over the reference, from the oracle's side.
    pub gap: f64,
    pub grid_size: usize,
    pub support_hi: f64,
}

fn check_grid(grid_size: usize) -> Result<()> {
    if grid_size < MIN_GRID_SIZE {
        return Err(LottoError::GridTooSmall(grid_size));
    }
    Ok(())
}

fn check_prob(u: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&u) {
        return Err(LottoError::InvalidParameter {
            name: "detect_prob",
            value: u,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(())
}

fn linspace(hi: f64, intervals: usize) -> impl Iterator<Item = f64> {
    (0..=intervals).map(move |i| hi * i as f64 / intervals as f64)
}

#[derive(Debug, Clone, Copy)]
enum Source {
    /// Call on the policy piece with this index.
    Call(usize),
    /// Move fallback mass along the hull segment starting at this vertex.
    Fallback(usize),
}

#[derive(Debug, Clone, Copy)]
struct Item {
    value: f64,
    cost: f64,
    source: Source,
}

impl Item {
    fn ratio(&self) -> f64 {
        if self.cost > 0.0 { self.value / self.cost } else { f64::INFINITY }
    }

    /// Higher value per cost first, then the cheaper item.
    fn precedes(&self, other: &Item) -> bool {
        match self.ratio().total_cmp(&other.ratio()) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => self.cost <= other.cost,
        }
    }
}

/// Best Blue reply to a fixed Red law.
///
/// The call side is cut into cells of a uniform grid over `[0, support_hi]`
/// refined at Red's atoms and interval ends; the call probability is constant
/// per cell and each cell's mass and partial mean are exact. The fallback is
/// restricted to grid points, where buying `E[F_X(Z)]` with `E[Z]` is a walk
/// along the concave hull of `(z, F_X(z))`. Both sides are concave in the
/// budget spent, so the joint problem is a fractional knapsack over call
/// cells and hull segments taken in decreasing value per cost.
///
/// The budget is enforced only against `red`.
pub fn blue_best_response(
    red: &MixedAllocation,
    u: f64,
    budget: f64,
    grid_size: usize,
    reference_value: f64,
) -> Result<(BlueStrategy, BestResponseReport)> {
    check_grid(grid_size)?;
    check_prob(u)?;
    check_finite("blue_budget", budget)?;
    if budget < 0.0 {
        return Err(LottoError::InvalidParameter {
            name: "blue_budget",
            value: budget,
            reason: "must be nonnegative",
        });
    }

    let support_hi = match red.support_max() + red.mean() {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let mut edges: Vec<f64> = linspace(support_hi, grid_size)
        .chain(red.breakpoints())
        .filter(|&e| e > 0.0 && e <= support_hi)
        .collect();
    if red.cdf(0.0) > 0.0 {
        // Isolates the free call on a zero allocation.
        edges.push(support_hi * 1e-12);
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    // Piece i covers [edges[i-1], edges[i]) with edges[-1] = -inf; the
    // trailing piece beyond support_hi carries no mass.
    let mut calls = Vec::with_capacity(edges.len());
    if u > 0.0 {
        let mut lo = f64::NEG_INFINITY;
        for (i, &hi) in edges.iter().enumerate() {
            let mass = red.mass_in(lo, hi);
            if mass > 0.0 {
                calls.push(Item { value: u * mass, cost: u * red.partial_mean(lo, hi), source: Source::Call(i) });
            }
            lo = hi;
        }
    }
    calls.sort_by(|a, b| {
        b.ratio()
            .total_cmp(&a.ratio())
            .then(a.cost.total_cmp(&b.cost))
    });

    let candidates: Vec<(f64, f64)> = linspace(support_hi, grid_size)
        .chain(red.breakpoints())
        .map(|z| (z, red.cdf(z)))
        .collect();
    let hull = upper_concave_hull(&candidates);
    let mut fallback = Vec::with_capacity(hull.len());
    if u < 1.0 {
        for (k, w) in hull.windows(2).enumerate() {
            let gain = w[1].1 - w[0].1;
            if gain > 0.0 {
                fallback.push(Item {
                    value: (1.0 - u) * gain,
                    cost: (1.0 - u) * (w[1].0 - w[0].0),
                    source: Source::Fallback(k),
                });
            } else {
                break;
            }
        }
    }

    let mut call_levels = vec![0.0; edges.len() + 1];
    // Fallback ends at hull vertex `fb_vertex`, moved a fraction `fb_theta`
    // toward the next one.
    let (mut fb_vertex, mut fb_theta) = (0usize, 0.0);
    let mut remaining = budget;
    let (mut ci, mut fi) = (0, 0);
    loop {
        let next = match (calls.get(ci), fallback.get(fi)) {
            (Some(c), Some(f)) => if c.precedes(f) { *c } else { *f },
            (Some(c), None) => *c,
            (None, Some(f)) => *f,
            (None, None) => break,
        };
        let share = if next.cost <= remaining { 1.0 } else { remaining / next.cost };
        remaining -= share * next.cost;
        match next.source {
            Source::Call(i) => {
                call_levels[i] = share;
                ci += 1;
            }
            Source::Fallback(k) => {
                if share >= 1.0 {
                    fb_vertex = k + 1;
                } else {
                    fb_vertex = k;
                    fb_theta = share;
                }
                fi += 1;
            }
        }
        if share < 1.0 {
            break;
        }
    }

    let call = CallPolicy::piecewise(edges.clone(), call_levels)?;
    let z_here = Component::atom(hull[fb_vertex].0)?;
    let fallback = if fb_theta > 0.0 {
        let z_next = Component::atom(hull[fb_vertex + 1].0)?;
        MixedAllocation::two_point(1.0 - fb_theta, z_here, z_next)?
    } else {
        MixedAllocation::single(z_here)
    };
    let strategy = BlueStrategy::new(call, fallback);
    let oracle_payoff = payoff_exact(&strategy, red, u);
    let report = BestResponseReport {
        oracle_payoff,
        reference_value,
        gap: oracle_payoff - reference_value,
        grid_size,
        support_hi,
    };
    Ok((strategy, report))
}

/// Red's payoff curve `g(x) = u t(x) + (1-u) P(Z >= x)` against a fixed Blue.
pub fn red_payoff_curve(blue: &BlueStrategy, u: f64, x: f64) -> f64 {
    u * blue.call.eval(x) + (1.0 - u) * blue.fallback.survival(x)
}

/// Grid used by [`red_best_response`]: a uniform grid over `[0, M]` plus
/// Blue's breakpoints and points just to their right.
pub fn red_grid(blue: &BlueStrategy, red_budget: f64, grid_size: usize) -> (Vec<f64>, f64) {
    let mut kinks = blue.fallback.breakpoints();
    kinks.extend_from_slice(blue.call.breakpoints());
    let blue_max = kinks.iter().copied().fold(0.0, f64::max);
    let support_hi = 2.0 * blue_max + red_budget;
    let mut xs: Vec<f64> = linspace(support_hi, grid_size)
        .chain(kinks.iter().flat_map(|&k| [k, k + 1e-9 * k.max(1.0)]))
        .filter(|&x| (0.0..=support_hi).contains(&x))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    (xs, support_hi)
}

/// Best Red reply to a fixed Blue strategy.
///
/// Red's payoff is linear in the law of `X` under one mean constraint, so the
/// optimum over laws on the grid is the lower convex envelope of `g` at the
/// best mean `m <= R`, realized on at most two grid points.
pub fn red_best_response(
    blue: &BlueStrategy,
    u: f64,
    red_budget: f64,
    grid_size: usize,
    reference_value: f64,
) -> Result<(MixedAllocation, BestResponseReport)> {
    check_grid(grid_size)?;
    check_prob(u)?;
    check_finite("red_budget", red_budget)?;
    if red_budget <= 0.0 {
        return Err(LottoError::InvalidParameter {
            name: "red_budget",
            value: red_budget,
            reason: "must be positive",
        });
    }

    let (xs, support_hi) = red_grid(blue, red_budget, grid_size);
    let points: Vec<(f64, f64)> = xs.iter().map(|&x| (x, red_payoff_curve(blue, u, x))).collect();
    let env = LowerEnvelope::new(&points);

    let mut best = (f64::INFINITY, 0usize, 0usize, 0.0);
    for (i, &(x, y)) in env.vertices().iter().enumerate() {
        if x > red_budget {
            break;
        }
        if y < best.0 {
            best = (y, i, i, 0.0);
        }
    }
    let (i, j, theta) = env.bracket(red_budget);
    if env.eval(red_budget) < best.0 {
        best = (env.eval(red_budget), i, j, theta);
    }
    let (_, i, j, theta) = best;
    let verts = env.vertices();
    let left = Component::atom(verts[i].0)?;
    let red = if theta > 0.0 {
        MixedAllocation::two_point(1.0 - theta, left, Component::atom(verts[j].0)?)?
    } else {
        MixedAllocation::single(left)
    };
    let oracle_payoff = payoff_exact(blue, &red, u);
    let report = BestResponseReport {
        oracle_payoff,
        reference_value,
        gap: reference_value - oracle_payoff,
        grid_size,
        support_hi,
    };
    Ok((red, report))
}

/// Gains available to each side's oracle against the closed-form equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exploitability {
    pub blue: BestResponseReport,
    pub red: BestResponseReport,
}

impl Exploitability {
    pub fn blue_gap(&self) -> f64 {
        self.blue.gap
    }

    pub fn red_gap(&self) -> f64 {
        self.red.gap
    }
}

pub fn exploitability(params: &GameParams, grid_size: usize) -> Result<Exploitability> {
    let sol = solve(params);
    let value = game_value(params);
    let u = params.detect_prob();
    let (_, blue) = blue_best_response(&sol.red, u, params.blue_budget(), grid_size, value)?;
    let (_, red) = red_best_response(&sol.blue, u, params.red_budget(), grid_size, value)?;
    Ok(Exploitability { blue, red })
}
