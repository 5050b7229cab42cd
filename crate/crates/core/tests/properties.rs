use proptest::prelude::*;

use lotto_scouts::analysis::{required_ratio, weapons_mix, BudgetProblem};
use lotto_scouts::multistage::{
    bounds, phi, phi_dagger, psi, psi_dagger, Field, MultistageInstance,
};
use lotto_scouts::single_field::{
    blue_budget_usage, game_value, payoff_exact, solve, Case, GameParams,
};

fn params() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0..5.0f64, 0.05..5.0f64, prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64])
}

fn instance() -> impl Strategy<Value = MultistageInstance> {
    (
        prop::collection::vec((0.05..1.0f64, prop_oneof![Just(0.0), Just(1.0), 0.0..=1.0f64]), 2..7),
        0.05..4.0f64,
        0.05..4.0f64,
    )
        .prop_map(|(raw, b, r)| {
            let total: f64 = raw.iter().map(|p| p.0).sum();
            let fields = raw.iter().map(|&(w, u)| Field::new(w / total, u).unwrap()).collect();
            MultistageInstance::new(b, r, fields).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn value_is_a_probability((b, r, u) in params()) {
        let v = game_value(&GameParams::new(b, r, u).unwrap());
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn value_monotone_in_budget_and_information((b, r, u) in params(), db in 0.0..1.0f64, du in 0.0..1.0f64) {
        let base = game_value(&GameParams::new(b, r, u).unwrap());
        let more_b = game_value(&GameParams::new(b + db, r, u).unwrap());
        let more_u = game_value(&GameParams::new(b, r, (u + du).min(1.0)).unwrap());
        prop_assert!(more_b >= base - 1e-12);
        prop_assert!(more_u >= base - 1e-12);
    }

    #[test]
    fn strategies_achieve_the_value((b, r, u) in params()) {
        let p = GameParams::new(b, r, u).unwrap();
        let s = solve(&p);
        prop_assert!((payoff_exact(&s.blue, &s.red, u) - s.value).abs() <= 1e-9);
        prop_assert!((s.red.mean() - r).abs() <= 1e-9 * r.max(1.0));
        let spend = blue_budget_usage(&s.blue, &s.red, u);
        if u == 1.0 && s.case == Case::BlueDominant {
            // Matching every allocation costs only R here.
            prop_assert!(spend <= b + 1e-9);
        } else {
            prop_assert!((spend - b).abs() <= 1e-9 * b.max(1.0));
        }
    }

    #[test]
    fn surrogates_are_dominated(u in 0.0..=1.0f64, x in 0.001..8.0f64) {
        let f = Field::new(1.0, u).unwrap();
        prop_assert!(psi_dagger(x, &f).unwrap() <= psi(x, &f).unwrap() + 1e-12);
        prop_assert!(phi_dagger(x, &f) <= phi(x, &f) + 1e-12);
    }

    #[test]
    fn contour_inverts_value(v in 0.0..0.999f64, u in 0.0..=1.0f64) {
        let ratio = required_ratio(v, u).unwrap();
        let back = game_value(&GameParams::new(ratio, 1.0, u).unwrap());
        prop_assert!((back - v).abs() <= 1e-9);
    }

    #[test]
    fn bounds_are_ordered(inst in instance()) {
        let b = bounds(&inst);
        prop_assert!(b.lower <= b.upper);
        if b.coincide {
            prop_assert!((b.upper - b.lower).abs() <= 1e-9);
        }
        let red_total: f64 = b.red_upper_allocation.iter().sum();
        prop_assert!((red_total - inst.red_budget()).abs() <= 1e-9 * inst.red_budget().max(1.0));
        let (bt, rt) = b.dagger_allocation.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        prop_assert!((bt - inst.blue_budget()).abs() <= 1e-9 * inst.blue_budget().max(1.0));
        prop_assert!((rt - inst.red_budget()).abs() <= 1e-9 * inst.red_budget().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mix_budget_identity(d in 0.01..6.0f64, c in 0.05..10.0f64) {
        let m = weapons_mix(&BudgetProblem::new(d, c).unwrap());
        prop_assert!((m.blue_budget + c * m.info + m.unused - d).abs() <= 1e-9);
        let v = game_value(&GameParams::new(m.blue_budget, 1.0, m.info).unwrap());
        prop_assert!((m.value - v).abs() <= 1e-9);
    }

    #[test]
    fn mix_is_locally_optimal(d in 0.01..1.9f64, c in 0.05..4.0f64) {
        let m = weapons_mix(&BudgetProblem::new(d, c).unwrap());
        prop_assume!(m.value < 1.0);
        for du in [-1e-3, 1e-3] {
            let u = m.info + du;
            let b = d - c * u;
            if (0.0..=1.0).contains(&u) && b >= 0.0 {
                let v = game_value(&GameParams::new(b, 1.0, u).unwrap());
                prop_assert!(v <= m.value + 1e-6, "u={} gives {} over {}", u, v, m.value);
            }
        }
    }
}

#[test]
fn mix_monotone_in_budget_and_cost() {
    let costs = [0.5, 1.0, 2.0, 4.0];
    let budgets: Vec<f64> = (1..=60).map(|i| i as f64 * 0.05).collect();
    let table: Vec<Vec<f64>> = costs
        .iter()
        .map(|&c| budgets.iter().map(|&d| weapons_mix(&BudgetProblem::new(d, c).unwrap()).value).collect())
        .collect();
    for row in &table {
        for w in row.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
    }
    for pair in table.windows(2) {
        for (cheap, dear) in pair[0].iter().zip(&pair[1]) {
            assert!(dear <= &(cheap + 1e-12));
        }
    }
}
