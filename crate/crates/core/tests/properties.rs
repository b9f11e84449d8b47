//! Property suites for the measure/DP invariants: sublinearity, variance
//! duality, sandwich bounds, strategy dominance, mixture-grid monotonicity,
//! and the classical reductions.

use gcltlab_core::kernel::{
    centered_sum_sup, conditional_range_check, conditional_variance_check, joint_expect, sup_expect_history,
    sup_expect_sum, CenteredGrid, HorizonModel, MixtureGrid,
};
use gcltlab_core::measure::{DiscreteMeasure, MeasureSet};
use proptest::prelude::*;

fn eval_cubic(c: &[f64; 4], x: f64) -> f64 {
    c[0] + x * (c[1] + x * (c[2] + x * c[3]))
}

fn arb_measure(max_support: usize) -> impl Strategy<Value = DiscreteMeasure> {
    proptest::collection::btree_set(-32i32..=32, 1..=max_support)
        .prop_flat_map(|points| {
            let n = points.len();
            (Just(points), proptest::collection::vec(0.05f64..1.0, n))
        })
        .prop_map(|(points, raw)| {
            let total: f64 = raw.iter().sum();
            DiscreteMeasure::new(points.iter().zip(&raw).map(|(&p, &w)| (p as f64 / 16.0, w / total)))
                .expect("generated atoms are valid")
        })
}

fn arb_set(max_extremes: usize, max_support: usize) -> impl Strategy<Value = MeasureSet> {
    proptest::collection::vec(arb_measure(max_support), 1..=max_extremes)
        .prop_map(|ms| MeasureSet::new(ms).expect("nonempty"))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hashed_strategy(seed: u64, extremes: usize) -> impl Fn(usize, &[f64]) -> Vec<f64> {
    move |step, history| {
        let mut h = splitmix64(seed ^ step as u64);
        for &x in history {
            h = splitmix64(h ^ x.to_bits());
        }
        let mut weights = Vec::with_capacity(extremes);
        let mut total = 0.0;
        for _ in 0..extremes {
            h = splitmix64(h);
            let u = (h >> 11) as f64 / (1u64 << 53) as f64 + 1e-3;
            weights.push(u);
            total += u;
        }
        for w in &mut weights {
            *w /= total;
        }
        weights
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn upper_expectation_is_sublinear(
        set in arb_set(4, 4),
        f in proptest::array::uniform4(-2.0f64..2.0),
        g in proptest::array::uniform4(-2.0f64..2.0),
        lam in 0.0f64..3.0,
        c in -2.0f64..2.0,
    ) {
        let uf = set.upper_expect(|x| eval_cubic(&f, x));
        let ug = set.upper_expect(|x| eval_cubic(&g, x));
        let sum = set.upper_expect(|x| eval_cubic(&f, x) + eval_cubic(&g, x));
        prop_assert!(sum <= uf + ug + 1e-9, "subadditivity: {sum} > {uf} + {ug}");
        let scaled = set.upper_expect(|x| lam * eval_cubic(&f, x));
        prop_assert!((scaled - lam * uf).abs() <= 1e-9 * (1.0 + scaled.abs()));
        let constant = set.upper_expect(|_| c);
        prop_assert!((constant - c).abs() <= 1e-9);
    }

    #[test]
    fn variance_duality_against_the_grid_oracle(set in arb_set(3, 4)) {
        let vb = set.variance_bounds();
        // Nested grids (50 divides 200), so the estimates are comparable.
        let (coarse_max, coarse_min) = set.variance_oracle(0.02).unwrap();
        let (fine_max, fine_min) = set.variance_oracle(0.005).unwrap();
        prop_assert!(vb.upper >= coarse_max - 1e-9);
        prop_assert!(vb.upper >= fine_max - 1e-9);
        prop_assert!(fine_max >= coarse_max, "finer grid can only improve the max");
        prop_assert!(vb.upper - fine_max <= vb.upper - coarse_max + 1e-12, "gap shrinks under refinement");
        prop_assert!((vb.lower - coarse_min).abs() <= 1e-12, "grid min hits the vertex min");
        prop_assert!((vb.lower - fine_min).abs() <= 1e-12);
        let mi = set.mean_interval();
        prop_assert!(mi.contains(vb.argmin_mean_upper));
        prop_assert!(vb.lower >= 0.0 && vb.lower <= vb.upper + 1e-15);
    }

    #[test]
    fn singleton_variance_bounds_collapse(m in arb_measure(5)) {
        let classical = m.variance();
        let vb = MeasureSet::singleton(m).variance_bounds();
        prop_assert!((vb.upper - classical).abs() <= 1e-10);
        prop_assert!((vb.lower - classical).abs() <= 1e-12);
    }

    #[test]
    fn tail_deficiency_is_monotone_and_vanishes(set in arb_set(4, 4), l1 in 0.0f64..5.0, l2 in 0.0f64..5.0) {
        let (lo, hi) = if l1 <= l2 { (l1, l2) } else { (l2, l1) };
        let at_lo = set.tail_deficiency(lo).unwrap();
        let at_hi = set.tail_deficiency(hi).unwrap();
        prop_assert!(at_lo >= at_hi - 1e-12);
        let r = set.max_abs_support();
        prop_assert_eq!(set.tail_deficiency(r * r).unwrap(), 0.0);
    }

    #[test]
    fn every_strategy_is_dominated_by_the_sup(set in arb_set(3, 3), n in 1usize..=4, seed in any::<u64>()) {
        let model = HorizonModel::new(set, n).unwrap();
        let strategy = hashed_strategy(seed, model.base().len());
        let phi = |x: &[f64]| x.iter().map(|v| (v - 0.3).abs()).sum::<f64>() - x.iter().sum::<f64>() * 0.5;
        let value = joint_expect(&model, &strategy, phi).unwrap();
        let sup = sup_expect_history(&model, phi).unwrap();
        prop_assert!(value <= sup + 1e-12, "{value} > sup {sup}");
    }

    #[test]
    fn sandwich_reports_stay_clean(set in arb_set(3, 3), n in 2usize..=4, seed in any::<u64>()) {
        let model = HorizonModel::new(set, n).unwrap();
        let strategy = hashed_strategy(seed, model.base().len());
        let range = conditional_range_check(&model, &strategy, |x| (x - 0.25).abs()).unwrap();
        prop_assert!(range.is_clean(), "range violations: {:?}", range.violations);
        let var = conditional_variance_check(&model, &strategy).unwrap();
        prop_assert!(var.is_clean(), "variance violations: {:?}", var.violations);
    }

    #[test]
    fn uncentered_sum_dominates_constant_vertex_strategies(set in arb_set(3, 3), n in 1usize..=6) {
        let model = HorizonModel::new(set.clone(), n).unwrap();
        let phi = |s: f64| 1.0 - (s - 0.25).abs();
        let scaling = 1.0 / n as f64;
        let sup = sup_expect_sum(&model, phi, scaling).unwrap();
        for extreme in set.extremes() {
            let single = HorizonModel::new(MeasureSet::singleton(extreme.clone()), n).unwrap();
            let classical = sup_expect_sum(&single, phi, scaling).unwrap();
            prop_assert!(sup >= classical - 1e-12, "sup {sup} below iid value {classical}");
        }
    }

    #[test]
    fn centered_dp_is_monotone_in_mixture_resolution(set in arb_set(2, 3), n in 1usize..=6) {
        let model = HorizonModel::new(set, n).unwrap();
        let vb = model.base().variance_bounds();
        let grid = CenteredGrid {
            radius: (4.0 * vb.upper.sqrt()).max(0.5) * 1.2,
            step: 0.02,
        };
        let phi = |x: f64| 1.0 - x.abs().min(1.0);
        // 5 | 10 | 20: the weight grids nest, so the sup cannot decrease.
        let v5 = centered_sum_sup(&model, phi, &MixtureGrid::new(5).unwrap(), &grid).unwrap();
        let v10 = centered_sum_sup(&model, phi, &MixtureGrid::new(10).unwrap(), &grid).unwrap();
        let v20 = centered_sum_sup(&model, phi, &MixtureGrid::new(20).unwrap(), &grid).unwrap();
        prop_assert!(v5 <= v10 && v10 <= v20, "{v5} {v10} {v20}");
    }

    #[test]
    fn path_embedding_is_one_lipschitz(
        x in proptest::collection::vec(-3.0f64..3.0, 1..12),
        bumps in proptest::collection::vec(-0.5f64..0.5, 12),
    ) {
        let y: Vec<f64> = x.iter().zip(&bumps).map(|(a, b)| a + b).collect();
        let px = gcltlab_core::EmbeddedPath::new(&x).unwrap();
        let py = gcltlab_core::EmbeddedPath::new(&y).unwrap();
        let dist = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0f64, f64::max);
        for j in 0..=200 {
            let t = j as f64 / 200.0;
            prop_assert!((px.eval(t) - py.eval(t)).abs() <= dist + 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn centered_singleton_reduces_to_the_classical_convolution(m in arb_measure(3), n in 1usize..=10) {
        let set = MeasureSet::singleton(m.clone());
        let model = HorizonModel::new(set, n).unwrap();
        let phi = |x: f64| 1.0 / (1.0 + x * x);
        let vb = model.base().variance_bounds();
        let grid = CenteredGrid {
            radius: (4.0 * vb.upper.sqrt()).max(0.5) * 1.2,
            step: 0.002,
        };
        let dp = centered_sum_sup(&model, phi, &MixtureGrid::new(1).unwrap(), &grid).unwrap();
        // Oracle: direct enumeration of all support^n paths.
        let mean = m.mean();
        let sqrt_n = (n as f64).sqrt();
        let mut oracle = 0.0;
        let mut stack: Vec<(usize, f64, f64)> = vec![(0, 0.0, 1.0)];
        while let Some((depth, sum, prob)) = stack.pop() {
            if depth == n {
                oracle += prob * phi(sum / sqrt_n);
                continue;
            }
            for &(p, w) in m.atoms() {
                stack.push((depth + 1, sum + (p - mean), prob * w));
            }
        }
        prop_assert!((dp - oracle).abs() <= 5e-3, "dp {dp} vs convolution {oracle}");
    }
}

/// Grid-refinement stability of the centered DP: halving the spatial step
/// changes the value by less each time.
#[test]
fn centered_dp_is_stable_under_grid_refinement() {
    let model = HorizonModel::new(gcltlab_core::harness::two_point_hull(), 32).unwrap();
    let phi = |x: f64| 1.0 - x.abs().min(1.0);
    let mixtures = MixtureGrid::new(4).unwrap();
    let value = |step: f64| {
        centered_sum_sup(&model, phi, &mixtures, &CenteredGrid { radius: 2.4, step }).unwrap()
    };
    let v4 = value(0.04);
    let v2 = value(0.02);
    let v1 = value(0.01);
    let coarse_jump = (v2 - v4).abs();
    let fine_jump = (v1 - v2).abs();
    assert!(
        fine_jump <= coarse_jump + 1e-9,
        "refinement should stabilize: |{v1} - {v2}| vs |{v2} - {v4}|"
    );
}
