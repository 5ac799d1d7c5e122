use bsharp_core::hull::{co_infinity, gamma, intermediate_sequence, sign_conflict_set, ExtReal};
use bsharp_core::oracle::{
    co_p_sample, convergence_sweep, gamma_p, hausdorff_distance, holder_sum_all, intermediate_point_p, PIndex,
};
use bsharp_core::scalar::{boxplus, boxplus_all};
use bsharp_core::vector::{euclidean_distance, norm_inf};
use bsharp_core::Tolerance;
use proptest::prelude::*;

const EX: Tolerance = Tolerance::EXACT;

fn pi(p: u32) -> PIndex {
    PIndex::new(p).unwrap()
}

fn signed(mags: &[f64], signs: &[bool]) -> Vec<f64> {
    mags.iter().zip(signs).map(|(&m, &s)| if s { -m } else { m }).collect()
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..=3).prop_flat_map(|n| (prop::collection::vec(-5.0..5.0f64, n), prop::collection::vec(-5.0..5.0f64, n)))
}

/// Plain nearest-neighbour scan in both directions.
fn naive_hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let directed = |a: &[Vec<f64>], b: &[Vec<f64>]| {
        a.iter()
            .map(|p| b.iter().map(|q| euclidean_distance(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

fn distance_to_segment(z: &[f64], x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - a).collect();
    let len2: f64 = d.iter().map(|v| v * v).sum();
    let s = if len2 == 0.0 {
        0.0
    } else {
        (z.iter().zip(x).zip(&d).map(|((zi, xi), di)| (zi - xi) * di).sum::<f64>() / len2).clamp(0.0, 1.0)
    };
    let proj: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + s * di).collect();
    euclidean_distance(z, &proj)
}

fn polyline_length(points: &[Vec<f64>]) -> f64 {
    points.windows(2).map(|w| euclidean_distance(&w[0], &w[1])).sum()
}

/// Length of `γ^(p)(x, y, ·)` on a fine grid in `t` and `1/t`.
fn curve_length_p(x: &[f64], y: &[f64], p: u32) -> f64 {
    let steps = 20_000;
    let mut points: Vec<Vec<f64>> = (0..=steps)
        .map(|k| gamma_p(x, y, ExtReal::Finite(k as f64 / steps as f64), pi(p)).unwrap())
        .collect();
    points.extend((0..steps).rev().map(|k| {
        let t = if k == 0 { ExtReal::Infinity } else { ExtReal::Finite(steps as f64 / k as f64) };
        gamma_p(x, y, t, pi(p)).unwrap()
    }));
    polyline_length(&points)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn holder_error_is_bounded_by_the_ratio_power(mags in prop::collection::vec(0.1..10.0f64, 2..=8), signs in prop::collection::vec(any::<bool>(), 8)) {
        let mut sorted = mags.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        prop_assume!(sorted.windows(2).all(|w| w[0] > w[1]));
        let (top, r) = (sorted[0], sorted[1] / sorted[0]);
        let x = signed(&mags, &signs);
        let limit = boxplus_all(&x, EX).unwrap();
        let n = x.len() as f64;
        for p in [0u32, 1, 5, 20, 100, 300] {
            let q = (2 * p + 1) as i32;
            let bound = 2.0 * top * (n - 1.0) * r.powi(q) + 1e-14 * top;
            let err = (holder_sum_all(&x, pi(p)).unwrap() - limit).abs();
            prop_assert!(err <= bound, "p={} err={} bound={}", p, err, bound);
        }
    }

    #[test]
    fn two_term_sign_matches_the_limit(a in -10.0..10.0f64, b in -10.0..10.0f64, p in 0u32..=500) {
        let finite = holder_sum_all(&[a, b], pi(p)).unwrap();
        let limit = boxplus(a, b, EX).unwrap();
        prop_assert_eq!(finite.signum() * (finite != 0.0) as i32 as f64, limit.signum() * (limit != 0.0) as i32 as f64);
    }

    #[test]
    fn gamma_p_end_limits((x, y) in pair(), p in 0u32..=300) {
        prop_assert_eq!(gamma_p(&x, &y, ExtReal::Finite(0.0), pi(p)).unwrap(), x.clone());
        prop_assert_eq!(gamma_p(&x, &y, ExtReal::Infinity, pi(p)).unwrap(), y.clone());
        let near_zero = gamma_p(&x, &y, ExtReal::Finite(1e-12), pi(p)).unwrap();
        let near_inf = gamma_p(&x, &y, ExtReal::Finite(1e12), pi(p)).unwrap();
        for k in 0..x.len() {
            prop_assert!((near_zero[k] - x[k]).abs() <= 1e-9);
            prop_assert!((near_inf[k] - y[k]).abs() <= 1e-9);
        }
    }

    #[test]
    fn gamma_p_is_continuous((x, y) in pair(), p in 0u32..=20, t in 0.0..5.0f64) {
        let a = gamma_p(&x, &y, ExtReal::Finite(t), pi(p)).unwrap();
        let b = gamma_p(&x, &y, ExtReal::Finite(t + 1e-9), pi(p)).unwrap();
        prop_assert!(euclidean_distance(&a, &b) <= 1e-5);
    }

    #[test]
    fn gamma_p_tends_to_gamma((x, y) in pair(), t in 0.0..6.0f64) {
        prop_assume!((t - 1.0).abs() > 0.03);
        for k in 0..x.len() {
            let (a, b) = (x[k].abs(), t * y[k].abs());
            prop_assume!(a.min(b) <= 0.97 * a.max(b));
        }
        let finite = gamma_p(&x, &y, ExtReal::Finite(t), pi(300)).unwrap();
        let limit = gamma(&x, &y, ExtReal::Finite(t), EX).unwrap();
        let scale = norm_inf(&x).max(norm_inf(&y)).max(1.0);
        for k in 0..x.len() {
            prop_assert!((finite[k] - limit[k]).abs() <= 1e-6 * scale, "k={} {} vs {}", k, finite[k], limit[k]);
        }
    }

    #[test]
    fn gamma_p_keeps_the_sign_pattern((x, y) in pair(), t in 0.0..6.0f64, p in 0u32..=300) {
        for k in 0..x.len() {
            let (a, b) = (x[k].abs(), t * y[k].abs());
            prop_assume!((a - b).abs() > 1e-9 * a.max(b) || a == 0.0 && b == 0.0);
        }
        let finite = gamma_p(&x, &y, ExtReal::Finite(t), pi(p)).unwrap();
        let limit = gamma(&x, &y, ExtReal::Finite(t), EX).unwrap();
        for k in 0..x.len() {
            let sign = |v: f64| if v > 0.0 { 1 } else if v < 0.0 { -1 } else { 0 };
            prop_assert_eq!(sign(finite[k]), sign(limit[k]), "k={}", k);
        }
    }

    #[test]
    fn order_p_intermediate_points((x, y) in pair(), p in 0u32..=300) {
        let conflicts = sign_conflict_set(&x, &y).unwrap();
        for i in 0..x.len() {
            let got = intermediate_point_p(&x, &y, i, pi(p));
            prop_assert_eq!(got.is_ok(), conflicts.contains(i));
            let Ok(point) = got else { continue };
            prop_assert_eq!(point[i], 0.0);
            let tau = x[i].abs() / y[i].abs();
            let direct = gamma_p(&x, &y, ExtReal::Finite(tau), pi(p)).unwrap();
            let scale = norm_inf(&x).max(norm_inf(&y));
            for j in 0..x.len() {
                let other = x[j].abs() / y[j].abs();
                if j != i && !(conflicts.contains(j) && (other / tau - 1.0).abs() < 0.01) {
                    prop_assert!((point[j] - direct[j]).abs() <= 1e-10 * scale, "j={} {} vs {}", j, point[j], direct[j]);
                }
            }
        }
    }

    #[test]
    fn order_p_intermediate_points_converge((x, y) in pair()) {
        let conflicts = sign_conflict_set(&x, &y).unwrap();
        let seq = intermediate_sequence(&x, &y, EX).unwrap();
        for i in conflicts.iter() {
            let tau = x[i].abs() / y[i].abs();
            // The normalizer |x_i| ⊕_p |y_i| is a tie too.
            prop_assume!(tau.min(1.0 / tau) <= 0.97);
            for j in 0..x.len() {
                let (a, b) = (y[i].abs() * x[j].abs(), x[i].abs() * y[j].abs());
                prop_assume!(j == i || a.min(b) <= 0.97 * a.max(b));
            }
            let finite = intermediate_point_p(&x, &y, i, pi(300)).unwrap();
            let limit = &seq.breakpoints.iter().find(|b| b.sources.contains(&i)).unwrap().point;
            let scale = norm_inf(&x).max(norm_inf(&y));
            for j in 0..x.len() {
                prop_assert!((finite[j] - limit[j]).abs() <= 1e-6 * scale, "tau={} j={}", tau, j);
            }
        }
    }

    #[test]
    fn hausdorff_matches_brute_force(a in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 1..40), b in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 1..40)) {
        let d = hausdorff_distance(&a, &b).unwrap();
        prop_assert_eq!(d, hausdorff_distance(&b, &a).unwrap());
        prop_assert_eq!(d, naive_hausdorff(&a, &b));
        prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn perturbed_folds_converge_inside_an_orthant(m in 1usize..=5, n in 1usize..=4, raw in prop::collection::vec(0.1..8.0f64, 20), push in prop::collection::vec(0.0..2.0f64, 20), signs in prop::collection::vec(any::<bool>(), 4)) {
        let at = |v: &[f64], i: usize, j: usize| if signs[j] { -v[i * 4 + j] } else { v[i * 4 + j] };
        let mut previous = f64::INFINITY;
        for p in [10u32, 100, 500] {
            let q = f64::from(2 * p + 1);
            let mut worst = 0.0_f64;
            let mut bound = 0.0_f64;
            for j in 0..n {
                let column: Vec<f64> = (0..m).map(|i| at(&raw, i, j)).collect();
                let perturbed: Vec<f64> = (0..m).map(|i| at(&raw, i, j) + at(&push, i, j) / f64::from(p)).collect();
                let limit = boxplus_all(&column, EX).unwrap();
                let top = perturbed.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                worst = worst.max((holder_sum_all(&perturbed, pi(p)).unwrap() - limit).abs());
                bound = bound.max(((m as f64).powf(1.0 / q) - 1.0) * top + 2.0 / f64::from(p));
            }
            prop_assert!(worst <= bound + 1e-12, "p={} {} > {}", p, worst, bound);
            prop_assert!(worst <= previous + 1e-12);
            previous = worst;
        }
        prop_assert!(previous <= 0.03);
    }

    #[test]
    fn p_zero_sample_is_the_straight_segment((x, y) in pair(), seed in any::<u64>()) {
        let sample = co_p_sample(&x, &y, pi(0), 200, seed).unwrap();
        prop_assert!(sample.contains(&x) && sample.contains(&y));
        let scale = norm_inf(&x).max(norm_inf(&y)).max(1.0);
        for z in &sample {
            prop_assert!(distance_to_segment(z, &x, &y) <= 1e-12 * scale);
        }
    }

    #[test]
    fn co_p_is_the_union_of_pieces_between_intermediate_points((x, y) in pair(), p in prop_oneof![Just(0u32), Just(1), Just(5), Just(20)], seed in any::<u64>()) {
        let count = 1000;
        let whole = co_p_sample(&x, &y, pi(p), count, seed).unwrap();
        let mut conflicts: Vec<usize> = sign_conflict_set(&x, &y).unwrap().iter().collect();
        conflicts.sort_by(|&a, &b| (x[a].abs() / y[a].abs()).total_cmp(&(x[b].abs() / y[b].abs())));
        let mut chain = vec![x.clone()];
        for &i in &conflicts {
            chain.push(intermediate_point_p(&x, &y, i, pi(p)).unwrap());
        }
        chain.push(y.clone());
        let mut union = Vec::new();
        for w in chain.windows(2) {
            union.extend(co_p_sample(&w[0], &w[1], pi(p), count, seed).unwrap());
        }
        let resolution = 4.0 * curve_length_p(&x, &y, p) / count as f64;
        let d = hausdorff_distance(&whole, &union).unwrap();
        prop_assert!(d <= resolution + 1e-12, "d={} resolution={}", d, resolution);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn convergence_is_monotone_up_to_grid_noise((x, y) in pair(), seed in any::<u64>()) {
        let count = 1000;
        let rows = convergence_sweep(&x, &y, &[pi(5), pi(20), pi(100), pi(300)], count, seed, EX).unwrap();
        let hull = co_infinity(&x, &y, EX).unwrap();
        let resolution = polyline_length(&hull.polyline()) / count as f64;
        for w in rows.windows(2) {
            prop_assert!(w[1].hausdorff <= w[0].hausdorff + 2.0 * resolution + 1e-12, "{:?}", rows);
        }
    }
}

#[test]
fn worked_example_intermediate_point() {
    let point = intermediate_point_p(&[4.0, 2.0], &[-2.0, -3.0], 0, pi(300)).unwrap();
    assert_eq!(point[0], 0.0);
    assert!((point[1] + 3.0).abs() <= 1e-6);
}

#[test]
fn equal_points_converge_trivially() {
    let rows = convergence_sweep(&[1.5, -2.0], &[1.5, -2.0], &[pi(0), pi(5), pi(300)], 200, 7, EX).unwrap();
    assert!(rows.iter().all(|r| r.hausdorff <= 1e-12), "{rows:?}");
}

#[test]
fn finite_p_rounds_corners_by_a_fixed_amount() {
    // Co^∞((5,1),(1,5)) has the corner (5,5); the closest point of Co^p is
    // γ^(p) at t = 1, at distance 5 (1 − 2^{−1/q}) √2.
    let (x, y) = ([5.0, 1.0], [1.0, 5.0]);
    let limit = co_infinity(&x, &y, EX).unwrap().dense_sample(4000);
    for p in [100u32, 300] {
        let q = f64::from(2 * p + 1);
        let corner = 5.0 * (1.0 - 2f64.powf(-1.0 / q)) * 2f64.sqrt();
        let d = hausdorff_distance(&co_p_sample(&x, &y, pi(p), 4000, 1).unwrap(), &limit).unwrap();
        assert!(d >= corner - 1e-9, "p={p}: {d} < {corner}");
        assert!(d <= corner + 1e-3, "p={p}: {d} vs {corner}");
    }
}
