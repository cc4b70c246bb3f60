mod common;

use mer_core::seed;
use mer_core::stats::{
    bootstrap_ci, bootstrap_mean_ci, exact_p, holm_bonferroni, midranks, normal_p, wilcoxon_differences,
    wilcoxon_signed_rank, Alternative,
};
use rand::Rng;
use rand_distr::StandardNormal;

#[test]
fn exact_matches_enumeration_small_n() {
    let mut rng = seed::rng(101);
    for sample in 0..100 {
        let n = 1 + sample % 12;
        // Coarse values so that some samples carry ties.
        let d: Vec<f64> = (0..n)
            .map(|_| {
                let v: f64 = rng.sample(StandardNormal);
                let v = if sample % 3 == 0 { (v * 2.0).round() / 2.0 } else { v };
                if v == 0.0 {
                    0.25
                } else {
                    v
                }
            })
            .collect();
        let ranks = midranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
        let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
        for alt in [Alternative::TwoSided, Alternative::Greater, Alternative::Less] {
            let want = common::wilcoxon_enumerated_p(&ranks, w_plus, alt);
            let got = exact_p(&ranks, w_plus, alt);
            assert!((got - want).abs() <= 1e-12, "n={n} {alt:?}: {got} vs {want}");
        }
        if n >= 5 {
            let r = wilcoxon_differences(&d, Alternative::TwoSided).unwrap();
            assert!(r.exact);
            let want = common::wilcoxon_enumerated_p(&ranks, w_plus, Alternative::TwoSided);
            assert!((r.p - want).abs() <= 1e-12);
        }
    }
}

#[test]
fn normal_approximation_close_to_exact_for_n_20_to_25() {
    for n in 20..=25usize {
        let ranks: Vec<f64> = (1..=n).map(|r| r as f64).collect();
        let total = n * (n + 1) / 2;
        let mut worst: f64 = 0.0;
        for w in 0..=total {
            let e = exact_p(&ranks, w as f64, Alternative::TwoSided);
            let a = normal_p(&ranks, w as f64, Alternative::TwoSided);
            worst = worst.max((e - a).abs());
        }
        assert!(worst < 0.01, "n={n}: max |exact - normal| = {worst}");
    }
}

#[test]
fn wilcoxon_sign_symmetry_and_shift() {
    let mut rng = seed::rng(3);
    for _ in 0..50 {
        let a: Vec<f64> = (0..15).map(|_| rng.sample(StandardNormal)).collect();
        let b: Vec<f64> = (0..15).map(|_| rng.sample(StandardNormal)).collect();
        let ab = wilcoxon_signed_rank(&a, &b, Alternative::TwoSided).unwrap();
        let ba = wilcoxon_signed_rank(&b, &a, Alternative::TwoSided).unwrap();
        assert_eq!(ab.p, ba.p);
        assert_eq!(ab.w_plus, ba.w_minus);
        let g = wilcoxon_signed_rank(&a, &b, Alternative::Greater).unwrap();
        let l = wilcoxon_signed_rank(&a, &b, Alternative::Less).unwrap();
        assert!(g.p + l.p >= 1.0 - 1e-12);
    }
    // A large consistent shift is detected.
    let a: Vec<f64> = (0..12).map(|i| 1.0 + i as f64 * 0.01).collect();
    let b = vec![0.0; 12];
    let r = wilcoxon_signed_rank(&a, &b, Alternative::TwoSided).unwrap();
    assert!((r.p - 2.0 / 4096.0).abs() < 1e-15);
}

#[test]
fn holm_hand_example() {
    let h = holm_bonferroni(&[0.01, 0.04, 0.03], 0.05).unwrap();
    for (got, want) in h.corrected.iter().zip([0.03, 0.06, 0.06]) {
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");
    }
    assert_eq!(h.reject, [true, false, false]);
}

#[test]
fn holm_monotone_on_random_vectors() {
    let mut rng = seed::rng(5);
    for _ in 0..1000 {
        let m = rng.gen_range(1..=20);
        let p: Vec<f64> = (0..m).map(|_| rng.gen::<f64>().powi(3)).collect();
        common::check_holm_properties(&p, &holm_bonferroni(&p, 0.05).unwrap());
    }
}

#[test]
fn bootstrap_coverage_of_normal_mean() {
    let coverage = common::bootstrap_coverage(200, 200, 1000, 77);
    assert!((0.91..=0.99).contains(&coverage), "coverage {coverage}");
}

#[test]
fn bootstrap_interval_width_shrinks_with_n() {
    let mut rng = seed::rng(9);
    let width = |n: usize, rng: &mut seed::Rng| {
        let x: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let ci = bootstrap_mean_ci(&x, 2000, 0.95, 1).unwrap();
        ci.hi - ci.lo
    };
    let w100 = width(100, &mut rng);
    let w1600 = width(1600, &mut rng);
    // Width scales as 1/sqrt(n): expect a ratio near 4.
    assert!((2.8..5.5).contains(&(w100 / w1600)), "{w100} / {w1600}");
    // 2 * 1.96 / sqrt(100)
    assert!((w100 - 0.392).abs() < 0.12, "{w100}");
}

#[test]
fn bootstrap_is_seeded() {
    let x: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
    let a = bootstrap_mean_ci(&x, 500, 0.9, 4).unwrap();
    assert_eq!(a, bootstrap_mean_ci(&x, 500, 0.9, 4).unwrap());
    assert_ne!(a, bootstrap_mean_ci(&x, 500, 0.9, 5).unwrap());
    assert!(a.lo <= a.estimate && a.estimate <= a.hi);
}

#[test]
fn bootstrap_redraws_undefined_resamples() {
    // Undefined when the resample has no index below 2.
    let ci = bootstrap_ci(20, 200, 0.95, 8, |idx| idx.iter().any(|&i| i < 2).then_some(1.0)).unwrap();
    assert!(ci.redraws > 0);
    assert_eq!((ci.lo, ci.hi), (1.0, 1.0));
}
