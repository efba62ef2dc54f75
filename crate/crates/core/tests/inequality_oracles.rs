use std::collections::BTreeMap;
use std::sync::Arc;

use lpharmonic_core::inequalities::{
    folner_profile, gerl_ratio_search, isoperimetric_check, max_principle_scan, mean_value_bound_check,
    mean_value_suite, sobolev_pd_check, sobolev_sd_check, z_example, InequalityReport, SetFamily,
    DEFAULT_CAUCHY_EPS,
};
use lpharmonic_core::solver::solve_dirichlet;
use lpharmonic_core::{make_group, CayleyBall, Element, Error, GraphFunction, GroupSpec, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ball(spec: GroupSpec, r: usize) -> Arc<CayleyBall> {
    Arc::new(make_group(spec).unwrap().build_ball(r).unwrap())
}

fn sample(report: &InequalityReport, label: &str) -> f64 {
    report.samples.iter().find(|s| s.label == label).unwrap().ratio
}

fn assert_witness(report: &InequalityReport, b: &Arc<CayleyBall>) {
    let again = report.reevaluate(b).unwrap();
    assert!((again - report.constant).abs() <= 1e-10 * report.constant.max(1.0), "{again} vs {}", report.constant);
}

#[test]
fn folner_ratios_match_closed_forms() {
    // Free(2): |B_k| = 2·3^k - 1, ∂B_k = S_k with 4·3^{k-1} elements
    let free = folner_profile(GroupSpec::Free { rank: 2 }, 10, 2.0).unwrap();
    for r in &free {
        let k = r.k as u32;
        assert_eq!(r.size as u64, 2 * 3u64.pow(k) - 1);
        assert_eq!(r.boundary_size as u64, 4 * 3u64.pow(k - 1));
        assert!(r.ratio >= 0.6);
        // each sphere vertex has three outward generators
        assert_eq!(r.cut_pairs, 3 * r.boundary_size);
    }
    let last = free.last().unwrap().ratio;
    assert!((last - 78_732.0 / 118_097.0).abs() < 1e-15);
    assert!((0.66..=0.67).contains(&last));

    // Z^2: |B_k| = 2k² + 2k + 1, |∂B_k| = 4k
    let lattice = folner_profile(GroupSpec::FreeAbelian { rank: 2 }, 50, 2.0).unwrap();
    for r in &lattice {
        let k = r.k;
        assert_eq!(r.size, 2 * k * k + 2 * k + 1);
        assert_eq!(r.boundary_size, 4 * k);
    }
    for w in lattice.windows(2) {
        assert!(w[1].ratio < w[0].ratio);
    }
    assert!(lattice[49].ratio < 0.06);
    assert!(lattice[39].ratio < 0.1);
}

#[test]
fn folner_energy_equals_cut_count() {
    let cases = [
        (GroupSpec::FreeAbelian { rank: 1 }, 8),
        (GroupSpec::FreeAbelian { rank: 2 }, 8),
        (GroupSpec::Free { rank: 2 }, 5),
        (GroupSpec::Heisenberg, 4),
    ];
    for (spec, k_max) in cases {
        for p in [1.5, 2.0, 3.0] {
            for r in folner_profile(spec, k_max, p).unwrap() {
                // ‖f_k‖^p = 2·cut/|G_k|, each cut edge seen from both ends
                let exact = 2.0 * r.cut_pairs as f64 / r.size as f64;
                assert!((r.folner_energy - exact).abs() <= 1e-12 * exact, "{spec} k={}", r.k);
                assert!(r.corrected_holds);
                assert!(r.ratio > 0.0 && r.ratio <= 1.0);
            }
        }
    }
    // the 2|∂G_k|/|G_k| bound is tight on Z only
    assert!(folner_profile(GroupSpec::FreeAbelian { rank: 1 }, 20, 2.0).unwrap().iter().all(|r| r.literal_holds));
    assert!(folner_profile(GroupSpec::FreeAbelian { rank: 2 }, 10, 2.0).unwrap().iter().all(|r| !r.literal_holds));
}

#[test]
fn gerl_on_the_integer_line_diverges() {
    let b = ball(GroupSpec::FreeAbelian { rank: 1 }, 101);
    let rep = gerl_ratio_search(&b, 2.0, 20, 7).unwrap();
    assert!((sample(&rep, "ball k=0") - 0.5).abs() < 1e-15);
    let bound = rep.divergence_bound.unwrap();
    assert!((bound - (201.0f64 / 4.0).sqrt()).abs() < 1e-12);
    assert!(rep.constant >= 7.08);
    assert!(rep.pass);
    assert_witness(&rep, &b);
    assert_eq!(gerl_ratio_search(&b, 2.0, 20, 7).unwrap(), rep);
}

#[test]
fn gerl_on_the_free_group_stabilizes() {
    let b = ball(GroupSpec::Free { rank: 2 }, 8);
    let rep = gerl_ratio_search(&b, 2.0, 200, 3).unwrap();
    // δ_e: ‖δ_e‖_2 = 1, ‖δ_e‖_{D(2)} = √8
    assert!((sample(&rep, "ball k=0") - 8f64.sqrt().recip()).abs() < 1e-15);
    let s = rep.stability.as_ref().unwrap();
    assert_eq!(s.radius, 6);
    assert!(s.stable && rep.pass, "{s:?}");
    // spectral bound: ‖u‖_2² ≤ ‖u‖_{D(2)}² / (2|S|(1 - ‖P‖)), ‖P‖ = √3/2
    assert!(rep.constant <= (8.0 * (1.0 - 3f64.sqrt() / 2.0)).sqrt().recip());
    assert_witness(&rep, &b);
}

#[test]
fn sobolev_sd_values() {
    for (spec, r) in [(GroupSpec::FreeAbelian { rank: 2 }, 6), (GroupSpec::Free { rank: 2 }, 4)] {
        let b = ball(spec, r);
        let rep = sobolev_sd_check(&b, 2.0, 50, 1).unwrap();
        let deg = spec.degree() as f64;
        assert!((sample(&rep, "ball k=0") - 1.0 / (2.0 * deg)).abs() < 1e-15);
        assert_witness(&rep, &b);
    }
    // on Z the indicator χ_k gives (2k+1)^{1/2} / 4
    let b = ball(GroupSpec::FreeAbelian { rank: 1 }, 40);
    let rep = sobolev_sd_check(&b, 2.0, 10, 1).unwrap();
    for k in [1usize, 10, 40] {
        let v = sample(&rep, &format!("ball k={k}"));
        assert!((v - ((2 * k + 1) as f64).sqrt() / 4.0).abs() < 1e-12);
        assert!(v >= (k as f64).sqrt() / 4.0);
    }
    assert!(matches!(sobolev_sd_check(&b, 1.0, 10, 1), Err(Error::InvalidParameter(_))));
}

#[test]
fn sobolev_sd_stabilizes_on_the_plane() {
    let small = sobolev_sd_check(&ball(GroupSpec::FreeAbelian { rank: 2 }, 10), 2.0, 100, 2).unwrap();
    let b = ball(GroupSpec::FreeAbelian { rank: 2 }, 20);
    let large = sobolev_sd_check(&b, 2.0, 100, 2).unwrap().with_reference(&small, 1.25);
    assert!(large.pass, "{:?}", large.stability);
    assert_witness(&large, &b);
}

#[test]
fn sobolev_pd_values() {
    let b = ball(GroupSpec::FreeAbelian { rank: 3 }, 4);
    let rep = sobolev_pd_check(&b, 2.0, 3.0, 50, 1).unwrap();
    // ‖δ_e‖_6 = 1 and ‖δ_e‖_{D(2)}² = 2|S| = 12
    assert!((sample(&rep, "ball k=0") - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-12);
    assert!(rep.notes.is_empty());
    assert_witness(&rep, &b);
    let beyond = sobolev_pd_check(&b, 2.5, 3.0, 5, 1).unwrap();
    assert_eq!(beyond.notes.len(), 1);
    let line = ball(GroupSpec::FreeAbelian { rank: 1 }, 5);
    assert!(matches!(sobolev_pd_check(&line, 2.0, 1.0, 5, 1), Err(Error::InvalidParameter(_))));
    assert!(matches!(sobolev_pd_check(&line, 2.0, 2.0, 5, 1), Err(Error::InvalidParameter(_))));
}

#[test]
fn isoperimetric_values() {
    let b = ball(GroupSpec::FreeAbelian { rank: 2 }, 12);
    let rep = isoperimetric_check(&b, 2.0, &SetFamily::Boxes).unwrap();
    for n in 2..=6usize {
        let expected = (n * n) as f64 / ((4 * n - 4) * (4 * n - 4)) as f64;
        assert!((sample(&rep, &format!("box n={n}")) - expected).abs() < 1e-15, "n={n}");
    }
    // {e} is the box of side 1
    assert_eq!(sample(&rep, "box n=1"), 1.0);
    assert_eq!(rep.constant, 1.0);
    assert_witness(&rep, &b);

    let e = isoperimetric_check(&b, 3.0, &SetFamily::Explicit { sets: vec![vec![0], vec![]] }).unwrap();
    assert_eq!(e.constant, 1.0);
    assert_eq!(e.skipped, 1);

    let f = ball(GroupSpec::Free { rank: 2 }, 8);
    let balls = isoperimetric_check(&f, 4.0, &SetFamily::Balls).unwrap();
    let ratios: Vec<f64> = (1..8).map(|k| sample(&balls, &format!("ball k={k}"))).collect();
    for w in ratios.windows(2) {
        assert!(w[1] < w[0]);
    }
    for (k, r) in (1..8).zip(&ratios) {
        let size = (2 * 3u64.pow(k) - 1) as f64;
        let sphere = (4 * 3u64.pow(k - 1)) as f64;
        assert!((r - size.powi(3) / sphere.powi(4)).abs() <= 1e-12 * r);
    }
    assert!(ratios[6] < 2e-3);

    let random = isoperimetric_check(&b, 2.0, &SetFamily::RandomConnected { count: 100, seed: 4 }).unwrap();
    assert_witness(&random, &b);
    assert_eq!(random.samples.len(), 100);
    assert!(matches!(
        isoperimetric_check(&b, 2.0, &SetFamily::Explicit { sets: vec![b.sphere(12)] }),
        Err(Error::BoundaryUndecidable { .. })
    ));
    assert!(isoperimetric_check(&f, 2.0, &SetFamily::Boxes).is_err());
}

#[test]
fn mean_value_examples() {
    let b = ball(GroupSpec::FreeAbelian { rank: 1 }, 3);
    let c = mean_value_bound_check(&GraphFunction::delta(b.clone(), 0), 2.0).unwrap();
    assert_eq!((c.lhs, c.rhs, c.pass), (4.0, 8.0, true));
    let zero = mean_value_bound_check(&GraphFunction::zeros(b.clone()), 3.0).unwrap();
    assert_eq!((zero.lhs, zero.rhs), (0.0, 0.0));
    let neg = GraphFunction::from_fn(b.clone(), |i| if i == 0 { -1.0 } else { 0.0 }).unwrap();
    assert!(matches!(mean_value_bound_check(&neg, 2.0), Err(Error::NegativeValue { .. })));
    assert!(mean_value_bound_check(&GraphFunction::delta(b.clone(), 0), 1.5).is_err());
    let edge = GraphFunction::indicator(b.clone(), &b.sphere(3));
    assert!(mean_value_bound_check(&edge, 2.0).is_err());

    // hand evaluation on Z: f = 1 at 0, 2 at 1, t = 2
    let b = ball(GroupSpec::FreeAbelian { rank: 1 }, 4);
    let one = b.index_of(&Element::Lattice(vec![1])).unwrap();
    let f = GraphFunction::from_fn(b.clone(), |i| [(0, 1.0), (one, 2.0)].iter().find(|x| x.0 == i).map_or(0.0, |x| x.1)).unwrap();
    let c = mean_value_bound_check(&f, 2.0).unwrap();
    // f² = (1, 4): ordered-pair variation 2·(1 + 3 + 4) = 16
    assert_eq!(c.lhs, 16.0);
    // 2t[1·(1 + 1) + 2·(1 + 2)] = 4·8
    assert_eq!(c.rhs, 32.0);
}

#[test]
fn mean_value_suite_has_no_violations() {
    for (spec, r) in [(GroupSpec::FreeAbelian { rank: 2 }, 6), (GroupSpec::Free { rank: 2 }, 4)] {
        let suite = mean_value_suite(&ball(spec, r), &[2.0, 2.5, 3.0], 100, 9).unwrap();
        assert_eq!(suite.checks, 300);
        assert_eq!(suite.violations, 0);
        assert!(suite.worst_ratio <= 1.0 && suite.pass);
    }
}

#[test]
fn z_example_values() {
    let one = z_example(2.0, 3.0, 1, DEFAULT_CAUCHY_EPS).unwrap();
    assert_eq!((one.lp_partial, one.lpprime_partial, one.difference_sum), (1.0, 1.0, 1.0));

    let big = z_example(2.0, 3.0, 1_000_000, DEFAULT_CAUCHY_EPS).unwrap();
    assert!(big.difference_sum <= 1.0 + std::f64::consts::PI.powi(2) / 6.0);
    assert!(big.pass && big.in_dp && big.lp_diverging && big.lpprime_cauchy);
    // H_N - H_{N/2} → ln 2 with error ~ 1/(4N)
    assert!((big.lp_half_gain - 2f64.ln()).abs() < 1e-6);
    let mid = z_example(2.0, 3.0, 100_000, DEFAULT_CAUCHY_EPS).unwrap();
    assert!((big.difference_sum - mid.difference_sum).abs() < 1e-3);

    // direct summation of n^{-3/2} over [500, 1000] and [1, 1000]
    let tail: f64 = (500..=1000).map(|n| (n as f64).powf(-1.5)).sum();
    let total: f64 = (1..=1000).map(|n| (n as f64).powf(-1.5)).sum();
    let thousand = z_example(2.0, 3.0, 1000, DEFAULT_CAUCHY_EPS).unwrap();
    assert!((thousand.lpprime_tail_ratio - tail / total).abs() < 1e-12);
    assert!((thousand.lpprime_tail_ratio - 0.010_30).abs() < 5e-5);

    assert!(z_example(1.0, 3.0, 10, 0.05).is_err());
    assert!(z_example(2.0, 2.0, 10, 0.05).is_err());
    assert!(z_example(2.0, 3.0, 0, 0.05).is_err());
}

#[test]
fn max_principle_examples() {
    let b = ball(GroupSpec::FreeAbelian { rank: 1 }, 10);
    let linear = GraphFunction::from_fn(b.clone(), |i| b.element(i).as_integer().unwrap() as f64).unwrap();
    let scan = max_principle_scan(&linear, 2.0, 1e-9).unwrap();
    assert!(scan.pass && scan.harmonic);
    assert_eq!((scan.max, scan.min), (10.0, -10.0));
    assert!(max_principle_scan(&GraphFunction::constant(b.clone(), 3.0), 1.5, 1e-9).unwrap().pass);
    let bump = GraphFunction::delta(b.clone(), 0);
    assert!(!max_principle_scan(&bump, 2.0, 1e-9).unwrap().pass);

    let f2 = ball(GroupSpec::Free { rank: 2 }, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for p in [1.5, 2.0, 3.0] {
        for _ in 0..5 {
            let bv: BTreeMap<usize, f64> = f2.boundary().into_iter().map(|i| (i, rng.gen_range(-1.0..1.0))).collect();
            let (h, _) = solve_dirichlet(&f2, &bv, p, &SolverOptions::default()).unwrap();
            let scan = max_principle_scan(&h, p, 1e-9).unwrap();
            assert!(scan.pass && scan.harmonic, "{scan:?}");
        }
    }
}
