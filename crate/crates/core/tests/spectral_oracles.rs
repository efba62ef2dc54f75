use std::sync::Arc;

use lpharmonic_core::spectral::{
    construct_harmonic, degree_of_freedom_check, neumann_apply, operator_norm_estimate, Backend, EstimateKind,
};
use lpharmonic_core::solver::reduced_class_is_trivial;
use lpharmonic_core::walk::{markov_zero_outside, weighted_lp_norm, FreeBranchQuotient, WalkSpace};
use lpharmonic_core::{make_group, CayleyBall, Error, GraphFunction, GroupSpec, SolverOptions};
use nalgebra::DMatrix;

fn ball(spec: GroupSpec, r: usize) -> Arc<CayleyBall> {
    Arc::new(make_group(spec).unwrap().build_ball(r).unwrap())
}

/// Largest eigenvalue of the radial chain of `P` compressed to `B_R` in a
/// free group of rank `k`, from a dense symmetric eigensolve.
fn radial_oracle(k: usize, r: usize) -> f64 {
    let d = (2 * k) as f64;
    let mut a = DMatrix::<f64>::zeros(r + 1, r + 1);
    for m in 0..r {
        let up = if m == 0 { 1.0 } else { (d - 1.0) / d };
        let w = (up / d).sqrt();
        a[(m, m + 1)] = w;
        a[(m + 1, m)] = w;
    }
    a.symmetric_eigen().eigenvalues.max()
}

#[test]
fn free_group_norm_matches_radial_eigensolve() {
    let mut last = 0.0;
    for r in [6, 8, 10] {
        let est = operator_norm_estimate(ball(GroupSpec::Free { rank: 2 }, r).as_ref(), 2.0, 20_000).unwrap();
        assert_eq!(est.kind, EstimateKind::Certified);
        assert!(est.stabilized);
        assert!((est.value - radial_oracle(2, r)).abs() < 1e-9, "R={r}: {}", est.value);
        assert!(est.value >= last);
        last = est.value;
    }
    // frozen: the truncated operator at radius 10
    assert!((last - 0.840_445_469_808).abs() < 1e-9);
    // Kesten's value √3/2 bounds every truncation
    assert!(last < 3f64.sqrt() / 2.0);
}

#[test]
fn quotient_norm_agrees_with_explicit_ball() {
    for (k, r) in [(2, 6), (3, 4)] {
        let explicit = operator_norm_estimate(ball(GroupSpec::Free { rank: k }, r).as_ref(), 2.0, 20_000).unwrap();
        let lumped = operator_norm_estimate(&FreeBranchQuotient::new(k, r).unwrap(), 2.0, 20_000).unwrap();
        assert!((explicit.value - lumped.value).abs() < 1e-10);
    }
    for k in [2, 3] {
        let est = operator_norm_estimate(&FreeBranchQuotient::new(k, 10).unwrap(), 2.0, 20_000).unwrap();
        assert!(est.value < 1.0 - 1e-2);
        assert!((est.value - radial_oracle(k, 10)).abs() < 1e-9);
    }
}

#[test]
fn integer_line_norm_approaches_one() {
    let est = operator_norm_estimate(ball(GroupSpec::FreeAbelian { rank: 1 }, 200).as_ref(), 2.0, 20_000).unwrap();
    assert!(est.value >= 0.99 && est.value <= 1.0);
    // cosine profile Rayleigh quotient as an independent lower bound
    let n = 401usize;
    let f: Vec<f64> = (0..n).map(|i| (std::f64::consts::PI * (i as f64 + 1.0) / (n as f64 + 1.0)).sin()).collect();
    let mut pf = 0.0;
    for i in 0..n {
        let left = if i > 0 { f[i - 1] } else { 0.0 };
        let right = if i + 1 < n { f[i + 1] } else { 0.0 };
        pf += f[i] * 0.5 * (left + right);
    }
    let rayleigh = pf / f.iter().map(|x| x * x).sum::<f64>();
    assert!(rayleigh > 0.9999);
    assert!(est.value >= rayleigh - 1e-3);
}

#[test]
fn heuristic_estimate_for_other_exponents() {
    let b = ball(GroupSpec::Free { rank: 2 }, 6);
    let two = operator_norm_estimate(b.as_ref(), 2.0, 5000).unwrap().value;
    for p in [1.5, 3.0] {
        let est = operator_norm_estimate(b.as_ref(), p, 5000).unwrap();
        assert_eq!(est.kind, EstimateKind::Heuristic);
        assert!(est.value > 0.5 && est.value < 1.0);
        // Riesz–Thorin: ‖P‖_p ≥ ‖P‖_2 fails only by truncation, so stay close
        assert!(est.value >= two - 0.05);
    }
}

#[test]
fn neumann_partial_sums_are_cauchy() {
    let q = FreeBranchQuotient::new(2, 40).unwrap();
    let rho = operator_norm_estimate(&q, 2.0, 20_000).unwrap().value;
    let mut rhs = vec![0.0; q.num_cells()];
    rhs[0] = 1.0;
    let out = neumann_apply(&q, &rhs, 30, 2.0, rho).unwrap();
    for (k, inc) in out.increments.iter().enumerate() {
        assert!(*inc <= rho.powi(k as i32) + 1e-15, "k={k}");
    }
    for k in 25..30 {
        assert!(out.increments[k + 1] <= rho * out.increments[k]);
    }
    // the sum solves (I - P) F = -rhs away from the truncated tail
    let mut p_sum = vec![0.0; q.num_cells()];
    markov_zero_outside(&q, &out.sum, &mut p_sum);
    let defect: Vec<f64> = (0..q.num_cells()).map(|c| out.sum[c] - p_sum[c] + rhs[c]).collect();
    assert!(weighted_lp_norm(&q, &defect, 2.0) <= out.increments[30] * 2.0);
}

#[test]
fn harmonic_matches_closed_form_on_the_tree() {
    // h = 2 - (3/4) 3^{-n} on the a-branch, 1 + (1/4) 3^{-n} elsewhere, h(e) = 5/4
    let c = construct_harmonic(GroupSpec::Free { rank: 2 }, 2.0, 45, 0, 40, Backend::Quotient).unwrap();
    let q = FreeBranchQuotient::new(2, 45).unwrap();
    for cell in 0..q.num_cells() {
        let n = q.level(cell);
        if n > 20 {
            continue;
        }
        let tail = 3f64.powi(-(n as i32));
        let exact = match q.branch(cell) {
            None => 1.25,
            Some(0) => 2.0 - 0.75 * tail,
            Some(_) => 1.0 + 0.25 * tail,
        };
        assert!((c.h[cell] - exact).abs() < 1e-3, "{}: {} vs {exact}", q.cell_label(cell), c.h[cell]);
    }
    let r = &c.report;
    assert!(r.residual <= 1e-2);
    assert!(r.residual_within_bound);
    assert!(r.support_matches);
    assert_eq!(r.support_size, 5.0);
    assert!(r.spread >= 0.5);
    assert!((r.defect_norm - 2f64.sqrt()).abs() < 1e-12);
    assert!(r.h2_norm.is_finite());
}

#[test]
fn residual_decays_geometrically_in_terms() {
    let run = |k: usize| {
        construct_harmonic(GroupSpec::Free { rank: 2 }, 2.0, 60, 0, k, Backend::Quotient).unwrap().report
    };
    let mut previous = f64::INFINITY;
    for k in [0, 5, 10, 20, 30, 40] {
        let r = run(k);
        assert!(r.residual > 0.0 && r.residual < previous);
        previous = r.residual;
    }
    for k in [10, 20, 30, 40] {
        let (a, b) = (run(k), run(k + 5));
        assert!(b.residual / a.residual <= a.rho.value.powi(5) * 1.5);
    }
}

#[test]
fn explicit_and_lumped_constructions_agree() {
    for r in [0, 1] {
        let e = construct_harmonic(GroupSpec::Free { rank: 2 }, 2.0, 8, r, 5, Backend::Explicit).unwrap();
        let q = construct_harmonic(GroupSpec::Free { rank: 2 }, 2.0, 8, r, 5, Backend::Quotient).unwrap();
        for (a, b) in [
            (e.report.residual, q.report.residual),
            (e.report.h2_norm, q.report.h2_norm),
            (e.report.spread, q.report.spread),
            (e.report.support_size, q.report.support_size),
            (e.report.rho.value, q.report.rho.value),
        ] {
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{a} vs {b}");
        }
        assert!(e.report.support_matches && q.report.support_matches);
    }
}

#[test]
fn zero_terms_gives_one_averaging_step() {
    let c = construct_harmonic(GroupSpec::Free { rank: 2 }, 2.0, 6, 0, 0, Backend::Explicit).unwrap();
    let f = c.function.as_ref().unwrap();
    let b = f.ball().clone();
    // h = h1*P, so h*(P - I) = (h1*(P - I))*P; compare to a direct evaluation
    let h1 = &c.h1;
    let mut x = vec![0.0; b.len()];
    for i in 0..b.len() {
        let mut acc = 0.0;
        for s in 0..4 {
            acc += b.neighbor(i, s).map_or(h1[i], |j| h1[j]);
        }
        x[i] = acc / 4.0 - h1[i];
    }
    let mut xp = vec![0.0; b.len()];
    markov_zero_outside(b.as_ref(), &x, &mut xp);
    let direct = xp.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((c.report.residual - direct).abs() < 1e-12);
    assert!(direct > 0.0);
}

#[test]
fn nonconstant_class_survives_decomposition() {
    let c = construct_harmonic(GroupSpec::Free { rank: 2 }, 2.0, 7, 0, 5, Backend::Explicit).unwrap();
    let h = c.function.unwrap();
    let opts = SolverOptions::default();
    let (ok, width) = degree_of_freedom_check(&h, 2.0, &opts).unwrap();
    assert!(ok, "{width}");
    assert!(!reduced_class_is_trivial(&h, 2.0, &opts, 1e-6).unwrap());

    let b = h.ball().clone();
    let (ok, _) = degree_of_freedom_check(&GraphFunction::constant(b.clone(), 1.0), 2.0, &opts).unwrap();
    assert!(!ok);
    let bump = GraphFunction::from_fn(b.clone(), |i| if b.distance(i) <= 2 { 1.0 } else { 0.0 }).unwrap();
    let (ok, _) = degree_of_freedom_check(&bump, 2.0, &opts).unwrap();
    assert!(!ok);
}

#[test]
fn construction_rejects_bad_inputs() {
    assert!(matches!(
        construct_harmonic(GroupSpec::FreeAbelian { rank: 2 }, 2.0, 10, 0, 5, Backend::Auto),
        Err(Error::Amenable(_))
    ));
    assert!(matches!(
        construct_harmonic(GroupSpec::Heisenberg, 2.0, 10, 0, 5, Backend::Auto),
        Err(Error::Amenable(_))
    ));
    assert_eq!(
        construct_harmonic(GroupSpec::Free { rank: 2 }, 2.0, 45, 0, 45, Backend::Auto).unwrap_err(),
        Error::RadiusTooSmall { need: 47, have: 45 }
    );
}
