use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use domsplit::cocycle::*;
use domsplit::geometry::hausdorff;
use domsplit::linalg::{self, rotation};
use domsplit::{Error, Norm, Subspace};

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(v.to_vec()))
}

fn dh(a: &Subspace, b: &Subspace) -> f64 {
    hausdorff(a, b, &Norm::Euclidean)
}

fn skew(grid: usize, top: f64, amp: f64) -> CocycleSystem {
    let alpha = (5f64.sqrt() - 1.0) / 2.0;
    let base = BaseSystem::rotation(alpha, grid).unwrap();
    CocycleSystem::new(base, 2, Norm::Euclidean, move |x: &[f64]| {
        let r = rotation(2, 0, 1, amp * (2.0 * PI * x[0]).sin());
        &r * diag(&[top, 1.0]) * r.transpose()
    })
    .unwrap()
}

#[test]
fn diagonal_certificate() {
    let c = CocycleSystem::constant(diag(&[2.0, 1.0]), Norm::Euclidean).unwrap();
    let cert = detect_domination(&c, 1, 60, Criterion::Bogo).unwrap();
    assert!(cert.pass);
    assert!((cert.tau_fit - 0.5).abs() < 1e-12);
    assert!((cert.k_fit - 1.0).abs() < 1e-9);
    for row in &cert.per_n_ratios {
        assert!((row.value - 0.5f64.powi(row.n as i32)).abs() < 1e-12);
    }
    for crit in [Criterion::Magic, Criterion::Simple] {
        let cert = detect_domination(&c, 1, 30, crit).unwrap();
        assert!(cert.pass && (cert.tau_fit - 0.5).abs() < 1e-9, "{crit}");
    }
}

#[test]
fn isometries_have_no_gap() {
    for a in [rotation(2, 0, 1, 0.3), DMatrix::identity(2, 2)] {
        let c = CocycleSystem::constant(a, Norm::Euclidean).unwrap();
        let cert = detect_domination(&c, 1, 60, Criterion::Bogo).unwrap();
        assert!(!cert.pass);
        assert!(cert.tau_fit >= 0.99);
        assert!(cert.diagnosis.unwrap().contains("no exponential gap"));
        let out = analyze(&c, &AnalysisParams::default()).unwrap();
        assert!(!out.dominated() && out.splitting.is_none());
    }
}

#[test]
fn rank_is_checked() {
    let c = CocycleSystem::constant(diag(&[2.0, 1.0]), Norm::Euclidean).unwrap();
    assert!(detect_domination(&c, 2, 60, Criterion::Bogo).is_err());
    assert!(detect_domination(&c, 0, 60, Criterion::Bogo).is_err());
    assert!(detect_domination(&c, 1, 4, Criterion::Bogo).is_err());
}

#[test]
fn diagonal_pipeline() {
    let c = CocycleSystem::constant(diag(&[2.0, 1.0]), Norm::Euclidean).unwrap();
    let out = analyze(&c, &AnalysisParams::default()).unwrap();
    let s = out.splitting.as_ref().unwrap();
    let v = out.verification.as_ref().unwrap();
    assert!(v.pass, "{:?}", v.reasons);
    assert_eq!(v.equivariance_residual_e, 0.0);
    assert_eq!(v.equivariance_residual_f, 0.0);
    assert!(dh(&s.points[0].e, &Subspace::coordinate(2, &[0])) < 1e-10);
    assert!(dh(&s.points[0].f, &Subspace::coordinate(2, &[1])) < 1e-10);
    for row in &v.domination_table {
        assert!((row.value - 0.5f64.powi(row.n as i32)).abs() < 1e-9);
    }
    assert!((v.k_tilde.unwrap() - 1.0).abs() < 1e-9);
    let r = out.r_e.as_ref().unwrap();
    assert!((r.estimate - 1.0).abs() < 1e-12);
    assert_eq!(r.q_index, 6);
    assert!((r.log_lower_bound + 80.318).abs() < 1e-3, "{}", r.log_lower_bound);
    assert!(r.holds);
    let conv = out.converse.as_ref().unwrap();
    assert!((conv.c0 - 0.5).abs() < 1e-12 && (conv.k_prime - 0.5).abs() < 1e-9);
    assert!(conv.holds, "{:?}", conv.margin_table);
}

#[test]
fn swapped_roles_fail_verification() {
    let c = CocycleSystem::constant(diag(&[2.0, 1.0]), Norm::Euclidean).unwrap();
    let mut s = build_splitting(&c, 1, 0.5, 1e-8, 60).unwrap();
    for p in &mut s.points {
        std::mem::swap(&mut p.e, &mut p.f);
        std::mem::swap(&mut p.e_next, &mut p.f_next);
    }
    let v = verify_splitting(&c, &s, 40, 1e-6).unwrap();
    assert!(!v.pass);
    assert!((v.domination_table[9].value - 1024.0).abs() < 1e-6);
    assert!(converse_constant(&c, &s, &v, 40).is_err());
}

#[test]
fn r_e_needs_euclidean_and_reports_both_constants() {
    let (q, lb) = r_e_bound(1, 2.0, 1.0, 0.5, 3.0, 36.0);
    assert_eq!(q, 6);
    assert!((lb - -(12.0 * 2f64.ln() + 72.0)).abs() < 1e-12);
    let (q2, lb2) = r_e_bound(1, 2.0, 1.0, 0.5, 12.0, 2.0);
    assert_eq!(q2, 8);
    assert!((lb2 - -(16.0 * 2f64.ln() + 4.0)).abs() < 1e-12);
    let c = CocycleSystem::constant(diag(&[2.0, 1.0]), Norm::linf()).unwrap();
    let cert = detect_domination(&c, 1, 20, Criterion::Bogo).unwrap();
    let s = build_splitting(&c, 1, 0.5, 1e-8, 20).unwrap();
    assert!(matches!(r_e_certificate(&c, &s, &cert, 20), Err(Error::Precondition(_))));
}

#[test]
fn skew_product_family() {
    let c = skew(128, 4.0, 0.1);
    let out = analyze(&c, &AnalysisParams::default()).unwrap();
    let cert = &out.certificate;
    assert!(cert.pass);
    let s = out.splitting.as_ref().unwrap();
    let env = s.convergence_envelope.unwrap();
    assert!(env.rate <= cert.tau_fit + 0.05);
    let v = out.verification.as_ref().unwrap();
    assert!(v.pass, "{:?}", v.reasons);
    assert!((v.envelope.unwrap().rate - cert.tau_fit).abs() < 0.05);
    let r = out.r_e.as_ref().unwrap();
    assert!(r.holds);
    let conv = out.converse.as_ref().unwrap();
    assert!(conv.holds);
    let cont = s.continuity.as_ref().unwrap();
    assert!(cont.modulus_e.is_finite() && cont.modulus_f.is_finite());
}

#[test]
fn triangular_constant_cocycle() {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
    let c = CocycleSystem::constant(a.clone(), Norm::Euclidean).unwrap();
    let out = analyze(&c, &AnalysisParams::default()).unwrap();
    let p = &out.splitting.as_ref().unwrap().points[0];
    // eigenvector oracle: kernels of A - 2I and A - I
    let eigvec = |lambda: f64| {
        let m = &a - DMatrix::identity(2, 2) * lambda;
        Subspace::span_of(&linalg::null_space(&m, 1e-12))
    };
    assert!(dh(&p.e, &eigvec(2.0)) < 1e-8);
    assert!(dh(&p.f, &eigvec(1.0)) < 1e-8);
    assert!(out.verified());
}

#[test]
fn upper_limit_matches_power_iteration() {
    // top eigenvector of A^n A^n^T by power iteration, n = 40
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
    let mut an = DMatrix::identity(2, 2);
    for _ in 0..40 {
        an = &a * an;
    }
    let g = &an * an.transpose();
    let mut v = DVector::from_vec(vec![0.3, 0.7]);
    for _ in 0..200 {
        v = &g * &v;
        v /= v.norm();
    }
    let c = CocycleSystem::constant(a, Norm::Euclidean).unwrap();
    let up = construct_upper(&c, &[0.0], 1, 0.5, 1e-12, 80).unwrap();
    assert!(dh(&up.subspace, &Subspace::line(v.as_slice()).unwrap()) < 1e-9);
}

#[test]
fn uniqueness_across_horizons_and_rebasing() {
    let c = CocycleSystem::constant(diag(&[2.0, 1.0]), Norm::Euclidean).unwrap();
    let a = build_splitting(&c, 1, 0.5, 1e-8, 30).unwrap();
    let b = build_splitting(&c, 1, 0.5, 1e-8, 60).unwrap();
    assert_eq!(uniqueness_check(&a, &a).unwrap(), 0.0);
    assert!(uniqueness_check(&a, &b).unwrap() < 1e-12);

    let c = skew(64, 4.0, 0.1);
    let cert = detect_domination(&c, 1, 60, Criterion::Bogo).unwrap();
    let s30 = build_splitting(&c, 1, cert.tau_fit, 1e-8, 30).unwrap();
    let s60 = build_splitting(&c, 1, cert.tau_fit, 1e-8, 60).unwrap();
    assert!(uniqueness_check(&s30, &s60).unwrap() < 1e-6);
    let c2 = c.rebase(2).unwrap();
    let cert2 = detect_domination(&c2, 1, 30, Criterion::Bogo).unwrap();
    assert!(cert2.pass && (cert2.tau_fit - cert.tau_fit.powi(2)).abs() < 0.02);
    let s2 = build_splitting(&c2, 1, cert2.tau_fit, 1e-8, 30).unwrap();
    assert!(uniqueness_check(&s60, &s2).unwrap() < 1e-6);

    let other = build_splitting(&skew(32, 4.0, 0.1), 1, cert.tau_fit, 1e-8, 30).unwrap();
    assert!(uniqueness_check(&s30, &other).is_err());
}

#[test]
fn weighted_norm_runs_in_the_isometric_copy() {
    let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
    let c = CocycleSystem::constant(a, Norm::weighted(vec![1.0, 4.0]).unwrap()).unwrap();
    let out = analyze(&c, &AnalysisParams::default()).unwrap();
    assert!(out.verified());
    let p = &out.splitting.as_ref().unwrap().points[0];
    // the bundles are intrinsic: eigenvectors in the original coordinates
    assert!(dh(&p.e, &Subspace::line(&[1.0, 0.0]).unwrap()) < 1e-8);
    assert!(dh(&p.f, &Subspace::line(&[1.0, -1.0]).unwrap()) < 1e-8);
}

#[test]
fn sup_norm_on_a_cycle() {
    let mats =
        [DMatrix::from_row_slice(2, 2, &[3.0, 0.5, 0.2, 1.0]), DMatrix::from_row_slice(2, 2, &[2.5, -0.3, 0.1, 0.8])];
    let c = CocycleSystem::new(BaseSystem::cycle(2).unwrap(), 2, Norm::linf(), move |x: &[f64]| {
        mats[x[0] as usize].clone()
    })
    .unwrap();
    let params = AnalysisParams { n_max: 20, criterion: Criterion::Magic, ..AnalysisParams::default() };
    let out = analyze(&c, &params).unwrap();
    assert!(out.dominated(), "{:?}", out.certificate);
    let v = out.verification.as_ref().unwrap();
    assert!(v.pass, "{:?}", v.reasons);
    assert!(out.converse.as_ref().unwrap().holds);
    // same bundles as the Euclidean analysis of the same cocycle
    let mats =
        [DMatrix::from_row_slice(2, 2, &[3.0, 0.5, 0.2, 1.0]), DMatrix::from_row_slice(2, 2, &[2.5, -0.3, 0.1, 0.8])];
    let ce = CocycleSystem::new(BaseSystem::cycle(2).unwrap(), 2, Norm::Euclidean, move |x: &[f64]| {
        mats[x[0] as usize].clone()
    })
    .unwrap();
    let oute = analyze(&ce, &params).unwrap();
    let d = uniqueness_check(out.splitting.as_ref().unwrap(), oute.splitting.as_ref().unwrap()).unwrap();
    assert!(d < 1e-6, "{d}");
}

#[test]
fn three_dimensional_rank_two() {
    let c = skew3();
    let out = analyze(&c, &AnalysisParams { k: 2, ..AnalysisParams::default() }).unwrap();
    assert!(out.verified(), "{:?}", out.verification);
    assert!(out.r_e.as_ref().unwrap().holds);
    assert!(out.converse.as_ref().unwrap().holds);
    for p in &out.splitting.as_ref().unwrap().points {
        assert_eq!((p.e.dim(), p.f.dim()), (2, 1));
    }
}

fn skew3() -> CocycleSystem {
    let base = BaseSystem::rotation(2f64.sqrt() - 1.0, 32).unwrap();
    CocycleSystem::new(base, 3, Norm::Euclidean, |x: &[f64]| {
        let t = 2.0 * PI * x[0];
        let r = rotation(3, 0, 2, 0.2 * t.cos()) * rotation(3, 1, 2, 0.1 * t.sin());
        &r * diag(&[5.0, 3.0, 1.0]) * r.transpose()
    })
    .unwrap()
}

#[test]
fn continuity_modulus_shrinks_with_the_grid() {
    let moduli: Vec<f64> = [16, 32, 64]
        .iter()
        .map(|&g| {
            let c = skew(g, 4.0, 0.1);
            let s = build_splitting(&c, 1, 0.26, 1e-8, 60).unwrap();
            let v = verify_splitting(&c, &s, 30, 1e-6).unwrap();
            assert!(v.min_one_step_norm > 0.0);
            s.continuity.unwrap().modulus_e
        })
        .collect();
    assert!(moduli[0] > moduli[1] && moduli[1] > moduli[2], "{moduli:?}");
}

#[test]
fn verify_envelope_tracks_the_certificate() {
    let c = skew(128, 4.0, 0.1);
    let cert = detect_domination(&c, 1, 60, Criterion::Bogo).unwrap();
    let s = build_splitting(&c, 1, cert.tau_fit, 1e-8, 60).unwrap();
    let v = verify_splitting(&c, &s, 60, 1e-6).unwrap();
    assert!(v.equivariance_residual_e < 1e-6 && v.equivariance_residual_f < 1e-6);
    assert!((v.envelope.unwrap().rate - cert.tau_fit).abs() < 0.05);
    let env = s.convergence_envelope.unwrap();
    let from = s.stabilization_index.unwrap();
    for row in s.convergence_table.iter().filter(|r| r.n >= from) {
        assert!(row.value <= 2.0 * env.constant * cert.tau_fit.max(env.rate).powi(row.n as i32));
    }
}
