//! Spot agreement between the closed-form pipeline and the cutoff-converged
//! referee at diverse parameter points (the full-grid comparison lives in
//! the acceptance suite).

use num_complex::Complex64;
use su11_cli::oracle::{
    converged_moments, converged_scalar, default_cutoff, oracle_qfi_pure, oracle_sensitivity,
    Monomial, OracleContext,
};
use su11_core::{observables, optimizer, qfi, DpsoObjective, InterferometerParams, MomentTable};

fn params(g: f64, alpha: f64, t: f64, m: u32) -> InterferometerParams {
    InterferometerParams::new(g, Complex64::new(alpha, 0.0), t, m).unwrap()
}

fn spot_points() -> Vec<InterferometerParams> {
    vec![
        params(1.0, 1.0, 0.5, 0).with_phi(1.0),
        params(1.0, 1.0, 1.0, 1).with_phi(0.5),
        params(0.5, 2.0, 0.0, 2).with_phi(1.0).with_transmissivity(0.7).unwrap(),
        params(1.0, 2.0, 0.5, 3).with_phi(1.0).with_transmissivity(0.7).unwrap(),
        params(0.8, 0.5, 0.3, 1).with_phi(0.5).with_transmissivity(0.5).unwrap(),
    ]
}

#[test]
fn generating_moments_match_referee() {
    let indices: Vec<Monomial> = vec![
        Monomial::new(0, 0, 0, 0),
        Monomial::new(1, 1, 0, 0),
        Monomial::new(0, 0, 1, 1),
        Monomial::new(2, 2, 0, 0),
        Monomial::new(1, 1, 1, 1),
        Monomial::new(2, 0, 0, 2),
        Monomial::new(1, 0, 0, 1),
        Monomial::new(2, 1, 0, 1),
    ];
    for p in spot_points() {
        let table = MomentTable::new(&p, 4).unwrap();
        let (oracle, _) = converged_moments(
            |c| Ok(OracleContext::new(&p, c)?.q_moments(&indices)),
            default_cutoff(&p),
        )
        .unwrap();
        let scale = oracle.iter().map(|v| v.norm()).fold(1e-12, f64::max);
        for (mono, reference) in indices.iter().zip(oracle.iter()) {
            let closed = table.q(mono.x1, mono.y1, mono.x2, mono.y2).unwrap();
            assert!(
                (closed - reference).norm() < 1e-9 * scale.max(reference.norm()),
                "moment {mono:?} at m={} t={} T={}: {closed} vs {reference}",
                p.m,
                p.t,
                p.transmissivity
            );
        }
    }
}

#[test]
fn sensitivity_matches_referee() {
    for p in spot_points() {
        let closed = observables::phase_sensitivity(&p).unwrap();
        let (reference, _) =
            converged_scalar(|c| oracle_sensitivity(&p, c), default_cutoff(&p)).unwrap();
        let rel = (closed - reference).abs() / reference.abs();
        assert!(
            rel < 1e-6,
            "sensitivity at m={} t={} T={}: {closed} vs {reference} (rel {rel})",
            p.m,
            p.t,
            p.transmissivity
        );
    }
}

#[test]
fn fisher_information_matches_both_referee_routes() {
    for p in [params(1.0, 1.0, 0.5, 1), params(0.5, 2.0, 1.0, 2)] {
        let closed = qfi::qfi_ideal(&p).unwrap();
        let (variance_route, cutoff) = converged_scalar(
            |c| oracle_qfi_pure(&p, c).map(|r| r.variance_route),
            default_cutoff(&p),
        )
        .unwrap();
        assert!((closed - variance_route).abs() < 1e-8 * closed);
        let overlap_route = oracle_qfi_pure(&p, cutoff).unwrap().overlap_route;
        assert!((closed - overlap_route).abs() < 1e-3 * closed);
    }
}

#[test]
fn lossy_bound_matches_referee_moments() {
    let p = params(1.0, 1.5, 0.4, 2).with_eta(0.6).unwrap();
    let closed = qfi::qfi_lossy(&p).unwrap();
    let (reference, _) = converged_scalar(
        |c| {
            let ctx = OracleContext::new(&p.lossless(), c)?;
            let pm = ctx.photon_moments();
            Ok(qfi::lossy_bound(p.eta, pm.mean, pm.variance))
        },
        default_cutoff(&p),
    )
    .unwrap();
    assert!((closed - reference).abs() < 1e-8 * closed, "{closed} vs {reference}");
}

#[test]
fn split_optimum_matches_dense_grid() {
    // t* at (m=2, α=3, T=0.7, g=1, φ=1) cross-checked against a 1001-point
    // dense scan of the same objective.
    let p = params(1.0, 3.0, 0.5, 2)
        .with_transmissivity(0.7)
        .unwrap()
        .with_phi(1.0);
    let r = optimizer::optimize_dpso_t(&p, DpsoObjective::Sensitivity).unwrap();
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=1000 {
        let t = i as f64 / 1000.0;
        let value = observables::phase_sensitivity(&p.with_split(t).unwrap())
            .unwrap_or(f64::INFINITY);
        if value < best.0 {
            best = (value, t);
        }
    }
    assert!(r.value <= best.0 + 1e-9, "optimizer {} vs dense {}", r.value, best.0);
    assert!((r.value - best.0).abs() < 1e-6 * best.0.max(1e-12));
}
