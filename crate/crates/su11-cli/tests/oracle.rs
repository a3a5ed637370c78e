//! Self-consistency checks of the brute-force referee: every independent
//! route through the simulator must agree with textbook closed forms and
//! with every other route before it is allowed to arbitrate the closed-form
//! pipeline.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use su11_cli::oracle::{
    expand_loss_branches, reduced_a_of_pure, Mode, Monomial, OracleContext, TwoModeDensity,
    TwoModeState,
};
use su11_core::InterferometerParams;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A normalized random state supported on Fock levels ≤ `support` of a
/// `cutoff` grid, so later squeezing stays far from the truncation edge.
fn random_state(seed: u64, cutoff: usize, support: usize) -> TwoModeState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps = Array2::zeros((cutoff + 1, cutoff + 1));
    for na in 0..=support {
        for nb in 0..=support {
            amps[(na, nb)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let state = TwoModeState::from_amplitudes(amps);
    state.normalized().unwrap()
}

#[test]
fn coherent_state_photon_statistics() {
    for &alpha in &[0.5, 1.0, 2.0] {
        let psi = TwoModeState::coherent_vacuum(c(alpha), 40).unwrap();
        let n = psi.expectation(Monomial::new(1, 1, 0, 0)).re;
        let n2 = psi.expectation(Monomial::new(2, 2, 0, 0)).re + n;
        let expect = alpha * alpha;
        assert!((n - expect).abs() < 1e-12, "mean at alpha={alpha}: {n}");
        // Poissonian: Var(n) = |α|².
        assert!((n2 - n * n - expect).abs() < 1e-10, "variance at alpha={alpha}");
        assert!((psi.norm_sq() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn two_mode_squeezed_vacuum_occupation() {
    for &g in &[0.3, 0.8, 1.2] {
        let tmsv = TwoModeState::vacuum(70).apply_two_mode_squeeze(g, 0.0).unwrap();
        let expect = g.sinh().powi(2);
        let na = tmsv.expectation(Monomial::new(1, 1, 0, 0)).re;
        let nb = tmsv.expectation(Monomial::new(0, 0, 1, 1)).re;
        assert!((na - expect).abs() < 1e-9 * (1.0 + expect), "n_a at g={g}: {na}");
        assert!((nb - expect).abs() < 1e-9 * (1.0 + expect), "n_b at g={g}: {nb}");
        assert!((tmsv.norm_sq() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn balanced_squeezers_invert_on_random_states() {
    // exp(ξ*ab − ξa†b†) at θ and θ + π are mutual inverses: the second
    // amplifier of the balanced interferometer undoes the first.
    for seed in 0..3u64 {
        let psi = random_state(seed, 90, 4);
        let theta = 0.4 + 0.3 * seed as f64;
        let round_trip = psi
            .apply_two_mode_squeeze(0.7, theta)
            .unwrap()
            .apply_two_mode_squeeze(0.7, theta + std::f64::consts::PI)
            .unwrap();
        let mut worst = 0.0f64;
        for na in 0..=90 {
            for nb in 0..=90 {
                worst = worst.max((round_trip.amplitude(na, nb) - psi.amplitude(na, nb)).norm());
            }
        }
        assert!(worst < 1e-10, "round trip residual {worst} at seed {seed}");
    }
}

#[test]
fn subtraction_norm_on_unsqueezed_coherent_input() {
    // At g = 0 mode b is vacuum, so (sa + tb)^m |α⟩|0⟩ = (sα)^m |α⟩|0⟩.
    let alpha = 1.3;
    let psi = TwoModeState::coherent_vacuum(c(alpha), 40).unwrap();
    for &(s, t, m) in &[(1.0, 0.0, 1u32), (0.6, 0.4, 2), (0.25, 0.75, 3)] {
        let sub = psi.apply_photon_subtraction(s, t, m).unwrap();
        let expect = (s * alpha).powi(2 * m as i32);
        assert!(
            (sub.norm_sq() - expect).abs() < 1e-10 * (1.0 + expect),
            "norm at s={s}, m={m}: {} vs {expect}",
            sub.norm_sq()
        );
    }
}

#[test]
fn loss_channel_maps_coherent_to_attenuated_coherent() {
    let (alpha, transmissivity) = (1.2, 0.6);
    let psi = TwoModeState::coherent_vacuum(c(alpha), 22).unwrap();
    let rho = TwoModeDensity::from_pure(&psi)
        .apply_loss_channel(transmissivity, Mode::A)
        .unwrap();
    let attenuated =
        TwoModeState::coherent_vacuum(c(alpha * transmissivity.sqrt()), 22).unwrap();
    let fidelity = rho.overlap_with_pure(&attenuated);
    assert!((fidelity - 1.0).abs() < 1e-10, "fidelity {fidelity}");
    assert!((rho.trace() - 1.0).abs() < 1e-10);
    assert!(rho.hermiticity_residual() < 1e-12);
}

#[test]
fn loss_channel_equals_beam_splitter_with_traced_environment() {
    // Mix |2⟩_a with an environment vacuum on a beam splitter of
    // transmissivity T = cos²θ, trace the environment, and compare with the
    // Kraus channel applied directly.
    let transmissivity: f64 = 0.7;
    let theta = transmissivity.sqrt().acos();
    let dim = 12usize;
    let mut amps = Array2::zeros((dim, dim));
    amps[(2, 0)] = c(1.0);
    let two_photons = TwoModeState::from_amplitudes(amps);

    let mixed = two_photons.apply_beam_splitter(theta).unwrap();
    let via_splitter = reduced_a_of_pure(&mixed);

    let via_channel = TwoModeDensity::from_pure(&two_photons)
        .apply_loss_channel(transmissivity, Mode::A)
        .unwrap()
        .reduced_a();

    let mut worst = 0.0f64;
    for na in 0..dim {
        for ma in 0..dim {
            worst = worst.max((via_splitter[(na, ma)] - via_channel[(na, ma)]).norm());
        }
    }
    assert!(worst < 1e-10, "route disagreement {worst}");
    // Binomial diagonal of the attenuated two-photon state.
    for (n, expect) in [
        (0, (1.0 - transmissivity).powi(2)),
        (1, 2.0 * transmissivity * (1.0 - transmissivity)),
        (2, transmissivity * transmissivity),
    ] {
        assert!((via_channel[(n, n)].re - expect).abs() < 1e-12);
    }
}

#[test]
fn loss_channel_preserves_trace_and_phase_is_unitary() {
    let p = InterferometerParams::new(0.4, c(0.6), 0.4, 1).unwrap();
    let prepared = OracleContext::new(&p, 26).unwrap().prepared().clone();
    let rho = TwoModeDensity::from_pure(&prepared);
    let lossy = rho.apply_loss_channel(0.55, Mode::B).unwrap();
    assert!((lossy.trace() - rho.trace()).abs() < 1e-10 * rho.trace());

    let rotated = prepared.apply_phase_shift(1.3);
    assert!((rotated.norm_sq() - prepared.norm_sq()).abs() < 1e-12);
    for na in 0..=26 {
        for nb in 0..=26 {
            let (a, b) = (rotated.amplitude(na, nb), prepared.amplitude(na, nb));
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }
}

#[test]
fn batched_expectations_match_single_route() {
    let psi = random_state(7, 24, 6);
    let mut monos = Vec::new();
    for x1 in 0..=2u32 {
        for y1 in 0..=2u32 {
            for x2 in 0..=2u32 {
                for y2 in 0..=2u32 {
                    if x1 + y1 + x2 + y2 <= 4 {
                        monos.push(Monomial::new(x1, y1, x2, y2));
                    }
                }
            }
        }
    }
    let batched = psi.expectations(&monos);
    for (mono, batch) in monos.iter().zip(batched.iter()) {
        let single = psi.expectation(*mono);
        assert!((batch - single).norm() < 1e-12, "mismatch at {mono:?}");
    }
}

#[test]
fn diagonal_lossy_moments_match_branch_enumeration() {
    // The production diagonal contraction against the transparent (slow)
    // explicit Kraus-branch sum.
    let p = InterferometerParams::new(0.8, c(1.0), 0.5, 2)
        .unwrap()
        .with_transmissivity(0.8)
        .unwrap();
    let ctx = OracleContext::new(&p, 70).unwrap();
    let monos = [
        Monomial::new(0, 0, 0, 0),
        Monomial::new(1, 1, 0, 0),
        Monomial::new(2, 0, 0, 0),
        Monomial::new(1, 0, 0, 1),
        Monomial::new(2, 1, 1, 2),
        Monomial::new(0, 2, 2, 0),
    ];
    let fast = ctx.q_moments(&monos);

    let branches = expand_loss_branches(ctx.prepared(), 0.8);
    for (mono, fast_val) in monos.iter().zip(fast.iter()) {
        let slow: Complex64 = branches.iter().map(|b| b.expectation(*mono)).sum();
        let scale = fast_val.norm().max(1.0);
        assert!(
            (fast_val - slow).norm() < 1e-10 * scale,
            "moment {mono:?}: {fast_val} vs {slow}"
        );
    }
}

#[test]
fn heisenberg_detection_map_matches_direct_evolution() {
    use su11_cli::oracle::HeisenbergIntensity;
    // Lossless: the numerically extracted normal-ordered form of the
    // detection stage must reproduce direct phase + squeezer evolution.
    let p = InterferometerParams::new(1.0, c(1.0), 0.5, 1).unwrap().with_phi(0.8);
    let ctx = OracleContext::new(&p, 90).unwrap();
    let direct = ctx.output_intensity_direct(p.phi, p.g, p.theta2).unwrap();
    let map = HeisenbergIntensity::new(p.g, p.theta2).unwrap();
    let mapped = ctx.output_intensity_with(&map, p.phi).unwrap();
    assert!((direct.0 - mapped.0).abs() < 1e-9 * (1.0 + direct.0.abs()));
    assert!((direct.1 - mapped.1).abs() < 1e-9 * (1.0 + direct.1.abs()));
}

#[test]
fn lossy_heisenberg_route_matches_branch_squeezing() {
    use su11_cli::oracle::HeisenbergIntensity;
    // Small lossy point: evolve every Kraus branch through the detection
    // stage explicitly and compare with the moment-contraction route.
    let p = InterferometerParams::new(0.6, c(0.8), 0.3, 1)
        .unwrap()
        .with_transmissivity(0.75)
        .unwrap()
        .with_phi(0.9);
    let cutoff = 64;
    let ctx = OracleContext::new(&p, cutoff).unwrap();
    let map = HeisenbergIntensity::new(p.g, p.theta2).unwrap();
    let (mean, mean2) = ctx.output_intensity_with(&map, p.phi).unwrap();

    let branches = expand_loss_branches(ctx.prepared(), p.transmissivity);
    let total = ctx.prepared().norm_sq();
    let mut norm = 0.0;
    let (mut acc1, mut acc2) = (0.0, 0.0);
    for branch in &branches {
        let w = branch.norm_sq();
        // Negligible branches would fail the tail check spuriously (their
        // own norm is comparable to numerical noise), so they are dropped;
        // the comparison tolerance absorbs the dropped weight.
        if w < 1e-10 * total {
            continue;
        }
        let out = branch
            .apply_phase_shift(p.phi)
            .apply_two_mode_squeeze(p.g, p.theta2)
            .unwrap();
        let na = out.expectation(Monomial::new(1, 1, 0, 0)).re;
        let nb = out.expectation(Monomial::new(0, 0, 1, 1)).re;
        let na2 = out.expectation(Monomial::new(2, 2, 0, 0)).re + na;
        let nb2 = out.expectation(Monomial::new(0, 0, 2, 2)).re + nb;
        let cross = out.expectation(Monomial::new(1, 1, 1, 1)).re;
        norm += w;
        acc1 += na + nb;
        acc2 += na2 + nb2 + 2.0 * cross;
    }
    let (slow1, slow2) = (acc1 / norm, acc2 / norm);
    assert!((mean - slow1).abs() < 1e-7 * (1.0 + slow1.abs()), "{mean} vs {slow1}");
    assert!((mean2 - slow2).abs() < 1e-7 * (1.0 + slow2.abs()), "{mean2} vs {slow2}");
}
