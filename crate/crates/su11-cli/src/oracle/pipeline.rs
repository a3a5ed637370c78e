use num_complex::Complex64;
use su11_core::InterferometerParams;

use super::heisenberg::HeisenbergIntensity;
use super::loss::lossy_moments;
use super::state::{Monomial, TwoModeState};
use super::{OracleError, Result};

/// Relative drift allowed between two successive cutoffs before a value is
/// accepted as converged.
pub const CONVERGENCE_DRIFT: f64 = 1e-9;

/// Cutoff increment used for the convergence comparison.
pub const CUTOFF_STEP: usize = 8;

/// Additive part of the escalation applied when the comparison fails; the
/// retried cutoff is `base + base / 2 + ESCALATION_STEP`, geometric growth
/// so a badly underestimated starting cutoff is reached in a few rounds.
const ESCALATION_STEP: usize = 12;

/// Number of escalations attempted before giving up.
const MAX_ESCALATIONS: usize = 6;

/// Central-difference step for the numerical phase derivative.
const SENSITIVITY_DPHI: f64 = 1e-5;

/// Phase step for the fidelity-based Fisher-information estimate.
const OVERLAP_DPHI: f64 = 1e-3;

/// Weight below which a Kraus branch family is dropped, relative to the
/// total trace (branch enumeration is only used by the self-check tests;
/// production moments go through the exact diagonal contraction).
const BRANCH_TRACE_TOL: f64 = 1e-16;

/// Heuristic truncation for a coherent-seeded, twice-squeezed, m-subtracted
/// state: Poisson bulk plus a generous squeezed-tail allowance.
pub fn default_cutoff(p: &InterferometerParams) -> usize {
    let amp = p.alpha.norm();
    let pump = p.g.sinh().powi(2);
    (amp * amp + 2.0 * amp + 6.0 * pump * (p.m as f64 + 3.0) + 20.0).ceil() as usize
}

/// The state inside the interferometer: coherent ⊗ vacuum input, first
/// squeezer, delocalized m-photon subtraction (left unnormalized), with the
/// loss channel of transmissivity T on both modes applied implicitly.
///
/// The pre-loss state is kept pure; lossy expectations are contracted
/// exactly through the channel's number-difference diagonals, so the
/// dim²×dim² density matrix never materializes.
pub struct OracleContext {
    prepared: TwoModeState,
    transmissivity: f64,
    cutoff: usize,
}

impl OracleContext {
    pub fn new(p: &InterferometerParams, cutoff: usize) -> Result<Self> {
        let input = TwoModeState::coherent_vacuum(p.alpha, cutoff)?;
        let pumped = input.apply_two_mode_squeeze(p.g, p.theta1)?;
        let prepared = pumped.apply_photon_subtraction(p.s, p.t, p.m)?;
        if prepared.norm_sq() < 1e-300 {
            return Err(OracleError::AnnihilatedState);
        }
        Ok(Self { prepared, transmissivity: p.transmissivity, cutoff })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// The pure pre-loss state (unnormalized).
    pub fn prepared(&self) -> &TwoModeState {
        &self.prepared
    }

    /// Unnormalized generating-function moments: expectations of
    /// a†^{x1} a^{y1} b†^{x2} b^{y2} over the lossy subtracted state, with
    /// the subtraction norm deliberately kept.
    pub fn q_moments(&self, monos: &[Monomial]) -> Vec<Complex64> {
        if self.transmissivity >= 1.0 {
            self.prepared.expectations(monos)
        } else {
            lossy_moments(&self.prepared, self.transmissivity, monos)
        }
    }

    pub fn q_moment(&self, mono: Monomial) -> Complex64 {
        self.q_moments(&[mono])[0]
    }

    /// The zeroth moment: squared norm of the subtracted state (the loss
    /// channel preserves it).
    pub fn normalization(&self) -> f64 {
        self.prepared.norm_sq()
    }

    /// Normalized expectations of the output intensity X = n_a + n_b after
    /// the phase shift and the second squeezer: (⟨X⟩, ⟨X²⟩).
    ///
    /// Lossless states evolve directly (phase, then Taylor-applied OPA2);
    /// mixed states go through the numerically extracted Heisenberg form of
    /// the detection stage, which costs one moment contraction instead of
    /// one squeezer application per Kraus branch.
    pub fn output_intensity(&self, phi: f64, g: f64, theta2: f64) -> Result<(f64, f64)> {
        if self.transmissivity >= 1.0 {
            return self.output_intensity_direct(phi, g, theta2);
        }
        let map = HeisenbergIntensity::new(g, theta2)?;
        self.output_intensity_with(&map, phi)
    }

    /// Direct pure-state route: only valid without loss.
    pub fn output_intensity_direct(&self, phi: f64, g: f64, theta2: f64) -> Result<(f64, f64)> {
        if self.transmissivity < 1.0 {
            return Err(OracleError::UnsupportedConfiguration(
                "direct output evolution requires unit transmissivity",
            ));
        }
        let out = self
            .prepared
            .apply_phase_shift(phi)
            .apply_two_mode_squeeze(g, theta2)?;
        let vals = out.expectations(&[
            Monomial::new(1, 1, 0, 0),
            Monomial::new(0, 0, 1, 1),
            Monomial::new(2, 2, 0, 0),
            Monomial::new(0, 0, 2, 2),
            Monomial::new(1, 1, 1, 1),
        ]);
        let (na, nb) = (vals[0].re, vals[1].re);
        let na2 = vals[2].re + na;
        let nb2 = vals[3].re + nb;
        let w = self.normalization();
        Ok(((na + nb) / w, (na2 + nb2 + 2.0 * vals[4].re) / w))
    }

    /// Heisenberg-map route, valid for any transmissivity.
    pub fn output_intensity_with(
        &self,
        map: &HeisenbergIntensity,
        phi: f64,
    ) -> Result<(f64, f64)> {
        map.output_intensity(phi, |monos| self.q_moments(monos))
    }

    /// Mean and variance of n_a of the normalized (lossy) subtracted state,
    /// before the phase shift and second squeezer.
    pub fn photon_moments(&self) -> PhotonMoments {
        let vals = self.q_moments(&[Monomial::new(1, 1, 0, 0), Monomial::new(2, 2, 0, 0)]);
        let w = self.normalization();
        let mean = vals[0].re / w;
        let mean2 = vals[1].re / w + mean;
        PhotonMoments { mean, variance: mean2 - mean * mean }
    }
}

/// Λ_T ⊗ Λ_T applied as explicit pure Kraus branches |χ_{la,lb}⟩, enumerated
/// until the captured trace saturates the input norm. This is the slow,
/// transparent form of the channel; the diagonal contraction is validated
/// against it.
pub fn expand_loss_branches(psi: &TwoModeState, transmissivity: f64) -> Vec<TwoModeState> {
    if transmissivity >= 1.0 {
        return vec![psi.clone()];
    }
    let total = psi.norm_sq();
    let dim = psi.cutoff() + 1;
    let mut branches = Vec::new();
    let mut captured = 0.0;
    for la in 0..dim as u32 {
        let branch_a = psi.kraus_loss_branch(transmissivity, la, true);
        let weight_a = branch_a.norm_sq();
        if weight_a < BRANCH_TRACE_TOL * total {
            if captured > total * (1.0 - BRANCH_TRACE_TOL) {
                break;
            }
            continue;
        }
        let mut captured_b = 0.0;
        for lb in 0..dim as u32 {
            let branch = branch_a.kraus_loss_branch(transmissivity, lb, false);
            let w = branch.norm_sq();
            captured_b += w;
            if w >= BRANCH_TRACE_TOL * total {
                branches.push(branch);
            }
            if weight_a - captured_b < BRANCH_TRACE_TOL * weight_a {
                break;
            }
        }
        captured += captured_b;
        if total - captured < BRANCH_TRACE_TOL * total {
            break;
        }
    }
    branches
}

#[derive(Clone, Copy, Debug)]
pub struct PhotonMoments {
    pub mean: f64,
    pub variance: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct OracleQfi {
    /// 4·Var(n_a) on the normalized probe state.
    pub variance_route: f64,
    /// 8(1 − |⟨Ψ_φ|Ψ_{φ+δ}⟩|)/δ², a fidelity estimate independent of the
    /// variance identity.
    pub overlap_route: f64,
}

/// (⟨X⟩, ⟨X²⟩) of the output intensity at a fixed cutoff.
pub fn oracle_intensity(p: &InterferometerParams, cutoff: usize) -> Result<(f64, f64)> {
    let ctx = OracleContext::new(p, cutoff)?;
    ctx.output_intensity(p.phi, p.g, p.theta2)
}

/// Error-propagation phase sensitivity √Var(X)/|∂_φ⟨X⟩| from brute-force
/// output moments with a central-difference slope.
pub fn oracle_sensitivity(p: &InterferometerParams, cutoff: usize) -> Result<f64> {
    let ctx = OracleContext::new(p, cutoff)?;
    // Build the detection-stage map once for the three φ samples.
    let map = if p.transmissivity < 1.0 {
        Some(HeisenbergIntensity::new(p.g, p.theta2)?)
    } else {
        None
    };
    let eval = |phi: f64| -> Result<(f64, f64)> {
        match &map {
            Some(map) => ctx.output_intensity_with(map, phi),
            None => ctx.output_intensity_direct(phi, p.g, p.theta2),
        }
    };
    let (mean, mean2) = eval(p.phi)?;
    let (lo, _) = eval(p.phi - SENSITIVITY_DPHI)?;
    let (hi, _) = eval(p.phi + SENSITIVITY_DPHI)?;
    let slope = (hi - lo) / (2.0 * SENSITIVITY_DPHI);
    let var = (mean2 - mean * mean).max(0.0);
    if slope.abs() < 1e-12 {
        return Ok(f64::INFINITY);
    }
    Ok(var.sqrt() / slope.abs())
}

/// Mean and variance of n_a of the subtracted probe state.
pub fn oracle_photon_moments(p: &InterferometerParams, cutoff: usize) -> Result<PhotonMoments> {
    Ok(OracleContext::new(p, cutoff)?.photon_moments())
}

/// Quantum Fisher information of the phase encoding e^{iφ n_a} on the pure
/// (lossless) subtracted probe, by two independent routes.
pub fn oracle_qfi_pure(p: &InterferometerParams, cutoff: usize) -> Result<OracleQfi> {
    if p.transmissivity < 1.0 {
        return Err(OracleError::UnsupportedConfiguration(
            "pure-state Fisher information requires unit transmissivity",
        ));
    }
    let ctx = OracleContext::new(p, cutoff)?;
    let pm = ctx.photon_moments();
    let variance_route = 4.0 * pm.variance;

    // Fidelity route: the encoding is diagonal in n_a, so the overlap is a
    // weighted phase sum over the photon-number distribution of mode a.
    let probe = ctx.prepared();
    let norm = probe.norm_sq();
    let dim = probe.cutoff() + 1;
    let mut ovl = Complex64::new(0.0, 0.0);
    for na in 0..dim {
        let angle = OVERLAP_DPHI * na as f64;
        let rot = Complex64::new(angle.cos(), angle.sin());
        let mass: f64 = (0..dim).map(|nb| probe.amplitude(na, nb).norm_sqr()).sum();
        ovl += rot * (mass / norm);
    }
    let overlap_route = 8.0 * (1.0 - ovl.norm()) / (OVERLAP_DPHI * OVERLAP_DPHI);
    Ok(OracleQfi { variance_route, overlap_route })
}

fn scalar_drift(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() && a.signum() == b.signum() {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Evaluate a cutoff-dependent scalar at N and N + CUTOFF_STEP, accept when
/// the pair agrees to CONVERGENCE_DRIFT, escalate otherwise. Returns the
/// higher-cutoff value and the cutoff it was computed at.
pub fn converged_scalar(
    f: impl Fn(usize) -> Result<f64>,
    start: usize,
) -> Result<(f64, usize)> {
    let mut base = start;
    for _ in 0..=MAX_ESCALATIONS {
        let probe = base + CUTOFF_STEP;
        match (f(base), f(probe)) {
            (Ok(lo), Ok(hi)) if scalar_drift(lo, hi) < CONVERGENCE_DRIFT => {
                return Ok((hi, probe));
            }
            (Err(OracleError::AnnihilatedState), _) | (_, Err(OracleError::AnnihilatedState)) => {
                return Err(OracleError::AnnihilatedState);
            }
            (Err(OracleError::UnsupportedConfiguration(r)), _)
            | (_, Err(OracleError::UnsupportedConfiguration(r))) => {
                return Err(OracleError::UnsupportedConfiguration(r));
            }
            _ => {}
        }
        base += base / 2 + ESCALATION_STEP;
    }
    Err(OracleError::CutoffInadequate {
        cutoff: base,
        reason: "scalar failed to converge under cutoff escalation",
    })
}

/// Vector analogue of `converged_scalar` with a max-norm drift criterion
/// relative to the largest component.
pub fn converged_moments(
    f: impl Fn(usize) -> Result<Vec<Complex64>>,
    start: usize,
) -> Result<(Vec<Complex64>, usize)> {
    let mut base = start;
    for _ in 0..=MAX_ESCALATIONS {
        let probe = base + CUTOFF_STEP;
        match (f(base), f(probe)) {
            (Ok(lo), Ok(hi)) => {
                let scale = hi
                    .iter()
                    .chain(lo.iter())
                    .map(|v| v.norm())
                    .fold(1.0f64, f64::max);
                let drift = lo
                    .iter()
                    .zip(hi.iter())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0f64, f64::max);
                if drift / scale < CONVERGENCE_DRIFT {
                    return Ok((hi, probe));
                }
            }
            (Err(OracleError::AnnihilatedState), _) | (_, Err(OracleError::AnnihilatedState)) => {
                return Err(OracleError::AnnihilatedState);
            }
            (Err(OracleError::UnsupportedConfiguration(r)), _)
            | (_, Err(OracleError::UnsupportedConfiguration(r))) => {
                return Err(OracleError::UnsupportedConfiguration(r));
            }
            _ => {}
        }
        base += base / 2 + ESCALATION_STEP;
    }
    Err(OracleError::CutoffInadequate {
        cutoff: base,
        reason: "moment set failed to converge under cutoff escalation",
    })
}
