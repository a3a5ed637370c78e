use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64;

use super::{OracleError, Result};

/// Relative tail mass allowed in the top two Fock layers after a squeezing
/// step before the cutoff is declared inadequate.
const TAIL_TOL: f64 = 1e-10;

/// Per-step relative residual at which the Taylor application of a
/// generator exponential is considered converged.
const TAYLOR_RESIDUAL: f64 = 1e-16;

/// A normally-ordered two-mode monomial a†^{x1} a^{y1} b†^{x2} b^{y2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
}

impl Monomial {
    pub fn new(x1: u32, y1: u32, x2: u32, y2: u32) -> Self {
        Self { x1, y1, x2, y2 }
    }
}

/// Pure two-mode state on the truncated Fock grid 0..=cutoff per mode.
#[derive(Clone, Debug)]
pub struct TwoModeState {
    amps: Array2<Complex64>,
}

impl TwoModeState {
    fn dim(&self) -> usize {
        self.amps.nrows()
    }

    pub fn cutoff(&self) -> usize {
        self.dim() - 1
    }

    pub fn amplitude(&self, na: usize, nb: usize) -> Complex64 {
        self.amps[(na, nb)]
    }

    pub fn vacuum(cutoff: usize) -> Self {
        let mut amps = Array2::zeros((cutoff + 1, cutoff + 1));
        amps[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn from_amplitudes(amps: Array2<Complex64>) -> Self {
        assert_eq!(amps.nrows(), amps.ncols());
        Self { amps }
    }

    pub fn amplitudes(&self) -> &Array2<Complex64> {
        &self.amps
    }

    /// |α⟩_a ⊗ |0⟩_b with a Poisson-tail adequacy check.
    pub fn coherent_vacuum(alpha: Complex64, cutoff: usize) -> Result<Self> {
        let dim = cutoff + 1;
        let mut amps = Array2::zeros((dim, dim));
        let weight = (-alpha.norm_sqr() / 2.0).exp();
        let mut coeff = Complex64::new(weight, 0.0);
        amps[(0, 0)] = coeff;
        for n in 1..dim {
            coeff *= alpha / (n as f64).sqrt();
            amps[(n, 0)] = coeff;
        }
        let state = Self { amps };
        let tail: f64 = (0..dim)
            .filter(|&n| n + 2 >= dim)
            .map(|n| state.amps[(n, 0)].norm_sqr())
            .sum();
        if tail > 1e-12 {
            return Err(OracleError::CutoffInadequate {
                cutoff,
                reason: "coherent-state tail above 1e-12",
            });
        }
        Ok(state)
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n < 1e-300 {
            return Err(OracleError::AnnihilatedState);
        }
        let scale = Complex64::new(1.0 / n.sqrt(), 0.0);
        Self { amps: &self.amps * scale }.into_ok()
    }

    fn into_ok(self) -> Result<Self> {
        Ok(self)
    }

    /// Probability mass in the top two Fock layers of either mode, relative
    /// to the total norm.
    pub fn tail_mass(&self) -> f64 {
        let dim = self.dim();
        let norm = self.norm_sq();
        if norm == 0.0 {
            return 0.0;
        }
        let mut tail = 0.0;
        for ((na, nb), amp) in self.amps.indexed_iter() {
            if na + 2 >= dim || nb + 2 >= dim {
                tail += amp.norm_sqr();
            }
        }
        tail / norm
    }

    /// a·ψ.
    pub fn lower_a(&self) -> Self {
        let dim = self.dim();
        let mut out = Array2::zeros((dim, dim));
        for na in 0..dim - 1 {
            let factor = ((na + 1) as f64).sqrt();
            for nb in 0..dim {
                out[(na, nb)] = self.amps[(na + 1, nb)] * factor;
            }
        }
        Self { amps: out }
    }

    /// b·ψ.
    pub fn lower_b(&self) -> Self {
        let dim = self.dim();
        let mut out = Array2::zeros((dim, dim));
        for nb in 0..dim - 1 {
            let factor = ((nb + 1) as f64).sqrt();
            for na in 0..dim {
                out[(na, nb)] = self.amps[(na, nb + 1)] * factor;
            }
        }
        Self { amps: out }
    }

    /// Repeated lowering a^{j} b^{k} ψ.
    pub fn lowered(&self, a_pow: u32, b_pow: u32) -> Self {
        let mut out = self.clone();
        for _ in 0..a_pow {
            out = out.lower_a();
        }
        for _ in 0..b_pow {
            out = out.lower_b();
        }
        out
    }

    /// ⟨ψ| a†^{x1} a^{y1} b†^{x2} b^{y2} |ψ⟩ (state need not be normalized;
    /// no division by the norm is performed).
    pub fn expectation(&self, mono: Monomial) -> Complex64 {
        let bra = self.lowered(mono.x1, mono.x2);
        let ket = self.lowered(mono.y1, mono.y2);
        bra.inner(&ket)
    }

    /// Batched expectations sharing one cache of lowered states, so a whole
    /// moment family costs one lowering pass per distinct (a-power, b-power)
    /// pair instead of one per monomial.
    pub fn expectations(&self, monos: &[Monomial]) -> Vec<Complex64> {
        let mut keys: Vec<(u32, u32)> = monos
            .iter()
            .flat_map(|m| [(m.x1, m.x2), (m.y1, m.y2)])
            .collect();
        keys.sort_unstable();
        keys.dedup();
        let mut cache: BTreeMap<(u32, u32), TwoModeState> = BTreeMap::new();
        cache.insert((0, 0), self.clone());
        for key in keys {
            if cache.contains_key(&key) {
                continue;
            }
            // Parents sort before children, so the chain down to (0, 0) is
            // always already present.
            let mut chain = vec![key];
            while let Some(&(j, k)) = chain.last() {
                let parent = if j > 0 { (j - 1, k) } else { (j, k - 1) };
                if cache.contains_key(&parent) {
                    break;
                }
                chain.push(parent);
            }
            while let Some((j, k)) = chain.pop() {
                if cache.contains_key(&(j, k)) {
                    continue;
                }
                let built = if j > 0 {
                    cache[&(j - 1, k)].lower_a()
                } else {
                    cache[&(j, k - 1)].lower_b()
                };
                cache.insert((j, k), built);
            }
        }
        monos
            .iter()
            .map(|m| cache[&(m.x1, m.x2)].inner(&cache[&(m.y1, m.y2)]))
            .collect()
    }

    /// Diagonal phase e^{iφ n_a} on mode a.
    pub fn apply_phase_shift(&self, phi: f64) -> Self {
        let dim = self.dim();
        let mut out = self.amps.clone();
        for na in 0..dim {
            let rot = Complex64::new((phi * na as f64).cos(), (phi * na as f64).sin());
            for nb in 0..dim {
                out[(na, nb)] *= rot;
            }
        }
        Self { amps: out }
    }

    /// (s·a + t·b)^m ψ, deliberately left unnormalized.
    pub fn apply_photon_subtraction(&self, s: f64, t: f64, m: u32) -> Result<Self> {
        let dim = self.dim();
        let mut cur = self.amps.clone();
        for _ in 0..m {
            let mut next = Array2::zeros((dim, dim));
            for na in 0..dim {
                for nb in 0..dim {
                    let mut v = Complex64::new(0.0, 0.0);
                    if na + 1 < dim {
                        v += cur[(na + 1, nb)] * (s * ((na + 1) as f64).sqrt());
                    }
                    if nb + 1 < dim {
                        v += cur[(na, nb + 1)] * (t * ((nb + 1) as f64).sqrt());
                    }
                    next[(na, nb)] = v;
                }
            }
            cur = next;
        }
        let out = Self { amps: cur };
        if m > 0 && out.norm_sq() < 1e-300 {
            return Err(OracleError::AnnihilatedState);
        }
        Ok(out)
    }

    /// exp(ξ* ab − ξ a†b†) ψ with ξ = g e^{iθ}, applied by scaled Taylor
    /// iteration of the sparse generator.
    pub fn apply_two_mode_squeeze(&self, g: f64, theta: f64) -> Result<Self> {
        let state = self.apply_two_mode_squeeze_unchecked(g, theta)?;
        if state.tail_mass() > TAIL_TOL {
            return Err(OracleError::CutoffInadequate {
                cutoff: self.cutoff(),
                reason: "tail mass above tolerance after squeezing",
            });
        }
        Ok(state)
    }

    /// Squeeze without the tail-adequacy check, for callers that verify the
    /// result end to end themselves (e.g. against an exactness residual).
    pub(super) fn apply_two_mode_squeeze_unchecked(&self, g: f64, theta: f64) -> Result<Self> {
        if g == 0.0 {
            return Ok(self.clone());
        }
        let xi = Complex64::new(theta.cos(), theta.sin()) * g;
        let generator = move |psi: &Array2<Complex64>| pair_generator(psi, xi);
        // Per-step generator norm is kept at or below one so each Taylor
        // series converges in a handful of terms without cancellation.
        let steps = (2.0 * g * self.dim() as f64).ceil().max(1.0) as usize;
        let out = apply_exp_generator(&self.amps, generator, steps)?;
        Ok(Self { amps: out })
    }

    /// exp((a†b − ab†) θ) ψ — the beam-splitter unitary, used by the
    /// loss-channel equivalence check with mode b as the environment.
    pub fn apply_beam_splitter(&self, theta: f64) -> Result<Self> {
        if theta == 0.0 {
            return Ok(self.clone());
        }
        let generator = move |psi: &Array2<Complex64>| bs_generator(psi, theta);
        let steps = (2.0 * theta.abs() * self.dim() as f64).ceil().max(1.0) as usize;
        Ok(Self { amps: apply_exp_generator(&self.amps, generator, steps)? })
    }

    /// Single Kraus branch of the photon-loss channel on one mode:
    /// K_l = √((1−T)^l / l!) T^{n/2} a^l (or b^l).
    pub fn kraus_loss_branch(&self, transmissivity: f64, l: u32, on_a: bool) -> Self {
        let dim = self.dim();
        let mut out = Array2::zeros((dim, dim));
        for n_src in l as usize..dim {
            let c = kraus_coefficient(transmissivity, l, n_src);
            if c == 0.0 {
                continue;
            }
            let n_dst = n_src - l as usize;
            for other in 0..dim {
                if on_a {
                    out[(n_dst, other)] = self.amps[(n_src, other)] * c;
                } else {
                    out[(other, n_dst)] = self.amps[(other, n_src)] * c;
                }
            }
        }
        Self { amps: out }
    }
}

/// √((1−T)^l / l! · n_src!/(n_src−l)!) · T^{(n_src−l)/2}, computed as an
/// interleaved product to avoid factorial overflow.
pub(super) fn kraus_coefficient(transmissivity: f64, l: u32, n_src: usize) -> f64 {
    let n_kept = n_src - l as usize;
    let mut sq = pow_with_zero(transmissivity, n_kept);
    for j in 1..=l as usize {
        sq *= (1.0 - transmissivity) * (n_kept + j) as f64 / j as f64;
    }
    sq.sqrt()
}

/// x^n with the channel convention 0^0 = 1.
fn pow_with_zero(x: f64, n: usize) -> f64 {
    if n == 0 {
        1.0
    } else {
        x.powi(n as i32)
    }
}

/// (ξ* ab − ξ a†b†) ψ on the truncated grid.
fn pair_generator(psi: &Array2<Complex64>, xi: Complex64) -> Array2<Complex64> {
    let dim = psi.nrows();
    let xi_c = xi.conj();
    let mut out = Array2::zeros((dim, dim));
    for na in 0..dim {
        for nb in 0..dim {
            let mut v = Complex64::new(0.0, 0.0);
            if na + 1 < dim && nb + 1 < dim {
                v += xi_c * psi[(na + 1, nb + 1)] * (((na + 1) * (nb + 1)) as f64).sqrt();
            }
            if na >= 1 && nb >= 1 {
                v -= xi * psi[(na - 1, nb - 1)] * ((na * nb) as f64).sqrt();
            }
            out[(na, nb)] = v;
        }
    }
    out
}

/// (a†b − ab†) θ ψ on the truncated grid.
fn bs_generator(psi: &Array2<Complex64>, theta: f64) -> Array2<Complex64> {
    let dim = psi.nrows();
    let mut out = Array2::zeros((dim, dim));
    for na in 0..dim {
        for nb in 0..dim {
            let mut v = Complex64::new(0.0, 0.0);
            if na >= 1 && nb + 1 < dim {
                v += psi[(na - 1, nb + 1)] * ((na * (nb + 1)) as f64).sqrt();
            }
            if na + 1 < dim && nb >= 1 {
                v -= psi[(na + 1, nb - 1)] * (((na + 1) * nb) as f64).sqrt();
            }
            out[(na, nb)] = v * theta;
        }
    }
    out
}

/// exp(G) ψ by splitting into `steps` sub-steps and summing each sub-step's
/// Taylor series until the running term is negligible.
fn apply_exp_generator(
    psi: &Array2<Complex64>,
    generator: impl Fn(&Array2<Complex64>) -> Array2<Complex64>,
    steps: usize,
) -> Result<Array2<Complex64>> {
    let inv = 1.0 / steps as f64;
    let mut acc = psi.clone();
    for _ in 0..steps {
        let mut term = acc.clone();
        let mut sum = acc;
        let target = term.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt() * TAYLOR_RESIDUAL;
        let mut converged = false;
        for j in 1..=400usize {
            term = generator(&term);
            term.mapv_inplace(|v| v * (inv / j as f64));
            sum = sum + &term;
            let tn = term.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if tn < target {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(OracleError::CutoffInadequate {
                cutoff: psi.nrows() - 1,
                reason: "generator Taylor series failed to converge",
            });
        }
        acc = sum;
    }
    Ok(acc)
}
