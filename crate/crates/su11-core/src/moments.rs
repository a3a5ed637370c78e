//! The five-index moments Q_{m,x1,y1,x2,y2} of the photon-subtracted
//! interferometer state, evaluated by derivative extraction from a
//! generating function.
//!
//! The moment
//!
//! ```text
//! Q = ⟨Ψ_in| U₁† (s a† + t b†)^m U_B† a†^{x1} a^{y1} b†^{x2} b^{y2} U_B (s a + t b)^m U₁ |Ψ_in⟩
//! ```
//!
//! (environment modes in vacuum, traced implicitly) equals the mixed partial
//! derivative of exp(w₄) at the origin of six auxiliary variables λ₃…λ₈.
//! `build_w4` constructs w₄ from the amplifier and beam-splitter
//! transformation relations by normal ordering; see `docs/derivations.md`
//! for the full derivation and the resulting closed form
//!
//! ```text
//! w₄ = sinh²g (A'A + B'B) − sinh g cosh g (A B e^{iθ₁} + A' B' e^{-iθ₁})
//!      + α (A cosh g − B' e^{-iθ₁} sinh g) + α* (A' cosh g − B e^{iθ₁} sinh g)
//! ```
//!
//! with the bra/ket linear forms A' = sλ₃ + √T λ₅, A = sλ₄ + √T λ₆,
//! B' = tλ₃ + √T λ₇, B = tλ₄ + √T λ₈. Note the delocalization weights s, t
//! multiplying λ₃ on the bra side, mirroring the ket side.

use num_complex::Complex64;
#[cfg_attr(feature = "std", allow(unused_imports))]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::params::InterferometerParams;
use crate::polyseries::{ExponentVector, SparsePoly};

// Variable slots of λ₃…λ₈ inside the exponent vector.
const L3: usize = 0;
const L4: usize = 1;
const L5: usize = 2;
const L6: usize = 3;
const L7: usize = 4;
const L8: usize = 5;

/// The five indices of a moment Q_{m,x1,y1,x2,y2}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QIndex {
    pub m: u32,
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
}

impl QIndex {
    pub fn new(m: u32, x1: u32, y1: u32, x2: u32, y2: u32) -> Self {
        Self { m, x1, y1, x2, y2 }
    }

    pub fn observable_degree(&self) -> u32 {
        self.x1 + self.y1 + self.x2 + self.y2
    }

    pub fn derivative_order(&self) -> u32 {
        2 * self.m + self.observable_degree()
    }

    fn exponents(&self) -> ExponentVector {
        ExponentVector::new([
            self.m as u8,
            self.m as u8,
            self.x1 as u8,
            self.y1 as u8,
            self.x2 as u8,
            self.y2 as u8,
        ])
    }
}

fn linear_form(cap: u32, pairs: &[(usize, f64)]) -> SparsePoly {
    let mut p = SparsePoly::zero(cap);
    for &(var, coeff) in pairs {
        p = p
            .add(&SparsePoly::variable(cap, var).scale(Complex64::new(coeff, 0.0)))
            .expect("equal caps by construction");
    }
    p
}

/// The generating-function exponent w₄ truncated at total degree `cap`.
///
/// The constant term is exactly zero, so `exp` of the result is admissible.
pub fn build_w4(p: &InterferometerParams, cap: u32) -> Result<SparsePoly> {
    let c = p.g.cosh();
    let h = p.g.sinh();
    let rt = p.transmissivity.sqrt();
    let e1 = Complex64::new(p.theta1.cos(), p.theta1.sin());

    let a_bra = linear_form(cap, &[(L3, p.s), (L5, rt)]);
    let a_ket = linear_form(cap, &[(L4, p.s), (L6, rt)]);
    let b_bra = linear_form(cap, &[(L3, p.t), (L7, rt)]);
    let b_ket = linear_form(cap, &[(L4, p.t), (L8, rt)]);

    let h2 = Complex64::new(h * h, 0.0);
    let ch = Complex64::new(c * h, 0.0);
    let cc = Complex64::new(c, 0.0);
    let hh = Complex64::new(h, 0.0);
    let alpha = p.alpha;
    let alpha_c = p.alpha.conj();

    let quadratic = a_bra
        .mul(&a_ket)?
        .add(&b_bra.mul(&b_ket)?)?
        .scale(h2)
        .add(
            &a_ket
                .mul(&b_ket)?
                .scale(e1)
                .add(&a_bra.mul(&b_bra)?.scale(e1.conj()))?
                .scale(-ch),
        )?;

    let ket_drive = a_ket
        .scale(cc)
        .add(&b_bra.scale(-(e1.conj() * hh)))?
        .scale(alpha);
    let bra_drive = a_bra
        .scale(cc)
        .add(&b_ket.scale(-(e1 * hh)))?
        .scale(alpha_c);

    quadratic.add(&ket_drive)?.add(&bra_drive)
}

/// exp(w₄) computed once at a fixed cap, serving many moment extractions of
/// the same subtraction order.
#[derive(Clone, Debug)]
pub struct MomentTable {
    m: u32,
    exp_w4: SparsePoly,
}

impl MomentTable {
    /// Table able to serve every index with `x1+y1+x2+y2 ≤ max_observable_degree`
    /// at the subtraction order of `params`.
    pub fn new(params: &InterferometerParams, max_observable_degree: u32) -> Result<Self> {
        Self::with_order(params, params.m, max_observable_degree)
    }

    /// Same, but with an explicit subtraction order overriding `params.m`.
    pub fn with_order(
        params: &InterferometerParams,
        m: u32,
        max_observable_degree: u32,
    ) -> Result<Self> {
        let cap = 2 * m + max_observable_degree;
        let w4 = build_w4(params, cap)?;
        Ok(Self { m, exp_w4: w4.exp()? })
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn q(&self, x1: u32, y1: u32, x2: u32, y2: u32) -> Result<Complex64> {
        let idx = QIndex::new(self.m, x1, y1, x2, y2);
        self.exp_w4.extract_derivative(&idx.exponents())
    }

    /// Q_{m,0,0,0,0}, the squared norm of the subtracted state.
    pub fn norm_sq(&self) -> Result<f64> {
        let q = self.q(0, 0, 0, 0)?;
        if q.im.abs() > 1e-10 * (1.0 + q.re.abs()) {
            return Err(Error::DegenerateState("norm moment has a large imaginary part"));
        }
        Ok(q.re)
    }

    /// A = Q_{m,0,0,0,0}^{-1/2}.
    pub fn normalization(&self) -> Result<f64> {
        let n = self.norm_sq()?;
        if n <= 1e-300 {
            return Err(Error::DegenerateState(
                "photon subtraction annihilates the state at this parameter point",
            ));
        }
        Ok(1.0 / n.sqrt())
    }
}

/// Single-moment evaluation; the truncation cap is set to exactly the
/// requested derivative order.
pub fn q_moment(idx: &QIndex, params: &InterferometerParams) -> Result<Complex64> {
    let table = MomentTable::with_order(params, idx.m, idx.observable_degree())?;
    table.q(idx.x1, idx.y1, idx.x2, idx.y2)
}

/// Normalization constant A of the output state.
pub fn normalization(params: &InterferometerParams) -> Result<f64> {
    MomentTable::new(params, 0)?.normalization()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(g: f64, alpha: f64, t: f64, m: u32) -> InterferometerParams {
        InterferometerParams::new(g, Complex64::new(alpha, 0.0), t, m).unwrap()
    }

    #[test]
    fn w4_vanishes_at_origin() {
        let p = params(1.3, 0.8, 0.4, 2).with_transmissivity(0.6).unwrap();
        let w4 = build_w4(&p, 4).unwrap();
        assert_eq!(w4.coefficient(&ExponentVector::ZERO), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn norm_moment_is_one_for_vacuum_input() {
        // α = 0, m = 0: Q_{0,0,0,0,0} = 1 regardless of g and T.
        for &(g, tr) in &[(0.0, 1.0), (1.0, 1.0), (0.7, 0.3)] {
            let p = params(g, 0.0, 0.5, 0).with_transmissivity(tr).unwrap();
            let q = q_moment(&QIndex::new(0, 0, 0, 0, 0), &p).unwrap();
            assert!((q - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn subtracted_norm_without_squeezing() {
        // g = 0, T = 1, m = 1, s = 1: Q_{1,0,0,0,0} = s²|α|²
        // (⟨α|⟨0|(sa†+tb†)(sa+tb)|α⟩|0⟩ by direct operator algebra).
        let p = params(0.0, 1.0, 0.0, 1);
        let q = q_moment(&QIndex::new(1, 0, 0, 0, 0), &p).unwrap();
        assert!((q - Complex64::new(1.0, 0.0)).norm() < 1e-14);

        let p = params(0.0, 2.0, 0.0, 1);
        let a = normalization(&p).unwrap();
        assert!((a - 0.5).abs() < 1e-14);
    }

    #[test]
    fn second_moment_without_squeezing() {
        // g = 0, T = 1: ∂²/∂λ₃∂λ₄ exp(w₄) = s²|α|².
        let p = params(0.0, 1.5, 0.25, 1);
        let q = q_moment(&QIndex::new(1, 0, 0, 0, 0), &p).unwrap();
        let expected = p.s * p.s * p.alpha.norm_sqr();
        assert!((q - Complex64::new(expected, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn annihilated_state_is_degenerate() {
        // α = 0, g = 0, m = 1: the subtraction kills the double vacuum.
        let p = params(0.0, 0.0, 0.0, 1);
        assert!(matches!(normalization(&p), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn hermiticity() {
        let p = params(0.9, 1.1, 0.35, 2).with_transmissivity(0.8).unwrap();
        for &(x1, y1, x2, y2) in &[(1, 0, 1, 0), (2, 1, 0, 1), (1, 1, 1, 0), (0, 2, 2, 0)] {
            let q = q_moment(&QIndex::new(2, x1, y1, x2, y2), &p).unwrap();
            let qc = q_moment(&QIndex::new(2, y1, x1, y2, x2), &p).unwrap();
            assert!(
                (q - qc.conj()).norm() <= 1e-12 * (1.0 + q.norm()),
                "hermiticity violated at ({x1},{y1},{x2},{y2})"
            );
        }
    }

    #[test]
    fn positivity_of_diagonal_moments() {
        let p = params(1.0, 1.0, 0.6, 2).with_transmissivity(0.7).unwrap();
        for &(x1, y1, x2, y2) in &[(0, 0, 0, 0), (1, 1, 0, 0), (0, 0, 1, 1)] {
            let q = q_moment(&QIndex::new(2, x1, y1, x2, y2), &p).unwrap();
            assert!(q.im.abs() < 1e-12 * (1.0 + q.re.abs()));
            assert!(q.re >= 0.0);
        }
    }

    #[test]
    fn norm_moment_is_transmissivity_independent() {
        for m in 0..=3u32 {
            let base = params(1.0, 1.0, 0.4, m);
            let q1 = q_moment(&QIndex::new(m, 0, 0, 0, 0), &base).unwrap();
            let q2 = q_moment(
                &QIndex::new(m, 0, 0, 0, 0),
                &base.with_transmissivity(0.3).unwrap(),
            )
            .unwrap();
            assert!((q1 - q2).norm() <= 1e-12 * (1.0 + q1.norm()));
        }
    }

    #[test]
    fn diagonal_moments_are_real_for_real_alpha() {
        let p = params(0.8, 1.3, 0.55, 1).with_transmissivity(0.9).unwrap();
        for &(x, y) in &[(1u32, 0u32), (1, 1), (2, 2), (2, 0)] {
            let q = q_moment(&QIndex::new(1, x, x, y, y), &p).unwrap();
            assert!(q.im.abs() < 1e-12 * (1.0 + q.re.abs()));
        }
    }
}
