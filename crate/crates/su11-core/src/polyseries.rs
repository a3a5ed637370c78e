//! Truncated sparse multivariate polynomials over the six differentiation
//! variables of the moment generating function.
//!
//! A [`SparsePoly`] stores complex coefficients keyed by exponent vectors and
//! discards every term whose total degree exceeds a fixed cap. Because the
//! generating-function exponent has no constant term, truncated arithmetic
//! reproduces every mixed partial derivative up to the cap exactly (IEEE
//! rounding aside), so derivative extraction reduces to a coefficient lookup
//! times a product of factorials.

use alloc::collections::BTreeMap;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of differentiation variables carried by the generating function.
pub const NUM_VARS: usize = 6;

/// Exponents of one monomial in the six differentiation variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExponentVector([u8; NUM_VARS]);

impl ExponentVector {
    pub const ZERO: Self = Self([0; NUM_VARS]);

    pub fn new(exponents: [u8; NUM_VARS]) -> Self {
        Self(exponents)
    }

    /// The monomial consisting of a single variable to the first power.
    pub fn unit(var: usize) -> Self {
        let mut e = [0u8; NUM_VARS];
        e[var] = 1;
        Self(e)
    }

    pub fn get(&self, var: usize) -> u8 {
        self.0[var]
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn sum(&self, other: &Self) -> Self {
        let mut e = [0u8; NUM_VARS];
        for (i, slot) in e.iter_mut().enumerate() {
            *slot = self.0[i] + other.0[i];
        }
        Self(e)
    }

    /// e3!·e4!·…·e8!, the combinatorial weight of derivative extraction.
    pub fn factorial_product(&self) -> f64 {
        self.0
            .iter()
            .map(|&e| (1..=e as u64).map(|k| k as f64).product::<f64>())
            .product()
    }
}

/// Complex-coefficient multivariate polynomial truncated at a total degree.
#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly {
    cap: u32,
    terms: BTreeMap<ExponentVector, Complex64>,
}

impl SparsePoly {
    pub fn zero(cap: u32) -> Self {
        Self { cap, terms: BTreeMap::new() }
    }

    pub fn constant(cap: u32, value: Complex64) -> Self {
        let mut p = Self::zero(cap);
        p.add_term(ExponentVector::ZERO, value);
        p
    }

    /// A single variable to the first power. Truncates to zero when `cap`
    /// is 0, consistent with the rest of the arithmetic.
    pub fn variable(cap: u32, var: usize) -> Self {
        let mut p = Self::zero(cap);
        if cap >= 1 {
            p.add_term(ExponentVector::unit(var), Complex64::new(1.0, 0.0));
        }
        p
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, k: &ExponentVector) -> Complex64 {
        self.terms.get(k).copied().unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    fn add_term(&mut self, k: ExponentVector, value: Complex64) {
        if value == Complex64::new(0.0, 0.0) || k.total_degree() > self.cap {
            return;
        }
        let entry = self.terms.entry(k).or_insert(Complex64::new(0.0, 0.0));
        *entry += value;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&k);
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.cap != other.cap {
            return Err(Error::CapMismatch { left: self.cap, right: other.cap });
        }
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*k, *v);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = Self::zero(self.cap);
        for (k, v) in &self.terms {
            out.add_term(*k, v * factor);
        }
        out
    }

    /// Product with every term of total degree above the cap discarded.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cap != other.cap {
            return Err(Error::CapMismatch { left: self.cap, right: other.cap });
        }
        let mut out = Self::zero(self.cap);
        for (ka, va) in &self.terms {
            let da = ka.total_degree();
            if da > self.cap {
                continue;
            }
            for (kb, vb) in &other.terms {
                if da + kb.total_degree() > self.cap {
                    continue;
                }
                out.add_term(ka.sum(kb), va * vb);
            }
        }
        Ok(out)
    }

    /// Truncated exponential series Σ_{k=0}^{cap} w^k/k!.
    ///
    /// Requires a zero constant term; then w^k has minimum degree k, the sum
    /// terminates at the cap, and all retained coefficients are exact.
    pub fn exp(&self) -> Result<Self> {
        if self.coefficient(&ExponentVector::ZERO) != Complex64::new(0.0, 0.0) {
            return Err(Error::NonzeroConstantTerm);
        }
        let mut acc = Self::constant(self.cap, Complex64::new(1.0, 0.0));
        let mut term = Self::constant(self.cap, Complex64::new(1.0, 0.0));
        for k in 1..=self.cap {
            term = term.mul(self)?.scale(Complex64::new(1.0 / k as f64, 0.0));
            if term.terms.is_empty() {
                break;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// The mixed partial derivative of the represented function at the
    /// origin: coefficient(k) times the factorials of the orders.
    pub fn extract_derivative(&self, k: &ExponentVector) -> Result<Complex64> {
        let degree = k.total_degree();
        if degree > self.cap {
            return Err(Error::DegreeExceedsCap { degree, cap: self.cap });
        }
        Ok(self.coefficient(k) * k.factorial_product())
    }
}
