use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// All physical knobs of the interferometer model.
///
/// Both parametric amplifiers share the gain factor `g`; their phases default
/// to `theta1 = 0` and `theta2 = π` (the balanced configuration in which the
/// second amplifier inverts the first). The delocalized subtraction operator
/// is `(s·a + t·b)^m` with `s + t = 1`, `T` is the transmissivity of the
/// internal loss channels, `phi` the phase shift on mode `a`, and `eta` the
/// loss parameter of the Fisher-information channel (`eta = 1` lossless).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterferometerParams {
    pub g: f64,
    pub alpha: Complex64,
    pub s: f64,
    pub t: f64,
    pub m: u32,
    pub transmissivity: f64,
    pub phi: f64,
    pub eta: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl InterferometerParams {
    /// Standard constructor: `s` is derived as `1 - t`, remaining knobs take
    /// their defaults (`T = 1`, `phi = 0`, `eta = 1`, balanced amplifier
    /// phases).
    pub fn new(g: f64, alpha: Complex64, t: f64, m: u32) -> Result<Self> {
        let p = Self {
            g,
            alpha,
            s: 1.0 - t,
            t,
            m,
            transmissivity: 1.0,
            phi: 0.0,
            eta: 1.0,
            theta1: 0.0,
            theta2: PI,
        };
        p.validate()?;
        Ok(p)
    }

    /// Escape hatch for exploratory `s`, `t` outside the `s + t = 1` line.
    /// Range checks on the remaining parameters still apply.
    pub fn with_unconstrained_split(mut self, s: f64, t: f64) -> Result<Self> {
        self.s = s;
        self.t = t;
        self.validate_ranges()?;
        Ok(self)
    }

    pub fn with_split(mut self, t: f64) -> Result<Self> {
        self.s = 1.0 - t;
        self.t = t;
        self.validate()?;
        Ok(self)
    }

    pub fn with_order(mut self, m: u32) -> Self {
        self.m = m;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_transmissivity(mut self, transmissivity: f64) -> Result<Self> {
        self.transmissivity = transmissivity;
        self.validate_ranges()?;
        Ok(self)
    }

    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        self.eta = eta;
        self.validate_ranges()?;
        Ok(self)
    }

    pub fn with_alpha(mut self, alpha: Complex64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_gain(mut self, g: f64) -> Result<Self> {
        self.g = g;
        self.validate_ranges()?;
        Ok(self)
    }

    /// The same parameter point with the loss channels switched off; the
    /// Fisher-information state carries no internal beam splitters.
    pub fn lossless(mut self) -> Self {
        self.transmissivity = 1.0;
        self
    }

    fn validate(&self) -> Result<()> {
        if (self.s + self.t - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams("s + t must equal 1"));
        }
        if !(0.0..=1.0).contains(&self.s) {
            return Err(Error::InvalidParams("s must lie in [0, 1]"));
        }
        self.validate_ranges()
    }

    fn validate_ranges(&self) -> Result<()> {
        if !self.g.is_finite() || self.g < 0.0 {
            return Err(Error::InvalidParams("g must be finite and nonnegative"));
        }
        if !(0.0..=1.0).contains(&self.transmissivity) {
            return Err(Error::InvalidParams("transmissivity must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParams("eta must lie in [0, 1]"));
        }
        if !self.alpha.re.is_finite() || !self.alpha.im.is_finite() {
            return Err(Error::InvalidParams("alpha must be finite"));
        }
        if !self.s.is_finite() || !self.t.is_finite() {
            return Err(Error::InvalidParams("s, t must be finite"));
        }
        Ok(())
    }

    /// True when the amplifier phases sit at the balanced working point the
    /// closed-form observables are derived for.
    pub fn is_balanced(&self) -> bool {
        self.theta1.abs() < 1e-12 && (self.theta2 - PI).abs() < 1e-12
    }
}
