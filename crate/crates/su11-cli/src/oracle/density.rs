use ndarray::Array2;
use num_complex::Complex64;

use super::state::{kraus_coefficient, Monomial, TwoModeState};
use super::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
}

/// Density operator on the truncated two-mode space, stored dense with the
/// composite row index na·dim + nb.
///
/// The pipeline stays in pure-state form as long as possible (Kraus
/// branching); densities are for the small-space channel checks and the
/// explicit mixed-state code path.
#[derive(Clone, Debug)]
pub struct TwoModeDensity {
    dim: usize,
    rho: Array2<Complex64>,
}

impl TwoModeDensity {
    pub fn from_pure(state: &TwoModeState) -> Self {
        let dim = state.cutoff() + 1;
        let d2 = dim * dim;
        let flat: Vec<Complex64> = state.amplitudes().iter().copied().collect();
        let mut rho = Array2::zeros((d2, d2));
        for i in 0..d2 {
            for j in 0..d2 {
                rho[(i, j)] = flat[i] * flat[j].conj();
            }
        }
        Self { dim, rho }
    }

    pub fn cutoff(&self) -> usize {
        self.dim - 1
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim * self.dim).map(|i| self.rho[(i, i)].re).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d2 = self.dim * self.dim;
        let mut worst = 0.0f64;
        for i in 0..d2 {
            for j in i..d2 {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn normalized(&self) -> Self {
        let tr = self.trace();
        Self { dim: self.dim, rho: &self.rho * Complex64::new(1.0 / tr, 0.0) }
    }

    fn index(&self, na: usize, nb: usize) -> usize {
        na * self.dim + nb
    }

    /// ρ → Σ_l K_l ρ K_l† with K_l = √((1−T)^l/l!) T^{n/2} a^l (or b^l),
    /// truncated once the remaining trace is negligible.
    pub fn apply_loss_channel(&self, transmissivity: f64, mode: Mode) -> Result<Self> {
        let dim = self.dim;
        let d2 = dim * dim;
        let mut out = Array2::zeros((d2, d2));
        let total = self.trace();
        let mut captured = 0.0;
        for l in 0..dim as u32 {
            // Branch ρ_l = K_l ρ K_l†.
            let coeffs: Vec<f64> = (0..dim)
                .map(|n| if n >= l as usize { kraus_coefficient(transmissivity, l, n) } else { 0.0 })
                .collect();
            let mut branch_trace = 0.0;
            for na in l as usize..dim {
                for nb in 0..dim {
                    let (row_src, row_dst, c_row) = match mode {
                        Mode::A => (self.index(na, nb), self.index(na - l as usize, nb), coeffs[na]),
                        Mode::B => (self.index(nb, na), self.index(nb, na - l as usize), coeffs[na]),
                    };
                    if c_row == 0.0 {
                        continue;
                    }
                    for ma in l as usize..dim {
                        for mb in 0..dim {
                            let (col_src, col_dst, c_col) = match mode {
                                Mode::A => {
                                    (self.index(ma, mb), self.index(ma - l as usize, mb), coeffs[ma])
                                }
                                Mode::B => {
                                    (self.index(mb, ma), self.index(mb, ma - l as usize), coeffs[ma])
                                }
                            };
                            if c_col == 0.0 {
                                continue;
                            }
                            let v = self.rho[(row_src, col_src)] * (c_row * c_col);
                            out[(row_dst, col_dst)] += v;
                            if row_dst == col_dst {
                                branch_trace += v.re;
                            }
                        }
                    }
                }
            }
            captured += branch_trace;
            if total - captured < 1e-14 * total.abs().max(1e-300) {
                break;
            }
        }
        Ok(Self { dim, rho: out })
    }

    /// Diagonal phase e^{iφ n_a} on mode a.
    pub fn apply_phase_shift(&self, phi: f64) -> Self {
        let dim = self.dim;
        let d2 = dim * dim;
        let mut out = self.rho.clone();
        for i in 0..d2 {
            let na_i = (i / dim) as f64;
            for j in 0..d2 {
                let na_j = (j / dim) as f64;
                let angle = phi * (na_i - na_j);
                out[(i, j)] *= Complex64::new(angle.cos(), angle.sin());
            }
        }
        Self { dim, rho: out }
    }

    /// Tr(ρ a†^{x1} a^{y1} b†^{x2} b^{y2}).
    pub fn expectation(&self, mono: Monomial) -> Complex64 {
        // O maps |na - y1 + x1, nb - y2 + x2⟩⟨na, nb|-style elements; its
        // only nonzero entries connect (na, nb) to the shifted pair, so the
        // trace reduces to one sweep over the grid.
        let dim = self.dim;
        let mut acc = Complex64::new(0.0, 0.0);
        let (x1, y1, x2, y2) = (mono.x1 as usize, mono.y1 as usize, mono.x2 as usize, mono.y2 as usize);
        for na in y1..dim {
            let na_out = na - y1 + x1;
            if na_out >= dim {
                continue;
            }
            for nb in y2..dim {
                let nb_out = nb - y2 + x2;
                if nb_out >= dim {
                    continue;
                }
                let mut w = 1.0f64;
                for j in 0..y1 {
                    w *= ((na - j) as f64).sqrt();
                }
                for j in 0..x1 {
                    w *= ((na_out - j) as f64).sqrt();
                }
                for j in 0..y2 {
                    w *= ((nb - j) as f64).sqrt();
                }
                for j in 0..x2 {
                    w *= ((nb_out - j) as f64).sqrt();
                }
                acc += self.rho[(self.index(na, nb), self.index(na_out, nb_out))] * w;
            }
        }
        acc
    }

    /// ⟨ψ|ρ|ψ⟩ for a pure comparison state.
    pub fn overlap_with_pure(&self, state: &TwoModeState) -> f64 {
        let dim = self.dim;
        let flat: Vec<Complex64> = state.amplitudes().iter().copied().collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..dim * dim {
            for j in 0..dim * dim {
                acc += flat[i].conj() * self.rho[(i, j)] * flat[j];
            }
        }
        acc.re
    }

    /// Reduced single-mode density of mode a (partial trace over mode b).
    pub fn reduced_a(&self) -> Array2<Complex64> {
        let dim = self.dim;
        let mut out = Array2::zeros((dim, dim));
        for na in 0..dim {
            for ma in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for nb in 0..dim {
                    acc += self.rho[(self.index(na, nb), self.index(ma, nb))];
                }
                out[(na, ma)] = acc;
            }
        }
        out
    }
}

/// Reduced mode-a density of a pure two-mode state (mode b traced out).
pub fn reduced_a_of_pure(state: &TwoModeState) -> Array2<Complex64> {
    let dim = state.cutoff() + 1;
    let mut out = Array2::zeros((dim, dim));
    for na in 0..dim {
        for ma in 0..dim {
            let mut acc = Complex64::new(0.0, 0.0);
            for nb in 0..dim {
                acc += state.amplitude(na, nb) * state.amplitude(ma, nb).conj();
            }
            out[(na, ma)] = acc;
        }
    }
    out
}
