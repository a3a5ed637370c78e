//! Brute-force Heisenberg picture for the detection stage.
//!
//! Conjugating the intensity observable X = a†a + b†b through the second
//! squeezer, W = S₂† X S₂ (and likewise for X²), yields an exact
//! normally-ordered polynomial of degree ≤ 4. Its coefficients are extracted
//! here purely numerically: squeeze a family of low Fock probes on a small
//! auxiliary grid, read off matrix elements of W between them, and solve the
//! resulting linear systems shift block by shift block. No analytic
//! transformation rules enter, so the result independently referees the
//! closed-form assembly. With the coefficients in hand, a lossy output
//! expectation reduces to a weighted sum of pre-detection moments, which is
//! the only route that stays tractable when the state is mixed.

use num_complex::Complex64;

use super::state::{Monomial, TwoModeState};
use super::{OracleError, Result};

/// Highest Fock index (per mode) of the probe states. The pair generator
/// conserves n_a − n_b, so the conjugated observable contains only
/// balanced-shift monomials and low probes already determine every
/// coefficient; keeping the probes light also keeps their squeezed tails
/// far inside the auxiliary grid.
const PROBE_MAX: usize = 2;

/// Cutoff of the auxiliary grid the probes are squeezed on; large enough
/// that the squeezed-probe tails are far below the fit tolerance.
const AUX_CUTOFF: usize = 80;

/// Max residual allowed in the coefficient fit, relative to the data scale.
const FIT_TOL: f64 = 1e-8;

/// Normally-ordered expansions of S₂†XS₂ and S₂†X²S₂ for one (g, θ₂).
pub struct HeisenbergIntensity {
    mean_terms: Vec<(Monomial, Complex64)>,
    square_terms: Vec<(Monomial, Complex64)>,
}

/// Candidate monomials: total degree ≤ 4 with equal number shift on both
/// modes (the only terms exp(ξ*ab − ξa†b†) conjugation can produce, since
/// the generator commutes with n_a − n_b).
fn balanced_candidates() -> Vec<Monomial> {
    let mut out = Vec::new();
    for x1 in 0..=4u32 {
        for y1 in 0..=4u32 {
            for x2 in 0..=4u32 {
                for y2 in 0..=4u32 {
                    if x1 + y1 + x2 + y2 <= 4
                        && x1 as i64 - y1 as i64 == x2 as i64 - y2 as i64
                    {
                        out.push(Monomial::new(x1, y1, x2, y2));
                    }
                }
            }
        }
    }
    out
}

fn falling_sqrt(n: i64, k: u32) -> f64 {
    let mut acc = 1.0;
    for j in 0..k as i64 {
        if n - j <= 0 {
            return 0.0;
        }
        acc *= (n - j) as f64;
    }
    acc.sqrt()
}

/// Solve the (small, overdetermined) system A c = y in the least-squares
/// sense via the normal equations with partially pivoted elimination.
fn solve_least_squares(a: &[Vec<Complex64>], y: &[Complex64]) -> Option<Vec<Complex64>> {
    let rows = a.len();
    let cols = a[0].len();
    let zero = Complex64::new(0.0, 0.0);
    let mut m = vec![vec![zero; cols + 1]; cols];
    for i in 0..cols {
        for j in 0..cols {
            let mut acc = zero;
            for r in 0..rows {
                acc += a[r][i].conj() * a[r][j];
            }
            m[i][j] = acc;
        }
        let mut acc = zero;
        for r in 0..rows {
            acc += a[r][i].conj() * y[r];
        }
        m[i][cols] = acc;
    }
    for col in 0..cols {
        let pivot = (col..cols).max_by(|&p, &q| {
            m[p][col].norm().partial_cmp(&m[q][col].norm()).unwrap()
        })?;
        if m[pivot][col].norm() < 1e-13 {
            return None;
        }
        m.swap(col, pivot);
        let inv = Complex64::new(1.0, 0.0) / m[col][col];
        for j in col..=cols {
            m[col][j] *= inv;
        }
        for row in 0..cols {
            if row != col {
                let factor = m[row][col];
                if factor != zero {
                    for j in col..=cols {
                        let v = m[col][j];
                        m[row][j] -= factor * v;
                    }
                }
            }
        }
    }
    Some((0..cols).map(|i| m[i][cols]).collect())
}

impl HeisenbergIntensity {
    pub fn new(g: f64, theta2: f64) -> Result<Self> {
        // Squeeze every probe |na, nb⟩ once on the auxiliary grid.
        let count = PROBE_MAX + 1;
        let mut probes = Vec::with_capacity(count * count);
        for na in 0..count {
            for nb in 0..count {
                let mut amps =
                    ndarray::Array2::zeros((AUX_CUTOFF + 1, AUX_CUTOFF + 1));
                amps[(na, nb)] = Complex64::new(1.0, 0.0);
                let basis = TwoModeState::from_amplitudes(amps);
                // The hard tail check is skipped: high probes carry
                // polynomially enhanced squeezed tails, and exactness is
                // enforced end to end by the fit residual below instead.
                probes.push((
                    (na, nb),
                    basis.apply_two_mode_squeeze_unchecked(g, theta2)?,
                ));
            }
        }

        // Matrix elements ⟨w_i|X|w_j⟩ and ⟨w_i|X²|w_j⟩; X is diagonal in the
        // Fock basis so both are plain weighted overlaps.
        let dim = AUX_CUTOFF + 1;
        let n = probes.len();
        let zero = Complex64::new(0.0, 0.0);
        let mut y1 = vec![vec![zero; n]; n];
        let mut y2 = vec![vec![zero; n]; n];
        for i in 0..n {
            for j in 0..n {
                let (mut acc1, mut acc2) = (zero, zero);
                for na in 0..dim {
                    for nb in 0..dim {
                        let p = probes[i].1.amplitude(na, nb).conj()
                            * probes[j].1.amplitude(na, nb);
                        let x = (na + nb) as f64;
                        acc1 += p * x;
                        acc2 += p * (x * x);
                    }
                }
                y1[i][j] = acc1;
                y2[i][j] = acc2;
            }
        }

        let mean_terms = fit_expansion(&probes, &y1)?;
        let square_terms = fit_expansion(&probes, &y2)?;
        Ok(Self { mean_terms, square_terms })
    }

    /// (⟨X⟩, ⟨X²⟩) of the detected output given the pre-detection moment
    /// evaluator of the (possibly mixed, unnormalized) state. The phase
    /// shift e^{iφn_a} conjugates each monomial to a pure phase factor
    /// e^{iφ(y1−x1)}, so only the stage-one moments are ever needed.
    pub fn output_intensity(
        &self,
        phi: f64,
        moments: impl FnOnce(&[Monomial]) -> Vec<Complex64>,
    ) -> Result<(f64, f64)> {
        let mut monos: Vec<Monomial> = self
            .mean_terms
            .iter()
            .chain(self.square_terms.iter())
            .map(|(m, _)| *m)
            .collect();
        monos.push(Monomial::new(0, 0, 0, 0));
        monos.sort_unstable_by_key(|m| (m.x1, m.y1, m.x2, m.y2));
        monos.dedup();
        let values = moments(&monos);
        let lookup = |m: &Monomial| {
            let idx = monos.iter().position(|q| q == m).unwrap();
            values[idx]
        };
        let norm = lookup(&Monomial::new(0, 0, 0, 0)).re;
        if norm < 1e-300 {
            return Err(OracleError::AnnihilatedState);
        }
        let assemble = |terms: &[(Monomial, Complex64)]| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, c) in terms {
                let angle = phi * (m.y1 as f64 - m.x1 as f64);
                acc += c * Complex64::new(angle.cos(), angle.sin()) * lookup(m);
            }
            acc.re / norm
        };
        Ok((assemble(&self.mean_terms), assemble(&self.square_terms)))
    }
}

/// Fit Σ_μ c_μ M_μ to the probe matrix elements, one number-shift block at
/// a time (monomials with different shifts never share matrix elements).
fn fit_expansion(
    probes: &[((usize, usize), TwoModeState)],
    y: &[Vec<Complex64>],
) -> Result<Vec<(Monomial, Complex64)>> {
    let scale = y
        .iter()
        .flatten()
        .map(|v| v.norm())
        .fold(1.0f64, f64::max);
    let mut terms = Vec::new();
    let all = balanced_candidates();
    let mut shifts: Vec<(i64, i64)> = all
        .iter()
        .map(|m| (m.x1 as i64 - m.y1 as i64, m.x2 as i64 - m.y2 as i64))
        .collect();
    shifts.sort_unstable();
    shifts.dedup();
    for (da, db) in shifts {
        let group: Vec<Monomial> = all
            .iter()
            .copied()
            .filter(|m| {
                m.x1 as i64 - m.y1 as i64 == da && m.x2 as i64 - m.y2 as i64 == db
            })
            .collect();
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for (i, ((nai, nbi), _)) in probes.iter().enumerate() {
            for (j, ((naj, nbj), _)) in probes.iter().enumerate() {
                if *nai as i64 - *naj as i64 != da || *nbi as i64 - *nbj as i64 != db {
                    continue;
                }
                let row: Vec<Complex64> = group
                    .iter()
                    .map(|m| {
                        let w = falling_sqrt(*naj as i64, m.y1)
                            * falling_sqrt(*nai as i64, m.x1)
                            * falling_sqrt(*nbj as i64, m.y2)
                            * falling_sqrt(*nbi as i64, m.x2);
                        Complex64::new(w, 0.0)
                    })
                    .collect();
                rows.push(row);
                rhs.push(y[i][j]);
            }
        }
        if rows.is_empty() {
            continue;
        }
        let coeffs = solve_least_squares(&rows, &rhs).ok_or(
            OracleError::UnsupportedConfiguration(
                "singular system in detection-stage coefficient fit",
            ),
        )?;
        // The fit must be an exact operator identity, not an approximation.
        let mut residual = 0.0f64;
        for (row, target) in rows.iter().zip(rhs.iter()) {
            let mut pred = Complex64::new(0.0, 0.0);
            for (a, c) in row.iter().zip(coeffs.iter()) {
                pred += a * c;
            }
            residual = residual.max((pred - target).norm());
        }
        if residual > FIT_TOL * scale {
            return Err(OracleError::UnsupportedConfiguration(
                "detection-stage coefficient fit residual too large",
            ));
        }
        for (m, c) in group.iter().zip(coeffs.iter()) {
            if c.norm() > 1e-10 * scale {
                terms.push((*m, *c));
            }
        }
    }
    Ok(terms)
}
