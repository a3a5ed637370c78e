//! Exact moments of the two-mode loss channel without branch enumeration.
//!
//! The photon-loss channel never mixes number-difference blocks: every Kraus
//! term maps |n⟩⟨m| to |n−l⟩⟨m−l|, so ⟨n+Δ|Λ(ρ)|n⟩ depends only on the same
//! diagonal of ρ. A normally-ordered monomial a†^{x1}a^{y1}b†^{x2}b^{y2}
//! likewise touches a single (Δa, Δb) = (x1−y1, x2−y2) diagonal, so each
//! needed diagonal of Λ(|ψ⟩⟨ψ|) is contracted directly from ψ in two
//! single-mode sweeps. This is exact at the given cutoff (the full Kraus sum
//! is performed, nothing is weight-truncated).

use num_complex::Complex64;

use super::state::{kraus_coefficient, Monomial, TwoModeState};

/// Precomputed Kraus amplitudes f(l, n) with K_l|n⟩ = f(l, n)|n−l⟩, stored
/// row-major over (l, n).
struct KrausTable {
    dim: usize,
    f: Vec<f64>,
}

impl KrausTable {
    fn new(transmissivity: f64, dim: usize) -> Self {
        let mut f = vec![0.0; dim * dim];
        for l in 0..dim {
            for n in l..dim {
                f[l * dim + n] = kraus_coefficient(transmissivity, l as u32, n);
            }
        }
        Self { dim, f }
    }

    #[inline]
    fn get(&self, l: usize, n: usize) -> f64 {
        self.f[l * self.dim + n]
    }
}

/// √(n (n−1) ⋯ (n−k+1)), the ladder amplitude of a^k on |n⟩; 0 when n < k.
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

/// ⟨na+Δa, nb+Δb| Λ_T⊗Λ_T (|ψ⟩⟨ψ|) |na, nb⟩ for all (na, nb), as a flat
/// dim×dim grid (entries whose shifted index leaves the cutoff are zero).
fn loss_diagonal(
    psi: &TwoModeState,
    table: &KrausTable,
    da: i64,
    db: i64,
) -> Vec<Complex64> {
    let dim = table.dim;
    let zero = Complex64::new(0.0, 0.0);
    // Stage 1: contract the b-mode Kraus sum; ka is the pre-loss a-index of
    // the conjugated factor, so ψ(ka+da, ·) pairs with ψ*(ka, ·).
    let mut h = vec![zero; dim * dim];
    for ka in 0..dim as i64 {
        if ka + da < 0 || ka + da >= dim as i64 {
            continue;
        }
        for nb in 0..dim as i64 {
            if nb + db < 0 {
                continue;
            }
            let mut acc = zero;
            let mut lb = 0i64;
            while nb + lb < dim as i64 && nb + db + lb < dim as i64 {
                let w = table.get(lb as usize, (nb + db + lb) as usize)
                    * table.get(lb as usize, (nb + lb) as usize);
                if w != 0.0 {
                    acc += psi.amplitude((ka + da) as usize, (nb + db + lb) as usize)
                        * psi.amplitude(ka as usize, (nb + lb) as usize).conj()
                        * w;
                }
                lb += 1;
            }
            h[ka as usize * dim + nb as usize] = acc;
        }
    }
    // Stage 2: contract the a-mode Kraus sum.
    let mut d = vec![zero; dim * dim];
    for na in 0..dim as i64 {
        if na + da < 0 || na + da >= dim as i64 {
            continue;
        }
        for nb in 0..dim as i64 {
            let mut acc = zero;
            let mut la = 0i64;
            while na + la < dim as i64 && na + da + la < dim as i64 {
                let w = table.get(la as usize, (na + da + la) as usize)
                    * table.get(la as usize, (na + la) as usize);
                if w != 0.0 {
                    acc += h[(na + la) as usize * dim + nb as usize] * w;
                }
                la += 1;
            }
            d[na as usize * dim + nb as usize] = acc;
        }
    }
    d
}

/// Tr[Λ_T⊗Λ_T(|ψ⟩⟨ψ|) · a†^{x1}a^{y1}b†^{x2}b^{y2}] for each monomial,
/// with ψ deliberately left unnormalized (the norm is the m = 0 moment).
pub fn lossy_moments(
    psi: &TwoModeState,
    transmissivity: f64,
    monos: &[Monomial],
) -> Vec<Complex64> {
    let dim = psi.cutoff() + 1;
    let table = KrausTable::new(transmissivity, dim);
    let mut shifts: Vec<(i64, i64)> = monos
        .iter()
        .map(|m| (m.x1 as i64 - m.y1 as i64, m.x2 as i64 - m.y2 as i64))
        .collect();
    shifts.sort_unstable();
    shifts.dedup();
    let diagonals: Vec<((i64, i64), Vec<Complex64>)> = shifts
        .into_iter()
        .map(|(da, db)| ((da, db), loss_diagonal(psi, &table, da, db)))
        .collect();
    monos
        .iter()
        .map(|m| {
            let da = m.x1 as i64 - m.y1 as i64;
            let db = m.x2 as i64 - m.y2 as i64;
            let diag = &diagonals.iter().find(|(s, _)| *s == (da, db)).unwrap().1;
            let mut acc = Complex64::new(0.0, 0.0);
            for na in m.y1 as i64..dim as i64 {
                if na + da >= dim as i64 {
                    break;
                }
                for nb in m.y2 as i64..dim as i64 {
                    if nb + db >= dim as i64 {
                        break;
                    }
                    // ⟨na|Λρ|na+Δ⟩ = conj of the stored diagonal entry; the
                    // ladder weight is √(na!/(na−y1)!)·√((na+Δa)!/(na+Δa−x1)!)
                    // and the same for mode b.
                    let w = falling_sqrt(na, m.y1)
                        * falling_sqrt(na + da, m.x1)
                        * falling_sqrt(nb, m.y2)
                        * falling_sqrt(nb + db, m.x2);
                    if w != 0.0 {
                        acc += diag[na as usize * dim + nb as usize].conj() * w;
                    }
                }
            }
            acc
        })
        .collect()
}
