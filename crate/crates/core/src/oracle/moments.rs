//! Collective spin moments from Pauli-string expectations, and both
//! squeezing parameters evaluated directly from their definitions.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::state::{DensityMatrix, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{
    norm, orthonormal_complement, quad, sym2_min_eigenvalue, sym3_min_eigenvalue, Sym3, Vec3,
};
use crate::model::Definition;
use crate::squeezing::SqueezingValue;

/// Action of sigma_k (k = 0, 1, 2 for x, y, z) on one qubit in basis
/// state `bit`: returns whether the bit flips and the phase picked up.
fn pauli_action(k: usize, bit: bool) -> (bool, Complex64) {
    match (k, bit) {
        (0, _) => (true, Complex64::new(1.0, 0.0)),
        (1, false) => (true, Complex64::new(0.0, -1.0)),
        (1, true) => (true, Complex64::new(0.0, 1.0)),
        (2, false) => (false, Complex64::new(-1.0, 0.0)),
        (2, true) => (false, Complex64::new(1.0, 0.0)),
        _ => unreachable!(),
    }
}

/// Flip mask and per-basis-state phase of a Pauli string.
fn string_action(ops: &[(usize, usize)], x: usize) -> (usize, Complex64) {
    let mut flip = 0;
    let mut phase = Complex64::new(1.0, 0.0);
    for &(qubit, k) in ops {
        let (f, p) = pauli_action(k, (x >> qubit) & 1 == 1);
        if f {
            flip |= 1 << qubit;
        }
        phase *= p;
    }
    (flip, phase)
}

/// States whose Pauli-string expectations can be evaluated.
pub trait PauliExpectation: Sync {
    fn n_qubits(&self) -> usize;

    /// `<prod sigma_k^qubit>` for `(qubit, k)` pairs on distinct qubits.
    fn expectation(&self, ops: &[(usize, usize)]) -> f64;
}

impl PauliExpectation for StateVector {
    fn n_qubits(&self) -> usize {
        StateVector::n_qubits(self)
    }

    fn expectation(&self, ops: &[(usize, usize)]) -> f64 {
        let psi = self.amplitudes();
        let mut acc = Complex64::new(0.0, 0.0);
        for (y, a) in psi.iter().enumerate() {
            let (flip, phase) = string_action(ops, y);
            acc += psi[y ^ flip].conj() * phase * a;
        }
        acc.re
    }
}

impl PauliExpectation for DensityMatrix {
    fn n_qubits(&self) -> usize {
        DensityMatrix::n_qubits(self)
    }

    fn expectation(&self, ops: &[(usize, usize)]) -> f64 {
        let rho = self.matrix();
        let mut acc = Complex64::new(0.0, 0.0);
        for y in 0..self.dim() {
            let (flip, phase) = string_action(ops, y);
            acc += phase * rho[(y, y ^ flip)];
        }
        acc.re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollectiveMoments {
    pub n: usize,
    pub mean_spin: Vec3,
    /// Symmetrized second moments `<J_k J_l + J_l J_k>/2`.
    pub corr: Sym3,
    pub cov: Sym3,
    pub gamma_matrix: Sym3,
}

impl CollectiveMoments {
    /// `<J^2>`
    pub fn total_spin_sq(&self) -> f64 {
        self.corr[0][0] + self.corr[1][1] + self.corr[2][2]
    }
}

pub fn collective_moments<S: PauliExpectation + ?Sized>(state: &S) -> CollectiveMoments {
    let n = state.n_qubits();
    let mut mean = [0.0; 3];
    for (k, m) in mean.iter_mut().enumerate() {
        *m = 0.5 * (0..n).map(|j| state.expectation(&[(j, k)])).sum::<f64>();
    }

    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|j| ((j + 1)..n).map(move |m| (j, m)))
        .collect();
    // sum over ordered qubit pairs j != m of <sigma_k^j sigma_l^m>
    let two_body = pairs
        .par_iter()
        .map(|&(j, m)| {
            let mut e = [[0.0; 3]; 3];
            for (k, row) in e.iter_mut().enumerate() {
                for (l, v) in row.iter_mut().enumerate() {
                    *v = state.expectation(&[(j, k), (m, l)]);
                }
            }
            let mut s = [[0.0; 3]; 3];
            for k in 0..3 {
                for l in 0..3 {
                    s[k][l] = e[k][l] + e[l][k];
                }
            }
            s
        })
        .reduce(
            || [[0.0; 3]; 3],
            |mut a, b| {
                for k in 0..3 {
                    for l in 0..3 {
                        a[k][l] += b[k][l];
                    }
                }
                a
            },
        );

    let mut corr = [[0.0; 3]; 3];
    let mut cov = [[0.0; 3]; 3];
    let mut gamma = [[0.0; 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            let diag = if k == l { n as f64 } else { 0.0 };
            corr[k][l] = 0.25 * (two_body[k][l] + diag);
            cov[k][l] = corr[k][l] - mean[k] * mean[l];
            gamma[k][l] = (n as f64 - 1.0) * cov[k][l] + corr[k][l];
        }
    }
    CollectiveMoments {
        n,
        mean_spin: mean,
        corr,
        cov,
        gamma_matrix: gamma,
    }
}

/// `N min_perp Var(J . n_perp) / |<J>|^2`; a vanishing mean spin gives
/// the divergent tag.
pub fn xi2_from_moments(m: &CollectiveMoments) -> SqueezingValue {
    let len = norm(&m.mean_spin);
    if len <= 1e-12 {
        return SqueezingValue::divergent(Definition::KitagawaUeda);
    }
    let dir = [
        m.mean_spin[0] / len,
        m.mean_spin[1] / len,
        m.mean_spin[2] / len,
    ];
    let (e1, e2) = orthonormal_complement(&dir);
    let lam = sym2_min_eigenvalue(
        quad(&m.cov, &e1, &e1),
        quad(&m.cov, &e1, &e2),
        quad(&m.cov, &e2, &e2),
    );
    SqueezingValue::new(Definition::KitagawaUeda, m.n as f64 * lam / (len * len))
}

/// `lambda_min(Gamma) / (<J^2> - N/2)`.
pub fn xi2_prime_from_moments(m: &CollectiveMoments) -> Result<SqueezingValue> {
    let den = m.total_spin_sq() - 0.5 * m.n as f64;
    if den <= 1e-12 {
        return Err(Error::DegenerateDenominator(den));
    }
    Ok(SqueezingValue::new(
        Definition::Toth,
        sym3_min_eigenvalue(&m.gamma_matrix) / den,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::state::{apply_field_rotation, build_oat_state};
    use crate::squeezing::{xi2_oat, xi2_prime_oat, ClosedForm};

    #[test]
    fn product_state_moments() {
        for n in 1..=6 {
            let m = collective_moments(&build_oat_state(n, 0.0).unwrap());
            let nf = n as f64;
            assert!((m.mean_spin[0] - nf / 2.0).abs() < 1e-13);
            assert!(m.mean_spin[1].abs() < 1e-13 && m.mean_spin[2].abs() < 1e-13);
            assert!((m.cov[1][1] - nf / 4.0).abs() < 1e-13);
            assert!((m.cov[2][2] - nf / 4.0).abs() < 1e-13);
            assert!((xi2_from_moments(&m).xi2 - 1.0).abs() < 1e-13);
            if n >= 2 {
                assert!((xi2_prime_from_moments(&m).unwrap().xi2 - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn maximally_mixed_moments() {
        let m = collective_moments(&DensityMatrix::maximally_mixed(4).unwrap());
        for k in 0..3 {
            assert!(m.mean_spin[k].abs() < 1e-15);
            for l in 0..3 {
                let want = if k == l { 1.0 } else { 0.0 };
                assert!((m.corr[k][l] - want).abs() < 1e-15);
            }
        }
        assert!(xi2_from_moments(&m).is_divergent());
    }

    #[test]
    fn singlet_denominator_is_degenerate() {
        // singlet: <J^2> = 0
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::from(0.0);
        let singlet =
            StateVector::new(2, vec![z, Complex64::from(h), Complex64::from(-h), z]).unwrap();
        let m = collective_moments(&singlet);
        assert!(matches!(
            xi2_prime_from_moments(&m),
            Err(Error::DegenerateDenominator(_))
        ));
    }

    #[test]
    fn pure_and_mixed_representations_agree() {
        let psi = build_oat_state(4, 0.3).unwrap();
        let a = collective_moments(&psi);
        let b = collective_moments(&DensityMatrix::from_state(&psi));
        for k in 0..3 {
            assert!((a.mean_spin[k] - b.mean_spin[k]).abs() < 1e-14);
            for l in 0..3 {
                assert!((a.corr[k][l] - b.corr[k][l]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn mean_spin_length_of_twisted_state() {
        for n in 1..=10 {
            for &alpha in &[0.05, 0.2, 0.5, 1.1] {
                let m = collective_moments(&build_oat_state(n, alpha).unwrap());
                let want = 0.5 * n as f64 * f64::cos(alpha).powi(n as i32 - 1);
                assert!(
                    (norm(&m.mean_spin) - want).abs() < 1e-12,
                    "n={n} alpha={alpha}"
                );
                // along +x, with no component out of the equatorial plane
                assert!(m.mean_spin[2].abs() < 1e-13);
            }
        }
    }

    #[test]
    fn twisted_state_matches_closed_forms() {
        for n in 2..=7 {
            for &alpha in &[0.05, 0.2, 0.4, 0.9] {
                let m = collective_moments(&build_oat_state(n, alpha).unwrap());
                let xi = xi2_from_moments(&m).xi2;
                assert!(
                    (xi - xi2_oat(n, alpha).unwrap().xi2).abs() < 1e-10,
                    "n={n} {alpha}"
                );
                let xp = xi2_prime_from_moments(&m).unwrap().xi2;
                let want = xi2_prime_oat(n, alpha, ClosedForm::Corrected).unwrap().xi2;
                assert!((xp - want).abs() < 1e-10, "n={n} {alpha}: {xp} vs {want}");
            }
        }
        let m = collective_moments(&build_oat_state(2, std::f64::consts::PI / 6.0).unwrap());
        assert!((xi2_from_moments(&m).xi2 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn field_rotation_moves_mean_spin() {
        let psi = build_oat_state(3, 0.0).unwrap();
        let rot = apply_field_rotation(&psi, 1.0, std::f64::consts::FRAC_PI_2);
        let m = collective_moments(&rot);
        assert!(m.mean_spin[0].abs() < 1e-14);
        assert!((m.mean_spin[1] - 1.5).abs() < 1e-14);
        let psi = build_oat_state(4, 0.3).unwrap();
        let before = collective_moments(&psi);
        let after = collective_moments(&apply_field_rotation(&psi, 0.8, 1.3));
        let xi = |m: &CollectiveMoments| xi2_from_moments(m).xi2;
        assert!((xi(&before) - xi(&after)).abs() < 1e-12);
        let xp = |m: &CollectiveMoments| xi2_prime_from_moments(m).unwrap().xi2;
        assert!((xp(&before) - xp(&after)).abs() < 1e-12);
    }
}
