//! Identical single-qubit channels applied to every qubit.

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::state::DensityMatrix;
use crate::error::{Error, Result};
use crate::model::ChannelKind;

pub type Op2 = Matrix2<Complex64>;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Pauli matrices in the (down, up) basis order.
pub fn pauli(k: usize) -> Op2 {
    let (o, l, i) = (c(0.0), c(1.0), Complex64::i());
    match k {
        0 => Op2::new(l, o, o, l),
        1 => Op2::new(o, l, l, o),
        2 => Op2::new(o, i, -i, o),
        3 => Op2::new(-l, o, o, l),
        _ => panic!("pauli index {k}"),
    }
}

/// Kraus operators of the channel with parameter `kappa`.
pub fn kraus_operators(kind: ChannelKind, kappa: f64) -> Result<Vec<Op2>> {
    if !kappa.is_finite() || kappa.abs() > 1.0 {
        return Err(Error::InvalidKappa(kappa));
    }
    let k2 = kappa * kappa;
    let weighted = |w: f64, k: usize| pauli(k) * c(w.sqrt());
    let ops = match kind {
        ChannelKind::Depolarizing => {
            let p = (1.0 - k2) / 4.0;
            vec![
                weighted((1.0 + 3.0 * k2) / 4.0, 0),
                weighted(p, 1),
                weighted(p, 2),
                weighted(p, 3),
            ]
        }
        ChannelKind::Dephasing => {
            vec![weighted((1.0 + k2) / 2.0, 0), weighted((1.0 - k2) / 2.0, 3)]
        }
        ChannelKind::Damping => {
            let (o, l) = (c(0.0), c(1.0));
            vec![
                Op2::new(l, o, o, c(kappa)),
                Op2::new(o, c((1.0 - k2).sqrt()), o, o),
            ]
        }
    };
    Ok(ops)
}

/// `sum_k E_k^dagger E_k`, the identity for a trace-preserving map.
pub fn completeness(ops: &[Op2]) -> Op2 {
    ops.iter().map(|e| e.adjoint() * e).sum()
}

pub fn apply_single_qubit(ops: &[Op2], chi: &Op2) -> Op2 {
    ops.iter().map(|e| e * chi * e.adjoint()).sum()
}

/// Applies the Kraus map to qubit `j` of `rho` in place.
fn apply_on_qubit(rho: &mut DensityMatrix, j: usize, ops: &[Op2]) {
    let mask = 1usize << j;
    let dim = rho.dim();
    let m = rho.matrix_mut();
    for c0 in (0..dim).filter(|x| x & mask == 0) {
        for r0 in (0..dim).filter(|x| x & mask == 0) {
            let rows = [r0, r0 | mask];
            let cols = [c0, c0 | mask];
            let block = Op2::new(
                m[(rows[0], cols[0])],
                m[(rows[0], cols[1])],
                m[(rows[1], cols[0])],
                m[(rows[1], cols[1])],
            );
            let out = apply_single_qubit(ops, &block);
            for a in 0..2 {
                for b in 0..2 {
                    m[(rows[a], cols[b])] = out[(a, b)];
                }
            }
        }
    }
}

/// The same channel on every qubit.
pub fn apply_channel(rho: &DensityMatrix, kind: ChannelKind, kappa: f64) -> Result<DensityMatrix> {
    let ops = kraus_operators(kind, kappa)?;
    let mut out = rho.clone();
    for j in 0..rho.n_qubits() {
        apply_on_qubit(&mut out, j, &ops);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::state::build_oat_state;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_density(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
        let dim = 1 << n;
        let g = DMatrix::from_fn(dim, dim, |_, _| {
            Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
        });
        let mut rho = &g * g.adjoint();
        let tr = rho.trace();
        rho /= tr;
        DensityMatrix::new(n, rho).unwrap()
    }

    #[test]
    fn kraus_sets_are_complete() {
        for kind in ChannelKind::ALL {
            for &k in &[1.0, 0.7, 0.0, -0.4] {
                let sum = completeness(&kraus_operators(kind, k).unwrap());
                assert!((sum - Op2::identity()).norm() < 1e-15, "{kind} {k}");
            }
        }
    }

    #[test]
    fn invalid_kappa_rejected() {
        assert_eq!(
            kraus_operators(ChannelKind::Dephasing, 1.2).unwrap_err(),
            Error::InvalidKappa(1.2)
        );
    }

    #[test]
    fn identity_at_kappa_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(3, &mut rng);
        for kind in ChannelKind::ALL {
            let out = apply_channel(&rho, kind, 1.0).unwrap();
            assert!(out.max_abs_diff(&rho) < 1e-14);
        }
    }

    #[test]
    fn full_decoherence_limits() {
        let rho = DensityMatrix::from_state(&build_oat_state(3, 0.5).unwrap());
        let mixed = apply_channel(&rho, ChannelKind::Depolarizing, 0.0).unwrap();
        assert!(mixed.max_abs_diff(&DensityMatrix::maximally_mixed(3).unwrap()) < 1e-15);
        let ground = apply_channel(&rho, ChannelKind::Damping, 0.0).unwrap();
        for ((r, c), z) in ground
            .matrix()
            .iter()
            .enumerate()
            .map(|(i, z)| ((i % 8, i / 8), z))
        {
            let want = if r == 0 && c == 0 { 1.0 } else { 0.0 };
            assert!((z - Complex64::from(want)).norm() < 1e-15);
        }
    }

    #[test]
    fn channels_are_completely_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let kinds = ChannelKind::ALL;
        for i in 0..1000 {
            let n = 1 + i % 3;
            let rho = random_density(n, &mut rng);
            let kappa = -1.0 + 2.0 * ((i * 37) % 101) as f64 / 100.0;
            let out = apply_channel(&rho, kinds[i % 3], kappa).unwrap();
            out.validate().unwrap();
            assert!(out.min_eigenvalue() >= -1e-10);
        }
    }

    #[test]
    fn decohered_oat_state_is_permutation_symmetric() {
        for n in 2..=4 {
            let rho = DensityMatrix::from_state(&build_oat_state(n, 0.3).unwrap());
            for kind in ChannelKind::ALL {
                let out = apply_channel(&rho, kind, 0.6).unwrap();
                for j in 0..n {
                    for k in (j + 1)..n {
                        assert!(out.swap_qubits(j, k).max_abs_diff(&out) < 1e-12);
                    }
                }
            }
        }
    }
}
