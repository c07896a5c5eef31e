//! Pure and mixed N-qubit states on the computational basis.
//!
//! Qubit `j` is bit `j` of the basis index; a set bit is spin up
//! (sigma_z = +1), a clear bit is spin down.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 12;

fn check_size(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::NTooSmall { n, min: 1 });
    }
    if n > MAX_QUBITS {
        return Err(Error::NTooLarge { n, cap: MAX_QUBITS });
    }
    Ok(())
}

/// sum_j sigma_z^j on basis state `x`.
pub(crate) fn magnetization(x: usize, n: usize) -> i64 {
    2 * (x.count_ones() as i64) - n as i64
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_size(n)?;
        if amps.len() != 1 << n {
            return Err(Error::InvalidDensity(format!(
                "{} amplitudes for {n} qubits",
                amps.len()
            )));
        }
        Ok(Self { n, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// The twisted state `prod_{j<k} exp(-i (alpha/2) z_j z_k) |+>^N`.
///
/// `sum_{j<k} z_j z_k = (M^2 - N)/2` with `M` the magnetization, so each
/// basis amplitude only picks up a phase.
pub fn build_oat_state(n: usize, alpha: f64) -> Result<StateVector> {
    check_size(n)?;
    if !alpha.is_finite() {
        return Err(Error::NonFiniteParameter("alpha"));
    }
    let dim = 1usize << n;
    let amp = (dim as f64).sqrt().recip();
    let amps = (0..dim)
        .map(|x| {
            let m = magnetization(x, n);
            let pairs = (m * m - n as i64) / 2;
            Complex64::from_polar(amp, -0.5 * alpha * pairs as f64)
        })
        .collect();
    Ok(StateVector { n, amps })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Wraps a matrix after checking the density-matrix invariants.
    pub fn new(n: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        check_size(n)?;
        let dim = 1usize << n;
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(Error::InvalidDensity(format!(
                "{}x{} matrix for {n} qubits",
                rho.nrows(),
                rho.ncols()
            )));
        }
        let dm = Self { n, rho };
        dm.validate()?;
        Ok(dm)
    }

    pub fn from_state(psi: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(&psi.amps);
        Self {
            n: psi.n,
            rho: &v * v.adjoint(),
        }
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_size(n)?;
        let dim = 1usize << n;
        Ok(Self {
            n,
            rho: DMatrix::identity(dim, dim) / Complex64::from(dim as f64),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.rho + self.rho.adjoint()) * Complex64::from(0.5);
        herm.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (error {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).norm() > 1e-12 {
            return Err(Error::InvalidDensity(format!("trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::InvalidDensity(format!("eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Relabels qubits `j` and `k`.
    pub fn swap_qubits(&self, j: usize, k: usize) -> Self {
        let swap = |x: usize| {
            let (bj, bk) = ((x >> j) & 1, (x >> k) & 1);
            if bj == bk {
                x
            } else {
                x ^ (1 << j) ^ (1 << k)
            }
        };
        let dim = self.dim();
        let rho = DMatrix::from_fn(dim, dim, |r, c| self.rho[(swap(r), swap(c))]);
        Self { n: self.n, rho }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (&self.rho - &other.rho)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Either representation, so callers can keep states pure as long as
/// possible.
pub trait FieldRotation: Sized {
    /// Applies `exp(-i (delta t / 2) sigma_z)` to every qubit.
    fn rotate(&self, delta: f64, t: f64) -> Self;
}

impl FieldRotation for StateVector {
    fn rotate(&self, delta: f64, t: f64) -> Self {
        let half = 0.5 * delta * t;
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(x, a)| a * Complex64::from_polar(1.0, -half * magnetization(x, self.n) as f64))
            .collect();
        Self { n: self.n, amps }
    }
}

impl FieldRotation for DensityMatrix {
    fn rotate(&self, delta: f64, t: f64) -> Self {
        let half = 0.5 * delta * t;
        let n = self.n;
        let mut rho = self.rho.clone();
        for c in 0..rho.ncols() {
            let mc = magnetization(c, n);
            for r in 0..rho.nrows() {
                let dm = magnetization(r, n) - mc;
                if dm != 0 {
                    rho[(r, c)] *= Complex64::from_polar(1.0, -half * dm as f64);
                }
            }
        }
        Self { n, rho }
    }
}

pub fn apply_field_rotation<S: FieldRotation>(state: &S, delta: f64, t: f64) -> S {
    state.rotate(delta, t)
}
