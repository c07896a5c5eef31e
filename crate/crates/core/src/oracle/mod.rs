//! Exact density-matrix ground truth for small ensembles.

mod channel;
mod generator;
mod moments;
mod state;

pub use channel::{apply_channel, completeness, kraus_operators, pauli, Op2};
pub use generator::{
    fit_channel_correspondence, integrate_single_qubit_generator, integrate_time_local, ChannelFit,
};
pub use moments::{
    collective_moments, xi2_from_moments, xi2_prime_from_moments, CollectiveMoments,
    PauliExpectation,
};
pub use state::{
    apply_field_rotation, build_oat_state, DensityMatrix, FieldRotation, StateVector, MAX_QUBITS,
};

use crate::error::{Error, Result};
use crate::model::{ChannelKind, Definition};
use crate::squeezing::SqueezingValue;

/// Both squeezing parameters of the twisted state after the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSqueezing {
    pub xi2: SqueezingValue,
    pub xi2_prime: SqueezingValue,
    pub moments: CollectiveMoments,
}

pub fn decohered_squeezing(
    n: usize,
    alpha: f64,
    channel: ChannelKind,
    kappa: f64,
) -> Result<OracleSqueezing> {
    let psi = build_oat_state(n, alpha)?;
    let moments = if kappa == 1.0 {
        collective_moments(&psi)
    } else {
        let rho = apply_channel(&DensityMatrix::from_state(&psi), channel, kappa)?;
        collective_moments(&rho)
    };
    let xi2_prime = match xi2_prime_from_moments(&moments) {
        Ok(v) => v,
        Err(Error::DegenerateDenominator(_)) => SqueezingValue::divergent(Definition::Toth),
        Err(e) => return Err(e),
    };
    Ok(OracleSqueezing {
        xi2: xi2_from_moments(&moments),
        xi2_prime,
        moments,
    })
}
