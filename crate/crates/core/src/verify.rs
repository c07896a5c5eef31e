//! Oracle-versus-closed-form comparison matrix.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelKind, Definition};
use crate::oracle::{decohered_squeezing, MAX_QUBITS};
use crate::squeezing::{ClosedForm, OatState};

pub const ENSEMBLE_SIZES: [usize; 7] = [2, 3, 4, 6, 8, 10, 12];
pub const ALPHAS: [f64; 3] = [0.05, 0.2, 0.5];
pub const KAPPAS: [f64; 4] = [1.0, 0.7, 0.3, -0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseStatus {
    /// The printed closed form agrees with the oracle.
    Printed,
    /// Only the corrected closed form agrees.
    Corrected,
    Mismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifyCase {
    pub n: usize,
    pub alpha: f64,
    pub kappa: f64,
    pub channel: ChannelKind,
    pub definition: Definition,
    #[serde(serialize_with = "crate::io::finite_or_null::serialize")]
    pub oracle: f64,
    #[serde(serialize_with = "crate::io::finite_or_null::serialize")]
    pub corrected: f64,
    /// `None` where the printed expression leaves its domain.
    pub printed: Option<f64>,
    #[serde(serialize_with = "crate::io::finite_or_null::serialize")]
    pub corrected_delta: f64,
    pub printed_delta: Option<f64>,
    pub status: CaseStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairReduction {
    pub alpha: f64,
    pub expected: f64,
    pub closed_form: f64,
    pub oracle: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub max_n: usize,
    pub tolerance: f64,
    pub cases: Vec<VerifyCase>,
    pub pair_reduction: Vec<PairReduction>,
    pub printed_matches: usize,
    pub corrected_matches: usize,
    pub mismatches: usize,
    pub passed: bool,
}

fn delta(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() && a.signum() == b.signum() {
        0.0
    } else {
        (a - b).abs()
    }
}

fn run_case(
    n: usize,
    alpha: f64,
    kappa: f64,
    channel: ChannelKind,
    tol: f64,
) -> Result<[VerifyCase; 2]> {
    let oracle = decohered_squeezing(n, alpha, channel, kappa)?;
    let st = OatState::new(n, alpha)?;
    let mut out = Vec::with_capacity(2);
    for (definition, oracle_value) in [
        (Definition::KitagawaUeda, oracle.xi2.xi2),
        (Definition::Toth, oracle.xi2_prime.xi2),
    ] {
        let corrected = st
            .decohered(channel, definition, kappa, ClosedForm::Corrected)?
            .xi2;
        let printed = match st.decohered(channel, definition, kappa, ClosedForm::Printed) {
            Ok(v) => Some(v.xi2),
            Err(Error::NegativeDenominator(_)) => None,
            Err(e) => return Err(e),
        };
        let corrected_delta = delta(corrected, oracle_value);
        let printed_delta = printed.map(|p| delta(p, oracle_value));
        let status = if printed_delta.is_some_and(|d| d <= tol) {
            CaseStatus::Printed
        } else if corrected_delta <= tol {
            CaseStatus::Corrected
        } else {
            CaseStatus::Mismatch
        };
        out.push(VerifyCase {
            n,
            alpha,
            kappa,
            channel,
            definition,
            oracle: oracle_value,
            corrected,
            printed,
            corrected_delta,
            printed_delta,
            status,
        });
    }
    Ok([out[0], out[1]])
}

/// Runs every grid case with `N <= max_n` plus the two-qubit reduction
/// `xi^2 = 1/(1 + sin alpha)`.
pub fn run_verification(max_n: usize, tolerance: f64) -> Result<VerifyReport> {
    if max_n < 2 {
        return Err(Error::NTooSmall { n: max_n, min: 2 });
    }
    if max_n > MAX_QUBITS {
        return Err(Error::NTooLarge {
            n: max_n,
            cap: MAX_QUBITS,
        });
    }
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(Error::NonPositiveParameter {
            name: "tolerance",
            value: tolerance,
        });
    }
    let mut grid = Vec::new();
    for n in ENSEMBLE_SIZES.into_iter().filter(|&n| n <= max_n) {
        for alpha in ALPHAS {
            for kappa in KAPPAS {
                for channel in ChannelKind::ALL {
                    grid.push((n, alpha, kappa, channel));
                }
            }
        }
    }
    // Large density matrices are memory-bound; only small ones run concurrently.
    let (small, large): (Vec<_>, Vec<_>) = grid.into_iter().partition(|c| c.0 <= 8);
    let mut cases: Vec<VerifyCase> = small
        .into_par_iter()
        .map(|(n, a, k, c)| run_case(n, a, k, c, tolerance))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    for (n, a, k, c) in large {
        cases.extend(run_case(n, a, k, c, tolerance)?);
    }

    let mut pair_reduction = Vec::new();
    for alpha in ALPHAS {
        let expected = 1.0 / (1.0 + alpha.sin());
        let closed_form = OatState::new(2, alpha)?.xi2().xi2;
        let oracle = decohered_squeezing(2, alpha, ChannelKind::Dephasing, 1.0)?
            .xi2
            .xi2;
        pair_reduction.push(PairReduction {
            alpha,
            expected,
            closed_form,
            oracle,
            passed: delta(closed_form, expected) <= tolerance
                && delta(oracle, expected) <= tolerance,
        });
    }

    let count = |s: CaseStatus| cases.iter().filter(|c| c.status == s).count();
    let printed_matches = count(CaseStatus::Printed);
    let corrected_matches = count(CaseStatus::Corrected);
    let mismatches = count(CaseStatus::Mismatch);
    let passed = mismatches == 0 && pair_reduction.iter().all(|p| p.passed);
    Ok(VerifyReport {
        schema: crate::io::SCHEMA,
        max_n,
        tolerance,
        cases,
        pair_reduction,
        printed_matches,
        corrected_matches,
        mismatches,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_only_run() {
        let r = run_verification(2, 1e-8).unwrap();
        assert!(r.passed);
        assert_eq!(r.cases.len(), 3 * 4 * 3 * 2);
        assert_eq!(r.pair_reduction.len(), 3);
    }

    #[test]
    fn cap_is_enforced() {
        assert_eq!(
            run_verification(13, 1e-8).unwrap_err(),
            Error::NTooLarge { n: 13, cap: 12 }
        );
        assert!(run_verification(1, 1e-8).is_err());
    }

    #[test]
    fn pure_state_cases_match_printed_kitagawa_ueda() {
        let r = run_verification(4, 1e-8).unwrap();
        for c in r
            .cases
            .iter()
            .filter(|c| c.kappa == 1.0 && c.definition == Definition::KitagawaUeda)
        {
            assert_eq!(c.status, CaseStatus::Printed, "{c:?}");
        }
        assert_eq!(r.mismatches, 0);
    }
}
