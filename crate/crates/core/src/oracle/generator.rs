//! Single-qubit master-equation integration, and the correspondence
//! between generator rates and the channel parameter `kappa`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::Serialize;

use super::channel::{apply_single_qubit, kraus_operators, Op2};
use crate::error::{Error, Result};
use crate::model::{ChannelKind, LindbladParams};

const STEP_SCALE: f64 = 1e-3;
const TRACE_TOL: f64 = 1e-8;

struct Ladder {
    sz: Op2,
    plus: Op2,
    minus: Op2,
}

impl Ladder {
    fn new() -> Self {
        let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        Self {
            sz: Matrix2::new(l, o, o, -l),
            plus: Matrix2::new(o, l, o, o),
            minus: Matrix2::new(o, o, l, o),
        }
    }

    /// `i[H_r, chi] + L chi` with `H_r = (delta/2) sigma_z`.
    fn rhs(&self, p: &LindbladParams, delta: f64, chi: &Op2) -> Op2 {
        let i = Complex64::i();
        let h = self.sz * Complex64::from(0.5 * delta);
        let coherent = (h * chi - chi * h) * i;

        let pm = self.plus * self.minus;
        let mp = self.minus * self.plus;
        let two = Complex64::from(2.0);
        let decay = (pm * chi + chi * pm - self.minus * chi * self.plus * two)
            * Complex64::from(-0.5 * p.b * (1.0 - p.s));
        let pump = (mp * chi + chi * mp - self.plus * chi * self.minus * two)
            * Complex64::from(-0.5 * p.b * p.s);
        let dephase =
            (chi * two - self.sz * chi * self.sz * two) * Complex64::from(-(2.0 * p.c - p.b) / 8.0);
        coherent + decay + pump + dephase
    }
}

fn rk4<F>(rates: F, rate_bound: f64, delta: f64, chi0: &Op2, t: f64) -> Result<Op2>
where
    F: Fn(f64) -> LindbladParams,
{
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if !t.is_finite() {
        return Err(Error::NonFiniteParameter("t"));
    }
    let fastest = rate_bound.abs().max(delta.abs());
    let steps = if fastest > 0.0 {
        (t * fastest / STEP_SCALE).ceil().max(1.0) as usize
    } else {
        1
    };
    let h = t / steps as f64;
    let lad = Ladder::new();
    let f = |s: f64, chi: &Op2| lad.rhs(&rates(s), delta, chi);
    let hc = Complex64::from(h);
    let mut chi = *chi0;
    for k in 0..steps {
        let s = k as f64 * h;
        let k1 = f(s, &chi);
        let k2 = f(s + 0.5 * h, &(chi + k1 * (hc * 0.5)));
        let k3 = f(s + 0.5 * h, &(chi + k2 * (hc * 0.5)));
        let k4 = f(s + h, &(chi + k3 * hc));
        let two = Complex64::from(2.0);
        chi += (k1 + k2 * two + k3 * two + k4) * (hc / 6.0);
    }
    let drift = (chi.trace() - chi0.trace()).norm();
    if drift > TRACE_TOL {
        return Err(Error::StepInstability(drift));
    }
    Ok(chi)
}

/// Evolves `chi0` for a time `t` under constant rates.
pub fn integrate_single_qubit_generator(
    params: &LindbladParams,
    delta: f64,
    chi0: &Op2,
    t: f64,
) -> Result<Op2> {
    rk4(|_| *params, params.max_rate(), delta, chi0, t)
}

/// Evolves `chi0` under time-dependent rates, which may be negative.
/// `rate_bound` must bound `max(|b(t)|, |c(t)|)` over `[0, t]`; it sets
/// the step size.
pub fn integrate_time_local<F>(
    rates: F,
    rate_bound: f64,
    delta: f64,
    chi0: &Op2,
    t: f64,
) -> Result<Op2>
where
    F: Fn(f64) -> LindbladParams,
{
    rk4(rates, rate_bound, delta, chi0, t)
}

/// Channel parameter implied by a generator evolution, read off from the
/// coherence (dephasing), the Bloch-vector length (depolarizing) or the
/// excited population (damping).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelFit {
    pub kind: ChannelKind,
    pub gamma: f64,
    /// beta in `kappa(t) = exp(-beta gamma t)`
    pub exponent: f64,
    /// Largest entry-wise gap between the Kraus map at the fitted kappa
    /// and the generator, over the probe states and times.
    pub max_deviation: f64,
}

fn probe_states() -> Vec<Op2> {
    let z = |re: f64, im: f64| Complex64::new(re, im);
    let bloch = |x: f64, y: f64, w: f64| {
        Matrix2::new(
            z(0.5 * (1.0 + w), 0.0),
            z(0.5 * x, -0.5 * y),
            z(0.5 * x, 0.5 * y),
            z(0.5 * (1.0 - w), 0.0),
        )
    };
    vec![
        bloch(1.0, 0.0, 0.0),
        bloch(0.0, 1.0, 0.0),
        bloch(0.0, 0.0, 1.0),
        bloch(0.0, 0.0, -1.0),
        bloch(-0.6, 0.0, 0.8),
        bloch(0.3, -0.4, 0.2),
    ]
}

fn kappa_from_evolution(kind: ChannelKind, gamma: f64, t: f64) -> Result<f64> {
    let params = LindbladParams::for_channel(kind, gamma);
    let probes = probe_states();
    let k2 = match kind {
        ChannelKind::Dephasing => {
            let chi = integrate_single_qubit_generator(&params, 0.0, &probes[0], t)?;
            chi[(0, 1)].norm() / probes[0][(0, 1)].norm()
        }
        ChannelKind::Depolarizing => {
            let chi = integrate_single_qubit_generator(&params, 0.0, &probes[4], t)?;
            (4.0 * chi[(0, 1)].norm_sqr() + (chi[(0, 0)] - chi[(1, 1)]).re.powi(2)).sqrt()
        }
        ChannelKind::Damping => {
            let chi = integrate_single_qubit_generator(&params, 0.0, &probes[3], t)?;
            chi[(1, 1)].re
        }
    };
    Ok(k2.sqrt())
}

/// Fits `kappa(t) = exp(-beta gamma t)` to the generator of `kind` at
/// rate `gamma` and checks the Kraus map against the generator.
pub fn fit_channel_correspondence(
    kind: ChannelKind,
    gamma: f64,
    times: &[f64],
) -> Result<ChannelFit> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(Error::NonPositiveParameter {
            name: "gamma",
            value: gamma,
        });
    }
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for &t in times {
        let kappa = kappa_from_evolution(kind, gamma, t)?;
        let x = gamma * t;
        sxy += -kappa.ln() * x;
        sxx += x * x;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidGrid(
            "correspondence fit needs a positive time".into(),
        ));
    }
    let exponent = sxy / sxx;

    let params = LindbladParams::for_channel(kind, gamma);
    let mut max_deviation: f64 = 0.0;
    for &t in times {
        let ops = kraus_operators(kind, (-exponent * gamma * t).exp())?;
        for chi0 in probe_states() {
            let gen = integrate_single_qubit_generator(&params, 0.0, &chi0, t)?;
            let map = apply_single_qubit(&ops, &chi0);
            let dev = (gen - map).iter().map(|z| z.norm()).fold(0.0, f64::max);
            max_deviation = max_deviation.max(dev);
        }
    }
    Ok(ChannelFit {
        kind,
        gamma,
        exponent,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::state::{apply_field_rotation, build_oat_state, DensityMatrix};

    fn plus() -> Op2 {
        Op2::from_element(Complex64::from(0.5))
    }

    fn up() -> Op2 {
        let (o, l) = (Complex64::from(0.0), Complex64::from(1.0));
        Op2::new(o, o, o, l)
    }

    #[test]
    fn zero_time_is_identity() {
        let p = LindbladParams::depolarizing(0.3);
        let chi = integrate_single_qubit_generator(&p, 1.0, &plus(), 0.0).unwrap();
        assert_eq!(chi, plus());
    }

    #[test]
    fn dephasing_coherence_decays_at_gamma() {
        let gamma = 0.4;
        for s in [0.0, 0.5, 1.0] {
            let p = LindbladParams::dephasing(gamma, s);
            for t in [0.5, 2.0, 7.0] {
                let chi = integrate_single_qubit_generator(&p, 0.0, &plus(), t).unwrap();
                assert!((chi[(0, 1)].re - 0.5 * (-gamma * t).exp()).abs() < 1e-12);
                assert!((chi[(0, 0)].re - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn damping_population_decays_at_b() {
        let gamma = 0.25;
        let p = LindbladParams::damping(gamma);
        for t in [1.0, 4.0, 10.0] {
            let chi = integrate_single_qubit_generator(&p, 0.0, &up(), t).unwrap();
            assert!((chi[(1, 1)].re - (-gamma * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_part_matches_field_rotation() {
        let (delta, t) = (1.7, 0.9);
        let chi = integrate_single_qubit_generator(
            &LindbladParams::dephasing(0.0, 0.5),
            delta,
            &plus(),
            t,
        )
        .unwrap();
        let rho = DensityMatrix::from_state(&build_oat_state(1, 0.0).unwrap());
        let rot = apply_field_rotation(&rho, delta, t);
        for r in 0..2 {
            for c in 0..2 {
                assert!((chi[(r, c)] - rot.matrix()[(r, c)]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn time_local_rates_follow_integrated_rate() {
        // c(t) = g0 cos(w t) goes negative; coherence is exp(-int c).
        let (g0, w) = (0.3, 0.8);
        let rates = |s: f64| LindbladParams::dephasing(g0 * (w * s).cos(), 0.5);
        for t in [1.0, 3.0, 5.0] {
            let chi = integrate_time_local(rates, g0, 0.0, &plus(), t).unwrap();
            let want = 0.5 * (-(g0 / w) * (w * t).sin()).exp();
            assert!((chi[(0, 1)].re - want).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn negative_time_rejected() {
        let p = LindbladParams::damping(1.0);
        assert!(integrate_single_qubit_generator(&p, 0.0, &up(), -1.0).is_err());
    }

    #[test]
    fn channels_correspond_with_half_exponent() {
        let times = [0.5, 1.0, 2.0, 4.0];
        for kind in ChannelKind::ALL {
            let fit = fit_channel_correspondence(kind, 0.3, &times).unwrap();
            assert!(
                (fit.exponent - 0.5).abs() < 1e-9,
                "{kind}: {}",
                fit.exponent
            );
            assert!(fit.max_deviation < 1e-8, "{kind}: {}", fit.max_deviation);
        }
    }
}
