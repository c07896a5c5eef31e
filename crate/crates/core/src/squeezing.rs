//! Closed-form squeezing of the one-axis-twisted state, with and without
//! per-qubit decoherence.
//!
//! Two families of decohered expressions are provided:
//!
//! * [`ClosedForm::Printed`]: the expressions as originally published.
//!   They reproduce the published death times and figure shapes but do
//!   not agree with the density-matrix oracle away from the pure state.
//! * [`ClosedForm::Corrected`]: expressions derived by propagating the
//!   one- and two-body Bloch moments of the twisted state through the
//!   per-qubit channel. These agree with the oracle to rounding.
//!
//! Both use the same `kappa` as [`crate::oracle::apply_channel`]: the
//! dephasing and depolarizing maps shrink transverse Bloch components by
//! `kappa^2`, damping shrinks them by `kappa` and populations by `kappa^2`.

use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{sym2_min_eigenvalue, Vec3};
use crate::model::{ChannelKind, Definition, EnsembleConfig, KappaModel, TimeGrid};

/// Which family of decohered closed forms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosedForm {
    Corrected,
    Printed,
}

impl ClosedForm {
    pub fn name(&self) -> &'static str {
        match self {
            ClosedForm::Corrected => "corrected",
            ClosedForm::Printed => "printed",
        }
    }
}

impl std::str::FromStr for ClosedForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "corrected" => Ok(ClosedForm::Corrected),
            "printed" => Ok(ClosedForm::Printed),
            other => Err(format!(
                "unknown formula `{other}` (expected corrected or printed)"
            )),
        }
    }
}

impl std::fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A squeezing parameter; `xi2` is `+inf` where the expression diverges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezingValue {
    #[serde(serialize_with = "crate::io::finite_or_null::serialize")]
    pub xi2: f64,
    pub definition: Definition,
}

impl SqueezingValue {
    pub fn new(definition: Definition, xi2: f64) -> Self {
        Self { xi2, definition }
    }

    pub fn divergent(definition: Definition) -> Self {
        Self {
            xi2: f64::INFINITY,
            definition,
        }
    }

    pub fn is_divergent(&self) -> bool {
        self.xi2.is_infinite()
    }

    pub fn is_squeezed(&self) -> bool {
        self.xi2 < 1.0
    }
}

/// `x^n` keeping the sign of odd powers of negative bases; large
/// exponents go through logarithms so they underflow gracefully.
fn signed_pow(x: f64, n: u64) -> f64 {
    if n <= 64 {
        return x.powi(n as i32);
    }
    if x == 0.0 {
        return 0.0;
    }
    let sign = if x < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 };
    sign * (n as f64 * x.abs().ln()).exp()
}

/// `1 - cos(x)^n`, accurate when `cos(x)^n` is close to 1.
fn one_minus_cos_pow(x: f64, n: u64) -> f64 {
    let c = x.cos();
    if n <= 64 || c <= 0.0 {
        return 1.0 - signed_pow(c, n);
    }
    // ln cos x = ln(1 - 2 sin^2(x/2))
    let s = (0.5 * x).sin();
    let ln_cos = (-2.0 * s * s).ln_1p();
    -(n as f64 * ln_cos).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OatCoefficients {
    pub a_coef: f64,
    pub b_coef: f64,
    pub hypot: f64,
}

pub fn oat_coefficients(n: usize, alpha: f64) -> Result<OatCoefficients> {
    if n < 2 {
        return Err(Error::NTooSmall { n, min: 2 });
    }
    let k = (n - 2) as u64;
    let a = one_minus_cos_pow(2.0 * alpha, k);
    let b = 4.0 * alpha.sin() * signed_pow(alpha.cos(), k);
    Ok(OatCoefficients {
        a_coef: a,
        b_coef: b,
        hypot: a.hypot(b),
    })
}

/// Every alpha-dependent quantity the closed forms need, computed once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OatState {
    pub n: usize,
    pub alpha: f64,
    pub coef: OatCoefficients,
    /// cos^{N-1}(alpha): length of the mean Bloch vector per qubit.
    pub mean: f64,
    /// cos^{2N-2}(alpha)
    pub mean_sq: f64,
    /// cos^{N-2}(2 alpha)
    pub cos2_pow: f64,
}

impl OatState {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::NonFiniteParameter("alpha"));
        }
        let coef = oat_coefficients(n, alpha)?;
        let c = alpha.cos();
        let n64 = n as u64;
        Ok(Self {
            n,
            alpha,
            coef,
            mean: signed_pow(c, n64 - 1),
            mean_sq: signed_pow(c, 2 * n64 - 2),
            cos2_pow: 1.0 - coef.a_coef,
        })
    }

    fn nm1(&self) -> f64 {
        (self.n - 1) as f64
    }

    /// Two-body <sigma_x sigma_x> excess over the squared mean:
    /// (1 + cos^{N-2} 2 alpha)/2 - cos^{2N-2} alpha.
    fn x_excess(&self) -> f64 {
        0.5 * (1.0 + self.cos2_pow) - self.mean_sq
    }

    /// a = 1 - (N-1)(sqrt(A^2+B^2) - A)/4
    pub fn a_term(&self) -> f64 {
        1.0 - self.nm1() * (self.coef.hypot - self.coef.a_coef) / 4.0
    }

    /// b = 1 + (N-1)[(1 + cos^{N-2} 2 alpha)/2 - cos^{2N-2} alpha]
    pub fn b_term(&self) -> f64 {
        1.0 + self.nm1() * self.x_excess()
    }

    pub fn xi2(&self) -> SqueezingValue {
        ratio(Definition::KitagawaUeda, self.a_term(), self.mean_sq)
    }

    pub fn xi2_prime(&self, form: ClosedForm) -> SqueezingValue {
        let num = self.a_term().min(self.b_term());
        match form {
            // <J^2> - N/2 = N^2/4 for any symmetric pure state.
            ClosedForm::Corrected => SqueezingValue::new(Definition::Toth, num),
            ClosedForm::Printed => {
                let n = self.n as f64;
                // (1-1/N)(1+cos^{N-2}2a)/2 + 1/N, written to be exactly 1 at alpha = 0
                let den = (self.nm1() * 0.5 * (1.0 + self.cos2_pow) + 1.0) / n;
                ratio(Definition::Toth, num, den)
            }
        }
    }

    /// The shared numerator of the printed decohered forms,
    /// `1 + k^2 (N-1)(A - A^2/R)/4 - k (N-1) B^2/(4R)`, with the
    /// alpha = 0 limit (A = B = 0) taken as 1.
    pub fn zeta_printed(&self, kappa: f64) -> f64 {
        let OatCoefficients {
            a_coef: a,
            b_coef: b,
            hypot: r,
        } = self.coef;
        if r == 0.0 {
            return 1.0;
        }
        let nm1 = self.nm1();
        1.0 + 0.25 * kappa * kappa * nm1 * (a - a * a / r) - 0.25 * kappa * nm1 * b * b / r
    }

    /// Evaluates a decohered squeezing parameter for a channel with
    /// parameter `kappa`.
    pub fn decohered(
        &self,
        channel: ChannelKind,
        definition: Definition,
        kappa: f64,
        form: ClosedForm,
    ) -> Result<SqueezingValue> {
        check_kappa(kappa)?;
        match form {
            ClosedForm::Printed => self.printed(channel, definition, kappa),
            ClosedForm::Corrected => Ok(self.corrected(channel, definition, kappa)),
        }
    }

    fn printed(
        &self,
        channel: ChannelKind,
        definition: Definition,
        kappa: f64,
    ) -> Result<SqueezingValue> {
        let zeta = self.zeta_printed(kappa);
        let n = self.n as f64;
        let nm1 = self.nm1();
        let k2 = kappa * kappa;
        let pxx = 0.5 * (1.0 + self.cos2_pow);
        let value = match (definition, channel) {
            (Definition::KitagawaUeda, ChannelKind::Dephasing) => {
                ratio(definition, zeta, self.mean_sq)
            }
            (Definition::KitagawaUeda, ChannelKind::Depolarizing) => {
                ratio(definition, zeta, k2 * self.mean_sq)
            }
            (Definition::KitagawaUeda, ChannelKind::Damping) => {
                let base = kappa * self.mean + (1.0 - kappa);
                ratio(definition, zeta, base * base)
            }
            (Definition::Toth, ChannelKind::Dephasing) => {
                let den = (nm1 * (k2 + (1.0 - k2) * pxx) + 1.0) / n;
                ratio(definition, zeta, den)
            }
            (Definition::Toth, ChannelKind::Depolarizing) => {
                ratio(definition, zeta, (nm1 * k2 + 1.0) / n)
            }
            (Definition::Toth, ChannelKind::Damping) => {
                let den = 1.0 + (nm1 / n) * kappa * (1.0 - kappa) * (1.0 - self.mean + pxx);
                if den < 0.0 {
                    return Err(Error::NegativeDenominator(den));
                }
                ratio(definition, zeta, den)
            }
        };
        Ok(value)
    }

    fn corrected(
        &self,
        channel: ChannelKind,
        definition: Definition,
        kappa: f64,
    ) -> SqueezingValue {
        let n = self.n as f64;
        let nm1 = self.nm1();
        let OatCoefficients {
            a_coef: a,
            b_coef: b,
            hypot: r,
        } = self.coef;
        let x = self.x_excess();
        let k2 = kappa * kappa;

        match channel {
            ChannelKind::Dephasing | ChannelKind::Depolarizing => {
                // Transverse Bloch components shrink by q = kappa^2.
                let q = k2;
                let zeta = match channel {
                    ChannelKind::Dephasing => {
                        // sigma_z correlations survive dephasing untouched
                        1.0 - 0.25 * nm1 * q * ((q * a).hypot(b) - q * a)
                    }
                    _ => 1.0 - 0.25 * nm1 * q * q * (r - a),
                };
                match definition {
                    Definition::KitagawaUeda => ratio(definition, zeta, q * q * self.mean_sq),
                    Definition::Toth => {
                        let along_mean = 1.0 + nm1 * q * q * x;
                        ratio(definition, n * zeta.min(along_mean), 1.0 + nm1 * q * q)
                    }
                }
            }
            ChannelKind::Damping => {
                // Mean Bloch vector (kappa c, 0, -(1 - kappa^2)); the two-body
                // connected correlator D has D_xx = k^2 X, D_yy = k^2 A/2,
                // |D_yz| = |k|^3 B/4 and vanishing D_xz, D_zz.
                let u = 1.0 - k2;
                let mx = kappa * self.mean;
                let len_sq = mx * mx + u * u;
                match definition {
                    Definition::KitagawaUeda => {
                        if len_sq == 0.0 {
                            return SqueezingValue::divergent(definition);
                        }
                        let d_yy = 0.5 * k2 * a;
                        let d_ee = u * u * k2 * x / len_sq;
                        let d_ye = k2 * k2 * self.mean * 0.25 * b / len_sq.sqrt();
                        let lam = 1.0 + nm1 * sym2_min_eigenvalue(d_yy, d_ye, d_ee);
                        ratio(definition, lam, len_sq)
                    }
                    Definition::Toth => {
                        let along_x = 1.0 + nm1 * k2 * x;
                        let transverse = 1.0 - 0.25 * nm1 * k2 * (a.hypot(kappa * b) - a);
                        let den = 1.0 + nm1 * (k2 + u * u);
                        ratio(definition, n * along_x.min(transverse), den)
                    }
                }
            }
        }
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !kappa.is_finite() || kappa.abs() > 1.0 + 1e-12 {
        return Err(Error::InvalidKappa(kappa));
    }
    Ok(())
}

fn ratio(definition: Definition, num: f64, den: f64) -> SqueezingValue {
    if den == 0.0 {
        SqueezingValue::divergent(definition)
    } else {
        SqueezingValue::new(definition, num / den)
    }
}

pub fn xi2_oat(n: usize, alpha: f64) -> Result<SqueezingValue> {
    Ok(OatState::new(n, alpha)?.xi2())
}

pub fn xi2_prime_oat(n: usize, alpha: f64, form: ClosedForm) -> Result<SqueezingValue> {
    Ok(OatState::new(n, alpha)?.xi2_prime(form))
}

fn decohered(
    n: usize,
    alpha: f64,
    kappa: f64,
    channel: ChannelKind,
    definition: Definition,
    form: ClosedForm,
) -> Result<SqueezingValue> {
    OatState::new(n, alpha)?.decohered(channel, definition, kappa, form)
}

pub fn xi2_dephased(n: usize, alpha: f64, kappa: f64, form: ClosedForm) -> Result<SqueezingValue> {
    decohered(
        n,
        alpha,
        kappa,
        ChannelKind::Dephasing,
        Definition::KitagawaUeda,
        form,
    )
}

pub fn xi2_depolarized(
    n: usize,
    alpha: f64,
    kappa: f64,
    form: ClosedForm,
) -> Result<SqueezingValue> {
    decohered(
        n,
        alpha,
        kappa,
        ChannelKind::Depolarizing,
        Definition::KitagawaUeda,
        form,
    )
}

pub fn xi2_damped(n: usize, alpha: f64, kappa: f64, form: ClosedForm) -> Result<SqueezingValue> {
    decohered(
        n,
        alpha,
        kappa,
        ChannelKind::Damping,
        Definition::KitagawaUeda,
        form,
    )
}

pub fn xi2_prime_dephased(
    n: usize,
    alpha: f64,
    kappa: f64,
    form: ClosedForm,
) -> Result<SqueezingValue> {
    decohered(
        n,
        alpha,
        kappa,
        ChannelKind::Dephasing,
        Definition::Toth,
        form,
    )
}

pub fn xi2_prime_depolarized(
    n: usize,
    alpha: f64,
    kappa: f64,
    form: ClosedForm,
) -> Result<SqueezingValue> {
    decohered(
        n,
        alpha,
        kappa,
        ChannelKind::Depolarizing,
        Definition::Toth,
        form,
    )
}

pub fn xi2_prime_damped(
    n: usize,
    alpha: f64,
    kappa: f64,
    form: ClosedForm,
) -> Result<SqueezingValue> {
    decohered(
        n,
        alpha,
        kappa,
        ChannelKind::Damping,
        Definition::Toth,
        form,
    )
}

/// Mean spin direction and the family of unit vectors orthogonal to it,
/// for the twisted state rotated by the field for a time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinDirections {
    pub mean: Vec3,
    angle: f64,
}

impl SpinDirections {
    pub fn perp(&self, phi: f64) -> Vec3 {
        let (s, c) = self.angle.sin_cos();
        [-phi.cos() * s, phi.cos() * c, phi.sin()]
    }
}

pub fn spin_directions(n: usize, alpha: f64, delta: f64, t: f64) -> SpinDirections {
    let angle = delta * t - n as f64 * alpha;
    let (s, c) = angle.sin_cos();
    SpinDirections {
        mean: [c, s, 0.0],
        angle,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalAlpha {
    pub alpha_star: f64,
    pub xi2_min: f64,
    pub xi_min: f64,
}

const ALPHA_SCAN_POINTS: usize = 2048;
const ALPHA_TOL: f64 = 1e-10;

/// Minimizes the pure-state xi^2 over alpha in (0, pi/2): a uniform
/// 2048-point scan brackets the minimum, golden-section search refines it.
pub fn optimal_alpha(n: usize) -> Result<OptimalAlpha> {
    if n < 3 {
        return Err(Error::NTooSmall { n, min: 3 });
    }
    let objective = |alpha: f64| -> f64 {
        match OatState::new(n, alpha) {
            Ok(s) => {
                let v = s.xi2().xi2;
                if v.is_nan() {
                    f64::INFINITY
                } else {
                    v
                }
            }
            Err(_) => f64::INFINITY,
        }
    };

    let spacing = FRAC_PI_2 / (ALPHA_SCAN_POINTS + 1) as f64;
    let node = |i: usize| (i + 1) as f64 * spacing;
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for i in 0..ALPHA_SCAN_POINTS {
        let v = objective(node(i));
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    let lo = if best == 0 { 0.0 } else { node(best - 1) };
    let hi = node(best + 1);
    let (alpha_star, xi2_min) = golden_section(objective, lo, hi, ALPHA_TOL);
    let (alpha_star, xi2_min) = if xi2_min <= best_val {
        (alpha_star, xi2_min)
    } else {
        (node(best), best_val)
    };
    Ok(OptimalAlpha {
        alpha_star,
        xi2_min,
        xi_min: xi2_min.sqrt(),
    })
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 < f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub alpha_star: f64,
    pub xi_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingScan {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of ln(xi_min) against ln(N).
    pub slope: f64,
}

/// `points` log-spaced ensemble sizes from `n_min` to `n_max`, rounded
/// to integers; duplicates after rounding are dropped.
pub fn log_spaced_sizes(n_min: usize, n_max: usize, points: usize) -> Vec<usize> {
    if points < 2 {
        return vec![n_min];
    }
    let (lo, hi) = ((n_min as f64).ln(), (n_max as f64).ln());
    let mut sizes: Vec<usize> = (0..points)
        .map(|i| {
            (lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .exp()
                .round() as usize
        })
        .collect();
    sizes.dedup();
    sizes
}

pub fn scaling_scan(n_min: usize, n_max: usize, points: usize) -> Result<ScalingScan> {
    if n_min < 3 {
        return Err(Error::NTooSmall { n: n_min, min: 3 });
    }
    if n_max <= n_min {
        return Err(Error::InvalidGrid(format!(
            "n_max {n_max} must exceed n_min {n_min}"
        )));
    }
    if points < 2 {
        return Err(Error::InvalidGrid(format!(
            "need at least 2 points, got {points}"
        )));
    }
    let rows = log_spaced_sizes(n_min, n_max, points)
        .into_par_iter()
        .map(|n| {
            let opt = optimal_alpha(n)?;
            Ok(ScalingRow {
                n,
                alpha_star: opt.alpha_star,
                xi_min: opt.xi_min,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.xi_min.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(ScalingScan {
        rows,
        slope: sxy / sxx,
    })
}

/// Maps kappa to a squeezing value for a fixed ensemble, channel,
/// definition and closed-form family. Divergences and out-of-domain
/// denominators evaluate to `+inf`.
#[derive(Debug, Clone, Copy)]
pub struct DecoheredSqueezing {
    pub state: OatState,
    pub channel: ChannelKind,
    pub definition: Definition,
    pub form: ClosedForm,
}

impl DecoheredSqueezing {
    pub fn new(
        n: usize,
        alpha: f64,
        channel: ChannelKind,
        definition: Definition,
        form: ClosedForm,
    ) -> Result<Self> {
        Ok(Self {
            state: OatState::new(n, alpha)?,
            channel,
            definition,
            form,
        })
    }

    pub fn at(&self, kappa: f64) -> Result<SqueezingValue> {
        match self
            .state
            .decohered(self.channel, self.definition, kappa, self.form)
        {
            Err(Error::NegativeDenominator(_)) => Ok(SqueezingValue::divergent(self.definition)),
            other => other,
        }
    }

    /// `xi^2` as a plain number, for root finding and interval scans.
    pub fn xi2_at(&self, kappa: f64) -> f64 {
        self.at(kappa).map(|v| v.xi2).unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub kappa: f64,
    #[serde(serialize_with = "crate::io::finite_or_null::serialize")]
    pub xi2: f64,
}

#[derive(Debug, Clone)]
pub struct SqueezingCurve {
    pub ensemble: EnsembleConfig,
    pub channel: ChannelKind,
    pub definition: Definition,
    pub form: ClosedForm,
    pub model: KappaModel,
    pub grid: TimeGrid,
    pub points: Vec<CurvePoint>,
}

pub fn squeezing_curve(
    cfg: &EnsembleConfig,
    channel: ChannelKind,
    model: &KappaModel,
    grid: &TimeGrid,
    definition: Definition,
    form: ClosedForm,
) -> Result<SqueezingCurve> {
    let map = DecoheredSqueezing::new(cfg.n_particles, cfg.alpha, channel, definition, form)?;
    let points = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let t = grid.node(i);
            let kappa = model.evaluate(t)?;
            let value = map.at(kappa)?;
            Ok(CurvePoint {
                t,
                kappa,
                xi2: value.xi2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SqueezingCurve {
        ensemble: *cfg,
        channel,
        definition,
        form,
        model: model.clone(),
        grid: *grid,
        points,
    })
}
