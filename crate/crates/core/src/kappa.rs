//! The decoherence function kappa(t): Markovian exponential decay, the
//! closed-form solution for a resonant Lorentzian reservoir in every
//! coupling regime, and a numerical solver for
//!
//! ```text
//! d kappa / dt = - integral_0^t f(t - s) kappa(s) ds,    kappa(0) = 1
//! ```
//!
//! with an arbitrary memory kernel `f`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, render_csv, Header};
use crate::model::{KappaModel, Regime, ReservoirConfig, TimeGrid};

pub fn kappa_markovian(rate: f64, t: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::NonPositiveParameter {
            name: "rate",
            value: rate,
        });
    }
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok((-rate * t).exp())
}

pub fn kappa_lorentzian(res: &ReservoirConfig, t: f64) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    Ok(lorentzian_unchecked(res, t))
}

/// sin(x)/x, with the series below |x| = 1e-4.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

pub(crate) fn lorentzian_unchecked(res: &ReservoirConfig, t: f64) -> f64 {
    let gamma = res.gamma();
    let info = res.regime();
    let half_gt = 0.5 * gamma * t;
    let x = 0.5 * info.d * t;
    // (gamma/d) sin(dt/2) = (gamma t / 2) sinc(dt/2), finite as d -> 0
    match info.regime {
        Regime::Strong => (-half_gt).exp() * (x.cos() + half_gt * sinc(x)),
        Regime::Critical => (-half_gt).exp() * (1.0 + half_gt),
        Regime::Weak => {
            if x < 20.0 {
                (-half_gt).exp() * (x.cosh() + half_gt * sinhc(x))
            } else {
                // Split into exponentials so that cosh does not overflow.
                let ratio = gamma / info.d;
                0.5 * (1.0 + ratio) * (x - half_gt).exp()
                    + 0.5 * (1.0 - ratio) * (-x - half_gt).exp()
            }
        }
    }
}

/// Zeros of the strong-coupling closed form in (0, horizon]:
/// `t_k = (2/d)(k pi + pi - atan(d/gamma))`.
pub fn kappa_zeros(res: &ReservoirConfig, horizon: f64) -> Result<Vec<f64>> {
    let info = res.regime();
    if info.regime != Regime::Strong {
        return Err(Error::NotOscillatory);
    }
    let phase = PI - (info.d / res.gamma()).atan();
    let mut zeros = Vec::new();
    for k in 0.. {
        let t = 2.0 / info.d * (k as f64 * PI + phase);
        if t > horizon {
            break;
        }
        zeros.push(t);
    }
    Ok(zeros)
}

type KernelFn = dyn Fn(f64) -> std::result::Result<f64, String> + Send + Sync;

#[derive(Clone)]
pub enum KernelTag {
    Exponential(ReservoirConfig),
    Zero,
    Custom(String),
}

/// Two-point correlation function `f(u)` of the reservoir.
#[derive(Clone)]
pub struct MemoryKernel {
    tag: KernelTag,
    eval: Arc<KernelFn>,
}

impl fmt::Debug for MemoryKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MemoryKernel")
            .field("tag", &self.describe())
            .finish()
    }
}

impl MemoryKernel {
    /// `f(u) = eta0 gamma exp(-gamma u) / 2`
    pub fn exponential(res: ReservoirConfig) -> Self {
        let (gamma, eta0) = (res.gamma(), res.eta0());
        Self {
            tag: KernelTag::Exponential(res),
            eval: Arc::new(move |u| Ok(0.5 * eta0 * gamma * (-gamma * u).exp())),
        }
    }

    pub fn zero() -> Self {
        Self {
            tag: KernelTag::Zero,
            eval: Arc::new(|_| Ok(0.0)),
        }
    }

    pub fn custom<F>(name: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64) -> std::result::Result<f64, String> + Send + Sync + 'static,
    {
        Self {
            tag: KernelTag::Custom(name.into()),
            eval: Arc::new(f),
        }
    }

    pub fn tag(&self) -> &KernelTag {
        &self.tag
    }

    pub fn eval(&self, u: f64) -> Result<f64> {
        match (self.eval)(u) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(Error::KernelEvaluation {
                u,
                reason: format!("non-finite value {v}"),
            }),
            Err(reason) => Err(Error::KernelEvaluation { u, reason }),
        }
    }

    pub fn describe(&self) -> String {
        match &self.tag {
            KernelTag::Exponential(res) => format!(
                "exponential(gamma={}, eta0={})",
                fmt_f64(res.gamma()),
                fmt_f64(res.eta0())
            ),
            KernelTag::Zero => "zero".to_string(),
            KernelTag::Custom(name) => format!("custom({name})"),
        }
    }
}

/// kappa sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaSeries {
    pub grid: TimeGrid,
    pub values: Vec<f64>,
}

impl KappaSeries {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.nodes()
    }

    /// Two-column CSV `t,kappa` preceded by the given metadata.
    pub fn to_csv(&self, header: &Header) -> String {
        let rows: Vec<Vec<f64>> = self
            .times()
            .zip(&self.values)
            .map(|(t, &k)| vec![t, k])
            .collect();
        render_csv(header, &["t", "kappa"], &rows)
    }
}

/// Product-trapezoidal quadrature of the history integral with a
/// second-order predictor-corrector time step. The grid must start at 0.
pub fn solve_volterra(kernel: &MemoryKernel, grid: &TimeGrid) -> Result<KappaSeries> {
    if grid.t_start() != 0.0 {
        return Err(Error::InvalidGrid(format!(
            "volterra grid must start at t = 0, got {}",
            grid.t_start()
        )));
    }
    let h = grid.step();
    let m = grid.len();

    let f0 = kernel.eval(0.0)?;
    let guard = h * f0.abs().sqrt();
    if guard >= 0.1 {
        return Err(Error::StepTooLarge { step: h, guard });
    }
    // Kernel lags are multiples of h, so tabulate once.
    let lags = (0..m)
        .map(|k| kernel.eval(k as f64 * h))
        .collect::<Result<Vec<f64>>>()?;

    let mut kappa = Vec::with_capacity(m);
    kappa.push(1.0);
    // history[n] = integral_0^{t_n} f(t_n - s) kappa(s) ds
    let mut history = Vec::with_capacity(m);
    history.push(0.0);

    for n in 0..m.saturating_sub(1) {
        let next = n + 1;
        // Trapezoid weights over nodes 0..=next, minus the unknown endpoint term.
        let mut known = 0.5 * lags[next] * kappa[0];
        for j in 1..next {
            known += lags[next - j] * kappa[j];
        }
        known *= h;
        let endpoint = 0.5 * h * lags[0];

        let slope_n = -history[n];
        // Adams-Bashforth predictor, then two trapezoidal corrections.
        let mut guess = if n == 0 {
            kappa[n] + h * slope_n
        } else {
            kappa[n] + h * (1.5 * slope_n + 0.5 * history[n - 1])
        };
        for _ in 0..2 {
            let slope_next = -(known + endpoint * guess);
            guess = kappa[n] + 0.5 * h * (slope_n + slope_next);
        }
        kappa.push(guess);
        history.push(known + endpoint * guess);
    }

    Ok(KappaSeries {
        grid: *grid,
        values: kappa,
    })
}

impl KappaModel {
    pub fn markovian(rate: f64) -> Result<Self> {
        kappa_markovian(rate, 0.0)?;
        Ok(KappaModel::MarkovianExponential { rate })
    }

    pub fn lorentzian(res: ReservoirConfig) -> Self {
        KappaModel::LorentzianClosedForm(res)
    }

    pub fn tabulated(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidTable(format!(
                "{} values for {} grid nodes",
                values.len(),
                grid.len()
            )));
        }
        if values[0] != 1.0 {
            return Err(Error::InvalidTable(format!(
                "first value must be exactly 1, got {}",
                values[0]
            )));
        }
        if let Some(bad) = values
            .iter()
            .find(|v| !v.is_finite() || v.abs() > 1.0 + 1e-12)
        {
            return Err(Error::InvalidTable(format!(
                "value {bad} violates |kappa| <= 1"
            )));
        }
        Ok(KappaModel::Tabulated { grid, values })
    }

    pub fn evaluate(&self, t: f64) -> Result<f64> {
        match self {
            KappaModel::MarkovianExponential { rate } => kappa_markovian(*rate, t),
            KappaModel::LorentzianClosedForm(res) => kappa_lorentzian(res, t),
            KappaModel::Tabulated { grid, values } => {
                if t < 0.0 {
                    return Err(Error::NegativeTime(t));
                }
                let start = grid.t_start();
                let end = grid.node(values.len() - 1);
                if t < start || t > end {
                    return Err(Error::OutOfRange { t, start, end });
                }
                let pos = (t - start) / grid.step();
                let i = (pos.floor() as usize).min(values.len() - 1);
                if i + 1 == values.len() {
                    return Ok(values[i]);
                }
                let frac = pos - i as f64;
                if frac == 0.0 {
                    Ok(values[i])
                } else {
                    Ok(values[i] + frac * (values[i + 1] - values[i]))
                }
            }
        }
    }

    /// Metadata entries identifying the model.
    pub fn describe(&self, header: &mut Header) {
        match self {
            KappaModel::MarkovianExponential { rate } => {
                header
                    .push("kappa_model", "markovian")
                    .push_f64("rate", *rate);
            }
            KappaModel::LorentzianClosedForm(res) => {
                header
                    .push("kappa_model", "lorentzian")
                    .push_f64("gamma", res.gamma())
                    .push_f64("eta0", res.eta0())
                    .push("regime", res.regime().regime.to_string());
            }
            KappaModel::Tabulated { grid, .. } => {
                header
                    .push("kappa_model", "tabulated")
                    .push_f64("table_t_start", grid.t_start())
                    .push_f64("table_t_end", grid.t_end())
                    .push_f64("table_step", grid.step());
            }
        }
    }
}

impl From<KappaSeries> for KappaModel {
    fn from(series: KappaSeries) -> Self {
        KappaModel::Tabulated {
            grid: series.grid,
            values: series.values,
        }
    }
}
