//! Domain types shared by every other module: ensemble and reservoir
//! configuration, the decoherence-function family, channel and
//! squeezing-definition enumerations, and uniform time grids.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// N spin-1/2 particles twisted by a uniform angle `alpha`, with an
/// optional external field `delta` (inverse-time units).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_particles: usize,
    pub alpha: f64,
    #[serde(default)]
    pub delta: f64,
}

impl EnsembleConfig {
    pub fn new(n_particles: usize, alpha: f64) -> Self {
        Self {
            n_particles,
            alpha,
            delta: 0.0,
        }
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaWarning {
    /// alpha is an integer multiple of pi: the twisted state factorizes.
    ProductState,
    /// alpha is an odd multiple of pi/2: the twisted state is a graph state.
    GraphState,
    /// alpha lies outside (0, pi/2) without hitting a degenerate point.
    OutsideSqueezedRegime,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedEnsemble {
    pub config: EnsembleConfig,
    pub warnings: Vec<AlphaWarning>,
}

const DEGENERATE_TOL: f64 = 1e-12;

pub fn validate_ensemble(cfg: EnsembleConfig) -> Result<ValidatedEnsemble> {
    if cfg.n_particles < 1 {
        return Err(Error::NonPositiveN(cfg.n_particles as i64));
    }
    if !cfg.alpha.is_finite() {
        return Err(Error::NonFiniteParameter("alpha"));
    }
    if !cfg.delta.is_finite() {
        return Err(Error::NonFiniteParameter("delta"));
    }

    let mut warnings = Vec::new();
    // Multiples of pi/2: even multiples factorize, odd ones give graph states.
    let halves = cfg.alpha / FRAC_PI_2;
    let nearest = halves.round();
    if (halves - nearest).abs() <= DEGENERATE_TOL * nearest.abs().max(1.0) {
        if (nearest as i64).rem_euclid(2) == 0 {
            warnings.push(AlphaWarning::ProductState);
        } else {
            warnings.push(AlphaWarning::GraphState);
        }
    } else if !(cfg.alpha > 0.0 && cfg.alpha < FRAC_PI_2) {
        warnings.push(AlphaWarning::OutsideSqueezedRegime);
    }

    Ok(ValidatedEnsemble {
        config: cfg,
        warnings,
    })
}

/// Lorentzian reservoir: spectral width `gamma` and coupling strength `eta0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReservoirConfig {
    gamma: f64,
    eta0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Strong,
    Weak,
    Critical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Strong => "strong",
            Regime::Weak => "weak",
            Regime::Critical => "critical",
        })
    }
}

/// Coupling regime together with `d = sqrt(|2 eta0 gamma - gamma^2|)`
/// (zero at the critical point).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeInfo {
    pub regime: Regime,
    pub d: f64,
}

impl ReservoirConfig {
    pub fn new(gamma: f64, eta0: f64) -> Result<Self> {
        for (name, value) in [("gamma", gamma), ("eta0", eta0)] {
            if !value.is_finite() {
                return Err(Error::NonFiniteParameter(name));
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveParameter { name, value });
            }
        }
        Ok(Self { gamma, eta0 })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    /// Reservoir correlation time, tau ~ 1/gamma. Informational only.
    pub fn correlation_time(&self) -> f64 {
        1.0 / self.gamma
    }

    pub fn regime(&self) -> RegimeInfo {
        reservoir_regime(self)
    }
}

pub fn reservoir_regime(res: &ReservoirConfig) -> RegimeInfo {
    let half = 0.5 * res.gamma;
    let excess = res.eta0 - half;
    if excess.abs() <= 1e-12 * half {
        return RegimeInfo {
            regime: Regime::Critical,
            d: 0.0,
        };
    }
    // 2 eta0 gamma - gamma^2 = 2 gamma (eta0 - gamma/2)
    let d = (2.0 * res.gamma * excess.abs()).sqrt();
    let regime = if excess > 0.0 {
        Regime::Strong
    } else {
        Regime::Weak
    };
    RegimeInfo { regime, d }
}

/// Uniform time grid `t_start, t_start + step, ...` up to `t_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    step: f64,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, step: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && step.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bound or step".into()));
        }
        if t_start < 0.0 {
            return Err(Error::InvalidGrid(format!(
                "t_start = {t_start} is negative"
            )));
        }
        if t_end <= t_start {
            return Err(Error::InvalidGrid(format!(
                "t_end = {t_end} must exceed t_start = {t_start}"
            )));
        }
        if step <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "step = {step} must be positive"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            step,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        // The slack absorbs representation error in spans like 400 / 0.05.
        ((self.t_end - self.t_start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }
}

/// Family of decoherence functions kappa(t).
#[derive(Debug, Clone, PartialEq)]
pub enum KappaModel {
    MarkovianExponential { rate: f64 },
    LorentzianClosedForm(ReservoirConfig),
    Tabulated { grid: TimeGrid, values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Dephasing,
    Depolarizing,
    Damping,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 3] = [
        ChannelKind::Dephasing,
        ChannelKind::Depolarizing,
        ChannelKind::Damping,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::Damping => "damping",
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dephasing" => Ok(ChannelKind::Dephasing),
            "depolarizing" => Ok(ChannelKind::Depolarizing),
            "damping" => Ok(ChannelKind::Damping),
            other => Err(format!(
                "unknown channel `{other}` (expected dephasing, depolarizing or damping)"
            )),
        }
    }
}

/// Squeezing definition: Kitagawa-Ueda/Wineland xi^2 or the Toth xi'^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Definition {
    KitagawaUeda,
    Toth,
}

impl Definition {
    pub const ALL: [Definition; 2] = [Definition::KitagawaUeda, Definition::Toth];

    pub fn name(&self) -> &'static str {
        match self {
            Definition::KitagawaUeda => "xi",
            Definition::Toth => "xi-prime",
        }
    }

    /// Column label used in emitted curves.
    pub fn column(&self) -> &'static str {
        match self {
            Definition::KitagawaUeda => "xi2",
            Definition::Toth => "xi2_prime",
        }
    }
}

impl fmt::Display for Definition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Definition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "xi" => Ok(Definition::KitagawaUeda),
            "xi-prime" => Ok(Definition::Toth),
            other => Err(format!(
                "unknown definition `{other}` (expected xi or xi-prime)"
            )),
        }
    }
}

/// Rates of the single-qubit generator: `s` splits the `b` rate between
/// decay and pumping; `c` sets the total transverse rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LindbladParams {
    pub s: f64,
    pub b: f64,
    pub c: f64,
}

impl LindbladParams {
    pub fn new(s: f64, b: f64, c: f64) -> Result<Self> {
        if !(s.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::NonFiniteParameter("lindblad rates"));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidGrid(format!("s = {s} outside [0, 1]")));
        }
        Ok(Self { s, b, c })
    }

    pub fn dephasing(gamma: f64, s: f64) -> Self {
        Self {
            s,
            b: 0.0,
            c: gamma,
        }
    }

    pub fn depolarizing(gamma: f64) -> Self {
        Self {
            s: 0.5,
            b: gamma,
            c: gamma,
        }
    }

    pub fn damping(gamma: f64) -> Self {
        Self {
            s: 1.0,
            b: gamma,
            c: 0.5 * gamma,
        }
    }

    pub fn for_channel(kind: ChannelKind, gamma: f64) -> Self {
        match kind {
            ChannelKind::Dephasing => Self::dephasing(gamma, 0.5),
            ChannelKind::Depolarizing => Self::depolarizing(gamma),
            ChannelKind::Damping => Self::damping(gamma),
        }
    }

    pub fn max_rate(&self) -> f64 {
        self.b.abs().max(self.c.abs())
    }
}
