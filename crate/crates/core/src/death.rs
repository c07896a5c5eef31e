//! Sudden death, revival intervals and final disappearance of squeezing
//! along a curve `t -> xi^2(t)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{KappaModel, Regime};
use crate::squeezing::DecoheredSqueezing;

/// Bisection stops once the bracket is this narrow.
pub const TIME_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SqueezedInterval {
    pub t_start: f64,
    pub t_end: f64,
}

impl SqueezedInterval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.t_start + self.t_end)
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

/// `min(0.05, pi/(10 d))` for an oscillating kappa, otherwise 0.05.
pub fn default_coarse_step(model: &KappaModel) -> f64 {
    match model {
        KappaModel::LorentzianClosedForm(res) => {
            let info = res.regime();
            if info.regime == Regime::Strong {
                0.05f64.min(PI / (10.0 * info.d))
            } else {
                0.05
            }
        }
        _ => 0.05,
    }
}

/// `xi^2` along the kappa trajectory; points where kappa cannot be
/// evaluated count as unsqueezed.
pub fn curve_evaluator<'a>(
    map: &'a DecoheredSqueezing,
    model: &'a KappaModel,
) -> impl Fn(f64) -> f64 + Sync + 'a {
    move |t| match model.evaluate(t) {
        Ok(kappa) => map.xi2_at(kappa),
        Err(_) => f64::INFINITY,
    }
}

fn squeezed(v: f64) -> bool {
    // NaN compares false, so it counts as unsqueezed along with +inf.
    v < 1.0
}

fn nodes(horizon: f64, coarse_step: f64) -> Vec<f64> {
    assert!(
        coarse_step > 0.0 && horizon >= 0.0,
        "invalid scan parameters"
    );
    let count = (horizon / coarse_step).ceil() as usize;
    (0..=count)
        .map(|i| (i as f64 * coarse_step).min(horizon))
        .collect()
}

/// Narrows `[lo, hi]`, whose ends differ in squeezing, and returns the
/// end on the `hi` side.
fn bisect<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64) -> f64 {
    let hi_state = squeezed(f(hi));
    while hi - lo > TIME_TOL {
        let mid = 0.5 * (lo + hi);
        if squeezed(f(mid)) == hi_state {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn scan<F: Fn(f64) -> f64 + Sync>(f: &F, horizon: f64, coarse_step: f64) -> (Vec<f64>, Vec<bool>) {
    let ts = nodes(horizon, coarse_step);
    let flags = ts.par_iter().map(|&t| squeezed(f(t))).collect();
    (ts, flags)
}

/// Earliest time with `xi^2 >= 1`, to within [`TIME_TOL`]. Returns 0 for
/// a curve that starts unsqueezed and `None` if it stays squeezed up to
/// the horizon.
pub fn first_death_time<F: Fn(f64) -> f64 + Sync>(
    f: F,
    horizon: f64,
    coarse_step: f64,
) -> Option<f64> {
    if !squeezed(f(0.0)) {
        return Some(0.0);
    }
    let (ts, flags) = scan(&f, horizon, coarse_step);
    let i = flags.iter().position(|&s| !s)?;
    Some(bisect(&f, ts[i - 1], ts[i]))
}

/// Maximal intervals of `[0, horizon]` on which `xi^2 < 1`. Intervals
/// narrower than about two coarse steps can be missed.
pub fn squeezed_intervals<F: Fn(f64) -> f64 + Sync>(
    f: F,
    horizon: f64,
    coarse_step: f64,
) -> Vec<SqueezedInterval> {
    let (ts, flags) = scan(&f, horizon, coarse_step);
    let mut runs = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < flags.len() && flags[i + 1] {
            i += 1;
        }
        runs.push((start, i));
        i += 1;
    }
    runs.into_par_iter()
        .map(|(a, b)| SqueezedInterval {
            t_start: if a == 0 {
                0.0
            } else {
                bisect(&f, ts[a - 1], ts[a])
            },
            t_end: if b + 1 == ts.len() {
                ts[b]
            } else {
                bisect(&f, ts[b], ts[b + 1])
            },
        })
        .collect()
}

/// The last time squeezing is lost within the horizon; `None` if the
/// curve is still squeezed at the horizon, 0 if it is never squeezed.
pub fn final_death_time<F: Fn(f64) -> f64 + Sync>(
    f: F,
    horizon: f64,
    coarse_step: f64,
) -> Option<f64> {
    if squeezed(f(horizon)) {
        return None;
    }
    Some(
        squeezed_intervals(f, horizon, coarse_step)
            .last()
            .map_or(0.0, |iv| iv.t_end),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeathReport {
    pub horizon: f64,
    pub coarse_step: f64,
    pub first_death: Option<f64>,
    pub final_death: Option<f64>,
    pub intervals: Vec<SqueezedInterval>,
}

pub fn death_report<F: Fn(f64) -> f64 + Sync>(f: F, horizon: f64, coarse_step: f64) -> DeathReport {
    let intervals = squeezed_intervals(&f, horizon, coarse_step);
    let starts_squeezed = intervals.first().is_some_and(|iv| iv.t_start == 0.0);
    let first_death = if starts_squeezed {
        let first = intervals[0];
        (first.t_end < horizon || !squeezed(f(horizon))).then_some(first.t_end)
    } else {
        Some(0.0)
    };
    let final_death = if squeezed(f(horizon)) {
        None
    } else {
        Some(intervals.last().map_or(0.0, |iv| iv.t_end))
    };
    DeathReport {
        horizon,
        coarse_step,
        first_death,
        final_death,
        intervals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ReservoirConfig;

    #[test]
    fn linear_crossing() {
        let f = |t: f64| 0.5 + t / 100.0;
        let t = first_death_time(f, 200.0, 0.05).unwrap();
        assert!((t - 50.0).abs() <= 1e-6);
        let iv = squeezed_intervals(f, 200.0, 0.05);
        assert_eq!(iv.len(), 1);
        assert_eq!(iv[0].t_start, 0.0);
        assert!((iv[0].t_end - t).abs() < 1e-12);
        assert_eq!(final_death_time(f, 200.0, 0.05), Some(iv[0].t_end));
    }

    #[test]
    fn unsqueezed_start_and_no_crossing() {
        assert_eq!(first_death_time(|_| 1.5, 10.0, 0.1), Some(0.0));
        assert_eq!(first_death_time(|_| 0.5, 10.0, 0.1), None);
        assert_eq!(final_death_time(|_| 0.5, 10.0, 0.1), None);
        assert_eq!(final_death_time(|_| 2.0, 10.0, 0.1), Some(0.0));
        assert_eq!(
            squeezed_intervals(|_| 0.5, 10.0, 0.3),
            vec![SqueezedInterval {
                t_start: 0.0,
                t_end: 10.0
            }]
        );
    }

    #[test]
    fn divergences_end_intervals() {
        let f = |t: f64| {
            if (t - 3.0).abs() < 0.2 {
                f64::INFINITY
            } else if t > 8.0 {
                f64::NAN
            } else {
                0.2
            }
        };
        let iv = squeezed_intervals(f, 10.0, 0.05);
        assert_eq!(iv.len(), 2);
        assert!((iv[0].t_end - 2.8).abs() < 2e-6);
        assert!((iv[1].t_start - 3.2).abs() < 2e-6);
        assert!((iv[1].t_end - 8.0).abs() < 2e-6);
    }

    #[test]
    fn oscillating_curve_intervals() {
        // squeezed where cos t > 0.2
        let f = |t: f64| 1.2 - t.cos();
        let iv = squeezed_intervals(f, 16.0, 0.01);
        assert_eq!(iv.len(), 3);
        let root = 0.2f64.acos();
        assert!((iv[0].t_end - root).abs() < 2e-6);
        assert!((iv[1].t_start - (2.0 * PI - root)).abs() < 2e-6);
        for w in &iv {
            assert!(f(w.midpoint()) < 1.0);
        }
        let report = death_report(f, 16.0, 0.01);
        assert_eq!(report.intervals, iv);
        assert_eq!(report.first_death, Some(iv[0].t_end));
        assert_eq!(report.final_death, Some(iv[2].t_end));
        assert_eq!(death_report(f, 20.0, 0.01).final_death, None);
    }

    #[test]
    fn coarse_step_resolves_zero_spacing() {
        let res = ReservoirConfig::new(0.01, 10.0).unwrap();
        let step = default_coarse_step(&KappaModel::LorentzianClosedForm(res));
        let d = res.regime().d;
        assert!((step - (PI / (10.0 * d)).min(0.05)).abs() < 1e-15);
        assert_eq!(
            default_coarse_step(&KappaModel::MarkovianExponential { rate: 0.005 }),
            0.05
        );
    }
}
