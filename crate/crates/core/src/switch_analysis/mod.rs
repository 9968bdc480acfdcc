//! Analytic enumeration of delay-induced stability switches.
//!
//! Single-exponential quasi-polynomials go through the auxiliary function
//! `F(y) = |P(i√y)|² − |Q(i√y)|²`; the all-delayed placement uses the
//! substitution `z = λe^{λτ}`; irreducible placements fall back to a
//! root-counting bisection on `τ`.

mod angle;
mod auxiliary;
mod numeric;
mod region;
mod theorem;
mod trig;
mod walk;
mod zsub;

pub use angle::{critical_angle, critical_angle_for, critical_delays};
pub use auxiliary::{auxiliary_polynomial, auxiliary_quadratic, crossing_frequencies, AuxiliaryQuadratic};
pub use numeric::{oracle_switches, OracleScanOptions};
pub use region::{find_n_switch_region, RegionSearch, SearchBox};
pub use theorem::{classify_theorem_case, Regime, TheoremClassification};
pub use trig::{trig_scan, trig_scan_ceiling, TrigZero};
pub use walk::enumerate_switches;
pub use zsub::{full_crossing_rate, zsubstitution_analysis};

use crate::charpoly::{quasi_polynomial, ExponentialForm};
use crate::model::{BaselineStability, DelayPlacement, DelaySystem, InteractionMatrix, ModelError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance below which discriminants, event ties and angle
/// coincidences count as non-generic.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SwitchError {
    #[error("non-generic input: {0}")]
    NonGeneric(String),
    #[error("placement {0} has two irreducible exponentials; use the z-substitution or the numeric scan")]
    NotSingleExponential(String),
    #[error("operation needs a planar system")]
    NotPlanar,
    #[error("placement {0} is not supported by this operation")]
    WrongPlacement(String),
    #[error("the delay has no effect on this system")]
    DelayFree,
    #[error("inconsistent crossing sequence: {0}")]
    Inconsistent(String),
    #[error("invalid delay window [{lo}, {hi}]")]
    BadWindow { lo: f64, hi: f64 },
    #[error("spectral oracle failed: {0}")]
    Oracle(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Roots move into the right half-plane (`dRe λ/dτ > 0`).
    Destabilizing,
    /// Roots move into the left half-plane.
    Stabilizing,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Destabilizing => "destabilizing",
            Self::Stabilizing => "stabilizing",
        }
    }

    /// Change in the count of right half-plane roots for one conjugate pair.
    pub fn delta(self) -> i64 {
        match self {
            Self::Destabilizing => 2,
            Self::Stabilizing => -2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingFrequency {
    pub y: f64,
    pub omega: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalAngle {
    pub cosv: f64,
    pub sinv: f64,
    /// Principal angle in `[0, 2π)`.
    pub theta: f64,
}

impl CriticalAngle {
    pub fn from_unnormalized(cosv: f64, sinv: f64) -> Self {
        let r = cosv.hypot(sinv);
        let (cosv, sinv) = (cosv / r, sinv / r);
        let mut theta = sinv.atan2(cosv);
        if theta < 0.0 {
            theta += std::f64::consts::TAU;
        }
        if theta >= std::f64::consts::TAU {
            theta -= std::f64::consts::TAU;
        }
        Self { cosv, sinv, theta }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalDelaySequence {
    pub omega: f64,
    pub theta: f64,
    /// How many copies of `τ` the exponential carries (`e^{-mλτ}`).
    pub multiplier: u32,
    pub direction: Direction,
    pub delays: Vec<f64>,
}

impl CriticalDelaySequence {
    pub fn first(&self) -> f64 {
        self.theta / (self.multiplier as f64 * self.omega)
    }

    pub fn spacing(&self) -> f64 {
        std::f64::consts::TAU / (self.multiplier as f64 * self.omega)
    }

    pub fn delay(&self, n: usize) -> f64 {
        (self.theta + std::f64::consts::TAU * n as f64) / (self.multiplier as f64 * self.omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub tau: f64,
    pub direction: Direction,
    /// Crossing frequency; `None` when the numeric scan could not isolate it.
    pub omega: Option<f64>,
    /// Number of characteristic roots in the open right half-plane just after `tau`.
    pub unstable_after: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableInterval {
    pub start: f64,
    /// `None` when stability persists for every larger delay.
    pub end: Option<f64>,
    pub start_inclusive: bool,
}

impl StableInterval {
    pub fn contains(&self, tau: f64) -> bool {
        let above = if self.start_inclusive {
            tau >= self.start
        } else {
            tau > self.start
        };
        above && self.end.is_none_or(|e| tau < e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum EventualVerdict {
    StableForever,
    /// Unstable for every delay above `tau`.
    UnstableBeyond {
        tau: f64,
    },
    /// The walk or the scan could not settle the large-delay behaviour.
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisMethod {
    DelayFree,
    AuxiliaryFunction,
    ZSubstitution,
    OracleBisection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchReport {
    pub matrix: InteractionMatrix,
    pub placement: DelayPlacement,
    /// Delay-free classification; absent for triads.
    pub baseline: Option<BaselineStability>,
    pub method: AnalysisMethod,
    /// Right half-plane root count just above the lower end of the window.
    pub initial_unstable: usize,
    pub sequences: Vec<CriticalDelaySequence>,
    pub events: Vec<CrossingEvent>,
    pub switches: Vec<CrossingEvent>,
    pub stable_intervals: Vec<StableInterval>,
    pub eventual: EventualVerdict,
    /// Switches over all delays, including any past `tau_max` found while settling.
    pub total_switches: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub annotations: Vec<String>,
}

impl SwitchReport {
    /// Predicted right half-plane root count at `tau`, when the report covers it.
    pub fn unstable_count_at(&self, tau: f64) -> Option<usize> {
        if tau < self.tau_min {
            return None;
        }
        if tau > self.tau_max {
            let last = self.events.last().map_or(self.initial_unstable, |e| e.unstable_after);
            return match self.eventual {
                EventualVerdict::StableForever if last == 0 => Some(0),
                _ => None,
            };
        }
        let mut count = self.initial_unstable;
        for e in &self.events {
            if e.tau <= tau {
                count = e.unstable_after;
            } else {
                break;
            }
        }
        Some(count)
    }

    pub fn predicted_stable_at(&self, tau: f64) -> Option<bool> {
        match (self.unstable_count_at(tau), self.eventual) {
            (Some(c), _) => Some(c == 0),
            (None, EventualVerdict::UnstableBeyond { tau: t }) if tau > t && tau > self.tau_max => Some(false),
            _ => None,
        }
    }

    /// Delays at which the report should be checked: both window ends and the
    /// midpoint of every gap between consecutive events.
    pub fn sample_points(&self) -> Vec<f64> {
        let mut cuts = vec![self.tau_min];
        cuts.extend(
            self.events
                .iter()
                .map(|e| e.tau)
                .filter(|t| *t > self.tau_min && *t < self.tau_max),
        );
        cuts.push(self.tau_max);
        let mut out = Vec::with_capacity(cuts.len() + 1);
        out.push(self.tau_min);
        for w in cuts.windows(2) {
            if w[1] > w[0] {
                out.push(0.5 * (w[0] + w[1]));
            }
        }
        if self
            .events
            .last()
            .is_none_or(|e| (e.tau - self.tau_max).abs() > 1e-6 * self.tau_max.max(1.0))
        {
            out.push(self.tau_max);
        }
        out
    }
}

/// Pick the analysis route that fits the system's exponential structure.
pub fn switch_report(sys: &DelaySystem, tau_max: f64) -> Result<SwitchReport, SwitchError> {
    if !sys.matrix.is_planar() {
        return oracle_switches(sys, 0.0, tau_max, &OracleScanOptions::default());
    }
    let w = quasi_polynomial(sys);
    match w.form() {
        ExponentialForm::ZForm { .. } => zsubstitution_analysis(sys, tau_max),
        ExponentialForm::Irreducible => oracle_switches(sys, 0.0, tau_max, &OracleScanOptions::default()),
        _ => enumerate_switches(sys, tau_max),
    }
}

/// Note attached to reports for coefficient sets whose published switch
/// structure does not survive direct evaluation.
pub fn discrepancy_annotation(sys: &DelaySystem) -> Option<String> {
    let c = sys.matrix.coefficients();
    match (sys.placement, c.as_slice()) {
        (DelayPlacement::Own, [a11, a12, a21, a22]) if (*a11, *a12, *a21, *a22) == (-1.0, 3.0, -2.0, 1.0) => Some(
            "published-result discrepancy: a five-switch sequence starting near tau = 0.92 has been \
                 reported for these coefficients, but the delay-free trace is zero (marginal baseline) and \
                 the characteristic function vanishes at lambda = i*sqrt(7) for tau ~ 0.2732; the spectral \
                 oracle agrees with the single switch listed here"
                .to_string(),
        ),
        (DelayPlacement::Own, [a11, a12, a21, a22]) if (*a11, *a12, *a21, *a22) == (1.0, 1.0, -2.0, -2.0) => Some(
            "published-result discrepancy: these coefficients have been cited as stable for every delay, \
                 but the determinant is zero so lambda = 0 is a root for every tau"
                .to_string(),
        ),
        _ => None,
    }
}
