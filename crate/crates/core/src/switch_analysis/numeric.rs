use super::{AnalysisMethod, CrossingEvent, Direction, EventualVerdict, StableInterval, SwitchError, SwitchReport};
use crate::charpoly::quasi_polynomial;
use crate::model::{classify_baseline, DelaySystem};
use crate::spectral::{axis_crossing_frequency, count_right_of, AXIS_MARGIN};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleScanOptions {
    /// Number of grid intervals over the window.
    pub grid: usize,
    /// Width of the final bracket around each change in the root count.
    pub tolerance: f64,
}

impl Default for OracleScanOptions {
    fn default() -> Self {
        Self {
            grid: 2000,
            tolerance: 1e-5,
        }
    }
}

/// Switches located by counting right half-plane roots on a `τ` grid and
/// bisecting every interval where the count changes. Works for any
/// placement, including the irreducible and triadic ones; it only sees
/// changes that persist across at least one grid step.
pub fn oracle_switches(
    sys: &DelaySystem,
    tau_min: f64,
    tau_max: f64,
    opts: &OracleScanOptions,
) -> Result<SwitchReport, SwitchError> {
    if !(tau_min >= 0.0 && tau_max > tau_min && tau_max.is_finite()) {
        return Err(SwitchError::BadWindow {
            lo: tau_min,
            hi: tau_max,
        });
    }
    let grid = opts.grid.max(1);
    let w = quasi_polynomial(sys);
    let count = |tau: f64| count_right_of(&w, tau, AXIS_MARGIN).map_err(|e| SwitchError::Oracle(e.to_string()));
    let taus: Vec<f64> = (0..=grid)
        .map(|k| tau_min + (tau_max - tau_min) * k as f64 / grid as f64)
        .collect();
    let counts = taus.par_iter().map(|&t| count(t)).collect::<Result<Vec<_>, _>>()?;

    let brackets: Vec<(usize, f64, f64)> = (0..grid)
        .filter(|&k| counts[k] != counts[k + 1])
        .map(|k| (k, taus[k], taus[k + 1]))
        .collect();
    let refined = brackets
        .par_iter()
        .map(|&(k, a, b)| {
            let left = counts[k];
            let (mut lo, mut hi) = (a, b);
            while hi - lo > opts.tolerance {
                let mid = 0.5 * (lo + hi);
                if count(mid)? == left {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tau = 0.5 * (lo + hi);
            let omega = axis_crossing_frequency(&w, tau).ok().flatten();
            Ok((tau, omega, left, counts[k + 1]))
        })
        .collect::<Result<Vec<_>, SwitchError>>()?;

    let mut events = Vec::new();
    let mut switches = Vec::new();
    let mut stable_intervals = Vec::new();
    let mut open: Option<(f64, bool)> = (counts[0] == 0).then_some((tau_min, true));
    for (tau, omega, before, after) in refined {
        let event = CrossingEvent {
            tau,
            direction: if after > before {
                Direction::Destabilizing
            } else {
                Direction::Stabilizing
            },
            omega,
            unstable_after: after,
        };
        events.push(event);
        if before == 0 && after > 0 {
            switches.push(event);
            if let Some((start, inclusive)) = open.take() {
                stable_intervals.push(StableInterval {
                    start,
                    end: Some(tau),
                    start_inclusive: inclusive,
                });
            }
        } else if before > 0 && after == 0 {
            switches.push(event);
            open = Some((tau, false));
        }
    }
    if let Some((start, inclusive)) = open {
        stable_intervals.push(StableInterval {
            start,
            end: None,
            start_inclusive: inclusive,
        });
    }
    let total_switches = switches.len();
    Ok(SwitchReport {
        matrix: sys.matrix,
        placement: sys.placement,
        baseline: classify_baseline(&sys.baseline_matrix()).ok(),
        method: AnalysisMethod::OracleBisection,
        initial_unstable: counts[0],
        sequences: Vec::new(),
        events,
        switches,
        stable_intervals,
        eventual: EventualVerdict::Unresolved,
        total_switches,
        tau_min,
        tau_max,
        annotations: vec![format!(
            "numeric scan of [{tau_min}, {tau_max}] on {grid} intervals; behaviour outside the window is not covered"
        )],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_system, DelayPlacement, InteractionMatrix};
    use crate::switch_analysis::enumerate_switches;
    use approx::assert_abs_diff_eq;

    #[test]
    fn agrees_with_analytic_walk() {
        let sys = build_system(
            InteractionMatrix::planar(-2.0, -4.0, 3.0, -2.0).unwrap(),
            DelayPlacement::Own,
        )
        .unwrap();
        let analytic = enumerate_switches(&sys, 6.0).unwrap();
        let numeric = oracle_switches(
            &sys,
            0.0,
            6.0,
            &OracleScanOptions {
                grid: 600,
                tolerance: 1e-6,
            },
        )
        .unwrap();
        assert_eq!(numeric.switches.len(), analytic.switches.len());
        for (a, b) in analytic.switches.iter().zip(&numeric.switches) {
            assert_abs_diff_eq!(a.tau, b.tau, epsilon = 1e-5);
            assert_eq!(a.direction, b.direction);
            assert_abs_diff_eq!(a.omega.unwrap(), b.omega.unwrap(), epsilon = 1e-3);
        }
    }

    #[test]
    fn window_checked() {
        let sys = build_system(
            InteractionMatrix::planar(-2.0, -4.0, 3.0, -2.0).unwrap(),
            DelayPlacement::Own,
        )
        .unwrap();
        assert!(oracle_switches(&sys, 1.0, 0.5, &OracleScanOptions::default()).is_err());
    }
}
