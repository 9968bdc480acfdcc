use super::{
    auxiliary_quadratic, critical_delays, crossing_frequencies, discrepancy_annotation, AnalysisMethod,
    CriticalDelaySequence, CrossingEvent, Direction, EventualVerdict, StableInterval, SwitchError, SwitchReport,
    DEGENERACY_TOL,
};
use crate::charpoly::{quasi_polynomial, ExponentialForm};
use crate::model::{classify_baseline, BaselineStability, BaselineVerdict, DelayPlacement, DelaySystem};
use std::f64::consts::TAU;

const MAX_WALK_EVENTS: usize = 1_000_000;

/// Count of delay-free roots strictly inside the right half-plane.
pub(super) fn delay_free_unstable(sys: &DelaySystem) -> usize {
    quasi_polynomial(sys)
        .tau_zero_polynomial()
        .roots()
        .iter()
        .filter(|z| z.re > 0.0)
        .count()
}

pub(super) struct WalkOutcome {
    pub events: Vec<CrossingEvent>,
    pub switches: Vec<CrossingEvent>,
    pub stable_intervals: Vec<StableInterval>,
    pub eventual: EventualVerdict,
    pub total_switches: usize,
}

/// Merge the critical-delay sequences in increasing `τ` and track the number
/// of right half-plane roots. `skip_first[k]` drops the `n = 0` member of
/// sequence `k` (already applied at `τ = 0+`).
pub(super) fn walk(
    sequences: &[CriticalDelaySequence],
    skip_first: &[bool],
    initial_unstable: usize,
    start_inclusive: bool,
    tau_max: f64,
) -> Result<WalkOutcome, SwitchError> {
    let mut next: Vec<usize> = skip_first.iter().map(|&s| usize::from(s)).collect();
    let stab_spacing = sequences
        .iter()
        .filter(|s| s.direction == Direction::Stabilizing)
        .map(|s| s.spacing())
        .fold(f64::INFINITY, f64::min);
    let n_stab = sequences
        .iter()
        .filter(|s| s.direction == Direction::Stabilizing)
        .count();
    let n_destab = sequences.len() - n_stab;
    let destab_spacing = sequences
        .iter()
        .filter(|s| s.direction == Direction::Destabilizing)
        .map(|s| s.spacing())
        .fold(0.0, f64::max);
    // With one stabilizing sequence that is sparser than a destabilizing one,
    // the count can only grow between consecutive stabilizing events.
    let monotone_after_stab = n_stab == 1 && n_destab >= 1 && destab_spacing < stab_spacing;

    let mut count = initial_unstable as i64;
    let mut out = WalkOutcome {
        events: Vec::new(),
        switches: Vec::new(),
        stable_intervals: Vec::new(),
        eventual: EventualVerdict::Unresolved,
        total_switches: 0,
    };
    let mut open_stable: Option<(f64, bool)> = (count == 0).then_some((0.0, start_inclusive));
    let mut last_destab_switch = 0.0;
    let mut prev_tau = f64::NEG_INFINITY;

    // once the verdict is known the walk only records the remaining events in the window
    let mut settled = false;
    for _ in 0..MAX_WALK_EVENTS {
        if !settled && count == 0 && n_destab == 0 {
            out.eventual = EventualVerdict::StableForever;
            break;
        }
        if !settled && count > 0 && n_stab == 0 {
            out.eventual = EventualVerdict::UnstableBeyond {
                tau: last_destab_switch,
            };
            settled = true;
        }
        let Some((k, tau)) = sequences
            .iter()
            .enumerate()
            .map(|(k, s)| (k, s.delay(next[k])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if settled && tau > tau_max {
            break;
        }
        if (tau - prev_tau).abs() <= DEGENERACY_TOL * tau.abs().max(1.0) {
            return Err(SwitchError::NonGeneric(format!(
                "two crossings coincide at tau = {tau}"
            )));
        }
        prev_tau = tau;
        next[k] += 1;
        let seq = &sequences[k];
        let before = count;
        count += seq.direction.delta();
        if count < 0 {
            return Err(SwitchError::Inconsistent(format!(
                "stabilizing crossing at tau = {tau} with no unstable roots"
            )));
        }
        let event = CrossingEvent {
            tau,
            direction: seq.direction,
            omega: Some(seq.omega),
            unstable_after: count as usize,
        };
        if tau <= tau_max {
            out.events.push(event);
        }
        if settled && (before == 0) != (count == 0) {
            return Err(SwitchError::Inconsistent(format!(
                "switch at tau = {tau} after the walk settled as unstable"
            )));
        }
        if before == 0 && count > 0 {
            out.total_switches += 1;
            last_destab_switch = tau;
            if tau <= tau_max {
                out.switches.push(event);
            }
            if let Some((start, inclusive)) = open_stable.take() {
                if start <= tau_max {
                    out.stable_intervals.push(StableInterval {
                        start,
                        end: Some(tau),
                        start_inclusive: inclusive,
                    });
                }
            }
        } else if before > 0 && count == 0 {
            out.total_switches += 1;
            if tau <= tau_max {
                out.switches.push(event);
            }
            open_stable = Some((tau, false));
        }
        if !settled && seq.direction == Direction::Stabilizing && count >= 2 && monotone_after_stab {
            out.eventual = EventualVerdict::UnstableBeyond {
                tau: last_destab_switch,
            };
            settled = true;
        }
    }
    if let Some((start, inclusive)) = open_stable {
        if start <= tau_max {
            out.stable_intervals.push(StableInterval {
                start,
                end: match out.eventual {
                    EventualVerdict::StableForever => None,
                    _ => Some(f64::INFINITY),
                },
                start_inclusive: inclusive,
            });
        }
    }
    // an interval that never closed inside an unresolved walk has no known end
    for iv in &mut out.stable_intervals {
        if iv.end == Some(f64::INFINITY) {
            iv.end = None;
        }
    }
    Ok(out)
}

/// Stability switches for single-exponential planar placements, from the
/// zeros of the auxiliary function and the merged critical-delay sequences.
pub fn enumerate_switches(sys: &DelaySystem, tau_max: f64) -> Result<SwitchReport, SwitchError> {
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(SwitchError::BadWindow { lo: 0.0, hi: tau_max });
    }
    if !sys.matrix.is_planar() {
        return Err(SwitchError::NotPlanar);
    }
    if sys.placement == DelayPlacement::PureCross {
        return Err(SwitchError::NonGeneric(
            "delays on the cross terms only with zero self-reaction: the spectrum is marginal".into(),
        ));
    }
    let baseline = classify_baseline(&sys.baseline_matrix())?;
    if baseline.verdict == BaselineVerdict::MarginalZeroRoot {
        return Err(SwitchError::NonGeneric(format!(
            "determinant {} is zero: lambda = 0 is a root for every delay",
            baseline.determinant
        )));
    }
    let w = quasi_polynomial(sys);
    let mut annotations = Vec::new();
    if let Some(note) = discrepancy_annotation(sys) {
        annotations.push(note);
    }
    if w.form() == ExponentialForm::DelayFree {
        if baseline.verdict.is_marginal() {
            return Err(SwitchError::NonGeneric(
                "the delay has no effect and the delay-free pair stays on the imaginary axis".into(),
            ));
        }
        let unstable = delay_free_unstable(sys);
        return Ok(constant_report(sys, baseline, unstable, tau_max, annotations));
    }
    let f = auxiliary_quadratic(&w)?;
    let freqs = crossing_frequencies(&f)?;
    let mut sequences = freqs
        .iter()
        .map(|cf| critical_delays(sys, cf, tau_max))
        .collect::<Result<Vec<_>, _>>()?;
    let mut skip_first = vec![false; sequences.len()];
    let mut initial_unstable = delay_free_unstable(sys);
    let mut start_inclusive = true;

    if baseline.verdict == BaselineVerdict::MarginalCenter {
        // The delay-free pair ±i√det sits on the axis; the matching crossing
        // has zero phase and decides where the pair goes at τ = 0+.
        let det = baseline.determinant;
        let k = sequences
            .iter()
            .position(|s| {
                let near_zero = s.theta < 1e-7 || TAU - s.theta < 1e-7;
                near_zero && (s.omega * s.omega - det).abs() <= 1e-6 * det.max(1.0)
            })
            .ok_or_else(|| {
                SwitchError::NonGeneric("purely imaginary delay-free pair without a matching crossing".into())
            })?;
        let seq = &mut sequences[k];
        // theta may have landed just below 2π; either way the n = 0 member is τ = 0
        seq.theta = 0.0;
        seq.delays = (1..).map(|n| seq.delay(n)).take_while(|&t| t <= tau_max).collect();
        skip_first[k] = true;
        // for a planar system the axis pair is the whole delay-free spectrum
        let on_axis_pair = seq.direction == Direction::Destabilizing;
        initial_unstable = if on_axis_pair { 2 } else { 0 };
        start_inclusive = false;
        annotations.push(format!(
            "delay-free system is marginal (trace 0); the imaginary pair at omega = {:.6} moves {} at tau = 0+",
            seq.omega,
            if on_axis_pair { "right" } else { "left" }
        ));
    }

    let outcome = walk(&sequences, &skip_first, initial_unstable, start_inclusive, tau_max)?;
    Ok(SwitchReport {
        matrix: sys.matrix,
        placement: sys.placement,
        baseline: Some(baseline),
        method: AnalysisMethod::AuxiliaryFunction,
        initial_unstable,
        sequences,
        events: outcome.events,
        switches: outcome.switches,
        stable_intervals: outcome.stable_intervals,
        eventual: outcome.eventual,
        total_switches: outcome.total_switches,
        tau_min: 0.0,
        tau_max,
        annotations,
    })
}

pub(super) fn constant_report(
    sys: &DelaySystem,
    baseline: BaselineStability,
    unstable: usize,
    tau_max: f64,
    annotations: Vec<String>,
) -> SwitchReport {
    let stable = unstable == 0;
    SwitchReport {
        matrix: sys.matrix,
        placement: sys.placement,
        baseline: Some(baseline),
        method: AnalysisMethod::DelayFree,
        initial_unstable: unstable,
        sequences: Vec::new(),
        events: Vec::new(),
        switches: Vec::new(),
        stable_intervals: if stable {
            vec![StableInterval {
                start: 0.0,
                end: None,
                start_inclusive: true,
            }]
        } else {
            Vec::new()
        },
        eventual: if stable {
            EventualVerdict::StableForever
        } else {
            EventualVerdict::UnstableBeyond { tau: 0.0 }
        },
        total_switches: 0,
        tau_min: 0.0,
        tau_max,
        annotations,
    }
}
