use super::walk::{constant_report, delay_free_unstable, walk};
use super::{AnalysisMethod, CriticalDelaySequence, Direction, SwitchError, SwitchReport};
use crate::charpoly::{quasi_polynomial, ExponentialForm};
use crate::model::{classify_baseline, DelayPlacement, DelaySystem};
use crate::poly::quadratic_roots;
use std::f64::consts::{FRAC_PI_2, TAU};

/// `dRe λ/dτ` at a crossing `λ = iω` of `λ² + cλe^{-λτ} + de^{-2λτ}`.
pub fn full_crossing_rate(omega: f64, tau: f64) -> f64 {
    omega * omega / (1.0 + omega * omega * tau * tau)
}

/// Switch analysis for the all-delayed placement through `z = λe^{λτ}`,
/// which turns `W` into `z² + cz + d`. A crossing `iω` needs `|z| = ω` and
/// `arg z = π/2 + ωτ`; every crossing moves right.
pub fn zsubstitution_analysis(sys: &DelaySystem, tau_max: f64) -> Result<SwitchReport, SwitchError> {
    if sys.placement != DelayPlacement::Full {
        return Err(SwitchError::WrongPlacement(sys.placement.name().to_string()));
    }
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(SwitchError::BadWindow { lo: 0.0, hi: tau_max });
    }
    let baseline = classify_baseline(&sys.matrix)?;
    if baseline.verdict.is_marginal() {
        return Err(SwitchError::NonGeneric(format!(
            "delay-free system is marginal (trace {}, determinant {})",
            baseline.trace, baseline.determinant
        )));
    }
    let w = quasi_polynomial(sys);
    let (c, d) = match w.form() {
        ExponentialForm::ZForm { c, d } => (c, d),
        ExponentialForm::DelayFree => {
            let unstable = delay_free_unstable(sys);
            return Ok(constant_report(sys, baseline, unstable, tau_max, Vec::new()));
        }
        // zero trace would have been caught as marginal above
        _ => return Err(SwitchError::WrongPlacement(sys.placement.name().to_string())),
    };
    let mut sequences = Vec::new();
    for z in quadratic_roots(c, d) {
        let omega = z.norm();
        let mut theta = (z.arg() - FRAC_PI_2).rem_euclid(TAU);
        if theta >= TAU {
            theta -= TAU;
        }
        let mut seq = CriticalDelaySequence {
            omega,
            theta,
            multiplier: 1,
            direction: Direction::Destabilizing,
            delays: Vec::new(),
        };
        seq.delays = (0..).map(|n| seq.delay(n)).take_while(|&t| t <= tau_max).collect();
        sequences.push(seq);
    }
    // a real double z-root gives the same sequence twice; keep one copy per root
    // so the walk counts each conjugate pair once
    if sequences.len() == 2
        && (sequences[0].omega - sequences[1].omega).abs() <= 1e-12 * sequences[0].omega
        && (sequences[0].theta - sequences[1].theta).abs() <= 1e-12
    {
        return Err(SwitchError::NonGeneric("double root of z² + cz + d".into()));
    }
    let initial_unstable = delay_free_unstable(sys);
    let outcome = walk(
        &sequences,
        &vec![false; sequences.len()],
        initial_unstable,
        true,
        tau_max,
    )?;
    Ok(SwitchReport {
        matrix: sys.matrix,
        placement: sys.placement,
        baseline: Some(baseline),
        method: AnalysisMethod::ZSubstitution,
        initial_unstable,
        sequences,
        events: outcome.events,
        switches: outcome.switches,
        stable_intervals: outcome.stable_intervals,
        eventual: outcome.eventual,
        total_switches: outcome.total_switches,
        tau_min: 0.0,
        tau_max,
        annotations: Vec::new(),
    })
}
