use super::{CriticalAngle, CriticalDelaySequence, CrossingFrequency, SwitchError};
use crate::charpoly::{quasi_polynomial, QuasiPolynomial};
use crate::model::{DelayPlacement, DelaySystem};
use num_complex::Complex64;

/// Closed-form `(cos ωτ, sin ωτ)` for the own-state placement, solved from the
/// real and imaginary parts of `W(iω) = 0`.
pub fn critical_angle(sys: &DelaySystem, omega: f64) -> Result<CriticalAngle, SwitchError> {
    match sys.placement {
        DelayPlacement::Own => {}
        _ => {
            let w = quasi_polynomial(sys);
            return critical_angle_for(&w, omega);
        }
    }
    let m = &sys.matrix;
    if m.a11 == 0.0 {
        return Err(SwitchError::DelayFree);
    }
    let b = m.cross_product();
    let denom = m.a11 * (omega * omega + m.a22 * m.a22);
    let cosv = b * m.a22 / denom;
    let sinv = -omega * (omega * omega + m.a22 * m.a22 + b) / denom;
    Ok(CriticalAngle::from_unnormalized(cosv, sinv))
}

/// Phase `φ = mωτ` at which `P(iω) + Q(iω)e^{-iφ}` vanishes, from
/// `e^{iφ} = −Q(iω)/P(iω)`.
pub fn critical_angle_for(w: &QuasiPolynomial, omega: f64) -> Result<CriticalAngle, SwitchError> {
    let (q, _) = w
        .single_delay_term()
        .ok_or_else(|| SwitchError::NotSingleExponential(w.placement.name().to_string()))?;
    let l = Complex64::new(0.0, omega);
    let pv = w.p.eval_complex(l);
    let qv = q.eval_complex(l);
    let scale = pv.norm().max(qv.norm());
    if pv.norm() <= 1e-12 * scale.max(1.0) || qv.norm() <= 1e-12 * scale.max(1.0) {
        return Err(SwitchError::NonGeneric(format!(
            "P and Q vanish together at omega = {omega}; the crossing exists for every delay"
        )));
    }
    let r = -qv / pv;
    Ok(CriticalAngle::from_unnormalized(r.re, r.im))
}

/// `τ_n = (θ + 2πn)/(mω)` for every `n` with `τ_n ≤ τ_max`.
pub fn critical_delays(
    sys: &DelaySystem,
    cf: &CrossingFrequency,
    tau_max: f64,
) -> Result<CriticalDelaySequence, SwitchError> {
    let w = quasi_polynomial(sys);
    let multiplier = w
        .single_delay_term()
        .map(|(_, m)| m)
        .ok_or_else(|| SwitchError::NotSingleExponential(sys.placement.name().to_string()))?;
    let angle = critical_angle(sys, cf.omega)?;
    let mut seq = CriticalDelaySequence {
        omega: cf.omega,
        theta: angle.theta,
        multiplier,
        direction: cf.direction,
        delays: Vec::new(),
    };
    let mut n = 0;
    loop {
        let t = seq.delay(n);
        if t > tau_max {
            break;
        }
        seq.delays.push(t);
        n += 1;
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_system, InteractionMatrix};
    use crate::switch_analysis::Direction;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn own(c: [f64; 4]) -> DelaySystem {
        build_system(
            InteractionMatrix::planar(c[0], c[1], c[2], c[3]).unwrap(),
            DelayPlacement::Own,
        )
        .unwrap()
    }

    #[test]
    fn own_examples() {
        let s = own([-4.0, 1.0, -2.0, -2.0]);
        let a = critical_angle(&s, (8.0 + 2.0 * 31f64.sqrt()).sqrt()).unwrap();
        assert_abs_diff_eq!(a.cosv, -0.04322, epsilon = 1e-5);
        assert_abs_diff_eq!(a.sinv, 0.99907, epsilon = 1e-5);
        assert_abs_diff_eq!(a.theta, 1.61405, epsilon = 1e-4);

        let s = own([-2.0, -4.0, 3.0, -2.0]);
        let a = critical_angle(&s, 4.0).unwrap();
        assert_abs_diff_eq!(a.cosv, -0.6, epsilon = 1e-14);
        assert_abs_diff_eq!(a.sinv, 0.8, epsilon = 1e-14);
        let a = critical_angle(&s, 8f64.sqrt()).unwrap();
        assert_abs_diff_eq!(a.cosv, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(a.theta, PI, epsilon = 1e-7);
    }

    #[test]
    fn closed_form_agrees_with_ratio_route() {
        for c in [[-4.0, 1.0, -2.0, -2.0], [5.0, -4.0, 3.0, -1.0], [-2.0, -4.0, 3.0, -2.0]] {
            let s = own(c);
            let w = quasi_polynomial(&s);
            for omega in [0.5, 1.9, 4.0, 7.3] {
                let a = critical_angle(&s, omega).unwrap();
                let b = critical_angle_for(&w, omega).unwrap();
                // equal only where |P| = |Q|, but the phase of -Q/P always matches
                assert_abs_diff_eq!(a.theta, b.theta, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn sequences() {
        let s = own([-4.0, 1.0, -2.0, -2.0]);
        let cf = CrossingFrequency {
            y: 8.0 + 2.0 * 31f64.sqrt(),
            omega: (8.0 + 2.0 * 31f64.sqrt()).sqrt(),
            direction: Direction::Destabilizing,
        };
        let seq = critical_delays(&s, &cf, 3.0).unwrap();
        assert_eq!(seq.delays.len(), 2);
        assert_abs_diff_eq!(seq.delays[0], 0.36898, epsilon = 1e-5);
        assert_abs_diff_eq!(seq.delays[1], 1.805319, epsilon = 1e-5);

        let s = own([-2.0, -4.0, 3.0, -2.0]);
        let cf = CrossingFrequency {
            y: 16.0,
            omega: 4.0,
            direction: Direction::Destabilizing,
        };
        let seq = critical_delays(&s, &cf, 6.0).unwrap();
        let expected = [0.55357, 2.12437, 3.69517, 5.26597];
        assert_eq!(seq.delays.len(), 4);
        for (d, e) in seq.delays.iter().zip(expected) {
            assert_abs_diff_eq!(*d, e, epsilon = 1e-5);
        }
        let cf = CrossingFrequency {
            y: 8.0,
            omega: 8f64.sqrt(),
            direction: Direction::Stabilizing,
        };
        let seq = critical_delays(&s, &cf, 6.0).unwrap();
        let expected = [1.11072, 3.33216, 5.55360];
        for (d, e) in seq.delays.iter().zip(expected) {
            assert_abs_diff_eq!(*d, e, epsilon = 1e-5);
        }
    }

    #[test]
    fn delays_are_roots() {
        let s = own([5.0, -4.0, 3.0, -1.0]);
        let w = quasi_polynomial(&s);
        let f = super::super::auxiliary_quadratic(&w).unwrap();
        for cf in super::super::crossing_frequencies(&f).unwrap() {
            let seq = critical_delays(&s, &cf, 10.0).unwrap();
            for t in seq.delays {
                let v = w.evaluate(Complex64::new(0.0, cf.omega), t);
                assert!(v.norm() < 1e-9, "{v} at {t}");
            }
        }
    }
}
