use super::SwitchError;
use crate::charpoly::QuasiPolynomial;
use crate::model::{DelayPlacement, DelaySystem};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A zero of `G_τ(ω) = |P(iω)|² − |Q₁(iω) + Q₂(iω)e^{-iωτ}|²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigZero {
    pub omega: f64,
    /// Sign of `dG/dω` across the zero (+1 or −1).
    pub slope_sign: i8,
}

/// Upper end of the frequency bracket: `2·(1 + max|a_kl|)·dimension`.
pub fn trig_scan_ceiling(sys: &DelaySystem) -> f64 {
    2.0 * (1.0 + sys.matrix.max_norm()) * sys.dimension() as f64
}

fn g_value(w: &QuasiPolynomial, omega: f64, tau: f64) -> f64 {
    let l = Complex64::new(0.0, omega);
    let e = Complex64::from_polar(1.0, -omega * tau);
    w.p.eval_complex(l).norm_sqr() - (w.q1.eval_complex(l) + w.q2.eval_complex(l) * e).norm_sqr()
}

/// All sign changes of `G_τ` on `(0, ω_hi]`, refined by bisection. These are
/// the frequencies at which `W(·; τ)` can have a root on the imaginary axis.
pub fn trig_scan(sys: &DelaySystem, w: &QuasiPolynomial, tau: f64) -> Result<Vec<TrigZero>, SwitchError> {
    match sys.placement {
        DelayPlacement::Diagonal | DelayPlacement::ThreeOwnLast | DelayPlacement::ThreeCrossLast => {}
        other => return Err(SwitchError::WrongPlacement(other.name().to_string())),
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(SwitchError::BadWindow { lo: tau, hi: tau });
    }
    let hi = trig_scan_ceiling(sys);
    let step = hi / 4096.0;
    let mut zeros = Vec::new();
    let mut a = 0.0;
    let mut ga = g_value(w, a, tau);
    for k in 1..=4096 {
        let b = step * k as f64;
        let gb = g_value(w, b, tau);
        if ga == 0.0 && a > 0.0 {
            zeros.push(TrigZero {
                omega: a,
                slope_sign: if gb > 0.0 { 1 } else { -1 },
            });
        } else if ga * gb < 0.0 {
            let (mut lo, mut hi_b, mut glo) = (a, b, ga);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi_b);
                if mid <= lo || mid >= hi_b {
                    break;
                }
                let gm = g_value(w, mid, tau);
                if gm == 0.0 {
                    lo = mid;
                    hi_b = mid;
                    break;
                }
                if (gm < 0.0) == (glo < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi_b = mid;
                }
            }
            zeros.push(TrigZero {
                omega: 0.5 * (lo + hi_b),
                slope_sign: if gb > ga { 1 } else { -1 },
            });
        }
        a = b;
        ga = gb;
    }
    Ok(zeros)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charpoly::quasi_polynomial;
    use crate::model::{build_system, InteractionMatrix};
    use approx::assert_abs_diff_eq;

    fn sys(c: [f64; 4], p: DelayPlacement) -> DelaySystem {
        build_system(InteractionMatrix::planar(c[0], c[1], c[2], c[3]).unwrap(), p).unwrap()
    }

    /// Hand expansion for the three-delayed-term placement that leaves `a22` undelayed.
    fn g_three_own_last(c: [f64; 4], omega: f64, tau: f64) -> f64 {
        let [a11, a12, a21, a22] = c;
        let b = a12 * a21;
        let w2 = omega * omega;
        w2 * w2 + (a22 * a22 - a11 * a11) * w2 - (a11 * a22).powi(2) - b * b
            + 2.0 * a11 * b * omega * (omega * tau).sin()
            + 2.0 * a11 * a22 * b * (omega * tau).cos()
    }

    #[test]
    fn matches_hand_expansion() {
        let c = [-2.0, -4.0, 3.0, -2.0];
        let s = sys(c, DelayPlacement::ThreeOwnLast);
        let w = quasi_polynomial(&s);
        for (omega, tau) in [(0.0, 0.0), (0.7, 0.3), (3.1, 1.7), (9.0, 0.05)] {
            assert_abs_diff_eq!(g_value(&w, omega, tau), g_three_own_last(c, omega, tau), epsilon = 1e-9);
        }
        let det = c[0] * c[3] - c[1] * c[2];
        assert_abs_diff_eq!(g_value(&w, 0.0, 0.37), -det * det, epsilon = 1e-12);
    }

    #[test]
    fn zeros_at_zero_delay_match_quartic() {
        let c = [-2.0, -4.0, 3.0, -2.0];
        let s = sys(c, DelayPlacement::ThreeOwnLast);
        let w = quasi_polynomial(&s);
        let zeros = trig_scan(&s, &w, 0.0).unwrap();
        // G_0 is a quadratic in y = ω²: y² + (a22² − a11²) y − det²
        let [a11, a12, a21, a22] = c;
        let det = a11 * a22 - a12 * a21;
        let roots = crate::poly::quadratic_roots(a22 * a22 - a11 * a11, -det * det);
        let positive: Vec<f64> = roots.iter().filter(|z| z.re > 0.0).map(|z| z.re.sqrt()).collect();
        assert_eq!(zeros.len(), positive.len());
        for (z, e) in zeros.iter().zip(positive) {
            assert_abs_diff_eq!(z.omega, e, epsilon = 1e-9);
            assert_eq!(z.slope_sign, 1);
        }
    }

    #[test]
    fn negative_start_forces_a_zero() {
        let s = sys([0.5, -1.5, 2.0, -0.3], DelayPlacement::ThreeCrossLast);
        let w = quasi_polynomial(&s);
        for tau in [0.0, 0.4, 2.0] {
            if g_value(&w, 0.0, tau) < 0.0 {
                assert!(!trig_scan(&s, &w, tau).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn wrong_placement() {
        let s = sys([0.5, -1.5, 2.0, -0.3], DelayPlacement::Own);
        assert!(trig_scan(&s, &quasi_polynomial(&s), 0.0).is_err());
    }
}
