use super::{CrossingFrequency, Direction, SwitchError, DEGENERACY_TOL};
use crate::charpoly::QuasiPolynomial;
use crate::poly::RealPoly;
use serde::{Deserialize, Serialize};

/// `F(y) = c2 y² + c1 y + c0` with `c2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryQuadratic {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub discriminant: f64,
}

impl AuxiliaryQuadratic {
    pub fn eval(&self, y: f64) -> f64 {
        (self.c2 * y + self.c1) * y + self.c0
    }

    pub fn slope(&self, y: f64) -> f64 {
        2.0 * self.c2 * y + self.c1
    }
}

/// `|R(iω)|²` written as a polynomial in `y = ω²`.
fn modulus_squared_on_axis(r: &RealPoly) -> RealPoly {
    // R(iω) = E(y) + iω O(y)
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for (k, &c) in r.coeffs().iter().enumerate() {
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            even.push(sign * c);
        } else {
            odd.push(sign * c);
        }
    }
    let e = RealPoly::new(even);
    let o = RealPoly::new(odd);
    e.mul(&e).add(&RealPoly::linear(1.0, 0.0).mul(&o.mul(&o)))
}

/// `|P(i√y)|² − |Q(i√y)|²` for the single delayed coefficient `Q`, of any degree.
pub fn auxiliary_polynomial(w: &QuasiPolynomial) -> Result<RealPoly, SwitchError> {
    let (q, _) = w
        .single_delay_term()
        .ok_or_else(|| SwitchError::NotSingleExponential(w.placement.name().to_string()))?;
    Ok(modulus_squared_on_axis(&w.p).add(&modulus_squared_on_axis(q).scale(-1.0)))
}

pub fn auxiliary_quadratic(w: &QuasiPolynomial) -> Result<AuxiliaryQuadratic, SwitchError> {
    if w.dimension() != 2 {
        return Err(SwitchError::NotPlanar);
    }
    if w.q1.is_zero() && w.q2.is_zero() {
        return Err(SwitchError::DelayFree);
    }
    let f = auxiliary_polynomial(w)?;
    let (c2, c1, c0) = (f.coeff(2), f.coeff(1), f.coeff(0));
    Ok(AuxiliaryQuadratic {
        c2,
        c1,
        c0,
        discriminant: c1 * c1 - 4.0 * c2 * c0,
    })
}

/// Positive zeros of `F`, sorted by `y`, each tagged with the sign of `F′`.
pub fn crossing_frequencies(f: &AuxiliaryQuadratic) -> Result<Vec<CrossingFrequency>, SwitchError> {
    let scale = f.c1 * f.c1 + 4.0 * f.c0.abs();
    let vertex = -f.c1 / (2.0 * f.c2);
    if f.discriminant.abs() <= DEGENERACY_TOL * scale && vertex > 0.0 {
        return Err(SwitchError::NonGeneric(format!(
            "auxiliary discriminant {:.3e} is zero within tolerance (double root at y = {vertex})",
            f.discriminant
        )));
    }
    if f.discriminant < 0.0 {
        return Ok(Vec::new());
    }
    let roots = crate::poly::quadratic_roots(f.c1 / f.c2, f.c0 / f.c2);
    let mut out: Vec<CrossingFrequency> = roots
        .iter()
        .map(|z| z.re)
        .filter(|&y| y > 0.0)
        .map(|y| CrossingFrequency {
            y,
            omega: y.sqrt(),
            direction: if f.slope(y) > 0.0 {
                Direction::Destabilizing
            } else {
                Direction::Stabilizing
            },
        })
        .collect();
    out.sort_by(|a, b| a.y.total_cmp(&b.y));
    if out.len() == 2 {
        // the slope sign is unreliable right at a near-double root; fix it by order
        out[0].direction = Direction::Stabilizing;
        out[1].direction = Direction::Destabilizing;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charpoly::quasi_polynomial;
    use crate::model::{build_system, DelayPlacement, InteractionMatrix};
    use approx::assert_abs_diff_eq;

    fn aux(c: [f64; 4]) -> AuxiliaryQuadratic {
        let m = InteractionMatrix::planar(c[0], c[1], c[2], c[3]).unwrap();
        auxiliary_quadratic(&quasi_polynomial(&build_system(m, DelayPlacement::Own).unwrap())).unwrap()
    }

    #[test]
    fn own_examples() {
        let f = aux([-4.0, 1.0, -2.0, -2.0]);
        assert_eq!((f.c2, f.c1, f.c0, f.discriminant), (1.0, -16.0, -60.0, 496.0));
        let f = aux([-2.0, -4.0, 3.0, -2.0]);
        assert_eq!((f.c1, f.c0, f.discriminant), (-24.0, 128.0, 64.0));
        let f = aux([-1.0, 3.0, -1.0, -2.0]);
        assert_eq!((f.c1, f.c0, f.discriminant), (-3.0, 5.0, -11.0));
    }

    #[test]
    fn own_matches_closed_form_coefficients() {
        let (a11, a12, a21, a22) = (1.7, -0.4, 2.9, -3.1);
        let f = aux([a11, a12, a21, a22]);
        let b = a12 * a21;
        assert_abs_diff_eq!(f.c1, a22 * a22 - a11 * a11 + 2.0 * b, epsilon = 1e-12);
        assert_abs_diff_eq!(f.c0, b * b - (a11 * a22).powi(2), epsilon = 1e-12);
        let delta = (a11 * a11 + a22 * a22).powi(2) + 4.0 * b * (a22 * a22 - a11 * a11);
        assert_abs_diff_eq!(f.discriminant, delta, epsilon = 1e-9);
    }

    #[test]
    fn frequencies_and_directions() {
        let f = aux([-4.0, 1.0, -2.0, -2.0]);
        let cf = crossing_frequencies(&f).unwrap();
        assert_eq!(cf.len(), 1);
        assert_abs_diff_eq!(cf[0].y, 8.0 + 2.0 * 31f64.sqrt(), epsilon = 1e-12);
        assert_eq!(cf[0].direction, Direction::Destabilizing);

        let cf = crossing_frequencies(&aux([-2.0, -4.0, 3.0, -2.0])).unwrap();
        assert_eq!(cf.len(), 2);
        assert_abs_diff_eq!(cf[0].y, 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cf[1].y, 16.0, epsilon = 1e-12);
        assert_eq!(cf[0].direction, Direction::Stabilizing);
        assert_eq!(cf[1].direction, Direction::Destabilizing);

        assert!(crossing_frequencies(&aux([-1.0, 3.0, -1.0, -2.0])).unwrap().is_empty());
    }

    #[test]
    fn double_root_is_non_generic() {
        let f = AuxiliaryQuadratic {
            c2: 1.0,
            c1: -4.0,
            c0: 4.0,
            discriminant: 0.0,
        };
        assert!(matches!(crossing_frequencies(&f), Err(SwitchError::NonGeneric(_))));
        // a double root at negative y never produces a crossing
        let f = AuxiliaryQuadratic {
            c2: 1.0,
            c1: 4.0,
            c0: 4.0,
            discriminant: 0.0,
        };
        assert!(crossing_frequencies(&f).unwrap().is_empty());
    }

    #[test]
    fn identity_holds_pointwise() {
        let m = InteractionMatrix::planar(0.3, -2.0, 1.5, -0.8).unwrap();
        for p in [
            DelayPlacement::Cross,
            DelayPlacement::RowR,
            DelayPlacement::AntiDiagonal,
        ] {
            let w = quasi_polynomial(&build_system(m, p).unwrap());
            let f = auxiliary_quadratic(&w).unwrap();
            let (q, _) = w.single_delay_term().unwrap();
            for y in [0.0, 0.7, 3.0, 40.0] {
                let l = num_complex::Complex64::new(0.0, f64::sqrt(y));
                let direct = w.p.eval_complex(l).norm_sqr() - q.eval_complex(l).norm_sqr();
                assert_abs_diff_eq!(f.eval(y), direct, epsilon = 1e-9 * (1.0 + direct.abs()));
            }
        }
    }

    #[test]
    fn two_exponentials_rejected() {
        let m = InteractionMatrix::planar(0.3, -2.0, 1.5, -0.8).unwrap();
        let w = quasi_polynomial(&build_system(m, DelayPlacement::ThreeOwnLast).unwrap());
        assert!(matches!(
            auxiliary_quadratic(&w),
            Err(SwitchError::NotSingleExponential(_))
        ));
    }
}
