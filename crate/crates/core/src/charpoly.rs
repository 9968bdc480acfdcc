//! Characteristic quasi-polynomials `W(λ; τ) = P(λ) + Q₁(λ)e^{-λτ} + Q₂(λ)e^{-2λτ}`.

use crate::model::{DelayPlacement, DelaySystem};
use crate::poly::RealPoly;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiPolynomial {
    /// Delay-free part, monic with degree equal to the system dimension.
    pub p: RealPoly,
    /// Coefficient of `e^{-λτ}`.
    pub q1: RealPoly,
    /// Coefficient of `e^{-2λτ}`.
    pub q2: RealPoly,
    pub placement: DelayPlacement,
}

/// How the exponentials enter a quasi-polynomial, which decides the
/// analysis route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum ExponentialForm {
    /// No exponential survives: the delay has no effect on the spectrum.
    DelayFree,
    /// `P + Q e^{-mλτ}` with a single exponential of multiplicity `m`.
    Single { multiplier: u32 },
    /// `λ² + cλe^{-λτ} + d e^{-2λτ}`, solvable through `z = λe^{λτ}`.
    ZForm { c: f64, d: f64 },
    /// Two exponentials that do not reduce.
    Irreducible,
}

/// Polynomial in the formal variable `E = e^{-λτ}` with polynomial
/// coefficients in `λ`; index = power of `E`.
#[derive(Debug, Clone)]
struct EPoly(Vec<RealPoly>);

impl EPoly {
    fn entry(lambda_coef: f64, constant: f64, delayed: bool) -> Self {
        let base = RealPoly::linear(lambda_coef, constant);
        if delayed {
            Self(vec![RealPoly::zero(), base])
        } else {
            Self(vec![base])
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = vec![RealPoly::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Self(out)
    }

    fn sub(&self, other: &Self) -> Self {
        let n = self.0.len().max(other.0.len());
        Self(
            (0..n)
                .map(|k| {
                    let a = self.0.get(k).cloned().unwrap_or_default();
                    let b = other.0.get(k).cloned().unwrap_or_default();
                    a.add(&b.scale(-1.0))
                })
                .collect(),
        )
    }

    fn term(&self, k: usize) -> RealPoly {
        self.0.get(k).cloned().unwrap_or_default()
    }
}

/// Build the characteristic quasi-polynomial of a validated system.
pub fn quasi_polynomial(sys: &DelaySystem) -> QuasiPolynomial {
    let m = &sys.matrix;
    let placement = sys.placement;
    let lam = RealPoly::linear(1.0, 0.0);
    match placement {
        DelayPlacement::TriadJIn => {
            let t = m.triad.expect("triad placement on validated triad system");
            let l11 = RealPoly::linear(1.0, -m.a11);
            let l22 = RealPoly::linear(1.0, -m.a22);
            let l33 = RealPoly::linear(1.0, -t.a33);
            let p = l11.mul(&l22).mul(&l33);
            let q1 = l33.scale(m.a12 * m.a21).add(&l11.scale(t.a23 * t.a32)).scale(-1.0);
            QuasiPolynomial {
                p,
                q1,
                q2: RealPoly::zero(),
                placement,
            }
        }
        DelayPlacement::TriadJOwn => {
            let t = m.triad.expect("triad placement on validated triad system");
            let l11 = RealPoly::linear(1.0, -m.a11);
            let l33 = RealPoly::linear(1.0, -t.a33);
            let p = l11
                .mul(&l33)
                .mul(&lam)
                .add(&l11.scale(-t.a23 * t.a32))
                .add(&l33.scale(-m.a12 * m.a21));
            let q1 = l11.mul(&l33).scale(-m.a22);
            QuasiPolynomial {
                p,
                q1,
                q2: RealPoly::zero(),
                placement,
            }
        }
        _ => {
            // det [[λ - a11 - a13, -a12], [-a21, λ - a22]] with delayed entries carrying E
            let a13 = match placement {
                DelayPlacement::MixedSelf { a13 } => a13,
                _ => 0.0,
            };
            let d = |k, l| placement.is_delayed(k, l);
            let mut r11 = EPoly::entry(1.0, 0.0, false);
            r11 = r11.sub(&EPoly::entry(0.0, m.a11, d(1, 1)));
            if a13 != 0.0 {
                r11 = r11.sub(&EPoly::entry(0.0, a13, false));
            }
            let r22 = EPoly::entry(1.0, 0.0, false).sub(&EPoly::entry(0.0, m.a22, d(2, 2)));
            let r12 = EPoly::entry(0.0, m.a12, d(1, 2));
            let r21 = EPoly::entry(0.0, m.a21, d(2, 1));
            let w = r11.mul(&r22).sub(&r12.mul(&r21));
            QuasiPolynomial {
                p: w.term(0),
                q1: w.term(1),
                q2: w.term(2),
                placement,
            }
        }
    }
}

impl QuasiPolynomial {
    pub fn dimension(&self) -> usize {
        self.p.degree().unwrap_or(0)
    }

    pub fn evaluate(&self, lambda: Complex64, tau: f64) -> Complex64 {
        let e = (-lambda * tau).exp();
        self.p.eval_complex(lambda) + e * (self.q1.eval_complex(lambda) + e * self.q2.eval_complex(lambda))
    }

    /// `dW/dλ` at fixed `τ`.
    pub fn derivative(&self, lambda: Complex64, tau: f64) -> Complex64 {
        let e = (-lambda * tau).exp();
        let q1 = self.q1.eval_complex(lambda);
        let dq1 = self.q1.derivative().eval_complex(lambda);
        let q2 = self.q2.eval_complex(lambda);
        let dq2 = self.q2.derivative().eval_complex(lambda);
        self.p.derivative().eval_complex(lambda) + e * (dq1 - q1 * tau) + e * e * (dq2 - q2 * (2.0 * tau))
    }

    /// `dW/dτ` at fixed `λ`.
    pub fn tau_derivative(&self, lambda: Complex64, tau: f64) -> Complex64 {
        let e = (-lambda * tau).exp();
        -lambda * e * (self.q1.eval_complex(lambda) + 2.0 * e * self.q2.eval_complex(lambda))
    }

    /// `P + Q₁ + Q₂`: the characteristic polynomial of the undelayed system.
    pub fn tau_zero_polynomial(&self) -> RealPoly {
        self.p.add(&self.q1).add(&self.q2)
    }

    pub fn form(&self) -> ExponentialForm {
        match (self.q1.is_zero(), self.q2.is_zero()) {
            (true, true) => ExponentialForm::DelayFree,
            (false, true) => ExponentialForm::Single { multiplier: 1 },
            (true, false) => ExponentialForm::Single { multiplier: 2 },
            (false, false) => {
                let p_is_lambda_sq = self.p.coeffs() == [0.0, 0.0, 1.0];
                let q1_is_pure_linear = self.q1.degree() == Some(1) && self.q1.coeff(0) == 0.0;
                let q2_is_constant = self.q2.degree() == Some(0);
                if p_is_lambda_sq && q1_is_pure_linear && q2_is_constant {
                    ExponentialForm::ZForm {
                        c: self.q1.coeff(1),
                        d: self.q2.coeff(0),
                    }
                } else {
                    ExponentialForm::Irreducible
                }
            }
        }
    }

    /// The single delayed coefficient and its delay multiplicity, if the
    /// quasi-polynomial has exactly one exponential.
    pub fn single_delay_term(&self) -> Option<(&RealPoly, u32)> {
        match self.form() {
            ExponentialForm::Single { multiplier: 1 } => Some((&self.q1, 1)),
            ExponentialForm::Single { multiplier: 2 } => Some((&self.q2, 2)),
            _ => None,
        }
    }

    /// Sum of absolute values of every non-leading coefficient, weighting the
    /// delayed parts by the bound `g` on `|e^{-λτ}|`.
    pub fn weighted_coefficients(&self, g: f64) -> Vec<f64> {
        let n = self.dimension();
        (0..n)
            .map(|k| self.p.coeff(k).abs() + g * self.q1.coeff(k).abs() + g * g * self.q2.coeff(k).abs())
            .collect()
    }
}
