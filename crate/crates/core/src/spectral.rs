//! Argument-principle root counting for quasi-polynomials at a fixed delay.
//!
//! The count of zeros inside a rectangle is the winding number of `W` along
//! its boundary. Edges are sampled densely enough that the exponential's
//! phase cannot alias, then subdivided wherever the phase of `W` jumps by
//! more than π/4 between neighbours.

use crate::charpoly::QuasiPolynomial;
use crate::model::BaselineVerdict;
use crate::switch_analysis::SwitchReport;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI, TAU};
use thiserror::Error;

/// Roots with `|Re λ|` below this are reported as marginal.
pub const AXIS_MARGIN: f64 = 1e-7;
const NEAR_ROOT: f64 = 1e-10;
const MAX_NUDGES: u32 = 8;
const MAX_DEPTH: u32 = 40;
const SAMPLE_BUDGET: usize = 20_000_000;
/// Largest `|e^{-λτ}|` tolerated when sizing regions left of the axis.
const MAX_EXP_GAIN: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid search region [{re_lo}, {re_hi}] x [{im_lo}, {im_hi}]")]
    InvalidRegion {
        re_lo: f64,
        re_hi: f64,
        im_lo: f64,
        im_hi: f64,
    },
    #[error("negative or non-finite delay {0}")]
    BadDelay(f64),
    #[error("root count indeterminate at tau = {tau}: {reason}")]
    Indeterminate { tau: f64, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRegion {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl SearchRegion {
    pub fn new(re_lo: f64, re_hi: f64, im_lo: f64, im_hi: f64) -> Result<Self, SpectralError> {
        let ok = [re_lo, re_hi, im_lo, im_hi].iter().all(|v| v.is_finite()) && re_lo < re_hi && im_lo < im_hi;
        if ok {
            Ok(Self {
                re_lo,
                re_hi,
                im_lo,
                im_hi,
            })
        } else {
            Err(SpectralError::InvalidRegion {
                re_lo,
                re_hi,
                im_lo,
                im_hi,
            })
        }
    }

    /// Push every side outward by `frac` of its own coordinate (at least a tiny absolute step).
    fn expanded(&self, frac: f64) -> Self {
        let push = |v: f64| frac * v.abs().max(1e-6);
        Self {
            re_lo: self.re_lo - push(self.re_lo),
            re_hi: self.re_hi + push(self.re_hi),
            im_lo: self.im_lo - push(self.im_lo),
            im_hi: self.im_hi + push(self.im_hi),
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_lo, self.im_lo),
            Complex64::new(self.re_hi, self.im_lo),
            Complex64::new(self.re_hi, self.im_hi),
            Complex64::new(self.re_lo, self.im_hi),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralState {
    Stable,
    Unstable,
    /// A root lies within the axis margin.
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralVerdict {
    /// Roots with `Re λ > AXIS_MARGIN`, with multiplicity.
    pub count: usize,
    pub rightmost: Option<Complex64>,
    pub state: SpectralState,
}

fn check_tau(tau: f64) -> Result<(), SpectralError> {
    if tau >= 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(SpectralError::BadDelay(tau))
    }
}

/// Radius containing every root with `Re λ ≥ s` (Fujiwara-type bound on the
/// monic part, with the exponentials bounded by `e^{-sτ}`).
pub fn root_bound(w: &QuasiPolynomial, tau: f64, s: f64) -> f64 {
    let n = w.dimension();
    if n == 0 {
        return 0.0;
    }
    let g = (-s * tau).exp();
    let c = w.weighted_coefficients(g);
    let r = c
        .iter()
        .enumerate()
        .map(|(k, &ck)| ck.powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max);
    2.0 * r
}

enum Winding {
    Count(i64),
    NearRoot,
}

struct Integrator<'a> {
    w: &'a QuasiPolynomial,
    tau: f64,
    n: i32,
    samples: usize,
}

impl Integrator<'_> {
    fn value(&mut self, z: Complex64) -> Result<Complex64, bool> {
        self.samples += 1;
        let v = self.w.evaluate(z, self.tau);
        let scale = 1.0 + z.norm().powi(self.n);
        if v.norm() < NEAR_ROOT * scale || !v.re.is_finite() || !v.im.is_finite() {
            return Err(true);
        }
        Ok(v)
    }

    /// Phase change of `W` from `a` to `b` (values `wa`, `wb`), subdividing
    /// until each step turns by less than π/4.
    fn segment(&mut self, a: Complex64, b: Complex64, wa: Complex64, wb: Complex64, depth: u32) -> Result<f64, bool> {
        let d = (wb / wa).arg();
        if d.abs() <= FRAC_PI_4 {
            return Ok(d);
        }
        if depth >= MAX_DEPTH || self.samples > SAMPLE_BUDGET {
            return Err(false);
        }
        let m = 0.5 * (a + b);
        let wm = self.value(m)?;
        Ok(self.segment(a, m, wa, wm, depth + 1)? + self.segment(m, b, wm, wb, depth + 1)?)
    }

    fn winding(&mut self, region: &SearchRegion, density: u32) -> Result<Winding, SpectralError> {
        let corners = region.corners();
        let mult = if self.w.q2.is_zero() { 1.0 } else { 2.0 };
        let perimeter = 2.0 * ((region.re_hi - region.re_lo) + (region.im_hi - region.im_lo));
        let h_exp = if self.tau > 0.0 {
            (PI / 8.0) / (mult * self.tau)
        } else {
            f64::INFINITY
        };
        let h0 = h_exp.min(perimeter / 256.0) / f64::from(1u32 << density);
        let mut total = 0.0;
        for e in 0..4 {
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            let steps = ((b - a).norm() / h0).ceil().max(1.0) as usize;
            let mut za = a;
            let mut wa = match self.value(za) {
                Ok(v) => v,
                Err(true) => return Ok(Winding::NearRoot),
                Err(false) => unreachable!(),
            };
            for k in 1..=steps {
                let zb = a + (b - a) * (k as f64 / steps as f64);
                let wb = match self.value(zb) {
                    Ok(v) => v,
                    Err(_) => return Ok(Winding::NearRoot),
                };
                match self.segment(za, zb, wa, wb, 0) {
                    Ok(d) => total += d,
                    Err(true) => return Ok(Winding::NearRoot),
                    Err(false) => {
                        return Err(SpectralError::Indeterminate {
                            tau: self.tau,
                            reason: "edge subdivision budget exhausted".into(),
                        })
                    }
                }
                za = zb;
                wa = wb;
            }
        }
        let turns = total / TAU;
        let rounded = turns.round();
        if (turns - rounded).abs() > 0.05 {
            return Err(SpectralError::Indeterminate {
                tau: self.tau,
                reason: format!("winding {turns} is not an integer"),
            });
        }
        Ok(Winding::Count(rounded as i64))
    }
}

/// Winding count with a fixed sampling density (no nudging); `None` when the
/// boundary passes too close to a root.
pub fn winding_count(
    w: &QuasiPolynomial,
    tau: f64,
    region: &SearchRegion,
    density: u32,
) -> Result<Option<usize>, SpectralError> {
    check_tau(tau)?;
    let mut it = Integrator {
        w,
        tau,
        n: w.dimension() as i32,
        samples: 0,
    };
    match it.winding(region, density)? {
        Winding::Count(c) if c >= 0 => Ok(Some(c as usize)),
        Winding::Count(c) => Err(SpectralError::Indeterminate {
            tau,
            reason: format!("negative winding {c}"),
        }),
        Winding::NearRoot => Ok(None),
    }
}

/// Number of zeros of `W(·; τ)` inside `region`, with multiplicity. A boundary
/// that grazes a root is pushed outward by 1% and retried.
pub fn count_roots(w: &QuasiPolynomial, tau: f64, region: &SearchRegion) -> Result<usize, SpectralError> {
    check_tau(tau)?;
    let mut r = *region;
    for _ in 0..=MAX_NUDGES {
        let first = winding_count(w, tau, &r, 0);
        match first {
            Ok(Some(c)) => return Ok(c),
            Ok(None) => r = r.expanded(0.01),
            Err(SpectralError::Indeterminate { .. }) => {
                // one retry at double density before giving up on this boundary
                match winding_count(w, tau, &r, 1)? {
                    Some(c) => return Ok(c),
                    None => r = r.expanded(0.01),
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(SpectralError::Indeterminate {
        tau,
        reason: "boundary stays on a root after nudging".into(),
    })
}

/// Region holding every root with `Re λ ≥ s`.
fn right_region(w: &QuasiPolynomial, tau: f64, s: f64) -> Option<SearchRegion> {
    let r = root_bound(w, tau, s) + 1.0;
    (s < r).then(|| SearchRegion {
        re_lo: s,
        re_hi: r,
        im_lo: -r,
        im_hi: r,
    })
}

/// Number of roots with `Re λ > s`.
pub fn count_right_of(w: &QuasiPolynomial, tau: f64, s: f64) -> Result<usize, SpectralError> {
    match right_region(w, tau, s) {
        Some(region) => count_roots(w, tau, &region),
        None => Ok(0),
    }
}

/// Stability state without locating the rightmost root.
pub fn stability_at(w: &QuasiPolynomial, tau: f64) -> Result<(usize, SpectralState), SpectralError> {
    let above = count_right_of(w, tau, AXIS_MARGIN)?;
    let near = count_right_of(w, tau, -AXIS_MARGIN)?;
    let state = if near != above {
        SpectralState::Marginal
    } else if above == 0 {
        SpectralState::Stable
    } else {
        SpectralState::Unstable
    };
    Ok((above, state))
}

/// Right half-plane root count, stability state and the refined rightmost root.
pub fn unstable_count(w: &QuasiPolynomial, tau: f64) -> Result<SpectralVerdict, SpectralError> {
    let (count, state) = stability_at(w, tau)?;
    let rightmost = rightmost_root(w, tau)?;
    Ok(SpectralVerdict {
        count,
        rightmost,
        state,
    })
}

/// Newton iteration on `W(·; τ)` with a secant fallback when the derivative
/// stalls; `None` if it fails to converge in 50 steps.
pub fn refine_root(w: &QuasiPolynomial, tau: f64, seed: Complex64) -> Option<Complex64> {
    let mut z = seed;
    let mut prev: Option<(Complex64, Complex64)> = None;
    for _ in 0..50 {
        let f = w.evaluate(z, tau);
        let df = w.derivative(z, tau);
        let step = if df.norm() > 1e-300 {
            f / df
        } else if let Some((zp, fp)) = prev {
            let slope = (f - fp) / (z - zp);
            if slope.norm() == 0.0 {
                return None;
            }
            f / slope
        } else {
            return None;
        };
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        prev = Some((z, f));
        z -= step;
        if step.norm() <= 1e-14 * (1.0 + z.norm()) {
            return Some(z);
        }
    }
    let f = w.evaluate(z, tau).norm();
    (f <= 1e-9 * (1.0 + z.norm().powi(w.dimension() as i32))).then_some(z)
}

/// Rightmost characteristic root: bisection on the real shift of the
/// counting region, then on the imaginary extent, then Newton polishing.
/// `None` when no root lies in the range where regions can be sized.
pub fn rightmost_root(w: &QuasiPolynomial, tau: f64) -> Result<Option<Complex64>, SpectralError> {
    check_tau(tau)?;
    if tau == 0.0 || (w.q1.is_zero() && w.q2.is_zero()) {
        let poly = w.tau_zero_polynomial();
        return Ok(poly
            .roots()
            .into_iter()
            .max_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))));
    }
    let mult = if w.q2.is_zero() { 1.0 } else { 2.0 };
    let s_floor = -MAX_EXP_GAIN.ln() / (mult * tau);
    let (mut lo, mut hi);
    if count_right_of(w, tau, AXIS_MARGIN)? > 0 {
        lo = AXIS_MARGIN;
        hi = root_bound(w, tau, AXIS_MARGIN) + 1.0;
    } else {
        hi = AXIS_MARGIN;
        let mut s = -1.0_f64;
        loop {
            if s < s_floor {
                s = s_floor;
            }
            if count_right_of(w, tau, s)? > 0 {
                lo = s;
                break;
            }
            if s <= s_floor {
                return Ok(None);
            }
            hi = s;
            s *= 2.0;
        }
    }
    while hi - lo > 1e-6 * lo.abs().max(1.0) {
        let mid = 0.5 * (lo + hi);
        if count_right_of(w, tau, mid)? > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = root_bound(w, tau, lo) + 1.0;
    let (mut a, mut b) = (-r, r);
    // roots come in conjugate pairs: look in the upper half first
    let region = |ia: f64, ib: f64| SearchRegion {
        re_lo: lo,
        re_hi: r,
        im_lo: ia,
        im_hi: ib,
    };
    while b - a > 1e-6 * r.max(1.0) {
        let mid = 0.5 * (a + b) + 1e-9 * r;
        if count_roots(w, tau, &region(mid, b))? > 0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let seed = Complex64::new(0.5 * (lo + hi), 0.5 * (a + b));
    let polished = refine_root(w, tau, seed).filter(|z| (z - seed).norm() <= 1e-3 * (1.0 + seed.norm()));
    let mut z = polished.unwrap_or(seed);
    if z.im.abs() < 1e-9 * r {
        z.im = 0.0;
    }
    Ok(Some(z))
}

/// Frequency of a root sitting on (or within `δ` of) the imaginary axis, if any.
pub fn axis_crossing_frequency(w: &QuasiPolynomial, tau: f64) -> Result<Option<f64>, SpectralError> {
    check_tau(tau)?;
    for delta in [1e-4, 1e-3, 1e-2] {
        let r = root_bound(w, tau, -delta) + 1.0;
        let strip = |ia: f64, ib: f64| SearchRegion {
            re_lo: -delta,
            re_hi: delta,
            im_lo: ia,
            im_hi: ib,
        };
        let (mut a, mut b) = (1e-9, r);
        if count_roots(w, tau, &strip(a, b))? == 0 {
            continue;
        }
        while b - a > 1e-7 * r.max(1.0) {
            let mid = 0.5 * (a + b);
            if count_roots(w, tau, &strip(mid, b))? > 0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        let seed = Complex64::new(0.0, 0.5 * (a + b));
        let z = refine_root(w, tau, seed)
            .filter(|z| (z - seed).norm() < 10.0 * delta)
            .unwrap_or(seed);
        return Ok(Some(z.im.abs()));
    }
    Ok(None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleCheck {
    pub tau: f64,
    pub predicted_unstable: usize,
    pub oracle_count: usize,
    pub oracle_state: SpectralState,
}

impl SampleCheck {
    pub fn stability_agrees(&self) -> bool {
        match self.oracle_state {
            SpectralState::Stable => self.predicted_unstable == 0,
            SpectralState::Unstable => self.predicted_unstable > 0,
            SpectralState::Marginal => false,
        }
    }

    pub fn count_agrees(&self) -> bool {
        self.oracle_state != SpectralState::Marginal && self.oracle_count == self.predicted_unstable
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCheck {
    pub samples: Vec<SampleCheck>,
    pub first_disagreement: Option<SampleCheck>,
}

impl ReportCheck {
    pub fn agrees(&self) -> bool {
        self.first_disagreement.is_none()
    }
}

/// Compare a switch report against the oracle at both window ends and the
/// midpoint of every gap between events.
pub fn verify_report(report: &SwitchReport, w: &QuasiPolynomial) -> Result<ReportCheck, SpectralError> {
    verify_report_at(report, w, &report.sample_points())
}

pub fn verify_report_at(
    report: &SwitchReport,
    w: &QuasiPolynomial,
    taus: &[f64],
) -> Result<ReportCheck, SpectralError> {
    let marginal_start = report
        .baseline
        .is_some_and(|b| b.verdict == BaselineVerdict::MarginalCenter);
    let mut samples = Vec::new();
    let mut first = None;
    for &tau in taus {
        if marginal_start && tau <= report.tau_min {
            continue;
        }
        let Some(predicted) = report.unstable_count_at(tau) else {
            continue;
        };
        let (count, state) = stability_at(w, tau)?;
        let check = SampleCheck {
            tau,
            predicted_unstable: predicted,
            oracle_count: count,
            oracle_state: state,
        };
        if first.is_none() && !check.stability_agrees() {
            first = Some(check);
        }
        samples.push(check);
    }
    Ok(ReportCheck {
        samples,
        first_disagreement: first,
    })
}
