//! Method-of-steps integration of the delayed linear system.
//!
//! Classical RK4 with a step that divides `τ`, so delayed lookups fall on
//! stored grid points or exact half-steps. Half-step values come from cubic
//! Hermite interpolation using the stored derivatives.

use crate::model::DelaySystem;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

/// States whose Euclidean norm passes this are reported as diverged.
pub const OVERFLOW_GUARD: f64 = 1e12;
/// Rate reported when the trajectory decays below the representable range.
pub const DECAYED_RATE: f64 = -1.0e6;

type State = [f64; 3];

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid integration parameter: {0}")]
    InvalidParameter(String),
    #[error("history has {got} components, system has {want}")]
    HistoryDimension { got: usize, want: usize },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum HistoryFunction {
    /// The same state for all of `[−τ, 0]`.
    Constant(Vec<f64>),
    /// Ascending sample times covering `[−τ, 0]` with one state per time.
    Sampled { times: Vec<f64>, states: Vec<Vec<f64>> },
}

impl Default for HistoryFunction {
    fn default() -> Self {
        Self::Constant(vec![1.0, 1.0])
    }
}

impl HistoryFunction {
    pub fn constant_ones(dim: usize) -> Self {
        Self::Constant(vec![1.0; dim])
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::Constant(v) => v.len(),
            Self::Sampled { states, .. } => states.first().map_or(0, Vec::len),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            Self::Constant(v) => Self::Constant(v.iter().map(|x| c * x).collect()),
            Self::Sampled { times, states } => Self::Sampled {
                times: times.clone(),
                states: states.iter().map(|s| s.iter().map(|x| c * x).collect()).collect(),
            },
        }
    }

    fn validate(&self, tau: f64) -> Result<(), SimError> {
        if let Self::Sampled { times, states } = self {
            if times.len() < 2 || times.len() != states.len() {
                return Err(SimError::InvalidParameter(
                    "sampled history needs >= 2 matching samples".into(),
                ));
            }
            if times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(SimError::InvalidParameter("history times must increase".into()));
            }
            let tol = 1e-12 * tau.max(1.0);
            if times[0] > -tau + tol || *times.last().unwrap() < -tol {
                return Err(SimError::InvalidParameter(format!("history must cover [-{tau}, 0]")));
            }
            let d = states[0].len();
            if states.iter().any(|s| s.len() != d) {
                return Err(SimError::InvalidParameter("history states differ in length".into()));
            }
        }
        Ok(())
    }

    /// Value at `t ∈ [−τ, 0]`; sampled tables use cubic Hermite interpolation
    /// with finite-difference slopes.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        match self {
            Self::Constant(v) => v.clone(),
            Self::Sampled { times, states } => {
                let n = times.len();
                let k = match times.partition_point(|&x| x <= t) {
                    0 => 0,
                    p if p >= n => n - 2,
                    p => p - 1,
                };
                let (t0, t1) = (times[k], times[k + 1]);
                let h = t1 - t0;
                let s = ((t - t0) / h).clamp(0.0, 1.0);
                let slope = |i: usize, c: usize| -> f64 {
                    let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                    (states[b][c] - states[a][c]) / (times[b] - times[a])
                };
                let (h00, h10, h01, h11) = hermite_basis(s);
                (0..states[k].len())
                    .map(|c| {
                        h00 * states[k][c] + h10 * h * slope(k, c) + h01 * states[k + 1][c] + h11 * h * slope(k + 1, c)
                    })
                    .collect()
            }
        }
    }
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryStatus {
    Completed,
    /// Stopped at the overflow guard.
    Diverged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dim: usize,
    pub step: f64,
    pub times: Vec<f64>,
    states: Vec<State>,
    derivs: Vec<State>,
    pub status: TrajectoryStatus,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i][..self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.iter().map(move |s| &s[..self.dim])
    }

    pub fn norm(&self, i: usize) -> f64 {
        self.state(i).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Dense output: cubic Hermite between grid points, exact at them.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        let n = self.len();
        if n == 0 || t < self.times[0] || t > self.times[n - 1] {
            return None;
        }
        if n == 1 {
            return Some(self.state(0).to_vec());
        }
        let near = (((t - self.times[0]) / self.step).round() as usize).min(n - 1);
        if self.times[near] == t {
            return Some(self.state(near).to_vec());
        }
        let k = (((t - self.times[0]) / self.step).floor() as usize).min(n - 2);
        let s = (t - self.times[k]) / self.step;
        let (h00, h10, h01, h11) = hermite_basis(s);
        let h = self.step;
        Some(
            (0..self.dim)
                .map(|c| {
                    h00 * self.states[k][c]
                        + h10 * h * self.derivs[k][c]
                        + h01 * self.states[k + 1][c]
                        + h11 * h * self.derivs[k + 1][c]
                })
                .collect(),
        )
    }
}

fn mat_vec(a: &[[f64; 3]; 3], x: &State, dim: usize) -> State {
    let mut out = [0.0; 3];
    for k in 0..dim {
        out[k] = (0..dim).map(|l| a[k][l] * x[l]).sum();
    }
    out
}

fn axpy(x: &State, s: f64, y: &State) -> State {
    [x[0] + s * y[0], x[1] + s * y[1], x[2] + s * y[2]]
}

fn to_state(v: &[f64]) -> State {
    let mut s = [0.0; 3];
    s[..v.len()].copy_from_slice(v);
    s
}

/// Default step: `τ/64`, or `1e-2` without delay.
pub fn default_step(tau: f64) -> f64 {
    if tau > 0.0 {
        tau / 64.0
    } else {
        1e-2
    }
}

/// Default horizon: `max(40, 20τ)`.
pub fn default_horizon(tau: f64) -> f64 {
    40f64.max(20.0 * tau)
}

/// Integrate over `[0, horizon]`. For `τ > 0` the step is reduced to
/// `τ/⌈τ/h⌉`; `τ = 0` is a plain ODE solve of the summed matrix.
pub fn integrate(
    sys: &DelaySystem,
    tau: f64,
    history: &HistoryFunction,
    horizon: f64,
    h: f64,
) -> Result<Trajectory, SimError> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(SimError::InvalidParameter(format!("delay {tau}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(SimError::InvalidParameter(format!("horizon {horizon}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(SimError::InvalidParameter(format!("step {h}")));
    }
    let dim = sys.dimension();
    if history.dimension() != dim {
        return Err(SimError::HistoryDimension {
            got: history.dimension(),
            want: dim,
        });
    }
    history.validate(tau)?;
    let (now, delayed) = sys.split_coefficients();
    let (h, m) = if tau > 0.0 {
        let m = (tau / h).ceil() as usize;
        (tau / m as f64, m)
    } else {
        (h, 0)
    };
    let steps = (horizon / h).round() as usize;
    let x0 = to_state(&history.eval(0.0));
    let mut traj = Trajectory {
        dim,
        step: h,
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        derivs: Vec::with_capacity(steps + 1),
        status: TrajectoryStatus::Completed,
    };
    traj.times.push(0.0);
    traj.states.push(x0);

    if tau == 0.0 {
        let mut a = now;
        for k in 0..3 {
            for l in 0..3 {
                a[k][l] += delayed[k][l];
            }
        }
        let f = |x: &State| mat_vec(&a, x, dim);
        for i in 0..steps {
            let x = traj.states[i];
            let k1 = f(&x);
            traj.derivs.push(k1);
            let k2 = f(&axpy(&x, 0.5 * h, &k1));
            let k3 = f(&axpy(&x, 0.5 * h, &k2));
            let k4 = f(&axpy(&x, h, &k3));
            let next: State = std::array::from_fn(|c| x[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]));
            traj.times.push((i + 1) as f64 * h);
            traj.states.push(next);
            if norm(&next) > OVERFLOW_GUARD || !norm(&next).is_finite() {
                traj.status = TrajectoryStatus::Diverged;
                break;
            }
        }
        let last = *traj.states.last().unwrap();
        traj.derivs.push(f(&last));
        return Ok(traj);
    }

    // past value at grid index j (may be negative) and at j + 1/2
    let past = |traj: &Trajectory, j: isize| -> State {
        if j >= 0 {
            traj.states[j as usize]
        } else {
            to_state(&history.eval(j as f64 * h))
        }
    };
    let past_mid = |traj: &Trajectory, j: isize| -> State {
        if j >= 0 {
            let (xa, xb) = (traj.states[j as usize], traj.states[j as usize + 1]);
            let (fa, fb) = (traj.derivs[j as usize], traj.derivs[j as usize + 1]);
            std::array::from_fn(|c| 0.5 * (xa[c] + xb[c]) + h * (fa[c] - fb[c]) / 8.0)
        } else {
            to_state(&history.eval((j as f64 + 0.5) * h))
        }
    };
    let f = |x: &State, xd: &State| {
        let a = mat_vec(&now, x, dim);
        let b = mat_vec(&delayed, xd, dim);
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    };
    for i in 0..steps {
        let j = i as isize - m as isize;
        let x = traj.states[i];
        let d0 = past(&traj, j);
        let k1 = f(&x, &d0);
        traj.derivs.push(k1);
        // with m == 1 the midpoint of the current step is needed; j + 1 = i is stored
        let dm = past_mid(&traj, j);
        let d1 = past(&traj, j + 1);
        let k2 = f(&axpy(&x, 0.5 * h, &k1), &dm);
        let k3 = f(&axpy(&x, 0.5 * h, &k2), &dm);
        let k4 = f(&axpy(&x, h, &k3), &d1);
        let next: State = std::array::from_fn(|c| x[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]));
        traj.times.push((i + 1) as f64 * h);
        traj.states.push(next);
        if norm(&next) > OVERFLOW_GUARD || !norm(&next).is_finite() {
            traj.status = TrajectoryStatus::Diverged;
            break;
        }
    }
    let n = traj.states.len() - 1;
    let last = traj.states[n];
    let dl = past(&traj, n as isize - m as isize);
    traj.derivs.push(f(&last, &dl));
    Ok(traj)
}

fn norm(x: &State) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    /// Fit through at least eight envelope peaks.
    High,
    /// Too few peaks; the fit runs through every sample of the log-norm.
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GrowthEstimate {
    pub rate: f64,
    pub confidence: Confidence,
    pub peaks: usize,
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Exponential growth rate from the trailing half of the trajectory: slope
/// of a least-squares line through the log of the norm's local maxima.
pub fn growth_rate(traj: &Trajectory) -> GrowthEstimate {
    let n = traj.len();
    if n < 3 {
        return GrowthEstimate {
            rate: 0.0,
            confidence: Confidence::Low,
            peaks: 0,
        };
    }
    let start = n / 2;
    let norms: Vec<f64> = (0..n).map(|i| traj.norm(i)).collect();
    if norms[start..].iter().any(|&v| v < 1e-300) {
        return GrowthEstimate {
            rate: DECAYED_RATE,
            confidence: Confidence::High,
            peaks: 0,
        };
    }
    let peaks: Vec<(f64, f64)> = (start.max(1)..n - 1)
        .filter(|&i| norms[i] > norms[i - 1] && norms[i] >= norms[i + 1])
        .map(|i| (traj.times[i], norms[i].ln()))
        .collect();
    if peaks.len() >= 8 {
        GrowthEstimate {
            rate: least_squares_slope(&peaks),
            confidence: Confidence::High,
            peaks: peaks.len(),
        }
    } else {
        let pts: Vec<(f64, f64)> = (start..n).map(|i| (traj.times[i], norms[i].ln())).collect();
        GrowthEstimate {
            rate: least_squares_slope(&pts),
            confidence: Confidence::Low,
            peaks: peaks.len(),
        }
    }
}

/// Mean spacing of upward zero crossings of the first component over the
/// trailing half; `None` with fewer than two crossings.
pub fn dominant_period(traj: &Trajectory) -> Option<f64> {
    let n = traj.len();
    let start = n / 2;
    let mut crossings = Vec::new();
    for i in start.max(1)..n {
        let (a, b) = (traj.state(i - 1)[0], traj.state(i)[0]);
        if a < 0.0 && b >= 0.0 {
            let t = traj.times[i - 1] + (traj.times[i] - traj.times[i - 1]) * (-a / (b - a));
            crossings.push(t);
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    Some((crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64)
}

/// CSV with header `t,r,j[,p]` and 17 significant digits per value.
pub fn export_trajectory(traj: &Trajectory, path: &Path) -> Result<(), SimError> {
    let io = |source| SimError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    let header = if traj.dim == 3 { "t,r,j,p" } else { "t,r,j" };
    writeln!(out, "{header}").map_err(io)?;
    for (i, t) in traj.times.iter().enumerate() {
        write!(out, "{t:.16e}").map_err(io)?;
        for v in traj.state(i) {
            write!(out, ",{v:.16e}").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}
