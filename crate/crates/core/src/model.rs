//! Interaction matrices, delay placements and the delay-free baseline.
//!
//! Coefficient vectors are always ordered `[a11, a12, a21, a22]`, with the
//! triad extension appended as `[.., a23, a32, a33]`. In a triad the first
//! and third actors never interact directly, so `a13 = a31 = 0`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// Relative threshold below which trace, determinant and similar
/// quantities are treated as exactly zero.
pub const MARGINAL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("coefficient vector must have 4 (planar) or 7 (triad) entries, got {0}")]
    CoefficientCount(usize),
    #[error("coefficient {name} is not finite")]
    NonFinite { name: &'static str },
    #[error("operation is only defined for planar (2x2) systems")]
    NotPlanar,
    #[error("placement {placement} needs a {expected}-dimensional matrix, got {actual}")]
    DimensionMismatch {
        placement: String,
        expected: usize,
        actual: usize,
    },
    #[error("pure-cross placement requires a11 = a22 = 0")]
    PureCrossSelfTerms,
    #[error("coefficient matrix of the goal model is singular: no unique equilibrium")]
    SingularEquilibrium,
    #[error("unknown placement '{0}'")]
    UnknownPlacement(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriadBlock {
    pub a23: f64,
    pub a32: f64,
    pub a33: f64,
}

/// Real coefficients of the coupled linear system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct InteractionMatrix {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
    pub triad: Option<TriadBlock>,
}

const NAMES: [&str; 7] = ["a11", "a12", "a21", "a22", "a23", "a32", "a33"];

impl InteractionMatrix {
    pub fn planar(a11: f64, a12: f64, a21: f64, a22: f64) -> Result<Self, ModelError> {
        Self::from_coefficients(&[a11, a12, a21, a22])
    }

    #[allow(clippy::too_many_arguments)]
    pub fn triad(a11: f64, a12: f64, a21: f64, a22: f64, a23: f64, a32: f64, a33: f64) -> Result<Self, ModelError> {
        Self::from_coefficients(&[a11, a12, a21, a22, a23, a32, a33])
    }

    pub fn from_coefficients(c: &[f64]) -> Result<Self, ModelError> {
        if c.len() != 4 && c.len() != 7 {
            return Err(ModelError::CoefficientCount(c.len()));
        }
        if let Some(i) = c.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite { name: NAMES[i] });
        }
        let triad = (c.len() == 7).then(|| TriadBlock {
            a23: c[4],
            a32: c[5],
            a33: c[6],
        });
        Ok(Self {
            a11: c[0],
            a12: c[1],
            a21: c[2],
            a22: c[3],
            triad,
        })
    }

    pub fn coefficients(&self) -> Vec<f64> {
        let mut v = vec![self.a11, self.a12, self.a21, self.a22];
        if let Some(t) = self.triad {
            v.extend([t.a23, t.a32, t.a33]);
        }
        v
    }

    pub fn dimension(&self) -> usize {
        if self.triad.is_some() {
            3
        } else {
            2
        }
    }

    pub fn is_planar(&self) -> bool {
        self.triad.is_none()
    }

    /// Entry `a_kl` with 1-based indices; absent triad entries read as zero.
    pub fn entry(&self, k: usize, l: usize) -> f64 {
        let t = self.triad.unwrap_or(TriadBlock {
            a23: 0.0,
            a32: 0.0,
            a33: 0.0,
        });
        match (k, l) {
            (1, 1) => self.a11,
            (1, 2) => self.a12,
            (2, 1) => self.a21,
            (2, 2) => self.a22,
            (2, 3) => t.a23,
            (3, 2) => t.a32,
            (3, 3) => t.a33,
            _ => 0.0,
        }
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22 + self.triad.map_or(0.0, |t| t.a33)
    }

    pub fn determinant(&self) -> f64 {
        match self.triad {
            None => self.a11 * self.a22 - self.a12 * self.a21,
            Some(t) => self.a11 * (self.a22 * t.a33 - t.a23 * t.a32) - self.a12 * self.a21 * t.a33,
        }
    }

    /// Largest absolute coefficient.
    pub fn max_norm(&self) -> f64 {
        self.coefficients().iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn transpose(&self) -> Self {
        let mut t = *self;
        t.a12 = self.a21;
        t.a21 = self.a12;
        if let Some(b) = self.triad {
            t.triad = Some(TriadBlock {
                a23: b.a32,
                a32: b.a23,
                a33: b.a33,
            });
        }
        t
    }

    /// `a12 a21`, the joint strength of the cross reactions.
    pub fn cross_product(&self) -> f64 {
        self.a12 * self.a21
    }

    /// `a11 a22`, the joint strength of the own-state reactions.
    pub fn own_product(&self) -> f64 {
        self.a11 * self.a22
    }
}

impl TryFrom<Vec<f64>> for InteractionMatrix {
    type Error = ModelError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::from_coefficients(&v)
    }
}

impl From<InteractionMatrix> for Vec<f64> {
    fn from(m: InteractionMatrix) -> Self {
        m.coefficients()
    }
}

impl fmt::Display for InteractionMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coefficients().iter().map(|c| format!("{c}")).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Relaxation-to-ideals model: each actor relaxes towards its own ideal
/// state at rate `c` (resp. `e`) and towards the partner at rate `d` (resp. `f`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalModel {
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
    pub r_star: f64,
    pub j_star: f64,
}

/// Shift the goal model to equilibrium-centred coordinates.
///
/// Returns the stationary state `(R_eq, J_eq)` and the homogeneous matrix
/// `[[-c-d, d], [f, -e-f]]` governing the deviations from it.
pub fn homogenize(g: &GoalModel) -> Result<((f64, f64), InteractionMatrix), ModelError> {
    for (name, v) in [
        ("c", g.c),
        ("d", g.d),
        ("e", g.e),
        ("f", g.f),
        ("R*", g.r_star),
        ("J*", g.j_star),
    ] {
        if !v.is_finite() {
            return Err(ModelError::NonFinite { name });
        }
    }
    let m = InteractionMatrix::planar(-g.c - g.d, g.d, g.f, -g.e - g.f)?;
    let det = m.determinant();
    let scale = m.max_norm();
    if det.abs() <= MARGINAL_TOL * scale * scale {
        return Err(ModelError::SingularEquilibrium);
    }
    // m · (R, J) = (-c R*, -e J*)
    let (b1, b2) = (-g.c * g.r_star, -g.e * g.j_star);
    let r = (b1 * m.a22 - m.a12 * b2) / det;
    let j = (m.a11 * b2 - m.a21 * b1) / det;
    Ok(((r + 0.0, j + 0.0), m))
}

/// Which reaction terms carry the common delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DelayPlacement {
    None,
    Own,
    Cross,
    RowR,
    ColR,
    Diagonal,
    AntiDiagonal,
    ThreeOwnLast,
    ThreeCrossLast,
    Full,
    /// Own-state delay plus an undelayed own-state term `a13 r(t)`.
    MixedSelf {
        a13: f64,
    },
    PureCross,
    TriadJIn,
    TriadJOwn,
}

impl DelayPlacement {
    pub const ALL_NAMES: [&'static str; 14] = [
        "none",
        "own",
        "cross",
        "row_r",
        "col_r",
        "diagonal",
        "anti_diagonal",
        "three_own_last",
        "three_cross_last",
        "full",
        "mixed_self",
        "pure_cross",
        "triad_j_in",
        "triad_j_own",
    ];

    /// The `(k, l)` index pairs whose reaction term reads the delayed state.
    pub fn delayed_pairs(&self) -> &'static [(usize, usize)] {
        match self {
            Self::None => &[],
            Self::Own | Self::MixedSelf { .. } => &[(1, 1)],
            Self::Cross | Self::PureCross => &[(1, 2)],
            Self::RowR => &[(1, 1), (1, 2)],
            Self::ColR => &[(1, 1), (2, 1)],
            Self::Diagonal => &[(1, 1), (2, 2)],
            Self::AntiDiagonal => &[(1, 2), (2, 1)],
            Self::ThreeOwnLast => &[(1, 1), (1, 2), (2, 1)],
            Self::ThreeCrossLast => &[(1, 1), (1, 2), (2, 2)],
            Self::Full => &[(1, 1), (1, 2), (2, 1), (2, 2)],
            Self::TriadJIn => &[(2, 1), (2, 3)],
            Self::TriadJOwn => &[(2, 2)],
        }
    }

    pub fn is_delayed(&self, k: usize, l: usize) -> bool {
        self.delayed_pairs().contains(&(k, l))
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::TriadJIn | Self::TriadJOwn => 3,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Own => "own",
            Self::Cross => "cross",
            Self::RowR => "row_r",
            Self::ColR => "col_r",
            Self::Diagonal => "diagonal",
            Self::AntiDiagonal => "anti_diagonal",
            Self::ThreeOwnLast => "three_own_last",
            Self::ThreeCrossLast => "three_cross_last",
            Self::Full => "full",
            Self::MixedSelf { .. } => "mixed_self",
            Self::PureCross => "pure_cross",
            Self::TriadJIn => "triad_j_in",
            Self::TriadJOwn => "triad_j_own",
        }
    }

    /// Parse a placement name; `mixed_self` takes its undelayed coefficient
    /// from `a13`.
    pub fn parse(name: &str, a13: Option<f64>) -> Result<Self, ModelError> {
        let key = name.trim().to_ascii_lowercase().replace('-', "_");
        Ok(match key.as_str() {
            "none" => Self::None,
            "own" => Self::Own,
            "cross" => Self::Cross,
            "row_r" | "rowr" => Self::RowR,
            "col_r" | "colr" => Self::ColR,
            "diagonal" => Self::Diagonal,
            "anti_diagonal" | "antidiagonal" => Self::AntiDiagonal,
            "three_own_last" => Self::ThreeOwnLast,
            "three_cross_last" => Self::ThreeCrossLast,
            "full" => Self::Full,
            "mixed_self" => Self::MixedSelf {
                a13: a13.unwrap_or(0.0),
            },
            "pure_cross" => Self::PureCross,
            "triad_j_in" => Self::TriadJIn,
            "triad_j_own" => Self::TriadJOwn,
            _ => return Err(ModelError::UnknownPlacement(name.to_string())),
        })
    }
}

impl FromStr for DelayPlacement {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s, None)
    }
}

impl fmt::Display for DelayPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MixedSelf { a13 } => write!(f, "mixed_self(a13={a13})"),
            _ => f.write_str(self.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelaySystem {
    pub matrix: InteractionMatrix,
    pub placement: DelayPlacement,
}

pub fn build_system(matrix: InteractionMatrix, placement: DelayPlacement) -> Result<DelaySystem, ModelError> {
    if matrix.dimension() != placement.dimension() {
        return Err(ModelError::DimensionMismatch {
            placement: placement.name().to_string(),
            expected: placement.dimension(),
            actual: matrix.dimension(),
        });
    }
    match placement {
        DelayPlacement::PureCross if matrix.a11 != 0.0 || matrix.a22 != 0.0 => {
            return Err(ModelError::PureCrossSelfTerms)
        }
        DelayPlacement::MixedSelf { a13 } if !a13.is_finite() => return Err(ModelError::NonFinite { name: "a13" }),
        _ => {}
    }
    Ok(DelaySystem { matrix, placement })
}

impl DelaySystem {
    pub fn dimension(&self) -> usize {
        self.matrix.dimension()
    }

    /// The undelayed system matrix (all delays set to zero).
    pub fn baseline_matrix(&self) -> InteractionMatrix {
        let mut m = self.matrix;
        if let DelayPlacement::MixedSelf { a13 } = self.placement {
            m.a11 += a13;
        }
        m
    }

    /// Split the right-hand side into the coefficients acting on the current
    /// state and those acting on the delayed state (row-major 3x3).
    pub fn split_coefficients(&self) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
        let mut now = [[0.0; 3]; 3];
        let mut delayed = [[0.0; 3]; 3];
        let n = self.dimension();
        for k in 1..=n {
            for l in 1..=n {
                let a = self.matrix.entry(k, l);
                if self.placement.is_delayed(k, l) {
                    delayed[k - 1][l - 1] = a;
                } else {
                    now[k - 1][l - 1] = a;
                }
            }
        }
        if let DelayPlacement::MixedSelf { a13 } = self.placement {
            now[0][0] += a13;
        }
        (now, delayed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineVerdict {
    Stable,
    Unstable,
    MarginalCenter,
    MarginalZeroRoot,
}

impl BaselineVerdict {
    pub fn is_marginal(self) -> bool {
        matches!(self, Self::MarginalCenter | Self::MarginalZeroRoot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineStability {
    pub trace: f64,
    pub determinant: f64,
    pub verdict: BaselineVerdict,
}

/// Trace/determinant classification of the planar delay-free system.
pub fn classify_baseline(m: &InteractionMatrix) -> Result<BaselineStability, ModelError> {
    if !m.is_planar() {
        return Err(ModelError::NotPlanar);
    }
    let trace = m.trace();
    let determinant = m.determinant();
    let scale = m.max_norm();
    let verdict = if determinant.abs() <= MARGINAL_TOL * scale * scale {
        BaselineVerdict::MarginalZeroRoot
    } else if trace.abs() <= MARGINAL_TOL * scale && determinant > 0.0 {
        BaselineVerdict::MarginalCenter
    } else if trace < 0.0 && determinant > 0.0 {
        BaselineVerdict::Stable
    } else {
        BaselineVerdict::Unstable
    };
    Ok(BaselineStability {
        trace,
        determinant,
        verdict,
    })
}
