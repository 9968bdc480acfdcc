use crate::charpoly::{quasi_polynomial, ExponentialForm};
use crate::model::{classify_baseline, BaselineVerdict, DelayPlacement, DelaySystem};
use serde::{Deserialize, Serialize};

use super::DEGENERACY_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Own-state delay, own products dominate, unstable without delay: never stable.
    Thm1Case1,
    /// Own-state delay, own products dominate, stable without delay: exactly one switch.
    Thm1Case2,
    /// Own-state delay, cross products dominate: any number of switches possible.
    Thm2Multi,
    /// Cross-state delay, own products dominate: no switches.
    Thm3NoSwitch,
    /// Cross-state delay, cross products dominate: at most one switch.
    Thm3OneSwitch,
    /// Row, column or anti-diagonal delays, or diagonal with zero trace: at most one switch.
    Thm4AtMostOne,
    /// Diagonal delays with a nearly undelayed-looking first row: many switches possible.
    Thm4ArbitraryNearZero,
    /// All four terms delayed: at most one switch.
    Thm5,
    /// Own-state delay with an extra undelayed own-state term.
    MixedSelf,
    /// No delayed term.
    Undelayed,
    NonGeneric,
    IrreducibleNumericOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremClassification {
    pub regime: Regime,
    pub switch_bound: Option<usize>,
}

impl TheoremClassification {
    fn new(regime: Regime, switch_bound: Option<usize>) -> Self {
        Self { regime, switch_bound }
    }
}

pub fn classify_theorem_case(sys: &DelaySystem) -> TheoremClassification {
    use Regime::*;
    let m = &sys.matrix;
    if !m.is_planar() {
        return TheoremClassification::new(IrreducibleNumericOnly, None);
    }
    let Ok(baseline) = classify_baseline(&sys.baseline_matrix()) else {
        return TheoremClassification::new(NonGeneric, None);
    };
    if baseline.verdict.is_marginal() || sys.placement == DelayPlacement::PureCross {
        return TheoremClassification::new(NonGeneric, None);
    }
    let b = m.cross_product().abs();
    let d = m.own_product().abs();
    let scale = m.max_norm().powi(2);
    let tie = (b - d).abs() <= DEGENERACY_TOL * scale;
    let own_dominates = d > b;
    let stable = baseline.verdict == BaselineVerdict::Stable;
    match sys.placement {
        DelayPlacement::None => TheoremClassification::new(Undelayed, Some(0)),
        DelayPlacement::Own if tie => TheoremClassification::new(NonGeneric, None),
        DelayPlacement::Own if own_dominates && stable => TheoremClassification::new(Thm1Case2, Some(1)),
        DelayPlacement::Own if own_dominates => TheoremClassification::new(Thm1Case1, Some(0)),
        DelayPlacement::Own => TheoremClassification::new(Thm2Multi, None),
        DelayPlacement::Cross if tie => TheoremClassification::new(NonGeneric, None),
        DelayPlacement::Cross if own_dominates => TheoremClassification::new(Thm3NoSwitch, Some(0)),
        DelayPlacement::Cross => TheoremClassification::new(Thm3OneSwitch, Some(1)),
        DelayPlacement::RowR | DelayPlacement::ColR | DelayPlacement::AntiDiagonal => {
            TheoremClassification::new(Thm4AtMostOne, Some(1))
        }
        DelayPlacement::Diagonal => {
            let w = quasi_polynomial(sys);
            if matches!(w.form(), ExponentialForm::Single { .. }) {
                TheoremClassification::new(Thm4AtMostOne, Some(1))
            } else if m.a22 < 0.0 && m.cross_product() < 0.0 && m.a22 * m.a22 > 4.0 * b {
                TheoremClassification::new(Thm4ArbitraryNearZero, None)
            } else {
                TheoremClassification::new(IrreducibleNumericOnly, None)
            }
        }
        DelayPlacement::Full => TheoremClassification::new(Thm5, Some(1)),
        DelayPlacement::MixedSelf { .. } => TheoremClassification::new(MixedSelf, None),
        DelayPlacement::ThreeOwnLast | DelayPlacement::ThreeCrossLast => {
            TheoremClassification::new(IrreducibleNumericOnly, None)
        }
        DelayPlacement::PureCross | DelayPlacement::TriadJIn | DelayPlacement::TriadJOwn => {
            TheoremClassification::new(NonGeneric, None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_system, InteractionMatrix};

    fn class(c: [f64; 4], p: DelayPlacement) -> TheoremClassification {
        classify_theorem_case(&build_system(InteractionMatrix::planar(c[0], c[1], c[2], c[3]).unwrap(), p).unwrap())
    }

    #[test]
    fn examples() {
        assert_eq!(
            class([-4.0, 1.0, -2.0, -2.0], DelayPlacement::Own),
            TheoremClassification {
                regime: Regime::Thm1Case2,
                switch_bound: Some(1)
            }
        );
        assert_eq!(
            class([-2.0, -4.0, 3.0, -2.0], DelayPlacement::Own).regime,
            Regime::Thm2Multi
        );
        assert_eq!(
            class([-4.0, 1.0, -2.0, -2.0], DelayPlacement::Cross).switch_bound,
            Some(0)
        );
        assert_eq!(
            class([-1.0, -4.0, 3.0, -2.0], DelayPlacement::Cross).regime,
            Regime::Thm3OneSwitch
        );
        assert_eq!(
            class([-1.0, -4.0, 3.0, -2.0], DelayPlacement::Full).regime,
            Regime::Thm5
        );
        assert_eq!(
            class([3.0, 1.0, -2.0, -2.0], DelayPlacement::Own).regime,
            Regime::Thm1Case1
        );
        assert_eq!(
            class([-1.0, 3.0, -2.0, 1.0], DelayPlacement::Own).regime,
            Regime::NonGeneric
        );
        assert_eq!(
            class([1.0, 1.0, -2.0, -2.0], DelayPlacement::Own).regime,
            Regime::NonGeneric
        );
        assert_eq!(
            class([-1.0, 1.0, -2.0, -2.0], DelayPlacement::Diagonal).regime,
            Regime::IrreducibleNumericOnly
        );
        assert_eq!(
            class([2.0, 1.0, -3.0, -2.0], DelayPlacement::Diagonal).regime,
            Regime::Thm4AtMostOne
        );
        assert_eq!(
            class([-0.1, 1.0, -1.0, -3.0], DelayPlacement::Diagonal).regime,
            Regime::Thm4ArbitraryNearZero
        );
    }
}
