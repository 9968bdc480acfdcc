//! Randomised invariants of the model, the quasi-polynomials, the switch
//! analysis, the root counter and the integrator.

use delayswitch::charpoly::{quasi_polynomial, ExponentialForm};
use delayswitch::model::{
    build_system, classify_baseline, homogenize, BaselineVerdict, DelayPlacement, DelaySystem, GoalModel,
    InteractionMatrix,
};
use delayswitch::sim::{dominant_period, growth_rate, integrate, HistoryFunction};
use delayswitch::spectral::{count_roots, rightmost_root, stability_at, winding_count, SearchRegion, SpectralState};
use delayswitch::switch_analysis::{
    auxiliary_polynomial, auxiliary_quadratic, classify_theorem_case, critical_delays, crossing_frequencies,
    oracle_switches, switch_report, Direction, EventualVerdict, OracleScanOptions, Regime, SwitchError, SwitchReport,
};
use nalgebra::Matrix2;
use num_complex::Complex64;
use proptest::prelude::*;

const PLANAR: [DelayPlacement; 10] = [
    DelayPlacement::None,
    DelayPlacement::Own,
    DelayPlacement::Cross,
    DelayPlacement::RowR,
    DelayPlacement::ColR,
    DelayPlacement::Diagonal,
    DelayPlacement::AntiDiagonal,
    DelayPlacement::ThreeOwnLast,
    DelayPlacement::ThreeCrossLast,
    DelayPlacement::Full,
];

fn coef() -> impl Strategy<Value = f64> {
    -9.0..9.0f64
}

fn matrix() -> impl Strategy<Value = [f64; 4]> {
    [coef(), coef(), coef(), coef()]
}

fn planar(c: [f64; 4], p: DelayPlacement) -> DelaySystem {
    build_system(InteractionMatrix::planar(c[0], c[1], c[2], c[3]).unwrap(), p).unwrap()
}

fn many(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        max_global_rejects: 200_000,
        ..ProptestConfig::default()
    }
}

/// Report over all delays, or `None` when the analysis refuses the system.
fn settled_report(sys: &DelaySystem) -> Option<SwitchReport> {
    match switch_report(sys, 20.0) {
        Ok(r) if r.eventual != EventualVerdict::Unresolved => Some(r),
        Ok(_) | Err(SwitchError::NonGeneric(_)) => None,
        Err(e) => panic!("unexpected error {e} for {sys:?}"),
    }
}

fn regime_bound_holds(
    c: [f64; 4],
    placement: DelayPlacement,
    regime: Regime,
    bound: usize,
    exact: bool,
) -> Result<(), TestCaseError> {
    let sys = planar(c, placement);
    prop_assume!(classify_theorem_case(&sys).regime == regime);
    let Some(r) = settled_report(&sys) else {
        return Err(TestCaseError::reject("non-generic"));
    };
    if exact {
        prop_assert_eq!(r.total_switches, bound, "{:?}", c);
    } else {
        prop_assert!(r.total_switches <= bound, "{:?}: {} switches", c, r.total_switches);
    }
    Ok(())
}

proptest! {
    #![proptest_config(many(256))]

    #[test]
    fn baseline_invariant_under_transpose(c in matrix()) {
        let m = InteractionMatrix::planar(c[0], c[1], c[2], c[3]).unwrap();
        let a = classify_baseline(&m).unwrap();
        let b = classify_baseline(&m.transpose()).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
    }

    #[test]
    fn homogenized_goal_model_has_negative_trace(c in 0.01..5.0f64, d in 0.01..5.0f64, e in 0.01..5.0f64, f in 0.01..5.0f64, rs in -3.0..3.0f64, js in -3.0..3.0f64) {
        let (_, m) = homogenize(&GoalModel { c, d, e, f, r_star: rs, j_star: js }).unwrap();
        prop_assert!(m.trace() < 0.0);
        prop_assert_eq!(classify_baseline(&m).unwrap().verdict, BaselineVerdict::Stable);
    }

    #[test]
    fn conjugate_symmetry(c in matrix(), k in 0usize..10, re in -5.0..5.0f64, im in -5.0..5.0f64, tau in 0.0..5.0f64) {
        let w = quasi_polynomial(&planar(c, PLANAR[k]));
        let z = Complex64::new(re, im);
        let a = w.evaluate(z.conj(), tau);
        let b = w.evaluate(z, tau).conj();
        prop_assert!((a - b).norm() <= 1e-9 * (1.0 + b.norm()));
    }

    #[test]
    fn own_placement_matches_re_im_expansion(c in matrix(), omega in 0.0..20.0f64, tau in 0.0..5.0f64) {
        let [a11, a12, a21, a22] = c;
        let b = a12 * a21;
        let (s, co) = (omega * tau).sin_cos();
        let re = -omega * omega - b + a11 * a22 * co - a11 * omega * s;
        let im = -a22 * omega - a11 * a22 * s - a11 * omega * co;
        let w = quasi_polynomial(&planar(c, DelayPlacement::Own)).evaluate(Complex64::new(0.0, omega), tau);
        let scale = 1.0 + omega * omega + 100.0 * (1.0 + omega);
        prop_assert!((w.re - re).abs() < 1e-10 * scale && (w.im - im).abs() < 1e-10 * scale);
    }

    #[test]
    fn auxiliary_identity(c in matrix(), k in 0usize..10, y in 0.0..100.0f64) {
        let w = quasi_polynomial(&planar(c, PLANAR[k]));
        prop_assume!(matches!(w.form(), ExponentialForm::Single { .. }));
        let f = auxiliary_polynomial(&w).unwrap();
        let l = Complex64::new(0.0, y.sqrt());
        let (q, _) = w.single_delay_term().unwrap();
        let direct = w.p.eval_complex(l).norm_sqr() - q.eval_complex(l).norm_sqr();
        let fy = f.eval(y);
        prop_assert!((fy - direct).abs() < 1e-6 * (1.0 + fy.abs()));
    }

    #[test]
    fn critical_delays_are_roots(c in matrix(), k in 1usize..5) {
        let sys = planar(c, PLANAR[k]);
        let w = quasi_polynomial(&sys);
        prop_assume!(matches!(w.form(), ExponentialForm::Single { .. }));
        let Ok(f) = auxiliary_quadratic(&w) else { return Err(TestCaseError::reject("no quadratic")) };
        let Ok(freqs) = crossing_frequencies(&f) else { return Err(TestCaseError::reject("non-generic")) };
        for cf in &freqs {
            let Ok(seq) = critical_delays(&sys, cf, 10.0) else { continue };
            for &tau in &seq.delays {
                let v = w.evaluate(Complex64::new(0.0, seq.omega), tau);
                prop_assert!(v.norm() < 1e-6 * (1.0 + seq.omega * seq.omega), "{c:?} tau {tau}: {v}");
            }
        }
    }

    #[test]
    fn parity_when_eventually_unstable(c in matrix()) {
        let sys = planar(c, DelayPlacement::Own);
        let Some(r) = settled_report(&sys) else { return Err(TestCaseError::reject("non-generic")) };
        let Some(b) = r.baseline else { return Err(TestCaseError::reject("no baseline")) };
        prop_assume!(!b.verdict.is_marginal());
        if matches!(r.eventual, EventualVerdict::UnstableBeyond { .. }) {
            let odd = r.total_switches % 2 == 1;
            prop_assert_eq!(odd, b.verdict == BaselineVerdict::Stable, "{:?}", c);
        }
    }

    #[test]
    fn report_invariants(c in matrix(), k in 1usize..5) {
        let Some(r) = settled_report(&planar(c, PLANAR[k])) else { return Err(TestCaseError::reject("non-generic")) };
        // switches alternate and land on count transitions through zero
        for pair in r.switches.windows(2) {
            prop_assert_ne!(pair[0].unstable_after == 0, pair[1].unstable_after == 0);
        }
        for e in r.events.windows(2) {
            prop_assert!(e[0].tau < e[1].tau);
        }
    }
}

proptest! {
    #![proptest_config(many(200))]

    #[test]
    fn thm1_unstable_start_never_switches(c in matrix()) {
        regime_bound_holds(c, DelayPlacement::Own, Regime::Thm1Case1, 0, true)?;
    }

    #[test]
    fn thm1_stable_start_switches_once(c in matrix()) {
        regime_bound_holds(c, DelayPlacement::Own, Regime::Thm1Case2, 1, true)?;
    }

    #[test]
    fn thm3_own_dominant_never_switches(c in matrix()) {
        regime_bound_holds(c, DelayPlacement::Cross, Regime::Thm3NoSwitch, 0, true)?;
    }

    #[test]
    fn thm3_cross_dominant_switches_at_most_once(c in matrix()) {
        regime_bound_holds(c, DelayPlacement::Cross, Regime::Thm3OneSwitch, 1, false)?;
    }

    #[test]
    fn row_column_antidiagonal_at_most_once(c in matrix(), k in 0usize..3) {
        let p = [DelayPlacement::RowR, DelayPlacement::ColR, DelayPlacement::AntiDiagonal][k];
        regime_bound_holds(c, p, Regime::Thm4AtMostOne, 1, false)?;
    }

    #[test]
    fn diagonal_zero_trace_at_most_once(a11 in coef(), a12 in coef(), a21 in coef()) {
        regime_bound_holds([a11, a12, a21, -a11], DelayPlacement::Diagonal, Regime::Thm4AtMostOne, 1, false)?;
    }

    #[test]
    fn full_delay_at_most_once(c in matrix()) {
        regime_bound_holds(c, DelayPlacement::Full, Regime::Thm5, 1, false)?;
    }
}

proptest! {
    #![proptest_config(many(1000))]

    #[test]
    fn tau_zero_roots_are_eigenvalues(c in matrix(), k in 0usize..10) {
        let sys = planar(c, PLANAR[k]);
        let mut roots: Vec<Complex64> = quasi_polynomial(&sys).tau_zero_polynomial().roots();
        let a = Matrix2::new(c[0], c[1], c[2], c[3]);
        let mut eig: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
        let key = |z: &Complex64| (z.re, z.im);
        roots.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        eig.sort_by(|x, y| key(x).partial_cmp(&key(y)).unwrap());
        for (r, e) in roots.iter().zip(&eig) {
            // a double eigenvalue is only determined to about sqrt(machine epsilon)
            let tol = if (eig[0] - eig[1]).norm() < 1e-4 { 1e-6 } else { 1e-9 } * (1.0 + e.norm());
            prop_assert!((r - e).norm() < tol, "{c:?}: {roots:?} vs {eig:?}");
        }
    }
}

proptest! {
    #![proptest_config(many(40))]

    #[test]
    fn winding_stable_under_refinement(c in matrix(), k in 0usize..10, tau in 0.0..3.0f64) {
        let w = quasi_polynomial(&planar(c, PLANAR[k]));
        let region = SearchRegion::new(-0.5, 25.0, -25.0, 25.0).unwrap();
        let a = winding_count(&w, tau, &region, 0).unwrap();
        let b = winding_count(&w, tau, &region, 1).unwrap();
        prop_assume!(a.is_some() && b.is_some());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn off_axis_roots_pair_up(c in matrix(), k in 0usize..10, tau in 0.0..3.0f64) {
        let w = quasi_polynomial(&planar(c, PLANAR[k]));
        let upper = SearchRegion::new(1e-3, 30.0, 1e-3, 30.0).unwrap();
        let lower = SearchRegion::new(1e-3, 30.0, -30.0, -1e-3).unwrap();
        match (count_roots(&w, tau, &upper), count_roots(&w, tau, &lower)) {
            (Ok(u), Ok(l)) => prop_assert_eq!(u, l),
            _ => return Err(TestCaseError::reject("root on the contour")),
        }
    }

    #[test]
    fn history_scaling_is_linear(c in matrix(), k in 0usize..10, tau in 0.05..2.0f64, scale in -3.0..3.0f64) {
        let sys = planar(c, PLANAR[k]);
        let h = HistoryFunction::Constant(vec![0.7, -0.4]);
        let a = integrate(&sys, tau, &h, 5.0, tau / 16.0).unwrap();
        let b = integrate(&sys, tau, &h.scaled(scale), 5.0, tau / 16.0).unwrap();
        prop_assume!(a.len() == b.len());
        for i in 0..a.len() {
            for (x, y) in a.state(i).iter().zip(b.state(i)) {
                prop_assert!((scale * x - y).abs() <= 1e-9 * (1.0 + (scale * x).abs()));
            }
        }
    }
}

proptest! {
    #![proptest_config(many(100))]

    #[test]
    fn oracle_matches_analytic_walk(c in matrix(), k in 1usize..5, taus in prop::array::uniform5(0.0..6.0f64)) {
        let sys = planar(c, PLANAR[k]);
        let w = quasi_polynomial(&sys);
        let Some(r) = settled_report(&sys) else { return Err(TestCaseError::reject("non-generic")) };
        prop_assume!(r.baseline.is_some_and(|b| !b.verdict.is_marginal()));
        for tau in taus {
            // keep away from the crossings themselves
            if r.events.iter().any(|e| (e.tau - tau).abs() < 1e-4) {
                continue;
            }
            let predicted = r.unstable_count_at(tau).unwrap();
            let (count, state) = stability_at(&w, tau).unwrap();
            prop_assert_ne!(state, SpectralState::Marginal);
            prop_assert_eq!(count, predicted, "{:?} {} tau = {}", c, PLANAR[k], tau);
        }
    }
}

proptest! {
    #![proptest_config(many(50))]

    #[test]
    fn growth_sign_matches_rightmost_root(c in [-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64], k in 1usize..5, tau in 0.05..2.0f64) {
        let sys = planar(c, PLANAR[k]);
        let w = quasi_polynomial(&sys);
        let Ok(Some(root)) = rightmost_root(&w, tau) else { return Err(TestCaseError::reject("no rightmost root")) };
        let traj = integrate(&sys, tau, &HistoryFunction::default(), 40f64.max(20.0 * tau), tau / 64.0).unwrap();
        let g = growth_rate(&traj);
        prop_assume!(g.rate.abs() >= 0.02 && root.re.abs() >= 0.02);
        prop_assert_eq!(g.rate > 0.0, root.re > 0.0, "{:?} {} tau {}: rate {:?}, root {}", c, PLANAR[k], tau, g, root);
    }
}

fn oracle_window(c: [f64; 4], placement: DelayPlacement, tau_max: f64) -> SwitchReport {
    let opts = OracleScanOptions {
        grid: 1500,
        tolerance: 1e-5,
    };
    oracle_switches(&planar(c, placement), 0.0, tau_max, &opts).unwrap()
}

#[test]
fn diagonal_near_zero_self_reaction_keeps_multiple_switches() {
    // at a11 = 0 the diagonal form has a single exponential and the walk applies
    let r = switch_report(&planar([0.0, 1.0, -9.0, -1.5], DelayPlacement::Diagonal), 10.0).unwrap();
    assert_eq!(r.switches.len(), 3);
    for a11 in [-0.01, 0.01] {
        let near = oracle_window([a11, 1.0, -9.0, -1.5], DelayPlacement::Diagonal, 3.0);
        assert_eq!(near.switches.len(), 3, "a11 = {a11}");
        for (a, b) in near.switches.iter().zip(&r.switches) {
            assert!((a.tau - b.tau).abs() < 0.02, "{} vs {}", a.tau, b.tau);
        }
    }
    let many = oracle_window([-0.01, 1.0, -9.0, -0.5], DelayPlacement::Diagonal, 5.0);
    assert!(many.switches.len() >= 5, "{:?}", many.switches);
}

fn rightmost_re(w: &delayswitch::QuasiPolynomial, tau: f64) -> f64 {
    rightmost_root(w, tau).unwrap().expect("rightmost root").re
}

proptest! {
    #![proptest_config(many(200))]

    #[test]
    fn zero_self_reaction_diagonal_has_two_crossing_frequencies(a12 in 0.1..9.0f64, a21 in -9.0..-0.1f64, a22 in -9.0..-0.1f64) {
        let w = quasi_polynomial(&planar([0.0, a12, a21, a22], DelayPlacement::Diagonal));
        let f = auxiliary_quadratic(&w).unwrap();
        let freqs = crossing_frequencies(&f).unwrap();
        prop_assert_eq!(freqs.len(), 2);
        prop_assert_eq!(freqs[0].direction, Direction::Stabilizing);
        prop_assert_eq!(freqs[1].direction, Direction::Destabilizing);
    }

    #[test]
    fn mixed_self_perturbation_preserves_switch_count(c in matrix()) {
        let base = planar(c, DelayPlacement::Own);
        let Some(r) = settled_report(&base) else { return Err(TestCaseError::reject("non-generic")) };
        let b = r.baseline.unwrap();
        let eps = 1e-3 * c.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        // keep clear of the baseline boundaries and of near-coincident crossings
        prop_assume!(b.trace.abs() > 100.0 * eps && b.determinant.abs() > 100.0 * eps);
        prop_assume!(r.events.windows(2).all(|e| e[1].tau - e[0].tau > 0.05));
        for a13 in [eps, -eps] {
            let m = switch_report(&planar(c, DelayPlacement::MixedSelf { a13 }), 20.0).unwrap();
            prop_assert_eq!(m.total_switches, r.total_switches, "{:?} a13 = {}", c, a13);
        }
    }
}

proptest! {
    #![proptest_config(many(30))]

    #[test]
    fn rightmost_root_changes_sign_at_switches(c in matrix(), k in 1usize..5) {
        let sys = planar(c, PLANAR[k]);
        let w = quasi_polynomial(&sys);
        let Ok(r) = switch_report(&sys, 6.0) else { return Err(TestCaseError::reject("non-generic")) };
        prop_assume!(!r.switches.is_empty());
        for s in &r.switches {
            let (mut lo, mut hi) = ((s.tau - 1e-2).max(0.0), s.tau + 1e-2);
            let lo_sign = rightmost_re(&w, lo) > 0.0;
            prop_assume!(lo_sign != (rightmost_re(&w, hi) > 0.0));
            prop_assert_eq!(lo_sign, s.direction == Direction::Stabilizing);
            while hi - lo > 1e-4 {
                let mid = 0.5 * (lo + hi);
                if (rightmost_re(&w, mid) > 0.0) == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            prop_assert!((0.5 * (lo + hi) - s.tau).abs() <= 1e-3, "{:?}: {} vs {}", c, 0.5 * (lo + hi), s.tau);
        }
    }

    #[test]
    fn oscillation_period_at_a_switch(c in matrix()) {
        let sys = planar(c, DelayPlacement::Own);
        prop_assume!(classify_theorem_case(&sys).regime == Regime::Thm1Case2);
        let Some(r) = settled_report(&sys) else { return Err(TestCaseError::reject("non-generic")) };
        let s = r.switches[0];
        let omega = s.omega.unwrap();
        let want = std::f64::consts::TAU / omega;
        let horizon = (20.0 * want).max(40f64.max(20.0 * s.tau));
        let traj = integrate(&sys, s.tau, &HistoryFunction::default(), horizon, s.tau / 64.0).unwrap();
        let period = dominant_period(&traj).unwrap();
        prop_assert!((period - want).abs() <= 0.02 * want, "{:?}: {} vs {}", c, period, want);
    }
}
