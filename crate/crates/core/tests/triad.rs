use delayswitch::charpoly::quasi_polynomial;
use delayswitch::model::{build_system, DelayPlacement, DelaySystem, InteractionMatrix};
use delayswitch::spectral::stability_at;
use delayswitch::switch_analysis::{oracle_switches, switch_report, Direction, OracleScanOptions};

fn triad(c: [f64; 7], p: DelayPlacement) -> DelaySystem {
    build_system(InteractionMatrix::from_coefficients(&c).unwrap(), p).unwrap()
}

const PUBLISHED: [f64; 7] = [-28.0, -74.0, 76.0, -35.0, 76.0, -42.0, -28.0];

#[test]
fn published_triad_switches_alternate_and_match_counts() {
    let sys = triad(PUBLISHED, DelayPlacement::TriadJOwn);
    let r = oracle_switches(&sys, 0.0, 1.0, &OracleScanOptions::default()).unwrap();
    assert_eq!(r.switches.len(), 7);
    for (k, s) in r.switches.iter().enumerate() {
        let want = if k % 2 == 0 {
            Direction::Destabilizing
        } else {
            Direction::Stabilizing
        };
        assert_eq!(s.direction, want, "switch {k} at {}", s.tau);
    }
    let w = quasi_polynomial(&sys);
    for pair in r.switches.windows(2) {
        let mid = 0.5 * (pair[0].tau + pair[1].tau);
        let (n, _) = stability_at(&w, mid).unwrap();
        assert_eq!(n == 0, pair[0].direction == Direction::Stabilizing, "tau {mid}");
    }
}

/// The published claim is three switches; the oracle sees seven on the
/// default window, of which three lie below 0.1.
#[test]
#[ignore = "known disagreement with the published switch count"]
fn published_triad_has_three_switches() {
    let sys = triad(PUBLISHED, DelayPlacement::TriadJOwn);
    let r = oracle_switches(&sys, 0.0, 1.0, &OracleScanOptions::default()).unwrap();
    assert_eq!(
        r.switches.len(),
        3,
        "{:?}",
        r.switches.iter().map(|s| s.tau).collect::<Vec<_>>()
    );
}

#[test]
fn equal_outer_rates_reduce_to_planar_cross_system() {
    // a11 = a33: the triad spectrum is the reduced planar one plus lambda = a11
    let c = [-2.0, 1.5, -1.0, -1.0, 0.5, -2.0, -2.0];
    let sys = triad(c, DelayPlacement::TriadJIn);
    let w = quasi_polynomial(&sys);
    let m = InteractionMatrix::planar(c[3], 1.0, c[1] * c[2] + c[4] * c[5], c[0]).unwrap();
    let reduced = switch_report(&build_system(m, DelayPlacement::Cross).unwrap(), 5.0).unwrap();
    for tau in [0.1, 0.7, 1.9, 3.3, 4.8] {
        if reduced.events.iter().any(|e| (e.tau - tau).abs() < 1e-3) {
            continue;
        }
        let (n, _) = stability_at(&w, tau).unwrap();
        assert_eq!(Some(n), reduced.unstable_count_at(tau), "tau {tau}");
    }
}
