use super::{switch_report, EventualVerdict, SwitchReport};
use crate::charpoly::{quasi_polynomial, ExponentialForm};
use crate::model::{build_system, BaselineVerdict, DelayPlacement, InteractionMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lo: [f64; 4],
    pub hi: [f64; 4],
}

impl SearchBox {
    pub fn cube(lo: f64, hi: f64) -> Self {
        Self {
            lo: [lo; 4],
            hi: [hi; 4],
        }
    }

    fn point(&self, u: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|d| self.lo[d] + u[d] * (self.hi[d] - self.lo[d]))
    }

    fn clamp(&self, x: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|d| x[d].clamp(self.lo[d], self.hi[d]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionSearch {
    pub placement: DelayPlacement,
    /// Requested number of switches over all delays.
    pub n: usize,
    pub search_box: SearchBox,
    /// Maximum number of candidate systems evaluated.
    pub budget: usize,
    pub seed: u64,
    /// Window used for the report attached to a witness.
    pub tau_max: f64,
    /// Restrict witnesses to a delay-free stable (true) or unstable (false) start.
    pub stable_baseline: Option<bool>,
}

impl RegionSearch {
    pub fn new(placement: DelayPlacement, n: usize, search_box: SearchBox) -> Self {
        Self {
            placement,
            n,
            search_box,
            budget: 100_000,
            seed: 0,
            tau_max: 10.0,
            stable_baseline: None,
        }
    }
}

const PRIMES: [u32; 4] = [2, 3, 5, 7];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = f64::from(base);
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % u64::from(base)) as f64 * inv;
        i /= u64::from(base);
        inv /= b;
    }
    out
}

/// Switch count over all delays, or `None` for refused or unsettled systems.
fn evaluate(search: &RegionSearch, x: [f64; 4]) -> Option<(usize, SwitchReport)> {
    let m = InteractionMatrix::planar(x[0], x[1], x[2], x[3]).ok()?;
    let sys = build_system(m, search.placement).ok()?;
    // only analytic routes are cheap enough to run per sample
    if quasi_polynomial(&sys).form() == ExponentialForm::Irreducible {
        return None;
    }
    let report = switch_report(&sys, search.tau_max).ok()?;
    if report.eventual == EventualVerdict::Unresolved {
        return None;
    }
    if let Some(want_stable) = search.stable_baseline {
        let stable = report.baseline?.verdict == BaselineVerdict::Stable;
        if stable != want_stable {
            return None;
        }
    }
    Some((report.total_switches, report))
}

/// Grid index, coefficients and, for generic points, the switch count with its report.
type Sample = (usize, [f64; 4], Option<(usize, SwitchReport)>);

/// Low-discrepancy search of the coefficient box for a system with exactly
/// `n` switches, followed by random local refinement around the closest
/// candidates. Deterministic for a given seed regardless of thread count.
pub fn find_n_switch_region(search: &RegionSearch) -> Option<(InteractionMatrix, SwitchReport)> {
    let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
    let shift: [f64; 4] = std::array::from_fn(|_| rng.gen::<f64>());
    let global = search.budget - search.budget / 4;
    let chunk = 4096;
    let mut best: Vec<(usize, usize, [f64; 4])> = Vec::new();
    let mut start = 0;
    while start < global {
        let end = (start + chunk).min(global);
        let results: Vec<Sample> = (start..end)
            .into_par_iter()
            .map(|i| {
                let u: [f64; 4] =
                    std::array::from_fn(|d| (radical_inverse(i as u64 + 1, PRIMES[d]) + shift[d]).fract());
                let x = search.search_box.point(u);
                (i, x, evaluate(search, x))
            })
            .collect();
        for (i, x, r) in results {
            if let Some((count, report)) = r {
                if count == search.n {
                    return Some((report.matrix, report));
                }
                best.push((count.abs_diff(search.n), i, x));
            }
        }
        best.sort_by_key(|b| (b.0, b.1));
        best.truncate(32);
        start = end;
    }
    // local refinement: shrinking random steps around the closest candidates
    let local = search.budget - global;
    if best.is_empty() || local == 0 {
        return None;
    }
    let width: [f64; 4] = std::array::from_fn(|d| search.search_box.hi[d] - search.search_box.lo[d]);
    let candidates: Vec<[f64; 4]> = (0..local)
        .map(|k| {
            let (_, _, centre) = best[k % best.len()];
            let radius = 0.1 * 0.5f64.powi((k / (best.len() * 64)).min(10) as i32);
            let x: [f64; 4] = std::array::from_fn(|d| centre[d] + radius * width[d] * (2.0 * rng.gen::<f64>() - 1.0));
            search.search_box.clamp(x)
        })
        .collect();
    candidates
        .par_iter()
        .enumerate()
        .filter_map(|(k, &x)| evaluate(search, x).filter(|(c, _)| *c == search.n).map(|(_, r)| (k, r)))
        .min_by_key(|(k, _)| *k)
        .map(|(_, r)| (r.matrix, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_points_fill_unit_interval() {
        let v: Vec<f64> = (1..=4).map(|i| radical_inverse(i, 2)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
        assert!((radical_inverse(1, 3) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn finds_one_and_two_switch_witnesses() {
        let mut s = RegionSearch::new(DelayPlacement::Own, 1, SearchBox::cube(-5.0, 5.0));
        s.budget = 5_000;
        let (_, r) = find_n_switch_region(&s).expect("one-switch witness");
        assert_eq!(r.total_switches, 1);
        s.n = 2;
        s.search_box = SearchBox::cube(-9.0, 9.0);
        let (_, r) = find_n_switch_region(&s).expect("two-switch witness");
        assert_eq!(r.total_switches, 2);
    }

    #[test]
    fn deterministic_for_seed() {
        let mut s = RegionSearch::new(DelayPlacement::Own, 3, SearchBox::cube(-9.0, 9.0));
        s.budget = 20_000;
        s.seed = 7;
        let a = find_n_switch_region(&s).map(|r| r.0);
        let b = find_n_switch_region(&s).map(|r| r.0);
        assert_eq!(a, b);
    }
}
