use super::config::{AxisRange, BaselineFilter};
use super::{to_json, write_file, CliError, RunConfig, ScanConfig};
use crate::charpoly::{quasi_polynomial, ExponentialForm};
use crate::model::{build_system, BaselineVerdict, DelayPlacement, DelaySystem, InteractionMatrix};
use crate::spectral::verify_report;
use crate::switch_analysis::{switch_report, EventualVerdict, SwitchError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

const SCAN_TAU_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointOutcome {
    Count { switches: usize, stable_baseline: bool },
    NonGeneric,
    Unresolved,
    IrreducibleNumericOnly,
}

impl PointOutcome {
    fn label(&self) -> String {
        match self {
            Self::Count { switches, .. } => switches.to_string(),
            Self::NonGeneric => "NonGeneric".into(),
            Self::Unresolved => "Unresolved".into(),
            Self::IrreducibleNumericOnly => "IrreducibleNumericOnly".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifiedWitness {
    pub matrix: [f64; 4],
    pub switches: usize,
    pub samples: usize,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSet {
    pub n: usize,
    /// Grid points with exactly `n` switches passing the baseline filter.
    pub found: usize,
    pub points: Vec<[f64; 4]>,
    pub verified: Vec<VerifiedWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub matrix: [f64; 4],
    pub tau: f64,
    pub predicted_unstable: usize,
    pub oracle_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub placement: DelayPlacement,
    pub tau_max: f64,
    pub axes: [AxisRange; 4],
    pub seed: u64,
    pub total_points: usize,
    pub processed: usize,
    /// Set when the grid exceeded the point budget and only a prefix was scanned.
    pub partial: bool,
    /// Points per switch count.
    pub histogram: BTreeMap<usize, usize>,
    /// Points per marker (NonGeneric, Unresolved, IrreducibleNumericOnly).
    pub markers: BTreeMap<String, usize>,
    pub witnesses: Vec<WitnessSet>,
    /// Counted points re-checked by the oracle.
    pub verified_points: usize,
    pub disagreements: Vec<Disagreement>,
}

fn grid_point(axes: &[AxisRange; 4], mut index: usize) -> [f64; 4] {
    let mut k = [0usize; 4];
    for d in (0..4).rev() {
        k[d] = index % axes[d].count;
        index /= axes[d].count;
    }
    std::array::from_fn(|d| axes[d].value(k[d]))
}

fn system_at(placement: DelayPlacement, x: [f64; 4]) -> Option<DelaySystem> {
    build_system(InteractionMatrix::planar(x[0], x[1], x[2], x[3]).ok()?, placement).ok()
}

fn classify_point(placement: DelayPlacement, x: [f64; 4], tau_max: f64) -> PointOutcome {
    let Some(sys) = system_at(placement, x) else {
        return PointOutcome::NonGeneric;
    };
    if quasi_polynomial(&sys).form() == ExponentialForm::Irreducible {
        return PointOutcome::IrreducibleNumericOnly;
    }
    match switch_report(&sys, tau_max) {
        Ok(r) if r.eventual == EventualVerdict::Unresolved => PointOutcome::Unresolved,
        Ok(r) => PointOutcome::Count {
            switches: r.total_switches,
            stable_baseline: r.baseline.is_some_and(|b| b.verdict == BaselineVerdict::Stable),
        },
        Err(SwitchError::NonGeneric(_)) | Err(_) => PointOutcome::NonGeneric,
    }
}

fn check_point(
    placement: DelayPlacement,
    x: [f64; 4],
    tau_max: f64,
) -> Result<(usize, usize, Option<Disagreement>), CliError> {
    let sys = system_at(placement, x).ok_or_else(|| CliError::Failed(format!("invalid grid point {x:?}")))?;
    let report = switch_report(&sys, tau_max)?;
    let check = verify_report(&report, &quasi_polynomial(&sys))?;
    let bad = check.first_disagreement.map(|d| Disagreement {
        matrix: x,
        tau: d.tau,
        predicted_unstable: d.predicted_unstable,
        oracle_count: d.oracle_count,
    });
    Ok((report.total_switches, check.samples.len(), bad))
}

fn passes(filter: BaselineFilter, stable: bool) -> bool {
    match filter {
        BaselineFilter::Any => true,
        BaselineFilter::Stable => stable,
        BaselineFilter::Unstable => !stable,
    }
}

/// Switch counts on the coefficient grid, witnesses for each requested count
/// and an oracle re-check of a seeded subset. Any disagreement fails the run
/// after the outputs are written.
pub fn scan_grid(
    placement: DelayPlacement,
    scan: &ScanConfig,
    tau_max: f64,
    seed: u64,
) -> Result<(ScanResult, Vec<PointOutcome>), CliError> {
    if placement.dimension() != 2 {
        return Err(CliError::Config("scan works on planar placements".into()));
    }
    if !(0.0..=1.0).contains(&scan.verify_fraction) {
        return Err(CliError::Config(format!(
            "verify_fraction {} outside [0, 1]",
            scan.verify_fraction
        )));
    }
    let axes = scan.axes()?;
    let total = axes
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.count))
        .ok_or_else(|| CliError::Config("scan grid too large".into()))?;
    let processed = total.min(scan.max_points);
    let outcomes: Vec<PointOutcome> = (0..processed)
        .into_par_iter()
        .map(|i| classify_point(placement, grid_point(&axes, i), tau_max))
        .collect();

    let mut histogram = BTreeMap::new();
    let mut markers = BTreeMap::new();
    for o in &outcomes {
        match o {
            PointOutcome::Count { switches, .. } => *histogram.entry(*switches).or_insert(0) += 1,
            other => *markers.entry(other.label()).or_insert(0) += 1,
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subset: Vec<usize> = outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| matches!(o, PointOutcome::Count { .. }))
        .filter_map(|(i, _)| (rng.gen::<f64>() < scan.verify_fraction).then_some(i))
        .collect();
    let checks = subset
        .par_iter()
        .map(|&i| check_point(placement, grid_point(&axes, i), tau_max))
        .collect::<Result<Vec<_>, _>>()?;
    let mut disagreements: Vec<Disagreement> = checks.into_iter().filter_map(|c| c.2).collect();

    let mut witnesses = Vec::new();
    for &n in &scan.requested {
        let matching: Vec<usize> = outcomes
            .iter()
            .enumerate()
            .filter(|(_, o)| matches!(o, PointOutcome::Count { switches, stable_baseline } if *switches == n && passes(scan.baseline, *stable_baseline)))
            .map(|(i, _)| i)
            .collect();
        let limit = scan.witness_limit.unwrap_or(usize::MAX);
        let points: Vec<[f64; 4]> = matching.iter().take(limit).map(|&i| grid_point(&axes, i)).collect();
        let verified = matching
            .par_iter()
            .take(scan.verified_witnesses)
            .map(|&i| {
                let x = grid_point(&axes, i);
                check_point(placement, x, tau_max).map(|(switches, samples, bad)| {
                    (
                        VerifiedWitness {
                            matrix: x,
                            switches,
                            samples,
                            agrees: bad.is_none(),
                        },
                        bad,
                    )
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut list = Vec::with_capacity(verified.len());
        for (w, bad) in verified {
            disagreements.extend(bad);
            list.push(w);
        }
        witnesses.push(WitnessSet {
            n,
            found: matching.len(),
            points,
            verified: list,
        });
    }

    let result = ScanResult {
        placement,
        tau_max,
        axes,
        seed,
        total_points: total,
        processed,
        partial: processed < total,
        histogram,
        markers,
        witnesses,
        verified_points: subset.len(),
        disagreements,
    };
    Ok((result, outcomes))
}

fn scan_csv(axes: &[AxisRange; 4], outcomes: &[PointOutcome]) -> String {
    let mut s = String::with_capacity(outcomes.len() * 24);
    s.push_str("a11,a12,a21,a22,switch_count\n");
    for (i, o) in outcomes.iter().enumerate() {
        let x = grid_point(axes, i);
        let _ = writeln!(s, "{},{},{},{},{}", x[0], x[1], x[2], x[3], o.label());
    }
    s
}

pub fn run_scan(cfg: &RunConfig) -> Result<(ScanResult, String), CliError> {
    let placement = cfg.placement(2)?;
    let scan = cfg.scan.clone().unwrap_or_default();
    let tau_max = cfg.tau_max(SCAN_TAU_MAX)?;
    let (result, outcomes) = scan_grid(placement, &scan, tau_max, cfg.seed())?;
    let dir = cfg.out_dir();
    write_file(&dir.join("report.json"), &to_json(&result))?;
    write_file(&dir.join("scan.csv"), &scan_csv(&result.axes, &outcomes))?;
    if let Some(d) = result.disagreements.first() {
        return Err(CliError::Verification(format!(
            "{} disagreement(s); first at {:?}, tau = {}: predicted {}, oracle {}",
            result.disagreements.len(),
            d.matrix,
            d.tau,
            d.predicted_unstable,
            d.oracle_count
        )));
    }
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{} placement: {} of {} grid points{}",
        placement,
        result.processed,
        result.total_points,
        if result.partial {
            " (partial: point budget exceeded)"
        } else {
            ""
        }
    );
    for (k, v) in &result.histogram {
        let _ = writeln!(t, "  {k:>4} switches: {v}");
    }
    for (k, v) in &result.markers {
        let _ = writeln!(t, "  {k}: {v}");
    }
    for w in &result.witnesses {
        let _ = writeln!(
            t,
            "n = {}: {} witnesses, {} oracle-verified",
            w.n,
            w.found,
            w.verified.iter().filter(|v| v.agrees).count()
        );
        if let Some(p) = w.points.first() {
            let _ = writeln!(t, "  first {p:?}");
        }
    }
    let _ = writeln!(
        t,
        "oracle re-check of {} sampled points: no disagreement",
        result.verified_points
    );
    Ok((result, t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_indexing_covers_corners() {
        let axes = ScanConfig::default().axes().unwrap();
        assert_eq!(grid_point(&axes, 0), [-9.0; 4]);
        assert_eq!(grid_point(&axes, 19usize.pow(4) - 1), [9.0; 4]);
        assert_eq!(grid_point(&axes, 1), [-9.0, -9.0, -9.0, -8.0]);
        assert_eq!(grid_point(&axes, 19), [-9.0, -9.0, -8.0, -9.0]);
    }

    #[test]
    fn small_scan_is_deterministic() {
        let scan = ScanConfig {
            ranges: Some(vec![
                AxisRange {
                    lo: -5.0,
                    hi: 5.0,
                    count: 5
                };
                4
            ]),
            requested: vec![1, 2],
            verify_fraction: 0.05,
            ..ScanConfig::default()
        };
        let a = scan_grid(DelayPlacement::Own, &scan, 10.0, 3).unwrap();
        let b = scan_grid(DelayPlacement::Own, &scan, 10.0, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.0.disagreements.is_empty());
        assert_eq!(a.0.processed, 625);
        assert!(!a.0.partial);
    }

    #[test]
    fn budget_flags_partial() {
        let scan = ScanConfig {
            max_points: 100,
            verify_fraction: 0.0,
            ..ScanConfig::default()
        };
        let (r, o) = scan_grid(DelayPlacement::Cross, &scan, 10.0, 0).unwrap();
        assert!(r.partial);
        assert_eq!(o.len(), 100);
    }
}
