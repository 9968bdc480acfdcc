use super::{to_json, write_file, CliError, RunConfig};
use crate::charpoly::{quasi_polynomial, ExponentialForm, QuasiPolynomial};
use crate::model::{
    build_system, classify_baseline, BaselineStability, DelayPlacement, DelaySystem, InteractionMatrix,
};
use crate::poly::RealPoly;
use crate::sim::{
    default_horizon, default_step, dominant_period, export_trajectory, growth_rate, integrate, GrowthEstimate,
    TrajectoryStatus,
};
use crate::spectral::{verify_report, ReportCheck};
use crate::switch_analysis::{
    auxiliary_polynomial, auxiliary_quadratic, classify_theorem_case, crossing_frequencies, discrepancy_annotation,
    oracle_switches, switch_report, trig_scan, trig_scan_ceiling, AuxiliaryQuadratic, CrossingFrequency,
    EventualVerdict, OracleScanOptions, SwitchError, SwitchReport, TheoremClassification, TrigZero,
};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

const PLANAR_TAU_MAX: f64 = 10.0;
const TRIAD_TAU_MAX: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxiliaryAnalysis {
    /// `F(y) = |P(i√y)|² − |Q(i√y)|²`.
    pub polynomial: RealPoly,
    pub quadratic: Option<AuxiliaryQuadratic>,
    pub frequencies: Vec<CrossingFrequency>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigAnalysis {
    pub tau: f64,
    pub omega_ceiling: f64,
    pub zeros: Vec<TrigZero>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub matrix: InteractionMatrix,
    pub placement: DelayPlacement,
    pub baseline: Option<BaselineStability>,
    pub quasi_polynomial: QuasiPolynomial,
    pub form: ExponentialForm,
    pub classification: TheoremClassification,
    pub auxiliary: Option<AuxiliaryAnalysis>,
    pub trig: Option<TrigAnalysis>,
    pub switches: SwitchReport,
}

fn oracle_options(cfg: &RunConfig) -> OracleScanOptions {
    let mut o = OracleScanOptions::default();
    if let Some(g) = cfg.oracle_grid {
        o.grid = g.max(1);
    }
    o
}

fn default_tau_max(sys: &DelaySystem) -> f64 {
    if sys.matrix.is_planar() {
        PLANAR_TAU_MAX
    } else {
        TRIAD_TAU_MAX
    }
}

fn with_discrepancy(sys: &DelaySystem, e: SwitchError) -> CliError {
    match (e, discrepancy_annotation(sys)) {
        (SwitchError::NonGeneric(m), Some(note)) => CliError::NonGeneric(format!("{m}; {note}")),
        (e, _) => e.into(),
    }
}

fn report_for(sys: &DelaySystem, cfg: &RunConfig) -> Result<SwitchReport, CliError> {
    let tau_max = cfg.tau_max(default_tau_max(sys))?;
    let tau_min = cfg.tau_min()?;
    let needs_oracle = !sys.matrix.is_planar() || quasi_polynomial(sys).form() == ExponentialForm::Irreducible;
    let result = if needs_oracle {
        oracle_switches(sys, tau_min, tau_max, &oracle_options(cfg))
    } else {
        switch_report(sys, tau_max)
    };
    result.map_err(|e| with_discrepancy(sys, e))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

fn eventual_text(e: &EventualVerdict) -> String {
    match e {
        EventualVerdict::StableForever => "StableForever".into(),
        EventualVerdict::UnstableBeyond { tau } => format!("UnstableBeyond tau = {tau:.6}"),
        EventualVerdict::Unresolved => "Unresolved (outside the scanned window)".into(),
    }
}

pub fn analyze(cfg: &RunConfig) -> Result<(AnalyzeReport, String), CliError> {
    let sys = cfg.system()?;
    let w = quasi_polynomial(&sys);
    let switches = report_for(&sys, cfg)?;
    let form = w.form();
    let auxiliary = match form {
        ExponentialForm::Single { .. } => auxiliary_polynomial(&w).ok().map(|polynomial| {
            let quadratic = auxiliary_quadratic(&w).ok();
            let frequencies = quadratic
                .and_then(|q| crossing_frequencies(&q).ok())
                .unwrap_or_default();
            AuxiliaryAnalysis {
                polynomial,
                quadratic,
                frequencies,
            }
        }),
        _ => None,
    };
    let trig = match sys.placement {
        DelayPlacement::Diagonal | DelayPlacement::ThreeOwnLast | DelayPlacement::ThreeCrossLast => {
            let tau = match cfg.tau {
                Some(_) => cfg.tau()?,
                None => 0.0,
            };
            Some(TrigAnalysis {
                tau,
                omega_ceiling: trig_scan_ceiling(&sys),
                zeros: trig_scan(&sys, &w, tau)?,
            })
        }
        _ => None,
    };
    let report = AnalyzeReport {
        matrix: sys.matrix,
        placement: sys.placement,
        baseline: classify_baseline(&sys.baseline_matrix()).ok(),
        quasi_polynomial: w,
        form,
        classification: classify_theorem_case(&sys),
        auxiliary,
        trig,
        switches,
    };
    write_file(&cfg.out_dir().join("report.json"), &to_json(&report))?;

    let mut t = String::new();
    let _ = writeln!(
        t,
        "system      {} placement, matrix {:?}",
        sys.placement,
        sys.matrix.coefficients()
    );
    if let Some(b) = report.baseline {
        let _ = writeln!(
            t,
            "baseline    {:?} (trace {}, det {})",
            b.verdict, b.trace, b.determinant
        );
    }
    let q = &report.quasi_polynomial;
    let _ = writeln!(t, "W(λ; τ)     P = {}, Q1 = {}, Q2 = {}", q.p, q.q1, q.q2);
    let _ = writeln!(t, "form        {:?}", report.form);
    let _ = writeln!(
        t,
        "regime      {:?} (switch bound {})",
        report.classification.regime,
        report
            .classification
            .switch_bound
            .map_or("none".to_string(), |b| b.to_string())
    );
    if let Some(a) = &report.auxiliary {
        let _ = writeln!(t, "F(y)        {}", a.polynomial);
        if let Some(qd) = a.quadratic {
            let _ = writeln!(t, "discriminant {}", qd.discriminant);
        }
        for f in &a.frequencies {
            let _ = writeln!(t, "crossing    omega = {:.6} ({})", f.omega, f.direction.as_str());
        }
    }
    if let Some(tr) = &report.trig {
        let _ = writeln!(
            t,
            "G zeros at tau = {}: {:?}",
            tr.tau,
            tr.zeros.iter().map(|z| z.omega).collect::<Vec<_>>()
        );
    }
    let _ = writeln!(
        t,
        "switches    {} in [{}, {}], {}",
        report.switches.switches.len(),
        report.switches.tau_min,
        report.switches.tau_max,
        eventual_text(&report.switches.eventual)
    );
    for a in &report.switches.annotations {
        let _ = writeln!(t, "note        {a}");
    }
    Ok((report, t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchesOutput {
    pub report: SwitchReport,
    pub verification: ReportCheck,
}

fn switches_csv(report: &SwitchReport) -> String {
    let mut s = String::from("tau,direction,omega\n");
    for e in &report.switches {
        let omega = e.omega.map_or(String::new(), |w| w.to_string());
        let _ = writeln!(s, "{},{},{}", e.tau, e.direction.as_str(), omega);
    }
    s
}

fn switch_table(report: &SwitchReport, check: &ReportCheck) -> String {
    let mut t = String::new();
    let _ = writeln!(
        t,
        "{} placement, matrix {:?}, method {:?}",
        report.placement,
        report.matrix.coefficients(),
        report.method
    );
    let _ = writeln!(
        t,
        "{:>3}  {:>12}  {:<14} {:>10}  {:>8}",
        "#", "tau", "direction", "omega", "unstable"
    );
    for (i, e) in report.switches.iter().enumerate() {
        let _ = writeln!(
            t,
            "{:>3}  {:>12.6}  {:<14} {:>10}  {:>8}",
            i + 1,
            e.tau,
            e.direction.as_str(),
            fmt_opt(e.omega),
            e.unstable_after
        );
    }
    let _ = writeln!(t, "eventual: {}", eventual_text(&report.eventual));
    if report.total_switches != report.switches.len() {
        let _ = writeln!(t, "total switches over all delays: {}", report.total_switches);
    }
    for a in &report.annotations {
        let _ = writeln!(t, "note: {a}");
    }
    match &check.first_disagreement {
        None => {
            let _ = writeln!(
                t,
                "verification: oracle agrees at {} sample delays",
                check.samples.len()
            );
        }
        Some(d) => {
            let _ = writeln!(
                t,
                "verification: DISAGREEMENT at tau = {} (predicted {}, oracle {} {:?})",
                d.tau, d.predicted_unstable, d.oracle_count, d.oracle_state
            );
        }
    }
    t
}

fn write_switch_outputs(cfg: &RunConfig, out: &SwitchesOutput) -> Result<(), CliError> {
    let dir = cfg.out_dir();
    write_file(&dir.join("report.json"), &to_json(out))?;
    write_file(&dir.join("switches.csv"), &switches_csv(&out.report))
}

fn disagreement(check: &ReportCheck) -> Result<(), CliError> {
    match &check.first_disagreement {
        None => Ok(()),
        Some(d) => Err(CliError::Verification(format!(
            "at tau = {} the report predicts {} unstable roots, the oracle counts {} ({:?})",
            d.tau, d.predicted_unstable, d.oracle_count, d.oracle_state
        ))),
    }
}

/// Switch report plus oracle verification at every interval midpoint.
/// Outputs are written before a disagreement is reported.
pub fn switches(cfg: &RunConfig) -> Result<(SwitchesOutput, String), CliError> {
    let sys = cfg.system()?;
    let report = report_for(&sys, cfg)?;
    let verification = verify_report(&report, &quasi_polynomial(&sys))?;
    let out = SwitchesOutput { report, verification };
    write_switch_outputs(cfg, &out)?;
    disagreement(&out.verification)?;
    let text = switch_table(&out.report, &out.verification);
    Ok((out, text))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub tau: f64,
    pub step: f64,
    pub horizon: f64,
    pub points: usize,
    pub status: TrajectoryStatus,
    pub growth: GrowthEstimate,
    pub period: Option<f64>,
}

fn plot_script(dim: usize, tau: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# time series and (r, j) phase portrait of trajectory.csv");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set terminal pngcairo size 1100,450");
    let _ = writeln!(s, "set output 'trajectory.png'");
    let _ = writeln!(s, "set multiplot layout 1,2 title 'tau = {tau}'");
    let _ = writeln!(s, "set xlabel 't'");
    let mut series = String::from(
        "plot 'trajectory.csv' every ::1 using 1:2 with lines title 'r', '' every ::1 using 1:3 with lines title 'j'",
    );
    if dim == 3 {
        series.push_str(", '' every ::1 using 1:4 with lines title 'p'");
    }
    let _ = writeln!(s, "{series}");
    let _ = writeln!(s, "set xlabel 'r'");
    let _ = writeln!(s, "set ylabel 'j'");
    let _ = writeln!(s, "plot 'trajectory.csv' every ::1 using 2:3 with lines notitle");
    let _ = writeln!(s, "unset multiplot");
    s
}

pub fn simulate(cfg: &RunConfig) -> Result<(SimulationSummary, String), CliError> {
    let sys = cfg.system()?;
    let tau = cfg.tau()?;
    let history = cfg.history(sys.dimension())?;
    let horizon = cfg.horizon.unwrap_or_else(|| default_horizon(tau));
    let step = cfg.step.unwrap_or_else(|| default_step(tau));
    let traj = integrate(&sys, tau, &history, horizon, step)?;
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    export_trajectory(&traj, &dir.join("trajectory.csv"))?;
    if cfg.plot.unwrap_or(false) {
        write_file(&dir.join("plot.gp"), &plot_script(sys.dimension(), tau))?;
    }
    let summary = SimulationSummary {
        tau,
        step: traj.step,
        horizon,
        points: traj.len(),
        status: traj.status,
        growth: growth_rate(&traj),
        period: dominant_period(&traj),
    };
    write_file(&dir.join("report.json"), &to_json(&summary))?;
    let mut t = String::new();
    let _ = writeln!(
        t,
        "tau {tau}, step {}, {} points, {:?}",
        traj.step,
        traj.len(),
        traj.status
    );
    let _ = writeln!(
        t,
        "growth rate {:.6} ({:?} confidence, {} peaks)",
        summary.growth.rate, summary.growth.confidence, summary.growth.peaks
    );
    if let Some(p) = summary.period {
        let _ = writeln!(t, "period {p:.6}");
    }
    Ok((summary, t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanarReduction {
    /// System in `(j, s)` with `s = a21 r + a23 p`.
    pub system: DelaySystem,
    /// Root `λ = a11` split off from the cubic.
    pub factor_root: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriadReport {
    pub matrix: InteractionMatrix,
    pub placement: DelayPlacement,
    pub window: [f64; 2],
    pub reduction: Option<PlanarReduction>,
    /// Switches of the three-species system (of the reduced system when the
    /// reduction replaces the numeric scan).
    pub report: SwitchReport,
    /// Analytic report of the reduced system, when it only serves as a check.
    pub cross_check: Option<SwitchReport>,
    /// Whether the numeric and reduced switch lists agree inside the window.
    pub consistent: Option<bool>,
    pub verification: ReportCheck,
}

/// The reduced planar system exists when `a11 = a33`: `s = a21 r + a23 p`
/// then obeys `s' = a11 s + (a12 a21 + a23 a32) j`.
pub fn planar_reduction(sys: &DelaySystem) -> Option<PlanarReduction> {
    let m = &sys.matrix;
    let t = m.triad?;
    if (m.a11 - t.a33).abs() > 1e-12 * m.a11.abs().max(1.0) {
        return None;
    }
    let placement = match sys.placement {
        DelayPlacement::TriadJIn => DelayPlacement::Cross,
        DelayPlacement::TriadJOwn => DelayPlacement::Own,
        _ => return None,
    };
    let coupling = m.a12 * m.a21 + t.a23 * t.a32;
    let matrix = InteractionMatrix::planar(m.a22, 1.0, coupling, m.a11).ok()?;
    Some(PlanarReduction {
        system: build_system(matrix, placement).ok()?,
        factor_root: m.a11,
    })
}

pub fn triad(cfg: &RunConfig) -> Result<(TriadReport, String), CliError> {
    let sys = cfg.system()?;
    if sys.matrix.is_planar() {
        return Err(CliError::Config(
            "triad needs 7 coefficients a11,a12,a21,a22,a23,a32,a33".into(),
        ));
    }
    let tau_min = cfg.tau_min()?;
    let tau_max = cfg.tau_max(TRIAD_TAU_MAX)?;
    let reduction = planar_reduction(&sys);
    let (report, cross_check, checked_w) = match (&reduction, sys.placement) {
        (Some(r), DelayPlacement::TriadJIn) => {
            let mut rep = switch_report(&r.system, tau_max)?;
            rep.annotations.push(format!(
                "analysed through the planar reduction; the cubic also has the delay-independent root {}",
                r.factor_root
            ));
            let w = quasi_polynomial(&r.system);
            (rep, None, w)
        }
        _ => {
            let rep = oracle_switches(&sys, tau_min, tau_max, &oracle_options(cfg))?;
            let check = reduction
                .as_ref()
                .map(|r| switch_report(&r.system, tau_max))
                .transpose()?;
            (rep, check, quasi_polynomial(&sys))
        }
    };
    let consistent = match (&cross_check, &reduction) {
        (Some(c), Some(r)) if r.factor_root < 0.0 => {
            let inside: Vec<f64> = c
                .switches
                .iter()
                .map(|e| e.tau)
                .filter(|t| *t >= tau_min && *t <= tau_max)
                .collect();
            Some(
                inside.len() == report.switches.len()
                    && inside
                        .iter()
                        .zip(&report.switches)
                        .all(|(a, b)| (a - b.tau).abs() < 1e-4),
            )
        }
        _ => None,
    };
    let verification = verify_report(&report, &checked_w)?;
    let out = TriadReport {
        matrix: sys.matrix,
        placement: sys.placement,
        window: [tau_min, tau_max],
        reduction,
        report,
        cross_check,
        consistent,
        verification,
    };
    let dir = cfg.out_dir();
    write_file(&dir.join("report.json"), &to_json(&out))?;
    write_file(&dir.join("switches.csv"), &switches_csv(&out.report))?;
    disagreement(&out.verification)?;
    if out.consistent == Some(false) {
        return Err(CliError::Verification(
            "numeric scan and planar reduction disagree".into(),
        ));
    }
    let mut t = switch_table(&out.report, &out.verification);
    if let Some(r) = &out.reduction {
        let _ = writeln!(
            t,
            "planar reduction: {} placement, matrix {:?}, extra root {}",
            r.system.placement,
            r.system.matrix.coefficients(),
            r.factor_root
        );
    }
    if let Some(c) = out.consistent {
        let _ = writeln!(
            t,
            "reduced-system cross-check: {}",
            if c { "consistent" } else { "inconsistent" }
        );
    }
    Ok((out, t))
}
