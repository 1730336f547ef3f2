//! Per-slot sensing optimisation.
//!
//! For every SU the optimiser picks, on each band it senses, a sample count
//! `theta` and an energy-detector threshold `eps` that keep the false-alarm
//! probability under the cap and the detection probability over the floor
//! while spending as little sensing energy as possible. The continuous
//! problem is a geometric program over `(theta, eps)` pairs; sample counts
//! are then rounded up and thresholds re-selected at the integer count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::gp::{
    condense, sca_solve, GpProblem, Monomial, Posynomial, ScaIterate, ScaSettings, ScaStatus,
    SolverSettings,
};
use crate::model::{detection_prob, false_alarm_prob, q_inverse, sensing_energy, SensingConfig};
use crate::{Error, Result};

/// Which algebraic form of the probability constraints to hand to the GP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(into = "String")]
pub enum ConstraintForm {
    /// Bounds obtained by solving the detector statistics for `eps`:
    /// `(1 + q_F theta^-1/2) / eps <= 1` and
    /// `eps / (snr + 1) + a theta^-1/2 <= 1` with `a = -Q^-1(D)`.
    #[default]
    Corrected,
    /// `eps theta^1/2 / (Q^-1(F) + theta) <= 1` with the denominator
    /// condensed, and `(snr+1)(Q^-1(D) + theta^1/2) / (eps theta^1/2) <= 1`.
    /// Needs `Q^-1(D) > 0`, i.e. a detection floor below one half.
    Paper,
}

impl ConstraintForm {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConstraintForm::Corrected => "corrected-form",
            ConstraintForm::Paper => "paper-form",
        }
    }
}

impl fmt::Display for ConstraintForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<ConstraintForm> for String {
    fn from(form: ConstraintForm) -> String {
        form.as_str().to_owned()
    }
}

impl FromStr for ConstraintForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corrected-form" | "corrected" => Ok(ConstraintForm::Corrected),
            "paper-form" | "paper" => Ok(ConstraintForm::Paper),
            other => Err(Error::domain(format!(
                "unknown constraint form `{other}` (expected corrected-form or paper-form)"
            ))),
        }
    }
}

/// What an SU knows about one band at the start of a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub band: usize,
    /// Linear SNR of the PU signal at the SU.
    pub snr: f64,
    /// Harvestable power `eta * P * h`, W. Used to decide which band to give
    /// up first when the battery cannot pay for all of them.
    pub prospect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuState {
    pub su: usize,
    /// Battery at the end of the previous slot, J.
    pub battery: f64,
    pub links: Vec<LinkState>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub sensing: SensingConfig,
    pub form: ConstraintForm,
    /// Absolute objective change (J) that ends the SCA loop.
    pub sca_tolerance: f64,
    pub sca_max_iterations: usize,
    pub solver: SolverSettings,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            sensing: SensingConfig::default(),
            form: ConstraintForm::Corrected,
            sca_tolerance: 1e-6,
            sca_max_iterations: 50,
            solver: SolverSettings::default(),
        }
    }
}

/// Smallest real sample count for which some threshold meets both the
/// false-alarm cap and the detection floor at the given SNR:
/// `((Q^-1(F) - (snr+1) Q^-1(D)) / snr)^2`.
pub fn closed_form_min_samples(snr: f64, max_false_alarm: f64, min_detection: f64) -> Result<f64> {
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(Error::domain(format!(
            "minimum sample count needs a positive finite SNR, got {snr}"
        )));
    }
    let qf = q_inverse(max_false_alarm)?;
    let qd = q_inverse(min_detection)?;
    let gap = (qf - (snr + 1.0) * qd).max(0.0);
    Ok((gap / snr).powi(2))
}

/// Brute-force minimum sample count: the first integer `theta` in
/// `[ceil(lower), upper]` for which some threshold on the grid
/// `k * eps_step` meets both detector targets, checked against the raw
/// statistics. `None` when no grid point in the range qualifies.
///
/// False alarm falls with the threshold and so does detection, so at each
/// `theta` only the smallest grid threshold meeting the false-alarm cap
/// needs a detection check; it is found by bisection on `k`.
pub fn grid_min_samples(
    snr: f64,
    max_false_alarm: f64,
    min_detection: f64,
    lower: f64,
    upper: f64,
    eps_step: f64,
) -> Option<f64> {
    if !(eps_step > 0.0 && snr >= 0.0) {
        return None;
    }
    let passes_fa =
        |k: u64, theta: f64| false_alarm_prob(k as f64 * eps_step, theta) <= max_false_alarm;
    let mut theta = lower.max(1.0).ceil();
    while theta <= upper {
        let mut hi = 1u64;
        while !passes_fa(hi, theta) {
            hi *= 2;
        }
        let mut lo = 0u64;
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if passes_fa(mid, theta) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        if passes_fa(0, theta) {
            hi = 0;
        }
        if detection_prob(hi as f64 * eps_step, theta, snr) >= min_detection {
            return Some(theta);
        }
        theta += 1.0;
    }
    None
}

/// The constraint that decides a link's outcome in the feasibility scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitingConstraint {
    /// Feasible; the detector targets set the sample count.
    DetectionWindow,
    /// Feasible; the minimum sample count binds.
    SampleFloor,
    /// Infeasible: even a full slot of samples cannot meet the targets.
    SampleCap,
    /// Detectable, but the battery cannot pay for it this slot.
    Battery,
}

impl LimitingConstraint {
    pub fn as_str(&self) -> &'static str {
        match self {
            LimitingConstraint::DetectionWindow => "detection_window",
            LimitingConstraint::SampleFloor => "sample_floor",
            LimitingConstraint::SampleCap => "sample_cap",
            LimitingConstraint::Battery => "battery",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkFeasibility {
    pub su: usize,
    pub band: usize,
    pub feasible: bool,
    pub limiting: LimitingConstraint,
    /// Closed-form minimum samples; present only when the targets can be met
    /// within one slot.
    pub min_samples: Option<f64>,
}

impl LinkFeasibility {
    /// Whether the targets can be met at all, battery aside.
    pub fn detectable(&self) -> bool {
        self.limiting != LimitingConstraint::SampleCap
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FeasibilityReport {
    pub links: Vec<LinkFeasibility>,
}

impl FeasibilityReport {
    pub fn get(&self, su: usize, band: usize) -> Option<&LinkFeasibility> {
        self.links.iter().find(|l| l.su == su && l.band == band)
    }
}

/// Integer sample count needed to meet the targets, or `None` when no count
/// up to the per-slot cap will do.
fn required_samples(snr: f64, cfg: &SensingConfig) -> Option<(f64, f64)> {
    let exact = closed_form_min_samples(snr, cfg.max_false_alarm, cfg.min_detection).ok()?;
    let needed = exact.max(cfg.min_samples).ceil();
    (needed <= cfg.max_samples()).then_some((exact, needed))
}

/// Order in which bands are given up under a tight battery: smallest
/// prospect first, ties broken towards the higher band index.
fn drop_order(a: &LinkState, b: &LinkState) -> std::cmp::Ordering {
    a.prospect.total_cmp(&b.prospect).then(b.band.cmp(&a.band))
}

fn scan_su(su: &SuState, cfg: &SensingConfig) -> Vec<LinkFeasibility> {
    let mut out: Vec<LinkFeasibility> = su
        .links
        .iter()
        .map(|l| match required_samples(l.snr, cfg) {
            Some((exact, _)) => LinkFeasibility {
                su: su.su,
                band: l.band,
                feasible: true,
                limiting: if exact <= cfg.min_samples {
                    LimitingConstraint::SampleFloor
                } else {
                    LimitingConstraint::DetectionWindow
                },
                min_samples: Some(exact),
            },
            None => LinkFeasibility {
                su: su.su,
                band: l.band,
                feasible: false,
                limiting: LimitingConstraint::SampleCap,
                min_samples: None,
            },
        })
        .collect();

    // Keep the most valuable bands while their cumulative cost fits.
    let mut order: Vec<usize> = (0..su.links.len()).filter(|&i| out[i].feasible).collect();
    order.sort_by(|&i, &j| drop_order(&su.links[j], &su.links[i]));
    let mut planned = Vec::with_capacity(order.len());
    let mut exhausted = false;
    for i in order {
        if !exhausted {
            let (_, needed) = required_samples(su.links[i].snr, cfg).expect("feasible above");
            planned.push(needed);
            if sensing_energy(&planned, cfg.sample_time, cfg.sensing_power) <= su.battery {
                continue;
            }
            planned.pop();
            exhausted = true;
        }
        out[i].feasible = false;
        out[i].limiting = LimitingConstraint::Battery;
    }
    out
}

/// Per-(SU, band) feasibility: detectable within one slot, and affordable
/// when bands are paid for in decreasing order of harvest prospect.
pub fn feasibility_scan(sus: &[SuState], cfg: &SensingConfig) -> FeasibilityReport {
    FeasibilityReport {
        links: sus.iter().flat_map(|su| scan_su(su, cfg)).collect(),
    }
}

/// Variables of [`build_subproblem`]: link `k` (counting SU by SU, link by
/// link) owns `theta` at index `2k` and `eps` at `2k + 1`.
pub fn theta_index(k: usize) -> usize {
    2 * k
}

pub fn epsilon_index(k: usize) -> usize {
    2 * k + 1
}

struct Targets {
    qf: f64,
    qd: f64,
}

impl Targets {
    fn new(cfg: &SensingConfig, form: ConstraintForm) -> Result<Self> {
        let qf = q_inverse(cfg.max_false_alarm)?;
        let qd = q_inverse(cfg.min_detection)?;
        if !(qf > 0.0) {
            return Err(Error::Structural(format!(
                "Q^-1 of the false-alarm cap is {qf:.6}; the false-alarm constraint needs it positive"
            )));
        }
        match form {
            ConstraintForm::Corrected if !(qd < 0.0) => Err(Error::Structural(format!(
                "Q^-1 of the detection floor is {qd:.6}; the corrected detection constraint needs it negative"
            ))),
            ConstraintForm::Paper if !(qd > 0.0) => Err(Error::Structural(format!(
                "Q^-1 of the detection floor is {qd:.6}; the printed detection constraint would carry a non-positive coefficient"
            ))),
            _ => Ok(Self { qf, qd }),
        }
    }

    /// Interval of admissible thresholds at `theta` in the chosen form.
    fn threshold_window(&self, snr: f64, theta: f64, form: ConstraintForm) -> (f64, f64) {
        let root = theta.sqrt();
        match form {
            ConstraintForm::Corrected => {
                (1.0 + self.qf / root, (snr + 1.0) * (1.0 + self.qd / root))
            }
            ConstraintForm::Paper => (
                (snr + 1.0) * (1.0 + self.qd / root),
                (self.qf + theta) / root,
            ),
        }
    }
}

/// Assemble the sensing-energy GP for a set of SUs around `z_prev`.
///
/// The objective is the total sensing energy. Per link: false-alarm,
/// detection, sample-cap and sample-floor constraints; per SU: the battery
/// constraint. `z_prev` is only consulted by the paper form, whose
/// false-alarm denominator is condensed around it.
pub fn build_subproblem(
    sus: &[SuState],
    cfg: &SensingConfig,
    form: ConstraintForm,
    z_prev: &[f64],
) -> Result<GpProblem> {
    let links: usize = sus.iter().map(|s| s.links.len()).sum();
    if links == 0 {
        return Err(Error::domain("sensing subproblem has no links"));
    }
    if z_prev.len() != 2 * links {
        return Err(Error::domain(format!(
            "expansion point has {} coordinates, subproblem has {}",
            z_prev.len(),
            2 * links
        )));
    }
    let cost = cfg.sample_cost();
    if !(cost > 0.0) {
        return Err(Error::domain(
            "sensing power and sample time must be positive",
        ));
    }
    let targets = Targets::new(cfg, form)?;
    let cap = cfg.max_samples();

    let mut names = Vec::with_capacity(2 * links);
    for su in sus {
        if !(su.battery >= 0.0) {
            return Err(Error::domain(format!(
                "SU {} has negative battery {}",
                su.su, su.battery
            )));
        }
        for l in &su.links {
            if !(l.snr >= 0.0) {
                return Err(Error::domain(format!(
                    "SU {} band {} has SNR {}",
                    su.su, l.band, l.snr
                )));
            }
            names.push(format!("theta[{},{}]", su.su, l.band));
            names.push(format!("eps[{},{}]", su.su, l.band));
        }
    }
    let objective = Posynomial::new(
        (0..links)
            .map(|k| Monomial::new(cost, &[(theta_index(k), 1.0)]))
            .collect::<Result<_>>()?,
    )?;
    let mut problem = GpProblem::new(names, objective)?;

    let mut k = 0;
    for su in sus {
        if su.battery == 0.0 && !su.links.is_empty() {
            return Err(Error::Infeasible(format!(
                "SU {} has an empty battery and cannot pay for any samples",
                su.su
            )));
        }
        let first = k;
        for l in &su.links {
            let (t, e) = (theta_index(k), epsilon_index(k));
            let tag = format!("[{},{}]", su.su, l.band);
            let g1 = l.snr + 1.0;
            match form {
                ConstraintForm::Corrected => {
                    problem.subject_to(
                        format!("false_alarm{tag}"),
                        Posynomial::new(vec![
                            Monomial::new(1.0, &[(e, -1.0)])?,
                            Monomial::new(targets.qf, &[(e, -1.0), (t, -0.5)])?,
                        ])?,
                    )?;
                    problem.subject_to(
                        format!("detection{tag}"),
                        Posynomial::new(vec![
                            Monomial::new(1.0 / g1, &[(e, 1.0)])?,
                            Monomial::new(-targets.qd, &[(t, -0.5)])?,
                        ])?,
                    )?;
                }
                ConstraintForm::Paper => {
                    let denom =
                        Posynomial::new(vec![Monomial::constant(targets.qf)?, Monomial::var(t)])?;
                    let lower = condense(&denom, z_prev)?;
                    let numer = Monomial::new(1.0, &[(e, 1.0), (t, 0.5)])?;
                    problem.subject_to(format!("false_alarm{tag}"), (&numer / &lower).into())?;
                    problem.subject_to(
                        format!("detection{tag}"),
                        Posynomial::new(vec![
                            Monomial::new(g1 * targets.qd, &[(e, -1.0), (t, -0.5)])?,
                            Monomial::new(g1, &[(e, -1.0)])?,
                        ])?,
                    )?;
                    problem.mark_approximate();
                }
            }
            problem.subject_to(
                format!("sample_cap{tag}"),
                Monomial::new(1.0 / cap, &[(t, 1.0)])?.into(),
            )?;
            problem.subject_to(
                format!("sample_floor{tag}"),
                Monomial::new(cfg.min_samples, &[(t, -1.0)])?.into(),
            )?;
            k += 1;
        }
        if k > first {
            let spend = Posynomial::new(
                (first..k)
                    .map(|j| Monomial::new(cost / su.battery, &[(theta_index(j), 1.0)]))
                    .collect::<Result<_>>()?,
            )?;
            problem.subject_to(format!("battery[{}]", su.su), spend)?;
        }
    }
    Ok(problem)
}

/// Starting point: every link at the per-slot sample cap, thresholds at the
/// middle of the admissible window there.
pub fn initial_point(
    sus: &[SuState],
    cfg: &SensingConfig,
    form: ConstraintForm,
) -> Result<Vec<f64>> {
    let targets = Targets::new(cfg, form)?;
    let cap = cfg.max_samples();
    let mut z = Vec::new();
    for l in sus.iter().flat_map(|s| &s.links) {
        let (lo, hi) = targets.threshold_window(l.snr, cap, form);
        let eps = if hi > lo { 0.5 * (lo + hi) } else { lo };
        z.push(cap);
        z.push(eps.max(f64::MIN_POSITIVE));
    }
    Ok(z)
}

/// Smallest threshold at `samples` whose false-alarm probability does not
/// exceed the cap.
pub fn cfar_threshold(samples: f64, max_false_alarm: f64) -> Result<f64> {
    let mut eps = 1.0 + q_inverse(max_false_alarm)? / samples.sqrt();
    while false_alarm_prob(eps, samples) > max_false_alarm {
        eps = eps.next_up();
    }
    Ok(eps)
}

/// Round a continuous sample count up and pick the threshold there. Returns
/// `None` if the targets cannot be met within the slot.
fn round_link(continuous: f64, snr: f64, cfg: &SensingConfig) -> Result<Option<(f64, f64)>> {
    const MAX_BUMPS: usize = 64;
    let cap = cfg.max_samples();
    // Solver noise on an integer optimum must not push it to the next integer.
    let mut samples = (continuous * (1.0 - 1e-7))
        .ceil()
        .max(cfg.min_samples.ceil())
        .min(cap);
    for _ in 0..MAX_BUMPS {
        let eps = cfar_threshold(samples, cfg.max_false_alarm)?;
        if detection_prob(eps, samples, snr) >= cfg.min_detection {
            return Ok(Some((samples, eps)));
        }
        if samples >= cap {
            break;
        }
        samples += 1.0;
    }
    Ok(None)
}

/// Summary of the SCA run behind one SU's plan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaRecord {
    pub iterations: usize,
    pub status: ScaStatus,
    pub history: Vec<ScaIterate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlanEntry {
    pub band: usize,
    pub snr: f64,
    /// Integer sample count; `None` when the band is not sensed this slot.
    pub samples: Option<f64>,
    pub threshold: Option<f64>,
    /// Sample count at the continuous optimum, before rounding.
    pub continuous_samples: Option<f64>,
    pub feasibility: LinkFeasibility,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuPlan {
    pub su: usize,
    pub battery: f64,
    /// One entry per link of the input state, in input order.
    pub entries: Vec<PlanEntry>,
    /// Sensing energy of the rounded plan, J.
    pub sensing_energy: f64,
    pub sca: Option<ScaRecord>,
}

impl SuPlan {
    pub fn entry(&self, band: usize) -> Option<&PlanEntry> {
        self.entries.iter().find(|e| e.band == band)
    }

    pub fn sensed(&self) -> impl Iterator<Item = &PlanEntry> {
        self.entries.iter().filter(|e| e.samples.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SensingPlan {
    pub sus: Vec<SuPlan>,
}

impl SensingPlan {
    pub fn total_energy(&self) -> f64 {
        self.sus.iter().map(|s| s.sensing_energy).sum()
    }

    pub fn report(&self) -> FeasibilityReport {
        FeasibilityReport {
            links: self
                .sus
                .iter()
                .flat_map(|s| s.entries.iter().map(|e| e.feasibility))
                .collect(),
        }
    }
}

/// Optimise one SU's sensing for the slot.
pub fn optimize_su(su: &SuState, cfg: &OptimizerConfig) -> Result<SuPlan> {
    let sensing = &cfg.sensing;
    let mut feasibility = scan_su(su, sensing);
    let mut active: Vec<usize> = (0..su.links.len())
        .filter(|&i| feasibility[i].feasible)
        .collect();
    let mut continuous = vec![None; su.links.len()];
    let mut rounded: Vec<Option<(f64, f64)>> = vec![None; su.links.len()];
    let mut sca = None;

    let drop_weakest = |active: &mut Vec<usize>, feasibility: &mut [LinkFeasibility]| {
        let (pos, &i) = active
            .iter()
            .enumerate()
            .min_by(|a, b| drop_order(&su.links[*a.1], &su.links[*b.1]))
            .expect("non-empty");
        active.remove(pos);
        feasibility[i].feasible = false;
        feasibility[i].limiting = LimitingConstraint::Battery;
    };

    while !active.is_empty() {
        let sub = SuState {
            su: su.su,
            battery: su.battery,
            links: active.iter().map(|&i| su.links[i]).collect(),
        };
        let settings = ScaSettings {
            tolerance: cfg.sca_tolerance,
            max_iterations: cfg.sca_max_iterations,
            initial_point: initial_point(std::slice::from_ref(&sub), sensing, cfg.form)?,
            solver: cfg.solver,
        };
        let outcome = match sca_solve(
            |z| build_subproblem(std::slice::from_ref(&sub), sensing, cfg.form, z),
            &settings,
        ) {
            Ok(outcome) => outcome,
            // The scan budgets with integer counts, so this only happens at
            // the edge of the battery; give up the weakest band and retry.
            Err(Error::Infeasible(msg)) if active.len() > 1 => {
                log::debug!("SU {}: {msg}; dropping a band", su.su);
                drop_weakest(&mut active, &mut feasibility);
                continue;
            }
            Err(e) => return Err(e),
        };
        for (k, &i) in active.iter().enumerate() {
            let theta = outcome.point[theta_index(k)];
            continuous[i] = Some(theta);
            rounded[i] = round_link(theta, su.links[i].snr, sensing)?;
            if rounded[i].is_none() {
                return Err(Error::Infeasible(format!(
                    "SU {} band {}: no integer sample count within the slot meets the targets",
                    su.su, su.links[i].band
                )));
            }
        }
        sca = Some(ScaRecord {
            iterations: outcome.iterations,
            status: outcome.status,
            history: outcome.history,
        });
        break;
    }

    // Rounding up may overdraw the battery.
    loop {
        let samples: Vec<f64> = active
            .iter()
            .map(|&i| rounded[i].expect("rounded").0)
            .collect();
        if sensing_energy(&samples, sensing.sample_time, sensing.sensing_power) <= su.battery {
            break;
        }
        drop_weakest(&mut active, &mut feasibility);
    }

    let entries: Vec<PlanEntry> = su
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let chosen = active.contains(&i).then(|| rounded[i]).flatten();
            PlanEntry {
                band: l.band,
                snr: l.snr,
                samples: chosen.map(|c| c.0),
                threshold: chosen.map(|c| c.1),
                continuous_samples: continuous[i],
                feasibility: feasibility[i],
            }
        })
        .collect();
    let samples: Vec<f64> = entries.iter().filter_map(|e| e.samples).collect();
    Ok(SuPlan {
        su: su.su,
        battery: su.battery,
        entries,
        sensing_energy: sensing_energy(&samples, sensing.sample_time, sensing.sensing_power),
        sca,
    })
}

/// Optimise every SU independently; plans come back in input order.
pub fn optimize_slot(sus: &[SuState], cfg: &OptimizerConfig) -> Result<SensingPlan> {
    let plans = sus
        .par_iter()
        .map(|su| optimize_su(su, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(SensingPlan { sus: plans })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::solve_gp;
    use proptest::prelude::*;

    fn link(band: usize, snr: f64) -> LinkState {
        LinkState {
            band,
            snr,
            prospect: snr,
        }
    }

    fn single(snr: f64, battery: f64) -> SuState {
        SuState {
            su: 0,
            battery,
            links: vec![link(0, snr)],
        }
    }

    #[test]
    fn grid_search_brackets_closed_form() {
        for snr in [0.25, 0.5, 1.0, 3.0] {
            let exact = closed_form_min_samples(snr, 0.1, 0.9).unwrap();
            let grid = grid_min_samples(snr, 0.1, 0.9, 1.0, 10.0 * exact + 10.0, 1e-4).unwrap();
            assert!(
                grid >= exact.ceil() && grid <= exact.ceil() + 1.0,
                "{snr}: {grid} vs {exact}"
            );
        }
        assert_eq!(grid_min_samples(0.1, 0.1, 0.9, 100.0, 105.0, 1e-4), None);
    }

    #[test]
    fn closed_form_examples() {
        let (f, d) = (0.1, 0.9);
        assert!((closed_form_min_samples(0.1, f, d).unwrap() - 724.29).abs() <= 0.01);
        assert!((closed_form_min_samples(1.0, f, d).unwrap() - 14.78).abs() <= 0.01);
        assert!(closed_form_min_samples(0.0, f, d).is_err());
        // Symmetric targets collapse to (Q^-1(F)(snr+2)/snr)^2.
        let snr = 0.37;
        let q = q_inverse(0.05).unwrap();
        let symmetric = closed_form_min_samples(snr, 0.05, 0.95).unwrap();
        assert!((symmetric - (q * (snr + 2.0) / snr).powi(2)).abs() <= 1e-9 * symmetric);
    }

    #[test]
    fn subproblem_shape() {
        let cfg = SensingConfig::default();
        let state = [single(0.1, 1.0)];
        let z = initial_point(&state, &cfg, ConstraintForm::Corrected).unwrap();
        let p = build_subproblem(&state, &cfg, ConstraintForm::Corrected, &z).unwrap();
        assert_eq!(p.num_vars(), 2);
        assert_eq!(p.num_constraints(), 5);
        assert!(p.is_exact());
    }

    #[test]
    fn empty_battery_is_infeasible() {
        let cfg = SensingConfig::default();
        let state = [single(0.1, 0.0)];
        let z = initial_point(&state, &cfg, ConstraintForm::Corrected).unwrap();
        let err = build_subproblem(&state, &cfg, ConstraintForm::Corrected, &z).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err}");
    }

    #[test]
    fn paper_form_refuses_high_detection_floor() {
        let cfg = SensingConfig::default();
        let state = [single(0.1, 1.0)];
        let z = vec![1000.0, 1.05];
        let err = build_subproblem(&state, &cfg, ConstraintForm::Paper, &z).unwrap_err();
        assert!(matches!(err, Error::Structural(_)), "{err}");
    }

    #[test]
    fn paper_form_with_low_detection_floor_is_condensed() {
        let cfg = SensingConfig {
            min_detection: 0.4,
            ..SensingConfig::default()
        };
        let state = [single(0.1, 1.0)];
        let z = initial_point(&state, &cfg, ConstraintForm::Paper).unwrap();
        let p = build_subproblem(&state, &cfg, ConstraintForm::Paper, &z).unwrap();
        assert!(!p.is_exact());
        assert_eq!(p.num_constraints(), 5);
        let plan = optimize_su(
            &state[0],
            &OptimizerConfig {
                sensing: cfg,
                form: ConstraintForm::Paper,
                ..OptimizerConfig::default()
            },
        )
        .unwrap();
        let sca = plan.sca.unwrap();
        assert!(sca
            .history
            .windows(2)
            .all(|w| w[1].objective <= w[0].objective + 1e-9));
    }

    #[test]
    fn optimize_examples() {
        let cfg = OptimizerConfig::default();
        let plan = optimize_su(&single(0.1, 1.0), &cfg).unwrap();
        assert_eq!(plan.entries[0].samples, Some(725.0));
        let continuous = plan.entries[0].continuous_samples.unwrap();
        assert!(
            (continuous - 724.287).abs() / 724.287 <= 1e-3,
            "{continuous}"
        );
        assert_eq!(plan.sca.as_ref().unwrap().status, ScaStatus::Exact);

        let plan = optimize_su(&single(1.0, 1.0), &cfg).unwrap();
        assert_eq!(plan.entries[0].samples, Some(100.0));
        let lean = OptimizerConfig {
            sensing: SensingConfig {
                min_samples: 1.0,
                ..SensingConfig::default()
            },
            ..OptimizerConfig::default()
        };
        let plan = optimize_su(&single(1.0, 1.0), &lean).unwrap();
        assert_eq!(plan.entries[0].samples, Some(15.0));
        assert_eq!(
            plan.entries[0].feasibility.limiting,
            LimitingConstraint::DetectionWindow
        );

        let plan = optimize_su(&single(50.0, 1.0), &cfg).unwrap();
        assert_eq!(plan.entries[0].samples, Some(100.0));
        assert_eq!(
            plan.entries[0].feasibility.limiting,
            LimitingConstraint::SampleFloor
        );
    }

    #[test]
    fn rounded_plan_meets_targets() {
        let cfg = OptimizerConfig::default();
        let s = &cfg.sensing;
        for snr in [0.004, 0.02, 0.1, 0.7, 3.0, 40.0] {
            let plan = optimize_su(&single(snr, 1.0), &cfg).unwrap();
            let e = &plan.entries[0];
            let (theta, eps) = (e.samples.unwrap(), e.threshold.unwrap());
            assert_eq!(theta.fract(), 0.0);
            assert!(theta >= s.min_samples && theta <= s.max_samples());
            assert!(false_alarm_prob(eps, theta) <= s.max_false_alarm);
            assert!(detection_prob(eps, theta, snr) >= s.min_detection);
            assert!(plan.sensing_energy <= plan.battery);
        }
    }

    #[test]
    fn scan_examples() {
        let cfg = SensingConfig::default();
        let report = feasibility_scan(&[single(1e-9, 1.0)], &cfg);
        assert!(!report.links[0].feasible);
        assert_eq!(report.links[0].limiting, LimitingConstraint::SampleCap);
        assert_eq!(report.links[0].min_samples, None);

        let report = feasibility_scan(&[single(0.1, 1.0)], &cfg);
        assert!(report.links[0].feasible);
        assert!((report.links[0].min_samples.unwrap() - 724.29).abs() < 0.01);

        let poor = SuState {
            su: 3,
            battery: cfg.sample_cost(),
            links: (0..7).map(|b| link(b, 1.0)).collect(),
        };
        let report = feasibility_scan(&[poor], &cfg);
        assert!(report
            .links
            .iter()
            .all(|l| !l.feasible && l.limiting == LimitingConstraint::Battery));
    }

    #[test]
    fn battery_drops_weakest_bands_first() {
        let cfg = OptimizerConfig::default();
        // Enough for two floor-bound bands but not three.
        let su = SuState {
            su: 0,
            battery: 250.0 * cfg.sensing.sample_cost(),
            links: vec![
                LinkState {
                    band: 0,
                    snr: 5.0,
                    prospect: 3.0,
                },
                LinkState {
                    band: 1,
                    snr: 5.0,
                    prospect: 1.0,
                },
                LinkState {
                    band: 2,
                    snr: 5.0,
                    prospect: 2.0,
                },
            ],
        };
        let plan = optimize_su(&su, &cfg).unwrap();
        let sensed: Vec<usize> = plan.sensed().map(|e| e.band).collect();
        assert_eq!(sensed, vec![0, 2]);
        assert_eq!(
            plan.entry(1).unwrap().feasibility.limiting,
            LimitingConstraint::Battery
        );
        assert!(plan.sensing_energy <= su.battery);
    }

    #[test]
    fn two_sus_separate() {
        let cfg = SensingConfig::default();
        let a = SuState {
            su: 0,
            battery: 1.0,
            links: vec![link(0, 0.1), link(1, 0.3)],
        };
        let b = single(0.05, 1.0);
        let joint = [a.clone(), b.clone()];
        let z = initial_point(&joint, &cfg, ConstraintForm::Corrected).unwrap();
        let p = build_subproblem(&joint, &cfg, ConstraintForm::Corrected, &z).unwrap();
        let together = solve_gp(&p, &z, &SolverSettings::default()).unwrap();

        let mut apart = Vec::new();
        for su in [a, b] {
            let s = std::slice::from_ref(&su);
            let z = initial_point(s, &cfg, ConstraintForm::Corrected).unwrap();
            let p = build_subproblem(s, &cfg, ConstraintForm::Corrected, &z).unwrap();
            apart.extend(solve_gp(&p, &z, &SolverSettings::default()).unwrap().point);
        }
        for (x, y) in together.point.iter().zip(&apart) {
            assert!((x - y).abs() <= 1e-6 * y.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn constraint_form_strings() {
        for form in [ConstraintForm::Corrected, ConstraintForm::Paper] {
            assert_eq!(form.as_str().parse::<ConstraintForm>().unwrap(), form);
        }
        assert!("other".parse::<ConstraintForm>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn samples_monotone_in_snr(a in -2.0f64..1.0, b in -2.0f64..1.0) {
            let cfg = OptimizerConfig::default();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let run = |g: f64| optimize_su(&single(10f64.powf(g), 1.0), &cfg).unwrap().entries[0].continuous_samples.unwrap();
            prop_assert!(run(hi) <= run(lo) * (1.0 + 1e-6));
        }

        #[test]
        fn samples_monotone_in_detection_floor(d1 in 0.55f64..0.99, d2 in 0.55f64..0.99) {
            let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
            let run = |d: f64| {
                let cfg = OptimizerConfig {
                    sensing: SensingConfig { min_detection: d, ..SensingConfig::default() },
                    ..OptimizerConfig::default()
                };
                optimize_su(&single(0.2, 1.0), &cfg).unwrap().entries[0].continuous_samples.unwrap()
            };
            prop_assert!(run(lo) <= run(hi) * (1.0 + 1e-6));
        }
    }
}
