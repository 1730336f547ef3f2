//! Time-slotted network simulation: per slot, sensing SUs optimise their
//! sensing plan, every SU harvests what its region allows, and batteries are
//! carried to the next slot.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::gp::SolverSettings;
use crate::model::{
    battery_update, channel_gain, harvest_indicator, snr, Band, ChannelParams, Position,
    SensingConfig,
};
use crate::region::{
    classification_error, label_ground_truth, RegionClassifier, RegionLabel, SvmConfig,
};
use crate::sensing::{
    closed_form_min_samples, optimize_su, ConstraintForm, LimitingConstraint, LinkState,
    OptimizerConfig, ScaRecord, SuState,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

impl Arena {
    pub fn centre(&self) -> Position {
        Position::new(0.5 * self.width, 0.5 * self.height)
    }

    pub fn contains(&self, p: &Position) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Explicit(Vec<Position>),
    /// Uniform positions drawn from the scenario seed.
    Random {
        count: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    /// Every SU senses every slot.
    AllSensing,
    /// Only a training subset senses; the rest take labels from the SVM.
    Svm { training_fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub arena: Arena,
    pub bands: Vec<Band>,
    pub layout: Layout,
    pub sensing: SensingConfig,
    pub channel: ChannelParams,
    pub mode: Mode,
    pub svm: SvmConfig,
    pub sca: ScaConfig,
    pub constraint_form: ConstraintForm,
    /// Battery of every SU before the first slot, J.
    pub initial_battery: f64,
    pub seed: u64,
}

/// Carrier frequencies of the seven default bands, Hz.
pub const DEFAULT_FREQUENCIES: [f64; 7] = [0.9e9, 1.24e9, 1.56e9, 1.78e9, 2.19e9, 2.46e9, 2.68e9];

impl Default for Scenario {
    fn default() -> Self {
        let arena = Arena {
            width: 40.0,
            height: 40.0,
        };
        let sensing = SensingConfig::default();
        let bands = DEFAULT_FREQUENCIES
            .iter()
            .map(|&frequency| Band {
                frequency,
                pu_power: 1.0,
                efficiency: 0.45,
                pu_position: arena.centre(),
                activity: 1.0,
            })
            .collect();
        Self {
            arena,
            bands,
            layout: Layout::Random { count: 60 },
            sensing,
            channel: ChannelParams::default(),
            mode: Mode::AllSensing,
            svm: SvmConfig::default(),
            sca: ScaConfig::default(),
            constraint_form: ConstraintForm::Corrected,
            initial_battery: sensing.sensing_power * sensing.slot_length,
            seed: 0,
        }
    }
}

/// Independent random streams derived from the scenario seed.
#[derive(Debug, Clone, Copy)]
enum Stream {
    Layout = 0,
    Training = 1,
    Activity = 2,
}

fn rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream as u64);
    r
}

/// `count` i.i.d. uniform positions in the arena.
pub fn place_random(count: usize, arena: &Arena, seed: u64) -> Vec<Position> {
    let mut r = rng(seed, Stream::Layout);
    (0..count)
        .map(|_| {
            Position::new(
                r.random::<f64>() * arena.width,
                r.random::<f64>() * arena.height,
            )
        })
        .collect()
}

/// Size of the training subset for a fraction of `m` SUs, `ceil(f m)`.
pub fn training_count(fraction: f64, m: usize) -> usize {
    // Guard against products like 0.35 * 60 = 21.000000000000004.
    ((fraction * m as f64 - 1e-9).ceil().max(0.0) as usize).min(m)
}

impl Scenario {
    pub fn su_positions(&self) -> Vec<Position> {
        match &self.layout {
            Layout::Explicit(p) => p.clone(),
            Layout::Random { count } => place_random(*count, &self.arena, self.seed),
        }
    }

    pub fn su_count(&self) -> usize {
        match &self.layout {
            Layout::Explicit(p) => p.len(),
            Layout::Random { count } => *count,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |path: &str, e: Error| Error::Config {
            path: path.into(),
            message: e.to_string(),
        };
        self.sensing.validate().map_err(|e| bad("sensing", e))?;
        self.channel.validate().map_err(|e| bad("channel", e))?;
        if !(self.arena.width > 0.0 && self.arena.height > 0.0) {
            return Err(bad("arena", Error::domain("arena sides must be positive")));
        }
        if self.bands.is_empty() {
            return Err(bad("bands", Error::domain("at least one band is required")));
        }
        for (b, band) in self.bands.iter().enumerate() {
            band.validate()
                .map_err(|e| bad(&format!("bands[{b}]"), e))?;
        }
        if self.su_count() == 0 {
            return Err(bad("sus", Error::domain("at least one SU is required")));
        }
        if let Layout::Explicit(p) = &self.layout {
            if let Some(i) = p.iter().position(|q| !self.arena.contains(q)) {
                return Err(bad(
                    &format!("sus.positions[{i}]"),
                    Error::domain("SU outside the arena"),
                ));
            }
        }
        if let Mode::Svm { training_fraction } = self.mode {
            if !(training_fraction > 0.0 && training_fraction <= 1.0) {
                return Err(bad(
                    "mode.training_fraction",
                    Error::domain("fraction must lie in (0, 1]"),
                ));
            }
        }
        if self.constraint_form == ConstraintForm::Paper && self.sensing.min_detection >= 0.5 {
            return Err(bad(
                "constraint_form",
                Error::Structural("paper-form constraints need a detection floor below 0.5".into()),
            ));
        }
        if !(self.svm.penalty > 0.0) {
            return Err(bad(
                "svm.penalty",
                Error::domain("slack penalty must be positive"),
            ));
        }
        if !(self.sca.tolerance >= 0.0) || self.sca.max_iterations == 0 {
            return Err(bad(
                "sca",
                Error::domain("need a non-negative tolerance and at least one iteration"),
            ));
        }
        if !(self.initial_battery >= 0.0) {
            return Err(bad(
                "initial_battery",
                Error::domain("initial battery must be non-negative"),
            ));
        }
        Ok(())
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            sensing: self.sensing,
            form: self.constraint_form,
            sca_tolerance: self.sca.tolerance,
            sca_max_iterations: self.sca.max_iterations,
            solver: SolverSettings::default(),
        }
    }
}

/// Static physics of one (SU, band) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkGeometry {
    pub distance: f64,
    pub gain: f64,
    /// Average received PU power, W.
    pub rx_power: f64,
    pub snr: f64,
    /// Whether the detector targets can be met within one slot.
    pub detectable: bool,
    pub truth: RegionLabel,
}

/// Geometry of every (SU, band) pair, indexed `[su][band]`.
pub fn link_geometry(
    scenario: &Scenario,
    positions: &[Position],
) -> Result<Vec<Vec<LinkGeometry>>> {
    let s = &scenario.sensing;
    positions
        .iter()
        .map(|p| {
            scenario
                .bands
                .iter()
                .map(|band| {
                    let distance = p.distance(&band.pu_position);
                    let gain = channel_gain(distance, band.frequency, &scenario.channel)?;
                    let rx_power = band.pu_power * gain;
                    let gamma = snr(band.pu_power, gain, scenario.channel.noise_power);
                    let detectable =
                        closed_form_min_samples(gamma, s.max_false_alarm, s.min_detection)
                            .is_ok_and(|n| n.max(s.min_samples).ceil() <= s.max_samples());
                    Ok(LinkGeometry {
                        distance,
                        gain,
                        rx_power,
                        snr: gamma,
                        detectable,
                        truth: label_ground_truth(rx_power, s.harvest_threshold, detectable),
                    })
                })
                .collect()
        })
        .collect()
}

/// Per-(SU, band) outcome of a slot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkRecord {
    pub band: usize,
    /// Samples sensed on this band (0 when not sensed).
    pub samples: f64,
    pub threshold: Option<f64>,
    pub pu_active: bool,
    /// Harvesting indicator.
    pub delta: bool,
    /// Label the SU acts on: the true one if it sensed, else the prediction.
    pub label: RegionLabel,
    pub truth: RegionLabel,
    pub feasible: bool,
    pub limiting: Option<LimitingConstraint>,
    pub harvest: f64,
    pub spend: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuRecord {
    pub su: usize,
    /// Whether this SU sensed (every SU in all-sensing mode).
    pub sensing: bool,
    /// The optimiser failed for this SU and it sat the slot out.
    pub skipped: bool,
    pub battery_before: f64,
    pub battery_after: f64,
    pub harvest: f64,
    pub spend: f64,
    pub links: Vec<LinkRecord>,
    #[serde(skip)]
    pub sca: Option<ScaRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlotRecord {
    /// 1-based slot index.
    pub slot: usize,
    pub sus: Vec<SuRecord>,
    pub total_sensing_energy: f64,
    /// Label error over all (SU, band) pairs this slot.
    pub error: f64,
}

impl SlotRecord {
    pub fn sca_iterations(&self) -> usize {
        self.sus
            .iter()
            .filter_map(|s| s.sca.as_ref())
            .map(|s| s.iterations)
            .sum()
    }
}

/// Final-slot picture of one band, for region maps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionRow {
    pub su: usize,
    pub position: Position,
    pub truth: RegionLabel,
    pub predicted: RegionLabel,
    pub training: bool,
    pub support_vector: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub positions: Vec<Position>,
    pub geometry: Vec<Vec<LinkGeometry>>,
    pub slots: Vec<SlotRecord>,
    /// `region_maps[b]` has one row per SU.
    pub region_maps: Vec<Vec<RegionRow>>,
}

impl RunOutput {
    pub fn total_sensing_energy(&self) -> f64 {
        self.slots.iter().map(|s| s.total_sensing_energy).sum()
    }

    pub fn mean_error(&self) -> f64 {
        self.slots.iter().map(|s| s.error).sum::<f64>() / self.slots.len() as f64
    }

    pub fn sca_iterations(&self) -> usize {
        self.slots.iter().map(SlotRecord::sca_iterations).sum()
    }
}

fn draw_training(m: usize, fraction: f64, r: &mut ChaCha8Rng) -> Vec<bool> {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(r);
    let mut flags = vec![false; m];
    for &i in &order[..training_count(fraction, m)] {
        flags[i] = true;
    }
    flags
}

struct Trained {
    predicted: Vec<Vec<RegionLabel>>,
    support: Vec<Vec<bool>>,
}

/// Train one classifier per band on the training SUs' true labels and
/// predict every SU.
fn classify(
    scenario: &Scenario,
    positions: &[Position],
    geometry: &[Vec<LinkGeometry>],
    training: &[bool],
) -> Result<Trained> {
    let idx: Vec<usize> = (0..positions.len()).filter(|&i| training[i]).collect();
    let train_pos: Vec<Position> = idx.iter().map(|&i| positions[i]).collect();
    let per_band = (0..scenario.bands.len())
        .into_par_iter()
        .map(|b| {
            let labels: Vec<RegionLabel> = idx.iter().map(|&i| geometry[i][b].truth).collect();
            let clf = RegionClassifier::train(&train_pos, &labels, &scenario.svm)?;
            let predicted: Vec<RegionLabel> = positions.iter().map(|p| clf.predict(p)).collect();
            let mut support = vec![false; positions.len()];
            for (k, flag) in clf.support_flags().into_iter().enumerate() {
                support[idx[k]] = flag;
            }
            Ok((predicted, support))
        })
        .collect::<Result<Vec<_>>>()?;
    let (by_band, support_by_band): (Vec<_>, Vec<_>) = per_band.into_iter().unzip();
    // Transpose to [su][band].
    let predicted = (0..positions.len())
        .map(|i| {
            by_band
                .iter()
                .map(|col: &Vec<RegionLabel>| col[i])
                .collect()
        })
        .collect();
    let support = (0..positions.len())
        .map(|i| {
            support_by_band
                .iter()
                .map(|col: &Vec<bool>| col[i])
                .collect()
        })
        .collect();
    Ok(Trained { predicted, support })
}

pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    let positions = scenario.su_positions();
    let geometry = link_geometry(scenario, &positions)?;
    let m = positions.len();
    let nb = scenario.bands.len();
    let s = &scenario.sensing;
    let optimizer = scenario.optimizer();

    let mut training_rng = rng(scenario.seed, Stream::Training);
    let mut activity_rng = rng(scenario.seed, Stream::Activity);
    let fraction = match scenario.mode {
        Mode::AllSensing => None,
        Mode::Svm { training_fraction } => Some(training_fraction),
    };
    let mut training = match fraction {
        None => vec![true; m],
        Some(f) => draw_training(m, f, &mut training_rng),
    };
    let mut trained = match fraction {
        Some(_) => Some(classify(scenario, &positions, &geometry, &training)?),
        None => None,
    };

    let mut battery = vec![scenario.initial_battery; m];
    let mut slots = Vec::with_capacity(s.slots);
    for slot in 1..=s.slots {
        if let (Some(f), true, true) = (fraction, scenario.svm.redraw_each_slot, slot > 1) {
            training = draw_training(m, f, &mut training_rng);
            trained = Some(classify(scenario, &positions, &geometry, &training)?);
        }
        let active: Vec<bool> = scenario
            .bands
            .iter()
            .map(|b| {
                let u: f64 = activity_rng.random();
                b.activity >= 1.0 || u < b.activity
            })
            .collect();

        let plans: Vec<Option<Result<_>>> = (0..m)
            .into_par_iter()
            .map(|i| {
                training[i].then(|| {
                    let state = SuState {
                        su: i,
                        battery: battery[i],
                        links: (0..nb)
                            .map(|b| LinkState {
                                band: b,
                                snr: geometry[i][b].snr,
                                prospect: scenario.bands[b].efficiency * geometry[i][b].rx_power,
                            })
                            .collect(),
                    };
                    optimize_su(&state, &optimizer)
                })
            })
            .collect();

        let mut sus = Vec::with_capacity(m);
        for (i, plan) in plans.into_iter().enumerate() {
            let (plan, skipped) = match plan {
                Some(Ok(p)) => (Some(p), false),
                Some(Err(e)) => {
                    log::warn!("slot {slot}: SU {i} skips sensing: {e}");
                    (None, true)
                }
                None => (None, false),
            };
            let mut links = Vec::with_capacity(nb);
            for (b, band) in scenario.bands.iter().enumerate() {
                let g = &geometry[i][b];
                let entry = plan.as_ref().and_then(|p| p.entry(b));
                let samples = entry.and_then(|e| e.samples).unwrap_or(0.0);
                let label = if training[i] {
                    g.truth
                } else {
                    trained.as_ref().expect("svm mode").predicted[i][b]
                };
                // Sensing SUs know delta; the others act on the predicted
                // label, and the harvester only responds to real power.
                let physical = harvest_indicator(g.rx_power, s.harvest_threshold, active[b]);
                let delta = if training[i] {
                    physical
                } else {
                    physical && label == RegionLabel::HR
                };
                let harvest_time = s.slot_length - samples * s.sample_time;
                let harvest = if delta {
                    band.efficiency * harvest_time * band.pu_power * g.gain
                } else {
                    0.0
                };
                links.push(LinkRecord {
                    band: b,
                    samples,
                    threshold: entry.and_then(|e| e.threshold),
                    pu_active: active[b],
                    delta,
                    label,
                    truth: g.truth,
                    feasible: entry.is_some_and(|e| e.feasibility.feasible),
                    limiting: entry.map(|e| e.feasibility.limiting),
                    harvest,
                    spend: samples * s.sample_time * s.sensing_power,
                });
            }
            let spend = plan.as_ref().map_or(0.0, |p| p.sensing_energy);
            let harvest: f64 = links.iter().map(|l| l.harvest).sum();
            let before = battery[i];
            battery[i] = battery_update(before, harvest, spend);
            sus.push(SuRecord {
                su: i,
                sensing: training[i],
                skipped,
                battery_before: before,
                battery_after: battery[i],
                harvest,
                spend,
                links,
                sca: plan.and_then(|p| p.sca),
            });
        }
        let total_sensing_energy = sus.iter().map(|r| r.spend).sum();
        let recorded: Vec<RegionLabel> = sus
            .iter()
            .flat_map(|r| r.links.iter().map(|l| l.label))
            .collect();
        let truth: Vec<RegionLabel> = sus
            .iter()
            .flat_map(|r| r.links.iter().map(|l| l.truth))
            .collect();
        slots.push(SlotRecord {
            slot,
            sus,
            total_sensing_energy,
            error: classification_error(&recorded, &truth)?,
        });
    }

    let region_maps = (0..nb)
        .map(|b| {
            (0..m)
                .map(|i| RegionRow {
                    su: i,
                    position: positions[i],
                    truth: geometry[i][b].truth,
                    predicted: trained
                        .as_ref()
                        .map_or(geometry[i][b].truth, |t| t.predicted[i][b]),
                    training: fraction.is_some() && training[i],
                    support_vector: trained.as_ref().is_some_and(|t| t.support[i][b]),
                })
                .collect()
        })
        .collect();

    Ok(RunOutput {
        positions,
        geometry,
        slots,
        region_maps,
    })
}

/// One row of a training-fraction sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub runs: usize,
    /// Total sensing energy over the horizon, J.
    pub energy_mean: f64,
    pub energy_std: f64,
    pub error_mean: f64,
    pub error_std: f64,
    pub sca_iterations_mean: f64,
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Monte-Carlo over seeds of the svm-mode run at each training fraction.
/// Each seed fixes the layout and a nested family of training subsets.
pub fn energy_vs_training_fraction(
    scenario: &Scenario,
    fractions: &[f64],
    seeds: &[u64],
) -> Result<Vec<SweepRow>> {
    if seeds.is_empty() {
        return Err(Error::domain("sweep needs at least one seed"));
    }
    if let Some(f) = fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::domain(format!(
            "training fraction {f} is outside (0, 1]"
        )));
    }
    let mut sorted = fractions.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();

    let jobs: Vec<(usize, u64)> = (0..sorted.len())
        .flat_map(|k| seeds.iter().map(move |&s| (k, s)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(k, seed)| {
            let sc = Scenario {
                mode: Mode::Svm {
                    training_fraction: sorted[k],
                },
                seed,
                ..scenario.clone()
            };
            let out = run(&sc)?;
            Ok((
                out.total_sensing_energy(),
                out.mean_error(),
                out.sca_iterations() as f64,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(sorted
        .iter()
        .enumerate()
        .map(|(k, &fraction)| {
            let mine: Vec<&(f64, f64, f64)> = jobs
                .iter()
                .zip(&results)
                .filter(|((j, _), _)| *j == k)
                .map(|(_, r)| r)
                .collect();
            let energy: Vec<f64> = mine.iter().map(|r| r.0).collect();
            let error: Vec<f64> = mine.iter().map(|r| r.1).collect();
            let iters: Vec<f64> = mine.iter().map(|r| r.2).collect();
            let (energy_mean, energy_std) = mean_std(&energy);
            let (error_mean, error_std) = mean_std(&error);
            SweepRow {
                fraction,
                runs: mine.len(),
                energy_mean,
                energy_std,
                error_mean,
                error_std,
                sca_iterations_mean: mean_std(&iters).0,
            }
        })
        .collect())
}
