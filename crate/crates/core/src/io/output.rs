//! CSV and JSON emitters for run and sweep results.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::scenario_to_json;
use crate::sim::{Mode, RunOutput, Scenario, SweepRow};
use crate::{Error, Result};

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    csv::Writer::from_path(path).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

fn write_rows<R: Serialize>(path: &Path, rows: impl IntoIterator<Item = R>) -> Result<()> {
    let wrap = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv_writer(path)?;
    for row in rows {
        w.serialize(row).map_err(wrap)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Serialize)]
struct PlanRow {
    slot: usize,
    su: usize,
    band: usize,
    theta: f64,
    epsilon: f64,
    feasible: bool,
    limiting_constraint: &'static str,
    #[serde(rename = "sensing_energy_J")]
    sensing_energy: f64,
}

/// One row per (slot, SU, band). Bands an SU did not sense carry zero
/// samples and threshold; SUs that did not sense at all have limiting
/// constraint `not_sensing`.
pub fn write_plan_csv(path: &Path, out: &RunOutput) -> Result<()> {
    let rows = out.slots.iter().flat_map(|slot| {
        slot.sus.iter().flat_map(move |r| {
            r.links.iter().map(move |l| PlanRow {
                slot: slot.slot,
                su: r.su,
                band: l.band,
                theta: l.samples,
                epsilon: l.threshold.unwrap_or(0.0),
                feasible: l.feasible,
                limiting_constraint: match l.limiting {
                    Some(c) => c.as_str(),
                    None if r.skipped => "solver_error",
                    None => "not_sensing",
                },
                sensing_energy: l.spend,
            })
        })
    });
    write_rows(path, rows)
}

#[derive(Serialize)]
struct RegionMapRow {
    su: usize,
    x_m: f64,
    y_m: f64,
    band: usize,
    truth_label: &'static str,
    predicted_label: &'static str,
    is_training: bool,
    is_support_vector: bool,
}

/// One CSV per band, `region_map_band{b}.csv`, one row per SU. Returns the
/// paths written.
pub fn write_region_maps(dir: &Path, out: &RunOutput) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for (b, rows) in out.region_maps.iter().enumerate() {
        let path = dir.join(format!("region_map_band{b}.csv"));
        write_rows(
            &path,
            rows.iter().map(|r| RegionMapRow {
                su: r.su,
                x_m: r.position.x,
                y_m: r.position.y,
                band: b,
                truth_label: r.truth.as_str(),
                predicted_label: r.predicted.as_str(),
                is_training: r.training,
                is_support_vector: r.support_vector,
            }),
        )?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Serialize)]
struct LedgerRow {
    slot: usize,
    su: usize,
    sensing: bool,
    skipped: bool,
    #[serde(rename = "battery_before_J")]
    battery_before: f64,
    #[serde(rename = "harvest_J")]
    harvest: f64,
    #[serde(rename = "spend_J")]
    spend: f64,
    #[serde(rename = "battery_after_J")]
    battery_after: f64,
}

pub fn write_ledger_csv(path: &Path, out: &RunOutput) -> Result<()> {
    let rows = out.slots.iter().flat_map(|slot| {
        slot.sus.iter().map(move |r| LedgerRow {
            slot: slot.slot,
            su: r.su,
            sensing: r.sensing,
            skipped: r.skipped,
            battery_before: r.battery_before,
            harvest: r.harvest,
            spend: r.spend,
            battery_after: r.battery_after,
        })
    });
    write_rows(path, rows)
}

#[derive(Serialize)]
struct LinkRow {
    slot: usize,
    su: usize,
    band: usize,
    samples: f64,
    pu_active: bool,
    delta: bool,
    label: &'static str,
    truth_label: &'static str,
    #[serde(rename = "harvest_J")]
    harvest: f64,
    #[serde(rename = "spend_J")]
    spend: f64,
}

/// Per-(slot, SU, band) harvesting detail.
pub fn write_links_csv(path: &Path, out: &RunOutput) -> Result<()> {
    let rows = out.slots.iter().flat_map(|slot| {
        slot.sus.iter().flat_map(move |r| {
            r.links.iter().map(move |l| LinkRow {
                slot: slot.slot,
                su: r.su,
                band: l.band,
                samples: l.samples,
                pu_active: l.pu_active,
                delta: l.delta,
                label: l.label.as_str(),
                truth_label: l.truth.as_str(),
                harvest: l.harvest,
                spend: l.spend,
            })
        })
    });
    write_rows(path, rows)
}

/// Every SCA iterate of the run as JSON lines.
pub fn write_sca_trace(path: &Path, out: &RunOutput) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for slot in &out.slots {
        for r in &slot.sus {
            let Some(sca) = &r.sca else { continue };
            for it in &sca.history {
                let line = json!({
                    "slot": slot.slot,
                    "su": r.su,
                    "r": it.iteration,
                    "chi": it.objective,
                    "z": it.point,
                    "status": sca.status,
                });
                writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Summary entry for a single run.
pub fn run_summary_row(scenario: &Scenario, out: &RunOutput) -> SweepRow {
    SweepRow {
        fraction: match scenario.mode {
            Mode::AllSensing => 1.0,
            Mode::Svm { training_fraction } => training_fraction,
        },
        runs: 1,
        energy_mean: out.total_sensing_energy(),
        energy_std: 0.0,
        error_mean: out.mean_error(),
        error_std: 0.0,
        sca_iterations_mean: out.sca_iterations() as f64,
    }
}

/// `summary.json`: entries sorted by fraction, the effective configuration
/// and run metadata.
pub fn write_summary(
    path: &Path,
    scenario: &Scenario,
    entries: &[SweepRow],
    seeds: &[u64],
) -> Result<()> {
    let mut sorted = entries.to_vec();
    sorted.sort_by(|a, b| a.fraction.total_cmp(&b.fraction));
    let doc = json!({
        "entries": sorted.iter().map(|r| json!({
            "fraction": r.fraction,
            "runs": r.runs,
            "energy_mean_J": r.energy_mean,
            "energy_std_J": r.energy_std,
            "error_mean": r.error_mean,
            "error_std": r.error_std,
            "sca_iterations_mean": r.sca_iterations_mean,
        })).collect::<Vec<_>>(),
        "config": scenario_to_json(scenario),
        "metadata": {
            "seeds": seeds,
            // Non-training SUs predicted HR harvest without sensing first.
            "unverified_harvest": !matches!(scenario.mode, Mode::AllSensing) || entries.len() > 1,
            "generator": concat!("rfharvest ", env!("CARGO_PKG_VERSION")),
        },
    });
    let text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
