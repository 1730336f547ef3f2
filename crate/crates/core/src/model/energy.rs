use crate::{Error, Result};

/// Energy spent sensing `samples[b]` samples on every band, J.
pub fn sensing_energy(samples: &[f64], sample_time: f64, sensing_power: f64) -> f64 {
    samples
        .iter()
        .map(|n| n * sample_time * sensing_power)
        .sum()
}

/// Per-band inputs of the harvested-energy sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandHarvest {
    pub indicator: bool,
    pub efficiency: f64,
    pub samples: f64,
    pub pu_power: f64,
    pub gain: f64,
}

/// Energy harvested over one slot: each band contributes
/// `eta (T - samples T_s) P h` when its indicator is set.
pub fn harvested_energy(bands: &[BandHarvest], slot_length: f64, sample_time: f64) -> Result<f64> {
    let mut total = 0.0;
    for (b, band) in bands.iter().enumerate() {
        let sensing_time = band.samples * sample_time;
        if sensing_time > slot_length * (1.0 + 1e-12) {
            return Err(Error::Schedule(format!(
                "band {b}: {} samples need {sensing_time} s, slot is {slot_length} s",
                band.samples
            )));
        }
        if band.indicator {
            let harvest_time = (slot_length - sensing_time).max(0.0);
            total += band.efficiency * harvest_time * band.pu_power * band.gain;
        }
    }
    Ok(total)
}

/// Battery level at the end of a slot, floored at zero.
pub fn battery_update(previous: f64, harvested: f64, spent: f64) -> f64 {
    (previous + harvested - spent).max(0.0)
}

/// Running energy state of one SU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLedger {
    pub initial: f64,
    pub battery: f64,
    pub last_spend: f64,
    pub last_harvest: f64,
}

impl EnergyLedger {
    pub fn new(initial: f64) -> Self {
        Self {
            initial,
            battery: initial,
            last_spend: 0.0,
            last_harvest: 0.0,
        }
    }

    /// Close a slot. Spending more than the stored charge is a caller bug.
    pub fn settle(&mut self, harvested: f64, spent: f64) -> Result<f64> {
        if spent > self.battery {
            return Err(Error::Schedule(format!(
                "sensing spend {spent} J exceeds stored energy {} J",
                self.battery
            )));
        }
        self.last_spend = spent;
        self.last_harvest = harvested;
        self.battery = battery_update(self.battery, harvested, spent);
        Ok(self.battery)
    }
}
