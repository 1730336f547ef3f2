//! Physical and statistical primitives: free-space channel gains, energy
//! detector statistics, the harvesting indicator and per-slot energy
//! accounting. Everything here is SI (W, J, s, Hz, m).

mod channel;
mod detection;
mod energy;

pub use channel::{channel_gain, harvest_indicator, hr_radius, snr};
pub use detection::{detection_prob, false_alarm_prob, q_function, q_inverse, EnergyDetector};
pub use energy::{battery_update, harvested_energy, sensing_energy, BandHarvest, EnergyLedger};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A point in the arena, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One primary-user band. Each band is owned by exactly one PU.
#[derive(Debug, Clone, PartialEq)]
pub struct Band {
    /// Carrier frequency, Hz.
    pub frequency: f64,
    /// PU transmit power, W.
    pub pu_power: f64,
    /// RF-to-DC conversion efficiency of the rectifier for this band.
    pub efficiency: f64,
    pub pu_position: Position,
    /// Probability that the PU transmits in a given slot (1 = always on).
    pub activity: f64,
}

impl Band {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0) {
            return Err(Error::domain("band frequency must be positive"));
        }
        if !(self.pu_power >= 0.0) {
            return Err(Error::domain("PU transmit power must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(Error::domain("RF-to-DC efficiency must lie in [0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.activity) {
            return Err(Error::domain("PU activity probability must lie in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Linear transmit antenna gain.
    pub tx_gain: f64,
    /// Linear receive antenna gain.
    pub rx_gain: f64,
    /// m/s
    pub speed_of_light: f64,
    /// Receiver noise power in W. The detector statistics are normalised to
    /// it, so it only enters through the SNR.
    pub noise_power: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            tx_gain: 1.0,
            rx_gain: 1.0,
            speed_of_light: 3.0e8,
            noise_power: 1.0e-3,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tx_gain > 0.0 && self.rx_gain > 0.0) {
            return Err(Error::domain("antenna gains must be positive"));
        }
        if !(self.speed_of_light > 0.0) {
            return Err(Error::domain("speed of light must be positive"));
        }
        if !(self.noise_power > 0.0) {
            return Err(Error::domain("noise power must be positive"));
        }
        Ok(())
    }
}

/// Sensing and slot timing parameters shared by every SU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingConfig {
    /// Duration of one energy-detector sample, s.
    pub sample_time: f64,
    /// Slot length, s.
    pub slot_length: f64,
    /// Sensing circuit power, W.
    pub sensing_power: f64,
    /// Upper bound on the false-alarm probability.
    pub max_false_alarm: f64,
    /// Lower bound on the detection probability.
    pub min_detection: f64,
    /// Smallest sample count for which the Gaussian approximation holds.
    pub min_samples: f64,
    /// Harvesting circuit sensitivity, W.
    pub harvest_threshold: f64,
    /// Battery threshold, J. Reserved: carried through configuration but not
    /// used by any constraint.
    pub battery_threshold: f64,
    /// Number of slots in the horizon.
    pub slots: usize,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            sample_time: 1.0e-6,
            slot_length: 1.0,
            sensing_power: 1.0e-3,
            max_false_alarm: 0.1,
            min_detection: 0.9,
            min_samples: 100.0,
            harvest_threshold: 1.0e-5,
            battery_threshold: 1.0e-3,
            slots: 10,
        }
    }
}

impl SensingConfig {
    pub fn validate(&self) -> Result<()> {
        let (f, d) = (self.max_false_alarm, self.min_detection);
        if !(0.0 < f && f < 0.5 && 0.5 < d && d < 1.0) {
            return Err(Error::domain(format!(
                "need 0 < false-alarm cap < 0.5 < detection floor < 1, got {f} and {d}"
            )));
        }
        if !(self.sample_time > 0.0 && self.slot_length > 0.0) {
            return Err(Error::domain(
                "sample time and slot length must be positive",
            ));
        }
        if !(self.sensing_power >= 0.0 && self.harvest_threshold >= 0.0) {
            return Err(Error::domain("powers must be non-negative"));
        }
        if !(self.min_samples >= 1.0) {
            return Err(Error::domain("minimum sample count must be at least 1"));
        }
        if self.min_samples > self.max_samples() {
            return Err(Error::domain(format!(
                "minimum sample count {} exceeds the per-slot cap {}",
                self.min_samples,
                self.max_samples()
            )));
        }
        if self.slots == 0 {
            return Err(Error::domain("horizon must contain at least one slot"));
        }
        Ok(())
    }

    /// Largest whole number of samples that fits in one slot.
    ///
    /// `1.0 / 1e-6` is `999999.9999999999` in binary floating point, so the
    /// ratio is snapped to the nearest integer when it is within rounding.
    pub fn max_samples(&self) -> f64 {
        let ratio = self.slot_length / self.sample_time;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
            nearest
        } else {
            ratio.floor()
        }
    }

    /// Energy spent per sensed sample, J.
    pub fn sample_cost(&self) -> f64 {
        self.sample_time * self.sensing_power
    }

    pub fn detector(&self) -> EnergyDetector {
        EnergyDetector {
            min_samples: self.min_samples,
        }
    }
}

/// Convert dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts / 1e-3).log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_conversions() {
        assert_eq!(dbm_to_watts(0.0), 1e-3);
        assert!((dbm_to_watts(-20.0) - 1e-5).abs() < 1e-20);
        assert!((watts_to_dbm(1.0) - 30.0).abs() < 1e-12);
    }

    #[test]
    fn max_samples_snaps_to_integer() {
        let cfg = SensingConfig::default();
        assert_eq!(cfg.max_samples(), 1.0e6);
        let odd = SensingConfig {
            sample_time: 3e-7,
            ..cfg
        };
        assert_eq!(odd.max_samples(), 3_333_333.0);
    }

    #[test]
    fn config_ranges() {
        let cfg = SensingConfig::default();
        assert!(cfg.validate().is_ok());
        assert!(SensingConfig {
            max_false_alarm: 0.6,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(SensingConfig {
            min_detection: 0.5,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(SensingConfig {
            min_samples: 0.5,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(SensingConfig {
            min_samples: 2e6,
            ..cfg
        }
        .validate()
        .is_err());
        assert!(SensingConfig { slots: 0, ..cfg }.validate().is_err());
    }
}
