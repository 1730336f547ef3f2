use std::f64::consts::PI;

use super::ChannelParams;
use crate::{Error, Result};

/// Free-space gain `G_t G_r (c / (4 pi d f))^2` between a PU and an SU.
pub fn channel_gain(distance: f64, frequency: f64, params: &ChannelParams) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::domain(format!(
            "distance must be positive, got {distance}"
        )));
    }
    if !(frequency > 0.0) {
        return Err(Error::domain(format!(
            "frequency must be positive, got {frequency}"
        )));
    }
    let ratio = params.speed_of_light / (4.0 * PI * distance * frequency);
    Ok(params.tx_gain * params.rx_gain * ratio * ratio)
}

/// Linear SNR of a received signal.
pub fn snr(power: f64, gain: f64, noise_power: f64) -> f64 {
    power * gain / noise_power
}

/// Harvesting indicator: the rectifier turns on only while the PU transmits
/// and the average received power reaches the sensitivity threshold
/// (inclusive).
pub fn harvest_indicator(avg_rx_power: f64, threshold: f64, pu_active: bool) -> bool {
    pu_active && avg_rx_power >= threshold
}

/// Distance at which the received power from a PU of power `pu_power` at
/// `frequency` drops to `threshold`: `(lambda / 4 pi) sqrt(P G_t G_r / P_th)`.
pub fn hr_radius(pu_power: f64, frequency: f64, threshold: f64, params: &ChannelParams) -> f64 {
    let wavelength = params.speed_of_light / frequency;
    wavelength / (4.0 * PI) * (pu_power * params.tx_gain * params.rx_gain / threshold).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ChannelParams {
        ChannelParams {
            noise_power: 1.0,
            ..ChannelParams::default()
        }
    }

    #[test]
    fn gain_examples() {
        let p = unit();
        let h = channel_gain(10.0, 0.9e9, &p).unwrap();
        assert!((h - 7.0362e-6).abs() < 1e-9);
        let ratio = channel_gain(10.0, 2.68e9, &p).unwrap() / h;
        assert!((ratio - 0.11277567).abs() < 1e-7);
        let f = 1.0e9;
        let d = p.speed_of_light / (4.0 * PI * f);
        assert!((channel_gain(d, f, &p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gain_domain() {
        let p = unit();
        assert!(channel_gain(0.0, 1e9, &p).is_err());
        assert!(channel_gain(-1.0, 1e9, &p).is_err());
        assert!(channel_gain(1.0, 0.0, &p).is_err());
    }

    #[test]
    fn inverse_square_in_both() {
        let p = unit();
        let reference = channel_gain(1.0, 1e9, &p).unwrap() * 1e18;
        for &(d, f) in &[(0.5, 0.9e9), (3.0, 2.68e9), (40.0, 1.24e9), (17.3, 5e8)] {
            let k = channel_gain(d, f, &p).unwrap() * d * d * f * f;
            assert!((k / reference - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn snr_examples() {
        assert_eq!(snr(1.0, 1.0, 1.0), 1.0);
        assert!((snr(1.0, 7.0362e-6, 1e-7) - 70.362).abs() < 1e-9);
        assert_eq!(snr(2.0, 0.3, 0.7), 2.0 * snr(1.0, 0.3, 0.7));
    }

    #[test]
    fn indicator() {
        assert!(harvest_indicator(2e-5, 1e-5, true));
        assert!(!harvest_indicator(2e-5, 1e-5, false));
        assert!(harvest_indicator(1e-5, 1e-5, true));
        assert!(!harvest_indicator(0.99e-5, 1e-5, true));
    }

    #[test]
    fn radius_is_threshold_crossing() {
        let p = ChannelParams::default();
        let r = hr_radius(1.0, 0.9e9, 1e-5, &p);
        assert!((r - 8.388202).abs() < 1e-5);
        let rx = channel_gain(r, 0.9e9, &p).unwrap();
        assert!((rx - 1e-5).abs() < 1e-17);
    }
}
