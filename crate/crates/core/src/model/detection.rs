use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::{Error, Result};

/// Upper tail of the standard normal distribution.
pub fn q_function(x: f64) -> f64 {
    if x < 0.0 {
        1.0 - 0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    } else {
        0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// Inverse of [`q_function`] on `(0, 1)`.
///
/// Acklam's rational approximation of the normal quantile (relative error
/// about 1e-9) refined by Newton steps on `Q` itself.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!(
            "Q-inverse needs p in (0, 1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Q^{-1}(p) is the (1 - p) quantile; use the smaller tail for accuracy.
    let tail = p.min(1.0 - p);
    let mut x = -normal_quantile_approx(tail);
    for _ in 0..3 {
        let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
        if !(density > 0.0) {
            break;
        }
        x += (q_function(x) - tail) / density;
    }
    Ok(if p < 0.5 { x } else { -x })
}

/// Lower-tail normal quantile for `p` in `(0, 0.5]`.
fn normal_quantile_approx(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.38357751867269e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    if p < 0.02425 {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// False-alarm probability of the energy detector under noise only:
/// `Q((threshold - 1) sqrt(samples))`, noise variance normalised to one.
pub fn false_alarm_prob(threshold: f64, samples: f64) -> f64 {
    q_function((threshold - 1.0) * samples.sqrt())
}

/// Detection probability with the PU present at linear SNR `snr`:
/// `Q((threshold - snr - 1) sqrt(samples) / (snr + 1))`.
pub fn detection_prob(threshold: f64, samples: f64, snr: f64) -> f64 {
    q_function((threshold - snr - 1.0) * samples.sqrt() / (snr + 1.0))
}

/// Energy detector statistics with the validity guard on the sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyDetector {
    pub min_samples: f64,
}

impl EnergyDetector {
    fn check(&self, threshold: f64, samples: f64) -> Result<()> {
        if !(threshold >= 0.0) {
            return Err(Error::domain(format!(
                "threshold must be >= 0, got {threshold}"
            )));
        }
        if !(samples >= self.min_samples) {
            return Err(Error::ApproximationValidity {
                samples,
                min_samples: self.min_samples,
            });
        }
        Ok(())
    }

    pub fn false_alarm(&self, threshold: f64, samples: f64) -> Result<f64> {
        self.check(threshold, samples)?;
        Ok(false_alarm_prob(threshold, samples))
    }

    pub fn detection(&self, threshold: f64, samples: f64, snr: f64) -> Result<f64> {
        self.check(threshold, samples)?;
        if !(snr >= 0.0) {
            return Err(Error::domain(format!("SNR must be >= 0, got {snr}")));
        }
        Ok(detection_prob(threshold, samples, snr))
    }
}
