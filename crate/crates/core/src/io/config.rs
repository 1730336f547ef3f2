//! JSON scenario documents.
//!
//! Physical quantities may be written either as SI numbers or as strings
//! with a unit suffix (`"0 dBm"`, `"0.9 GHz"`, `"1 us"`, `"1 mJ"`,
//! `"40 m"`). Every omitted field takes its default.

use std::fmt;
use std::marker::PhantomData;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::model::{dbm_to_watts, Band, Position};
use crate::region::{KernelChoice, SvmConfig};
use crate::sensing::ConstraintForm;
use crate::sim::{Arena, Layout, Mode, ScaConfig, Scenario};
use crate::{Error, Result};

trait Dimension {
    const NAME: &'static str;
    fn to_si(value: f64, unit: &str) -> Option<f64>;
}

macro_rules! linear_dimension {
    ($name:ident, $label:literal, [$(($unit:literal, $scale:expr)),* $(,)?]) => {
        struct $name;
        impl Dimension for $name {
            const NAME: &'static str = $label;
            fn to_si(value: f64, unit: &str) -> Option<f64> {
                match unit {
                    $($unit => Some(value * $scale),)*
                    _ => None,
                }
            }
        }
    };
}

linear_dimension!(
    Frequency,
    "frequency",
    [("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9)]
);
linear_dimension!(
    Time,
    "time",
    [
        ("s", 1.0),
        ("ms", 1e-3),
        ("us", 1e-6),
        ("µs", 1e-6),
        ("μs", 1e-6),
        ("ns", 1e-9)
    ]
);
linear_dimension!(
    Energy,
    "energy",
    [
        ("J", 1.0),
        ("mJ", 1e-3),
        ("uJ", 1e-6),
        ("µJ", 1e-6),
        ("μJ", 1e-6),
        ("nJ", 1e-9)
    ]
);
linear_dimension!(
    Length,
    "length",
    [("m", 1.0), ("km", 1e3), ("cm", 1e-2), ("mm", 1e-3)]
);

struct Power;
impl Dimension for Power {
    const NAME: &'static str = "power";
    fn to_si(value: f64, unit: &str) -> Option<f64> {
        match unit {
            "dBm" => Some(dbm_to_watts(value)),
            "dBW" => Some(10f64.powf(value / 10.0)),
            "W" => Some(value),
            "kW" => Some(value * 1e3),
            "mW" => Some(value * 1e-3),
            "uW" | "µW" | "μW" => Some(value * 1e-6),
            "nW" => Some(value * 1e-9),
            _ => None,
        }
    }
}

fn parse_quantity<D: Dimension>(text: &str) -> std::result::Result<f64, String> {
    let text = text.trim();
    for (split, _) in text.char_indices().rev() {
        let (number, unit) = text.split_at(split);
        if let (Ok(v), Some(si)) = (number.trim().parse::<f64>(), Some(unit.trim())) {
            if let Some(x) = D::to_si(v, si) {
                return Ok(x);
            }
        }
    }
    match text.parse::<f64>() {
        Ok(v) => Ok(v),
        Err(_) => Err(format!(
            "`{text}` is not a {} (number with a known unit)",
            D::NAME
        )),
    }
}

/// A value in SI units, read from a number or a unit-suffixed string.
struct Si<D>(f64, PhantomData<D>);

impl<'de, D: Dimension> Deserialize<'de> for Si<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> std::result::Result<Self, De::Error> {
        struct V<D>(PhantomData<D>);
        impl<D: Dimension> Visitor<'_> for V<D> {
            type Value = f64;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a {} as a number or a string with a unit", D::NAME)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
                Ok(v)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
                Ok(v as f64)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
                parse_quantity::<D>(v).map_err(E::custom)
            }
        }
        d.deserialize_any(V::<D>(PhantomData))
            .map(|v| Si(v, PhantomData))
    }
}

fn si<D>(v: Option<Si<D>>) -> Option<f64> {
    v.map(|s| s.0)
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    seed: Option<u64>,
    arena: Option<RawArena>,
    sus: Option<RawSus>,
    bands: Option<Vec<RawBand>>,
    sensing: Option<RawSensing>,
    channel: Option<RawChannel>,
    mode: Option<RawMode>,
    svm: Option<RawSvm>,
    sca: Option<RawSca>,
    constraint_form: Option<String>,
    initial_battery: Option<Si<Energy>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawArena {
    width: Option<Si<Length>>,
    height: Option<Si<Length>>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSus {
    count: Option<usize>,
    /// `[x, y]` pairs in meters.
    positions: Option<Vec<[f64; 2]>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBand {
    frequency: Si<Frequency>,
    pu_power: Option<Si<Power>>,
    efficiency: Option<f64>,
    pu_position: Option<[f64; 2]>,
    activity: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSensing {
    sample_time: Option<Si<Time>>,
    slot_length: Option<Si<Time>>,
    sensing_power: Option<Si<Power>>,
    max_false_alarm: Option<f64>,
    min_detection: Option<f64>,
    min_samples: Option<f64>,
    harvest_threshold: Option<Si<Power>>,
    battery_threshold: Option<Si<Energy>>,
    slots: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    tx_gain: Option<f64>,
    rx_gain: Option<f64>,
    speed_of_light: Option<f64>,
    noise_power: Option<Si<Power>>,
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
enum RawMode {
    AllSensing,
    Svm { training_fraction: f64 },
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSvm {
    penalty: Option<f64>,
    kernel: Option<KernelChoice>,
    redraw_each_slot: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSca {
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
}

fn require(ok: bool, path: &str, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, message))
    }
}

/// Parse a scenario document. An empty document gives the default scenario.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = if text.trim().is_empty() {
        RawScenario::default()
    } else {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?
    };
    build(raw)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scenario(&text)
}

fn build(raw: RawScenario) -> Result<Scenario> {
    let base = Scenario::default();

    let ra = raw.arena.unwrap_or_default();
    let arena = Arena {
        width: si(ra.width).unwrap_or(base.arena.width),
        height: si(ra.height).unwrap_or(base.arena.height),
    };
    require(arena.width > 0.0, "arena.width", "must be positive")?;
    require(arena.height > 0.0, "arena.height", "must be positive")?;

    let rs = raw.sensing.unwrap_or_default();
    let d = base.sensing;
    let sensing = crate::model::SensingConfig {
        sample_time: si(rs.sample_time).unwrap_or(d.sample_time),
        slot_length: si(rs.slot_length).unwrap_or(d.slot_length),
        sensing_power: si(rs.sensing_power).unwrap_or(d.sensing_power),
        max_false_alarm: rs.max_false_alarm.unwrap_or(d.max_false_alarm),
        min_detection: rs.min_detection.unwrap_or(d.min_detection),
        min_samples: rs.min_samples.unwrap_or(d.min_samples),
        harvest_threshold: si(rs.harvest_threshold).unwrap_or(d.harvest_threshold),
        battery_threshold: si(rs.battery_threshold).unwrap_or(d.battery_threshold),
        slots: rs.slots.unwrap_or(d.slots),
    };
    let f = sensing.max_false_alarm;
    require(
        f > 0.0 && f < 0.5,
        "sensing.max_false_alarm",
        format!("{f} is outside (0, 0.5)"),
    )?;
    let dd = sensing.min_detection;
    require(
        dd > 0.5 && dd < 1.0,
        "sensing.min_detection",
        format!("{dd} is outside (0.5, 1)"),
    )?;
    require(
        sensing.sample_time > 0.0,
        "sensing.sample_time",
        "must be positive",
    )?;
    require(
        sensing.slot_length > 0.0,
        "sensing.slot_length",
        "must be positive",
    )?;
    require(
        sensing.sensing_power >= 0.0,
        "sensing.sensing_power",
        "must be non-negative",
    )?;
    require(
        sensing.min_samples >= 1.0,
        "sensing.min_samples",
        "must be at least 1",
    )?;
    require(
        sensing.min_samples <= sensing.max_samples(),
        "sensing.min_samples",
        format!(
            "exceeds the {} samples that fit in one slot",
            sensing.max_samples()
        ),
    )?;
    require(
        sensing.harvest_threshold >= 0.0,
        "sensing.harvest_threshold",
        "must be non-negative",
    )?;
    require(sensing.slots >= 1, "sensing.slots", "must be at least 1")?;

    let rc = raw.channel.unwrap_or_default();
    let channel = crate::model::ChannelParams {
        tx_gain: rc.tx_gain.unwrap_or(base.channel.tx_gain),
        rx_gain: rc.rx_gain.unwrap_or(base.channel.rx_gain),
        speed_of_light: rc.speed_of_light.unwrap_or(base.channel.speed_of_light),
        noise_power: si(rc.noise_power).unwrap_or(base.channel.noise_power),
    };
    require(channel.tx_gain > 0.0, "channel.tx_gain", "must be positive")?;
    require(channel.rx_gain > 0.0, "channel.rx_gain", "must be positive")?;
    require(
        channel.speed_of_light > 0.0,
        "channel.speed_of_light",
        "must be positive",
    )?;
    require(
        channel.noise_power > 0.0,
        "channel.noise_power",
        "must be positive",
    )?;

    let bands = match raw.bands {
        None => base
            .bands
            .iter()
            .map(|b| Band {
                pu_position: arena.centre(),
                ..b.clone()
            })
            .collect(),
        Some(list) => {
            require(!list.is_empty(), "bands", "at least one band is required")?;
            let template = &base.bands[0];
            list.into_iter()
                .enumerate()
                .map(|(i, rb)| {
                    let band = Band {
                        frequency: rb.frequency.0,
                        pu_power: si(rb.pu_power).unwrap_or(template.pu_power),
                        efficiency: rb.efficiency.unwrap_or(template.efficiency),
                        pu_position: rb
                            .pu_position
                            .map_or(arena.centre(), |[x, y]| Position::new(x, y)),
                        activity: rb.activity.unwrap_or(template.activity),
                    };
                    let at = |field: &str| format!("bands[{i}].{field}");
                    require(band.frequency > 0.0, &at("frequency"), "must be positive")?;
                    require(
                        band.pu_power >= 0.0,
                        &at("pu_power"),
                        "must be non-negative",
                    )?;
                    require(
                        (0.0..=1.0).contains(&band.efficiency),
                        &at("efficiency"),
                        "must lie in [0, 1]",
                    )?;
                    require(
                        (0.0..=1.0).contains(&band.activity),
                        &at("activity"),
                        "must lie in [0, 1]",
                    )?;
                    Ok(band)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };

    let layout = match raw.sus.unwrap_or_default() {
        RawSus {
            positions: Some(_),
            count: Some(_),
        } => {
            return Err(Error::config(
                "sus",
                "give either `count` or `positions`, not both",
            ))
        }
        RawSus {
            positions: Some(p), ..
        } => {
            let positions: Vec<Position> =
                p.into_iter().map(|[x, y]| Position::new(x, y)).collect();
            require(
                !positions.is_empty(),
                "sus.positions",
                "at least one SU is required",
            )?;
            if let Some(i) = positions.iter().position(|q| !arena.contains(q)) {
                return Err(Error::config(
                    format!("sus.positions[{i}]"),
                    "lies outside the arena",
                ));
            }
            Layout::Explicit(positions)
        }
        RawSus { count, .. } => {
            let count = count.unwrap_or(60);
            require(count >= 1, "sus.count", "at least one SU is required")?;
            Layout::Random { count }
        }
    };

    let mode = match raw.mode {
        None | Some(RawMode::AllSensing) => Mode::AllSensing,
        Some(RawMode::Svm { training_fraction }) => {
            require(
                training_fraction > 0.0 && training_fraction <= 1.0,
                "mode.training_fraction",
                format!("{training_fraction} is outside (0, 1]"),
            )?;
            Mode::Svm { training_fraction }
        }
    };

    let rv = raw.svm.unwrap_or_default();
    let svm = SvmConfig {
        penalty: rv.penalty.unwrap_or(base.svm.penalty),
        kernel: rv.kernel.unwrap_or(base.svm.kernel),
        redraw_each_slot: rv.redraw_each_slot.unwrap_or(base.svm.redraw_each_slot),
    };
    require(svm.penalty > 0.0, "svm.penalty", "must be positive")?;

    let rq = raw.sca.unwrap_or_default();
    let sca = ScaConfig {
        tolerance: rq.tolerance.unwrap_or(base.sca.tolerance),
        max_iterations: rq.max_iterations.unwrap_or(base.sca.max_iterations),
    };
    require(
        sca.tolerance >= 0.0,
        "sca.tolerance",
        "must be non-negative",
    )?;
    require(
        sca.max_iterations >= 1,
        "sca.max_iterations",
        "must be at least 1",
    )?;

    let constraint_form = match raw.constraint_form {
        None => ConstraintForm::default(),
        Some(s) => s
            .parse::<ConstraintForm>()
            .map_err(|e| Error::config("constraint_form", e.to_string()))?,
    };

    let initial_battery =
        si(raw.initial_battery).unwrap_or(sensing.sensing_power * sensing.slot_length);
    require(
        initial_battery >= 0.0,
        "initial_battery",
        "must be non-negative",
    )?;

    let scenario = Scenario {
        arena,
        bands,
        layout,
        sensing,
        channel,
        mode,
        svm,
        sca,
        constraint_form,
        initial_battery,
        seed: raw.seed.unwrap_or(base.seed),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// The effective scenario as a document in SI units; parsing it gives back
/// the same scenario.
pub fn scenario_to_json(s: &Scenario) -> Value {
    let sus = match &s.layout {
        Layout::Random { count } => json!({ "count": count }),
        Layout::Explicit(p) => {
            json!({ "positions": p.iter().map(|q| [q.x, q.y]).collect::<Vec<_>>() })
        }
    };
    let mode = match s.mode {
        Mode::AllSensing => json!({ "type": "all-sensing" }),
        Mode::Svm { training_fraction } => {
            json!({ "type": "svm", "training_fraction": training_fraction })
        }
    };
    json!({
        "seed": s.seed,
        "arena": { "width": s.arena.width, "height": s.arena.height },
        "sus": sus,
        "bands": s.bands.iter().map(|b| json!({
            "frequency": b.frequency,
            "pu_power": b.pu_power,
            "efficiency": b.efficiency,
            "pu_position": [b.pu_position.x, b.pu_position.y],
            "activity": b.activity,
        })).collect::<Vec<_>>(),
        "sensing": {
            "sample_time": s.sensing.sample_time,
            "slot_length": s.sensing.slot_length,
            "sensing_power": s.sensing.sensing_power,
            "max_false_alarm": s.sensing.max_false_alarm,
            "min_detection": s.sensing.min_detection,
            "min_samples": s.sensing.min_samples,
            "harvest_threshold": s.sensing.harvest_threshold,
            "battery_threshold": s.sensing.battery_threshold,
            "slots": s.sensing.slots,
        },
        "channel": {
            "tx_gain": s.channel.tx_gain,
            "rx_gain": s.channel.rx_gain,
            "speed_of_light": s.channel.speed_of_light,
            "noise_power": s.channel.noise_power,
        },
        "mode": mode,
        "svm": {
            "penalty": s.svm.penalty,
            "kernel": s.svm.kernel,
            "redraw_each_slot": s.svm.redraw_each_slot,
        },
        "sca": { "tolerance": s.sca.tolerance, "max_iterations": s.sca.max_iterations },
        "constraint_form": s.constraint_form.as_str(),
        "initial_battery": s.initial_battery,
    })
}

pub fn serialize_scenario(s: &Scenario) -> String {
    serde_json::to_string_pretty(&scenario_to_json(s)).expect("JSON values always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_document_gives_defaults() {
        let s = parse_scenario("{}").unwrap();
        assert_eq!(s, Scenario::default());
        assert_eq!(parse_scenario("  ").unwrap(), s);
        assert_eq!(s.su_count(), 60);
        assert_eq!((s.arena.width, s.arena.height), (40.0, 40.0));
        assert_eq!(s.sensing.sample_time, 1e-6);
        assert_eq!(s.sensing.sensing_power, 1e-3);
        assert_eq!(s.sensing.slot_length, 1.0);
        assert!((s.sensing.harvest_threshold - 1e-5).abs() < 1e-20);
        assert_eq!(s.channel.speed_of_light, 3e8);
        assert_eq!(
            (s.sensing.max_false_alarm, s.sensing.min_detection),
            (0.1, 0.9)
        );
        let freqs: Vec<f64> = s.bands.iter().map(|b| b.frequency).collect();
        assert_eq!(
            freqs,
            vec![0.9e9, 1.24e9, 1.56e9, 1.78e9, 2.19e9, 2.46e9, 2.68e9]
        );
        assert!(s.bands.iter().all(|b| b.efficiency == 0.45));
    }

    #[test]
    fn unit_strings() {
        let s = parse_scenario(r#"{"sensing": {"sensing_power": "0 dBm", "sample_time": "2us", "harvest_threshold": "-20 dBm"}}"#)
            .unwrap();
        assert_eq!(s.sensing.sensing_power, 1e-3);
        assert_eq!(s.sensing.sample_time, 2e-6);
        assert!((s.sensing.harvest_threshold - 1e-5).abs() < 1e-20);
        assert_eq!(parse_quantity::<Power>("30 dBm").unwrap(), 1.0);
        assert_eq!(parse_quantity::<Power>("0dBW").unwrap(), 1.0);
        assert_eq!(parse_quantity::<Frequency>("0.9 GHz").unwrap(), 0.9e9);
        assert_eq!(parse_quantity::<Energy>("1 mJ").unwrap(), 1e-3);
        assert_eq!(parse_quantity::<Time>("1e-6 s").unwrap(), 1e-6);
        assert!(parse_quantity::<Frequency>("3 parsecs").is_err());
    }

    #[test]
    fn range_errors_carry_the_field_path() {
        let err = parse_scenario(r#"{"sensing": {"max_false_alarm": 0.6}}"#).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "sensing.max_false_alarm"),
            other => panic!("{other}"),
        }
        let err =
            parse_scenario(r#"{"bands": [{"frequency": "1 GHz", "efficiency": 2}]}"#).unwrap_err();
        assert!(
            matches!(err, Error::Config { ref path, .. } if path == "bands[0].efficiency"),
            "{err}"
        );
        let err = parse_scenario(r#"{"sensing": {"sample_time": "fast"}}"#).unwrap_err();
        assert!(
            matches!(err, Error::Config { ref path, .. } if path == "sensing.sample_time"),
            "{err}"
        );
        let err = parse_scenario(r#"{"sensing": {"typo": 1}}"#).unwrap_err();
        assert!(matches!(err, Error::Config { .. }), "{err}");
        assert!(parse_scenario("{").is_err());
    }

    #[test]
    fn modes_and_forms() {
        let s = parse_scenario(
            r#"{"mode": {"type": "svm", "training_fraction": 0.5}, "constraint_form": "corrected",
                "svm": {"kernel": "linear"}, "sus": {"positions": [[1, 2], [3, 4]]}}"#,
        )
        .unwrap();
        assert_eq!(
            s.mode,
            Mode::Svm {
                training_fraction: 0.5
            }
        );
        assert_eq!(s.constraint_form, ConstraintForm::Corrected);
        match parse_scenario(r#"{"constraint_form": "paper-form"}"#).unwrap_err() {
            Error::Config { path, .. } => assert_eq!(path, "constraint_form"),
            other => panic!("{other}"),
        }
        assert!(parse_scenario(r#"{"constraint_form": "dual"}"#).is_err());
        assert_eq!(s.svm.kernel, KernelChoice::Linear);
        assert_eq!(s.su_count(), 2);
        assert!(parse_scenario(r#"{"mode": {"type": "svm", "training_fraction": 1.5}}"#).is_err());
        assert!(parse_scenario(r#"{"sus": {"positions": [[100, 2]]}}"#).is_err());
    }

    fn scenario() -> impl Strategy<Value = Scenario> {
        (
            any::<u64>(),
            (1.0f64..100.0, 1.0f64..100.0),
            prop::option::of(prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..6)),
            prop::collection::vec(
                (1e8f64..6e9, 0.0f64..10.0, 0.0f64..=1.0, 0.0f64..=1.0),
                1..8,
            ),
            (0.01f64..0.49, 0.51f64..0.99, 1.0f64..500.0, 1usize..30),
            (1e-12f64..1e-2, prop::option::of(0.0f64..1.0), any::<bool>()),
            (0.1f64..100.0, 0.0f64..1e-3, 1usize..100, any::<bool>()),
        )
            .prop_map(
                |(
                    seed,
                    (w, h),
                    pts,
                    bands,
                    (f, d, n, slots),
                    (noise, frac, redraw),
                    (c, tol, iters, linear),
                )| {
                    let arena = Arena {
                        width: w,
                        height: h,
                    };
                    Scenario {
                        arena,
                        bands: bands
                            .into_iter()
                            .map(|(frequency, pu_power, efficiency, activity)| Band {
                                frequency,
                                pu_power,
                                efficiency,
                                pu_position: Position::new(0.3 * w, 0.7 * h),
                                activity,
                            })
                            .collect(),
                        layout: match pts {
                            Some(p) => Layout::Explicit(
                                p.into_iter()
                                    .map(|(x, y)| Position::new(x * w, y * h))
                                    .collect(),
                            ),
                            None => Layout::Random { count: 17 },
                        },
                        sensing: crate::model::SensingConfig {
                            max_false_alarm: f,
                            min_detection: d,
                            min_samples: n,
                            slots,
                            ..Default::default()
                        },
                        channel: crate::model::ChannelParams {
                            noise_power: noise,
                            ..Default::default()
                        },
                        mode: frac.map_or(Mode::AllSensing, |x| Mode::Svm {
                            training_fraction: x.max(1e-3),
                        }),
                        svm: SvmConfig {
                            penalty: c,
                            kernel: if linear {
                                KernelChoice::Linear
                            } else {
                                KernelChoice::Rbf
                            },
                            redraw_each_slot: redraw,
                        },
                        sca: ScaConfig {
                            tolerance: tol,
                            max_iterations: iters,
                        },
                        constraint_form: ConstraintForm::Corrected,
                        initial_battery: 1e-3 * c,
                        seed,
                    }
                },
            )
    }

    proptest! {
        #[test]
        fn round_trip(s in scenario()) {
            let text = serialize_scenario(&s);
            prop_assert_eq!(parse_scenario(&text).unwrap(), s);
        }
    }
}
