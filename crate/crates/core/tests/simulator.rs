use rfharvest::model::{Position, SensingConfig};
use rfharvest::sim::{
    energy_vs_training_fraction, place_random, run, Arena, Layout, Mode, Scenario,
};

#[test]
fn recorded_plans_revalidate() {
    let sc = Scenario {
        sensing: SensingConfig {
            slots: 3,
            ..SensingConfig::default()
        },
        ..Scenario::default()
    };
    let detector = sc.sensing.detector();
    let out = run(&sc).unwrap();
    let mut checked = 0;
    for slot in &out.slots {
        for su in &slot.sus {
            for l in &su.links {
                let Some(eps) = l.threshold else { continue };
                let snr = out.geometry[su.su][l.band].snr;
                assert!(
                    detector.false_alarm(eps, l.samples).unwrap() <= sc.sensing.max_false_alarm
                );
                assert!(
                    detector.detection(eps, l.samples, snr).unwrap() >= sc.sensing.min_detection
                );
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn equal_snr_layout_scales_linearly() {
    // Every SU at the same distance from the co-located PUs sees the same
    // SNR on each band.
    let arena = Arena {
        width: 40.0,
        height: 40.0,
    };
    let centre = arena.centre();
    let m = 40;
    let positions: Vec<Position> = (0..m)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            Position::new(centre.x + 12.0 * a.cos(), centre.y + 12.0 * a.sin())
        })
        .collect();
    let sc = Scenario {
        arena,
        layout: Layout::Explicit(positions),
        sensing: SensingConfig {
            slots: 2,
            ..SensingConfig::default()
        },
        ..Scenario::default()
    };
    let fractions: Vec<f64> = (1..=10).map(|k| k as f64 / 10.0).collect();
    let rows = energy_vs_training_fraction(&sc, &fractions, &[0, 1, 2]).unwrap();
    let x: Vec<f64> = rows.iter().map(|r| r.fraction).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.energy_mean).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let r2 = sxy * sxy / (sxx * syy);
    assert!(y[0] > 0.0);
    assert!(r2 >= 0.9, "R^2 = {r2}");
}

#[test]
fn identical_seed_reproduces_records() {
    let sc = Scenario {
        mode: Mode::Svm {
            training_fraction: 0.4,
        },
        seed: 11,
        sensing: SensingConfig {
            slots: 4,
            ..SensingConfig::default()
        },
        ..Scenario::default()
    };
    let a = run(&sc).unwrap();
    let b = run(&sc).unwrap();
    assert_eq!(a.slots, b.slots);
    assert_eq!(a.region_maps, b.region_maps);
}

#[test]
fn large_layout_centres_on_arena() {
    let arena = Arena {
        width: 40.0,
        height: 40.0,
    };
    let p = place_random(1000, &arena, 9);
    let mx = p.iter().map(|q| q.x).sum::<f64>() / 1000.0;
    let my = p.iter().map(|q| q.y).sum::<f64>() / 1000.0;
    assert!(
        (mx - 20.0).abs() <= 1.0 && (my - 20.0).abs() <= 1.0,
        "{mx} {my}"
    );
}
