use super::*;
use crate::panel::{aggregate_on, roll_up, sparsity, Level, RegionId};
use crate::stats::normal_cdf;

fn small(seed: u64) -> SynthConfig {
    SynthConfig {
        n_districts: 2,
        counties_per_district: 3,
        months: 36,
        base_rates: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        seed,
        ..default_benchmark()
    }
}

#[test]
fn identical_config_gives_identical_output() {
    let a = generate(&small(1)).unwrap();
    let b = generate(&small(1)).unwrap();
    assert_eq!(a, b);
    let c = generate(&small(2)).unwrap();
    assert_ne!(a.events, c.events);
}

#[test]
fn written_files_are_byte_stable() {
    let out = generate(&small(4)).unwrap();
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let f1 = out.write_dir(d1.path()).unwrap();
    let f2 = generate(&small(4)).unwrap().write_dir(d2.path()).unwrap();
    assert_eq!(f1.len(), 3 + 2 + 1);
    for (a, b) in f1.iter().zip(&f2) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), "{}", a.display());
    }
}

#[test]
fn counts_match_events_and_ledger() {
    let out = generate(&small(3)).unwrap();
    let panel = aggregate_on(&out.events, &out.hierarchy, out.grid).unwrap();
    for c in &out.ledger.counties {
        let series = panel.get(&RegionId::county(c.code.clone()).unwrap()).unwrap();
        let counts: Vec<f64> = c.counts.iter().map(|&n| n as f64).collect();
        assert_eq!(series, counts.as_slice());
    }
}

#[test]
fn two_by_three_rolls_up_to_nine_series() {
    let out = generate(&small(5)).unwrap();
    let panel = roll_up(&aggregate_on(&out.events, &out.hierarchy, out.grid).unwrap(), &out.hierarchy).unwrap();
    assert_eq!(panel.regions().count(), 6 + 2 + 1);
}

#[test]
fn stationary_counts_average_to_the_base_rate() {
    let cfg = SynthConfig { seasonal_amplitude: 0.0, trend_per_year: 0.0, months: 400, ..small(9) };
    let out = generate(&cfg).unwrap();
    for c in &out.ledger.counties {
        let mean = c.counts.iter().sum::<u64>() as f64 / cfg.months as f64;
        let bound = 3.0 * (c.base_rate / cfg.months as f64).sqrt();
        assert!((mean - c.base_rate).abs() < bound, "{}: {mean} vs {}", c.code, c.base_rate);
    }
}

#[test]
fn poisson_counts_pass_a_dispersion_check() {
    // Pearson dispersion of counts against the recorded intensity; its
    // expectation is the number of cells.
    let out = generate(&default_benchmark()).unwrap();
    let mut chi = 0.0;
    let mut cells = 0.0;
    for c in &out.ledger.counties {
        for (l, n) in c.lambda.iter().zip(&c.counts) {
            chi += (*n as f64 - l).powi(2) / l;
            cells += 1.0;
        }
    }
    let z = (chi - cells) / (2.0 * cells).sqrt();
    assert!(z.abs() < 4.0, "z = {z}");
    assert!(normal_cdf(z.abs()) < 0.99997);
}

#[test]
fn planted_channels_follow_future_intensity() {
    let cfg = default_benchmark();
    let out = generate(&cfg).unwrap();
    for p in &cfg.planted {
        let ledger = &out.ledger.channels[&p.name];
        for c in &out.ledger.counties {
            let latent = &ledger[&c.code];
            let ch = &out.channels[&p.name][&RegionId::county(c.code.clone()).unwrap()];
            for t in 0..cfg.months {
                let want = p.gain * intensity(&cfg, c.base_rate, c.phase, t + p.lead_steps);
                assert!((latent.clean[t] - want).abs() < 1e-12);
                let observed = t >= p.missing_head && t + p.missing_tail < cfg.months;
                assert_eq!(ch.values()[t].is_some(), observed);
                if let Some(v) = ch.values()[t] {
                    assert_eq!(v, latent.clean[t] + latent.noise[t]);
                }
            }
        }
    }
}

#[test]
fn benchmark_shape_and_sparsity_spread() {
    let cfg = default_benchmark();
    let out = generate(&cfg).unwrap();
    let panel = roll_up(&aggregate_on(&out.events, &out.hierarchy, out.grid).unwrap(), &out.hierarchy).unwrap();
    assert_eq!(panel.regions().count(), 36);
    assert_eq!(panel.regions_at(Level::County).count(), 30);
    let spars: Vec<f64> = panel.regions_at(Level::County).map(|r| sparsity(panel.get(r).unwrap()).unwrap()).collect();
    assert!(spars.iter().any(|s| *s > 0.5), "{spars:?}");
    assert!(spars.iter().any(|s| *s < 0.05), "{spars:?}");
    let (lo, hi) = cfg.base_rates.iter().fold((f64::MAX, f64::MIN), |(a, b), r| (a.min(*r), b.max(*r)));
    assert!(hi / lo >= 100.0 - 1e-9);
}

#[test]
fn lead_one_channel_correlates_with_next_month_counts() {
    let cfg = default_benchmark();
    let out = generate(&cfg).unwrap();
    let densest = out.ledger.counties.iter().max_by(|a, b| a.base_rate.total_cmp(&b.base_rate)).unwrap();
    let ch = &out.channels["dispensing"][&RegionId::county(densest.code.clone()).unwrap()];
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for t in 0..cfg.months - 1 {
        if let Some(x) = ch.values()[t] {
            xs.push(x);
            ys.push(densest.counts[t + 1] as f64);
        }
    }
    let r = crate::covariates::pearson(&xs, &ys).unwrap();
    assert!(r > 0.5, "r = {r}");
}

#[test]
fn invalid_configs_are_rejected() {
    let base = default_benchmark();
    let cases = [
        SynthConfig { months: 30, ..base.clone() },
        SynthConfig { base_rates: vec![1.0; 3], ..base.clone() },
        SynthConfig { seasonal_amplitude: 1.0, ..base.clone() },
        SynthConfig { trend_per_year: -1.0, ..base.clone() },
        SynthConfig { n_districts: 0, base_rates: vec![], ..base.clone() },
    ];
    for cfg in cases {
        let err = generate(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
    let mut bad_rate = base.clone();
    bad_rate.base_rates[0] = 0.0;
    assert!(generate(&bad_rate).is_err());
}
