use chrono::{Duration, NaiveDate};
use panelcast::backtest::rmse;
use panelcast::models::{Dataset, WindowSpec};
use panelcast::panel::{aggregate, roll_up, sparsity, DateSpan, EventRecord, GeoHierarchy, Interval, Level, RegionId, SeriesPanel};
use panelcast::rng::SplitMix64;
use panelcast::stats::{friedman, nemenyi, ScoreMatrix};
use proptest::prelude::*;

const START: (i32, u32, u32) = (2019, 1, 1);
const DAYS: i64 = 3 * 365;

fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(START.0, START.1, START.2).unwrap()
}

fn span() -> DateSpan {
    DateSpan::new(start(), start() + Duration::days(DAYS - 1)).unwrap()
}

/// `districts` districts holding `per` counties each, plus `n` events
/// scattered by `seed`.
fn world(districts: usize, per: usize, n: usize, seed: u64) -> (GeoHierarchy, Vec<EventRecord>) {
    let pairs: Vec<(String, String)> =
        (0..districts * per).map(|c| (format!("C{c:02}"), format!("D{}", c / per))).collect();
    let h = GeoHierarchy::from_pairs(pairs.iter().map(|(c, d)| (c.as_str(), d.as_str())), "S").unwrap();
    let mut rng = SplitMix64::new(seed);
    let events = (0..n)
        .map(|_| {
            let county = RegionId::county(format!("C{:02}", rng.below(districts * per))).unwrap();
            let day = start() + Duration::days(rng.below(DAYS as usize) as i64);
            EventRecord::new(day, county, 1 + rng.below(3) as u32).unwrap()
        })
        .collect();
    (h, events)
}

fn interval_strategy() -> impl Strategy<Value = Interval> {
    prop::sample::select(Interval::ALL.to_vec())
}

fn score_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..10, 2usize..6).prop_flat_map(|(n, k)| prop::collection::vec(prop::collection::vec(0.0f64..1.0, k), n))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn aggregation_ignores_event_order(seed in any::<u64>(), interval in interval_strategy(), n in 0usize..300) {
        let (h, events) = world(3, 3, n, seed);
        let mut shuffled = events.clone();
        SplitMix64::new(seed ^ 0xABCD).shuffle(&mut shuffled);
        prop_assert_eq!(aggregate(&events, &h, interval, span()).unwrap(), aggregate(&shuffled, &h, interval, span()).unwrap());
    }

    #[test]
    fn roll_up_conserves_counts(seed in any::<u64>(), interval in interval_strategy(), d in 1usize..4, per in 1usize..5) {
        let (h, events) = world(d, per, 200, seed);
        let panel = roll_up(&aggregate(&events, &h, interval, span()).unwrap(), &h).unwrap();
        let total: u32 = events.iter().map(|e| e.weight).sum();
        let state = panel.series(h.state()).unwrap();
        prop_assert_eq!(state.iter().sum::<f64>(), f64::from(total));
        for t in 0..panel.grid().len() {
            let districts: f64 = panel.regions_at(Level::District).map(|r| panel.series(r).unwrap()[t]).sum();
            let counties: f64 = panel.regions_at(Level::County).map(|r| panel.series(r).unwrap()[t]).sum();
            prop_assert_eq!(state[t], districts);
            prop_assert_eq!(districts, counties);
        }
    }

    #[test]
    fn normalize_round_trips(seed in any::<u64>(), interval in interval_strategy()) {
        let (h, events) = world(2, 3, 150, seed);
        let raw = roll_up(&aggregate(&events, &h, interval, span()).unwrap(), &h).unwrap();
        let normalized = raw.normalize().unwrap();
        for (_, values) in normalized.iter() {
            prop_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        }
        let back = normalized.denormalize().unwrap();
        for (region, values) in raw.iter() {
            let restored = back.series(region).unwrap();
            for (a, b) in values.iter().zip(restored) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
            }
        }
    }

    #[test]
    fn coarser_levels_are_never_sparser(seed in any::<u64>(), interval in interval_strategy(), n in 0usize..120) {
        let (h, events) = world(3, 4, n, seed);
        let panel = roll_up(&aggregate(&events, &h, interval, span()).unwrap(), &h).unwrap();
        let s = |r: &RegionId| sparsity(panel.series(r).unwrap()).unwrap();
        for county in h.counties() {
            let district = h.district_of(county).unwrap();
            prop_assert!(s(district) <= s(county));
            prop_assert!(s(h.state()) <= s(district));
        }
    }

    #[test]
    fn friedman_ignores_monotone_row_transforms(rows in score_matrix(), row in any::<prop::sample::Index>(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let m = ScoreMatrix::unlabelled(rows.clone()).unwrap();
        let mut moved = rows;
        let i = row.index(moved.len());
        moved[i].iter_mut().for_each(|v| *v = (a * *v + b).exp());
        let t = ScoreMatrix::unlabelled(moved).unwrap();
        let (f, g) = (friedman(&m), friedman(&t));
        prop_assert!((f.statistic - g.statistic).abs() < 1e-9);
        prop_assert_eq!(f.mean_ranks, g.mean_ranks);
        let (p, q) = (nemenyi(&m), nemenyi(&t));
        for (x, y) in p.iter().flatten().zip(q.iter().flatten()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn friedman_is_column_equivariant(rows in score_matrix(), seed in any::<u64>()) {
        let k = rows[0].len();
        let mut perm: Vec<usize> = (0..k).collect();
        SplitMix64::new(seed).shuffle(&mut perm);
        let permuted: Vec<Vec<f64>> = rows.iter().map(|r| perm.iter().map(|&j| r[j]).collect()).collect();
        let (m, t) = (ScoreMatrix::unlabelled(rows).unwrap(), ScoreMatrix::unlabelled(permuted).unwrap());
        let (f, g) = (friedman(&m), friedman(&t));
        prop_assert!((f.statistic - g.statistic).abs() < 1e-9);
        let (p, q) = (nemenyi(&m), nemenyi(&t));
        for a in 0..k {
            prop_assert_eq!(g.mean_ranks[a], f.mean_ranks[perm[a]]);
            for b in 0..k {
                prop_assert!((q[a][b] - p[perm[a]][perm[b]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn friedman_p_falls_as_statistic_rises(x in score_matrix(), y in score_matrix()) {
        let (f, g) = (friedman(&ScoreMatrix::unlabelled(x).unwrap()), friedman(&ScoreMatrix::unlabelled(y).unwrap()));
        prop_assert!(f.statistic >= 0.0 && g.statistic >= 0.0);
        if f.mean_ranks.len() == g.mean_ranks.len() && f.statistic < g.statistic - 1e-9 {
            prop_assert!(f.p_value >= g.p_value);
        }
    }

    #[test]
    fn nemenyi_is_a_symmetric_p_matrix(rows in score_matrix()) {
        let p = nemenyi(&ScoreMatrix::unlabelled(rows).unwrap());
        for i in 0..p.len() {
            prop_assert_eq!(p[i][i], 1.0);
            for j in 0..p.len() {
                prop_assert_eq!(p[i][j], p[j][i]);
                prop_assert!((0.0..=1.0).contains(&p[i][j]));
            }
        }
    }

    #[test]
    fn training_labels_end_by_the_cutoff(seed in any::<u64>(), end in 15usize..36) {
        let (h, events) = world(2, 2, 400, seed);
        let panel: SeriesPanel = roll_up(&aggregate(&events, &h, Interval::Monthly, span()).unwrap(), &h).unwrap().normalize().unwrap();
        let data = Dataset::assemble(&panel, None).unwrap();
        let spec = WindowSpec::default();
        let samples = data.training_samples(spec, end).unwrap();
        prop_assert!(!samples.is_empty());
        for s in &samples {
            prop_assert!(s.origin + s.label.len() <= end);
            prop_assert_eq!(s.label.len(), spec.horizon);
        }
    }

    #[test]
    fn rmse_is_zero_only_on_a_match(a in prop::collection::vec(-10.0f64..10.0, 1..20), shift in 0.001f64..5.0) {
        prop_assert_eq!(rmse(&a, &a).unwrap(), 0.0);
        let b: Vec<f64> = a.iter().map(|v| v + shift).collect();
        prop_assert!((rmse(&a, &b).unwrap() - shift).abs() < 1e-9);
    }
}
