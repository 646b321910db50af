use super::*;
use crate::rng::SplitMix64;

fn random_matrix(n: usize, k: usize, seed: u64) -> ScoreMatrix {
    let mut rng = SplitMix64::new(seed);
    let rows = (0..n)
        .map(|_| (0..k).map(|j| rng.normal() * 0.5 + 0.15 * j as f64).collect())
        .collect();
    ScoreMatrix::unlabelled(rows).unwrap()
}

#[test]
fn ties_get_average_ranks() {
    let m = ScoreMatrix::unlabelled(vec![vec![3.0, 1.0, 3.0, 2.0], vec![5.0, 5.0, 5.0, 5.0]]).unwrap();
    let r = rank_rows(&m);
    assert_eq!(r[0], vec![3.5, 1.0, 3.5, 2.0]);
    assert_eq!(r[1], vec![2.5; 4]);
    for row in &r {
        assert_eq!(row.iter().sum::<f64>(), 10.0);
    }
}

#[test]
fn identical_columns_give_zero_statistic() {
    let m = ScoreMatrix::unlabelled(vec![vec![1.0, 1.0, 1.0]; 6]).unwrap();
    let f = friedman(&m);
    assert_eq!(f.statistic, 0.0);
    assert!((f.p_value - 1.0).abs() < 1e-12);
    let p = nemenyi(&m);
    assert!(p.iter().flatten().all(|v| *v == 1.0));
}

#[test]
fn consistent_ordering_matches_closed_form() {
    let m = ScoreMatrix::unlabelled(vec![vec![0.1, 0.2, 0.3]; 10]).unwrap();
    let f = friedman(&m);
    assert!((f.statistic - 20.0).abs() < 1e-12);
    assert!((f.p_value - (-10.0_f64).exp()).abs() < 1e-10);
    assert_eq!(f.mean_ranks, vec![1.0, 2.0, 3.0]);
}

#[test]
fn bad_shapes_are_rejected() {
    assert!(ScoreMatrix::unlabelled(vec![vec![1.0, 2.0]]).is_err());
    assert!(ScoreMatrix::unlabelled(vec![vec![1.0], vec![2.0]]).is_err());
    assert!(ScoreMatrix::unlabelled(vec![vec![1.0, 2.0], vec![1.0]]).is_err());
    assert!(ScoreMatrix::unlabelled(vec![vec![1.0, f64::NAN], vec![1.0, 2.0]]).is_err());
    assert!(ScoreMatrix::new(vec!["a".into(), "a".into()], vec![vec![1.0, 2.0]; 2]).is_err());
}

#[test]
fn friedman_matches_permutation_oracle() {
    let m = random_matrix(8, 4, 2024);
    let f = friedman(&m);
    let mut rng = SplitMix64::new(99);
    let draws = 100_000;
    let mut rows = m.rows().to_vec();
    let (mut above, mut equal) = (0, 0);
    for _ in 0..draws {
        for row in rows.iter_mut() {
            rng.shuffle(row);
        }
        let s = friedman(&ScoreMatrix::unlabelled(rows.clone()).unwrap()).statistic;
        if (s - f.statistic).abs() < 1e-9 {
            equal += 1;
        } else if s > f.statistic {
            above += 1;
        }
    }
    // Mid-p: the statistic lives on a lattice, and a continuous
    // approximation splits each atom evenly.
    let perm = (above as f64 + 0.5 * equal as f64) / draws as f64;
    assert!((perm - f.p_value).abs() < 0.02, "chi-square {} vs permutation {perm}", f.p_value);
}

#[test]
fn studentized_range_known_values() {
    // Tabulated upper 5% points of the range of k standard normals.
    for (k, q) in [(2, 2.772), (3, 3.314), (4, 3.633), (5, 3.858), (10, 4.474)] {
        assert!((studentized_range_sf(q, k) - 0.05).abs() < 5e-4, "k={k}");
    }
    // k = 2: the range is |Z1 - Z2| with variance 2.
    for x in [0.3, 1.0, 2.5, 4.0] {
        let exact = 2.0 * (1.0 - normal_cdf(x / 2f64.sqrt()));
        assert!((studentized_range_sf(x, 2) - exact).abs() < 1e-9);
    }
    assert_eq!(studentized_range_sf(0.0, 4), 1.0);
}

#[test]
fn nemenyi_matches_monte_carlo_range() {
    let m = random_matrix(12, 3, 7);
    let p = nemenyi(&m);
    let f = friedman(&m);
    let sd = (3.0 * 4.0 / (12.0 * 12.0_f64)).sqrt();
    let mut rng = SplitMix64::new(5);
    let draws = 100_000;
    let ranges: Vec<f64> = (0..draws)
        .map(|_| {
            let z: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
            z.iter().copied().fold(f64::MIN, f64::max) - z.iter().copied().fold(f64::MAX, f64::min)
        })
        .collect();
    for i in 0..3 {
        for j in i + 1..3 {
            let q = (f.mean_ranks[i] - f.mean_ranks[j]).abs() / sd;
            let mc = ranges.iter().filter(|r| **r >= q).count() as f64 / draws as f64;
            assert!((p[i][j] - mc).abs() < 0.02, "pair ({i},{j}): {} vs {mc}", p[i][j]);
        }
    }
}

/// Simulating the null directly (independent random rankings per region)
/// checks the scaling of the statistic, not just the quadrature.
#[test]
fn nemenyi_scaling_matches_null_rank_simulation() {
    let (n, k) = (60, 4);
    let mut rng = SplitMix64::new(31);
    let draws = 40_000;
    let mut max_gaps = Vec::with_capacity(draws);
    let mut perm: Vec<f64> = (1..=k).map(|v| v as f64).collect();
    for _ in 0..draws {
        let mut sums = vec![0.0; k];
        for _ in 0..n {
            rng.shuffle(&mut perm);
            sums.iter_mut().zip(&perm).for_each(|(s, r)| *s += r);
        }
        let hi = sums.iter().copied().fold(f64::MIN, f64::max);
        let lo = sums.iter().copied().fold(f64::MAX, f64::min);
        max_gaps.push((hi - lo) / n as f64);
    }
    let sd = (k as f64 * (k as f64 + 1.0) / (12.0 * n as f64)).sqrt();
    for gap in [0.3, 0.45, 0.6, 0.75] {
        let predicted = studentized_range_sf(gap / sd, k);
        let above = max_gaps.iter().filter(|g| **g > gap + 1e-12).count() as f64;
        let equal = max_gaps.iter().filter(|g| (**g - gap).abs() <= 1e-12).count() as f64;
        let simulated = (above + 0.5 * equal) / draws as f64;
        assert!((predicted - simulated).abs() < 0.02, "gap {gap}: {predicted} vs {simulated}");
    }
}

#[test]
fn nemenyi_structure() {
    let m = random_matrix(15, 5, 3);
    let p = nemenyi(&m);
    for i in 0..5 {
        assert_eq!(p[i][i], 1.0);
        for j in 0..5 {
            assert_eq!(p[i][j], p[j][i]);
            assert!((0.0..=1.0).contains(&p[i][j]));
        }
    }
}

#[test]
fn report_formats_and_orders() {
    assert_eq!(format_p(0.00003), "<0.0001");
    assert_eq!(format_p(0.0001), "0.0001");
    assert_eq!(format_p(0.12345), "0.1235");
    let labels: Vec<String> = ["tft_lite/none", "tft_lite/all", "nlinear/none"].iter().map(|s| s.to_string()).collect();
    let county = ScoreMatrix::new(labels.clone(), vec![vec![0.3, 0.1, 0.2]; 10]).unwrap();
    let district = ScoreMatrix::new(labels, vec![vec![0.1, 0.3, 0.2], vec![0.2, 0.3, 0.1], vec![0.1, 0.2, 0.3]]).unwrap();
    let report = ComparisonReport::build(vec![("County".into(), county), ("District".into(), district)]).unwrap();
    assert_eq!(report.levels.len(), 2);
    assert_eq!(report.levels[0].ranking(), vec![1, 2, 0]);
    let text = report.to_text();
    assert!(text.contains("== County (N = 10, k = 3) =="));
    assert!(text.contains("== District (N = 3, k = 3) =="));
    assert!(text.contains("p = <0.0001"));
    assert!(text.contains("*"));
    let csv = report.to_csv();
    assert!(csv.contains("County,tft_lite/none,tft_lite/all,"));
    assert!(csv.lines().any(|l| l.starts_with("County,tft_lite/none,tft_lite/all") && l.ends_with("true")));
    assert!(csv.lines().any(|l| l.starts_with("County,tft_lite/none,nlinear/none") && l.ends_with("false")));
}
