mod oracles;

use ganbench::stats::{
    analyze, f_survival, one_way_anova, render_markdown, studentized_range_critical, tukey_hsd,
    MetricGroup,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn groups(data: &[Vec<f64>]) -> Vec<MetricGroup> {
    data.iter()
        .enumerate()
        .map(|(i, s)| MetricGroup::new(format!("g{i}"), s.clone()).unwrap())
        .collect()
}

fn random_sets(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let k = rng.random_range(2..=6);
    (0..k)
        .map(|_| {
            let n = rng.random_range(2..=15);
            let centre = rng.random_range(-5.0..5.0);
            (0..n)
                .map(|_| centre + rng.random_range(-3.0..3.0))
                .collect()
        })
        .collect()
}

#[test]
fn textbook_fixture() {
    let g = groups(&[
        vec![1.0, 2.0, 3.0],
        vec![2.0, 3.0, 4.0],
        vec![3.0, 4.0, 5.0],
    ]);
    let a = one_way_anova(&g).unwrap();
    assert_eq!((a.ss_between, a.ss_within), (6.0, 6.0));
    assert_eq!((a.df_between, a.df_within), (2, 6));
    assert_eq!(a.f_value, 3.0);
    // F(2, d) has the closed-form survival (1 + 2f/d)^(-d/2).
    assert!((a.p_value - 0.125).abs() <= 1e-12);
    assert!((a.p_value - oracles::f_survival_by_integration(3.0, 2.0, 6.0)).abs() <= 1e-6);

    let t = tukey_hsd(&g, 0.05).unwrap();
    let g13 = t
        .iter()
        .find(|r| r.group_a == "g0" && r.group_b == "g2")
        .unwrap();
    assert!((g13.q_value - 2.0 / (1.0f64 / 3.0).sqrt()).abs() <= 1e-12);
    assert!((g13.critical_q - 4.339).abs() <= 1e-3);
    assert!(!g13.significant);
}

#[test]
fn f_survival_matches_numerical_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let d1 = rng.random_range(1..=6) as f64 * 2.0;
        let d2 = rng.random_range(1..=30) as f64 * 2.0;
        let f = rng.random_range(0.05..8.0);
        let got = f_survival(f, d1, d2);
        let want = oracles::f_survival_by_integration(f, d1, d2);
        assert!(
            (got - want).abs() <= 1e-6,
            "F({d1},{d2}) at {f}: {got} vs {want}"
        );
    }
}

#[test]
fn brute_force_sums_of_squares_on_500_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..500 {
        let data = random_sets(&mut rng);
        let a = one_way_anova(&groups(&data)).unwrap();
        let (ssb, ssw, f) = oracles::anova_brute(&data);
        let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(1e-300);
        assert!(rel(a.ss_between, ssb) <= 1e-9);
        assert!(rel(a.ss_within, ssw) <= 1e-9);
        assert!(rel(a.f_value, f) <= 1e-9);
        assert!((0.0..=1.0).contains(&a.p_value));
    }
}

#[test]
fn f_is_shift_and_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..200 {
        let data = random_sets(&mut rng);
        let base = one_way_anova(&groups(&data)).unwrap().f_value;
        let c = rng.random_range(0.01..100.0);
        let shift = rng.random_range(-50.0..50.0);
        let scaled: Vec<Vec<f64>> = data
            .iter()
            .map(|g| g.iter().map(|x| c * x).collect())
            .collect();
        let shifted: Vec<Vec<f64>> = data
            .iter()
            .map(|g| g.iter().map(|x| x + shift).collect())
            .collect();
        for other in [scaled, shifted] {
            let f = one_way_anova(&groups(&other)).unwrap().f_value;
            assert!((f - base).abs() <= 1e-8 * base.max(1.0), "{f} vs {base}");
        }
    }
}

#[test]
fn identical_groups_give_zero_f() {
    let g = groups(&vec![vec![1.0, 2.0, 4.0]; 3]);
    let a = one_way_anova(&g).unwrap();
    assert_eq!((a.f_value, a.p_value), (0.0, 1.0));
    assert!(tukey_hsd(&g, 0.05)
        .unwrap()
        .iter()
        .all(|t| t.q_value == 0.0 && !t.significant));
}

#[test]
fn tukey_significance_is_monotone_in_separation() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..50 {
        let data: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..8).map(|_| rng.random_range(0.0..1.0)).collect())
            .collect();
        let mut was_significant = false;
        for step in 0..40 {
            let mut moved = data.clone();
            for x in &mut moved[2] {
                *x += step as f64 * 0.05;
            }
            let t = tukey_hsd(&groups(&moved), 0.05).unwrap();
            let pair = t
                .iter()
                .find(|r| r.group_a == "g0" && r.group_b == "g2")
                .unwrap();
            assert!(
                !(was_significant && !pair.significant),
                "significance flipped back at step {step}"
            );
            was_significant = pair.significant;
        }
        assert!(was_significant);
    }
}

#[test]
fn critical_values_hit_table_rows_and_interpolate_monotonically() {
    assert!((studentized_range_critical(0.05, 3, 6.0).unwrap() - 4.339).abs() <= 1e-3);
    let mut prev = f64::INFINITY;
    for df in [5.0, 7.5, 12.0, 25.0, 35.0, 50.0, 90.0, 150.0, 1e6] {
        let q = studentized_range_critical(0.01, 4, df).unwrap();
        assert!(q < prev, "df {df}");
        prev = q;
    }
    assert!(studentized_range_critical(0.2, 3, 10.0).is_err());
    assert!(studentized_range_critical(0.05, 11, 10.0).is_err());
}

#[test]
fn shifted_group_rows_are_significant() {
    let g = groups(&[
        vec![0.50, 0.52, 0.48, 0.51, 0.49],
        vec![0.51, 0.49, 0.50, 0.52, 0.48],
        vec![0.90, 0.92, 0.88, 0.91, 0.89],
    ]);
    let report = analyze("SSIM", &g, &[0.05]).unwrap();
    assert_eq!(report.pairs.len(), 3);
    let flags: Vec<bool> = report.pairs.iter().map(|p| p.significant).collect();
    assert_eq!(flags, vec![false, true, true]);
    let md = render_markdown(&[report]);
    let rows: Vec<&str> = md.lines().filter(|l| l.starts_with("| g")).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].ends_with("| No |"));
    assert!(rows[1].ends_with("| Yes |") && rows[2].ends_with("| Yes |"));
}
