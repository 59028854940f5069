//! One-way ANOVA with Tukey HSD post-hoc comparisons over per-image metric
//! samples of several model families.

mod qtable;
mod special;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use special::{f_survival, ln_gamma, regularized_incomplete_beta};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 groups, got {0}")]
    TooFewGroups(usize),
    #[error("group '{label}' has {n} samples; need at least 2")]
    TooFewSamples { label: String, n: usize },
    #[error("group '{0}' contains a non-finite value")]
    NonFinite(String),
    #[error("alpha {0} is not covered by the studentized range table")]
    UnsupportedAlpha(f64),
    #[error("studentized range table covers k in 2..=10 and df >= 5, got k={k}, df={df}")]
    OutOfTable { k: usize, df: f64 },
}

/// Significance levels reported by default.
pub const DEFAULT_ALPHAS: [f64; 3] = [0.05, 0.01, 0.001];

/// Per-image values of one metric for one model family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricGroup {
    pub label: String,
    pub samples: Vec<f64>,
}

impl MetricGroup {
    pub fn new(label: impl Into<String>, samples: Vec<f64>) -> Result<Self, StatsError> {
        let label = label.into();
        if samples.len() < 2 {
            return Err(StatsError::TooFewSamples {
                label,
                n: samples.len(),
            });
        }
        if !samples.iter().all(|v| v.is_finite()) {
            return Err(StatsError::NonFinite(label));
        }
        Ok(Self { label, samples })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.n() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    /// `+inf` when every group is constant but the means differ.
    pub f_value: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
    pub p_value: f64,
    /// The levels among those requested at which `p_value < alpha`.
    pub significant_at: Vec<f64>,
}

fn check_groups(groups: &[MetricGroup]) -> Result<(), StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups(groups.len()));
    }
    for g in groups {
        if g.n() < 2 {
            return Err(StatsError::TooFewSamples {
                label: g.label.clone(),
                n: g.n(),
            });
        }
        if !g.samples.iter().all(|v| v.is_finite()) {
            return Err(StatsError::NonFinite(g.label.clone()));
        }
    }
    Ok(())
}

pub fn one_way_anova(groups: &[MetricGroup]) -> Result<AnovaResult, StatsError> {
    one_way_anova_at(groups, &DEFAULT_ALPHAS)
}

pub fn one_way_anova_at(groups: &[MetricGroup], alphas: &[f64]) -> Result<AnovaResult, StatsError> {
    check_groups(groups)?;
    let k = groups.len();
    let n_total: usize = groups.iter().map(MetricGroup::n).sum();
    let grand = groups.iter().flat_map(|g| &g.samples).sum::<f64>() / n_total as f64;
    let mut ss_between = 0.0;
    let mut ss_within = 0.0;
    for g in groups {
        let m = g.mean();
        ss_between += g.n() as f64 * (m - grand).powi(2);
        ss_within += g.samples.iter().map(|x| (x - m).powi(2)).sum::<f64>();
    }
    let (df_between, df_within) = (k - 1, n_total - k);
    let (f_value, p_value) = if ss_within == 0.0 {
        if ss_between > 0.0 {
            (f64::INFINITY, 0.0)
        } else {
            (0.0, 1.0)
        }
    } else {
        let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
        (f, f_survival(f, df_between as f64, df_within as f64))
    };
    Ok(AnovaResult {
        f_value,
        df_between,
        df_within,
        ss_between,
        ss_within,
        p_value,
        significant_at: alphas.iter().copied().filter(|a| p_value < *a).collect(),
    })
}

/// Critical value of the studentized range, `q(alpha; k, df)`.
///
/// Between tabulated degrees of freedom the value is interpolated linearly in
/// `ln df`; beyond 120 it is interpolated linearly in `1/df` toward the
/// infinite-df row.
pub fn studentized_range_critical(alpha: f64, k: usize, df: f64) -> Result<f64, StatsError> {
    let table = match alpha {
        a if a == 0.05 => &qtable::Q_05,
        a if a == 0.01 => &qtable::Q_01,
        a if a == 0.001 => &qtable::Q_001,
        _ => return Err(StatsError::UnsupportedAlpha(alpha)),
    };
    if !(2..=10).contains(&k) || df.is_nan() || df < qtable::DFS[0] {
        return Err(StatsError::OutOfTable { k, df });
    }
    let col = k - 2;
    let dfs = &qtable::DFS;
    if let Some(i) = dfs.iter().position(|&d| d == df) {
        return Ok(table[i][col]);
    }
    let hi = dfs.iter().position(|&d| d > df).expect("infinite last row");
    let lo = hi - 1;
    let (d0, d1) = (dfs[lo], dfs[hi]);
    let (q0, q1) = (table[lo][col], table[hi][col]);
    let t = if d1.is_infinite() {
        1.0 - d0 / df
    } else {
        (df.ln() - d0.ln()) / (d1.ln() - d0.ln())
    };
    Ok(q0 + t * (q1 - q0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyResult {
    pub group_a: String,
    pub group_b: String,
    /// `mean_b − mean_a`.
    pub mean_diff: f64,
    pub q_value: f64,
    pub critical_q: f64,
    pub significant: bool,
}

/// Tukey HSD for every pair (in input order). Unequal sizes use the
/// harmonic mean of the two group sizes (Tukey–Kramer).
pub fn tukey_hsd(groups: &[MetricGroup], alpha: f64) -> Result<Vec<TukeyResult>, StatsError> {
    let anova = one_way_anova_at(groups, &[])?;
    let critical_q = studentized_range_critical(alpha, groups.len(), anova.df_within as f64)?;
    let msw = anova.ss_within / anova.df_within as f64;
    let mut out = Vec::new();
    for (i, a) in groups.iter().enumerate() {
        for b in &groups[i + 1..] {
            let mean_diff = b.mean() - a.mean();
            let n_h = 2.0 / (1.0 / a.n() as f64 + 1.0 / b.n() as f64);
            let se = (msw / n_h).sqrt();
            let q_value = if mean_diff == 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                mean_diff.abs() / se
            };
            out.push(TukeyResult {
                group_a: a.label.clone(),
                group_b: b.label.clone(),
                mean_diff,
                q_value,
                critical_q,
                significant: q_value > critical_q,
            });
        }
    }
    Ok(out)
}

/// ANOVA and Tukey results for one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceReport {
    pub metric: String,
    pub anova: AnovaResult,
    pub pairs: Vec<TukeyResult>,
    pub alpha_levels: Vec<f64>,
    pub n_per_group: Vec<(String, usize)>,
}

pub fn significance_report(
    metric: impl Into<String>,
    anova: AnovaResult,
    tukey: Vec<TukeyResult>,
    alphas: &[f64],
) -> SignificanceReport {
    SignificanceReport {
        metric: metric.into(),
        anova,
        pairs: tukey,
        alpha_levels: alphas.to_vec(),
        n_per_group: Vec::new(),
    }
}

/// Runs ANOVA and Tukey HSD (at the smallest requested alpha) for one metric.
pub fn analyze(
    metric: &str,
    groups: &[MetricGroup],
    alphas: &[f64],
) -> Result<SignificanceReport, StatsError> {
    let tukey_alpha = alphas.iter().copied().fold(f64::INFINITY, f64::min);
    let tukey_alpha = if tukey_alpha.is_finite() {
        tukey_alpha
    } else {
        0.05
    };
    let anova = one_way_anova_at(groups, alphas)?;
    let pairs = tukey_hsd(groups, tukey_alpha)?;
    let mut report = significance_report(metric, anova, pairs, alphas);
    report.n_per_group = groups.iter().map(|g| (g.label.clone(), g.n())).collect();
    Ok(report)
}

/// Finite numbers as JSON numbers, infinities as the strings `"inf"` / `"-inf"`.
pub fn json_number(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else if v.is_nan() {
        serde_json::Value::String("nan".into())
    } else if v > 0.0 {
        serde_json::Value::String("inf".into())
    } else {
        serde_json::Value::String("-inf".into())
    }
}

impl SignificanceReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "metric": self.metric,
            "observations": "per-test-image metric values",
            "n_per_group": self.n_per_group.iter()
                .map(|(l, n)| serde_json::json!({"group": l, "n": n}))
                .collect::<Vec<_>>(),
            "anova": {
                "f": json_number(self.anova.f_value),
                "df": [self.anova.df_between, self.anova.df_within],
                "p": json_number(self.anova.p_value),
                "ss_between": json_number(self.anova.ss_between),
                "ss_within": json_number(self.anova.ss_within),
                "significant_at": self.anova.significant_at,
            },
            "pairs": self.pairs.iter().map(|t| serde_json::json!({
                "a": t.group_a,
                "b": t.group_b,
                "mean_diff": json_number(t.mean_diff),
                "q": json_number(t.q_value),
                "critical_q": json_number(t.critical_q),
                "significant": t.significant,
            })).collect::<Vec<_>>(),
            "alpha_levels": self.alpha_levels,
        })
    }
}

fn fmt_value(v: f64, decimals: usize) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.decimals$}")
    }
}

fn fmt_p(p: f64) -> String {
    if p == 0.0 {
        "0".into()
    } else if p < 1e-4 {
        format!("{p:.2e}")
    } else {
        format!("{p:.4}")
    }
}

/// The statistics table: one row per group pair with mean difference,
/// Q statistic and significance for each metric side by side, preceded by
/// the ANOVA summary of every metric. All reports must list the same pairs.
pub fn render_markdown(reports: &[SignificanceReport]) -> String {
    let mut out = String::from("# Statistical significance\n\n");
    if reports.is_empty() {
        out.push_str("No statistics were computed.\n");
        return out;
    }
    for r in reports {
        let levels: Vec<String> = r
            .anova
            .significant_at
            .iter()
            .map(|a| a.to_string())
            .collect();
        let _ = writeln!(
            out,
            "- {} one-way ANOVA: F({}, {}) = {}, p = {}; significant at alpha = {}",
            r.metric,
            r.anova.df_between,
            r.anova.df_within,
            fmt_value(r.anova.f_value, 2),
            fmt_p(r.anova.p_value),
            if levels.is_empty() {
                "none".to_string()
            } else {
                levels.join(", ")
            }
        );
    }
    let _ = writeln!(
        out,
        "\nObservations are per-test-image metric values. Tukey HSD critical values at alpha = {}.\n",
        reports[0]
            .pairs
            .first()
            .map(|_| reports[0].alpha_levels.iter().copied().fold(f64::INFINITY, f64::min))
            .filter(|a| a.is_finite())
            .map_or("n/a".to_string(), |a| a.to_string())
    );
    let mut header = String::from("| Group 1 | Group 2 |");
    let mut rule = String::from("|---|---|");
    for r in reports {
        let _ = write!(
            header,
            " {m} Mean Diff | {m} Q-value | {m} Significant |",
            m = r.metric
        );
        rule.push_str("---:|---:|:---:|");
    }
    out.push_str(&header);
    out.push('\n');
    out.push_str(&rule);
    out.push('\n');
    for (i, pair) in reports[0].pairs.iter().enumerate() {
        let _ = write!(out, "| {} | {} |", pair.group_a, pair.group_b);
        for r in reports {
            match r.pairs.get(i) {
                Some(t) => {
                    let _ = write!(
                        out,
                        " {} | {} | {} |",
                        fmt_value(t.mean_diff, 4),
                        fmt_value(t.q_value, 2),
                        if t.significant { "Yes" } else { "No" }
                    );
                }
                None => out.push_str(" | | |"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn groups(data: &[(&str, &[f64])]) -> Vec<MetricGroup> {
        data.iter()
            .map(|(l, s)| MetricGroup::new(*l, s.to_vec()).unwrap())
            .collect()
    }

    fn textbook() -> Vec<MetricGroup> {
        groups(&[
            ("G1", &[1.0, 2.0, 3.0]),
            ("G2", &[2.0, 3.0, 4.0]),
            ("G3", &[3.0, 4.0, 5.0]),
        ])
    }

    #[test]
    fn textbook_anova() {
        let r = one_way_anova(&textbook()).unwrap();
        assert_eq!((r.ss_between, r.ss_within), (6.0, 6.0));
        assert_eq!((r.df_between, r.df_within), (2, 6));
        assert_eq!(r.f_value, 3.0);
        assert!(r.p_value > 0.10 && r.p_value < 0.15);
        assert!(r.significant_at.is_empty());
    }

    #[test]
    fn identical_and_separated_constant_groups() {
        let same = groups(&[("a", &[1.0, 2.0]), ("b", &[1.0, 2.0]), ("c", &[1.0, 2.0])]);
        let r = one_way_anova(&same).unwrap();
        assert_eq!((r.f_value, r.p_value), (0.0, 1.0));
        let sep = groups(&[("a", &[1.0, 1.0]), ("b", &[2.0, 2.0])]);
        let r = one_way_anova(&sep).unwrap();
        assert_eq!((r.f_value, r.p_value), (f64::INFINITY, 0.0));
    }

    #[test]
    fn guards() {
        assert_eq!(
            one_way_anova(&textbook()[..1]),
            Err(StatsError::TooFewGroups(1))
        );
        assert!(matches!(
            MetricGroup::new("x", vec![1.0]),
            Err(StatsError::TooFewSamples { .. })
        ));
        assert_eq!(
            studentized_range_critical(0.1, 3, 6.0),
            Err(StatsError::UnsupportedAlpha(0.1))
        );
        assert!(matches!(
            studentized_range_critical(0.05, 11, 6.0),
            Err(StatsError::OutOfTable { .. })
        ));
        assert!(matches!(
            studentized_range_critical(0.05, 3, 4.0),
            Err(StatsError::OutOfTable { .. })
        ));
    }

    #[test]
    fn table_lookup_and_interpolation() {
        assert_eq!(studentized_range_critical(0.05, 3, 6.0).unwrap(), 4.339);
        assert_eq!(
            studentized_range_critical(0.05, 3, f64::INFINITY).unwrap(),
            3.314
        );
        let mid = studentized_range_critical(0.05, 3, 50.0).unwrap();
        assert!(mid < 3.442 && mid > 3.399, "{mid}");
        let far = studentized_range_critical(0.001, 3, 1e6).unwrap();
        assert!((far - 5.063).abs() < 1e-3);
    }

    #[test]
    fn tukey_textbook_fixture() {
        let t = tukey_hsd(&textbook(), 0.05).unwrap();
        assert_eq!(t.len(), 3);
        let g13 = &t[1];
        assert_eq!((g13.group_a.as_str(), g13.group_b.as_str()), ("G1", "G3"));
        assert!((g13.q_value - 3.4641).abs() < 1e-4);
        assert_eq!(g13.critical_q, 4.339);
        assert!(!g13.significant);
    }

    #[test]
    fn markdown_has_one_row_per_pair() {
        let r = analyze("SSIM", &textbook(), &DEFAULT_ALPHAS).unwrap();
        let md = render_markdown(&[r]);
        assert_eq!(
            md.lines()
                .filter(|l| l.starts_with("| G") && !l.starts_with("| Group"))
                .count(),
            3
        );
        assert!(md
            .lines()
            .filter(|l| l.starts_with("| G") && !l.starts_with("| Group"))
            .all(|l| l.contains("| No |")));
    }
}
