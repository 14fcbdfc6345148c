//! Result tables: CSV and aligned text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub method: String,
    /// Variant within the method, e.g. `agg`, `no-agg`, `lambda=2`.
    pub arm: String,
    pub budget: usize,
    pub seed: u64,
    pub pass_rate: f64,
    /// First batch reaching the threshold; empty when unreached.
    pub time_to_threshold: Option<usize>,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: String,
    pub arm: String,
    pub budget: usize,
    pub seeds: usize,
    pub mean_pass_rate: f64,
    pub sd_pass_rate: f64,
    pub reached: usize,
    pub mean_time_to_threshold: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportTable {
    pub title: String,
    pub rows: Vec<ReportRow>,
}

pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// RFC 4180 CSV with a header row.
pub fn to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

/// Numeric columns right-aligned, everything else left-aligned.
pub fn aligned(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let numeric: Vec<bool> = (0..header.len())
        .map(|i| {
            !rows.is_empty()
                && rows
                    .iter()
                    .all(|r| r.get(i).and_then(|c| c.chars().next()).is_some_and(|ch| ch.is_ascii_digit() || ch == '-' || ch == '+'))
        })
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            if numeric[i] {
                let _ = write!(out, "{c:>w$}");
            } else {
                let _ = write!(out, "{c:<w$}");
            }
        }
        let trimmed = out.trim_end().len();
        out.truncate(trimmed);
        out.push('\n');
    };
    line(&mut out, &header.iter().map(|h| h.to_string()).collect::<Vec<_>>());
    line(&mut out, &widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
    for r in rows {
        line(&mut out, r);
    }
    out
}

impl ReportTable {
    pub fn to_csv(&self) -> String {
        to_csv(&self.rows)
    }

    /// Mean and standard deviation over seeds, in first-seen order of
    /// (method, arm) and ascending budget.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut order: Vec<(String, String)> = Vec::new();
        let mut groups: BTreeMap<(usize, usize), Vec<&ReportRow>> = BTreeMap::new();
        for r in &self.rows {
            let key = (r.method.clone(), r.arm.clone());
            let idx = order.iter().position(|k| *k == key).unwrap_or_else(|| {
                order.push(key);
                order.len() - 1
            });
            groups.entry((idx, r.budget)).or_default().push(r);
        }
        groups
            .into_iter()
            .map(|((idx, budget), rows)| {
                let rates: Vec<f64> = rows.iter().map(|r| r.pass_rate).collect();
                let (mean, sd) = mean_sd(&rates);
                let times: Vec<f64> = rows.iter().filter_map(|r| r.time_to_threshold.map(|t| t as f64)).collect();
                SummaryRow {
                    method: order[idx].0.clone(),
                    arm: order[idx].1.clone(),
                    budget,
                    seeds: rows.len(),
                    mean_pass_rate: mean,
                    sd_pass_rate: sd,
                    reached: times.len(),
                    mean_time_to_threshold: (!times.is_empty()).then(|| mean_sd(&times).0),
                }
            })
            .collect()
    }

    pub fn summary_csv(&self) -> String {
        to_csv(&self.summary())
    }

    pub fn summary_text(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .summary()
            .iter()
            .map(|s| {
                vec![
                    s.method.clone(),
                    s.arm.clone(),
                    s.budget.to_string(),
                    format!("{:.3} ± {:.3}", s.mean_pass_rate, s.sd_pass_rate),
                    format!("{}/{}", s.reached, s.seeds),
                    s.mean_time_to_threshold.map_or("unreached".into(), |t| format!("{t:.1}")),
                ]
            })
            .collect();
        let mut out = format!("{}\n", self.title);
        out.push_str(&aligned(&["method", "arm", "budget", "pass_rate", "reached", "time_to_threshold"], &rows));
        out
    }

    /// One aligned line per seed.
    pub fn rows_text(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.method.clone(),
                    r.arm.clone(),
                    r.budget.to_string(),
                    r.seed.to_string(),
                    format!("{:.3}", r.pass_rate),
                    r.time_to_threshold.map_or("unreached".into(), |t| t.to_string()),
                    format!("{:.2}", r.wall_clock_s),
                ]
            })
            .collect();
        let mut out = format!("{}\n", self.title);
        out.push_str(&aligned(
            &["method", "arm", "budget", "seed", "pass_rate", "time_to_threshold", "wall_clock_s"],
            &rows,
        ));
        out
    }

    pub fn any_unreached(&self) -> bool {
        self.rows.iter().any(|r| r.time_to_threshold.is_none())
    }

    pub fn mean_pass_rate(&self, method: &str, arm: &str, budget: usize) -> Option<f64> {
        self.summary()
            .into_iter()
            .find(|s| s.method == method && s.arm == arm && s.budget == budget)
            .map(|s| s.mean_pass_rate)
    }
}
