//! Fixed-width text tables for the experiment reports.

use std::fmt::Write;

use crate::evaluation::{ClassReport, CvReport};
use crate::search::SearchReport;

/// Per-class precision/recall/F1/support with a support-weighted `avg / total` row.
pub fn class_report_table(report: &ClassReport, name: impl Fn(u32) -> String) -> String {
    let names: Vec<String> = report.per_class.iter().map(|m| name(m.label)).collect();
    let width = names.iter().map(String::len).chain([11]).max().unwrap_or(11);
    let mut out = String::new();
    writeln!(out, "accuracy: {:.5}", report.accuracy).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "{:width$} {:>10} {:>10} {:>10} {:>10}", "", "precision", "recall", "f1-score", "support").unwrap();
    for (m, n) in report.per_class.iter().zip(&names) {
        writeln!(out, "{n:width$} {:>10.5} {:>10.5} {:>10.5} {:>10}", m.precision, m.recall, m.f1, m.support).unwrap();
    }
    let w = report.weighted_avg;
    writeln!(
        out,
        "{:width$} {:>10.5} {:>10.5} {:>10.5} {:>10}",
        "avg / total", w.precision, w.recall, w.f1, report.total
    )
    .unwrap();
    out
}

/// One-line summary: accuracy, weighted precision/recall/F1 and seconds.
pub fn summary_row(label: &str, report: &ClassReport, seconds: f64) -> String {
    let w = report.weighted_avg;
    format!("{label:<14} {:.3} {:.3} {:.3} {:.3} {seconds:>8.2}", report.accuracy, w.precision, w.recall, w.f1)
}

pub fn summary_header() -> String {
    format!("{:<14} {:<5} {:<5} {:<5} {:<5} {:>8}", "Classifier", "Acc", "Prec", "Rec", "f1", "Time/s")
}

/// Train/test counts per class with a totals row.
pub fn histogram_table(rows: &[(String, usize, usize)]) -> String {
    let width = rows.iter().map(|r| r.0.len()).chain([11]).max().unwrap_or(11);
    let mut out = String::new();
    writeln!(out, "{:width$} {:>12} {:>12}", "Class", "Training Set", "Testing Set").unwrap();
    for (name, train, test) in rows {
        writeln!(out, "{name:width$} {train:>12} {test:>12}").unwrap();
    }
    let (train, test) = rows.iter().fold((0, 0), |acc, r| (acc.0 + r.1, acc.1 + r.2));
    writeln!(out, "{:width$} {train:>12} {test:>12}", "Totals").unwrap();
    out
}

/// `μ (+/- σ)` and elapsed seconds per run.
pub fn cv_table(rows: &[(String, &CvReport)]) -> String {
    let width = rows.iter().map(|r| r.0.len()).chain([14]).max().unwrap_or(14);
    let mut out = String::new();
    writeln!(out, "{:width$} {:<24} {:>12}", "SGD Classifier", "Accuracy μ (+/- σ)", "Time / Sec.").unwrap();
    for (name, report) in rows {
        writeln!(out, "{name:width$} {:<24} {:>12.5}", report.summary(), report.timing.total_seconds).unwrap();
    }
    out
}

/// Ranked candidates: mean, spread and the parameter tuple.
pub fn search_table(report: &SearchReport) -> String {
    let mut out = String::new();
    writeln!(out, "{:>4} {:>8} {:>12}  Parameters", "Rank", "μ", "σ").unwrap();
    for c in &report.candidates {
        match (c.mean, c.std) {
            (Some(m), Some(s)) => writeln!(out, "{:>4} {m:>8.5} {:>12}  {}", c.rank, format!("(+/-{s:.5})"), c.params),
            _ => writeln!(
                out,
                "{:>4} {:>8} {:>12}  {}  [{}]",
                c.rank,
                "-",
                "-",
                c.params,
                c.error.as_deref().unwrap_or("")
            ),
        }
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::{per_class_metrics, ConfusionMatrix};

    #[test]
    fn class_table_layout() {
        let cm = ConfusionMatrix { classes: vec![1, 2], counts: vec![vec![1, 1], vec![0, 1]] };
        let report = per_class_metrics(&cm).unwrap();
        let table = class_report_table(&report, |l| format!("cat{}", l - 1));
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines[0], "accuracy: 0.66667");
        assert!(lines[2].contains("precision") && lines[2].contains("support"));
        assert_eq!(lines[3], "cat0           1.00000    0.50000    0.66667          2");
        assert!(lines[5].starts_with("avg / total"));
        assert!(lines[5].ends_with("3"));
    }

    #[test]
    fn histogram_totals() {
        let t = histogram_table(&[("a".into(), 3, 1), ("b".into(), 4, 2)]);
        assert!(t.lines().last().unwrap().split_whitespace().eq(["Totals", "7", "3"]));
    }
}
