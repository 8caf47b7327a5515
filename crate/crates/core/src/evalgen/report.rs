use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::relation::{RelationInstance, RelationKey, RelationKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub relation: RelationKind,
    pub tp: usize,
    pub fp: usize,
    /// `None` when nothing of this relation was extracted.
    pub precision: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recall {
    pub found: usize,
    pub total: usize,
    pub recall: Option<f64>,
}

impl Recall {
    pub fn new(found: usize, total: usize) -> Self {
        Recall { found, total, recall: ratio(found, total) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<RelationRow>,
    pub total_tp: usize,
    pub total_fp: usize,
    pub precision: Option<f64>,
    pub recall: Option<Recall>,
}

fn ratio(a: usize, b: usize) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

impl RelationRow {
    pub fn new(relation: RelationKind, tp: usize, fp: usize) -> Self {
        RelationRow { relation, tp, fp, precision: ratio(tp, tp + fp) }
    }
}

impl EvalReport {
    /// Builds a report from per-relation counts; totals are their sums.
    pub fn from_rows(rows: Vec<RelationRow>, recall: Option<Recall>) -> Self {
        let total_tp = rows.iter().map(|r| r.tp).sum();
        let total_fp = rows.iter().map(|r| r.fp).sum();
        EvalReport { rows, total_tp, total_fp, precision: ratio(total_tp, total_tp + total_fp), recall }
    }

    /// Aligned text table. Relations with nothing extracted show dashes.
    pub fn render_text(&self) -> String {
        let fmt_p = |p: Option<f64>| p.map_or("-".to_string(), |p| format!("{p:.2}"));
        let width = self.rows.iter().map(|r| r.relation.name().len()).max().unwrap_or(0).max("Totals".len());
        let mut out = String::new();
        let _ = writeln!(out, "{:>2} | {:<width$} | {:>5} | {:>5} | {:>5}", "#", "Relation", "TP", "FP", "P");
        let _ = writeln!(out, "{}", "-".repeat(width + 31));
        for r in &self.rows {
            let (tp, fp) = if r.tp + r.fp == 0 { ("-".to_string(), "-".to_string()) } else { (r.tp.to_string(), r.fp.to_string()) };
            let _ = writeln!(
                out,
                "{:>2} | {:<width$} | {:>5} | {:>5} | {:>5}",
                r.relation.index(),
                r.relation.name(),
                tp,
                fp,
                fmt_p(r.precision)
            );
        }
        let _ = writeln!(out, "{}", "-".repeat(width + 31));
        let _ = writeln!(
            out,
            "{:>2} | {:<width$} | {:>5} | {:>5} | {:>5}",
            "",
            "Totals",
            self.total_tp,
            self.total_fp,
            fmt_p(self.precision)
        );
        if let Some(r) = &self.recall {
            let _ = writeln!(out, "Recall: {} of {} = {}", r.found, r.total, fmt_p(r.recall));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Precision per relation against `gold`, with recall over `labeled` (the
/// complete relation set of some fully annotated documents) when given.
/// Instances compare by case-folded identity.
pub fn evaluate(
    extracted: &[RelationInstance],
    gold: &[RelationInstance],
    labeled: Option<&[RelationInstance]>,
) -> EvalReport {
    let extracted: BTreeSet<RelationKey> = extracted.iter().map(RelationInstance::key).collect();
    let gold: BTreeSet<RelationKey> = gold.iter().map(RelationInstance::key).collect();
    let rows = RelationKind::ALL
        .into_iter()
        .map(|rel| {
            let mine = extracted.iter().filter(|k| k.relation == rel);
            let (tp, fp) = mine.fold((0, 0), |(tp, fp), k| if gold.contains(k) { (tp + 1, fp) } else { (tp, fp + 1) });
            RelationRow::new(rel, tp, fp)
        })
        .collect();
    let recall = labeled.map(|l| {
        let l: BTreeSet<RelationKey> = l.iter().map(RelationInstance::key).collect();
        Recall::new(l.intersection(&extracted).count(), l.len())
    });
    EvalReport::from_rows(rows, recall)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation::RelationProvenance;

    fn rows_of(text: &str) -> Vec<Vec<String>> {
        text.lines().filter(|l| l.contains('|')).map(|l| l.split('|').map(|c| c.trim().to_string()).collect()).collect()
    }

    fn inst(rel: RelationKind, s: &str, o: &str) -> RelationInstance {
        RelationInstance::new(rel, s, o, RelationProvenance::Bootstrap)
    }

    #[test]
    fn totals_fixture() {
        let r = EvalReport::from_rows(vec![RelationRow::new(RelationKind::IsVendorOf, 153, 33)], None);
        assert_eq!(format!("{:.2}", r.precision.unwrap()), "0.82");
        assert_eq!(rows_of(&r.render_text()).last().unwrap(), &["", "Totals", "153", "33", "0.82"]);
    }

    #[test]
    fn recall_fixture() {
        let r = EvalReport::from_rows(Vec::new(), Some(Recall::new(8, 33)));
        assert!(r.render_text().ends_with("Recall: 8 of 33 = 0.24\n"));
    }

    #[test]
    fn unobserved_rows_are_dashes() {
        let rows = vec![
            RelationRow::new(RelationKind::IsVendorOf, 45, 12),
            RelationRow::new(RelationKind::CveOfVuln, 0, 0),
        ];
        let rows = rows_of(&EvalReport::from_rows(rows, None).render_text());
        assert_eq!(rows[1], ["1", "is_vendor_of", "45", "12", "0.79"]);
        assert_eq!(rows[2], ["3", "CVE_of_vuln", "-", "-", "-"]);
    }

    #[test]
    fn perfect_extraction() {
        let gold = vec![inst(RelationKind::IsVendorOf, "Adobe", "Acrobat"), inst(RelationKind::VulnOfSw, "xss", "WordPress")];
        let r = evaluate(&gold, &gold, Some(&gold));
        assert_eq!(r.precision, Some(1.0));
        assert_eq!(r.recall.unwrap().recall, Some(1.0));
        assert_eq!(r.rows.len(), 8);
        assert!(r.rows.iter().all(|row| row.precision.is_none_or(|p| p == 1.0)));
    }

    #[test]
    fn case_folded_comparison() {
        let gold = vec![inst(RelationKind::IsVendorOf, "Adobe", "Acrobat")];
        let got = vec![inst(RelationKind::IsVendorOf, "adobe", "ACROBAT"), inst(RelationKind::IsVendorOf, "Adobe", "Flash")];
        let r = evaluate(&got, &gold, None);
        assert_eq!((r.total_tp, r.total_fp), (1, 1));
        assert_eq!(r.precision, Some(0.5));
        assert!(r.recall.is_none());
    }
}
