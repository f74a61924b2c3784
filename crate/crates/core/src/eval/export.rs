//! Text exports: metrics JSON, per-class ROC CSV and a static SVG figure.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{EvalSummary, RocCurve};
use crate::data::ClassVocab;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassAuc {
    pub class: String,
    pub auc: Option<f64>,
    pub skipped_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub sample_count: usize,
    pub accuracy: f64,
    pub macro_auc: Option<f64>,
    pub per_class_auc: Vec<ClassAuc>,
    pub classes: Vec<String>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<usize>>,
}

impl MetricsFile {
    pub fn new(summary: &EvalSummary, vocab: &ClassVocab) -> Self {
        let per_class_auc = summary
            .per_class_auc
            .iter()
            .enumerate()
            .map(|(c, auc)| ClassAuc {
                class: vocab.code(c).to_string(),
                auc: *auc,
                skipped_reason: summary
                    .skipped
                    .iter()
                    .find(|s| s.class == c)
                    .map(|s| s.reason.clone()),
            })
            .collect();
        MetricsFile {
            sample_count: summary.confusion.iter().flatten().sum(),
            accuracy: summary.accuracy,
            macro_auc: summary.macro_auc,
            per_class_auc,
            classes: vocab.codes().to_vec(),
            confusion: summary.confusion.clone(),
        }
    }
}

pub fn metrics_json(summary: &EvalSummary, vocab: &ClassVocab) -> String {
    let mut s = serde_json::to_string_pretty(&MetricsFile::new(summary, vocab))
        .expect("metrics serialise");
    s.push('\n');
    s
}

/// `threshold,fpr,tpr` rows; the leading `(0, 0)` point has threshold `inf`.
/// Values use the shortest representation that parses back exactly.
pub fn roc_csv(curve: &RocCurve) -> String {
    let mut out = String::from("threshold,fpr,tpr\n");
    for p in &curve.points {
        writeln!(out, "{},{},{}", p.threshold, p.fpr, p.tpr).expect("write to string");
    }
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Static SVG with the unit square as axes, one polyline per curve and the
/// AUC of each curve in the legend.
pub fn roc_svg(curves: &[RocCurve], vocab: &ClassVocab) -> String {
    const SIZE: f64 = 400.0;
    const LEFT: f64 = 60.0;
    const TOP: f64 = 20.0;
    let legend_h = 18.0 * curves.len() as f64;
    let (width, height) = (LEFT + SIZE + 200.0, TOP + SIZE + 50.0f64.max(legend_h - SIZE + 50.0));
    let x = |fpr: f64| LEFT + fpr * SIZE;
    let y = |tpr: f64| TOP + (1.0 - tpr) * SIZE;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        s,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#999" stroke-dasharray="4 4"/>"##,
        x(0.0),
        y(0.0),
        x(1.0),
        y(1.0)
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{tick}</text>"#,
            x(tick),
            TOP + SIZE + 16.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{tick}</text>"#,
            LEFT - 6.0,
            y(tick) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">False positive rate</text>"#,
        LEFT + SIZE / 2.0,
        TOP + SIZE + 36.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">True positive rate</text>"#,
        TOP + SIZE / 2.0,
        TOP + SIZE / 2.0
    );
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[c.class_index % PALETTE.len()];
        let pts: Vec<String> = c
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", x(p.fpr), y(p.tpr)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + SIZE + 20.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{} (AUC {:.4})</text>"#,
            lx + 26.0,
            ly + 4.0,
            vocab.code(c.class_index),
            c.auc
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::roc_from_column;

    #[test]
    fn csv_has_header_and_endpoints() {
        let curve = roc_from_column(&[0.9, 0.4, 0.4, 0.1], &[true, false, true, false], 0).unwrap();
        let csv = roc_csv(&curve);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "threshold,fpr,tpr");
        assert_eq!(lines[1], "inf,0,0");
        assert_eq!(*lines.last().unwrap(), "0.1,1,1");
    }

    #[test]
    fn svg_has_one_polyline_per_curve() {
        let vocab = ClassVocab::default();
        let a = roc_from_column(&[0.9, 0.1], &[true, false], 0).unwrap();
        let b = roc_from_column(&[0.2, 0.8], &[true, false], 3).unwrap();
        let svg = roc_svg(&[a, b], &vocab);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("MEL (AUC 1.0000)"));
        assert!(svg.contains("AKIEC (AUC 0.0000)"));
    }
}
