//! Results table and TPR/FPR scatter plot.

use std::fmt::Write as _;

use super::experiment::MetricsReport;
use crate::dataset::FeatureKind;
use crate::error::{Error, Result};

pub const RESULTS_HEADER: &str = "feature,lsa,context,folds,seed,tpr,fpr,accuracy,precision,recall,converged_folds";

/// One parsed row of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub feature: FeatureKind,
    pub lsa: bool,
    pub context: bool,
    pub folds: usize,
    pub seed: u64,
    pub tpr: f64,
    pub fpr: f64,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub converged_folds: usize,
}

impl From<&MetricsReport> for ResultRow {
    fn from(r: &MetricsReport) -> Self {
        Self {
            feature: r.config.feature_kind,
            lsa: r.config.use_lsa,
            context: r.config.use_context,
            folds: r.config.folds,
            seed: r.config.seed,
            tpr: r.mean.tpr,
            fpr: r.mean.fpr,
            accuracy: r.mean.accuracy,
            precision: r.mean.precision,
            recall: r.mean.recall,
            converged_folds: r.converged_folds,
        }
    }
}

fn on_off(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

fn parse_on_off(s: &str) -> Result<bool> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(Error::Csv(format!("expected on or off, got {other:?}"))),
    }
}

/// One CSV row per report, metrics to six decimals.
pub fn emit_results(reports: &[MetricsReport]) -> String {
    let rows: Vec<ResultRow> = reports.iter().map(ResultRow::from).collect();
    results_csv(&rows)
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
            r.feature,
            on_off(r.lsa),
            on_off(r.context),
            r.folds,
            r.seed,
            r.tpr,
            r.fpr,
            r.accuracy,
            r.precision,
            r.recall,
            r.converged_folds
        )
        .unwrap();
    }
    out
}

pub fn parse_results(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != RESULTS_HEADER {
        return Err(Error::Csv(format!("unexpected header {:?}", header.join(","))));
    }
    let num = |s: &str| -> Result<f64> {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Csv(format!("bad number {s:?}")))
    };
    let int = |s: &str| -> Result<u64> { s.parse::<u64>().map_err(|_| Error::Csv(format!("bad integer {s:?}"))) };
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        rows.push(ResultRow {
            feature: rec[0].parse().map_err(Error::Csv)?,
            lsa: parse_on_off(&rec[1])?,
            context: parse_on_off(&rec[2])?,
            folds: int(&rec[3])? as usize,
            seed: int(&rec[4])?,
            tpr: num(&rec[5])?,
            fpr: num(&rec[6])?,
            accuracy: num(&rec[7])?,
            precision: num(&rec[8])?,
            recall: num(&rec[9])?,
            converged_folds: int(&rec[10])? as usize,
        });
    }
    Ok(rows)
}

/// TPR (vertical) against FPR (horizontal) on the unit square. Hollow marks
/// are static features, filled marks dynamic; circles are word histograms,
/// squares topic vectors; blue is context-blind, red context-aware.
pub fn scatter_svg(rows: &[ResultRow]) -> String {
    const SIZE: f64 = 400.0;
    const PAD: f64 = 50.0;
    let x = |fpr: f64| PAD + fpr.clamp(0.0, 1.0) * SIZE;
    let y = |tpr: f64| PAD + (1.0 - tpr.clamp(0.0, 1.0)) * SIZE;
    let total = SIZE + 2.0 * PAD;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for i in 0..=10 {
        let t = i as f64 / 10.0;
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{t:.1}</text>"#,
            x(t),
            PAD + SIZE + 15.0
        )
        .unwrap();
        writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{t:.1}</text>"#,
            PAD - 5.0,
            y(t) + 3.0
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">false positive rate</text>"#,
        PAD + SIZE / 2.0,
        total - 10.0
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="15" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {:.1})">true positive rate</text>"#,
        PAD + SIZE / 2.0,
        PAD + SIZE / 2.0
    )
    .unwrap();
    for r in rows {
        let color = if r.context { "red" } else { "blue" };
        let fill = match r.feature {
            FeatureKind::Static => "none",
            FeatureKind::Dynamic => color,
        };
        let (cx, cy) = (x(r.fpr), y(r.tpr));
        let title = format!(
            "{} lsa={} context={} tpr={:.3} fpr={:.3}",
            r.feature,
            on_off(r.lsa),
            on_off(r.context),
            r.tpr,
            r.fpr
        );
        if r.lsa {
            writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{fill}" stroke="{color}" stroke-width="2"><title>{title}</title></rect>"#,
                cx - 5.0,
                cy - 5.0
            )
            .unwrap();
        } else {
            writeln!(
                s,
                r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="5" fill="{fill}" stroke="{color}" stroke-width="2"><title>{title}</title></circle>"#
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}
