//! Study files: `replications.csv`, `summary.json` and static SVG plots.

use super::{Quantiles, ReplicationResult, StudyOutput, StudySummary};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug)]
pub struct StudyFiles {
    pub replications: PathBuf,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn write_replications_csv<W: Write>(reps: &[ReplicationResult], mut out: W) -> Result<()> {
    writeln!(
        out,
        "rep,failed,h_hat,h_star,h_0,d_a_hat,d_a_h0,d_a_star,poisoned,nonconverged,error"
    )?;
    for r in reps {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.rep_index,
            r.failed,
            r.h_hat,
            r.h_star,
            opt(r.h_0),
            r.d_a_hat,
            opt(r.d_a_h0),
            r.d_a_star,
            r.poisoned,
            r.nonconverged,
            r.error.as_deref().map(quote).unwrap_or_default()
        )?;
    }
    Ok(())
}

/// Writes the study into `dir`. Refuses a directory that already holds
/// `replications.csv`; studies are not resumable.
pub fn write_study(dir: &Path, study: &StudyOutput) -> Result<StudyFiles> {
    let replications = dir.join("replications.csv");
    if replications.exists() {
        return Err(Error::InvalidArgument(format!(
            "{} already exists; partial or previous runs are not resumed",
            replications.display()
        )));
    }
    fs::create_dir_all(dir.join("plots"))?;
    let mut f = std::io::BufWriter::new(fs::File::create(&replications)?);
    write_replications_csv(&study.replications, &mut f)?;
    f.flush()?;
    let summary = dir.join("summary.json");
    fs::write(&summary, serde_json::to_string_pretty(&study.summary)? + "\n")?;
    let hist = dir.join("plots").join("h_hat_histogram.svg");
    fs::write(&hist, histogram_svg(&study.summary))?;
    let boxes = dir.join("plots").join("d_a_boxplot.svg");
    fs::write(&boxes, boxplot_svg(&study.summary))?;
    Ok(StudyFiles {
        replications,
        summary,
        plots: vec![hist, boxes],
    })
}

const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 40.0;

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{title}</text>\n",
        W / 2.0
    )
}

/// Histogram of `ĥ` with `h₀` as a vertical line.
pub fn histogram_svg(s: &StudySummary) -> String {
    let hist = &s.h_hat_histogram;
    let (lo, hi) = (hist.edges[0], hist.edges[hist.edges.len() - 1]);
    let max = hist.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let x = |h: f64| PAD + (h - lo) / (hi - lo) * (W - 2.0 * PAD);
    let y = |c: f64| H - PAD - c / max * (H - 2.0 * PAD);
    let mut out = svg_open(&format!("{} n={}: CV bandwidths", s.model, s.n));
    for (i, &c) in hist.counts.iter().enumerate() {
        let (x0, x1) = (x(hist.edges[i]), x(hist.edges[i + 1]));
        let _ = writeln!(
            out,
            "<rect x=\"{x0:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#9ab\" stroke=\"#345\"/>",
            y(c as f64),
            x1 - x0,
            H - PAD - y(c as f64)
        );
    }
    if let Some(h0) = s.h_0 {
        let _ = writeln!(
            out,
            "<line x1=\"{0:.2}\" x2=\"{0:.2}\" y1=\"{PAD}\" y2=\"{1}\" stroke=\"black\" stroke-width=\"2\"/>",
            x(h0.clamp(lo, hi)),
            H - PAD
        );
    }
    let _ = writeln!(
        out,
        "<line x1=\"{PAD}\" x2=\"{}\" y1=\"{1}\" y2=\"{1}\" stroke=\"black\"/>",
        W - PAD,
        H - PAD
    );
    for h in [lo, (lo + hi) / 2.0, hi] {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{h:.3}</text>",
            x(h),
            H - PAD + 15.0
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Box plots (5/25/50/75/95%) of `d_A` for the CV, plug-in and oracle selectors.
pub fn boxplot_svg(s: &StudySummary) -> String {
    let boxes: Vec<(&str, &Quantiles)> = [
        ("CV", s.d_a.cv.as_ref()),
        ("Plugin", s.d_a.plugin.as_ref()),
        ("Optimal", s.d_a.optimal.as_ref()),
    ]
    .into_iter()
    .filter_map(|(l, q)| q.map(|q| (l, q)))
    .filter(|(_, q)| q.values.iter().all(|v| v.is_finite()))
    .collect();
    let mut out = svg_open(&format!("{} n={}: d_A by selector", s.model, s.n));
    let max = boxes
        .iter()
        .map(|(_, q)| q.values[4])
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let y = |v: f64| H - PAD - v / max * (H - 2.0 * PAD);
    let slot = (W - 2.0 * PAD) / boxes.len().max(1) as f64;
    for (k, (label, q)) in boxes.iter().enumerate() {
        let cx = PAD + slot * (k as f64 + 0.5);
        let half = slot * 0.2;
        let v = &q.values;
        let _ = writeln!(
            out,
            "<line x1=\"{cx:.2}\" x2=\"{cx:.2}\" y1=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
            y(v[0]),
            y(v[4])
        );
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#dde\" stroke=\"black\"/>",
            cx - half,
            y(v[3]),
            2.0 * half,
            y(v[1]) - y(v[3])
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" x2=\"{:.2}\" y1=\"{2:.2}\" y2=\"{2:.2}\" stroke=\"black\" stroke-width=\"2\"/>",
            cx - half,
            cx + half,
            y(v[2])
        );
        let _ = writeln!(
            out,
            "<text x=\"{cx:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>",
            H - PAD + 15.0
        );
    }
    out.push_str("</svg>\n");
    out
}
