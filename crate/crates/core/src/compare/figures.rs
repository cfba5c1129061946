//! Static SVG figures. Output depends only on the inputs, so figures are
//! reproducible byte for byte.

use super::{BaselineProfile, ComparisonReport};
use crate::stats::{AmceEstimate, AmceProfile, Attribute};
use std::fmt::Write;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#7f7f7f",
];
const BASELINE_COLOR: &str = "#d62728";

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn open(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n"
    )
}

fn legend(svg: &mut String, x: f64, y: f64, entries: &[(String, &str)]) {
    for (i, (label, color)) in entries.iter().enumerate() {
        let yy = y + i as f64 * 16.0;
        let _ = writeln!(
            svg,
            "<rect x=\"{x}\" y=\"{:.1}\" width=\"10\" height=\"10\" fill=\"{color}\"/><text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            yy - 9.0,
            x + 14.0,
            yy,
            escape(label)
        );
    }
}

type ChartRow<'a> = (String, Vec<Option<&'a AmceEstimate>>, Option<f64>);

/// Horizontal ΔP bars per attribute with 95% error bars, a red tick for the
/// baseline, and per-increment rows for the number of characters with the
/// mean effect as a black circle.
pub fn amce_chart(profiles: &[AmceProfile], baseline: Option<&BaselineProfile>) -> String {
    let rows: Vec<ChartRow> = Attribute::ALL
        .iter()
        .map(|&a| {
            let (neg, pos) = a.poles();
            (
                format!("{neg} → {pos}"),
                profiles.iter().map(|p| Some(p.get(a))).collect(),
                baseline.map(|b| b.values[a.index()]),
            )
        })
        .chain((1..=4u8).map(|k| {
            (
                format!("+{k} character{}", if k > 1 { "s" } else { "" }),
                profiles.iter().map(|p| p.per_increment.get(&k)).collect(),
                None,
            )
        }))
        .collect();

    let m = profiles.len().max(1) as f64;
    let row_h = 10.0 * m + 12.0;
    let (left, plot_w, top) = (190.0, 420.0, 30.0);
    let height = top + row_h * rows.len() as f64 + 40.0 + 16.0 * (profiles.len() + 1) as f64;
    let width = left + plot_w + 30.0;
    let x_of = |v: f64| left + (v.clamp(-1.0, 1.0) + 1.0) / 2.0 * plot_w;

    let mut svg = open(width, height);
    let _ = writeln!(
        svg,
        "<text x=\"{left}\" y=\"18\">ΔP (preference for the right-hand pole)</text>"
    );
    let axis_bottom = top + row_h * rows.len() as f64;
    for tick in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let x = x_of(tick);
        let stroke = if tick == 0.0 { "#000" } else { "#ddd" };
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.1}\" y1=\"{top}\" x2=\"{x:.1}\" y2=\"{axis_bottom:.1}\" stroke=\"{stroke}\"/><text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{tick}</text>",
            axis_bottom + 14.0
        );
    }

    for (r, (label, ests, base)) in rows.iter().enumerate() {
        let y0 = top + r as f64 * row_h;
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            left - 6.0,
            y0 + row_h / 2.0 + 4.0,
            escape(label)
        );
        for (i, est) in ests.iter().enumerate() {
            let y = y0 + 6.0 + i as f64 * 10.0;
            let color = PALETTE[i % PALETTE.len()];
            let Some(e) = est else { continue };
            let Some(dp) = e.delta_p else {
                let _ = writeln!(
                    svg,
                    "<text x=\"{:.1}\" y=\"{:.1}\" fill=\"{color}\" font-size=\"8\">n/a</text>",
                    x_of(0.0) + 3.0,
                    y + 8.0
                );
                continue;
            };
            let (x0, x1) = (x_of(0.0).min(x_of(dp)), x_of(0.0).max(x_of(dp)));
            let _ = writeln!(
                svg,
                "<rect x=\"{x0:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"8\" fill=\"{color}\"/>",
                x1 - x0
            );
            if let Some(se) = e.se {
                let (lo, hi) = (x_of(dp - 1.96 * se), x_of(dp + 1.96 * se));
                let _ = writeln!(
                    svg,
                    "<line x1=\"{lo:.1}\" y1=\"{:.1}\" x2=\"{hi:.1}\" y2=\"{:.1}\" stroke=\"#000\"/>",
                    y + 4.0,
                    y + 4.0
                );
            }
        }
        if let Some(b) = base {
            let x = x_of(*b);
            let _ = writeln!(
                svg,
                "<line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"{BASELINE_COLOR}\" stroke-width=\"3\"/>",
                y0 + 2.0,
                y0 + row_h - 2.0
            );
        }
        if r == Attribute::NCharacters.index() {
            for (i, p) in profiles.iter().enumerate() {
                if let Some(mean) = p.mean_characters_effect.delta_p {
                    let _ = writeln!(
                        svg,
                        "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"#000\"/>",
                        x_of(mean),
                        y0 + 10.0 + i as f64 * 10.0
                    );
                }
            }
        }
    }

    let mut entries: Vec<(String, &str)> = profiles
        .iter()
        .enumerate()
        .map(|(i, p)| (p.model_name.clone(), PALETTE[i % PALETTE.len()]))
        .collect();
    if let Some(b) = baseline {
        entries.push((b.label.clone(), BASELINE_COLOR));
    }
    legend(&mut svg, left, axis_bottom + 36.0, &entries);
    svg.push_str("</svg>\n");
    svg
}

/// Bars of each profile's distance to the reference.
pub fn distance_chart(report: &ComparisonReport) -> String {
    let bars: Vec<(&String, f64)> = report
        .labels
        .iter()
        .filter(|l| **l != report.reference)
        .filter_map(|l| Some((l, report.distance[l]?)))
        .collect();
    let max = bars.iter().map(|b| b.1).fold(0.0, f64::max).max(1e-9);
    let (left, plot_w, top, bar_h) = (140.0, 360.0, 30.0, 22.0);
    let height = top + bars.len() as f64 * bar_h + 20.0;
    let mut svg = open(left + plot_w + 60.0, height);
    let _ = writeln!(
        svg,
        "<text x=\"{left}\" y=\"18\">Euclidean distance to {}</text>",
        escape(&report.reference)
    );
    for (i, (label, d)) in bars.iter().enumerate() {
        let y = top + i as f64 * bar_h;
        let w = d / max * plot_w;
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text><rect x=\"{left}\" y=\"{y:.1}\" width=\"{w:.1}\" height=\"{:.1}\" fill=\"{color}\"/><text x=\"{:.1}\" y=\"{:.1}\">{d:.3}</text>",
            left - 6.0,
            y + 15.0,
            escape(label),
            bar_h - 6.0,
            left + w + 4.0,
            y + 15.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// PC1/PC2 scatter with explained variance on the axis labels.
pub fn pca_scatter(report: &ComparisonReport) -> Option<String> {
    let pca = report.pca.as_ref()?;
    let size = 360.0;
    let pad = 50.0;
    let extent = pca
        .coordinates
        .iter()
        .flat_map(|c| [c.pc1.abs(), c.pc2.abs()])
        .fold(0.0, f64::max)
        .max(1e-9)
        * 1.15;
    let to_px = |v: f64| pad + (v / extent + 1.0) / 2.0 * size;
    let mut svg = open(size + 2.0 * pad + 120.0, size + 2.0 * pad);
    let c = to_px(0.0);
    let _ = writeln!(
        svg,
        "<line x1=\"{pad}\" y1=\"{c:.1}\" x2=\"{:.1}\" y2=\"{c:.1}\" stroke=\"#bbb\"/><line x1=\"{c:.1}\" y1=\"{pad}\" x2=\"{c:.1}\" y2=\"{:.1}\" stroke=\"#bbb\"/>",
        pad + size,
        pad + size
    );
    let [r1, r2] = pca.explained_variance_ratio;
    let _ = writeln!(
        svg,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">PC1 ({:.1}%)</text><text x=\"14\" y=\"{:.1}\" transform=\"rotate(-90 14 {:.1})\" text-anchor=\"middle\">PC2 ({:.1}%)</text>",
        c,
        pad + size + 30.0,
        r1 * 100.0,
        c,
        c,
        r2 * 100.0
    );
    for (i, p) in pca.coordinates.iter().enumerate() {
        let color = if p.label == report.reference {
            BASELINE_COLOR
        } else {
            PALETTE[i % PALETTE.len()]
        };
        let (x, y) = (to_px(p.pc1), pad + size - (to_px(p.pc2) - pad));
        let _ = writeln!(
            svg,
            "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"5\" fill=\"{color}\"/><text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            x + 7.0,
            y + 4.0,
            escape(&p.label)
        );
    }
    svg.push_str("</svg>\n");
    Some(svg)
}
