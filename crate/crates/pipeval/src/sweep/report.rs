//! Sweep report rows and their three output shapes: a versioned CSV, a
//! Markdown table, and static SVG scatter plots.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codec::SizeStats;
use crate::config::{GammaMode, PipelineConfig};
use crate::error::{Error, Result};

/// Header version for the CSV format; bump when columns change.
pub const REPORT_VERSION: &str = "pipeval-report v1";
pub const CSV_HEADER: &str = "config_id,quant_bits,jpeg_quality,max_side,scale_factor,\
color_model,gamma,distortion_k1,baseline_bytes,variant_bytes,reduction,map50,fps";

/// One sweep configuration's outcome: identity, parameter columns, storage
/// accounting, and optional accuracy/throughput.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub config_id: String,
    pub quant_bits: u8,
    pub jpeg_quality: Option<u8>,
    pub max_side: Option<u32>,
    pub scale_factor: Option<f64>,
    pub color_model: String,
    pub gamma: String,
    pub distortion_k1: f64,
    pub baseline_bytes: u64,
    pub variant_bytes: u64,
    pub reduction: f64,
    pub map50: Option<f64>,
    pub fps: Option<f64>,
}

fn gamma_label(mode: GammaMode) -> String {
    match mode {
        GammaMode::None => "none".into(),
        GammaMode::Fixed(g) => format!("{g}"),
        GammaMode::Dynamic => "dynamic".into(),
    }
}

impl ReportRow {
    pub fn new(cfg: &PipelineConfig, sizes: &SizeStats, map50: Option<f64>, fps: Option<f64>) -> ReportRow {
        ReportRow {
            config_id: cfg.config_id(),
            quant_bits: cfg.quant_bits,
            jpeg_quality: cfg.jpeg_quality,
            max_side: cfg.max_side,
            scale_factor: cfg.scale_factor,
            color_model: cfg.color_model.tag().to_string(),
            gamma: gamma_label(cfg.gamma),
            distortion_k1: cfg.distortion_k1,
            baseline_bytes: sizes.baseline_total,
            variant_bytes: sizes.variant_total,
            reduction: sizes.reduction,
            map50,
            fps,
        }
    }

    fn cells(&self) -> Vec<String> {
        vec![
            self.config_id.clone(),
            self.quant_bits.to_string(),
            self.jpeg_quality.map_or_else(|| "lossless".into(), |q| q.to_string()),
            self.max_side.map_or_else(|| "full".into(), |s| s.to_string()),
            self.scale_factor.map_or_else(|| "1".into(), |f| f.to_string()),
            self.color_model.clone(),
            self.gamma.clone(),
            self.distortion_k1.to_string(),
            self.baseline_bytes.to_string(),
            self.variant_bytes.to_string(),
            format!("{:.6}", self.reduction),
            self.map50.map_or_else(String::new, |m| format!("{m:.6}")),
            self.fps.map_or_else(String::new, |f| format!("{f:.3}")),
        ]
    }
}

/// Output shapes for [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Csv,
    Markdown,
    Svg,
}

impl ReportKind {
    pub fn parse(name: &str) -> Result<ReportKind> {
        match name {
            "csv" => Ok(ReportKind::Csv),
            "markdown" | "md" => Ok(ReportKind::Markdown),
            "svg" => Ok(ReportKind::Svg),
            other => Err(Error::Schema(format!("unknown report kind '{other}' (csv, markdown, svg)"))),
        }
    }
}

/// Renders rows as CSV text: a version comment, the fixed header, one line
/// per row. Bit-stable for identical inputs.
pub fn render_csv(rows: &[ReportRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let mut out = format!("# {REPORT_VERSION}\n{CSV_HEADER}\n");
    for row in rows {
        out.push_str(&row.cells().join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Parses CSV text produced by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, version) = lines
        .next()
        .ok_or_else(|| Error::Schema("empty report file".into()))?;
    if version.trim() != format!("# {REPORT_VERSION}") {
        return Err(Error::Schema(format!("unsupported report version line '{version}'")));
    }
    let (_, header) = lines.next().ok_or_else(|| Error::Schema("missing CSV header".into()))?;
    if header.trim() != CSV_HEADER {
        return Err(Error::Schema("CSV header does not match this report version".into()));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let want = CSV_HEADER.split(',').count();
        if cells.len() != want {
            return Err(Error::Schema(format!(
                "line {}: expected {want} columns, got {}",
                idx + 1,
                cells.len()
            )));
        }
        let field = |i: usize| cells[i].trim();
        let bad = |name: &str| Error::Schema(format!("line {}: bad {name} value", idx + 1));
        rows.push(ReportRow {
            config_id: field(0).to_string(),
            quant_bits: field(1).parse().map_err(|_| bad("quant_bits"))?,
            jpeg_quality: match field(2) {
                "lossless" => None,
                v => Some(v.parse().map_err(|_| bad("jpeg_quality"))?),
            },
            max_side: match field(3) {
                "full" => None,
                v => Some(v.parse().map_err(|_| bad("max_side"))?),
            },
            scale_factor: match field(4) {
                "1" => None,
                v => Some(v.parse().map_err(|_| bad("scale_factor"))?),
            },
            color_model: field(5).to_string(),
            gamma: field(6).to_string(),
            distortion_k1: field(7).parse().map_err(|_| bad("distortion_k1"))?,
            baseline_bytes: field(8).parse().map_err(|_| bad("baseline_bytes"))?,
            variant_bytes: field(9).parse().map_err(|_| bad("variant_bytes"))?,
            reduction: field(10).parse().map_err(|_| bad("reduction"))?,
            map50: match field(11) {
                "" => None,
                v => Some(v.parse().map_err(|_| bad("map50"))?),
            },
            fps: match field(12) {
                "" => None,
                v => Some(v.parse().map_err(|_| bad("fps"))?),
            },
        });
    }
    Ok(rows)
}

/// Renders rows as a GitHub-style Markdown table.
pub fn render_markdown(rows: &[ReportRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    let headers: Vec<&str> = CSV_HEADER.split(',').collect();
    let mut out = format!("| {} |\n", headers.join(" | "));
    out.push_str(&format!("|{}\n", " --- |".repeat(headers.len())));
    for row in rows {
        let cells: Vec<String> =
            row.cells().into_iter().map(|c| if c.is_empty() { "—".into() } else { c }).collect();
        out.push_str(&format!("| {} |\n", cells.join(" | ")));
    }
    Ok(out)
}

/// Horizontal axis choices for the scatter plot; the vertical axis is always
/// mAP@0.5.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatterX {
    VariantBytes,
    Fps,
}

impl ScatterX {
    fn label(self) -> &'static str {
        match self {
            ScatterX::VariantBytes => "variant corpus bytes",
            ScatterX::Fps => "end-to-end fps",
        }
    }

    fn value(self, row: &ReportRow) -> Option<f64> {
        match self {
            ScatterX::VariantBytes => Some(row.variant_bytes as f64),
            ScatterX::Fps => row.fps,
        }
    }
}

/// Renders a static scatter plot (one `<circle>` per row that has both
/// coordinates) with axis labels; no scripts, no external assets.
pub fn render_svg(rows: &[ReportRow], x_axis: ScatterX) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyReport);
    }
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 56.0; // margin for axis labels

    let points: Vec<(f64, f64, &str)> = rows
        .iter()
        .filter_map(|r| match (x_axis.value(r), r.map50) {
            (Some(x), Some(y)) => Some((x, y, r.config_id.as_str())),
            _ => None,
        })
        .collect();

    let (mut x_min, mut x_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _, _)| (lo.min(x), hi.max(x)));
    let (mut y_min, mut y_max) = (0.0f64, 1.0f64); // mAP range is known
    if points.is_empty() {
        (x_min, x_max) = (0.0, 1.0);
    }
    if x_min == x_max {
        x_min -= 1.0;
        x_max += 1.0;
    }
    // 5% padding so edge points are not clipped.
    let pad = (x_max - x_min) * 0.05;
    x_min -= pad;
    x_max += pad;
    y_min -= 0.05;
    y_max += 0.05;

    let sx = |x: f64| M + (x - x_min) / (x_max - x_min) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y_min) / (y_max - y_min) * (H - 2.0 * M);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {W} {H}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    ));
    // Axes.
    svg.push_str(&format!(
        "  <line x1=\"{M}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        H - M,
        W - M,
        H - M
    ));
    svg.push_str(&format!(
        "  <line x1=\"{M}\" y1=\"{M}\" x2=\"{M}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
        H - M
    ));
    // Axis labels and end-point ticks.
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        H - 12.0,
        x_axis.label()
    ));
    svg.push_str(&format!(
        "  <text x=\"14\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.2})\">mAP@0.5</text>\n",
        H / 2.0,
        H / 2.0
    ));
    for (value, keep) in [(x_min + pad, true), (x_max - pad, points.len() > 1)] {
        if keep {
            svg.push_str(&format!(
                "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{:.0}</text>\n",
                sx(value),
                H - M + 18.0,
                value
            ));
        }
    }
    for value in [0.0f64, 0.5, 1.0] {
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{value:.1}</text>\n",
            M - 6.0,
            sy(value) + 4.0
        ));
    }
    if points.is_empty() {
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" fill=\"#666\">no rows carry both coordinates</text>\n",
            W / 2.0,
            H / 2.0
        ));
    }
    for (x, y, id) in &points {
        svg.push_str(&format!(
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"steelblue\" fill-opacity=\"0.8\"><title>{id}</title></circle>\n",
            sx(*x),
            sy(*y)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes rows to `path` in the requested shape (SVG plots mAP against
/// variant bytes; use [`render_svg`] directly for other axes).
pub fn emit_report(rows: &[ReportRow], kind: ReportKind, path: &Path) -> Result<()> {
    let text = match kind {
        ReportKind::Csv => render_csv(rows)?,
        ReportKind::Markdown => render_markdown(rows)?,
        ReportKind::Svg => render_svg(rows, ScatterX::VariantBytes)?,
    };
    std::fs::write(path, text).map_err(Error::io_at(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_row(id: &str, bytes: u64, map: Option<f64>) -> ReportRow {
        ReportRow {
            config_id: id.into(),
            quant_bits: 8,
            jpeg_quality: None,
            max_side: None,
            scale_factor: None,
            color_model: "rgb".into(),
            gamma: "none".into(),
            distortion_k1: 0.0,
            baseline_bytes: 1000,
            variant_bytes: bytes,
            reduction: 1.0 - bytes as f64 / 1000.0,
            map50: map,
            fps: None,
        }
    }

    #[test]
    fn single_row_csv_has_version_header_and_one_line() {
        let csv = render_csv(&[sample_row("a", 500, Some(0.5))]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "# pipeval-report v1");
        assert_eq!(lines[1], CSV_HEADER);
        assert!(lines[2].starts_with("a,8,lossless,full,1,rgb,none,0,1000,500,0.500000,0.500000,"));
    }

    #[test]
    fn empty_rows_are_rejected_everywhere() {
        assert!(matches!(render_csv(&[]), Err(Error::EmptyReport)));
        assert!(matches!(render_markdown(&[]), Err(Error::EmptyReport)));
        assert!(matches!(render_svg(&[], ScatterX::VariantBytes), Err(Error::EmptyReport)));
    }

    #[test]
    fn missing_map_is_an_empty_cell_not_zero() {
        let csv = render_csv(&[sample_row("a", 500, None)]).unwrap();
        let data_line = csv.lines().nth(2).unwrap();
        assert!(data_line.ends_with(",0.500000,,"), "line: {data_line}");
    }

    #[test]
    fn csv_round_trips_through_parse() {
        let rows = vec![
            sample_row("a", 500, Some(0.25)),
            sample_row("b", 250, None),
            ReportRow {
                config_id: "q4_j90_s512x0.5_gray_g2.5_k-0.2".into(),
                quant_bits: 4,
                jpeg_quality: Some(90),
                max_side: Some(512),
                scale_factor: Some(0.5),
                color_model: "gray".into(),
                gamma: "2.5".into(),
                distortion_k1: -0.2,
                baseline_bytes: 9999,
                variant_bytes: 123,
                reduction: 0.987699,
                map50: Some(0.333333),
                fps: Some(41.5),
            },
        ];
        let parsed = parse_csv(&render_csv(&rows).unwrap()).unwrap();
        assert_eq!(parsed.len(), 3);
        assert_eq!(parsed[0].config_id, "a");
        assert_eq!(parsed[2].jpeg_quality, Some(90));
        assert_eq!(parsed[2].scale_factor, Some(0.5));
        assert_eq!(parsed[1].map50, None);
        assert_eq!(parsed[2].fps, Some(41.5));
    }

    #[test]
    fn wrong_version_or_header_is_rejected() {
        assert!(parse_csv("# other v9\nx\n").is_err());
        assert!(parse_csv("# pipeval-report v1\nconfig_id,nope\n").is_err());
    }

    #[test]
    fn svg_has_one_circle_per_complete_row() {
        let rows = vec![
            sample_row("a", 500, Some(0.5)),
            sample_row("b", 400, Some(0.6)),
            sample_row("c", 300, Some(0.7)),
        ];
        let svg = render_svg(&rows, ScatterX::VariantBytes).unwrap();
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg.contains("mAP@0.5"));
        // Rows lacking mAP are skipped, not plotted at zero.
        let partial = render_svg(&[sample_row("a", 500, None)], ScatterX::VariantBytes).unwrap();
        assert_eq!(partial.matches("<circle").count(), 0);
    }

    #[test]
    fn markdown_table_shape() {
        let md = render_markdown(&[sample_row("a", 500, None)]).unwrap();
        let lines: Vec<&str> = md.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("| config_id |"));
        assert!(lines[1].contains("---"));
        assert!(lines[2].contains("| — |"), "empty optional renders as em dash: {}", lines[2]);
    }

    #[test]
    fn identical_rows_render_identical_csv() {
        let rows = vec![sample_row("a", 500, Some(0.123456))];
        assert_eq!(render_csv(&rows).unwrap(), render_csv(&rows.clone()).unwrap());
    }
}
