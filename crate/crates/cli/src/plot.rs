//! Minimal SVG previews of figure CSVs.

use std::fmt::Write as _;

use crate::figures::CORRELATION_COLUMNS;
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlotKind {
    Line,
    Heatmap,
}

/// Bad input to the plotter (wrong schema, unknown column).
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Schema {
    /// `p, N_…`
    Measures,
    /// `t, D`
    Distance,
    /// `p, t, D`
    DistancePerP,
    /// `t, p, neg, discord, classical`
    Correlations,
}

fn schema_of(columns: &[String]) -> Option<Schema> {
    let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
    match cols.as_slice() {
        ["t", "D"] => Some(Schema::Distance),
        ["p", "t", "D"] => Some(Schema::DistancePerP),
        c if *c == CORRELATION_COLUMNS => Some(Schema::Correlations),
        ["p", rest @ ..] if !rest.is_empty() && rest.iter().all(|c| ["N_blp", "N_rhp", "N_lfs"].contains(c)) => {
            Some(Schema::Measures)
        }
        _ => None,
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        Self { x: span(xs), y: span(ys) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }
}

fn span(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(out: &mut String, title: &str, f: &Frame, xlabel: &str, ylabel: &str) {
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#)
        .unwrap();
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(out, r#"<text x="{}" y="24" font-size="15" text-anchor="middle">{}</text>"#, W / 2.0, escape(title))
        .unwrap();
    let (x0, x1, y0, y1) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
    writeln!(out, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#).unwrap();
    for (v, anchor_x) in [(f.x.0, x0), (f.x.1, x1)] {
        writeln!(
            out,
            r#"<text x="{anchor_x}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
            y0 + 16.0,
            tick(v)
        )
        .unwrap();
    }
    for (v, anchor_y) in [(f.y.0, y0), (f.y.1, y1)] {
        writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="11" text-anchor="end">{}</text>"#,
            x0 - 4.0,
            anchor_y + 4.0,
            tick(v)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="13" text-anchor="middle">{}</text>"#,
        W / 2.0,
        H - 14.0,
        escape(xlabel)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="16" y="{}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    )
    .unwrap();
}

fn tick(v: f64) -> String {
    format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn col(table: &Table, name: &str) -> anyhow::Result<usize> {
    table.columns.iter().position(|c| c == name).ok_or_else(|| usage(format!("no column {name:?} in {}", table.name)))
}

/// Series `(label, points)` for a line plot.
fn line_series(
    table: &Table,
    schema: Schema,
    value: Option<&str>,
) -> anyhow::Result<(String, String, Vec<(String, Vec<(f64, f64)>)>)> {
    let by_p = |x: usize, y: usize| {
        let mut groups: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
        for r in &table.rows {
            let p = r[col(table, "p").expect("p column")];
            match groups.last_mut() {
                Some((q, pts)) if *q == p => pts.push((r[x], r[y])),
                _ => groups.push((p, vec![(r[x], r[y])])),
            }
        }
        groups.into_iter().map(|(p, pts)| (format!("p={}", tick(p)), pts)).collect::<Vec<_>>()
    };
    Ok(match schema {
        Schema::Measures | Schema::Distance => {
            let xs = &table.columns[0];
            let series = (1..table.columns.len())
                .filter(|&k| value.map_or(true, |v| table.columns[k] == v))
                .map(|k| (table.columns[k].clone(), table.rows.iter().map(|r| (r[0], r[k])).collect()))
                .collect::<Vec<_>>();
            if series.is_empty() {
                return Err(usage(format!("no column {:?} in {}", value.unwrap_or(""), table.name)));
            }
            (xs.clone(), if series.len() == 1 { series[0].0.clone() } else { String::new() }, series)
        }
        Schema::DistancePerP => {
            let y = col(table, value.unwrap_or("D"))?;
            ("t".into(), table.columns[y].clone(), by_p(col(table, "t")?, y))
        }
        Schema::Correlations => {
            let y = col(table, value.unwrap_or("neg"))?;
            if y < 2 {
                return Err(usage("value column must be one of neg, discord, classical"));
            }
            ("t".into(), table.columns[y].clone(), by_p(0, y))
        }
    })
}

fn render_line(table: &Table, schema: Schema, value: Option<&str>) -> anyhow::Result<String> {
    let (xlabel, ylabel, series) = line_series(table, schema, value)?;
    let all = || series.iter().flat_map(|(_, pts)| pts.iter().copied());
    let frame = Frame::new(all().map(|p| p.0), all().map(|p| p.1));
    let mut out = String::new();
    header(&mut out, &table.name, &frame, &xlabel, &ylabel);
    for (k, (label, pts)) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let d: Vec<String> = pts
            .iter()
            .filter(|p| p.1.is_finite())
            .enumerate()
            .map(|(i, &(x, y))| format!("{}{:.2} {:.2}", if i == 0 { 'M' } else { 'L' }, frame.px(x), frame.py(y)))
            .collect();
        writeln!(out, r#"<path d="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#, d.join(" ")).unwrap();
        let ly = MARGIN + 14.0 * k as f64;
        writeln!(
            out,
            r#"<text x="{}" y="{ly}" font-size="11" fill="{color}">{}</text>"#,
            W - MARGIN + 4.0,
            escape(label)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Piecewise-linear map of `[0, 1]` onto a dark-blue to yellow scale.
fn color(v: f64) -> String {
    const STOPS: [(f64, f64, f64); 4] =
        [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (253.0, 231.0, 37.0)];
    let x = v.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let k = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - k as f64;
    let lerp = |a: f64, b: f64| (a + (b - a) * f).round() as u8;
    let (a, b) = (STOPS[k], STOPS[k + 1]);
    format!("#{:02x}{:02x}{:02x}", lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2))
}

fn render_heatmap(table: &Table, schema: Schema, value: Option<&str>) -> anyhow::Result<String> {
    let v = match schema {
        Schema::Correlations => col(table, value.unwrap_or("neg"))?,
        Schema::DistancePerP => col(table, value.unwrap_or("D"))?,
        _ => return Err(usage(format!("{} has no (t, p) grid; heatmaps need t and p columns", table.name))),
    };
    let (ti, pi) = (col(table, "t")?, col(table, "p")?);
    if v == ti || v == pi {
        return Err(usage("value column must not be t or p"));
    }
    let distinct = |k: usize| {
        let mut xs: Vec<f64> = table.rows.iter().map(|r| r[k]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs
    };
    let (ts, ps) = (distinct(ti), distinct(pi));
    let frame = Frame::new(ts.iter().copied(), ps.iter().copied());
    let vr = span(table.rows.iter().map(|r| r[v]));
    let cell_w = (W - 2.0 * MARGIN) / ts.len().max(1) as f64;
    let cell_h = (H - 2.0 * MARGIN) / ps.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, &table.name, &frame, "t", "p");
    for r in &table.rows {
        let i = ts.partition_point(|&x| x < r[ti]);
        let j = ps.partition_point(|&x| x < r[pi]);
        let x = MARGIN + i as f64 * cell_w;
        let y = H - MARGIN - (j + 1) as f64 * cell_h;
        let c = color((r[v] - vr.0) / (vr.1 - vr.0));
        writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{c}"/>"#,
            cell_w + 0.05,
            cell_h + 0.05
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11">{}: {} to {}</text>"#,
        MARGIN,
        MARGIN - 8.0,
        escape(&table.columns[v]),
        tick(vr.0),
        tick(vr.1)
    )
    .unwrap();
    out.push_str("</svg>\n");
    Ok(out)
}

/// Renders a figure table. `value` picks the plotted column where several exist.
pub fn render(table: &Table, kind: PlotKind, value: Option<&str>) -> anyhow::Result<String> {
    let schema = schema_of(&table.columns)
        .ok_or_else(|| usage(format!("{}: unrecognized columns {:?}", table.name, table.columns)))?;
    if table.rows.is_empty() {
        return Err(usage(format!("{} has no rows", table.name)));
    }
    match kind {
        PlotKind::Line => render_line(table, schema, value),
        PlotKind::Heatmap => render_heatmap(table, schema, value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(cols: &[&str], rows: Vec<Vec<f64>>) -> Table {
        Table { name: "t".into(), columns: cols.iter().map(|s| s.to_string()).collect(), rows }
    }

    #[test]
    fn schemas_are_recognized() {
        let s = |c: &[&str]| schema_of(&c.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        assert_eq!(s(&["p", "N_blp", "N_rhp", "N_lfs"]), Some(Schema::Measures));
        assert_eq!(s(&["p", "N_blp"]), Some(Schema::Measures));
        assert_eq!(s(&["t", "D"]), Some(Schema::Distance));
        assert_eq!(s(&["p", "t", "D"]), Some(Schema::DistancePerP));
        assert_eq!(s(&CORRELATION_COLUMNS), Some(Schema::Correlations));
        assert_eq!(s(&["p"]), None);
        assert_eq!(s(&["x", "y"]), None);
    }

    #[test]
    fn line_plot_of_measures() {
        let t = table(&["p", "N_blp", "N_rhp"], vec![vec![0.0, 0.0, 0.0], vec![1.0, 0.1, 0.2]]);
        let svg = render(&t, PlotKind::Line, None).unwrap();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<path").count(), 3);
    }

    #[test]
    fn heatmap_of_correlations() {
        let rows = vec![
            vec![0.0, 0.0, 0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.5, 0.1, 0.1],
            vec![0.0, 1.0, 0.0, 0.0, 0.0],
            vec![1.0, 1.0, 1.0, 0.2, 0.2],
        ];
        let svg = render(&table(&CORRELATION_COLUMNS, rows), PlotKind::Heatmap, Some("discord")).unwrap();
        assert_eq!(svg.matches("<rect").count(), 5);
    }

    #[test]
    fn schema_mismatch_is_a_usage_error() {
        let err = render(&table(&["a", "b"], vec![vec![1.0, 2.0]]), PlotKind::Line, None).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
        let err = render(&table(&["t", "D"], vec![vec![1.0, 2.0]]), PlotKind::Heatmap, None).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
        let t = table(&CORRELATION_COLUMNS, vec![vec![0.0; 5]]);
        assert!(render(&t, PlotKind::Line, Some("p")).unwrap_err().downcast_ref::<UsageError>().is_some());
    }

    #[test]
    fn colors_span_the_scale() {
        assert_eq!(color(0.0), "#440154");
        assert_eq!(color(1.0), "#fde725");
        assert_eq!(color(-3.0), color(0.0));
    }
}
