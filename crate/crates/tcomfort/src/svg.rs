//! Minimal SVG plots. Every plotted number is also written verbatim into
//! a `data-value` attribute so a plot can be checked against its table.

use std::fmt::Write as _;

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One line of a line plot. The y values are written with the same
/// formatting the tables use.
#[derive(Debug, Clone)]
pub struct Line<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

fn bounds(lines: &[Line]) -> ((f64, f64), (f64, f64)) {
    let pts = lines.iter().flat_map(|l| l.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x0 < x1) {
        (x0, x1) = (x0 - 1.0, x0 + 1.0);
    }
    if !(y0 < y1) {
        (y0, y1) = (y0 - 1.0, y0 + 1.0);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = 0.05 * (y1 - y0);
    ((x0, x1), (y0 - pad, y1 + pad))
}

fn header(s: &mut String, title: &str) {
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title)).unwrap();
}

/// Line plot with axes, ticks and a legend.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, lines: &[Line]) -> String {
    let ((x0, x1), (y0, y1)) = bounds(lines);
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);
    let mut s = String::new();
    header(&mut s, title);
    writeln!(s, r#"<g stroke="black" fill="none"><polyline points="{LEFT},{TOP} {LEFT},{} {},{}"/></g>"#, H - BOTTOM, W - RIGHT, H - BOTTOM).unwrap();
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{:.4}</text>"#, px(xv), H - BOTTOM + 16.0, xv).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{:.2}</text>"#, LEFT - 6.0, py(yv) + 4.0, yv).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (LEFT + W - RIGHT) / 2.0, H - 12.0, escape(x_label)).unwrap();
    writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#, H / 2.0, H / 2.0, escape(y_label)).unwrap();
    for (i, line) in lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let dash = if line.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let pts: Vec<String> = line.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        writeln!(s, r#"<g data-series="{}">"#, escape(line.label)).unwrap();
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.2"{dash} points="{}"/>"#, pts.join(" ")).unwrap();
        for &(x, y) in &line.points {
            writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="0.8" fill="{color}" data-x="{x}" data-value="{y}"/>"#, px(x), py(y)).unwrap();
        }
        writeln!(s, "</g>").unwrap();
        let ly = TOP + 4.0 + 16.0 * i as f64;
        writeln!(s, r#"<rect x="{}" y="{ly}" width="12" height="3" fill="{color}"/>"#, W - RIGHT - 180.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, W - RIGHT - 162.0, ly + 5.0, escape(line.label)).unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Heat grid of a confusion matrix; rows are true classes.
pub fn confusion_grid(title: &str, labels: &[String], rows: &[Vec<u64>]) -> String {
    let n = labels.len().max(1);
    let cell = ((W - 200.0).min(H - 120.0) / n as f64).floor();
    let (ox, oy) = (150.0, 60.0);
    let max = rows.iter().flatten().copied().max().unwrap_or(0).max(1);
    let mut s = String::new();
    header(&mut s, title);
    for (i, row) in rows.iter().enumerate() {
        writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#, ox - 6.0, oy + (i as f64 + 0.5) * cell + 4.0, escape(&labels[i])).unwrap();
        for (j, &v) in row.iter().enumerate() {
            // white (0) to dark blue (max)
            let t = v as f64 / max as f64;
            let shade = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
            let fill = format!("#{:02x}{:02x}{:02x}", shade(255.0, 8.0), shade(255.0, 48.0), shade(255.0, 107.0));
            let (x, y) = (ox + j as f64 * cell, oy + i as f64 * cell);
            writeln!(s, r#"<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{fill}" stroke="black" data-row="{i}" data-col="{j}" data-value="{v}"/>"#).unwrap();
            let ink = if t > 0.5 { "white" } else { "black" };
            writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{v}</text>"#, x + cell / 2.0, y + cell / 2.0 + 4.0).unwrap();
        }
    }
    for (j, l) in labels.iter().enumerate() {
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, ox + (j as f64 + 0.5) * cell, oy + n as f64 * cell + 16.0, escape(l)).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">predicted</text>"#, ox + n as f64 * cell / 2.0, oy + n as f64 * cell + 36.0).unwrap();
    s.push_str("</svg>\n");
    s
}

/// Every `data-value` attribute in document order.
pub fn data_values(svg: &str) -> Vec<&str> {
    svg.split(r#"data-value=""#).skip(1).filter_map(|rest| rest.split('"').next()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_are_written_verbatim() {
        let line = Line { label: "nose <raw>", points: vec![(0.0, 33.125), (1.0, 0.1 + 0.2)], dashed: false };
        let svg = line_plot("t", "x", "y", &[line]);
        assert_eq!(data_values(&svg), ["33.125", &(0.1f64 + 0.2).to_string()]);
        assert!(svg.contains("nose &lt;raw&gt;"));
        let grid = confusion_grid("c", &["A".into(), "B".into()], &[vec![3, 1], vec![0, 7]]);
        assert_eq!(data_values(&grid), ["3", "1", "0", "7"]);
    }

    #[test]
    fn degenerate_ranges_still_render() {
        let svg = line_plot("t", "x", "y", &[Line { label: "c", points: vec![(5.0, 1.0)], dashed: true }]);
        assert!(!svg.contains("NaN"));
        assert!(line_plot("t", "x", "y", &[]).ends_with("</svg>\n"));
    }
}
