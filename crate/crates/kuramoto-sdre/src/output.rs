//! File emission for runs: trajectory CSV, summary JSON and minimal SVG
//! time-series plots.
//!
//! CSV numbers are printed with nine significant digits in scientific
//! notation, `.` as the decimal separator and `\n` line endings, so output
//! bytes are stable across platforms and suitable for golden-file
//! comparisons.

use crate::sim::TrajectoryRecord;
use std::io::{self, Write};
use std::path::Path;

/// Nine-significant-digit scientific form (`-1.23456789e-4`).
pub fn fmt_num(x: f64) -> String {
    format!("{x:.8e}")
}

/// CSV header for an N-oscillator trajectory:
/// `t,theta_1..theta_N,x_1..x_{N-1},e_1..e_{N-1},u_1..u_N,care_residual,fallback`.
pub fn csv_header(n: usize) -> String {
    let mut cols = Vec::with_capacity(3 * n + 2 * (n - 1));
    cols.push("t".to_string());
    cols.extend((1..=n).map(|i| format!("theta_{i}")));
    cols.extend((1..n).map(|i| format!("x_{i}")));
    cols.extend((1..n).map(|i| format!("e_{i}")));
    cols.extend((1..=n).map(|i| format!("u_{i}")));
    cols.push("care_residual".to_string());
    cols.push("fallback".to_string());
    cols.join(",")
}

pub fn write_trajectory_csv(
    path: &Path,
    n: usize,
    records: &[TrajectoryRecord],
) -> io::Result<()> {
    let mut out = io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "{}", csv_header(n))?;
    for r in records {
        let mut fields = Vec::with_capacity(3 * n + 2 * (n - 1) + 3);
        fields.push(fmt_num(r.t));
        fields.extend(r.theta.as_slice().iter().map(|&v| fmt_num(v)));
        fields.extend(r.x.as_slice().iter().map(|&v| fmt_num(v)));
        fields.extend(r.e.as_slice().iter().map(|&v| fmt_num(v)));
        fields.extend(r.u.as_slice().iter().map(|&v| fmt_num(v)));
        fields.push(fmt_num(r.care_residual));
        fields.push(if r.fallback_used { "1".into() } else { "0".into() });
        writeln!(out, "{}", fields.join(","))?;
    }
    out.flush()
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

/// Emit a static SVG line plot: one polyline per series over a shared time
/// axis, linear scales, min/max tick labels and a legend of series names.
pub fn write_series_svg(
    path: &Path,
    title: &str,
    t: &[f64],
    series: &[(String, Vec<f64>)],
) -> io::Result<()> {
    assert!(!t.is_empty() && !series.is_empty());
    let (t0, t1) = (t[0], *t.last().unwrap());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, ys) in series {
        for &y in ys {
            if y.is_finite() {
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        // Flat series: open up a visible band around the value.
        lo -= 0.5;
        hi += 0.5;
    }
    let span_t = (t1 - t0).max(1e-12);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - t0) / span_t * plot_w;
    let sy = |y: f64| MARGIN_TOP + (hi - y) / (hi - lo) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        title
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        r = WIDTH - MARGIN_RIGHT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM,
    ));
    // Zero line when the range straddles zero.
    if lo < 0.0 && hi > 0.0 {
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#cccccc\" stroke-dasharray=\"4 3\"/>\n",
            MARGIN_LEFT,
            WIDTH - MARGIN_RIGHT,
            y = sy(0.0)
        ));
    }
    // Tick labels: axis extremes.
    let label = |v: f64| format!("{v:.3}");
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
        label(hi),
        x = MARGIN_LEFT - 6.0,
        y = MARGIN_TOP + 4.0
    ));
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">{}</text>\n",
        label(lo),
        x = MARGIN_LEFT - 6.0,
        y = HEIGHT - MARGIN_BOTTOM + 4.0
    ));
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        label(t0),
        x = MARGIN_LEFT,
        y = HEIGHT - MARGIN_BOTTOM + 20.0
    ));
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        label(t1),
        x = WIDTH - MARGIN_RIGHT,
        y = HEIGHT - MARGIN_BOTTOM + 20.0
    ));
    svg.push_str(&format!(
        "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">t [s]</text>\n",
        x = MARGIN_LEFT + plot_w / 2.0,
        y = HEIGHT - 12.0
    ));

    for (idx, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let pts: Vec<String> = t
            .iter()
            .zip(ys)
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            pts.join(" ")
        ));
        // Legend entry.
        let lx = MARGIN_LEFT + 10.0 + 95.0 * (idx % 7) as f64;
        let ly = MARGIN_TOP + 8.0 + 16.0 * (idx / 7) as f64;
        svg.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
             <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{name}</text>\n",
            lx + 18.0,
            lx + 23.0,
            ly + 4.0
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg)
}

/// Pull one indexed component out of every record, as a plottable series.
pub fn component_series(
    records: &[TrajectoryRecord],
    label_prefix: &str,
    count: usize,
    extract: impl Fn(&TrajectoryRecord, usize) -> f64,
) -> Vec<(String, Vec<f64>)> {
    (0..count)
        .map(|i| {
            (
                format!("{label_prefix}_{}", i + 1),
                records.iter().map(|r| extract(r, i)).collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Vector;

    fn record(t: f64) -> TrajectoryRecord {
        TrajectoryRecord {
            t,
            theta: Vector::new(vec![0.1, 0.2]),
            x: Vector::new(vec![0.1]),
            e: Vector::new(vec![-0.05]),
            u: Vector::new(vec![1.0, 0.5]),
            care_residual: 1e-12,
            fallback_used: false,
        }
    }

    #[test]
    fn number_formatting_is_nine_significant_digits() {
        assert_eq!(fmt_num(1.0), "1.00000000e0");
        assert_eq!(fmt_num(-0.0123456789), "-1.23456789e-2");
        assert_eq!(fmt_num(0.0), "0.00000000e0");
    }

    #[test]
    fn header_column_count() {
        let n = 4;
        let header = csv_header(n);
        assert_eq!(header.split(',').count(), 1 + n + (n - 1) + (n - 1) + n + 2);
        assert!(header.starts_with("t,theta_1,"));
        assert!(header.ends_with("care_residual,fallback"));
    }

    #[test]
    fn csv_rows_match_header_width() {
        let dir = std::env::temp_dir().join("kuramoto_sdre_csv_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("traj.csv");
        write_trajectory_csv(&path, 2, &[record(0.0), record(0.01)]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        let width = lines[0].split(',').count();
        for line in &lines[1..] {
            assert_eq!(line.split(',').count(), width);
        }
        assert!(!text.contains('\r'), "line endings must be bare \\n");
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn svg_contains_polylines_and_legend() {
        let dir = std::env::temp_dir().join("kuramoto_sdre_svg_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("plot.svg");
        let t = vec![0.0, 0.5, 1.0];
        let series = vec![
            ("x_1".to_string(), vec![0.0, 0.4, 0.5]),
            ("x_2".to_string(), vec![1.0, 0.2, -0.5]),
        ];
        write_series_svg(&path, "test plot", &t, &series).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches("<polyline").count(), 2);
        assert!(text.contains("x_1") && text.contains("x_2"));
        std::fs::remove_dir_all(&dir).ok();
    }
}
