//! Small, dependency-free SVG line plots.
//!
//! One figure holds one or more panels laid out horizontally; each panel
//! has its own axes (linear or log-10), tick labels, and legend. Output is
//! deterministic: pure string assembly, no timestamps or randomness.

use std::fmt::Write as _;

/// Line colors cycled across the series of a panel.
pub const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

const PANEL_W: f64 = 430.0;
const PANEL_H: f64 = 360.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 18.0;
const MARGIN_T: f64 = 46.0;
const MARGIN_B: f64 = 52.0;

/// One labelled polyline.
#[derive(Debug, Clone)]
pub struct Series {
    /// Legend label.
    pub label: String,
    /// Data points in plot coordinates.
    pub points: Vec<(f64, f64)>,
}

/// One panel: axes plus a set of series.
#[derive(Debug, Clone)]
pub struct Panel {
    /// Panel title.
    pub title: String,
    /// Horizontal axis label.
    pub x_label: String,
    /// Vertical axis label.
    pub y_label: String,
    /// Log-10 horizontal axis (nonpositive abscissae are dropped).
    pub log_x: bool,
    /// Log-10 vertical axis (nonpositive ordinates are dropped).
    pub log_y: bool,
    /// Series to draw.
    pub series: Vec<Series>,
}

impl Panel {
    /// Linear-axes panel.
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    /// Switches an axis pair to log scale.
    pub fn with_log(mut self, log_x: bool, log_y: bool) -> Self {
        self.log_x = log_x;
        self.log_y = log_y;
        self
    }

    /// Adds one series.
    pub fn add_series(&mut self, label: &str, points: Vec<(f64, f64)>) {
        self.series.push(Series {
            label: label.to_string(),
            points,
        });
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Compact tick label: plain decimal for moderate magnitudes, scientific
/// otherwise.
fn tick_label(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    let a = x.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{x:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{x:.1e}")
    }
}

/// Transformed (maybe log-10) coordinate; `None` drops the point.
fn transform(v: f64, log: bool) -> Option<f64> {
    if !v.is_finite() {
        return None;
    }
    if log {
        if v <= 0.0 {
            return None;
        }
        Some(v.log10())
    } else {
        Some(v)
    }
}

struct Frame {
    t_min: f64,
    t_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn from_series(series: &[Vec<(f64, f64)>]) -> Self {
        let mut t_min = f64::INFINITY;
        let mut t_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for s in series {
            for &(t, y) in s {
                t_min = t_min.min(t);
                t_max = t_max.max(t);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
        if !t_min.is_finite() {
            t_min = 0.0;
            t_max = 1.0;
        }
        if !y_min.is_finite() {
            y_min = 0.0;
            y_max = 1.0;
        }
        if t_max - t_min < 1e-300 {
            t_min -= 0.5;
            t_max += 0.5;
        }
        if y_max - y_min < 1e-300 {
            y_min -= 0.5;
            y_max += 0.5;
        }
        // Small vertical breathing room.
        let pad = 0.04 * (y_max - y_min);
        Self {
            t_min,
            t_max,
            y_min: y_min - pad,
            y_max: y_max + pad,
        }
    }
}

/// Tick positions in transformed coordinates plus their labels.
fn ticks(min: f64, max: f64, log: bool) -> Vec<(f64, String)> {
    if log {
        let lo = min.ceil() as i64;
        let hi = max.floor() as i64;
        if hi >= lo && hi - lo >= 1 {
            let step = ((hi - lo) as usize / 6 + 1) as i64;
            return (lo..=hi)
                .step_by(step as usize)
                .map(|e| (e as f64, tick_label(10f64.powi(e as i32))))
                .collect();
        }
        // Narrow range: evenly spaced in log coordinates.
        return (0..=4)
            .map(|i| {
                let t = min + (max - min) * f64::from(i) / 4.0;
                (t, tick_label(10f64.powf(t)))
            })
            .collect();
    }
    (0..=4)
        .map(|i| {
            let t = min + (max - min) * f64::from(i) / 4.0;
            (t, tick_label(t))
        })
        .collect()
}

fn render_panel(svg: &mut String, panel: &Panel, x0: f64) {
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let left = x0 + MARGIN_L;
    let top = MARGIN_T;

    // Filter and transform every series first so the frame fits the data.
    let transformed: Vec<Vec<(f64, f64)>> = panel
        .series
        .iter()
        .map(|s| {
            s.points
                .iter()
                .filter_map(|&(x, y)| {
                    Some((transform(x, panel.log_x)?, transform(y, panel.log_y)?))
                })
                .collect()
        })
        .collect();
    let frame = Frame::from_series(&transformed);
    let px = |t: f64| left + (t - frame.t_min) / (frame.t_max - frame.t_min) * plot_w;
    let py = |y: f64| top + plot_h - (y - frame.y_min) / (frame.y_max - frame.y_min) * plot_h;

    let _ = write!(
        svg,
        r##"<rect x="{:.2}" y="{:.2}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="#444" stroke-width="1"/>"##,
        left, top
    );
    let _ = write!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle" font-weight="bold">{}</text>"#,
        left + plot_w / 2.0,
        top - 16.0,
        escape(&panel.title)
    );

    for (t, label) in ticks(frame.t_min, frame.t_max, panel.log_x) {
        let x = px(t);
        let _ = write!(
            svg,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#444" stroke-width="1"/>"##,
            top + plot_h,
            top + plot_h + 5.0
        );
        let _ = write!(
            svg,
            r#"<text x="{x:.2}" y="{:.2}" font-size="11" text-anchor="middle">{}</text>"#,
            top + plot_h + 18.0,
            escape(&label)
        );
    }
    for (t, label) in ticks(frame.y_min, frame.y_max, panel.log_y) {
        let y = py(t);
        let _ = write!(
            svg,
            r##"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#444" stroke-width="1"/>"##,
            left - 5.0,
            left
        );
        let _ = write!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{}</text>"#,
            left - 8.0,
            y + 4.0,
            escape(&label)
        );
    }

    let _ = write!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
        left + plot_w / 2.0,
        top + plot_h + 38.0,
        escape(&panel.x_label)
    );
    let _ = write!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        left - 46.0,
        top + plot_h / 2.0,
        left - 46.0,
        top + plot_h / 2.0,
        escape(&panel.y_label)
    );

    for (i, (series, points)) in panel.series.iter().zip(&transformed).enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if points.len() >= 2 {
            let mut path = String::new();
            for (k, &(t, y)) in points.iter().enumerate() {
                let _ = write!(
                    path,
                    "{}{:.2},{:.2}",
                    if k == 0 { "" } else { " " },
                    px(t),
                    py(y)
                );
            }
            let _ = write!(
                svg,
                r#"<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.6"/>"#
            );
        } else if points.len() == 1 {
            let _ = write!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                px(points[0].0),
                py(points[0].1)
            );
        }
        // Legend entry.
        let ly = top + 14.0 + 16.0 * i as f64;
        let _ = write!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            left + plot_w - 120.0,
            left + plot_w - 100.0
        );
        let _ = write!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="11">{}</text>"#,
            left + plot_w - 95.0,
            ly + 4.0,
            escape(&series.label)
        );
    }
}

/// Renders the panels side by side into one standalone SVG document.
pub fn render(title: &str, panels: &[Panel]) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let height = PANEL_H + 26.0;
    let mut svg = String::new();
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"#
    );
    svg.push_str(r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = write!(
        svg,
        r#"<text x="{:.2}" y="20" font-size="16" text-anchor="middle" font-weight="bold">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    let _ = write!(svg, r#"<g transform="translate(0 26)">"#);
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut svg, panel, PANEL_W * i as f64);
    }
    svg.push_str("</g></svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_multi_panel_document() {
        let mut p1 = Panel::new("growth", "j", "S_j");
        p1.add_series("a", vec![(0.0, 1.0), (1.0, 2.0), (2.0, 4.0)]);
        let mut p2 = Panel::new("decay", "theta", "psi").with_log(false, true);
        p2.add_series("b", vec![(0.1, 1.0), (0.2, 0.01), (0.3, 1e-7)]);
        let doc = render("scale diagnostics", &[p1, p2]);
        assert!(doc.starts_with("<svg"));
        assert!(doc.ends_with("</svg>\n"));
        assert!(doc.contains("polyline"));
        assert!(doc.contains("scale diagnostics"));
        assert!(doc.matches("<rect").count() >= 3);
    }

    #[test]
    fn log_axis_drops_nonpositive_points() {
        let mut p = Panel::new("t", "x", "y").with_log(false, true);
        p.add_series("s", vec![(0.0, -1.0), (1.0, 0.0), (2.0, f64::NAN)]);
        let doc = render("empty", &[p]);
        assert!(!doc.contains("polyline"));
        assert!(!doc.contains("NaN"));
    }

    #[test]
    fn deterministic_output() {
        let mut p = Panel::new("t", "x", "y");
        p.add_series("s", vec![(0.0, 0.5), (1.0, 0.25)]);
        let a = render("fig", &[p.clone()]);
        let b = render("fig", &[p]);
        assert_eq!(a, b);
    }

    #[test]
    fn tick_labels_compact() {
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(1.0), "1");
        assert_eq!(tick_label(0.25), "0.25");
        assert_eq!(tick_label(1.0e-7), "1.0e-7");
        assert_eq!(tick_label(123456.0), "1.2e5");
    }
}
