//! Static SVG rendering: learning curves and room replays.

use std::fmt::Write as _;

use super::results::ResultsTable;
use super::trajectory::TrajectoryRow;
use super::ExperimentError;
use crate::env::Room;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub const PANEL_WIDTH: f64 = 480.0;
pub const FIGURE_HEIGHT: f64 = 400.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 40.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 80.0;

/// Affine map from data coordinates to pixels (y grows downwards).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisMap {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// Pixel span of the x axis, left to right.
    pub px: (f64, f64),
    /// Pixel span of the y axis, bottom to top.
    pub py: (f64, f64),
}

impl AxisMap {
    pub fn x(&self, v: f64) -> f64 {
        let (a, b) = self.x_range;
        self.px.0 + (v - a) / (b - a) * (self.px.1 - self.px.0)
    }

    pub fn y(&self, v: f64) -> f64 {
        let (a, b) = self.y_range;
        self.py.0 + (v - a) / (b - a) * (self.py.1 - self.py.0)
    }
}

/// Data range padded by 5 %, widened to unit half-width when degenerate.
pub fn fit_range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.into_iter().filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (-1.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 1.0, hi + 1.0);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

/// Axis map for panel `index` (0 = safety, 1 = learning) of a results figure.
pub fn panel_axes(table: &ResultsTable, index: usize) -> AxisMap {
    let (e0, e1) = table
        .rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r.epoch as f64), b.max(r.epoch as f64)));
    let x_range = if e1 > e0 { (e0, e1) } else { (e0 - 0.5, e0 + 0.5) };
    let y_range = fit_range(
        table
            .rows
            .iter()
            .flat_map(|r| [r.safety_mean, r.learning_mean]),
    );
    let left = index as f64 * PANEL_WIDTH + MARGIN_LEFT;
    AxisMap {
        x_range,
        y_range,
        px: (left, index as f64 * PANEL_WIDTH + PANEL_WIDTH - MARGIN_RIGHT),
        py: (FIGURE_HEIGHT - MARGIN_BOTTOM, MARGIN_TOP),
    }
}

fn fmt_points(points: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for (i, (x, y)) in points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        write!(s, "{x:.3},{y:.3}").unwrap();
    }
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Two panels, safety and learning return against epoch, one line per
/// algorithm with a one-standard-deviation band.
pub fn render_results_svg(table: &ResultsTable, title: &str) -> Result<String, ExperimentError> {
    if table.is_empty() {
        return Err(ExperimentError::EmptyTable);
    }
    let width = 2.0 * PANEL_WIDTH;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{FIGURE_HEIGHT}" viewBox="0 0 {width} {FIGURE_HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(svg, r#"<text x="{}" y="16" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, escape(title)).unwrap();
    let algorithms = table.algorithms();

    for (index, name) in ["Safety Performance", "Learning Performance"].iter().enumerate() {
        let ax = panel_axes(table, index);
        let (l, r) = ax.px;
        let (b, t) = ax.py;
        writeln!(svg, r#"<g class="panel" data-panel="{index}">"#).unwrap();
        writeln!(svg, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{name}</text>"#, (l + r) / 2.0, t - 8.0).unwrap();
        writeln!(svg, r##"<rect x="{l:.3}" y="{t:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#444"/>"##, r - l, b - t).unwrap();

        let (y0, y1) = ax.y_range;
        for k in 0..=4 {
            let v = y0 + (y1 - y0) * k as f64 / 4.0;
            let py = ax.y(v);
            writeln!(svg, r##"<line x1="{l:.3}" y1="{py:.3}" x2="{r:.3}" y2="{py:.3}" stroke="#ddd"/>"##).unwrap();
            writeln!(svg, r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{v:.2}</text>"#, l - 4.0, py + 4.0).unwrap();
        }
        let (x0, x1) = ax.x_range;
        let span = (x1 - x0).max(1.0);
        let step = (span / 10.0).ceil().max(1.0);
        let mut e = x0.ceil();
        while e <= x1 {
            let px = ax.x(e);
            writeln!(svg, r#"<text x="{px:.3}" y="{:.3}" text-anchor="middle">{e}</text>"#, b + 16.0).unwrap();
            e += step;
        }
        writeln!(svg, r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">DAgger epoch</text>"#, (l + r) / 2.0, b + 34.0).unwrap();

        for (k, alg) in algorithms.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let rows: Vec<_> = table.rows_for(alg).collect();
            let (means, stds): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .map(|r| if index == 0 { (r.safety_mean, r.safety_std) } else { (r.learning_mean, r.learning_std) })
                .unzip();
            let clamp_y = |v: f64| ax.y(v.clamp(y0, y1));
            let mut band: Vec<(f64, f64)> = rows
                .iter()
                .zip(means.iter().zip(&stds))
                .map(|(r, (m, s))| (ax.x(r.epoch as f64), clamp_y(m + s)))
                .collect();
            band.extend(
                rows.iter()
                    .zip(means.iter().zip(&stds))
                    .rev()
                    .map(|(r, (m, s))| (ax.x(r.epoch as f64), clamp_y(m - s))),
            );
            writeln!(svg, r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#, fmt_points(&band)).unwrap();
            let line: Vec<(f64, f64)> = rows
                .iter()
                .zip(&means)
                .map(|(r, m)| (ax.x(r.epoch as f64), ax.y(*m)))
                .collect();
            writeln!(
                svg,
                r#"<polyline data-algorithm="{}" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                escape(alg),
                fmt_points(&line)
            )
            .unwrap();
        }
        writeln!(svg, "</g>").unwrap();
    }

    for (k, alg) in algorithms.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let x = MARGIN_LEFT + (k % 4) as f64 * 220.0;
        let y = FIGURE_HEIGHT - 24.0 + (k / 4) as f64 * 16.0;
        writeln!(svg, r#"<line x1="{x}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="3"/>"#, y - 4.0, x + 20.0, y - 4.0).unwrap();
        writeln!(svg, r#"<text x="{}" y="{y}">{}</text>"#, x + 26.0, escape(alg)).unwrap();
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

const ROOM_SCALE: f64 = 5.0;
const ROOM_MARGIN: f64 = 20.0;

/// Top-down view of the room with the driven path, coloured by actor.
pub fn render_trajectory_svg(room: &Room, rows: &[TrajectoryRow]) -> Result<String, ExperimentError> {
    if rows.is_empty() {
        return Err(ExperimentError::EmptyTable);
    }
    let side = room.size * ROOM_SCALE + 2.0 * ROOM_MARGIN;
    let px = |x: f64| ROOM_MARGIN + x * ROOM_SCALE;
    let py = |y: f64| ROOM_MARGIN + (room.size - y) * ROOM_SCALE;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{side}" height="{side}" viewBox="0 0 {side} {side}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for &((ax, ay), (bx, by)) in room.walls() {
        writeln!(
            svg,
            r##"<line class="wall" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#222" stroke-width="3"/>"##,
            px(ax),
            py(ay),
            px(bx),
            py(by)
        )
        .unwrap();
    }

    let color = |actor: &str| match actor {
        "expert" => "#1f77b4",
        "novice" => "#d62728",
        _ => "#888",
    };
    let mut start = 0;
    while start + 1 < rows.len() {
        let actor = rows[start].actor.as_str();
        let mut end = start + 1;
        while end + 1 < rows.len() && rows[end].actor == actor {
            end += 1;
        }
        let pts: Vec<(f64, f64)> = rows[start..=end].iter().map(|r| (px(r.x), py(r.y))).collect();
        writeln!(
            svg,
            r#"<polyline class="{actor}" points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            fmt_points(&pts),
            color(actor)
        )
        .unwrap();
        start = end;
    }
    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    writeln!(svg, r##"<circle cx="{:.3}" cy="{:.3}" r="4" fill="#2ca02c"/>"##, px(first.x), py(first.y)).unwrap();
    writeln!(svg, r##"<circle cx="{:.3}" cy="{:.3}" r="4" fill="none" stroke="#000"/>"##, px(last.x), py(last.y)).unwrap();
    let total: f64 = rows.iter().map(|r| r.reward).sum();
    writeln!(
        svg,
        r#"<text x="{ROOM_MARGIN}" y="14">steps {} return {total}</text>"#,
        rows.len() - 1
    )
    .unwrap();
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::super::results::ResultRow;
    use super::*;

    fn row(alg: &str, epoch: u32, s: f64, l: f64) -> ResultRow {
        ResultRow {
            algorithm: alg.into(),
            epoch,
            safety_mean: s,
            safety_std: 0.1,
            learning_mean: l,
            learning_std: 0.2,
            expert_action_fraction: 0.5,
        }
    }

    fn polyline_points(svg: &str) -> Vec<Vec<(f64, f64)>> {
        svg.lines()
            .filter(|l| l.starts_with("<polyline"))
            .map(|l| {
                let start = l.find("points=\"").unwrap() + 8;
                let end = start + l[start..].find('"').unwrap();
                l[start..end]
                    .split(' ')
                    .map(|p| {
                        let (x, y) = p.split_once(',').unwrap();
                        (x.parse().unwrap(), y.parse().unwrap())
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn one_polyline_per_panel_with_k_points() {
        let table = ResultsTable {
            rows: (0..10).map(|e| row("A", e, 1.0, e as f64 / 10.0)).collect(),
        };
        let svg = render_results_svg(&table, "t").unwrap();
        let lines = polyline_points(&svg);
        assert_eq!(lines.len(), 2);
        assert!(lines.iter().all(|l| l.len() == 10));
    }

    #[test]
    fn constant_series_is_horizontal() {
        let table = ResultsTable {
            rows: (0..5).map(|e| row("A", e, 0.25, 0.25)).collect(),
        };
        let svg = render_results_svg(&table, "t").unwrap();
        for line in polyline_points(&svg) {
            assert!(line.iter().all(|p| p.1 == line[0].1));
        }
    }

    #[test]
    fn coordinates_follow_the_affine_map() {
        // Epochs 0..=4, means spanning [-1, 1]: range padded to [-1.1, 1.1].
        let table = ResultsTable {
            rows: vec![row("A", 0, -1.0, 0.0), row("A", 2, 0.5, 0.5), row("A", 4, 1.0, -0.5)],
        };
        let svg = render_results_svg(&table, "t").unwrap();
        let lines = polyline_points(&svg);
        let expect = |panel: usize, epoch: f64, v: f64| {
            let left = panel as f64 * 480.0 + 60.0;
            let right = panel as f64 * 480.0 + 440.0;
            let x = left + epoch / 4.0 * (right - left);
            let y = 320.0 + (v + 1.1) / 2.2 * (40.0 - 320.0);
            (x, y)
        };
        let safety = [(0.0, -1.0), (2.0, 0.5), (4.0, 1.0)];
        let learning = [(0.0, 0.0), (2.0, 0.5), (4.0, -0.5)];
        for (panel, data) in [(0, safety), (1, learning)] {
            for (got, (e, v)) in lines[panel].iter().zip(data) {
                let want = expect(panel, e, v);
                assert!((got.0 - want.0).abs() < 1e-3 && (got.1 - want.1).abs() < 1e-3, "{got:?} vs {want:?}");
            }
        }
    }

    #[test]
    fn empty_table_is_an_error() {
        assert!(matches!(
            render_results_svg(&ResultsTable::default(), "t"),
            Err(ExperimentError::EmptyTable)
        ));
    }

    #[test]
    fn replay_draws_walls_and_actor_runs() {
        let room = Room::new(100.0, 20.0, 100.0, 100);
        let mk = |x: f64, actor: &str| TrajectoryRow {
            t: 0.0,
            x,
            y: 10.0,
            theta: 0.0,
            u: 0.0,
            actor: actor.into(),
            reward: 0.0,
        };
        let rows = vec![mk(10.0, "expert"), mk(11.0, "expert"), mk(12.0, "novice"), mk(13.0, "novice"), mk(14.0, "end")];
        let svg = render_trajectory_svg(&room, &rows).unwrap();
        assert_eq!(svg.matches("class=\"wall\"").count(), 5);
        assert_eq!(svg.matches("<polyline class=\"expert\"").count(), 1);
        assert_eq!(svg.matches("<polyline class=\"novice\"").count(), 1);
    }
}
