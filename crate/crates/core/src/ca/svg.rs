//! Self-contained SVG rendering of the CA principal plane: sector (column)
//! points, city-year (row) points, and labelled year-to-year trajectory
//! arrows per city. Axes carry explained-inertia percentages.

use super::{CaResult, Trajectory};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

#[derive(Debug, Clone)]
pub struct SvgOptions {
    pub width: f64,
    pub height: f64,
    pub title: String,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            width: 900.0,
            height: 640.0,
            title: "Ownership specialisation map".to_string(),
        }
    }
}

struct Frame {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
    left: f64,
    top: f64,
    plot_w: f64,
    plot_h: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        self.left + (v - self.min_x) / (self.max_x - self.min_x) * self.plot_w
    }

    fn y(&self, v: f64) -> f64 {
        // SVG y grows downward.
        self.top + (self.max_y - v) / (self.max_y - self.min_y) * self.plot_h
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.2}")
}

/// Render the map. Row points belonging to a trajectory are drawn along its
/// arrows; remaining row points and all column points are drawn standalone.
pub fn trajectory_map(result: &CaResult, trajectories: &[Trajectory], opts: &SvgOptions) -> String {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..result.row_labels.len() {
        let (x, y) = result.row_point2(i);
        xs.push(x);
        ys.push(y);
    }
    for j in 0..result.col_labels.len() {
        let (x, y) = result.col_point2(j);
        xs.push(x);
        ys.push(y);
    }
    let (mut min_x, mut max_x) = extent(&xs);
    let (mut min_y, mut max_y) = extent(&ys);
    let pad_x = 0.1 * (max_x - min_x).max(1e-9);
    let pad_y = 0.1 * (max_y - min_y).max(1e-9);
    min_x -= pad_x;
    max_x += pad_x;
    min_y -= pad_y;
    max_y += pad_y;

    let left = 60.0;
    let top = 40.0;
    let frame = Frame {
        min_x,
        max_x,
        min_y,
        max_y,
        left,
        top,
        plot_w: opts.width - left - 30.0,
        plot_h: opts.height - top - 60.0,
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        opts.width, opts.height, opts.width, opts.height
    ));
    svg.push_str(
        "  <defs>\n    <marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" \
         markerWidth=\"7\" markerHeight=\"7\" orient=\"auto-start-reverse\">\n      \
         <path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"context-stroke\"/>\n    </marker>\n  </defs>\n",
    );
    svg.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        opts.width, opts.height
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        fmt(opts.width / 2.0),
        xml_text(&opts.title)
    ));

    // Plot border and zero axes.
    svg.push_str(&format!(
        "  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#cccccc\"/>\n",
        fmt(frame.left),
        fmt(frame.top),
        fmt(frame.plot_w),
        fmt(frame.plot_h)
    ));
    if min_x < 0.0 && max_x > 0.0 {
        let x0 = frame.x(0.0);
        svg.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n",
            fmt(x0),
            fmt(frame.top),
            fmt(x0),
            fmt(frame.top + frame.plot_h)
        ));
    }
    if min_y < 0.0 && max_y > 0.0 {
        let y0 = frame.y(0.0);
        svg.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#dddddd\"/>\n",
            fmt(frame.left),
            fmt(y0),
            fmt(frame.left + frame.plot_w),
            fmt(y0)
        ));
    }

    // Axis captions with explained-inertia percentages.
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">Dim 1 ({}%)</text>\n",
        fmt(frame.left + frame.plot_w / 2.0),
        fmt(opts.height - 18.0),
        fmt(result.explained_pct(0))
    ));
    svg.push_str(&format!(
        "  <text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">Dim 2 ({}%)</text>\n",
        fmt(frame.top + frame.plot_h / 2.0),
        fmt(frame.top + frame.plot_h / 2.0),
        fmt(result.explained_pct(1))
    ));

    // Column (sector) points.
    svg.push_str(
        "  <g class=\"columns\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#444444\">\n",
    );
    for (j, label) in result.col_labels.iter().enumerate() {
        let (x, y) = result.col_point2(j);
        let (px, py) = (frame.x(x), frame.y(y));
        svg.push_str(&format!(
            "    <rect class=\"col-point\" x=\"{}\" y=\"{}\" width=\"6\" height=\"6\" fill=\"#888888\"/>\n",
            fmt(px - 3.0),
            fmt(py - 3.0)
        ));
        svg.push_str(&format!(
            "    <text x=\"{}\" y=\"{}\">{}</text>\n",
            fmt(px + 5.0),
            fmt(py - 5.0),
            xml_text(label)
        ));
    }
    svg.push_str("  </g>\n");

    // Trajectories: arrows between consecutive years, year labels at each
    // point, city label at the final point.
    for (t_idx, traj) in trajectories.iter().enumerate() {
        let color = PALETTE[t_idx % PALETTE.len()];
        svg.push_str(&format!(
            "  <g class=\"trajectory\" data-city=\"{}\" stroke=\"{}\" fill=\"{}\" font-family=\"sans-serif\" font-size=\"11\">\n",
            xml_text(&traj.city),
            color,
            color
        ));
        for pair in traj.points.windows(2) {
            let (x1, y1) = (frame.x(pair[0].1), frame.y(pair[0].2));
            let (x2, y2) = (frame.x(pair[1].1), frame.y(pair[1].2));
            svg.push_str(&format!(
                "    <line class=\"step\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke-width=\"1.5\" marker-end=\"url(#arrow)\"/>\n",
                fmt(x1),
                fmt(y1),
                fmt(x2),
                fmt(y2)
            ));
        }
        for (year, x, y) in &traj.points {
            let (px, py) = (frame.x(*x), frame.y(*y));
            svg.push_str(&format!(
                "    <circle class=\"row-point\" cx=\"{}\" cy=\"{}\" r=\"3.5\"/>\n",
                fmt(px),
                fmt(py)
            ));
            svg.push_str(&format!(
                "    <text x=\"{}\" y=\"{}\" stroke=\"none\">{}</text>\n",
                fmt(px + 5.0),
                fmt(py + 11.0),
                year
            ));
        }
        if let Some((_, x, y)) = traj.points.last() {
            svg.push_str(&format!(
                "    <text x=\"{}\" y=\"{}\" stroke=\"none\" font-weight=\"bold\">{}</text>\n",
                fmt(frame.x(*x) + 5.0),
                fmt(frame.y(*y) - 6.0),
                xml_text(&traj.city)
            ));
        }
        svg.push_str("  </g>\n");
    }

    // Row points not covered by any trajectory.
    let covered: std::collections::BTreeSet<&str> =
        trajectories.iter().map(|t| t.city.as_str()).collect();
    svg.push_str(
        "  <g class=\"rows\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#222222\">\n",
    );
    for (i, label) in result.row_labels.iter().enumerate() {
        let city = super::parse_row_label(label).map(|(c, _)| c);
        if city.as_deref().is_some_and(|c| covered.contains(c)) {
            continue;
        }
        let (x, y) = result.row_point2(i);
        let (px, py) = (frame.x(x), frame.y(y));
        svg.push_str(&format!(
            "    <circle class=\"row-point\" cx=\"{}\" cy=\"{}\" r=\"3\"/>\n",
            fmt(px),
            fmt(py)
        ));
        svg.push_str(&format!(
            "    <text x=\"{}\" y=\"{}\">{}</text>\n",
            fmt(px + 5.0),
            fmt(py + 4.0),
            xml_text(label)
        ));
    }
    svg.push_str("  </g>\n</svg>\n");
    svg
}

fn extent(values: &[f64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if !min.is_finite() || !max.is_finite() {
        return (-1.0, 1.0);
    }
    if min == max {
        (min - 1.0, max + 1.0)
    } else {
        (min, max)
    }
}

fn xml_text(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ca::{correspondence_analysis, trajectories, ContingencyInput};
    use std::collections::BTreeSet;

    fn result_with_trajectories() -> (CaResult, Vec<Trajectory>) {
        let inp = ContingencyInput {
            row_labels: vec![
                "x@2010".into(),
                "x@2013".into(),
                "x@2016".into(),
                "y@2010".into(),
                "y@2013".into(),
                "y@2016".into(),
            ],
            col_labels: vec!["A".into(), "B".into(), "C".into()],
            matrix: vec![
                vec![9.0, 1.0, 2.0],
                vec![2.0, 8.0, 3.0],
                vec![1.0, 2.0, 9.0],
                vec![5.0, 5.0, 1.0],
                vec![1.0, 6.0, 6.0],
                vec![6.0, 1.0, 6.0],
            ],
        };
        let res = correspondence_analysis(&inp).unwrap();
        let cities: BTreeSet<String> = ["x", "y"].map(str::to_string).into_iter().collect();
        let (trajs, _) = trajectories(&res, &cities).unwrap();
        (res, trajs)
    }

    #[test]
    fn svg_is_self_contained_and_labels_trajectories() {
        let (res, trajs) = result_with_trajectories();
        let svg = trajectory_map(&res, &trajs, &SvgOptions::default());
        assert!(svg.starts_with("<svg xmlns="));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("class=\"trajectory\"").count(), 2);
        assert!(svg.contains("data-city=\"x\""));
        assert!(svg.contains("data-city=\"y\""));
        // Three year points means two arrows per city.
        assert_eq!(svg.matches("class=\"step\"").count(), 4);
        assert!(svg.contains("Dim 1 ("));
        assert!(svg.contains("Dim 2 ("));
        assert!(svg.contains(">2013<"));
    }

    #[test]
    fn svg_is_deterministic() {
        let (res, trajs) = result_with_trajectories();
        let a = trajectory_map(&res, &trajs, &SvgOptions::default());
        let b = trajectory_map(&res, &trajs, &SvgOptions::default());
        assert_eq!(a, b);
    }
}
