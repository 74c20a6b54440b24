//! Self-contained SVG charts of sweep results: mean final slot count versus
//! golden digit count, one line per exemplars-per-digit setting, with a
//! dashed y = x reference marking perfect slot-count recovery. Plots are
//! derived views; they never feed back into the CSV artifacts.

use std::collections::BTreeMap;

use mdlhn_core::experiments::SweepRow;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 56.0;

const SERIES_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Series {
    exemplars_per_digit: usize,
    /// (class_count, mean_slots) pairs, ordered by class count.
    points: Vec<(usize, f64)>,
}

fn collect_series(rows: &[&SweepRow]) -> Vec<Series> {
    let mut by_count: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for row in rows {
        if let Some(mean) = row.mean_slots {
            by_count
                .entry(row.condition.exemplars_per_digit)
                .or_default()
                .push((row.condition.class_count, mean));
        }
    }
    by_count
        .into_iter()
        .map(|(exemplars_per_digit, mut points)| {
            points.sort_by_key(|&(cc, _)| cc);
            Series {
                exemplars_per_digit,
                points,
            }
        })
        .collect()
}

struct Axes {
    x_max: f64,
    y_max: f64,
}

impl Axes {
    fn x(&self, class_count: f64) -> f64 {
        MARGIN_LEFT + class_count / self.x_max * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, slots: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - slots / self.y_max * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

/// Renders one chart. `title` names the condition slice (exemplar type,
/// noise level, regime); rows with no completed seeds are skipped.
pub fn render_slot_plot(rows: &[&SweepRow], title: &str) -> String {
    let series = collect_series(rows);
    let x_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|&(cc, _)| cc))
        .max()
        .unwrap_or(10)
        .max(1) as f64;
    let y_top = series
        .iter()
        .flat_map(|s| s.points.iter().map(|&(_, m)| m))
        .fold(x_max, f64::max);
    let axes = Axes {
        x_max,
        y_max: (y_top * 1.05).ceil().max(1.0),
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title)
    ));

    push_axes(&mut svg, &axes);
    push_reference_line(&mut svg, &axes);
    for (i, s) in series.iter().enumerate() {
        push_series(&mut svg, &axes, s, SERIES_COLORS[i % SERIES_COLORS.len()]);
    }
    push_legend(&mut svg, &series);

    svg.push_str("</svg>\n");
    svg
}

fn push_axes(svg: &mut String, axes: &Axes) {
    let x0 = axes.x(0.0);
    let y0 = axes.y(0.0);
    let x1 = axes.x(axes.x_max);
    let y1 = axes.y(axes.y_max);
    svg.push_str(&format!(
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n"
    ));
    for cc in 1..=axes.x_max as usize {
        let x = axes.x(cc as f64);
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{x}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{cc}</text>\n",
            y0 + 5.0,
            y0 + 20.0
        ));
    }
    let y_ticks = 5usize;
    for t in 0..=y_ticks {
        let v = axes.y_max * t as f64 / y_ticks as f64;
        let y = axes.y(v);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y}\" x2=\"{x0}\" y2=\"{y}\" stroke=\"black\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{v:.0}</text>\n",
            x0 - 5.0,
            x0 - 9.0,
            y + 4.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\">golden digit count</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 14.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-size=\"13\" text-anchor=\"middle\" \
         transform=\"rotate(-90 18 {})\">mean memory slots</text>\n",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    ));
}

fn push_reference_line(svg: &mut String, axes: &Axes) {
    let end = axes.x_max.min(axes.y_max);
    svg.push_str(&format!(
        "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"gray\" \
         stroke-dasharray=\"6 4\"/>\n",
        axes.x(0.0),
        axes.y(0.0),
        axes.x(end),
        axes.y(end)
    ));
}

fn push_series(svg: &mut String, axes: &Axes, series: &Series, color: &str) {
    if series.points.len() > 1 {
        let path: Vec<String> = series
            .points
            .iter()
            .map(|&(cc, m)| format!("{:.2},{:.2}", axes.x(cc as f64), axes.y(m)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>\n",
            path.join(" ")
        ));
    }
    for &(cc, m) in &series.points {
        svg.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3.5\" fill=\"{color}\"/>\n",
            axes.x(cc as f64),
            axes.y(m)
        ));
    }
}

fn push_legend(svg: &mut String, series: &[Series]) {
    let x = WIDTH - MARGIN_RIGHT + 16.0;
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN_TOP + 18.0 * i as f64 + 8.0;
        let color = SERIES_COLORS[i % SERIES_COLORS.len()];
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"12\">{} / digit</text>\n",
            x + 22.0,
            x + 28.0,
            y + 4.0,
            s.exemplars_per_digit
        ));
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use mdlhn_core::{Condition, ExemplarType, NoisePreset, Regime};

    fn row(cc: usize, epd: usize, mean: Option<f64>) -> SweepRow {
        SweepRow {
            condition: Condition {
                class_count: cc,
                exemplars_per_digit: epd,
                exemplar_type: ExemplarType::Discrete,
                noise: NoisePreset::Low,
                regime: Regime::Mdl,
                seeds: vec![0],
            },
            completed_seeds: usize::from(mean.is_some()),
            mean_slots: mean,
            sd_slots: mean.map(|_| 0.0),
            mean_l2_golden: mean.map(|_| 0.1),
            mean_total_bits: mean.map(|_| 100.0),
            failures: vec![],
        }
    }

    #[test]
    fn one_polyline_per_series_and_one_marker_per_point() {
        let rows = [
            row(1, 10, Some(1.0)),
            row(2, 10, Some(2.0)),
            row(3, 10, Some(3.0)),
            row(1, 30, Some(1.0)),
            row(2, 30, Some(2.2)),
        ];
        let refs: Vec<&SweepRow> = rows.iter().collect();
        let svg = render_slot_plot(&refs, "discrete low");
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 5);
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
        assert!(svg.contains("10 / digit") && svg.contains("30 / digit"));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn failed_rows_are_skipped_and_empty_input_still_renders() {
        let rows = [row(1, 10, Some(1.0)), row(2, 10, None)];
        let refs: Vec<&SweepRow> = rows.iter().collect();
        let svg = render_slot_plot(&refs, "partial");
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 0);

        let empty = render_slot_plot(&[], "empty");
        assert!(empty.contains("</svg>"));
        assert_eq!(empty.matches("<circle").count(), 0);
    }

    #[test]
    fn titles_are_xml_escaped() {
        let svg = render_slot_plot(&[], "a < b & c");
        assert!(svg.contains("a &lt; b &amp; c"));
    }

    #[test]
    fn identical_input_renders_identical_svg() {
        let rows = [row(1, 5, Some(1.0)), row(4, 5, Some(4.5))];
        let refs: Vec<&SweepRow> = rows.iter().collect();
        assert_eq!(render_slot_plot(&refs, "t"), render_slot_plot(&refs, "t"));
    }
}
