//! Static SVG line charts of result tables.
//!
//! Closed-form values are drawn as lines; measured slopes, when present, as
//! markers on top. The chart is rendered in memory so a failure never leaves a
//! partial file behind.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Result};
use plotters::prelude::*;

use crate::config::FigureKind;
use crate::results::ExperimentResultRow;

const SIZE: (u32, u32) = (860, 560);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Sum SDoF against `M / N`, one curve per scheme and alpha.
    AntennaRatio,
    /// Sum SDoF against the number of receivers, one curve per alpha.
    Users,
}

pub fn resolve_figure(kind: FigureKind, rows: &[ExperimentResultRow]) -> Figure {
    match kind {
        FigureKind::AntennaRatio => Figure::AntennaRatio,
        FigureKind::Users => Figure::Users,
        FigureKind::Auto if rows.iter().any(|r| r.users.is_some()) => Figure::Users,
        FigureKind::Auto => Figure::AntennaRatio,
    }
}

struct Series {
    label: String,
    dashed: bool,
    formula: Vec<(f64, f64)>,
    measured: Vec<(f64, f64)>,
}

fn group(rows: &[ExperimentResultRow], figure: Figure) -> Result<Vec<Series>> {
    let multiple_n = rows.iter().any(|r| r.rx_antennas != rows[0].rx_antennas);
    // keys sort by scheme, then alpha, then N
    let mut groups: BTreeMap<(String, u64, usize), Series> = BTreeMap::new();
    for r in rows {
        let x = match figure {
            Figure::AntennaRatio => r.tx_antennas as f64 / r.rx_antennas as f64,
            Figure::Users => r
                .users
                .ok_or_else(|| anyhow!("K-user figure needs the K column on every row"))?
                as f64,
        };
        let key = (r.scheme.clone(), r.alpha.to_bits(), r.rx_antennas);
        let series = groups.entry(key).or_insert_with(|| Series {
            label: match (figure, multiple_n) {
                (Figure::Users, _) => format!("alpha = {}", r.alpha),
                (_, false) => format!("{} alpha = {}", r.scheme, r.alpha),
                (_, true) => format!("{} alpha = {} N = {}", r.scheme, r.alpha, r.rx_antennas),
            },
            dashed: r.scheme.starts_with("ZF"),
            formula: Vec::new(),
            measured: Vec::new(),
        });
        series.formula.push((x, r.formula));
        if let Some(s) = r.slope {
            series.measured.push((x, s));
        }
    }
    let mut out: Vec<Series> = groups.into_values().collect();
    for s in &mut out {
        s.formula.sort_by(|a, b| a.0.total_cmp(&b.0));
        s.measured.sort_by(|a, b| a.0.total_cmp(&b.0));
    }
    Ok(out)
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let pad = ((hi - lo) * 0.08).max(0.25);
    (lo - pad, hi + pad)
}

/// Renders the chart to an SVG document.
pub fn render_svg(rows: &[ExperimentResultRow], figure: Figure) -> Result<String> {
    if rows.is_empty() {
        bail!("nothing to plot: no rows");
    }
    let series = group(rows, figure)?;
    let points = || {
        series
            .iter()
            .flat_map(|s| s.formula.iter().chain(&s.measured))
    };
    let (x0, x1) = padded_range(points().map(|p| p.0));
    let (y0, y1) = padded_range(points().map(|p| p.1));
    let (y0, y1) = (y0.min(0.0), y1);
    let (title, x_desc) = match figure {
        Figure::AntennaRatio => ("Sum secure DoF versus antenna ratio", "M / N"),
        Figure::Users => ("Sum secure DoF versus number of receivers", "K"),
    };

    let mut svg = String::new();
    {
        let root = SVGBackend::with_string(&mut svg, SIZE).into_drawing_area();
        root.fill(&WHITE)?;
        let mut chart = ChartBuilder::on(&root)
            .caption(title, ("sans-serif", 22))
            .margin(18)
            .x_label_area_size(45)
            .y_label_area_size(55)
            .build_cartesian_2d(x0..x1, y0..y1)?;
        chart
            .configure_mesh()
            .x_desc(x_desc)
            .y_desc("sum SDoF")
            .light_line_style(WHITE.mix(0.0))
            .draw()?;
        for (idx, s) in series.iter().enumerate() {
            let color = Palette99::pick(idx).to_rgba();
            let style = color.stroke_width(2);
            let anno = if s.dashed {
                chart.draw_series(DashedLineSeries::new(
                    s.formula.iter().copied(),
                    8,
                    5,
                    style,
                ))?
            } else {
                chart.draw_series(LineSeries::new(s.formula.iter().copied(), style))?
            };
            anno.label(s.label.clone()).legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 24, y)], color.stroke_width(2))
            });
            chart.draw_series(
                s.measured
                    .iter()
                    .map(|&p| Circle::new(p, 4, color.filled())),
            )?;
        }
        chart
            .configure_series_labels()
            .position(SeriesLabelPosition::UpperLeft)
            .background_style(WHITE.mix(0.85))
            .border_style(BLACK)
            .draw()?;
        root.present()?;
    }
    Ok(svg)
}

/// Renders and writes the figure; the output file is only created once the
/// chart has been rendered.
pub fn plot_file(rows: &[ExperimentResultRow], kind: FigureKind, out: &Path) -> Result<Figure> {
    let figure = resolve_figure(kind, rows);
    let svg = render_svg(rows, figure)?;
    std::fs::write(out, svg)?;
    Ok(figure)
}
