//! Figure-style SVG rendering of run records: a grey mean-return curve with
//! standard-error bars plus green/red tracked-value curves, either as
//! per-episode means or as one thin curve per run.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::{mean, standard_error};
use crate::record::{self, RunRecord};

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const GREY: &str = "#808080";
const GREEN: &str = "#2ca02c";
const RED: &str = "#d62728";
const N_ERROR_BARS: usize = 40;
const MAX_POINTS: usize = 1200;

/// Which figure layout to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotStyle {
    /// Mean tracked-value curves with a dotted single-run overlay.
    Figure2,
    /// One thin tracked-value curve per run.
    Figure5,
}

impl std::str::FromStr for PlotStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "figure2" => Ok(PlotStyle::Figure2),
            "figure5" => Ok(PlotStyle::Figure5),
            other => Err(Error::Config(format!(
                "unknown plot style {other:?}; expected figure2|figure5"
            ))),
        }
    }
}

/// Render a CSV of run records into an SVG file. Nothing is written when the
/// input is empty or malformed.
pub fn emit_plot(input: &Path, style: PlotStyle, output: &Path) -> Result<()> {
    let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let records = record::from_csv(&text)?;
    let svg = render_plot(&records, style)?;
    if let Some(parent) = output.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    fs::write(output, svg).map_err(|e| Error::io(output, e))
}

/// Render records (possibly spanning several seeds) to SVG text.
pub fn render_plot(records: &[RunRecord], style: PlotStyle) -> Result<String> {
    if records.is_empty() {
        return Err(Error::MalformedCsv("no data rows to plot".into()));
    }
    // Split into runs by seed, preserving row order within each.
    let mut by_seed: BTreeMap<u64, Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        by_seed.entry(r.seed).or_default().push(r);
    }
    let runs: Vec<&Vec<&RunRecord>> = by_seed.values().collect();
    let n_episodes = runs.iter().map(|r| r.len()).min().unwrap();
    if n_episodes == 0 {
        return Err(Error::MalformedCsv("runs contain no episodes".into()));
    }

    let episode_at = |e: usize| runs[0][e].episode as f64;
    let mean_return: Vec<f64> = (0..n_episodes)
        .map(|e| mean(&runs.iter().map(|r| r[e].return_).collect::<Vec<_>>()))
        .collect();
    let se_return: Vec<f64> = (0..n_episodes)
        .map(|e| standard_error(&runs.iter().map(|r| r[e].return_).collect::<Vec<_>>()))
        .collect();

    // Everything drawn feeds the y range.
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    let mut cover = |v: f64| {
        y_min = y_min.min(v);
        y_max = y_max.max(v);
    };
    for e in 0..n_episodes {
        cover(mean_return[e] - se_return[e]);
        cover(mean_return[e] + se_return[e]);
    }
    match style {
        PlotStyle::Figure2 => {
            for e in 0..n_episodes {
                let tv1: Vec<f64> = runs.iter().map(|r| r[e].tracked_value_1).collect();
                let tv2: Vec<f64> = runs.iter().map(|r| r[e].tracked_value_2).collect();
                cover(mean(&tv1));
                cover(mean(&tv2));
            }
            for r in runs[0] {
                cover(r.tracked_value_1);
                cover(r.tracked_value_2);
            }
        }
        PlotStyle::Figure5 => {
            for run in &runs {
                for r in run.iter().take(n_episodes) {
                    cover(r.tracked_value_1);
                    cover(r.tracked_value_2);
                }
            }
        }
    }
    if y_min == y_max {
        y_min -= 1.0;
        y_max += 1.0;
    }
    let pad = 0.05 * (y_max - y_min);
    let y_min = y_min - pad;
    let y_max = y_max + pad;
    let x_min = episode_at(0);
    let x_max = episode_at(n_episodes - 1).max(x_min + 1.0);

    let x_of = move |episode: f64| {
        MARGIN_LEFT + (episode - x_min) / (x_max - x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    };
    let y_of = move |v: f64| {
        HEIGHT - MARGIN_BOTTOM - (v - y_min) / (y_max - y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    };

    let stride = n_episodes.div_ceil(MAX_POINTS);
    let polyline = |values: &dyn Fn(usize) -> f64| -> String {
        let mut points = String::new();
        let mut e = 0;
        while e < n_episodes {
            points.push_str(&format!(
                "{:.2},{:.2} ",
                x_of(episode_at(e)),
                y_of(values(e))
            ));
            e += stride;
        }
        if (n_episodes - 1) % stride != 0 {
            points.push_str(&format!(
                "{:.2},{:.2} ",
                x_of(episode_at(n_episodes - 1)),
                y_of(values(n_episodes - 1))
            ));
        }
        points.trim_end().to_string()
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    // Axes with round-number ticks.
    let axis = format!(
        "<g stroke=\"black\" stroke-width=\"1\">\
         <line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\"/>\
         <line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\"/></g>\n",
        l = MARGIN_LEFT,
        r = WIDTH - MARGIN_RIGHT,
        t = MARGIN_TOP,
        b = HEIGHT - MARGIN_BOTTOM,
    );
    svg.push_str(&axis);
    for (value, label_x) in ticks(x_min, x_max) {
        let x = x_of(value);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{b:.2}\" x2=\"{x:.2}\" y2=\"{b2:.2}\" stroke=\"black\"/>\
             <text x=\"{x:.2}\" y=\"{ty:.2}\" text-anchor=\"middle\">{label_x}</text>\n",
            b = HEIGHT - MARGIN_BOTTOM,
            b2 = HEIGHT - MARGIN_BOTTOM + 6.0,
            ty = HEIGHT - MARGIN_BOTTOM + 22.0,
        ));
    }
    for (value, label_y) in ticks(y_min, y_max) {
        let y = y_of(value);
        svg.push_str(&format!(
            "<line x1=\"{l2:.2}\" y1=\"{y:.2}\" x2=\"{l:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>\
             <text x=\"{tx:.2}\" y=\"{ty:.2}\" text-anchor=\"end\">{label_y}</text>\n",
            l = MARGIN_LEFT,
            l2 = MARGIN_LEFT - 6.0,
            tx = MARGIN_LEFT - 10.0,
            ty = y + 4.0,
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"middle\">episode</text>\n",
        x = (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        y = HEIGHT - 18.0,
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{y:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {y:.2})\">value</text>\n",
        y = (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
    ));

    // Tracked-value curves.
    match style {
        PlotStyle::Figure2 => {
            let tv1_mean: Vec<f64> = (0..n_episodes)
                .map(|e| mean(&runs.iter().map(|r| r[e].tracked_value_1).collect::<Vec<_>>()))
                .collect();
            let tv2_mean: Vec<f64> = (0..n_episodes)
                .map(|e| mean(&runs.iter().map(|r| r[e].tracked_value_2).collect::<Vec<_>>()))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{GREEN}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                polyline(&|e| tv1_mean[e])
            ));
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{RED}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                polyline(&|e| tv2_mean[e])
            ));
            // Dotted overlay of the first run to make oscillation visible
            // where averaging hides it.
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{GREEN}\" stroke-width=\"1\" \
                 stroke-dasharray=\"3 4\" points=\"{}\"/>\n",
                polyline(&|e| runs[0][e].tracked_value_1)
            ));
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{RED}\" stroke-width=\"1\" \
                 stroke-dasharray=\"3 4\" points=\"{}\"/>\n",
                polyline(&|e| runs[0][e].tracked_value_2)
            ));
        }
        PlotStyle::Figure5 => {
            for run in &runs {
                svg.push_str(&format!(
                    "<polyline fill=\"none\" stroke=\"{GREEN}\" stroke-width=\"0.7\" \
                     opacity=\"0.6\" points=\"{}\"/>\n",
                    polyline(&|e| run[e].tracked_value_1)
                ));
                svg.push_str(&format!(
                    "<polyline fill=\"none\" stroke=\"{RED}\" stroke-width=\"0.7\" \
                     opacity=\"0.6\" points=\"{}\"/>\n",
                    polyline(&|e| run[e].tracked_value_2)
                ));
            }
        }
    }

    // Mean return in grey with standard-error bars on top.
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"{GREY}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        polyline(&|e| mean_return[e])
    ));
    let bar_stride = n_episodes.div_ceil(N_ERROR_BARS);
    let mut e = 0;
    while e < n_episodes {
        if se_return[e] > 0.0 {
            let x = x_of(episode_at(e));
            svg.push_str(&format!(
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
                 stroke=\"{GREY}\" stroke-width=\"1\"/>\n",
                y_of(mean_return[e] - se_return[e]),
                y_of(mean_return[e] + se_return[e]),
            ));
        }
        e += bar_stride;
    }

    // Legend.
    let legend = [
        (GREY, "mean return"),
        (GREEN, "tracked value 1"),
        (RED, "tracked value 2"),
    ];
    for (i, (color, label)) in legend.iter().enumerate() {
        let y = MARGIN_TOP + 16.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{x2:.2}\" y2=\"{y:.2}\" \
             stroke=\"{color}\" stroke-width=\"2\"/>\
             <text x=\"{tx:.2}\" y=\"{ty:.2}\">{label}</text>\n",
            x = WIDTH - MARGIN_RIGHT - 150.0,
            x2 = WIDTH - MARGIN_RIGHT - 125.0,
            tx = WIDTH - MARGIN_RIGHT - 118.0,
            ty = y + 4.0,
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Round tick positions covering [lo, hi]: a 1/2/5 x 10^k step.
fn ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| span / s <= 6.0)
        .unwrap_or(mag * 10.0);
    let mut v = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while v <= hi + 1e-9 * span {
        let label = if step >= 1.0 {
            format!("{}", v.round() as i64)
        } else {
            format!("{v:.2}")
        };
        out.push((v, label));
        v += step;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::RunRecord;

    fn sample_records(seeds: usize, episodes: usize) -> Vec<RunRecord> {
        let mut out = Vec::new();
        for seed in 0..seeds {
            for episode in 0..episodes {
                let t = episode as f64 / episodes.max(1) as f64;
                out.push(RunRecord {
                    seed: seed as u64,
                    episode,
                    return_: t + 0.1 * seed as f64,
                    tracked_value_1: (t * 10.0).sin(),
                    tracked_value_2: -t,
                    policy_stat: None,
                });
            }
        }
        out
    }

    #[test]
    fn empty_input_is_an_error_and_writes_nothing() {
        let dir = std::env::temp_dir().join(format!("greedlab-plot-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let input = dir.join("empty.csv");
        std::fs::write(&input, format!("{}\n", record::CSV_HEADER)).unwrap();
        let output = dir.join("out.svg");
        assert!(emit_plot(&input, PlotStyle::Figure2, &output).is_err());
        assert!(!output.exists());
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn missing_column_error_names_the_column() {
        let dir = std::env::temp_dir().join(format!("greedlab-plot2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let input = dir.join("bad.csv");
        std::fs::write(&input, "seed,episode,return\n1,0,0.5\n").unwrap();
        let err = emit_plot(&input, PlotStyle::Figure5, &dir.join("o.svg")).unwrap_err();
        assert!(err.to_string().contains("tracked_value_1"));
        let _ = std::fs::remove_dir_all(&dir);
    }

    #[test]
    fn renders_three_curves_for_a_multi_run_aggregate() {
        let svg = render_plot(&sample_records(5, 100), PlotStyle::Figure2).unwrap();
        assert!(svg.contains(GREY));
        assert!(svg.contains(GREEN));
        assert!(svg.contains(RED));
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn single_run_overlay_draws_one_curve_per_tracked_value() {
        let svg = render_plot(&sample_records(1, 50), PlotStyle::Figure5).unwrap();
        let green_curves = svg.matches(GREEN).count();
        // One polyline plus the legend entry.
        assert_eq!(green_curves, 2);
    }

    #[test]
    fn output_is_deterministic() {
        let records = sample_records(3, 64);
        let a = render_plot(&records, PlotStyle::Figure5).unwrap();
        let b = render_plot(&records, PlotStyle::Figure5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn long_runs_are_downsampled() {
        let svg = render_plot(&sample_records(1, 20_000), PlotStyle::Figure2).unwrap();
        // Points per polyline stay bounded.
        let longest = svg
            .split("points=\"")
            .skip(1)
            .map(|s| s.split('"').next().unwrap().split_whitespace().count())
            .max()
            .unwrap();
        assert!(longest <= MAX_POINTS + 2, "longest polyline {longest}");
    }
}
