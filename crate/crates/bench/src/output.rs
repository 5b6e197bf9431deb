//! CSV records and SVG error curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{BenchError, Result};
use crate::run::{RunRecord, SeedLabel};

pub const CSV_HEADER: [&str; 9] = [
    "dataset",
    "init",
    "solver",
    "seed",
    "iteration",
    "objective",
    "rel_error",
    "elapsed_ms",
    "stop_reason",
];

/// Ten significant digits in scientific notation.
pub fn format_number(v: f64) -> String {
    format!("{v:.9e}")
}

pub fn write_csv<W: Write>(records: &[RunRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.dataset.as_str(),
            r.init.as_str(),
            r.solver.as_str(),
            &r.seed.to_string(),
            &r.iteration.to_string(),
            &format_number(r.objective),
            &format_number(r.rel_error),
            &format_number(r.elapsed_ms),
            r.stop_reason.as_str(),
        ])?;
    }
    w.flush().map_err(|e| BenchError::Csv(e.into()))?;
    Ok(())
}

pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    write_csv(records, std::io::BufWriter::new(file))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(BenchError::Parse {
            line: 1,
            col: 1,
            msg: format!("unexpected header {header:?}"),
        });
    }
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let num = |col: usize| -> Result<f64> {
            row[col].parse().map_err(|_| BenchError::Parse {
                line,
                col: col + 1,
                msg: format!("`{}` is not a number", &row[col]),
            })
        };
        records.push(RunRecord {
            dataset: row[0].to_string(),
            init: row[1].to_string(),
            solver: row[2].to_string(),
            seed: row[3].parse::<SeedLabel>()?,
            iteration: row[4].parse().map_err(|_| BenchError::Parse {
                line,
                col: 5,
                msg: format!("`{}` is not an iteration", &row[4]),
            })?,
            objective: num(5)?,
            rel_error: num(6)?,
            elapsed_ms: num(7)?,
            stop_reason: row[8].to_string(),
        });
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    pub log_y: bool,
    pub title: String,
    pub width: f64,
    pub height: f64,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self {
            log_y: false,
            title: "relative error".into(),
            width: 800.0,
            height: 500.0,
        }
    }
}

const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#393b79", "#e7ba52",
];

/// One curve per initializer (per initializer and solver when several
/// solvers are present). Seeded initializers are drawn from their mean rows.
pub fn plot_series(records: &[RunRecord]) -> BTreeMap<String, Vec<(usize, f64)>> {
    let multi_solver = records.iter().any(|r| r.solver != records[0].solver);
    let label = |r: &RunRecord| {
        if multi_solver {
            format!("{}/{}", r.init, r.solver)
        } else {
            r.init.clone()
        }
    };
    let mut with_mean: BTreeMap<String, bool> = BTreeMap::new();
    for r in records {
        *with_mean.entry(label(r)).or_default() |= r.seed == SeedLabel::Mean;
    }
    let mut series: BTreeMap<String, BTreeMap<usize, f64>> = BTreeMap::new();
    for r in records {
        let key = label(r);
        let use_row = if with_mean[&key] {
            r.seed == SeedLabel::Mean
        } else {
            true
        };
        if use_row {
            series.entry(key).or_default().entry(r.iteration).or_insert(r.rel_error);
        }
    }
    series
        .into_iter()
        .map(|(k, pts)| (k, pts.into_iter().collect()))
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Static, self-contained SVG of relative error against iteration.
pub fn render_svg(records: &[RunRecord], opts: &PlotOptions) -> String {
    let series = if records.is_empty() {
        BTreeMap::new()
    } else {
        plot_series(records)
    };
    let (left, right, top, bottom) = (70.0, 190.0, 40.0, 50.0);
    let pw = opts.width - left - right;
    let ph = opts.height - top - bottom;
    let ty = |v: f64| if opts.log_y { v.max(1e-300).log10() } else { v };

    let points = series.values().flatten();
    let x_max = points.clone().map(|p| p.0).max().unwrap_or(1).max(1) as f64;
    let ys: Vec<f64> = points.map(|p| ty(p.1)).filter(|v| v.is_finite()).collect();
    let (mut y_lo, mut y_hi) = ys
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !y_lo.is_finite() {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    if opts.log_y {
        y_lo = y_lo.floor();
        y_hi = y_hi.ceil();
    } else {
        y_lo = y_lo.min(0.0);
    }
    if y_hi - y_lo < 1e-12 {
        y_hi = y_lo + 1.0;
    }
    let sx = |x: f64| left + pw * x / x_max;
    let sy = |y: f64| top + ph * (1.0 - (y - y_lo) / (y_hi - y_lo));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = opts.width,
        h = opts.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        escape(&opts.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=5 {
        let frac = k as f64 / 5.0;
        let xv = x_max * frac;
        let yv = y_lo + (y_hi - y_lo) * frac;
        let ylabel = if opts.log_y {
            format!("1e{:.1}", yv)
        } else {
            format!("{yv:.3}")
        };
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y0}" x2="{x}" y2="{y1}" stroke="black"/><text x="{x}" y="{ty}" text-anchor="middle">{xv:.0}</text>"#,
            x = sx(xv),
            y0 = top + ph,
            y1 = top + ph + 5.0,
            ty = top + ph + 18.0
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{x0}" y1="{y}" x2="{x1}" y2="{y}" stroke="#ddd"/><text x="{tx}" y="{ty}" text-anchor="end">{ylabel}</text>"##,
            x0 = left,
            x1 = left + pw,
            y = sy(yv),
            tx = left - 6.0,
            ty = sy(yv) + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#,
        left + pw / 2.0,
        opts.height - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{y}" text-anchor="middle" transform="rotate(-90 16 {y})">{}</text>"#,
        if opts.log_y { "relative error (log10)" } else { "relative error" },
        y = top + ph / 2.0
    );
    for (i, (name, pts)) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = pts
            .iter()
            .filter(|p| ty(p.1).is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x as f64), sy(ty(y))))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-series="{n}" fill="none" stroke="{colour}" stroke-width="1.5" points="{p}"/>"#,
            n = escape(name),
            p = path.join(" ")
        );
        let ly = top + 10.0 + 18.0 * i as f64;
        let lx = left + pw + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_svg_plot(records: &[RunRecord], path: &Path, opts: &PlotOptions) -> Result<()> {
    fs::write(path, render_svg(records, opts)).map_err(|e| BenchError::io(path, e))
}
