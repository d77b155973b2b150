//! CSV-to-SVG line charts: a pure file-to-file transform with an
//! optional log scale for residual columns.

use std::fmt::Write as _;
use std::path::Path;

use momentlab::{Error, Result};

pub struct CsvTable {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header_line = lines.next().ok_or(Error::EmptyCsv)?;
    let headers: Vec<String> = header_line.split(',').map(|h| h.trim().to_string()).collect();
    let mut columns = vec![Vec::new(); headers.len()];
    for line in lines {
        for (slot, cell) in columns.iter_mut().zip(line.split(',')) {
            let value = cell.trim().parse::<f64>().map_err(|_| {
                Error::InvalidConfig(format!("non-numeric CSV cell {cell:?} in {}", path.display()))
            })?;
            slot.push(value);
        }
    }
    if columns.first().map_or(true, |c| c.is_empty()) {
        return Err(Error::EmptyCsv);
    }
    Ok(CsvTable { headers, columns })
}

fn column<'t>(table: &'t CsvTable, name: &str) -> Result<&'t [f64]> {
    table
        .headers
        .iter()
        .position(|h| h == name)
        .map(|i| table.columns[i].as_slice())
        .ok_or_else(|| Error::MissingColumn {
            name: name.to_string(),
            available: table.headers.clone(),
        })
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Line chart of the named columns: the first is the x-axis, the rest are
/// series. With `logy`, non-positive samples are dropped.
pub fn emit_plot(
    csv_path: &Path,
    column_names: &[String],
    logy: bool,
    out_path: &Path,
) -> Result<()> {
    if column_names.len() < 2 {
        return Err(Error::InvalidConfig(
            "plot needs an x column and at least one y column".into(),
        ));
    }
    let table = read_csv(csv_path)?;
    let xs = column(&table, &column_names[0])?;
    let mut series = Vec::new();
    for name in &column_names[1..] {
        let ys = column(&table, name)?;
        let points: Vec<(f64, f64)> = xs
            .iter()
            .zip(ys)
            .filter(|(_, &y)| !logy || y > 0.0)
            .map(|(&x, &y)| (x, if logy { y.log10() } else { y }))
            .collect();
        if points.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "column {name:?} has no plottable samples under the requested scale"
            )));
        }
        series.push((name.clone(), points));
    }

    let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_lo, mut y_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, pts) in &series {
        for &(x, y) in pts {
            x_lo = x_lo.min(x);
            x_hi = x_hi.max(x);
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if x_hi == x_lo {
        x_hi = x_lo + 1.0;
    }
    if y_hi == y_lo {
        y_hi = y_lo + 1.0;
    }

    let to_px = |x: f64, y: f64| -> (f64, f64) {
        let px = MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = HEIGHT - MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);
        (px, py)
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{MARGIN_L}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{MARGIN_L}\" y1=\"{MARGIN_T}\" x2=\"{MARGIN_L}\" y2=\"{}\" stroke=\"black\"/>",
        HEIGHT - MARGIN_B
    );
    // ticks
    for i in 0..=5 {
        let f = i as f64 / 5.0;
        let x = x_lo + f * (x_hi - x_lo);
        let (px, _) = to_px(x, y_lo);
        let _ = writeln!(
            svg,
            "<line x1=\"{px}\" y1=\"{}\" x2=\"{px}\" y2=\"{}\" stroke=\"black\"/>",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 6.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{px}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{:.3}</text>",
            HEIGHT - MARGIN_B + 22.0,
            x
        );
        let y = y_lo + f * (y_hi - y_lo);
        let (_, py) = to_px(x_lo, y);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{py}\" x2=\"{MARGIN_L}\" y2=\"{py}\" stroke=\"black\"/>",
            MARGIN_L - 6.0
        );
        let label = if logy {
            format!("1e{y:.1}")
        } else {
            format!("{y:.3}")
        };
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{label}</text>",
            MARGIN_L - 10.0,
            py + 4.0
        );
    }
    // axis names
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 14.0,
        column_names[0]
    );
    // series
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| {
            let (px, py) = to_px(x, y);
            format!("{px:.2},{py:.2}")
        }).collect();
        let _ = writeln!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            path.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"13\" fill=\"{color}\">{name}{}</text>",
            WIDTH - MARGIN_R - 180.0,
            MARGIN_T + 18.0 * i as f64,
            if logy { " (log)" } else { "" }
        );
    }
    let _ = writeln!(svg, "</svg>");
    std::fs::write(out_path, svg)?;
    Ok(())
}
