//! Artifact files: `fields.csv`, `radial.csv`, `manifest.csv`, gnuplot scripts.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use bps_vortex::{GridSpec, RadialSolution, ScalarField};

/// Full-precision value: 17 significant digits, so reading back is exact.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub struct FieldColumns<'a> {
    pub u: &'a ScalarField,
    pub f: &'a ScalarField,
    pub sigma: &'a ScalarField,
    pub b: &'a ScalarField,
}

pub const FIELDS_HEADER: &str = "x,y,u,f,sigma,b";

pub fn fields_csv(grid: &GridSpec, n: usize, cols: &FieldColumns) -> String {
    let mut s = String::with_capacity(grid.len() * 6 * 24);
    writeln!(
        s,
        "# L={} N={} n={}",
        grid.half_width(),
        grid.points_per_side(),
        n
    )
    .unwrap();
    writeln!(s, "{FIELDS_HEADER}").unwrap();
    for k in 0..grid.len() {
        let (x, y) = grid.node(k);
        let row = [
            x,
            y,
            cols.u.values()[k],
            cols.f.values()[k],
            cols.sigma.values()[k],
            cols.b.values()[k],
        ];
        let line: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
        writeln!(s, "{}", line.join(",")).unwrap();
    }
    s
}

/// Fields read back from a `fields.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldsFile {
    pub grid: GridSpec,
    pub n: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub u: Vec<f64>,
    pub f: Vec<f64>,
    pub sigma: Vec<f64>,
    pub b: Vec<f64>,
}

pub fn read_fields_csv(path: &Path) -> io::Result<FieldsFile> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let mut l = None;
    let mut pts = None;
    let mut n = None;
    for item in header.trim_start_matches('#').split_whitespace() {
        match item.split_once('=') {
            Some(("L", v)) => l = v.parse::<f64>().ok(),
            Some(("N", v)) => pts = v.parse::<usize>().ok(),
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            _ => {}
        }
    }
    let grid = GridSpec::new(
        l.ok_or_else(|| bad("missing L"))?,
        pts.ok_or_else(|| bad("missing N"))?,
    )
    .map_err(|e| bad(&e.to_string()))?;
    if lines.next() != Some(FIELDS_HEADER) {
        return Err(bad("unexpected column header"));
    }
    let mut cols: [Vec<f64>; 6] = Default::default();
    for line in lines {
        let mut count = 0;
        for (c, v) in line.split(',').enumerate() {
            let v: f64 = v.parse().map_err(|_| bad("bad number"))?;
            cols.get_mut(c)
                .ok_or_else(|| bad("too many columns"))?
                .push(v);
            count += 1;
        }
        if count != 6 {
            return Err(bad("expected 6 columns"));
        }
    }
    if cols[0].len() != grid.len() {
        return Err(bad("row count does not match N^2"));
    }
    let [x, y, u, f, sigma, b] = cols;
    Ok(FieldsFile {
        grid,
        n: n.ok_or_else(|| bad("missing n"))?,
        x,
        y,
        u,
        f,
        sigma,
        b,
    })
}

pub fn radial_csv(sol: &RadialSolution) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "# n={} R={} nodes={}",
        sol.problem.n, sol.problem.outer_radius, sol.problem.nodes
    )
    .unwrap();
    writeln!(s, "r,f").unwrap();
    for (r, f) in sol.r.iter().zip(&sol.f) {
        writeln!(s, "{},{}", fmt_value(*r), fmt_value(*f)).unwrap();
    }
    s
}

/// Gnuplot script drawing `f` and `b` along the line `y = 0`.
pub fn profile_plot(title: &str) -> String {
    format!(
        r#"# f and b through the origin along y = 0; run with: gnuplot plot.gp
set datafile separator ","
set terminal pngcairo size 900,600
set output "profiles.png"
set title "{title}"
set xlabel "x"
set grid
plot "fields.csv" skip 2 using 1:($2 == 0 ? $4 : 1/0) with lines lw 2 title "f", \
     "fields.csv" skip 2 using 1:($2 == 0 ? $6 : 1/0) with lines lw 2 title "b"
"#
    )
}

/// Gnuplot script overlaying `f` along `y = 0` for several runs.
pub fn overlay_plot(entries: &[(String, String)]) -> String {
    let mut s = String::from(
        "# f along y = 0 for every converged cell; run with: gnuplot plot.gp\n\
         set datafile separator \",\"\n\
         set terminal pngcairo size 900,600\n\
         set output \"profiles.png\"\n\
         set xlabel \"x\"\n\
         set ylabel \"f\"\n\
         set grid\n",
    );
    if entries.is_empty() {
        s.push_str("# no converged cells\n");
        return s;
    }
    let parts: Vec<String> = entries
        .iter()
        .map(|(file, label)| {
            format!("\"{file}\" skip 2 using 1:($2 == 0 ? $4 : 1/0) with lines title \"{label}\"")
        })
        .collect();
    writeln!(s, "plot {}", parts.join(", \\\n     ")).unwrap();
    s
}
