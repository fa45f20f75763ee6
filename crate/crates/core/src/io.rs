//! CSV formats: tables and sampled wave functions.

use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::groundstate::{GroundForm, GroundStateModel, RegionSpec, SampledWaveFunction};
use crate::real::Real;

pub const TABLE_HEADER: &str = "# gslab-table v1; columns: ";
pub const WAVEFUNCTION_HEADER: &str = "# gslab-wavefunction v1";

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn real<T: Real>(x: T) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > T::zero() { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Real(f64),
    Int(u64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Real(v) => real(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// Column-named table, rendered as `# gslab-table v1; columns: a,b,...` then rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the columns");
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vec<Cell>] {
        &self.rows
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(TABLE_HEADER);
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// One-dimensional wave function as `x,value` (real) or `x,re,im` (complex) rows.
pub fn write_wavefunction<T: Real>(f: &SampledWaveFunction<T>) -> Result<String> {
    if f.dimension() != 1 {
        return invalid("wave function CSV is one-dimensional");
    }
    let mut out = String::from(WAVEFUNCTION_HEADER);
    out.push('\n');
    let complex = !f.is_real();
    for (x, v) in f.nodes().iter().zip(f.values()) {
        if complex {
            let _ = writeln!(out, "{},{},{}", real(x[0]), real(v.re), real(v.im));
        } else {
            let _ = writeln!(out, "{},{}", real(x[0]), real(v.re));
        }
    }
    Ok(out)
}

/// Parses the output of [`write_wavefunction`]; nodes must be uniformly spaced.
pub fn read_wavefunction<T: Real>(text: &str) -> Result<SampledWaveFunction<T>> {
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(WAVEFUNCTION_HEADER) {
        return Err(Error::Config("missing wave function header".into()));
    }
    let mut xs = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parse = |s: &str| -> Result<T> {
            let v: f64 = s.parse().map_err(|_| Error::Config(format!("line {}: bad number {s:?}", i + 2)))?;
            Ok(T::lit(v))
        };
        match fields.len() {
            2 => values.push(Complex::new(parse(fields[1])?, T::zero())),
            3 => values.push(Complex::new(parse(fields[1])?, parse(fields[2])?)),
            n => return Err(Error::Config(format!("line {}: expected 2 or 3 fields, got {n}", i + 2))),
        }
        xs.push(parse(fields[0])?);
    }
    if xs.len() < 3 {
        return Err(Error::Config("wave function needs at least 3 rows".into()));
    }
    let (a, b) = (xs[0], xs[xs.len() - 1]);
    let h = (b - a) / T::from_usize(xs.len() - 1).unwrap();
    for (i, &x) in xs.iter().enumerate() {
        let expect = a + h * T::from_usize(i).unwrap();
        if (x - expect).abs() > T::lit(1e-9) * h {
            return Err(Error::Config(format!("row {} breaks the uniform grid", i + 1)));
        }
    }
    let n = xs.len();
    SampledWaveFunction::from_values(RegionSpec::interval(a, b)?, vec![n], values)
}

/// Samples a one-dimensional ground state on its own grid (or on `[-L, L]`
/// with `points` nodes for closed forms).
pub fn ground_state_samples<T: Real>(g: &GroundStateModel<T>, half_width: T, points: usize) -> Result<SampledWaveFunction<T>> {
    if g.dimension() != 1 {
        return invalid("ground state CSV is one-dimensional");
    }
    match g.form() {
        GroundForm::GridFunction(grid) => {
            let values = grid.values().iter().map(|&v| Complex::new(v, T::zero())).collect();
            let l = grid.half_width();
            SampledWaveFunction::from_values(RegionSpec::interval(-l, l)?, vec![grid.values().len()], values)
        }
        GroundForm::AnalyticGaussian { .. } => {
            SampledWaveFunction::from_real_fn(RegionSpec::interval(-half_width, half_width)?, points, |x| g.value(x))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_format() {
        let mut t = Table::new(&["n", "value"]);
        t.push(vec![3u64.into(), 0.5.into()]);
        assert_eq!(t.render(), "# gslab-table v1; columns: n,value\n3,5.0000000000000000e-1\n");
        assert_eq!(real(1.0 / 3.0), "3.3333333333333331e-1");
    }

    #[test]
    fn wavefunction_round_trip() {
        let o = RegionSpec::interval(-1.3, 2.9).unwrap();
        let f = SampledWaveFunction::from_real_fn(o.clone(), 101, |x: &[f64]| (x[0] * 1.7).sin() / 3.0).unwrap();
        let back: SampledWaveFunction<f64> = read_wavefunction(&write_wavefunction(&f).unwrap()).unwrap();
        assert_eq!(back.region(), f.region());
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() <= 1e-15);
        }
        let z = SampledWaveFunction::from_fn(o, 11, |x| Complex::new(x[0], -2.0 * x[0])).unwrap();
        let back: SampledWaveFunction<f64> = read_wavefunction(&write_wavefunction(&z).unwrap()).unwrap();
        assert_eq!(back.values(), z.values());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_wavefunction::<f64>("x,value\n").is_err());
        let text = format!("{WAVEFUNCTION_HEADER}\n0,1\n1,1\n3,1\n");
        assert!(read_wavefunction::<f64>(&text).is_err());
    }
}
