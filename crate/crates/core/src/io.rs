//! Dataset and basis CSV files.
//!
//! Datasets carry a header `x1,...,xp,y` and one sample per row. Basis files
//! hold a `p×d` matrix with header `b1,...,bd`. Values are written with 17
//! significant digits so they read back bit-exact.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_dataset<W: Write>(out: W, x: &Matrix, y: &[f64]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::dims(format!("{} rows but {} responses", x.rows(), y.len())));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=x.cols()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for (i, yi) in y.iter().enumerate() {
        let mut rec: Vec<String> = x.row(i).iter().map(|&v| fmt_value(v)).collect();
        rec.push(fmt_value(*yi));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dataset<R: Read>(input: R) -> Result<(Matrix, Vec<f64>)> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    let width = header.len();
    if width < 2 || header.get(width - 1).map(str::trim) != Some("y") {
        return Err(Error::Data(format!(
            "dataset header must be x1,...,xp,y; got '{}'",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let p = width - 1;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Data(format!("line {line}: {e}")))?;
        if rec.len() != width {
            return Err(Error::Data(format!(
                "line {line}: expected {width} columns, found {}",
                rec.len()
            )));
        }
        for (j, field) in rec.iter().enumerate() {
            let v = parse_field(field, line, header.get(j).unwrap_or("?"))?;
            if j < p {
                xs.push(v);
            } else {
                ys.push(v);
            }
        }
    }
    if ys.is_empty() {
        return Err(Error::Data("dataset has no rows".into()));
    }
    let x = Matrix::new(ys.len(), p, xs)?;
    Ok((x, ys))
}

fn parse_field(field: &str, line: usize, column: &str) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| {
        Error::Data(format!("line {line}, column {column}: '{field}' is not a number"))
    })?;
    if !v.is_finite() {
        return Err(Error::Data(format!("line {line}, column {column}: non-finite value")));
    }
    Ok(v)
}

pub fn write_basis<W: Write>(out: W, basis: &Matrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<String> = (1..=basis.cols()).map(|j| format!("b{j}")).collect();
    w.write_record(&header)?;
    for i in 0..basis.rows() {
        w.write_record(basis.row(i).iter().map(|&v| fmt_value(v)))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_basis<R: Read>(input: R) -> Result<Matrix> {
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = r.headers()?.clone();
    let d = header.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Data(format!("line {line}: {e}")))?;
        if rec.len() != d {
            return Err(Error::Data(format!(
                "line {line}: expected {d} columns, found {}",
                rec.len()
            )));
        }
        for (j, field) in rec.iter().enumerate() {
            data.push(parse_field(field, line, header.get(j).unwrap_or("?"))?);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Data("basis file has no rows".into()));
    }
    Matrix::new(rows, d, data)
}

pub fn write_dataset_file(path: &Path, x: &Matrix, y: &[f64]) -> Result<()> {
    write_dataset(File::create(path)?, x, y)
}

pub fn read_dataset_file(path: &Path) -> Result<(Matrix, Vec<f64>)> {
    read_dataset(File::open(path)?)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

pub fn write_basis_file(path: &Path, basis: &Matrix) -> Result<()> {
    write_basis(File::create(path)?, basis)
}

pub fn read_basis_file(path: &Path) -> Result<Matrix> {
    read_basis(File::open(path)?).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}
