//! The `id,...` matrix CSV format used for all cross-module data exchange.
//!
//! Bit-level contract: UTF-8, `\n` line endings, a header row `id,c0,c1,...`,
//! one data row per record, decimal floating-point literals. Values are
//! written with Rust's shortest round-trip formatting, so a write/read cycle
//! reproduces every `f64` exactly.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Reads a matrix CSV file. Returns row ids in file order and the dense
/// value matrix. Every cell must parse as a finite `f64`; ids must be unique.
pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<(Vec<String>, Array2<f64>)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((_, Err(source))) => {
            return Err(Error::Io {
                path: path.to_path_buf(),
                source,
            })
        }
        None => {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: 1,
                message: "empty file; expected a header row".into(),
            })
        }
    };
    let header_cells: Vec<&str> = header.split(',').collect();
    if header_cells.first() != Some(&"id") {
        return Err(Error::Malformed {
            path: path.to_path_buf(),
            line: 1,
            message: format!(
                "first header column must be 'id', found '{}'",
                header_cells.first().unwrap_or(&"")
            ),
        });
    }
    let n_cols = header_cells.len() - 1;

    let mut ids = Vec::new();
    let mut seen = HashSet::new();
    let mut values = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n_cols + 1 {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: line_no,
                message: format!(
                    "ragged row: expected {} cells, found {}",
                    n_cols + 1,
                    cells.len()
                ),
            });
        }
        let id = cells[0].to_string();
        if !seen.insert(id.clone()) {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("duplicate id '{id}'"),
            });
        }
        for (col, cell) in cells[1..].iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| Error::BadValue {
                path: path.to_path_buf(),
                line: line_no,
                column: col + 2,
                message: format!("cannot parse '{cell}' as a number"),
            })?;
            if !value.is_finite() {
                return Err(Error::BadValue {
                    path: path.to_path_buf(),
                    line: line_no,
                    column: col + 2,
                    message: format!("value '{cell}' is not finite"),
                });
            }
            values.push(value);
        }
        ids.push(id);
    }

    let matrix = Array2::from_shape_vec((ids.len(), n_cols), values)
        .expect("row-major buffer matches parsed shape");
    Ok((ids, matrix))
}

/// Writes a matrix CSV file with generated `c0,c1,...` column names.
pub fn write_matrix_csv(
    path: impl AsRef<Path>,
    row_ids: &[String],
    matrix: &Array2<f64>,
) -> Result<()> {
    let columns: Vec<String> = (0..matrix.ncols()).map(|c| format!("c{c}")).collect();
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    write_matrix_csv_with_columns(path, &column_refs, row_ids, matrix)
}

/// Writes a matrix CSV file with caller-supplied column names. Output is
/// readable by [`read_matrix_csv`].
pub fn write_matrix_csv_with_columns(
    path: impl AsRef<Path>,
    columns: &[&str],
    row_ids: &[String],
    matrix: &Array2<f64>,
) -> Result<()> {
    let path = path.as_ref();
    if row_ids.len() != matrix.nrows() {
        return Err(Error::shape(
            format!("write {}", path.display()),
            format!("{} row ids", matrix.nrows()),
            format!("{} row ids", row_ids.len()),
        ));
    }
    if columns.len() != matrix.ncols() {
        return Err(Error::shape(
            format!("write {}", path.display()),
            format!("{} column names", matrix.ncols()),
            format!("{} column names", columns.len()),
        ));
    }
    for cell in row_ids.iter().map(String::as_str).chain(columns.iter().copied()) {
        if cell.contains(',') || cell.contains('\n') || cell.contains('\r') {
            return Err(Error::invalid(format!(
                "id or column name '{}' contains a CSV delimiter",
                cell.escape_default()
            )));
        }
    }
    if let Some((r, c)) = first_non_finite(matrix) {
        return Err(Error::NonFinite(format!(
            "matrix for {} at row {r}, column {c}",
            path.display()
        )));
    }

    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = BufWriter::new(file);
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };

    let mut line = String::from("id");
    for name in columns {
        line.push(',');
        line.push_str(name);
    }
    line.push('\n');
    out.write_all(line.as_bytes()).map_err(io_err)?;

    let mut buffer = String::with_capacity(4096);
    for (id, row) in row_ids.iter().zip(matrix.rows()) {
        buffer.clear();
        buffer.push_str(id);
        for &value in row {
            buffer.push(',');
            push_f64(&mut buffer, value);
        }
        buffer.push('\n');
        out.write_all(buffer.as_bytes()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Shortest decimal representation that parses back to the identical `f64`.
fn push_f64(buffer: &mut String, value: f64) {
    use std::fmt::Write as _;
    write!(buffer, "{value}").expect("formatting f64 into a String cannot fail");
}

fn first_non_finite(matrix: &Array2<f64>) -> Option<(usize, usize)> {
    matrix
        .indexed_iter()
        .find(|(_, v)| !v.is_finite())
        .map(|((r, c), _)| (r, c))
}
