//! Matrix Market coordinate format (`real general`) reader and writer.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Parses Matrix Market text. Duplicate coordinates are summed.
pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (line_no, header) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.first().map(String::as_str) != Some("%%matrixmarket") {
        return Err(Error::parse(line_no, "header must start with %%MatrixMarket"));
    }
    match fields.get(1..5) {
        Some([object, format, field, symmetry]) => {
            if object != "matrix" {
                return Err(Error::parse(line_no, format!("unsupported object `{object}`")));
            }
            if format != "coordinate" {
                return Err(Error::parse(line_no, format!("unsupported format `{format}`")));
            }
            if field != "real" && field != "integer" {
                return Err(Error::parse(line_no, format!("unsupported field `{field}`")));
            }
            if symmetry != "general" {
                return Err(Error::parse(line_no, format!("unsupported symmetry `{symmetry}`")));
            }
        }
        _ => return Err(Error::parse(line_no, "header needs object, format, field and symmetry")),
    }

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });

    let (line_no, dims) = data
        .next()
        .ok_or_else(|| Error::parse(line_no + 1, "missing size line"))?;
    let dims: Vec<&str> = dims.split_whitespace().collect();
    let [rows, cols, nnz] = dims[..] else {
        return Err(Error::parse(line_no, "size line needs `rows cols entries`"));
    };
    let n_rows = parse_count(rows, line_no)?;
    let n_cols = parse_count(cols, line_no)?;
    let nnz = parse_count(nnz, line_no)?;
    if n_rows.checked_mul(n_cols).is_none_or(|cap| nnz > cap) {
        return Err(Error::parse(line_no, format!("{nnz} entries cannot fit in {n_rows}x{n_cols}")));
    }

    let mut triplets = Vec::with_capacity(nnz.min(1 << 24));
    let mut last_line = line_no;
    for (line_no, line) in data {
        last_line = line_no;
        if triplets.len() == nnz {
            return Err(Error::parse(line_no, format!("more than the declared {nnz} entries")));
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let [i, j, v] = parts[..] else {
            return Err(Error::parse(line_no, "entry needs `row col value`"));
        };
        let i = parse_count(i, line_no)?;
        let j = parse_count(j, line_no)?;
        if i == 0 || i > n_rows || j == 0 || j > n_cols {
            return Err(Error::parse(line_no, format!("index ({i}, {j}) out of range")));
        }
        let v: f64 = v
            .parse()
            .map_err(|_| Error::parse(line_no, format!("invalid value `{v}`")))?;
        if !v.is_finite() {
            return Err(Error::parse(line_no, format!("non-finite value `{v}`")));
        }
        triplets.push((i - 1, j - 1, v));
    }
    if triplets.len() != nnz {
        return Err(Error::parse(
            last_line,
            format!("declared {nnz} entries but found {}", triplets.len()),
        ));
    }
    SparseMatrix::from_triplets(n_rows, n_cols, triplets).map_err(|e| Error::parse(last_line, e.to_string()))
}

fn parse_count(s: &str, line: usize) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse(line, format!("invalid integer `{s}`")))
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

/// Formats `m` with 17 significant digits per value (bit-exact round trip).
pub fn format_matrix_market(m: &SparseMatrix) -> String {
    let mut out = String::with_capacity(32 * m.nnz() + 64);
    write_entries(m, &mut out).expect("writing to a String cannot fail");
    out
}

fn write_entries(m: &SparseMatrix, out: &mut impl std::fmt::Write) -> std::fmt::Result {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for (r, c, v) in m.iter() {
        writeln!(out, "{} {} {:.16e}", r + 1, c + 1, v)?;
    }
    Ok(())
}

pub fn write_matrix_market(m: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(format_matrix_market(m).as_bytes())?;
    w.flush()?;
    Ok(())
}
