//! Matrix Market exchange format, real general matrices only.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

pub const ARRAY_HEADER: &str = "%%MatrixMarket matrix array real general";

/// Dense column-major export with 17 significant digits per entry.
pub fn format_matrix_market(a: &DenseMatrix) -> String {
    let (m, n) = a.shape();
    let mut out = String::with_capacity(24 * m * n + 64);
    out.push_str(ARRAY_HEADER);
    out.push('\n');
    let _ = writeln!(out, "{m} {n}");
    for j in 0..n {
        for i in 0..m {
            let _ = writeln!(out, "{:.16e}", a[(i, j)]);
        }
    }
    out
}

pub fn write_matrix_market(a: &DenseMatrix, path: &Path) -> Result<()> {
    fs::write(path, format_matrix_market(a)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix_market(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&text, path)
}

/// Parses array or coordinate files. Coordinate entries are 1-based and
/// repeated entries are summed.
pub fn parse_matrix_market(text: &str, path: &Path) -> Result<DenseMatrix> {
    let fail = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    let (_, header) = lines.next().ok_or_else(|| fail(1, "empty file".into()))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(fail(1, format!("not a Matrix Market header: {header:?}")));
    }
    let coordinate = match fields[2].as_str() {
        "array" => false,
        "coordinate" => true,
        other => return Err(fail(1, format!("unsupported layout {other:?}"))),
    };
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(fail(1, format!("unsupported field {:?}", fields[3])));
    }
    if fields[4] != "general" {
        return Err(fail(1, format!("unsupported symmetry {:?}", fields[4])));
    }

    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = body.next().ok_or_else(|| fail(2, "missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| fail(size_line, format!("bad size line: {e}")))?;

    let num = |line: usize, tok: &str| -> Result<f64> {
        let v: f64 = tok
            .parse()
            .map_err(|_| fail(line, format!("bad number {tok:?}")))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(fail(line, format!("non-finite entry {tok:?}")))
        }
    };

    if !coordinate {
        let [m, n] = dims[..] else {
            return Err(fail(size_line, "array size line needs 2 integers".into()));
        };
        let mut a = DenseMatrix::zeros(m, n);
        let mut count = 0;
        for (line, l) in body {
            for tok in l.split_whitespace() {
                if count >= m * n {
                    return Err(fail(line, format!("more than {} entries", m * n)));
                }
                let (i, j) = (count % m, count / m);
                a.row_mut(i)[j] = num(line, tok)?;
                count += 1;
            }
        }
        if count != m * n {
            return Err(fail(text.lines().count(), format!("expected {} entries, found {count}", m * n)));
        }
        return Ok(a);
    }

    let [m, n, nnz] = dims[..] else {
        return Err(fail(size_line, "coordinate size line needs 3 integers".into()));
    };
    let mut a = DenseMatrix::zeros(m, n);
    let mut count = 0;
    for (line, l) in body {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(fail(line, "coordinate entry needs row, column, value".into()));
        }
        let idx = |t: &str, bound: usize| -> Result<usize> {
            match t.parse::<usize>() {
                Ok(v) if (1..=bound).contains(&v) => Ok(v - 1),
                _ => Err(fail(line, format!("index {t:?} outside 1..={bound}"))),
            }
        };
        let (i, j) = (idx(toks[0], m)?, idx(toks[1], n)?);
        a.row_mut(i)[j] += num(line, toks[2])?;
        count += 1;
    }
    if count != nnz {
        return Err(fail(text.lines().count(), format!("expected {nnz} entries, found {count}")));
    }
    Ok(a)
}
