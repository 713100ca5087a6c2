//! Matrix Market coordinate files and plain-text vectors.
//!
//! Values are written with 17 significant digits, enough to round-trip any
//! `f64` exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::CsrMatrix;
use crate::error::{Error, Result};

const HEADER: &str = "%%MatrixMarket matrix coordinate real general";

pub fn write_matrix_market(m: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market_to(m, &mut w, &[])?;
    w.flush()?;
    Ok(())
}

/// Writes `m` with optional `%` comment lines after the header.
pub fn write_matrix_market_to<W: Write>(m: &CsrMatrix, w: &mut W, comments: &[String]) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    for c in comments {
        writeln!(w, "% {c}")?;
    }
    writeln!(w, "{} {} {}", m.n(), m.n(), m.nnz())?;
    for i in 0..m.n() {
        for (j, v) in m.row(i) {
            writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    read_matrix_market_from(BufReader::new(File::open(path)?))
}

/// Parses a square real coordinate matrix (`general` or `symmetric`).
pub fn read_matrix_market_from<R: BufRead>(reader: R) -> Result<CsrMatrix> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5
        || fields[0] != "%%matrixmarket"
        || fields[1] != "matrix"
        || fields[2] != "coordinate"
        || fields[3] != "real"
    {
        return Err(parse_err(1, &format!("unsupported header `{header}`")));
    }
    let symmetric = match fields[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, &format!("unsupported symmetry `{other}`"))),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match size {
            None => {
                if tokens.len() != 3 {
                    return Err(parse_err(lineno, "size line needs `rows cols nnz`"));
                }
                let rows: usize = parse_tok(tokens[0], lineno)?;
                let cols: usize = parse_tok(tokens[1], lineno)?;
                let nnz: usize = parse_tok(tokens[2], lineno)?;
                if rows != cols {
                    return Err(parse_err(lineno, "only square matrices are supported"));
                }
                size = Some((rows, nnz));
                triplets.reserve(nnz);
            }
            Some((n, _)) => {
                if tokens.len() != 3 {
                    return Err(parse_err(lineno, "entry line needs `row col value`"));
                }
                let i: usize = parse_tok(tokens[0], lineno)?;
                let j: usize = parse_tok(tokens[1], lineno)?;
                let v: f64 = parse_tok(tokens[2], lineno)?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(lineno, "index out of range"));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    let stored = if symmetric {
        triplets.iter().filter(|(i, j, _)| i >= j).count()
    } else {
        triplets.len()
    };
    if stored != nnz {
        return Err(parse_err(0, &format!("expected {nnz} entries, found {stored}")));
    }
    CsrMatrix::from_triplets(n, triplets)
}

/// Text vector: a length line followed by one value per line.
pub fn write_vector(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", v.len())?;
    for x in v {
        writeln!(w, "{x:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate().filter(|(_, l)| match l {
        Ok(s) => !s.trim().is_empty() && !s.trim_start().starts_with('%'),
        Err(_) => true,
    });
    let (_, first) = lines.next().ok_or_else(|| parse_err(1, "empty vector file"))?;
    let len: usize = parse_tok(first?.trim(), 1)?;
    let mut v = Vec::with_capacity(len);
    for (idx, line) in lines {
        v.push(parse_tok(line?.trim(), idx + 1)?);
    }
    if v.len() != len {
        return Err(parse_err(0, &format!("expected {len} values, found {}", v.len())));
    }
    Ok(v)
}

fn parse_tok<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse().map_err(|_| parse_err(line, &format!("cannot parse `{tok}`")))
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse { line, msg: msg.to_string() }
}
