//! Plain-text matrix/vector format shared with the CLI.
//!
//! First line: "ROWS COLS". Then ROWS lines of COLS whitespace-separated
//! entries, each entry "re,im". Values are printed with Rust's shortest
//! round-trip `f64` formatting, so write → parse reproduces every bit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mat::CMat;

fn parse_f64(tok: &str, line: usize, what: &str) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} from {tok:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("{what} is not finite: {tok:?}"),
        });
    }
    Ok(v)
}

fn parse_entry(tok: &str, line: usize) -> Result<Complex64> {
    let (re, im) = tok.split_once(',').ok_or_else(|| Error::Parse {
        line,
        msg: format!("entry {tok:?} is not of the form re,im"),
    })?;
    Ok(Complex64::new(
        parse_f64(re, line, "real part")?,
        parse_f64(im, line, "imaginary part")?,
    ))
}

/// Parse the text format. Blank lines (and lines of only whitespace) are
/// ignored; everything else must follow the header's shape exactly.
pub fn parse_matrix(text: &str) -> Result<CMat> {
    // (1-based line number, content) for non-blank lines.
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty input: expected a \"ROWS COLS\" header".into(),
    })?;
    let mut hparts = header.split_whitespace();
    let rows: usize = hparts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse {
            line: hline,
            msg: format!("bad header {header:?}: expected \"ROWS COLS\""),
        })?;
    let cols: usize = hparts
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse {
            line: hline,
            msg: format!("bad header {header:?}: expected \"ROWS COLS\""),
        })?;
    if hparts.next().is_some() {
        return Err(Error::Parse {
            line: hline,
            msg: "header has more than two fields".into(),
        });
    }
    if rows == 0 || cols == 0 {
        return Err(Error::ZeroDimension);
    }

    let mut m = CMat::zeros(rows, cols);
    for r in 0..rows {
        let (lno, l) = lines.next().ok_or(Error::Parse {
            line: hline,
            msg: format!("expected {rows} data rows, found {r}"),
        })?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != cols {
            return Err(Error::Parse {
                line: lno,
                msg: format!("expected {cols} entries, found {}", toks.len()),
            });
        }
        for (c, tok) in toks.iter().enumerate() {
            m[(r, c)] = parse_entry(tok, lno)?;
        }
    }
    if let Some((lno, _)) = lines.next() {
        return Err(Error::Parse {
            line: lno,
            msg: "trailing content after the last data row".into(),
        });
    }
    Ok(m)
}

/// Render the text format (shortest round-trip decimals).
pub fn format_matrix(m: &CMat) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", m.rows(), m.cols()));
    for r in 0..m.rows() {
        let row: Vec<String> = m
            .row(r)
            .iter()
            .map(|z| format!("{},{}", z.re, z.im))
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// Parse a vector: a matrix with a single column (preferred) or single row.
pub fn parse_vector(text: &str) -> Result<Vec<Complex64>> {
    let m = parse_matrix(text)?;
    if m.cols() == 1 {
        Ok((0..m.rows()).map(|r| m[(r, 0)]).collect())
    } else if m.rows() == 1 {
        Ok(m.row(0).to_vec())
    } else {
        Err(Error::Parse {
            line: 1,
            msg: format!(
                "expected a vector (one row or one column), got {}x{}",
                m.rows(),
                m.cols()
            ),
        })
    }
}

/// Render a vector as a single-column matrix.
pub fn format_vector(v: &[Complex64]) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} 1\n", v.len()));
    for z in v {
        out.push_str(&format!("{},{}\n", z.re, z.im));
    }
    out
}
