//! Plain-text matrix and vector formats.
//!
//! Matrix: a header line `rows cols`, then `rows` lines of `cols`
//! whitespace-separated decimal literals. Vector: a header line `len`, then one
//! value per line. Values are written with 17 significant digits so `f64`
//! round-trips exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn fmt_value<T: Scalar>(out: &mut String, v: T) {
    let _ = write!(out, "{:.16e}", v.to_f64_lossy());
}

pub fn format_matrix<T: Scalar>(a: &DenseMatrix<T>) -> String {
    let mut out = format!("{} {}\n", a.rows(), a.cols());
    for i in 0..a.rows() {
        for (j, &v) in a.row(i).iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            fmt_value(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn format_vector<T: Scalar>(v: &[T]) -> String {
    let mut out = format!("{}\n", v.len());
    for &x in v {
        fmt_value(&mut out, x);
        out.push('\n');
    }
    out
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_num<T: Scalar>(tok: &str, line: usize) -> Result<T> {
    let v: f64 = tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("not a number: {tok:?}"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value {tok:?}"),
        });
    }
    Ok(T::lit(v))
}

fn parse_count(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    tok.and_then(|t| t.parse().ok()).ok_or_else(|| Error::Parse {
        line,
        msg: format!("expected {what}"),
    })
}

pub fn parse_matrix<T: Scalar>(text: &str) -> Result<DenseMatrix<T>> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty matrix file".into(),
    })?;
    let mut toks = header.split_whitespace();
    let rows = parse_count(toks.next(), hline, "row count")?;
    let cols = parse_count(toks.next(), hline, "column count")?;
    if toks.next().is_some() {
        return Err(Error::Parse {
            line: hline,
            msg: "header must be `rows cols`".into(),
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (line, content) in lines {
        if seen == rows {
            return Err(Error::Parse {
                line,
                msg: format!("more than {rows} data rows"),
            });
        }
        let before = data.len();
        for tok in content.split_whitespace() {
            data.push(parse_num(tok, line)?);
        }
        if data.len() - before != cols {
            return Err(Error::Parse {
                line,
                msg: format!("expected {cols} values, found {}", data.len() - before),
            });
        }
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Parse {
            line: hline,
            msg: format!("expected {rows} data rows, found {seen}"),
        });
    }
    DenseMatrix::from_row_major(rows, cols, data)
}

pub fn parse_vector<T: Scalar>(text: &str) -> Result<Vec<T>> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty vector file".into(),
    })?;
    let len = parse_count(Some(header), hline, "vector length")?;
    let mut out = Vec::with_capacity(len);
    for (line, content) in lines {
        for tok in content.split_whitespace() {
            out.push(parse_num(tok, line)?);
        }
    }
    if out.len() != len {
        return Err(Error::Parse {
            line: hline,
            msg: format!("expected {len} values, found {}", out.len()),
        });
    }
    Ok(out)
}

pub fn read_matrix<T: Scalar>(path: impl AsRef<Path>) -> Result<DenseMatrix<T>> {
    parse_matrix(&std::fs::read_to_string(path)?)
}

pub fn write_matrix<T: Scalar>(path: impl AsRef<Path>, a: &DenseMatrix<T>) -> Result<()> {
    std::fs::write(path, format_matrix(a))?;
    Ok(())
}

pub fn read_vector<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    parse_vector(&std::fs::read_to_string(path)?)
}

pub fn write_vector<T: Scalar>(path: impl AsRef<Path>, v: &[T]) -> Result<()> {
    std::fs::write(path, format_vector(v))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_hand_written_matrix() {
        let a: DenseMatrix<f64> = parse_matrix("2 3\n1 2 3\n  4.5 -6e-1 0\n\n").unwrap();
        assert_eq!(a.shape(), (2, 3));
        assert_eq!(a.row(1), &[4.5, -0.6, 0.0]);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_matrix::<f64>("2 2\n1 2\n3\n").is_err());
        assert!(parse_matrix::<f64>("1 2\n1 2\n3 4\n").is_err());
        assert!(parse_matrix::<f64>("1 1\nNaN\n").is_err());
        assert!(parse_matrix::<f64>("").is_err());
        assert!(parse_vector::<f64>("3\n1\n2\n").is_err());
    }

    proptest! {
        #[test]
        fn matrix_text_round_trips_bit_exactly(
            rows in 1usize..5,
            cols in 1usize..5,
            seed in proptest::collection::vec(-1e6f64..1e6, 25),
        ) {
            let data: Vec<f64> = (0..rows * cols).map(|i| seed[i] / 7.0).collect();
            let a = DenseMatrix::from_row_major(rows, cols, data).unwrap();
            let b: DenseMatrix<f64> = parse_matrix(&format_matrix(&a)).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn vector_text_round_trips_bit_exactly(v in proptest::collection::vec(proptest::num::f64::NORMAL, 0..20)) {
            let back: Vec<f64> = parse_vector(&format_vector(&v)).unwrap();
            prop_assert_eq!(v, back);
        }
    }
}
