//! Text formats.
//!
//! Matrices use the `SBM 1` format: a header line `SBM 1 <n> <nnz>` followed
//! by `nnz` lines `<row> <col>`, 0-based, in ascending lexicographic order,
//! LF line endings. Vectors are one per line as whitespace-separated reals.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn write_sbm<W: Write>(m: &SparseBinaryMatrix, mut w: W) -> Result<()> {
    writeln!(w, "SBM 1 {} {}", m.n(), m.nnz())?;
    for &(i, j) in m.ones() {
        writeln!(w, "{i} {j}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn sbm_to_string(m: &SparseBinaryMatrix) -> String {
    let mut buf = Vec::new();
    write_sbm(m, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("ASCII output")
}

pub fn read_sbm<R: BufRead>(r: R) -> Result<SparseBinaryMatrix> {
    let mut lines = r.split(b'\n').enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = String::from_utf8(header?).map_err(|_| parse_err(1, "header is not UTF-8"))?;
    let fields: Vec<&str> = header.split(' ').collect();
    let (n, nnz) = match fields.as_slice() {
        ["SBM", "1", n, nnz] => (
            n.parse::<usize>()
                .map_err(|_| parse_err(1, format!("bad dimension {n:?}")))?,
            nnz.parse::<usize>()
                .map_err(|_| parse_err(1, format!("bad entry count {nnz:?}")))?,
        ),
        _ => return Err(parse_err(1, format!("expected `SBM 1 <n> <nnz>`, got {header:?}"))),
    };
    let mut ones = Vec::with_capacity(nnz);
    for (idx, line) in lines.by_ref() {
        let lineno = idx + 1;
        let line = line?;
        if ones.len() == nnz {
            if line.is_empty() {
                continue;
            }
            return Err(parse_err(lineno, "more entries than announced"));
        }
        let text = std::str::from_utf8(&line).map_err(|_| parse_err(lineno, "not UTF-8"))?;
        if text.ends_with('\r') {
            return Err(parse_err(lineno, "CR line ending"));
        }
        let mut it = text.split(' ');
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(lineno, format!("expected `<row> <col>`, got {text:?}")));
        };
        let i: usize = a.parse().map_err(|_| parse_err(lineno, format!("bad row {a:?}")))?;
        let j: usize = b.parse().map_err(|_| parse_err(lineno, format!("bad column {b:?}")))?;
        if i >= n || j >= n {
            return Err(parse_err(lineno, format!("entry ({i}, {j}) out of range")));
        }
        if let Some(&last) = ones.last() {
            if (i, j) <= last {
                return Err(parse_err(lineno, "entries not strictly ascending"));
            }
        }
        ones.push((i, j));
    }
    if ones.len() != nnz {
        return Err(parse_err(
            ones.len() + 2,
            format!("expected {nnz} entries, found {}", ones.len()),
        ));
    }
    SparseBinaryMatrix::from_ones(n, ones)
}

pub fn sbm_from_str(s: &str) -> Result<SparseBinaryMatrix> {
    read_sbm(s.as_bytes())
}

/// Reads one vector per nonblank line; `#` starts a comment line.
pub fn read_vectors<R: BufRead>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let v = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| parse_err(idx + 1, format!("bad number {tok:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{generate, BernoulliParams};

    #[test]
    fn round_trip() {
        for t in 0..20 {
            let m = generate(&BernoulliParams::new(17, 0.2, 3, t).unwrap()).unwrap();
            let text = sbm_to_string(&m);
            assert_eq!(sbm_from_str(&text).unwrap(), m);
            assert_eq!(sbm_to_string(&sbm_from_str(&text).unwrap()), text);
        }
    }

    #[test]
    fn exact_layout() {
        let m = SparseBinaryMatrix::from_ones(3, vec![(2, 0), (0, 1)]).unwrap();
        assert_eq!(sbm_to_string(&m), "SBM 1 3 2\n0 1\n2 0\n");
        let empty = SparseBinaryMatrix::from_ones(4, vec![]).unwrap();
        assert_eq!(sbm_to_string(&empty), "SBM 1 4 0\n");
        assert_eq!(sbm_from_str("SBM 1 4 0\n").unwrap(), empty);
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "",
            "SBM 2 3 0\n",
            "SBM 1 3 1\n",
            "SBM 1 3 1\n0 3\n",
            "SBM 1 3 2\n1 0\n0 1\n",
            "SBM 1 3 2\n0 1\n0 1\n",
            "SBM 1 3 1\n0 1\n1 1\n",
            "SBM 1 3 1\n0  1\n",
            "SBM 1 3 1\r\n0 1\r\n",
        ] {
            assert!(sbm_from_str(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn vectors() {
        let v = read_vectors("1 2.5 -3\n\n# note\n0 0\n".as_bytes()).unwrap();
        assert_eq!(v, vec![vec![1.0, 2.5, -3.0], vec![0.0, 0.0]]);
        assert!(read_vectors("1 x\n".as_bytes()).is_err());
        assert!(read_vectors("1 NaN\n".as_bytes()).is_err());
    }
}
