//! Parser for user-supplied algebra files.
//!
//! Grammar (line-oriented, `#` starts a comment, blank lines ignored):
//!
//! ```text
//! name <identifier>        # optional
//! n <matrix size>
//! d <algebra dimension>
//! <d matrices, each n lines of n whitespace-separated reals, row-major>
//! ```

use crate::error::{OrbitqError, Result};
use crate::numerics::RMat;

use super::{GroupTag, MatrixLieAlgebra};

/// Parses the algebra file format and builds the algebra (structure constants,
/// closure checks and all) from the listed basis.
pub fn parse_algebra_file(content: &str) -> Result<MatrixLieAlgebra> {
    let mut name = String::from("user");
    let mut n: Option<usize> = None;
    let mut d: Option<usize> = None;
    let mut numbers: Vec<f64> = Vec::new();

    for (lineno, raw) in content.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let first = tokens.next().unwrap();
        match first {
            "name" => {
                name = tokens
                    .next()
                    .ok_or_else(|| config_err(lineno, "`name` without a value"))?
                    .to_string();
            }
            "n" if n.is_none() => {
                n = Some(parse_usize(tokens.next(), lineno, "n")?);
            }
            "d" if d.is_none() => {
                d = Some(parse_usize(tokens.next(), lineno, "d")?);
            }
            _ => {
                for tok in std::iter::once(first).chain(tokens) {
                    let v: f64 = tok.parse().map_err(|_| {
                        config_err(lineno, &format!("expected a number, found `{tok}`"))
                    })?;
                    numbers.push(v);
                }
            }
        }
    }

    let n = n.ok_or_else(|| OrbitqError::Config("algebra file: missing `n` header".into()))?;
    let d = d.ok_or_else(|| OrbitqError::Config("algebra file: missing `d` header".into()))?;
    let expected = d * n * n;
    if numbers.len() != expected {
        return Err(OrbitqError::Config(format!(
            "algebra file: expected {expected} matrix entries ({d} matrices of {n}x{n}), found {}",
            numbers.len()
        )));
    }
    let basis: Vec<RMat> = (0..d)
        .map(|k| RMat::from_row_slice(n, n, &numbers[k * n * n..(k + 1) * n * n]))
        .collect();
    MatrixLieAlgebra::new(&name, n, basis, GroupTag::None)
}

fn parse_usize(tok: Option<&str>, lineno: usize, field: &str) -> Result<usize> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| config_err(lineno, &format!("`{field}` needs a positive integer")))
}

fn config_err(lineno: usize, msg: &str) -> OrbitqError {
    OrbitqError::Config(format!("algebra file line {}: {msg}", lineno + 1))
}
