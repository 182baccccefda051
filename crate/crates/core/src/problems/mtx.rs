//! Matrix Market reader and writer.
//!
//! Coordinate and array formats; real, integer, complex and pattern fields;
//! general, symmetric, skew-symmetric and hermitian storage (expanded to full
//! on read). Coordinate duplicates are summed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::{DenseMatrix, Error, Result, RowOperator, Scalar, SparseRowMatrix};

#[derive(Debug, Clone)]
pub enum MatrixMarket {
    Sparse(SparseRowMatrix),
    Dense(DenseMatrix),
}

impl From<MatrixMarket> for RowOperator {
    fn from(m: MatrixMarket) -> Self {
        match m {
            MatrixMarket::Sparse(s) => s.into(),
            MatrixMarket::Dense(d) => d.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Complex,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

impl Symmetry {
    /// Mirror image of an off-diagonal entry.
    fn mirror(self, v: Scalar) -> Option<Scalar> {
        match self {
            Symmetry::General => None,
            Symmetry::Symmetric => Some(v),
            Symmetry::SkewSymmetric => Some(-v),
            Symmetry::Hermitian => Some(v.conj()),
        }
    }
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<RowOperator> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(read_matrix_market(&text, path)?.into())
}

/// Parses file contents; `path` only labels errors.
pub fn read_matrix_market(text: &str, path: &Path) -> Result<MatrixMarket> {
    let fail = |line: usize, message: String| Error::Parse { path: path.to_path_buf(), line, message };
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (_, banner) = lines.next().ok_or_else(|| fail(1, "empty file".into()))?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(fail(1, format!("expected `%%MatrixMarket matrix <format> <field> <symmetry>`, found `{banner}`")));
    }
    let coordinate = match words[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(fail(1, format!("unknown format `{other}`"))),
    };
    let field = match words[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "complex" => Field::Complex,
        "pattern" => Field::Pattern,
        other => return Err(fail(1, format!("unknown field `{other}`"))),
    };
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        "hermitian" => Symmetry::Hermitian,
        other => return Err(fail(1, format!("unknown symmetry `{other}`"))),
    };
    if !coordinate && field == Field::Pattern {
        return Err(fail(1, "pattern field requires coordinate format".into()));
    }
    if symmetry == Symmetry::Hermitian && field != Field::Complex {
        return Err(fail(1, "hermitian symmetry requires a complex field".into()));
    }

    let mut content = lines.filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('%'));
    let mut last_line = text.lines().count();
    let (size_line, size) = content.next().ok_or_else(|| fail(last_line + 1, "missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| fail(size_line, format!("bad size entry `{t}`"))))
        .collect::<Result<_>>()?;
    let expected_dims = if coordinate { 3 } else { 2 };
    if dims.len() != expected_dims {
        return Err(fail(size_line, format!("size line needs {expected_dims} integers, found {}", dims.len())));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetry != Symmetry::General && rows != cols {
        return Err(fail(size_line, format!("{} storage needs a square matrix", words[4])));
    }
    let values_per_entry = match field {
        Field::Pattern => 0,
        Field::Complex => 2,
        _ => 1,
    };
    let parse_value = |line: usize, tokens: &[&str]| -> Result<Scalar> {
        let num = |t: &str| -> Result<f64> {
            let v = if field == Field::Integer {
                t.parse::<i64>().map(|v| v as f64).map_err(|_| fail(line, format!("bad integer `{t}`")))?
            } else {
                t.parse::<f64>().map_err(|_| fail(line, format!("bad number `{t}`")))?
            };
            if !v.is_finite() {
                return Err(fail(line, format!("non-finite value `{t}`")));
            }
            Ok(v)
        };
        Ok(match field {
            Field::Pattern => Scalar::new(1.0, 0.0),
            Field::Complex => Scalar::new(num(tokens[0])?, num(tokens[1])?),
            _ => Scalar::new(num(tokens[0])?, 0.0),
        })
    };

    if coordinate {
        let nnz = dims[2];
        let mut triplets = Vec::with_capacity(nnz * if symmetry == Symmetry::General { 1 } else { 2 });
        for read in 0..nnz {
            let (line, body) =
                content.next().ok_or_else(|| fail(last_line + 1, format!("premature end: {read} of {nnz} entries")))?;
            let tokens: Vec<&str> = body.split_whitespace().collect();
            if tokens.len() != 2 + values_per_entry {
                return Err(fail(line, format!("expected {} fields, found {}", 2 + values_per_entry, tokens.len())));
            }
            let index = |t: &str, bound: usize| -> Result<usize> {
                match t.parse::<usize>() {
                    Ok(v) if (1..=bound).contains(&v) => Ok(v - 1),
                    _ => Err(fail(line, format!("index `{t}` outside 1..={bound}"))),
                }
            };
            let (i, j) = (index(tokens[0], rows)?, index(tokens[1], cols)?);
            let v = parse_value(line, &tokens[2..])?;
            triplets.push((i, j, v));
            if i != j {
                if let Some(mv) = symmetry.mirror(v) {
                    triplets.push((j, i, mv));
                }
            }
        }
        if let Some((line, _)) = content.next() {
            return Err(fail(line, format!("more than the declared {nnz} entries")));
        }
        let m = SparseRowMatrix::from_triplets(rows, cols, triplets).map_err(|e| fail(size_line, e.to_string()))?;
        return Ok(MatrixMarket::Sparse(m));
    }

    // Array storage is column-major; symmetric kinds store the lower triangle.
    let mut positions = Vec::new();
    for j in 0..cols {
        let start = match symmetry {
            Symmetry::General => 0,
            Symmetry::SkewSymmetric => j + 1,
            _ => j,
        };
        positions.extend((start..rows).map(|i| (i, j)));
    }
    let mut values = vec![Scalar::new(0.0, 0.0); rows * cols];
    for (read, &(i, j)) in positions.iter().enumerate() {
        let (line, body) = content
            .next()
            .ok_or_else(|| fail(last_line + 1, format!("premature end: {read} of {} values", positions.len())))?;
        last_line = line;
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if tokens.len() != values_per_entry {
            return Err(fail(line, format!("expected {values_per_entry} fields, found {}", tokens.len())));
        }
        let v = parse_value(line, &tokens)?;
        values[i * cols + j] = v;
        if i != j {
            if let Some(mv) = symmetry.mirror(v) {
                values[j * cols + i] = mv;
            }
        }
    }
    if let Some((line, _)) = content.next() {
        return Err(fail(line, format!("more than the declared {} values", positions.len())));
    }
    Ok(MatrixMarket::Dense(DenseMatrix::new(rows, cols, values)?))
}

/// Coordinate/general file; the field is `real` when every imaginary part is
/// zero, `complex` otherwise. Numbers use shortest round-trip formatting.
pub fn write_matrix_market(path: impl AsRef<Path>, m: &SparseRowMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix_market(m)).map_err(|e| Error::io(path, e))
}

pub(crate) fn format_matrix_market(m: &SparseRowMatrix) -> String {
    let complex = m.triplets().any(|(_, _, v)| v.im != 0.0);
    let mut out = format!(
        "%%MatrixMarket matrix coordinate {} general\n{} {} {}\n",
        if complex { "complex" } else { "real" },
        m.rows(),
        m.cols(),
        m.nnz()
    );
    for (i, j, v) in m.triplets() {
        if complex {
            let _ = writeln!(out, "{} {} {:e} {:e}", i + 1, j + 1, v.re, v.im);
        } else {
            let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v.re);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Rng;

    fn parse(text: &str) -> Result<MatrixMarket> {
        read_matrix_market(text, Path::new("test.mtx"))
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn identity_coordinate() {
        let op: RowOperator =
            parse("%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1.0\n2 2 1\n").unwrap().into();
        let x = vec![Scalar::new(3.0, 1.0), Scalar::new(-2.0, 0.0)];
        assert_eq!(op.apply(&x).unwrap(), x);
    }

    #[test]
    fn symmetric_lower_triangle_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n1 1 2\n2 1 -1\n3 2 4.5\n3 3 1\n";
        let op: RowOperator = parse(text).unwrap().into();
        let d = op.to_dense().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(d.get(i, j), d.get(j, i));
            }
        }
        assert_eq!(d.get(0, 1), Scalar::new(-1.0, 0.0));
    }

    #[test]
    fn hermitian_and_skew_expansion() {
        let text = "%%MatrixMarket matrix coordinate complex hermitian\n2 2 2\n1 1 1 0\n2 1 1 2\n";
        let d = RowOperator::from(parse(text).unwrap()).to_dense().unwrap();
        assert_eq!(d.get(0, 1), Scalar::new(1.0, -2.0));
        let text = "%%MatrixMarket matrix array real skew-symmetric\n2 2\n3\n";
        let d = RowOperator::from(parse(text).unwrap()).to_dense().unwrap();
        assert_eq!((d.get(1, 0).re, d.get(0, 1).re), (3.0, -3.0));
    }

    #[test]
    fn array_and_pattern_and_duplicates() {
        let d = RowOperator::from(parse("%%MatrixMarket matrix array integer general\n2 2\n1\n2\n3\n4\n").unwrap())
            .to_dense()
            .unwrap();
        assert_eq!(d.get(1, 0).re, 2.0);
        assert_eq!(d.get(0, 1).re, 3.0);
        let s = parse("%%MatrixMarket matrix coordinate pattern general\n2 3 3\n1 3\n2 1\n1 3\n").unwrap();
        let d = RowOperator::from(s).to_dense().unwrap();
        assert_eq!(d.get(0, 2).re, 2.0);
        assert_eq!(d.get(1, 0).re, 1.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            line_of(parse("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 1\n2 2 1\n").unwrap_err()),
            5
        );
        assert_eq!(line_of(parse("%%MatrixMarket vector coordinate real general\n").unwrap_err()), 1);
        assert_eq!(
            line_of(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n% x\n3 1 1\n").unwrap_err()),
            4
        );
        assert_eq!(line_of(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n").unwrap_err()), 3);
        assert_eq!(
            line_of(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 1\n2 2 2\n").unwrap_err()),
            4
        );
        assert_eq!(line_of(parse("%%MatrixMarket matrix coordinate real symmetric\n2 3 1\n1 1 1\n").unwrap_err()), 2);
    }

    #[test]
    fn write_read_round_trip() {
        let mut rng = Rng::new(17);
        for complex in [false, true] {
            let mut triplets = Vec::new();
            for _ in 0..60 {
                let v = Scalar::new(rng.normal() * 1e3, if complex { rng.normal() * 1e-5 } else { 0.0 });
                triplets.push((rng.below(12), rng.below(9), v));
            }
            let m = SparseRowMatrix::from_triplets(12, 9, triplets).unwrap();
            let back = match parse(&format_matrix_market(&m)).unwrap() {
                MatrixMarket::Sparse(s) => s,
                MatrixMarket::Dense(_) => unreachable!(),
            };
            assert_eq!(back.offsets(), m.offsets());
            assert_eq!(back.triplets().collect::<Vec<_>>(), m.triplets().collect::<Vec<_>>());
        }
    }
}
