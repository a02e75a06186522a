//! Dense matrices over a [`Field`] and exact row reduction.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

/// A vector is a plain row of scalars; its field is implied by its entries.
pub type Vector = Vec<Scalar>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    field: Field,
    cols: usize,
    rows: Vec<Vector>,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            cols,
            rows: vec![vec![field.zero(); cols]; rows],
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for k in 0..n {
            m.rows[k][k] = field.one();
        }
        m
    }

    /// Builds a matrix from rows, checking that they are rectangular and
    /// share the given field.
    pub fn from_rows(field: Field, cols: usize, rows: Vec<Vector>) -> Result<Matrix> {
        for (k, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Shape(format!(
                    "row {k} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            if let Some(s) = row.iter().find(|s| s.field() != field) {
                return Err(Error::Shape(format!(
                    "entry in field {} inside a {field} matrix",
                    s.field()
                )));
            }
        }
        Ok(Matrix { field, cols, rows })
    }

    pub fn from_i64(field: Field, rows: &[&[i64]]) -> Matrix {
        let cols = rows.first().map_or(0, |r| r.len());
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Matrix::from_rows(field, cols, rows).expect("rectangular literal")
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &[Scalar] {
        &self.rows[k]
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.rows[r][c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        debug_assert_eq!(v.field(), self.field);
        self.rows[r][c] = v;
    }

    pub fn into_rows(self) -> Vec<Vector> {
        self.rows
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(Scalar::is_zero)
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.nrows());
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                t.rows[c][r] = v.clone();
            }
        }
        t
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.nrows() {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows(),
                self.cols,
                rhs.nrows(),
                rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.nrows(), rhs.cols);
        for (r, row) in self.rows.iter().enumerate() {
            for (k, a) in row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (c, b) in rhs.rows[k].iter().enumerate() {
                    if !b.is_zero() {
                        out.rows[r][c] = &out.rows[r][c] + &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[Scalar]) -> Result<Vector> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!(
                "vector of length {} for a map with {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| dot(self.field, row, v))
            .collect())
    }

    /// Canonical reduced row-echelon form with zero rows removed, together
    /// with the pivot columns. Pivots are chosen by lowest column index.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut rows = self.rows.clone();
        let pivots = rref_in_place(&mut rows, self.cols);
        rows.truncate(pivots.len());
        (
            Matrix {
                field: self.field,
                cols: self.cols,
                rows,
            },
            pivots,
        )
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }
}

/// Row-reduces `rows` in place; nonzero rows end up first. Returns pivot columns.
pub(crate) fn rref_in_place(rows: &mut [Vector], cols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(next, found);
        let inv = rows[next][col].inverse();
        if !inv.is_one() {
            for v in rows[next][col..].iter_mut() {
                *v = &*v * &inv;
            }
        }
        let (head, tail) = rows.split_at_mut(next);
        let (pivot_row, below) = tail.split_first_mut().expect("pivot row");
        for other in head.iter_mut().chain(below.iter_mut()) {
            if other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for c in col..cols {
                if !pivot_row[c].is_zero() {
                    other[c] = &other[c] - &(&factor * &pivot_row[c]);
                }
            }
        }
        pivots.push(col);
        next += 1;
    }
    pivots
}

pub fn dot(field: Field, a: &[Scalar], b: &[Scalar]) -> Scalar {
    let mut acc = field.zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            acc = &acc + &(x * y);
        }
    }
    acc
}

pub fn is_zero_vec(v: &[Scalar]) -> bool {
    v.iter().all(Scalar::is_zero)
}

/// `Σ coeffs[k] · vectors[k]`.
pub fn combine(field: Field, len: usize, coeffs: &[Scalar], vectors: &[Vector]) -> Vector {
    let mut out = vec![field.zero(); len];
    for (c, v) in coeffs.iter().zip(vectors) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(v) {
            if !x.is_zero() {
                *o = &*o + &(c * x);
            }
        }
    }
    out
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", cells.join(", "))?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    /// Row-major array of canonical scalar strings.
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows.serialize(s)
    }
}

/// Parses a row-major array of scalar strings.
pub fn parse_rows(field: Field, cols: usize, rows: &[Vec<String>]) -> Result<Matrix> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| field.parse(s)).collect::<Result<Vector>>())
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(field, cols, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Field = Field::Rational;

    #[test]
    fn rref_identity_is_fixed() {
        let id = Matrix::identity(Q, 3);
        let (r, p) = id.rref();
        assert_eq!(r, id);
        assert_eq!(p, vec![0, 1, 2]);
    }

    #[test]
    fn rref_zero_matrix_drops_rows() {
        let (r, p) = Matrix::zeros(Q, 2, 3).rref();
        assert_eq!(r.nrows(), 0);
        assert!(p.is_empty());
    }

    #[test]
    fn rref_rank_one() {
        let m = Matrix::from_i64(Q, &[&[2, 4], &[1, 2]]);
        let (r, p) = m.rref();
        assert_eq!(r, Matrix::from_i64(Q, &[&[1, 2]]));
        assert_eq!(p, vec![0]);
    }

    #[test]
    fn rref_fractions() {
        let m = Matrix::from_i64(Q, &[&[2, 1, 0], &[0, 3, 1]]);
        let (r, _) = m.rref();
        assert_eq!(r.get(0, 2).to_string(), "-1/6");
        assert_eq!(r.get(1, 2).to_string(), "1/3");
    }

    #[test]
    fn multiply_and_apply() {
        let a = Matrix::from_i64(Q, &[&[1, 2], &[0, 1]]);
        let b = Matrix::from_i64(Q, &[&[1, 0], &[3, 1]]);
        assert_eq!(a.mul(&b).unwrap(), Matrix::from_i64(Q, &[&[7, 2], &[3, 1]]));
        let v = a.apply(&[Q.from_i64(1), Q.from_i64(1)]).unwrap();
        assert_eq!(v, vec![Q.from_i64(3), Q.from_i64(1)]);
        assert!(a.mul(&Matrix::zeros(Q, 3, 1)).is_err());
    }

    #[test]
    fn serializes_as_strings() {
        let m = Matrix::from_i64(Q, &[&[1, -2]]);
        assert_eq!(serde_json::to_string(&m).unwrap(), r#"[["1","-2"]]"#);
    }
}
