//! Subspaces stored by their canonical reduced row-echelon basis.
//!
//! Because the basis is canonical, two subspaces of the same ambient space are
//! equal exactly when their bases are equal entry by entry, so `==` on
//! [`Subspace`] is subspace equality.

use crate::error::{Error, Result};
use crate::matrix::{combine, is_zero_vec, rref_in_place, Matrix, Vector};
use crate::scalar::{Field, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    basis: Matrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(field: Field, ambient: usize) -> Subspace {
        Subspace {
            basis: Matrix::zeros(field, 0, ambient),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: Field, ambient: usize) -> Subspace {
        Subspace {
            basis: Matrix::identity(field, ambient),
            pivots: (0..ambient).collect(),
        }
    }

    /// Row space of `m`.
    pub fn row_space(m: &Matrix) -> Subspace {
        let (basis, pivots) = m.rref();
        Subspace { basis, pivots }
    }

    /// Span of the given vectors inside `field^ambient`.
    pub fn span(field: Field, ambient: usize, vectors: Vec<Vector>) -> Result<Subspace> {
        Ok(Subspace::row_space(&Matrix::from_rows(field, ambient, vectors)?))
    }

    pub fn field(&self) -> Field {
        self.basis.field()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> &[Vector] {
        self.basis.rows()
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivots
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() || self.field() != other.field() {
            return Err(Error::Shape(format!(
                "ambient {} ({}) vs {} ({})",
                self.ambient_dim(),
                self.field(),
                other.ambient_dim(),
                other.field()
            )));
        }
        Ok(())
    }

    /// Membership test by reduction against the canonical basis.
    pub fn contains(&self, v: &[Scalar]) -> bool {
        assert_eq!(v.len(), self.ambient_dim(), "vector length");
        let mut w = v.to_vec();
        for (row, &p) in self.basis.rows().iter().zip(&self.pivots) {
            if w[p].is_zero() {
                continue;
            }
            let f = w[p].clone();
            for (x, b) in w.iter_mut().zip(row) {
                if !b.is_zero() {
                    *x = &*x - &(&f * b);
                }
            }
        }
        is_zero_vec(&w)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.basis_vectors().iter().all(|v| other.contains(v))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        let mut rows: Vec<Vector> = self.basis_vectors().to_vec();
        rows.extend(other.basis_vectors().iter().cloned());
        Subspace::span(self.field(), self.ambient_dim(), rows)
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace::zero(self.field(), self.ambient_dim()));
        }
        // v ∈ U ∩ W  ⟺  v ∈ U and every functional annihilating W kills v.
        let ann = other.annihilator();
        if ann.is_empty() {
            return Ok(self.clone());
        }
        let f = self.field();
        let restricted = Matrix::from_rows(f, self.ambient_dim(), ann)?
            .mul(&self.basis.transpose())?;
        let coeffs = kernel_vectors(&restricted);
        let vectors = coeffs
            .iter()
            .map(|c| combine(f, self.ambient_dim(), c, self.basis_vectors()))
            .collect();
        Subspace::span(f, self.ambient_dim(), vectors)
    }

    /// Functionals (as row vectors) whose common kernel is exactly this space.
    pub fn annihilator(&self) -> Vec<Vector> {
        kernel_vectors(&self.basis)
    }

    /// A basis for `outer` modulo `self`, scanning `outer`'s canonical rows in
    /// order and keeping each row that enlarges the running span.
    pub fn complement_in(&self, outer: &Subspace) -> Result<Vec<Vector>> {
        self.check_ambient(outer)?;
        if !self.is_subspace_of(outer) {
            return Err(Error::NotContained);
        }
        let mut running = self.clone();
        let mut picked = Vec::new();
        for row in outer.basis_vectors() {
            if running.dim() == outer.dim() {
                break;
            }
            if !running.contains(row) {
                running = running.sum(&Subspace::span(
                    self.field(),
                    self.ambient_dim(),
                    vec![row.clone()],
                )?)?;
                picked.push(row.clone());
            }
        }
        Ok(picked)
    }
}

/// Basis of the null space `{x : m·x = 0}`, one vector per free column,
/// ordered by free column index.
pub fn kernel_vectors(m: &Matrix) -> Vec<Vector> {
    let f = m.field();
    let n = m.ncols();
    let mut rows = m.rows().to_vec();
    let pivots = rref_in_place(&mut rows, n);
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..n)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![f.zero(); n];
            v[free] = f.one();
            for (row, &p) in rows.iter().zip(&pivots) {
                v[p] = -&row[free];
            }
            v
        })
        .collect()
}

pub fn map_kernel(m: &Matrix) -> Subspace {
    let vectors = kernel_vectors(m);
    Subspace::span(m.field(), m.ncols(), vectors).expect("kernel vectors are well-shaped")
}

pub fn map_image(m: &Matrix, w: &Subspace) -> Result<Subspace> {
    if m.ncols() != w.ambient_dim() {
        return Err(Error::Shape(format!(
            "map with {} columns applied to a subspace of dimension-{} space",
            m.ncols(),
            w.ambient_dim()
        )));
    }
    let images = w
        .basis_vectors()
        .iter()
        .map(|v| m.apply(v))
        .collect::<Result<Vec<_>>>()?;
    Subspace::span(m.field(), m.nrows(), images)
}

pub fn map_preimage(m: &Matrix, w: &Subspace) -> Result<Subspace> {
    if m.nrows() != w.ambient_dim() {
        return Err(Error::Shape(format!(
            "map with {} rows pulled back from a dimension-{} space",
            m.nrows(),
            w.ambient_dim()
        )));
    }
    let ann = w.annihilator();
    if ann.is_empty() {
        return Ok(Subspace::full(m.field(), m.ncols()));
    }
    let composite = Matrix::from_rows(m.field(), m.nrows(), ann)?.mul(m)?;
    Ok(map_kernel(&composite))
}

/// A particular solution of `m·v = target`: free variables set to zero.
pub fn lift(m: &Matrix, target: &[Scalar]) -> Result<Vector> {
    if target.len() != m.nrows() {
        return Err(Error::Shape(format!(
            "target of length {} for a map with {} rows",
            target.len(),
            m.nrows()
        )));
    }
    let f = m.field();
    let n = m.ncols();
    let mut rows: Vec<Vector> = m
        .rows()
        .iter()
        .zip(target)
        .map(|(row, t)| {
            let mut r = row.clone();
            r.push(t.clone());
            r
        })
        .collect();
    let pivots = rref_in_place(&mut rows, n + 1);
    if pivots.last() == Some(&n) {
        return Err(Error::NotInImage);
    }
    let mut v = vec![f.zero(); n];
    for (row, &p) in rows.iter().zip(&pivots) {
        v[p] = row[n].clone();
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: Field = Field::Rational;

    fn span(rows: &[&[i64]], n: usize) -> Subspace {
        if rows.is_empty() {
            return Subspace::zero(Q, n);
        }
        Subspace::row_space(&Matrix::from_i64(Q, rows))
    }

    fn v(xs: &[i64]) -> Vector {
        xs.iter().map(|&x| Q.from_i64(x)).collect()
    }

    #[test]
    fn sum_examples() {
        let u = span(&[&[1, 1, 0]], 3);
        assert_eq!(u.sum(&Subspace::zero(Q, 3)).unwrap(), u);
        assert_eq!(u.sum(&u).unwrap(), u);
        let x = span(&[&[1, 0]], 2);
        let y = span(&[&[0, 1]], 2);
        assert_eq!(x.sum(&y).unwrap(), Subspace::full(Q, 2));
        assert!(x.sum(&Subspace::zero(Q, 3)).is_err());
    }

    #[test]
    fn intersect_examples() {
        let u = span(&[&[1, 2, 3], &[0, 1, 1]], 3);
        assert_eq!(u.intersect(&u).unwrap(), u);
        let x = span(&[&[1, 0]], 2);
        let y = span(&[&[1, 1]], 2);
        assert!(x.intersect(&y).unwrap().is_zero());
        let plane = span(&[&[1, 0, 0], &[0, 1, 0]], 3);
        let other = span(&[&[0, 1, 0], &[0, 0, 1]], 3);
        assert_eq!(plane.intersect(&other).unwrap(), span(&[&[0, 1, 0]], 3));
    }

    #[test]
    fn image_examples() {
        let w = span(&[&[1, 2, 0]], 3);
        assert_eq!(map_image(&Matrix::identity(Q, 3), &w).unwrap(), w);
        assert!(map_image(&Matrix::zeros(Q, 2, 3), &w).unwrap().is_zero());
        let proj = Matrix::from_i64(Q, &[&[1, 0, 0], &[0, 1, 0]]);
        assert_eq!(
            map_image(&proj, &Subspace::full(Q, 3)).unwrap(),
            Subspace::full(Q, 2)
        );
    }

    #[test]
    fn preimage_examples() {
        let m = Matrix::from_i64(Q, &[&[1, 1, 0], &[0, 0, 0]]);
        assert_eq!(
            map_preimage(&m, &Subspace::full(Q, 2)).unwrap(),
            Subspace::full(Q, 3)
        );
        assert_eq!(
            map_preimage(&m, &Subspace::zero(Q, 2)).unwrap(),
            map_kernel(&m)
        );
        assert!(map_preimage(&m, &Subspace::zero(Q, 3)).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert!(map_kernel(&Matrix::identity(Q, 3)).is_zero());
        assert_eq!(map_kernel(&Matrix::zeros(Q, 2, 3)), Subspace::full(Q, 3));
        let k = map_kernel(&Matrix::from_i64(Q, &[&[1, 2], &[2, 4]]));
        assert_eq!(k, span(&[&[-2, 1]], 2));
    }

    #[test]
    fn complement_examples() {
        let outer = span(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]], 3);
        assert!(outer.complement_in(&outer).unwrap().is_empty());
        let zero = Subspace::zero(Q, 3);
        assert_eq!(zero.complement_in(&outer).unwrap(), outer.basis_vectors());
        let inner = span(&[&[1, 1, 1]], 3);
        let comp = inner.complement_in(&outer).unwrap();
        assert_eq!(comp.len(), 2);
        let mut all = comp.clone();
        all.push(v(&[1, 1, 1]));
        assert_eq!(Subspace::span(Q, 3, all).unwrap().dim(), 3);
        assert!(matches!(
            outer.complement_in(&inner),
            Err(Error::NotContained)
        ));
    }

    #[test]
    fn lift_examples() {
        let id = Matrix::identity(Q, 2);
        assert_eq!(lift(&id, &v(&[3, 4])).unwrap(), v(&[3, 4]));
        let m = Matrix::from_i64(Q, &[&[1, 2, 0], &[2, 4, 1]]);
        assert_eq!(lift(&m, &v(&[0, 0])).unwrap(), v(&[0, 0, 0]));
        let target = v(&[3, 7]);
        let x = lift(&m, &target).unwrap();
        assert_eq!(m.apply(&x).unwrap(), target);
        let rank_deficient = Matrix::from_i64(Q, &[&[1, 2], &[2, 4]]);
        assert!(matches!(
            lift(&rank_deficient, &v(&[1, 1])),
            Err(Error::NotInImage)
        ));
        let y = lift(&rank_deficient, &v(&[1, 2])).unwrap();
        assert_eq!(rank_deficient.apply(&y).unwrap(), v(&[1, 2]));
    }
}
