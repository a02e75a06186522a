//! The natural maps φ between adjacent multidegrees.
//!
//! An edge is a pair (d̲, q) with d̲~ = tilde_q(d̲) nonnegative. The down map
//! φ_{d̲,d̲~} goes d̲ → d̲~ and the up map φ_{d̲~,d̲} goes back. In raw triples:
//!
//! | q | down                      | up                          |
//! |---|---------------------------|-----------------------------|
//! | 1 | (0, u·s2, s3)             | (t·s1, 0, 0)                |
//! | 2 | (t·s1, 0, v·s3)           | (0, u·s2, 0)                |
//! | 3 | (s1, s2, 0)               | (0, 0, v·s3)                |
//!
//! where every polynomial is re-read in the degree chart of the target.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::curve::{ChainCurve, Component, Multidegree, SectionSpace};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// φ_{d̲,d̲~}: from the edge base towards tilde_q.
    Down,
    /// φ_{d̲~,d̲}: back to the edge base.
    Up,
}

/// An edge of the multidegree grid, identified by its base and component.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub base: Multidegree,
    pub q: Component,
}

impl Edge {
    pub fn new(base: Multidegree, q: Component) -> Result<Edge> {
        base.tilde(q).ok_or_else(|| {
            Error::Shape(format!("twisting {base} along {q} leaves the grid"))
        })?;
        Ok(Edge { base, q })
    }

    pub fn tilde(&self) -> Multidegree {
        self.base.tilde(self.q).expect("validated edge")
    }

    /// (domain, codomain) of the map in the given direction.
    pub fn endpoints(&self, dir: Direction) -> (Multidegree, Multidegree) {
        match dir {
            Direction::Down => (self.base, self.tilde()),
            Direction::Up => (self.tilde(), self.base),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferMap {
    pub edge: Edge,
    pub direction: Direction,
    pub source: Multidegree,
    pub target: Multidegree,
    pub matrix: Matrix,
}

impl TransferMap {
    pub fn apply(&self, v: &[Scalar]) -> Vector {
        self.matrix.apply(v).expect("chart vector")
    }
}

/// Multiply by the chart variable and re-read in degree `deg`.
fn shift_into(p: &[Scalar], deg: usize, zero: &Scalar) -> Vector {
    let mut out = Vec::with_capacity(deg + 1);
    out.push(zero.clone());
    out.extend_from_slice(p);
    resize_into(&out, deg, zero)
}

/// Re-read a polynomial in degree `deg`; dropped coefficients must vanish.
fn resize_into(p: &[Scalar], deg: usize, zero: &Scalar) -> Vector {
    debug_assert!(p.iter().skip(deg + 1).all(Scalar::is_zero), "degree overflow");
    let mut out: Vector = p.iter().take(deg + 1).cloned().collect();
    out.resize(deg + 1, zero.clone());
    out
}

fn raw_image(
    q: Component,
    dir: Direction,
    parts: &[Vector; 3],
    target: Multidegree,
    zero: &Scalar,
) -> [Vector; 3] {
    let deg = |c| target.degree_on(c);
    let nothing = |c| vec![zero.clone(); deg(c) + 1];
    use Component::*;
    match (q, dir) {
        (X1, Direction::Down) => [
            nothing(X1),
            shift_into(&parts[1], deg(X2), zero),
            resize_into(&parts[2], deg(X3), zero),
        ],
        (X1, Direction::Up) => [
            shift_into(&parts[0], deg(X1), zero),
            nothing(X2),
            nothing(X3),
        ],
        (X2, Direction::Down) => [
            shift_into(&parts[0], deg(X1), zero),
            nothing(X2),
            shift_into(&parts[2], deg(X3), zero),
        ],
        (X2, Direction::Up) => [
            nothing(X1),
            shift_into(&parts[1], deg(X2), zero),
            nothing(X3),
        ],
        (X3, Direction::Down) => [
            resize_into(&parts[0], deg(X1), zero),
            resize_into(&parts[1], deg(X2), zero),
            nothing(X3),
        ],
        (X3, Direction::Up) => [
            nothing(X1),
            nothing(X2),
            shift_into(&parts[2], deg(X3), zero),
        ],
    }
}

/// Materializes φ for one edge and direction as a matrix between charts.
pub fn phi(c: &ChainCurve, base: Multidegree, q: Component, dir: Direction) -> Result<TransferMap> {
    let edge = Edge::new(base, q)?;
    let (source, target) = edge.endpoints(dir);
    let src = c.ambient(source)?;
    let tgt = c.ambient(target)?;
    let matrix = chart_matrix(&src, &tgt, |parts, zero| raw_image(q, dir, parts, target, zero))?;
    Ok(TransferMap { edge, direction: dir, source, target, matrix })
}

fn chart_matrix(
    src: &SectionSpace,
    tgt: &SectionSpace,
    f: impl Fn(&[Vector; 3], &Scalar) -> [Vector; 3],
) -> Result<Matrix> {
    let field = src.field();
    let zero = field.zero();
    let n = src.dim();
    let mut columns = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![zero.clone(); n];
        e[k] = field.one();
        let image = f(&src.parts(&e), &zero);
        columns.push(tgt.from_parts([&image[0], &image[1], &image[2]])?);
    }
    Ok(Matrix::from_rows(field, tgt.dim(), columns)?.transpose())
}

/// Ordered product of a chainable path; the empty path is the identity on
/// `start`'s chart.
pub fn composite(c: &ChainCurve, start: Multidegree, path: &[&TransferMap]) -> Result<Matrix> {
    let mut here = start;
    let mut acc = Matrix::identity(c.field(), c.d() + 1);
    for step in path {
        if step.source != here {
            return Err(Error::Shape(format!(
                "path step starts at {} but the previous one ended at {here}",
                step.source
            )));
        }
        acc = step.matrix.mul(&acc)?;
        here = step.target;
    }
    Ok(acc)
}

/// A step of a grid path, by edge base cell, component and direction.
pub type PathStep = ((usize, usize), Component, Direction);

/// Every φ of one curve, built eagerly, plus a memo of composites.
pub struct TransferTable {
    curve: ChainCurve,
    maps: HashMap<((usize, usize), Component, Direction), TransferMap>,
    ambients: HashMap<(usize, usize), SectionSpace>,
    composites: RwLock<HashMap<Vec<PathStep>, Matrix>>,
}

impl TransferTable {
    pub fn new(curve: ChainCurve) -> Result<TransferTable> {
        let mut maps = HashMap::new();
        let mut ambients = HashMap::new();
        for md in curve.cells() {
            ambients.insert(md.cell(), curve.ambient(md)?);
            for q in Component::ALL {
                if md.tilde(q).is_none() {
                    continue;
                }
                for dir in [Direction::Down, Direction::Up] {
                    maps.insert((md.cell(), q, dir), phi(&curve, md, q, dir)?);
                }
            }
        }
        Ok(TransferTable { curve, maps, ambients, composites: RwLock::new(HashMap::new()) })
    }

    pub fn curve(&self) -> &ChainCurve {
        &self.curve
    }

    /// The section space at cell (i, l).
    pub fn ambient(&self, cell: (usize, usize)) -> Result<&SectionSpace> {
        self.ambients
            .get(&cell)
            .ok_or(Error::InvalidMultidegree { d: self.curve.d(), i: cell.0, l: cell.1 })
    }

    /// φ for the edge based at cell (i, l).
    pub fn get(&self, cell: (usize, usize), q: Component, dir: Direction) -> Result<&TransferMap> {
        self.maps.get(&(cell, q, dir)).ok_or_else(|| {
            Error::Shape(format!("no {q} edge based at ({}, {})", cell.0, cell.1))
        })
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self
            .maps
            .values()
            .filter(|m| m.direction == Direction::Down)
            .map(|m| m.edge)
            .collect();
        out.sort();
        out
    }

    /// Memoized composite along a path starting at `start`.
    pub fn composite(&self, start: (usize, usize), path: &[PathStep]) -> Result<Matrix> {
        if let Some(m) = self.composites.read().expect("memo lock").get(path) {
            return Ok(m.clone());
        }
        let steps = path
            .iter()
            .map(|&(cell, q, dir)| self.get(cell, q, dir))
            .collect::<Result<Vec<_>>>()?;
        let start = self.curve.multidegree(start.0, start.1)?;
        let m = composite(&self.curve, start, &steps)?;
        self.composites
            .write()
            .expect("memo lock")
            .insert(path.to_vec(), m.clone());
        Ok(m)
    }

    /// Aliases around d̲ = (i, l): d̲' = (i−1, l−1), d̲'' = (i−1, l),
    /// d̲''' = (i, l+1).
    pub fn d_to_dprime(&self, i: usize, l: usize) -> Result<&TransferMap> {
        self.get(prime_cell(i, l)?, Component::X2, Direction::Up)
    }

    pub fn dprime_to_d(&self, i: usize, l: usize) -> Result<&TransferMap> {
        self.get(prime_cell(i, l)?, Component::X2, Direction::Down)
    }

    pub fn d_to_d2(&self, i: usize, l: usize) -> Result<&TransferMap> {
        self.get((i, l), Component::X1, Direction::Down)
    }

    pub fn d2_to_d(&self, i: usize, l: usize) -> Result<&TransferMap> {
        self.get((i, l), Component::X1, Direction::Up)
    }

    pub fn d3_to_d(&self, i: usize, l: usize) -> Result<&TransferMap> {
        self.get((i, l + 1), Component::X3, Direction::Down)
    }

    pub fn d_to_d3(&self, i: usize, l: usize) -> Result<&TransferMap> {
        self.get((i, l + 1), Component::X3, Direction::Up)
    }

    /// φ_{d̲'',d̲'} and its reverse, both on the X3 edge based at d̲''.
    pub fn d2_to_dprime(&self, i: usize, l: usize) -> Result<&TransferMap> {
        self.get((i.wrapping_sub(1), l), Component::X3, Direction::Down)
    }

    pub fn dprime_to_d2(&self, i: usize, l: usize) -> Result<&TransferMap> {
        self.get((i.wrapping_sub(1), l), Component::X3, Direction::Up)
    }
}

impl TransferTable {
    /// φ_{d̲'',d̲'''} and its reverse, on the X2 edge based at d̲''.
    pub fn d2_to_d3(&self, i: usize, l: usize) -> Result<&TransferMap> {
        self.get((i.wrapping_sub(1), l), Component::X2, Direction::Down)
    }

    pub fn d3_to_d2(&self, i: usize, l: usize) -> Result<&TransferMap> {
        self.get((i.wrapping_sub(1), l), Component::X2, Direction::Up)
    }
}

fn prime_cell(i: usize, l: usize) -> Result<(usize, usize)> {
    if i == 0 || l == 0 {
        return Err(Error::Shape(format!("cell ({i}, {l}) has no d̲' neighbour")));
    }
    Ok((i - 1, l - 1))
}

/// Paths from one extreme multidegree to another along the grid boundary.
pub fn extreme_path(d: usize, from: Component, to: Component) -> Option<((usize, usize), Vec<PathStep>)> {
    use Component::*;
    use Direction::*;
    match (from, to) {
        // (d,0,0) → (0,d,0): X1 down from (k,0) for k = d..1
        (X1, X2) => Some(((d, 0), (1..=d).rev().map(|k| ((k, 0), X1, Down)).collect())),
        (X2, X1) => Some(((0, 0), (1..=d).map(|k| ((k, 0), X1, Up)).collect())),
        // (0,d,0) → (0,0,d): X3 up on edges based at (0,k)
        (X2, X3) => Some(((0, 0), (1..=d).map(|k| ((0, k), X3, Up)).collect())),
        (X3, X2) => Some(((0, d), (1..=d).rev().map(|k| ((0, k), X3, Down)).collect())),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Subcurve;
    use crate::scalar::Field;
    use crate::subspace::{map_image, map_kernel, map_preimage};

    const Q: Field = Field::Rational;

    #[test]
    fn down_up_compose_to_zero() {
        let c = ChainCurve::new(4, Q).unwrap();
        let table = TransferTable::new(c).unwrap();
        for e in table.edges() {
            let down = table.get(e.base.cell(), e.q, Direction::Down).unwrap();
            let up = table.get(e.base.cell(), e.q, Direction::Up).unwrap();
            assert!(up.matrix.mul(&down.matrix).unwrap().is_zero());
            assert!(down.matrix.mul(&up.matrix).unwrap().is_zero());
        }
    }

    #[test]
    fn kernels_and_images_are_vanishing_spaces() {
        let c = ChainCurve::new(4, Q).unwrap();
        let table = TransferTable::new(c).unwrap();
        for e in table.edges() {
            for dir in [Direction::Down, Direction::Up] {
                let m = table.get(e.base.cell(), e.q, dir).unwrap();
                let src = c.ambient(m.source).unwrap();
                let tgt = c.ambient(m.target).unwrap();
                // the down map kills X_q^c on the source, the up map kills X_q
                let (killed, lands) = match dir {
                    Direction::Down => (Subcurve::complement_of(e.q), Subcurve::single(e.q)),
                    Direction::Up => (Subcurve::single(e.q), Subcurve::complement_of(e.q)),
                };
                assert_eq!(map_kernel(&m.matrix), src.vanishing_subspace(killed));
                let img = map_image(&m.matrix, &src.full()).unwrap();
                assert_eq!(img, tgt.vanishing_subspace(lands));
            }
        }
    }

    #[test]
    fn two_step_full_path_d2() {
        let c = ChainCurve::new(2, Q).unwrap();
        let table = TransferTable::new(c).unwrap();
        let (start, path) = extreme_path(2, Component::X1, Component::X2).unwrap();
        let m = table.composite(start, &path).unwrap();
        let src = c.ambient(c.multidegree(2, 0).unwrap()).unwrap();
        let tgt = c.ambient(c.multidegree(0, 0).unwrap()).unwrap();
        // (s1, c, c) with s1 = c + 5t + 7t²
        let cst = Q.from_i64(3);
        let s = src
            .from_parts([&[cst.clone(), Q.from_i64(5), Q.from_i64(7)], std::slice::from_ref(&cst), std::slice::from_ref(&cst)])
            .unwrap();
        let parts = tgt.parts(&m.apply(&s).unwrap());
        assert_eq!(parts[0], vec![Q.zero()]);
        assert_eq!(parts[1], vec![Q.zero(), Q.zero(), cst.clone()]);
        assert_eq!(parts[2], vec![cst]);
    }

    #[test]
    fn composite_identities() {
        let c = ChainCurve::new(5, Q).unwrap();
        let table = TransferTable::new(c).unwrap();
        assert_eq!(table.composite((2, 1), &[]).unwrap(), Matrix::identity(Q, 6));
        for i in 1..=5 {
            for l in 1..=5 - i {
                let lhs = table
                    .d2_to_dprime(i, l)
                    .unwrap()
                    .matrix
                    .mul(&table.d_to_d2(i, l).unwrap().matrix)
                    .unwrap();
                assert_eq!(lhs, table.d_to_dprime(i, l).unwrap().matrix);
            }
        }
    }

    #[test]
    fn composite_rejects_broken_path() {
        let c = ChainCurve::new(3, Q).unwrap();
        let table = TransferTable::new(c).unwrap();
        let bad = [((1, 0), Component::X1, Direction::Down), ((3, 0), Component::X1, Direction::Down)];
        assert!(table.composite((1, 0), &bad).is_err());
        assert!(phi(&c, c.multidegree(0, 1).unwrap(), Component::X1, Direction::Down).is_err());
    }

    #[test]
    fn vanishing_preserved_off_q() {
        let c = ChainCurve::new(4, Q).unwrap();
        let table = TransferTable::new(c).unwrap();
        for e in table.edges() {
            let down = table.get(e.base.cell(), e.q, Direction::Down).unwrap();
            let src = c.ambient(down.source).unwrap();
            let tgt = c.ambient(down.target).unwrap();
            for other in Component::ALL.into_iter().filter(|&o| o != e.q) {
                let y = Subcurve::single(other);
                let back = map_preimage(&down.matrix, &tgt.vanishing_subspace(y)).unwrap();
                assert_eq!(back, src.vanishing_subspace(y));
            }
            // φ_up(s) vanishing on X_q forces s to vanish on X_q
            let up = table.get(e.base.cell(), e.q, Direction::Up).unwrap();
            let y = Subcurve::single(e.q);
            let back = map_preimage(&up.matrix, &src.vanishing_subspace(y)).unwrap();
            assert_eq!(back, tgt.vanishing_subspace(y));
        }
    }
}
