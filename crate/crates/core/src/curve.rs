//! The chain X = X1 ∪ X2 ∪ X3 of rational curves, the line bundles of each
//! multidegree on it, and their spaces of global sections.
//!
//! Coordinates: on X1 the node A sits at t = 0; on X2 the node A sits at u = 0
//! and B at u = ∞; on X3 the node B sits at v = 0. A section of multidegree
//! (i, m, l) is a triple (s1, s2, s3) of polynomials of degrees ≤ i, ≤ m, ≤ l
//! with s1(0) = s2(0) and top_m(s2) = s3(0), where top_m is the coefficient of
//! u^m (the value at ∞ in the degree-m trivialization).
//!
//! Each component's full line bundle L_{X_q} has degree d on X_q, so its
//! sections are identified with polynomials of degree ≤ d; subspaces of that
//! space are the component series.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Vector};
use crate::scalar::Field;
use crate::subspace::{kernel_vectors, map_kernel, Subspace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    X1,
    X2,
    X3,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::X1, Component::X2, Component::X3];

    pub fn index(self) -> usize {
        match self {
            Component::X1 => 1,
            Component::X2 => 2,
            Component::X3 => 3,
        }
    }

    pub fn from_index(q: usize) -> Result<Component> {
        match q {
            1 => Ok(Component::X1),
            2 => Ok(Component::X2),
            3 => Ok(Component::X3),
            _ => Err(Error::Shape(format!("no component X{q}"))),
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X{}", self.index())
    }
}

/// A nonempty or empty union of components, as a bit set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Subcurve(u8);

impl Subcurve {
    pub const X: Subcurve = Subcurve(0b111);

    pub fn of(comps: &[Component]) -> Subcurve {
        Subcurve(comps.iter().fold(0, |acc, c| acc | (1 << (c.index() - 1))))
    }

    pub fn single(c: Component) -> Subcurve {
        Subcurve::of(&[c])
    }

    /// X_q^c, the closure of the complement of one component.
    pub fn complement_of(c: Component) -> Subcurve {
        Subcurve::single(c).complement()
    }

    pub fn complement(self) -> Subcurve {
        Subcurve(!self.0 & 0b111)
    }

    pub fn contains(self, c: Component) -> bool {
        self.0 & (1 << (c.index() - 1)) != 0
    }

    pub fn components(self) -> impl Iterator<Item = Component> {
        Component::ALL.into_iter().filter(move |&c| self.contains(c))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Subcurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.components().map(|c| c.to_string()).collect();
        write!(f, "{}", names.join("∪"))
    }
}

/// The two nodes of the chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    A,
    B,
}

/// A point of a component chart where vanishing orders are read off.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ChartPoint {
    /// Order = index of the lowest nonzero coefficient.
    Zero,
    /// Order = n − degree, for sections of a degree-≤n chart.
    Infinity,
}

impl Component {
    /// Where a node sits in this component's chart, if it lies on it.
    pub fn chart_point(self, node: Node) -> Result<ChartPoint> {
        match (self, node) {
            (Component::X1, Node::A) | (Component::X2, Node::A) | (Component::X3, Node::B) => {
                Ok(ChartPoint::Zero)
            }
            (Component::X2, Node::B) => Ok(ChartPoint::Infinity),
            _ => Err(Error::Shape(format!("{self} does not contain node {node:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Multidegree {
    pub i: usize,
    pub mid: usize,
    pub l: usize,
}

impl Multidegree {
    pub fn total(&self) -> usize {
        self.i + self.mid + self.l
    }

    pub fn degree_on(&self, c: Component) -> usize {
        match c {
            Component::X1 => self.i,
            Component::X2 => self.mid,
            Component::X3 => self.l,
        }
    }

    /// The neighbour reached by twisting along component `q`, if it is
    /// nonnegative: q=1 gives (i−1, m+1, l), q=2 gives (i+1, m−2, l+1),
    /// q=3 gives (i, m+1, l−1).
    pub fn tilde(&self, q: Component) -> Option<Multidegree> {
        let Multidegree { i, mid, l } = *self;
        match q {
            Component::X1 => (i >= 1).then(|| Multidegree { i: i - 1, mid: mid + 1, l }),
            Component::X2 => (mid >= 2).then(|| Multidegree { i: i + 1, mid: mid - 2, l: l + 1 }),
            Component::X3 => (l >= 1).then(|| Multidegree { i, mid: mid + 1, l: l - 1 }),
        }
    }

    pub fn cell(&self) -> (usize, usize) {
        (self.i, self.l)
    }
}

impl fmt::Display for Multidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.i, self.mid, self.l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ChainCurve {
    d: usize,
    field: Field,
}

impl ChainCurve {
    pub fn new(d: usize, field: Field) -> Result<ChainCurve> {
        if d == 0 {
            return Err(Error::InvalidInstance("total degree must be at least 1".into()));
        }
        Ok(ChainCurve { d, field })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn multidegree(&self, i: usize, l: usize) -> Result<Multidegree> {
        if i + l > self.d {
            return Err(Error::InvalidMultidegree { d: self.d, i, l });
        }
        Ok(Multidegree { i, mid: self.d - i - l, l })
    }

    /// Every valid multidegree, ordered by (i, l).
    pub fn cells(&self) -> Vec<Multidegree> {
        (0..=self.d)
            .flat_map(|i| (0..=self.d - i).map(move |l| (i, l)))
            .map(|(i, l)| self.multidegree(i, l).expect("in range"))
            .collect()
    }

    /// The multidegree concentrating all degree on one component.
    pub fn extreme(&self, q: Component) -> Multidegree {
        match q {
            Component::X1 => self.multidegree(self.d, 0),
            Component::X2 => self.multidegree(0, 0),
            Component::X3 => self.multidegree(0, self.d),
        }
        .expect("extreme multidegrees are valid")
    }

    /// Dimension of each component series ambient: polynomials of degree ≤ d.
    pub fn component_dim(&self) -> usize {
        self.d + 1
    }

    pub fn ambient(&self, md: Multidegree) -> Result<SectionSpace> {
        if md.total() != self.d {
            return Err(Error::InvalidMultidegree { d: self.d, i: md.i, l: md.l });
        }
        Ok(SectionSpace::new(*self, md))
    }

    /// Restriction to X_q followed by the inclusion into the sections of
    /// L_{X_q}: s1 ↦ t^{d−i} s1, s2 ↦ u^i s2, s3 ↦ v^{d−l} s3.
    pub fn alpha(&self, md: Multidegree, q: Component) -> Result<Matrix> {
        Ok(self.ambient(md)?.alpha(q))
    }
}

/// Global sections of L_d̲ in a fixed chart of dimension d+1.
#[derive(Clone, Debug)]
pub struct SectionSpace {
    curve: ChainCurve,
    md: Multidegree,
    raw_dim: usize,
    /// raw = embed · chart.
    embed: Matrix,
    free_cols: Vec<usize>,
}

impl SectionSpace {
    fn new(curve: ChainCurve, md: Multidegree) -> SectionSpace {
        let f = curve.field;
        let raw_dim = md.i + md.mid + md.l + 3;
        let mut constraints = Matrix::zeros(f, 2, raw_dim);
        // s1(0) − s2(0) = 0
        constraints.set(0, 0, f.one());
        constraints.set(0, md.i + 1, -&f.one());
        // top_m(s2) − s3(0) = 0
        constraints.set(1, md.i + 1 + md.mid, f.one());
        constraints.set(1, md.i + md.mid + 2, -&f.one());
        let kernel = kernel_vectors(&constraints);
        let free_cols = kernel
            .iter()
            .map(|v| v.iter().position(|s| s.is_one()).expect("free column"))
            .collect();
        let embed = Matrix::from_rows(f, raw_dim, kernel)
            .expect("kernel rows")
            .transpose();
        debug_assert_eq!(embed.ncols(), curve.d + 1);
        SectionSpace { curve, md, raw_dim, embed, free_cols }
    }

    pub fn multidegree(&self) -> Multidegree {
        self.md
    }

    pub fn curve(&self) -> ChainCurve {
        self.curve
    }

    pub fn field(&self) -> Field {
        self.curve.field
    }

    /// Always d + 1.
    pub fn dim(&self) -> usize {
        self.embed.ncols()
    }

    pub fn raw_dim(&self) -> usize {
        self.raw_dim
    }

    pub fn full(&self) -> Subspace {
        Subspace::full(self.field(), self.dim())
    }

    pub fn zero(&self) -> Subspace {
        Subspace::zero(self.field(), self.dim())
    }

    /// Coefficient positions of the polynomial on `q` inside a raw triple.
    pub fn block(&self, q: Component) -> Range<usize> {
        let Multidegree { i, mid, l } = self.md;
        match q {
            Component::X1 => 0..i + 1,
            Component::X2 => i + 1..i + mid + 2,
            Component::X3 => i + mid + 2..i + mid + l + 3,
        }
    }

    /// The raw triple of a chart vector.
    pub fn to_raw(&self, chart: &[crate::scalar::Scalar]) -> Vector {
        self.embed.apply(chart).expect("chart vector length")
    }

    /// Chart coordinates of a raw triple; fails when the gluing conditions
    /// are violated.
    pub fn from_raw(&self, raw: &[crate::scalar::Scalar]) -> Result<Vector> {
        if raw.len() != self.raw_dim {
            return Err(Error::Shape(format!(
                "raw triple of length {} for multidegree {}",
                raw.len(),
                self.md
            )));
        }
        let chart: Vector = self.free_cols.iter().map(|&c| raw[c].clone()).collect();
        if self.to_raw(&chart) != raw {
            return Err(Error::InvalidInstance(format!(
                "triple does not glue at the nodes for multidegree {}",
                self.md
            )));
        }
        Ok(chart)
    }

    /// Chart vector from the three component polynomials.
    pub fn from_parts(&self, parts: [&[crate::scalar::Scalar]; 3]) -> Result<Vector> {
        let raw: Vector = parts.iter().flat_map(|p| p.iter().cloned()).collect();
        self.from_raw(&raw)
    }

    /// The three component polynomials of a chart vector.
    pub fn parts(&self, chart: &[crate::scalar::Scalar]) -> [Vector; 3] {
        let raw = self.to_raw(chart);
        Component::ALL.map(|q| raw[self.block(q)].to_vec())
    }

    /// The polynomial on X_q, in that component's degree-`deg_q` chart.
    pub fn restriction(&self, q: Component) -> Matrix {
        let rows = self.embed.rows()[self.block(q)].to_vec();
        Matrix::from_rows(self.field(), self.dim(), rows).expect("embed rows")
    }

    /// Degree shift applied by α_q.
    fn alpha_shift(&self, q: Component) -> usize {
        let d = self.curve.d;
        match q {
            Component::X1 => d - self.md.i,
            Component::X2 => self.md.i,
            Component::X3 => d - self.md.l,
        }
    }

    pub fn alpha(&self, q: Component) -> Matrix {
        let f = self.field();
        let n = self.curve.d + 1;
        let shift = self.alpha_shift(q);
        let restr = self.restriction(q);
        let mut out = Matrix::zeros(f, n, self.dim());
        for (k, row) in restr.rows().iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                out.set(k + shift, c, v.clone());
            }
        }
        out
    }

    /// Sections vanishing identically on every component of `y`.
    pub fn vanishing_subspace(&self, y: Subcurve) -> Subspace {
        let rows: Vec<Vector> = y
            .components()
            .flat_map(|q| self.restriction(q).into_rows())
            .collect();
        if rows.is_empty() {
            return self.full();
        }
        map_kernel(&Matrix::from_rows(self.field(), self.dim(), rows).expect("restriction rows"))
    }

    /// V^{Y,0} for a subspace V of this section space.
    pub fn vanishing_part(&self, v: &Subspace, y: Subcurve) -> Subspace {
        v.intersect(&self.vanishing_subspace(y)).expect("same ambient")
    }
}

/// Polynomials in `v` vanishing to order ≥ `ord_zero` at 0 and ≥ `ord_inf`
/// at ∞ (for a degree-≤n chart, n = ambient − 1).
pub fn twist(v: &Subspace, ord_zero: usize, ord_inf: usize) -> Subspace {
    let n = v.ambient_dim();
    let f = v.field();
    let hi = n.saturating_sub(ord_inf); // exclusive upper bound on exponents
    let window: Vec<Vector> = (ord_zero..hi.max(ord_zero))
        .map(|k| {
            let mut e = vec![f.zero(); n];
            e[k] = f.one();
            e
        })
        .collect();
    let window = Subspace::span(f, n, window).expect("unit vectors");
    v.intersect(&window).expect("same ambient")
}

pub fn twist_at(v: &Subspace, point: ChartPoint, ord: usize) -> Subspace {
    match point {
        ChartPoint::Zero => twist(v, ord, 0),
        ChartPoint::Infinity => twist(v, 0, ord),
    }
}

/// V(−ord_a·A − ord_b·B) for a series living on component `c`; orders at a
/// node not on `c` are ignored.
pub fn component_twist(c: Component, v: &Subspace, ord_a: usize, ord_b: usize) -> Subspace {
    match c {
        Component::X1 => twist(v, ord_a, 0),
        Component::X2 => twist(v, ord_a, ord_b),
        Component::X3 => twist(v, ord_b, 0),
    }
}

/// Orders o with dim V(−oP) > dim V(−(o+1)P), increasing.
pub fn vanishing_sequence_at(v: &Subspace, point: ChartPoint) -> Result<Vec<usize>> {
    if v.is_zero() {
        return Err(Error::EmptySeries);
    }
    let n = v.ambient_dim();
    let dims: Vec<usize> = (0..=n).map(|o| twist_at(v, point, o).dim()).collect();
    Ok((0..n).filter(|&o| dims[o] > dims[o + 1]).collect())
}

pub fn vanishing_sequence(v: &Subspace, c: Component, node: Node) -> Result<Vec<usize>> {
    vanishing_sequence_at(v, c.chart_point(node)?)
}

/// Orders of vanishing, or the empty list for the zero space.
pub fn orders_or_empty(v: &Subspace, point: ChartPoint) -> Vec<usize> {
    vanishing_sequence_at(v, point).unwrap_or_default()
}

/// A linear series on one component, inside the degree-≤d polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentSeries {
    pub component: Component,
    pub space: Subspace,
}

impl ComponentSeries {
    pub fn new(component: Component, space: Subspace) -> ComponentSeries {
        ComponentSeries { component, space }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn twist(&self, ord_a: usize, ord_b: usize) -> Subspace {
        component_twist(self.component, &self.space, ord_a, ord_b)
    }

    pub fn vanishing_sequence(&self, node: Node) -> Result<Vec<usize>> {
        vanishing_sequence(&self.space, self.component, node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Scalar;
    use crate::subspace::{map_image, map_kernel};

    const Q: Field = Field::Rational;

    fn poly_span(n: usize, polys: &[&[i64]]) -> Subspace {
        let rows = polys
            .iter()
            .map(|p| {
                let mut v: Vec<Scalar> = p.iter().map(|&x| Q.from_i64(x)).collect();
                v.resize(n, Q.zero());
                v
            })
            .collect();
        Subspace::span(Q, n, rows).unwrap()
    }

    #[test]
    fn ambient_dimensions() {
        let c2 = ChainCurve::new(2, Q).unwrap();
        assert_eq!(c2.ambient(c2.multidegree(2, 0).unwrap()).unwrap().dim(), 3);
        let c4 = ChainCurve::new(4, Q).unwrap();
        assert_eq!(c4.ambient(c4.multidegree(1, 1).unwrap()).unwrap().dim(), 5);
        let c1 = ChainCurve::new(1, Q).unwrap();
        assert_eq!(c1.ambient(c1.multidegree(0, 0).unwrap()).unwrap().dim(), 2);
        for md in c4.cells() {
            assert_eq!(c4.ambient(md).unwrap().dim(), 5);
        }
    }

    #[test]
    fn invalid_multidegree_rejected() {
        let c = ChainCurve::new(3, Q).unwrap();
        assert!(matches!(
            c.multidegree(2, 2),
            Err(Error::InvalidMultidegree { .. })
        ));
        assert!(ChainCurve::new(0, Q).is_err());
        assert!(Component::from_index(4).is_err());
    }

    #[test]
    fn alpha_rank_at_extremes() {
        let d = 4;
        let c = ChainCurve::new(d, Q).unwrap();
        let mid = c.alpha(c.extreme(Component::X2), Component::X2).unwrap();
        assert_eq!(mid.rank(), d + 1);
        assert_eq!(c.alpha(c.extreme(Component::X1), Component::X1).unwrap().rank(), d + 1);
        assert_eq!(c.alpha(c.extreme(Component::X3), Component::X3).unwrap().rank(), d + 1);
        // s2 is a constant at (d,0,0)
        assert_eq!(c.alpha(c.extreme(Component::X1), Component::X2).unwrap().rank(), 1);
    }

    #[test]
    fn alpha_lands_in_twisted_space() {
        let c = ChainCurve::new(5, Q).unwrap();
        for md in c.cells() {
            let s = c.ambient(md).unwrap();
            let full = Subspace::full(Q, 6);
            for (q, a, b) in [
                (Component::X1, 5 - md.i, 0),
                (Component::X2, md.i, md.l),
                (Component::X3, 0, 5 - md.l),
            ] {
                let img = map_image(&s.alpha(q), &s.full()).unwrap();
                assert!(img.is_subspace_of(&component_twist(q, &full, a, b)));
            }
        }
    }

    #[test]
    fn kernel_of_alpha_is_vanishing_subspace() {
        let c = ChainCurve::new(4, Q).unwrap();
        for md in c.cells() {
            let s = c.ambient(md).unwrap();
            for q in Component::ALL {
                assert_eq!(
                    map_kernel(&s.alpha(q)),
                    s.vanishing_subspace(Subcurve::single(q))
                );
            }
        }
    }

    #[test]
    fn twist_examples() {
        let full = Subspace::full(Q, 5);
        assert_eq!(twist(&full, 0, 0), full);
        assert_eq!(twist(&full, 2, 1), poly_span(5, &[&[0, 0, 1], &[0, 0, 0, 1]]));
        assert!(twist(&full, 5, 0).is_zero());
        assert!(twist(&full, 3, 3).is_zero());
    }

    #[test]
    fn vanishing_sequence_examples() {
        let full = Subspace::full(Q, 5);
        assert_eq!(vanishing_sequence_at(&full, ChartPoint::Zero).unwrap(), vec![0, 1, 2, 3, 4]);
        let v = poly_span(5, &[&[1], &[0, 0, 0, 0, 1]]);
        assert_eq!(vanishing_sequence_at(&v, ChartPoint::Zero).unwrap(), vec![0, 4]);
        assert_eq!(vanishing_sequence_at(&v, ChartPoint::Infinity).unwrap(), vec![0, 4]);
        let w = poly_span(5, &[&[0, 1], &[0, 0, 0, 1]]);
        assert_eq!(vanishing_sequence_at(&w, ChartPoint::Zero).unwrap(), vec![1, 3]);
        assert_eq!(vanishing_sequence_at(&w, ChartPoint::Infinity).unwrap(), vec![1, 3]);
        let witness = poly_span(5, &[&[0, 0, 1], &[1, 0, 0, 0, 1]]);
        assert_eq!(vanishing_sequence_at(&witness, ChartPoint::Zero).unwrap(), vec![0, 2]);
        assert_eq!(vanishing_sequence_at(&witness, ChartPoint::Infinity).unwrap(), vec![0, 2]);
        assert!(matches!(
            vanishing_sequence_at(&Subspace::zero(Q, 5), ChartPoint::Zero),
            Err(Error::EmptySeries)
        ));
        assert!(vanishing_sequence(&full, Component::X1, Node::B).is_err());
    }

    #[test]
    fn vanishing_subspace_examples() {
        let c = ChainCurve::new(4, Q).unwrap();
        let s = c.ambient(c.multidegree(1, 1).unwrap()).unwrap();
        assert!(s.vanishing_subspace(Subcurve::X).is_zero());
        let mid = c.ambient(c.extreme(Component::X2)).unwrap();
        assert!(mid.vanishing_subspace(Subcurve::single(Component::X2)).is_zero());
        // On (1,2,1): kill s1 (2 coefficients, one of them glued to s2(0)).
        let v1 = s.vanishing_subspace(Subcurve::single(Component::X1));
        assert_eq!(v1, map_kernel(&s.restriction(Component::X1)));
        assert_eq!(v1.dim(), 3);
    }

    #[test]
    fn parts_round_trip_and_gluing() {
        let c = ChainCurve::new(3, Q).unwrap();
        let s = c.ambient(c.multidegree(1, 1).unwrap()).unwrap();
        let one = Q.one();
        let two = Q.from_i64(2);
        let zero = Q.zero();
        let chart = s
            .from_parts([&[one.clone(), two.clone()], &[one.clone(), two.clone()], &[two.clone(), zero.clone()]])
            .unwrap();
        let parts = s.parts(&chart);
        assert_eq!(parts[1], vec![one.clone(), two.clone()]);
        assert!(s
            .from_parts([&[one.clone(), two.clone()], &[two.clone(), two.clone()], &[two, zero]])
            .is_err());
    }
}
