//! The kernel spaces K_il of a refined Eisenbud–Harris series and executable
//! versions of the statements made about them.

use std::collections::BTreeMap;

use crate::curve::{
    orders_or_empty, ChainCurve, ChartPoint, Component, ComponentSeries, Node, SectionSpace,
    Subcurve,
};
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::report::{CheckRecord, Report};
use crate::subspace::{map_image, map_preimage, Subspace};
use crate::transfer::TransferTable;

/// The input h = (V_X1, V_X2, V_X3) together with its vanishing sequences:
/// a of V_X1 at A, b of V_X2 at A, b′ of V_X2 at B and c of V_X3 at B.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefinedSeries {
    curve: ChainCurve,
    r: usize,
    series: [ComponentSeries; 3],
    a: Vec<usize>,
    b: Vec<usize>,
    bprime: Vec<usize>,
    c: Vec<usize>,
}

impl RefinedSeries {
    /// Wraps three component series of a common dimension r+1 ≥ 1. Only the
    /// dimensions are checked here; see [`RefinedSeries::refinedness_violations`].
    pub fn new(curve: ChainCurve, v1: Subspace, v2: Subspace, v3: Subspace) -> Result<RefinedSeries> {
        let n = curve.component_dim();
        for (q, v) in [(1, &v1), (2, &v2), (3, &v3)] {
            if v.ambient_dim() != n {
                return Err(Error::InvalidInstance(format!(
                    "V_X{q} lives in dimension {}, expected {n}",
                    v.ambient_dim()
                )));
            }
            if v.field() != curve.field() {
                return Err(Error::InvalidInstance(format!("V_X{q} is over another field")));
            }
        }
        if v1.is_zero() || v1.dim() != v2.dim() || v2.dim() != v3.dim() {
            return Err(Error::InvalidInstance(format!(
                "component series must share a positive dimension, got {}, {}, {}",
                v1.dim(),
                v2.dim(),
                v3.dim()
            )));
        }
        let r = v1.dim() - 1;
        let series = [
            ComponentSeries::new(Component::X1, v1),
            ComponentSeries::new(Component::X2, v2),
            ComponentSeries::new(Component::X3, v3),
        ];
        let a = series[0].vanishing_sequence(Node::A)?;
        let b = series[1].vanishing_sequence(Node::A)?;
        let bprime = series[1].vanishing_sequence(Node::B)?;
        let c = series[2].vanishing_sequence(Node::B)?;
        Ok(RefinedSeries { curve, r, series, a, b, bprime, c })
    }

    pub fn curve(&self) -> ChainCurve {
        self.curve
    }

    pub fn d(&self) -> usize {
        self.curve.d()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn series(&self, q: Component) -> &ComponentSeries {
        &self.series[q.index() - 1]
    }

    pub fn v(&self, q: Component) -> &Subspace {
        &self.series(q).space
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn bprime(&self) -> &[usize] {
        &self.bprime
    }

    pub fn c(&self) -> &[usize] {
        &self.c
    }

    /// Failed identities among a_j + b_{r−j} = d and b′_k + c_{r−k} = d.
    pub fn refinedness_violations(&self) -> Vec<String> {
        let (d, r) = (self.d(), self.r);
        let mut out = Vec::new();
        for j in 0..=r {
            if self.a[j] + self.b[r - j] != d {
                out.push(format!("a_{j} + b_{} = {} ≠ {d}", r - j, self.a[j] + self.b[r - j]));
            }
            if self.bprime[j] + self.c[r - j] != d {
                out.push(format!(
                    "b'_{j} + c_{} = {} ≠ {d}",
                    r - j,
                    self.bprime[j] + self.c[r - j]
                ));
            }
        }
        out
    }

    pub fn is_refined(&self) -> bool {
        self.refinedness_violations().is_empty()
    }

    /// V_X2(−iA − lB).
    pub fn v2_twist(&self, i: usize, l: usize) -> Subspace {
        self.series[1].twist(i, l)
    }

    /// Orders of V_X2(−lB) at A.
    pub fn v2_orders_at_a(&self, l: usize) -> Vec<usize> {
        orders_or_empty(&self.v2_twist(0, l), ChartPoint::Zero)
    }

    /// Orders of V_X2(−iA) at B.
    pub fn v2_orders_at_b(&self, i: usize) -> Vec<usize> {
        orders_or_empty(&self.v2_twist(i, 0), ChartPoint::Infinity)
    }
}

/// The j with seq_{j−1} < x ≤ seq_j, using seq_{−1} = −1; `None` past the end.
pub fn interval_index(seq: &[usize], x: usize) -> Option<usize> {
    seq.iter().position(|&s| x <= s)
}

/// K_il as the intersection of the three α-preimages of the twisted series.
pub fn kernel_space(h: &RefinedSeries, space: &SectionSpace) -> Result<Subspace> {
    let md = space.multidegree();
    let d = h.d();
    let (i, l) = md.cell();
    let p1 = map_preimage(&space.alpha(Component::X1), &h.series(Component::X1).twist(d - i, 0))?;
    let p2 = map_preimage(&space.alpha(Component::X2), &h.v2_twist(i, l))?;
    let p3 = map_preimage(&space.alpha(Component::X3), &h.series(Component::X3).twist(0, d - l))?;
    p1.intersect(&p2)?.intersect(&p3)
}

/// The ingredients of the predicted dimension of K_il.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimPrediction {
    pub dim_v1: usize,
    pub dim_v2: usize,
    pub dim_v3: usize,
    pub drop_a: bool,
    pub drop_b: bool,
}

impl DimPrediction {
    pub fn rank(&self) -> usize {
        self.drop_a as usize + self.drop_b as usize
    }

    pub fn dim(&self) -> usize {
        self.dim_v1 + self.dim_v2 + self.dim_v3 - self.rank()
    }
}

/// dim V1(−(d−i)A) + dim V2(−iA−lB) + dim V3(−(d−l)B) − rank ev^{il}, with the
/// rank read off the four twist-drop tests. Assumes h is refined.
pub fn kernel_dim_predicted(h: &RefinedSeries, i: usize, l: usize) -> Result<DimPrediction> {
    let d = h.d();
    if i + l > d {
        return Err(Error::InvalidMultidegree { d, i, l });
    }
    let v1 = h.series(Component::X1);
    let v3 = h.series(Component::X3);
    let dim_v1 = v1.twist(d - i, 0).dim();
    let dim_v2 = h.v2_twist(i, l).dim();
    let dim_v3 = v3.twist(0, d - l).dim();
    let drop_a = dim_v1 > v1.twist(d - i + 1, 0).dim() || dim_v2 > h.v2_twist(i + 1, l).dim();
    let drop_b = dim_v3 > v3.twist(0, d - l + 1).dim() || dim_v2 > h.v2_twist(i, l + 1).dim();
    Ok(DimPrediction { dim_v1, dim_v2, dim_v3, drop_a, drop_b })
}

/// A subspace of the section space at a cell with its vanishing parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellSpace {
    pub space: Subspace,
    /// W^{X_q,0} for q = 1, 2, 3.
    pub on: [Subspace; 3],
    /// W^{X_q^c,0} for q = 1, 2, 3.
    pub off: [Subspace; 3],
}

impl CellSpace {
    pub fn new(ambient: &SectionSpace, space: Subspace) -> CellSpace {
        let on = Component::ALL.map(|q| ambient.vanishing_part(&space, Subcurve::single(q)));
        let off = Component::ALL.map(|q| ambient.vanishing_part(&space, Subcurve::complement_of(q)));
        CellSpace { space, on, off }
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn on(&self, q: Component) -> &Subspace {
        &self.on[q.index() - 1]
    }

    pub fn off(&self, q: Component) -> &Subspace {
        &self.off[q.index() - 1]
    }
}

/// K_il at every cell, keyed by (i, l).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelGrid {
    d: usize,
    r: usize,
    cells: BTreeMap<(usize, usize), CellSpace>,
}

impl KernelGrid {
    pub fn compute(h: &RefinedSeries, table: &TransferTable, exec: Execution) -> Result<KernelGrid> {
        let keys: Vec<(usize, usize)> = h.curve().cells().iter().map(|m| m.cell()).collect();
        let spaces = exec.try_map(&keys, |&cell| {
            let amb = table.ambient(cell)?;
            Ok::<_, Error>((cell, CellSpace::new(amb, kernel_space(h, amb)?)))
        })?;
        Ok(KernelGrid { d: h.d(), r: h.r(), cells: spaces.into_iter().collect() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn cell(&self, i: usize, l: usize) -> &CellSpace {
        &self.cells[&(i, l)]
    }

    pub fn get(&self, i: usize, l: usize) -> &Subspace {
        &self.cell(i, l).space
    }

    pub fn dim(&self, i: usize, l: usize) -> usize {
        self.get(i, l).dim()
    }

    pub fn cells(&self) -> impl Iterator<Item = (&(usize, usize), &CellSpace)> {
        self.cells.iter()
    }

    pub fn keys(&self) -> Vec<(usize, usize)> {
        self.cells.keys().copied().collect()
    }
}

/// A refined series with its transfer maps and kernel grid, ready for checks.
pub struct KernelModel {
    pub h: RefinedSeries,
    pub table: TransferTable,
    pub grid: KernelGrid,
    pub exec: Execution,
}

impl KernelModel {
    pub fn new(h: RefinedSeries, exec: Execution) -> Result<KernelModel> {
        let table = TransferTable::new(h.curve())?;
        let grid = KernelGrid::compute(&h, &table, exec)?;
        Ok(KernelModel { h, table, grid, exec })
    }

    fn per_cell<F>(&self, f: F) -> Report
    where
        F: Fn(usize, usize) -> Vec<CheckRecord> + Sync + Send,
    {
        let keys = self.grid.keys();
        self.exec
            .map(&keys, |&(i, l)| f(i, l))
            .into_iter()
            .flatten()
            .collect()
    }

    fn image(&self, m: &crate::transfer::TransferMap, w: &Subspace) -> Subspace {
        map_image(&m.matrix, w).expect("chart shapes agree")
    }

    /// dim K_il ≥ r+1, with equality when i ≤ b_0 or l ≤ b′_0, plus the
    /// identification of K at the three extreme multidegrees with V_X1,2,3.
    pub fn check_lower_bound(&self) -> Report {
        let r = self.h.r();
        let (b0, bp0) = (self.h.b()[0], self.h.bprime()[0]);
        let d = self.h.d();
        let mut report = self.per_cell(|i, l| {
            let dim = self.grid.dim(i, l);
            let boundary = i <= b0 || l <= bp0;
            let pass = dim > r && (!boundary || dim == r + 1);
            vec![CheckRecord::new((i, l), "kernel_lower_bound", pass)
                .with("dim", dim)
                .with("r", r)
                .with("boundary", boundary)]
        });
        for (q, cell) in [(Component::X1, (d, 0)), (Component::X2, (0, 0)), (Component::X3, (0, d))] {
            let amb = self.table.ambient(cell).expect("extreme cell");
            let img = map_image(&amb.alpha(q), self.grid.get(cell.0, cell.1)).expect("shapes");
            report.push(
                CheckRecord::new(cell, "extreme_kernel", &img == self.h.v(q))
                    .with("component", q.to_string()),
            );
        }
        report
    }

    /// Direct dim K_il against the case-formula prediction.
    pub fn check_dim_prediction(&self) -> Report {
        self.per_cell(|i, l| {
            let p = kernel_dim_predicted(&self.h, i, l).expect("cell in grid");
            let dim = self.grid.dim(i, l);
            vec![CheckRecord::new((i, l), "kernel_dim_prediction", dim == p.dim())
                .with("dim", dim)
                .with("predicted", p.dim())
                .with("rank_ev", p.rank())]
        })
    }

    /// φ_down(K_src) ⊆ K_tgt and φ_up(K_tgt) ⊆ K_src on every edge.
    pub fn check_linking(&self) -> Report {
        self.per_cell(|i, l| {
            let mut out = Vec::new();
            for q in Component::ALL {
                let (Ok(down), Ok(up)) = (
                    self.table.get((i, l), q, crate::transfer::Direction::Down),
                    self.table.get((i, l), q, crate::transfer::Direction::Up),
                ) else {
                    continue;
                };
                let (ti, tl) = down.target.cell();
                let k_src = self.grid.get(i, l);
                let k_tgt = self.grid.get(ti, tl);
                let ok_down = self.image(down, k_src).is_subspace_of(k_tgt);
                let ok_up = self.image(up, k_tgt).is_subspace_of(k_src);
                out.push(
                    CheckRecord::new((i, l), "linking", ok_down && ok_up)
                        .with("q", q.index())
                        .with("down", ok_down)
                        .with("up", ok_up),
                );
            }
            out
        })
    }

    /// The three image identities of forward exactness.
    pub fn check_forward_exact(&self) -> Report {
        self.per_cell(|i, l| {
            let k = self.grid.get(i, l);
            let mut out = Vec::new();
            if i >= 1 && l >= 1 {
                let img = self.image(self.table.d_to_dprime(i, l).expect("edge"), k);
                let want = self.grid.cell(i - 1, l - 1).off(Component::X2);
                out.push(CheckRecord::new((i, l), "forward_exact", &img == want).with("item", 1));
            }
            if i >= 1 {
                let img = self.image(self.table.d_to_d2(i, l).expect("edge"), k);
                let want = self.grid.cell(i - 1, l).on(Component::X1);
                out.push(CheckRecord::new((i, l), "forward_exact", &img == want).with("item", 2));
            }
            if l >= 1 {
                let down = self
                    .table
                    .get((i, l), Component::X3, crate::transfer::Direction::Down)
                    .expect("edge");
                let img = self.image(down, k);
                let want = self.grid.cell(i, l - 1).on(Component::X3);
                out.push(CheckRecord::new((i, l), "forward_exact", &img == want).with("item", 3));
            }
            out
        })
    }

    /// Both equivalences of the reverse-direction statement.
    pub fn check_reverse(&self) -> Report {
        self.per_cell(|i, l| {
            let mut out = Vec::new();
            if i >= 1 {
                let img = self.image(self.table.d2_to_d(i, l).expect("edge"), self.grid.get(i - 1, l));
                let differs = &img != self.grid.cell(i, l).off(Component::X1);
                let cond = self.h.b().contains(&(i - 1)) && !self.h.v2_orders_at_a(l).contains(&(i - 1));
                out.push(
                    CheckRecord::new((i, l), "reverse_equivalence", differs == cond)
                        .with("item", 1)
                        .with("image_differs", differs)
                        .with("order_condition", cond),
                );
            }
            if l >= 1 {
                let up = self
                    .table
                    .get((i, l), Component::X3, crate::transfer::Direction::Up)
                    .expect("edge");
                let img = self.image(up, self.grid.get(i, l - 1));
                let differs = &img != self.grid.cell(i, l).off(Component::X3);
                let cond =
                    self.h.bprime().contains(&(l - 1)) && !self.h.v2_orders_at_b(i).contains(&(l - 1));
                out.push(
                    CheckRecord::new((i, l), "reverse_equivalence", differs == cond)
                        .with("item", 2)
                        .with("image_differs", differs)
                        .with("order_condition", cond),
                );
            }
            out
        })
    }

    /// K^{q1,0} ∩ (K^{q2,0} + K^{q3,0}) = K^{X_q3^c,0} + K^{X_q2^c,0} for all
    /// orderings, and the permutation symmetry of distributivity.
    pub fn check_distributivity(&self) -> Report {
        self.per_cell(|i, l| {
            let cell = self.grid.cell(i, l);
            let mut out = Vec::new();
            let mut distributes = Vec::new();
            for [q1, q2, q3] in permutations() {
                let lhs = cell.on(q1).intersect(&cell.on(q2).sum(cell.on(q3)).expect("ambient")).expect("ambient");
                let rhs = cell.off(q3).sum(cell.off(q2)).expect("ambient");
                out.push(
                    CheckRecord::new((i, l), "distributivity", lhs == rhs)
                        .with("order", format!("{}{}{}", q1.index(), q2.index(), q3.index())),
                );
                distributes.push(distributes_over(cell.on(q1), cell.on(q2), cell.on(q3)));
            }
            let symmetric = distributes.iter().all(|&x| x == distributes[0]);
            out.push(
                CheckRecord::new((i, l), "distributivity_symmetry", symmetric)
                    .with("distributes", distributes[0]),
            );
            out
        })
    }

    /// dim(K^{q1,0} + K^{q2,0}) ≥ dim K − 1 and Σ dim K^{q,0} ≥ 2(dim K − 1).
    pub fn check_dim_inequalities(&self) -> Report {
        self.per_cell(|i, l| {
            let cell = self.grid.cell(i, l);
            let k = cell.dim();
            let mut out = Vec::new();
            for (q1, q2) in [(Component::X1, Component::X2), (Component::X1, Component::X3), (Component::X2, Component::X3)] {
                let s = cell.on(q1).sum(cell.on(q2)).expect("ambient").dim();
                out.push(
                    CheckRecord::new((i, l), "dim_pair_inequality", s + 1 >= k)
                        .with("pair", format!("{}{}", q1.index(), q2.index()))
                        .with("dim_sum", s)
                        .with("dim", k),
                );
            }
            let total: usize = cell.on.iter().map(Subspace::dim).sum();
            out.push(
                CheckRecord::new((i, l), "dim_total_inequality", total + 2 >= 2 * k)
                    .with("total", total)
                    .with("dim", k),
            );
            out
        })
    }

    /// Equality in the total inequality ⟺ i is an order of V2(−lB) at A and l
    /// an order of V2(−iA) at B; then all three vanishing parts are proper.
    pub fn check_properness(&self) -> Report {
        self.per_cell(|i, l| {
            let cell = self.grid.cell(i, l);
            let k = cell.dim();
            let total: usize = cell.on.iter().map(Subspace::dim).sum();
            let equality = total + 2 == 2 * k;
            let cond = self.h.v2_orders_at_a(l).contains(&i) && self.h.v2_orders_at_b(i).contains(&l);
            let proper = cell.on.iter().all(|w| w.dim() < k);
            vec![CheckRecord::new((i, l), "properness", equality == cond && (!equality || proper))
                .with("equality", equality)
                .with("order_condition", cond)
                .with("proper", proper)]
        })
    }

    /// dim K is nondecreasing in i and in l.
    pub fn check_monotonicity(&self) -> Report {
        self.per_cell(|i, l| {
            let k = self.grid.dim(i, l);
            let mut out = Vec::new();
            if i > 0 {
                let prev = self.grid.dim(i - 1, l);
                out.push(CheckRecord::new((i, l), "monotonicity", k >= prev).with("direction", "i").with("prev", prev).with("dim", k));
            }
            if l > 0 {
                let prev = self.grid.dim(i, l - 1);
                out.push(CheckRecord::new((i, l), "monotonicity", k >= prev).with("direction", "l").with("prev", prev).with("dim", k));
            }
            out
        })
    }

    /// If φ_{d̲'',d̲}(K_{i−1,l}) = K_il^{X1^c,0} then dim K_il = dim K_{i−1,l}.
    pub fn check_equal_dimensions(&self) -> Report {
        self.per_cell(|i, l| {
            if i == 0 {
                return Vec::new();
            }
            let img = self.image(self.table.d2_to_d(i, l).expect("edge"), self.grid.get(i - 1, l));
            let hyp = &img == self.grid.cell(i, l).off(Component::X1);
            let same = self.grid.dim(i, l) == self.grid.dim(i - 1, l);
            vec![CheckRecord::new((i, l), "equal_dimensions", !hyp || same)
                .with("hypothesis", hyp)
                .with("same_dim", same)]
        })
    }

    /// Every statement about the kernel grid, in a fixed order.
    pub fn check_all(&self) -> Report {
        [
            self.check_lower_bound(),
            self.check_dim_prediction(),
            self.check_linking(),
            self.check_forward_exact(),
            self.check_reverse(),
            self.check_distributivity(),
            self.check_dim_inequalities(),
            self.check_properness(),
            self.check_monotonicity(),
            self.check_equal_dimensions(),
        ]
        .into_iter()
        .collect()
    }
}

fn permutations() -> [[Component; 3]; 6] {
    use Component::*;
    [
        [X1, X2, X3],
        [X1, X3, X2],
        [X2, X1, X3],
        [X2, X3, X1],
        [X3, X1, X2],
        [X3, X2, X1],
    ]
}

/// Whether V1 ∩ (V2 + V3) = (V1 ∩ V2) + (V1 ∩ V3).
pub fn distributes_over(v1: &Subspace, v2: &Subspace, v3: &Subspace) -> bool {
    let lhs = v1.intersect(&v2.sum(v3).expect("ambient")).expect("ambient");
    let rhs = v1
        .intersect(v2)
        .expect("ambient")
        .sum(&v1.intersect(v3).expect("ambient"))
        .expect("ambient");
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Field;

    const Q: Field = Field::Rational;

    fn span(d: usize, polys: &[&[i64]]) -> Subspace {
        let rows = polys
            .iter()
            .map(|p| {
                let mut v: Vec<_> = p.iter().map(|&x| Q.from_i64(x)).collect();
                v.resize(d + 1, Q.zero());
                v
            })
            .collect();
        Subspace::span(Q, d + 1, rows).unwrap()
    }

    fn unique_fixture() -> RefinedSeries {
        let c = ChainCurve::new(4, Q).unwrap();
        let v = span(4, &[&[1], &[0, 0, 0, 0, 1]]);
        RefinedSeries::new(c, v.clone(), v.clone(), v).unwrap()
    }

    fn witness_fixture() -> RefinedSeries {
        let c = ChainCurve::new(4, Q).unwrap();
        let v2 = span(4, &[&[0, 0, 1], &[1, 0, 0, 0, 1]]);
        let side = span(4, &[&[0, 0, 1], &[0, 0, 0, 0, 1]]);
        RefinedSeries::new(c, side.clone(), v2, side).unwrap()
    }

    #[test]
    fn sequences_and_refinedness() {
        let h = witness_fixture();
        assert_eq!(h.b(), &[0, 2]);
        assert_eq!(h.bprime(), &[0, 2]);
        assert_eq!(h.a(), &[2, 4]);
        assert_eq!(h.c(), &[2, 4]);
        assert!(h.is_refined());
        let c = ChainCurve::new(4, Q).unwrap();
        let bad = RefinedSeries::new(c, span(4, &[&[1], &[0, 1]]), h.v(Component::X2).clone(), h.v(Component::X3).clone()).unwrap();
        assert!(!bad.is_refined());
        assert!(RefinedSeries::new(c, span(4, &[&[1]]), h.v(Component::X2).clone(), h.v(Component::X3).clone()).is_err());
    }

    #[test]
    fn interval_indices() {
        assert_eq!(interval_index(&[0, 2], 0), Some(0));
        assert_eq!(interval_index(&[0, 2], 1), Some(1));
        assert_eq!(interval_index(&[0, 2], 2), Some(1));
        assert_eq!(interval_index(&[0, 2], 3), None);
        assert_eq!(interval_index(&[1, 3], 0), Some(0));
    }

    #[test]
    fn kernel_dims_unique_fixture() {
        let m = KernelModel::new(unique_fixture(), Execution::Sequential).unwrap();
        for (&(i, l), cell) in m.grid.cells() {
            assert!(cell.dim() >= 2, "({i},{l})");
            assert_eq!(cell.dim(), kernel_dim_predicted(&m.h, i, l).unwrap().dim());
        }
        for l in 0..=4 {
            assert_eq!(m.grid.dim(0, l), 2);
        }
        assert!(m.check_all().all_pass());
    }

    #[test]
    fn witness_cell_has_extra_dimension() {
        let m = KernelModel::new(witness_fixture(), Execution::Sequential).unwrap();
        assert_eq!(m.grid.dim(1, 1), 3);
        assert_eq!(kernel_dim_predicted(&m.h, 1, 1).unwrap().dim(), 3);
        let report = m.check_all();
        assert!(report.all_pass(), "{:?}", report.failures());
        // the failure branch of the reverse statement is exercised
        assert!(report
            .records
            .iter()
            .any(|r| r.check == "reverse_equivalence" && r.details["image_differs"] == true));
    }

    #[test]
    fn parallel_and_sequential_grids_agree() {
        let a = KernelModel::new(witness_fixture(), Execution::Sequential).unwrap();
        let b = KernelModel::new(witness_fixture(), Execution::Parallel).unwrap();
        assert_eq!(a.grid, b.grid);
        assert_eq!(a.check_all(), b.check_all());
    }

    #[test]
    fn distributivity_helper() {
        // three distinct lines in a plane do not distribute
        let x = Subspace::span(Q, 2, vec![vec![Q.one(), Q.zero()]]).unwrap();
        let y = Subspace::span(Q, 2, vec![vec![Q.zero(), Q.one()]]).unwrap();
        let z = Subspace::span(Q, 2, vec![vec![Q.one(), Q.one()]]).unwrap();
        assert!(!distributes_over(&x, &y, &z));
        assert!(distributes_over(&x, &x, &y));
    }
}
