//! Exact extensions of a refined series, built column by column.
//!
//! Column 0 is V_0l = K_0l. For i = 1, …, d−1 the cells (i, l) are filled
//! for l = d−i down to 0 from the already built neighbours
//! d̲' = (i−1, l−1), d̲'' = (i−1, l) and d̲''' = (i, l+1):
//!
//! V_d̲ = base + ⟨v_1, …, v_β⟩,
//!
//! where the base is the sum of the φ-images of V_d̲' and V_d̲''' that exist,
//! u_1, …, u_β complete V_d̲''^{X2^c,0} ⊕ V_d̲''^{X3^c,0} to V_d̲''^{X1,0}, and
//! each v lies in K_il with φ_{d̲,d̲''}(v) = u. The last cell is V_d0 = K_d0.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::curve::Component;
use crate::error::{Error, Result};
use crate::kernel::KernelModel;
use crate::matrix::{combine, parse_rows, Vector};
use crate::par::Execution;
use crate::report::{CheckRecord, Report};
use crate::rng::{cell_rng, random_combination, random_scalar};
use crate::scalar::Field;
use crate::subspace::{lift, map_image, Subspace};
use crate::transfer::{Direction, TransferMap};

type CellMap = BTreeMap<(usize, usize), Subspace>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChoiceStrategy {
    /// u's from the pivot-rule complement, v's from the free-variables-zero lift.
    Deterministic,
    /// Deterministic choices perturbed by ChaCha8 draws on per-cell streams.
    Seeded(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StepCase {
    #[serde(rename = "column0")]
    Column0,
    #[serde(rename = "step1")]
    Step1,
    #[serde(rename = "step2")]
    Step2,
    #[serde(rename = "step3")]
    Step3,
    #[serde(rename = "assert-closure")]
    Closure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StepTrace {
    pub cell: [usize; 2],
    pub case: StepCase,
    pub beta: usize,
    pub u: Vec<Vector>,
    pub v: Vec<Vector>,
}

/// A subspace V_d̲ for every multidegree, with the trace of how it was built.
#[derive(Clone, Debug)]
pub struct ExtensionGrid {
    d: usize,
    r: usize,
    field: Field,
    cells: BTreeMap<(usize, usize), Subspace>,
    traces: Vec<StepTrace>,
}

impl PartialEq for ExtensionGrid {
    fn eq(&self, other: &ExtensionGrid) -> bool {
        self.d == other.d && self.field == other.field && self.cells == other.cells
    }
}

impl Eq for ExtensionGrid {}

impl ExtensionGrid {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn get(&self, i: usize, l: usize) -> &Subspace {
        &self.cells[&(i, l)]
    }

    pub fn cells(&self) -> &BTreeMap<(usize, usize), Subspace> {
        &self.cells
    }

    pub fn traces(&self) -> &[StepTrace] {
        &self.traces
    }

    /// Replaces one cell; used to build corrupted grids in tests.
    pub fn with_cell(mut self, i: usize, l: usize, v: Subspace) -> ExtensionGrid {
        self.cells.insert((i, l), v);
        self
    }

    /// SHA-256 of the canonical grid JSON, in hex.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("grid serializes");
        let mut out = String::with_capacity(64);
        for b in Sha256::digest(bytes) {
            let _ = write!(out, "{b:02x}");
        }
        out
    }

    /// Trace as JSON lines, in build order.
    pub fn trace_lines(&self) -> String {
        self.traces
            .iter()
            .map(|t| serde_json::to_string(t).expect("trace serializes") + "\n")
            .collect()
    }

    /// Reads the "i,l" → basis map written by the serializer.
    pub fn from_json(s: &str, field: Field, d: usize) -> Result<ExtensionGrid> {
        let raw: BTreeMap<String, Vec<Vec<String>>> = serde_json::from_str(s)?;
        let mut cells = BTreeMap::new();
        for (key, rows) in raw {
            let (i, l) = key
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .ok_or_else(|| Error::Parse(format!("bad cell key {key:?}")))?;
            if i + l > d {
                return Err(Error::InvalidMultidegree { d, i, l });
            }
            let m = parse_rows(field, d + 1, &rows)?;
            cells.insert((i, l), Subspace::row_space(&m));
        }
        let expected = (d + 1) * (d + 2) / 2;
        if cells.len() != expected {
            return Err(Error::Parse(format!("grid has {} cells, expected {expected}", cells.len())));
        }
        let r = cells.values().next().map_or(0, |v| v.dim().saturating_sub(1));
        Ok(ExtensionGrid { d, r, field, cells, traces: Vec::new() })
    }
}

impl Serialize for ExtensionGrid {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.cells.len()))?;
        for ((i, l), v) in &self.cells {
            map.serialize_entry(&format!("{i},{l}"), v.basis())?;
        }
        map.end()
    }
}

/// Cells of columns 1..d−1, in build order.
pub fn build_order(d: usize) -> Vec<(usize, usize)> {
    (1..d).flat_map(|i| (0..=d - i).rev().map(move |l| (i, l))).collect()
}

enum Choice<'a> {
    Strategy(ChoiceStrategy),
    /// Explicit v's (replay).
    Lifts(&'a [Vector]),
    /// Deterministic v's shifted by the given elements of K ∩ ker φ.
    Offsets(&'a [Vector]),
}

/// Everything at a cell that does not depend on the free choices.
struct Prepared {
    i: usize,
    l: usize,
    case: StepCase,
    base: Subspace,
    beta: usize,
    /// V''^{X2^c,0} + V''^{X3^c,0}
    w23: Subspace,
    w1: Subspace,
    u_det: Vec<Vector>,
}

/// The extension algorithm over one kernel model.
pub struct Builder<'m> {
    m: &'m KernelModel,
}

fn prereq(i: usize, l: usize, reason: impl Into<String>) -> Error {
    Error::Prerequisite { i, l, reason: reason.into() }
}

impl<'m> Builder<'m> {
    pub fn new(m: &'m KernelModel) -> Builder<'m> {
        Builder { m }
    }

    fn field(&self) -> Field {
        self.m.h.curve().field()
    }

    fn n(&self) -> usize {
        self.m.h.d() + 1
    }

    fn img(&self, map: &TransferMap, w: &Subspace) -> Subspace {
        map_image(&map.matrix, w).expect("chart shapes agree")
    }

    fn part(&self, cell: (usize, usize), v: &Subspace, y: crate::curve::Subcurve) -> Subspace {
        self.m.table.ambient(cell).expect("cell").vanishing_part(v, y)
    }

    fn on(&self, cell: (usize, usize), v: &Subspace, q: Component) -> Subspace {
        self.part(cell, v, crate::curve::Subcurve::single(q))
    }

    fn off(&self, cell: (usize, usize), v: &Subspace, q: Component) -> Subspace {
        self.part(cell, v, crate::curve::Subcurve::complement_of(q))
    }

    /// Asserts φ(V_src) = V_tgt^{Y,0} for the given map.
    fn expect_image(
        &self,
        at: (usize, usize),
        map: &TransferMap,
        src: &Subspace,
        tgt: &Subspace,
        y: crate::curve::Subcurve,
        what: &str,
    ) -> Result<()> {
        let lhs = self.img(map, src);
        let rhs = self.part(map.target.cell(), tgt, y);
        if lhs != rhs {
            return Err(prereq(at.0, at.1, format!("{what} fails")));
        }
        Ok(())
    }

    fn column_zero(&self) -> Result<(CellMap, Vec<StepTrace>)> {
        let (d, r) = (self.m.h.d(), self.m.h.r());
        let mut cells = BTreeMap::new();
        let mut traces = Vec::new();
        for l in 0..=d {
            let k = self.m.grid.get(0, l).clone();
            if k.dim() != r + 1 {
                return Err(prereq(0, l, format!("dim K_0{l} = {} ≠ r+1", k.dim())));
            }
            cells.insert((0, l), k);
            traces.push(StepTrace { cell: [0, l], case: StepCase::Column0, beta: 0, u: vec![], v: vec![] });
        }
        Ok((cells, traces))
    }

    fn prepare(&self, cells: &BTreeMap<(usize, usize), Subspace>, i: usize, l: usize) -> Result<Prepared> {
        use Component::*;
        use crate::curve::Subcurve;
        let d = self.m.h.d();
        let t = &self.m.table;
        let case = if i + l == d {
            StepCase::Step1
        } else if l == 0 {
            StepCase::Step3
        } else {
            StepCase::Step2
        };
        let d2 = (i - 1, l);
        let v2 = &cells[&d2];
        let w1 = self.on(d2, v2, X1);
        let w2c = self.off(d2, v2, X2);
        let w3c = self.off(d2, v2, X3);
        let w23 = w2c.sum(&w3c)?;
        let beta = w1.dim() - w23.dim();

        let mut parts = Vec::new();
        if matches!(case, StepCase::Step1 | StepCase::Step2) {
            let dp = (i - 1, l - 1);
            let vp = &cells[&dp];
            self.expect_image((i, l), t.dprime_to_d2(i, l)?, vp, v2, Subcurve::complement_of(X3), "φ_{d',d''}(V') = V''^{X3^c,0}")?;
            self.expect_image((i, l), t.d2_to_dprime(i, l)?, v2, vp, Subcurve::single(X3), "φ_{d'',d'}(V'') = V'^{X3,0}")?;
            parts.push(self.img(t.dprime_to_d(i, l)?, vp));
        }
        if matches!(case, StepCase::Step2 | StepCase::Step3) {
            let v3 = &cells[&(i, l + 1)];
            self.expect_image((i, l), t.d2_to_d3(i, l)?, v2, v3, Subcurve::single(X2), "φ_{d'',d'''}(V'') = V'''^{X2,0}")?;
            self.expect_image((i, l), t.d3_to_d2(i, l)?, v3, v2, Subcurve::complement_of(X2), "φ_{d''',d''}(V''') = V''^{X2^c,0}")?;
            parts.push(self.img(t.d3_to_d(i, l)?, v3));
        }
        match case {
            StepCase::Step1 if !w2c.is_zero() => return Err(prereq(i, l, "V''^{X2^c,0} ≠ 0")),
            StepCase::Step3 if !w3c.is_zero() => return Err(prereq(i, l, "V''^{X3^c,0} ≠ 0")),
            _ => {}
        }
        let base = parts
            .iter()
            .skip(1)
            .try_fold(parts[0].clone(), |acc, p| acc.sum(p))?;
        let r = self.m.h.r();
        if base.dim() + beta != r + 1 {
            return Err(prereq(i, l, format!("dim base = {} but r+1−β = {}", base.dim(), r + 1 - beta.min(r + 1))));
        }
        if case == StepCase::Step2 {
            let meet = parts[0].intersect(&parts[1])?;
            if self.img(t.d2_to_d(i, l)?, v2) != meet {
                return Err(prereq(i, l, "φ_{d'',d}(V'') ≠ φ(V') ∩ φ(V''')"));
            }
        }
        let u_det = w23.complement_in(&w1)?;
        Ok(Prepared { i, l, case, base, beta, w23, w1, u_det })
    }

    /// Some v ∈ K_il with φ_{d̲,d̲''}(v) = u, free variables set to zero.
    fn lift_into_kernel(&self, i: usize, l: usize, u: &[crate::scalar::Scalar]) -> Result<Vector> {
        let k = self.m.grid.get(i, l);
        let phi = &self.m.table.d_to_d2(i, l)?.matrix;
        let m = phi.mul(&k.basis().transpose())?;
        let x = lift(&m, u).map_err(|_| prereq(i, l, "u has no lift to K_il"))?;
        Ok(combine(self.field(), self.n(), &x, k.basis_vectors()))
    }

    fn choose(&self, p: &Prepared, choice: &Choice<'_>) -> Result<(Vec<Vector>, Vec<Vector>)> {
        let (i, l) = (p.i, p.l);
        let f = self.field();
        let n = self.n();
        match choice {
            Choice::Strategy(ChoiceStrategy::Deterministic) => {
                let v = p.u_det.iter().map(|u| self.lift_into_kernel(i, l, u)).collect::<Result<_>>()?;
                Ok((p.u_det.clone(), v))
            }
            Choice::Strategy(ChoiceStrategy::Seeded(seed)) => {
                let mut rng = cell_rng(*seed, i, l);
                let kernel = self.m.grid.cell(i, l).off(Component::X1).basis_vectors().to_vec();
                let w23 = p.w23.basis_vectors().to_vec();
                let mut us = Vec::with_capacity(p.beta);
                let mut vs = Vec::with_capacity(p.beta);
                for a in 0..p.beta {
                    let mut coeffs = vec![f.zero(); p.beta];
                    coeffs[a] = f.one();
                    for c in coeffs.iter_mut().skip(a + 1) {
                        *c = random_scalar(f, &mut rng);
                    }
                    let mixed = combine(f, n, &coeffs, &p.u_det);
                    let shift = random_combination(f, n, &w23, &mut rng);
                    let u = combine(f, n, &[f.one(), f.one()], &[mixed, shift]);
                    let v0 = self.lift_into_kernel(i, l, &u)?;
                    let k = random_combination(f, n, &kernel, &mut rng);
                    vs.push(combine(f, n, &[f.one(), f.one()], &[v0, k]));
                    us.push(u);
                }
                Ok((us, vs))
            }
            Choice::Offsets(offsets) => {
                let mut vs = Vec::with_capacity(p.beta);
                for (u, k) in p.u_det.iter().zip(offsets.iter()) {
                    let v0 = self.lift_into_kernel(i, l, u)?;
                    vs.push(combine(f, n, &[f.one(), f.one()], &[v0, k.clone()]));
                }
                Ok((p.u_det.clone(), vs))
            }
            Choice::Lifts(vs) => {
                if vs.len() != p.beta {
                    return Err(Error::Replay { i, l, reason: format!("{} lifts for β = {}", vs.len(), p.beta) });
                }
                let phi = self.m.table.d_to_d2(i, l)?;
                let us: Vec<Vector> = vs.iter().map(|v| phi.apply(v)).collect();
                let k = self.m.grid.get(i, l);
                if !vs.iter().all(|v| k.contains(v)) {
                    return Err(Error::Replay { i, l, reason: "a lift is not in K_il".into() });
                }
                let span = Subspace::span(f, n, us.clone())?;
                let total = p.w23.sum(&span)?;
                if span.dim() != p.beta || !span.is_subspace_of(&p.w1) || total.dim() != p.w1.dim() {
                    return Err(Error::Replay { i, l, reason: "extracted u's are not a complement".into() });
                }
                Ok((us, vs.to_vec()))
            }
        }
    }

    /// Assembles V_d̲ and asserts the exactness identities of its case.
    fn finish(
        &self,
        cells: &BTreeMap<(usize, usize), Subspace>,
        p: &Prepared,
        us: Vec<Vector>,
        vs: Vec<Vector>,
    ) -> Result<(Subspace, StepTrace)> {
        use crate::curve::Subcurve;
        use Component::*;
        let (i, l) = (p.i, p.l);
        let t = &self.m.table;
        let v = p.base.sum(&Subspace::span(self.field(), self.n(), vs.clone())?)?;
        let r = self.m.h.r();
        if v.dim() != r + 1 {
            return Err(prereq(i, l, format!("built space has dim {}", v.dim())));
        }
        if !v.is_subspace_of(self.m.grid.get(i, l)) {
            return Err(prereq(i, l, "built space is not inside K_il"));
        }
        let here = (i, l);
        let d2 = (i - 1, l);
        let v2 = &cells[&d2];
        self.expect_image(here, t.d2_to_d(i, l)?, v2, &v, Subcurve::complement_of(X1), "φ_{d'',d}(V'') = V^{X1^c,0}")?;
        self.expect_image(here, t.d_to_d2(i, l)?, &v, v2, Subcurve::single(X1), "φ_{d,d''}(V) = V''^{X1,0}")?;
        if matches!(p.case, StepCase::Step1 | StepCase::Step2) {
            let vp = &cells[&(i - 1, l - 1)];
            self.expect_image(here, t.dprime_to_d(i, l)?, vp, &v, Subcurve::single(X2), "φ_{d',d}(V') = V^{X2,0}")?;
            self.expect_image(here, t.d_to_dprime(i, l)?, &v, vp, Subcurve::complement_of(X2), "φ_{d,d'}(V) = V'^{X2^c,0}")?;
        }
        if matches!(p.case, StepCase::Step2 | StepCase::Step3) {
            let v3 = &cells[&(i, l + 1)];
            self.expect_image(here, t.d3_to_d(i, l)?, v3, &v, Subcurve::single(X3), "φ_{d''',d}(V''') = V^{X3,0}")?;
            self.expect_image(here, t.d_to_d3(i, l)?, &v, v3, Subcurve::complement_of(X3), "φ_{d,d'''}(V) = V'''^{X3^c,0}")?;
        }
        let trace = StepTrace { cell: [i, l], case: p.case, beta: p.beta, u: us, v: vs };
        Ok((v, trace))
    }

    fn build_cell(
        &self,
        cells: &BTreeMap<(usize, usize), Subspace>,
        i: usize,
        l: usize,
        choice: &Choice<'_>,
    ) -> Result<(Subspace, StepTrace)> {
        let p = self.prepare(cells, i, l)?;
        let (us, vs) = self.choose(&p, choice)?;
        self.finish(cells, &p, us, vs)
    }

    /// Vertical exactness on the X3 edges of column i.
    fn check_column(&self, cells: &BTreeMap<(usize, usize), Subspace>, i: usize) -> Result<()> {
        use crate::curve::Subcurve;
        let d = self.m.h.d();
        for l in 1..=d - i {
            let (hi, lo) = (&cells[&(i, l)], &cells[&(i, l - 1)]);
            let down = self.m.table.get((i, l), Component::X3, Direction::Down)?;
            let up = self.m.table.get((i, l), Component::X3, Direction::Up)?;
            self.expect_image((i, l), down, hi, lo, Subcurve::single(Component::X3), "vertical exactness (down)")?;
            self.expect_image((i, l), up, lo, hi, Subcurve::complement_of(Component::X3), "vertical exactness (up)")?;
        }
        Ok(())
    }

    fn close(
        &self,
        mut cells: BTreeMap<(usize, usize), Subspace>,
        mut traces: Vec<StepTrace>,
    ) -> Result<ExtensionGrid> {
        let d = self.m.h.d();
        let kd = self.m.grid.get(d, 0).clone();
        let amb = self.m.table.ambient((d, 0))?;
        if map_image(&amb.alpha(Component::X1), &kd)? != *self.m.h.v(Component::X1) {
            return Err(Error::Closure("K_d0 does not restrict to V_X1".into()));
        }
        cells.insert((d, 0), kd);
        traces.push(StepTrace { cell: [d, 0], case: StepCase::Closure, beta: 0, u: vec![], v: vec![] });
        for i in 0..=d {
            if cells[&(i, 0)] != *self.m.grid.get(i, 0) {
                return Err(Error::Closure(format!("V_{i}0 ≠ K_{i}0")));
            }
        }
        let grid = ExtensionGrid {
            d,
            r: self.m.h.r(),
            field: self.field(),
            cells,
            traces,
        };
        let report = verify_exact(self.m, &grid);
        if let Some(f) = report.failures().first() {
            return Err(Error::Closure(format!(
                "{} fails at ({}, {})",
                f.check, f.point[0], f.point[1]
            )));
        }
        Ok(grid)
    }

    fn build_with<'c>(&self, choice_at: impl Fn(usize, usize) -> Choice<'c>) -> Result<ExtensionGrid> {
        let d = self.m.h.d();
        let (mut cells, mut traces) = self.column_zero()?;
        self.check_column(&cells, 0)?;
        for i in 1..d {
            for l in (0..=d - i).rev() {
                let (v, trace) = self.build_cell(&cells, i, l, &choice_at(i, l))?;
                cells.insert((i, l), v);
                traces.push(trace);
            }
            self.check_column(&cells, i)?;
        }
        self.close(cells, traces)
    }

    pub fn build(&self, strategy: ChoiceStrategy) -> Result<ExtensionGrid> {
        self.build_with(|_, _| Choice::Strategy(strategy))
    }
}

/// Runs the full construction and its closure assertions.
pub fn build_extension(m: &KernelModel, strategy: ChoiceStrategy) -> Result<ExtensionGrid> {
    Builder::new(m).build(strategy)
}

/// Builds one grid per seed.
pub fn seed_sweep(m: &KernelModel, seeds: &[u64], exec: Execution) -> Result<Vec<ExtensionGrid>> {
    exec.try_map(seeds, |&s| build_extension(m, ChoiceStrategy::Seeded(s)))
}

/// Exactness on every edge in both directions, dim r+1 and V ⊆ K everywhere.
pub fn verify_exact(m: &KernelModel, grid: &ExtensionGrid) -> Report {
    use crate::curve::Subcurve;
    let keys: Vec<(usize, usize)> = grid.cells.keys().copied().collect();
    let r = m.h.r();
    m.exec
        .map(&keys, |&(i, l)| {
            let v = grid.get(i, l);
            let mut out = vec![
                CheckRecord::new((i, l), "dimension", v.dim() == r + 1).with("dim", v.dim()),
                CheckRecord::new((i, l), "inside_kernel", v.is_subspace_of(m.grid.get(i, l))),
            ];
            for q in Component::ALL {
                let (Ok(down), Ok(up)) = (
                    m.table.get((i, l), q, Direction::Down),
                    m.table.get((i, l), q, Direction::Up),
                ) else {
                    continue;
                };
                let tcell = down.target.cell();
                let vt = grid.get(tcell.0, tcell.1);
                let amb_s = m.table.ambient((i, l)).expect("cell");
                let amb_t = m.table.ambient(tcell).expect("cell");
                let ok_down = map_image(&down.matrix, v).expect("shape")
                    == amb_t.vanishing_part(vt, Subcurve::single(q));
                let ok_up = map_image(&up.matrix, vt).expect("shape")
                    == amb_s.vanishing_part(v, Subcurve::complement_of(q));
                out.push(
                    CheckRecord::new((i, l), "exact", ok_down && ok_up)
                        .with("q", q.index())
                        .with("down", ok_down)
                        .with("up", ok_up),
                );
            }
            out
        })
        .into_iter()
        .flatten()
        .collect()
}

/// Whether the grid restricts to h at the three extreme multidegrees.
pub fn verify_extends(m: &KernelModel, grid: &ExtensionGrid) -> bool {
    let d = m.h.d();
    [(Component::X1, (d, 0)), (Component::X2, (0, 0)), (Component::X3, (0, d))]
        .into_iter()
        .all(|(q, cell)| {
            let amb = m.table.ambient(cell).expect("extreme cell");
            map_image(&amb.alpha(q), grid.get(cell.0, cell.1)).ok().as_ref() == Some(m.h.v(q))
        })
}

/// Rebuilds an external grid from choices extracted out of it: per cell the
/// v's are a complement of the base inside V_d̲. Fails unless every cell is
/// reproduced exactly.
pub fn replay_extension(m: &KernelModel, external: &ExtensionGrid) -> Result<ExtensionGrid> {
    let d = m.h.d();
    if external.d != d || external.field != m.h.curve().field() {
        return Err(Error::Replay { i: 0, l: 0, reason: "grid belongs to another curve".into() });
    }
    let b = Builder::new(m);
    let (mut cells, mut traces) = b.column_zero()?;
    for l in 0..=d {
        if cells[&(0, l)] != external.cells[&(0, l)] {
            return Err(Error::Replay { i: 0, l, reason: "V_0l ≠ K_0l".into() });
        }
    }
    for i in 1..d {
        for l in (0..=d - i).rev() {
            let target = &external.cells[&(i, l)];
            let replay_err = |reason: String| Error::Replay { i, l, reason };
            let p = b.prepare(&cells, i, l).map_err(|e| replay_err(e.to_string()))?;
            let vs = p
                .base
                .complement_in(target)
                .map_err(|_| replay_err("base is not contained in the cell".into()))?;
            let (us, vs) = b.choose(&p, &Choice::Lifts(&vs))?;
            let (v, trace) = b.finish(&cells, &p, us, vs).map_err(|e| replay_err(e.to_string()))?;
            if &v != target {
                return Err(replay_err("rebuilt cell differs".into()));
            }
            cells.insert((i, l), v);
            traces.push(trace);
        }
    }
    if external.cells[&(d, 0)] != *m.grid.get(d, 0) {
        return Err(Error::Replay { i: d, l: 0, reason: "V_d0 ≠ K_d0".into() });
    }
    b.close(cells, traces)
}

/// All exact extensions over a prime field, by enumerating every choice of
/// kernel offsets at every cell. Fails once more than `limit` grids appear.
pub fn enumerate_extensions(m: &KernelModel, limit: usize) -> Result<Vec<ExtensionGrid>> {
    let field = m.h.curve().field();
    let Some(p) = field.order() else {
        return Err(Error::InvalidField("exhaustive enumeration needs a prime field".into()));
    };
    let b = Builder::new(m);
    let (cells, traces) = b.column_zero()?;
    let order = build_order(m.h.d());
    let mut out = Vec::new();
    let mut state = Dfs { b: &b, order: &order, p, limit, out: &mut out };
    state.walk(0, cells, traces)?;
    Ok(out)
}

struct Dfs<'a, 'm> {
    b: &'a Builder<'m>,
    order: &'a [(usize, usize)],
    p: u32,
    limit: usize,
    out: &'a mut Vec<ExtensionGrid>,
}

impl Dfs<'_, '_> {
    fn walk(
        &mut self,
        idx: usize,
        cells: BTreeMap<(usize, usize), Subspace>,
        traces: Vec<StepTrace>,
    ) -> Result<()> {
        let Some(&(i, l)) = self.order.get(idx) else {
            let grid = self.b.close(cells, traces)?;
            if self.out.len() == self.limit {
                return Err(Error::EnumerationLimit(self.limit));
            }
            self.out.push(grid);
            return Ok(());
        };
        let prepared = self.b.prepare(&cells, i, l)?;
        let kernel = self.b.m.grid.cell(i, l).off(Component::X1).basis_vectors().to_vec();
        let f = self.b.field();
        let n = self.b.n();
        let slots = kernel.len() * prepared.beta;
        let total = (self.p as u64).checked_pow(slots as u32).filter(|&t| t <= 1 << 20);
        let total = total.ok_or(Error::EnumerationLimit(self.limit))?;
        let mut seen = HashSet::new();
        for code in 0..total {
            let mut digits = code;
            let offsets: Vec<Vector> = (0..prepared.beta)
                .map(|_| {
                    let coeffs: Vec<_> = kernel
                        .iter()
                        .map(|_| {
                            let dgt = digits % self.p as u64;
                            digits /= self.p as u64;
                            f.from_i64(dgt as i64)
                        })
                        .collect();
                    combine(f, n, &coeffs, &kernel)
                })
                .collect();
            let (us, vs) = self.b.choose(&prepared, &Choice::Offsets(&offsets))?;
            let (v, trace) = self.b.finish(&cells, &prepared, us, vs)?;
            if !seen.insert(v.clone()) {
                continue;
            }
            let mut next = cells.clone();
            next.insert((i, l), v);
            let mut next_traces = traces.clone();
            next_traces.push(trace);
            let last_in_column = l == 0;
            if last_in_column {
                self.b.check_column(&next, i)?;
            }
            self.walk(idx + 1, next, next_traces)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::ChainCurve;
    use crate::kernel::RefinedSeries;

    fn span(f: Field, d: usize, polys: &[&[i64]]) -> Subspace {
        let rows = polys
            .iter()
            .map(|p| {
                let mut v: Vec<_> = p.iter().map(|&x| f.from_i64(x)).collect();
                v.resize(d + 1, f.zero());
                v
            })
            .collect();
        Subspace::span(f, d + 1, rows).unwrap()
    }

    fn model(f: Field, unique: bool) -> KernelModel {
        let c = ChainCurve::new(4, f).unwrap();
        let h = if unique {
            let v = span(f, 4, &[&[1], &[0, 0, 0, 0, 1]]);
            RefinedSeries::new(c, v.clone(), v.clone(), v).unwrap()
        } else {
            let side = span(f, 4, &[&[0, 0, 1], &[0, 0, 0, 0, 1]]);
            RefinedSeries::new(c, side.clone(), span(f, 4, &[&[0, 0, 1], &[1, 0, 0, 0, 1]]), side).unwrap()
        };
        KernelModel::new(h, Execution::Sequential).unwrap()
    }

    #[test]
    fn build_order_d3() {
        assert_eq!(build_order(3), vec![(1, 2), (1, 1), (1, 0), (2, 1), (2, 0)]);
    }

    #[test]
    fn deterministic_build_is_exact_and_extends() {
        for unique in [true, false] {
            let m = model(Field::Rational, unique);
            let g = build_extension(&m, ChoiceStrategy::Deterministic).unwrap();
            assert!(verify_exact(&m, &g).all_pass());
            assert!(verify_extends(&m, &g));
            assert_eq!(g.traces().len(), 15);
        }
    }

    #[test]
    fn unique_fixture_has_one_grid() {
        let m = model(Field::Rational, true);
        let det = build_extension(&m, ChoiceStrategy::Deterministic).unwrap();
        for g in seed_sweep(&m, &(0..10).collect::<Vec<_>>(), Execution::Parallel).unwrap() {
            assert_eq!(g, det);
        }
    }

    #[test]
    fn witness_fixture_has_two_grids() {
        let m = model(Field::Rational, false);
        let grids = seed_sweep(&m, &(0..10).collect::<Vec<_>>(), Execution::Parallel).unwrap();
        let digests: HashSet<String> = grids.iter().map(ExtensionGrid::digest).collect();
        assert!(digests.len() >= 2);
    }

    #[test]
    fn replay_round_trips_and_rejects_corruption() {
        let m = model(Field::Rational, false);
        for s in [ChoiceStrategy::Deterministic, ChoiceStrategy::Seeded(3)] {
            let g = build_extension(&m, s).unwrap();
            assert_eq!(replay_extension(&m, &g).unwrap(), g);
        }
        let g = build_extension(&m, ChoiceStrategy::Deterministic).unwrap();
        let bad = g.clone().with_cell(1, 1, m.grid.get(1, 1).clone());
        assert!(matches!(replay_extension(&m, &bad), Err(Error::Replay { .. })));
    }

    #[test]
    fn json_round_trip() {
        let m = model(Field::Rational, false);
        let g = build_extension(&m, ChoiceStrategy::Seeded(1)).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(ExtensionGrid::from_json(&s, Field::Rational, 4).unwrap(), g);
        assert!(ExtensionGrid::from_json("{}", Field::Rational, 4).is_err());
    }

    #[test]
    fn exhaustive_counts_over_f5() {
        let f = Field::prime(5).unwrap();
        assert_eq!(enumerate_extensions(&model(f, true), 1000).unwrap().len(), 1);
        assert!(enumerate_extensions(&model(f, false), 1000).unwrap().len() >= 2);
        assert!(enumerate_extensions(&model(Field::Rational, true), 10).is_err());
    }
}
