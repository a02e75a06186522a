//! Deciding whether a refined series has a unique exact extension.
//!
//! The verdict comes from a finite dimension check on the region
//! R = {(i, l) : i+l ≤ d, b_{j−1} < i ≤ b_j, b′_{k−1} < l ≤ b′_k, j+k ≤ r+1},
//! cross-checked against chain adaptability and a seeded build sweep.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::curve::{vanishing_sequence_at, ChartPoint, Component};
use crate::error::{Error, Result};
use crate::extension::{seed_sweep, ExtensionGrid};
use crate::kernel::{interval_index, KernelGrid, KernelModel, RefinedSeries};
use crate::par::Execution;
use crate::report::{CheckRecord, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RegionPoint {
    pub i: usize,
    pub l: usize,
    pub j: usize,
    pub k: usize,
}

/// The interval indices (j, k) of a cell, if both exist.
pub fn cell_indices(h: &RefinedSeries, i: usize, l: usize) -> (Option<usize>, Option<usize>) {
    (interval_index(h.b(), i), interval_index(h.bprime(), l))
}

/// R(h), ordered by (i, l).
pub fn region(h: &RefinedSeries) -> Vec<RegionPoint> {
    let (d, r) = (h.d(), h.r());
    let mut out = Vec::new();
    for i in 0..=d {
        for l in 0..=d - i {
            if let (Some(j), Some(k)) = cell_indices(h, i, l) {
                if j + k <= r + 1 {
                    out.push(RegionPoint { i, l, j, k });
                }
            }
        }
    }
    out
}

/// Cells of R where dim K_il ≠ r+1, as (i, l, dim).
pub fn dim_failures(h: &RefinedSeries, grid: &KernelGrid) -> Vec<(usize, usize, usize)> {
    region(h)
        .into_iter()
        .filter(|p| grid.dim(p.i, p.l) != h.r() + 1)
        .map(|p| (p.i, p.l, grid.dim(p.i, p.l)))
        .collect()
}

pub fn dim_condition(h: &RefinedSeries, grid: &KernelGrid) -> bool {
    dim_failures(h, grid).is_empty()
}

/// Cells of R where dim V_X2(−iA−lB) ≠ r+1−j−k, as (i, l, dim).
pub fn adaptability_failures(h: &RefinedSeries) -> Vec<(usize, usize, usize)> {
    region(h)
        .into_iter()
        .filter_map(|p| {
            let dim = h.v2_twist(p.i, p.l).dim();
            (dim + p.j + p.k != h.r() + 1).then_some((p.i, p.l, dim))
        })
        .collect()
}

pub fn chain_adaptable(h: &RefinedSeries) -> bool {
    adaptability_failures(h).is_empty()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepOutcome {
    AllIdentical,
    DistinctPairFound,
    NoWitnessFound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Corroboration {
    pub dim_condition: bool,
    pub chain_adaptable: bool,
    pub seeds: Vec<u64>,
    pub distinct_grids: usize,
    pub outcome: SweepOutcome,
    /// Digests of the first two distinct grids, when found.
    pub witness_digests: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub unique: bool,
    pub region: Vec<[usize; 2]>,
    pub failures: Vec<[usize; 3]>,
    pub corroboration: Corroboration,
}

/// Seeds `seed, seed+1, …` for a sweep of `trials` builds.
pub fn sweep_seeds(seed: u64, trials: usize) -> Vec<u64> {
    (0..trials as u64).map(|k| seed.wrapping_add(k)).collect()
}

/// The verdict from the dimension condition, with corroborating evidence.
/// Disagreement between the two criteria, or a distinct pair of grids under
/// a unique verdict, is an error.
pub fn decide_unique(m: &KernelModel, seed: u64, trials: usize, exec: Execution) -> Result<Verdict> {
    let failures = dim_failures(&m.h, &m.grid);
    let unique = failures.is_empty();
    let adaptable = chain_adaptable(&m.h);
    if unique != adaptable {
        return Err(Error::Inconsistent(format!(
            "dimension condition says {unique}, chain adaptability says {adaptable}"
        )));
    }
    let seeds = sweep_seeds(seed, trials);
    let grids = seed_sweep(m, &seeds, exec)?;
    let (distinct, witness_digests) = distinct_digests(&grids);
    let outcome = match (unique, distinct) {
        (true, n) if n <= 1 => SweepOutcome::AllIdentical,
        (true, _) => {
            return Err(Error::Inconsistent(format!(
                "unique verdict but {distinct} distinct grids across {trials} seeds"
            )))
        }
        (false, n) if n >= 2 => SweepOutcome::DistinctPairFound,
        (false, _) => SweepOutcome::NoWitnessFound,
    };
    Ok(Verdict {
        unique,
        region: region(&m.h).iter().map(|p| [p.i, p.l]).collect(),
        failures: failures.iter().map(|&(i, l, d)| [i, l, d]).collect(),
        corroboration: Corroboration {
            dim_condition: unique,
            chain_adaptable: adaptable,
            seeds,
            distinct_grids: distinct,
            outcome,
            witness_digests: witness_digests.into_iter().take(2).collect(),
        },
    })
}

/// Number of distinct grids and their digests in first-seen order.
pub fn distinct_digests(grids: &[ExtensionGrid]) -> (usize, Vec<String>) {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    for g in grids {
        let dg = g.digest();
        if seen.insert(dg.clone()) {
            order.push(dg);
        }
    }
    (order.len(), order)
}

/// V_d̲ = V_d̲^{X2,0} for i > b_{j−1}, l > b′_{r−j}, every j in 1..r.
pub fn check_x2_concentration(m: &KernelModel, grid: &ExtensionGrid) -> Report {
    let h = &m.h;
    let (d, r) = (h.d(), h.r());
    let mut report = Report::new();
    for j in 1..=r {
        let (bj, bp) = (h.b()[j - 1], h.bprime()[r - j]);
        for i in bj + 1..=d {
            for l in bp + 1..=d - i {
                let v = grid.get(i, l);
                let amb = m.table.ambient((i, l)).expect("cell");
                let part = amb.vanishing_part(v, crate::curve::Subcurve::single(Component::X2));
                report.push(CheckRecord::new((i, l), "x2_concentration", &part == v).with("j", j));
            }
        }
    }
    report
}

/// Orders of V_X2(−b_j A) at B are b′_0..b′_{r−j}; dually at A.
pub fn check_twisted_orders(h: &RefinedSeries) -> Report {
    let r = h.r();
    let mut report = Report::new();
    for j in 0..=r {
        let bj = h.b()[j];
        let got = vanishing_sequence_at(&h.v2_twist(bj, 0), ChartPoint::Infinity).unwrap_or_default();
        let want = &h.bprime()[..=r - j];
        report.push(
            CheckRecord::new((bj, 0), "twisted_orders", got == want)
                .with("side", "B")
                .with("j", j)
                .with("orders", got),
        );
    }
    for k in 0..=r {
        let bk = h.bprime()[k];
        let got = vanishing_sequence_at(&h.v2_twist(0, bk), ChartPoint::Zero).unwrap_or_default();
        let want = &h.b()[..=r - k];
        report.push(
            CheckRecord::new((0, bk), "twisted_orders", got == want)
                .with("side", "A")
                .with("k", k)
                .with("orders", got),
        );
    }
    report
}

/// For each j in 1..r whose slice of the dimension condition holds, the top
/// order of V_X2(−b_j A) at B is b′_{r−j}.
pub fn check_top_orders(h: &RefinedSeries, grid: &KernelGrid) -> Report {
    let r = h.r();
    let pts = region(h);
    let mut report = Report::new();
    for j in 1..=r {
        let slice_holds = pts.iter().filter(|p| p.j == j).all(|p| grid.dim(p.i, p.l) == r + 1);
        if !slice_holds {
            continue;
        }
        let bj = h.b()[j];
        let orders = vanishing_sequence_at(&h.v2_twist(bj, 0), ChartPoint::Infinity).unwrap_or_default();
        let top = orders.last().copied();
        report.push(
            CheckRecord::new((bj, 0), "top_order", top == Some(h.bprime()[r - j]))
                .with("j", j)
                .with("top", top.map_or(-1, |t| t as i64)),
        );
    }
    report
}

/// b_j + b′_{r−j} ≤ d and (b_j, b′_{r−j}) lies in R for every j.
pub fn check_region_sanity(h: &RefinedSeries) -> Report {
    let (d, r) = (h.d(), h.r());
    let pts: BTreeSet<(usize, usize)> = region(h).iter().map(|p| (p.i, p.l)).collect();
    (0..=r)
        .map(|j| {
            let (i, l) = (h.b()[j], h.bprime()[r - j]);
            CheckRecord::new((i, l), "region_sanity", i + l <= d && pts.contains(&(i, l))).with("j", j)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::ChainCurve;
    use crate::extension::{build_extension, ChoiceStrategy};
    use crate::scalar::Field;
    use crate::subspace::Subspace;

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

    fn model(v1: Subspace, v2: Subspace, v3: Subspace, d: usize) -> KernelModel {
        let c = ChainCurve::new(d, Q).unwrap();
        KernelModel::new(RefinedSeries::new(c, v1, v2, v3).unwrap(), Execution::Sequential).unwrap()
    }

    #[test]
    fn unique_fixture() {
        let v = span(4, &[&[1], &[0, 0, 0, 0, 1]]);
        let m = model(v.clone(), v.clone(), v, 4);
        assert!(dim_condition(&m.h, &m.grid));
        assert!(chain_adaptable(&m.h));
        let verdict = decide_unique(&m, 0, 10, Execution::Parallel).unwrap();
        assert!(verdict.unique);
        assert_eq!(verdict.corroboration.outcome, SweepOutcome::AllIdentical);
        let g = build_extension(&m, ChoiceStrategy::Deterministic).unwrap();
        assert!(check_x2_concentration(&m, &g).all_pass());
        assert!(check_twisted_orders(&m.h).all_pass());
        assert!(check_top_orders(&m.h, &m.grid).all_pass());
        assert!(check_region_sanity(&m.h).all_pass());
    }

    #[test]
    fn witness_fixture() {
        let side = span(4, &[&[0, 0, 1], &[0, 0, 0, 0, 1]]);
        let m = model(side.clone(), span(4, &[&[0, 0, 1], &[1, 0, 0, 0, 1]]), side, 4);
        assert_eq!(
            dim_failures(&m.h, &m.grid),
            vec![(1, 1, 3), (1, 2, 3), (2, 1, 3), (2, 2, 3)]
        );
        assert!(!chain_adaptable(&m.h));
        let verdict = decide_unique(&m, 0, 10, Execution::Sequential).unwrap();
        assert!(!verdict.unique);
        assert_eq!(verdict.failures[0], [1, 1, 3]);
        assert_eq!(verdict.corroboration.outcome, SweepOutcome::DistinctPairFound);
        assert_eq!(verdict.corroboration.witness_digests.len(), 2);
    }

    #[test]
    fn rank_zero_region() {
        // r = 0, V2 = ⟨t⟩ in degree 2: b = (1), b′ = (1)
        let m = model(span(2, &[&[0, 1]]), span(2, &[&[0, 1]]), span(2, &[&[0, 1]]), 2);
        let pts: Vec<(usize, usize)> = region(&m.h).iter().map(|p| (p.i, p.l)).collect();
        assert_eq!(pts, vec![(0, 0), (0, 1), (1, 0), (1, 1)]);
        assert!(dim_condition(&m.h, &m.grid));
        assert!(chain_adaptable(&m.h));
    }
}
